// Copyright 2026 The PMG Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "server.hpp"

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <deque>
#include <fstream>
#include <mutex>
#include <sstream>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include <boost/asio.hpp>
#include <boost/beast.hpp>

#include "json.hpp"
#include "log.hpp"

namespace pmg::tools {
namespace {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;
using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

// Ticks emitted back to back after a stall before the schedule is reset.
constexpr int kMaxCatchUp = 5;

struct Shared {
  const pmg_robot* robot = nullptr;
  const pmg_clipset* clips = nullptr;
  ServerOptions options;
  size_t dof = 0;
  std::string model_json;
  pmg_command neutral{};
  json limits;
  std::vector<double> q_stand;
  std::atomic<uint64_t> next_id{1};
  std::atomic<int> active{0};
};

json command_json(const pmg_command& c) {
  return {{"vx", c.vx},       {"vy", c.vy},     {"wz", c.wz},
          {"pitch", c.pitch}, {"roll", c.roll}, {"height", c.height}};
}

// Missing fields take their neutral value.
bool parse_command(const json& j, const pmg_command& neutral, pmg_command* out,
                   std::string* err) {
  pmg_command c = neutral;
  const std::pair<const char*, double*> fields[] = {
      {"vx", &c.vx},       {"vy", &c.vy},     {"wz", &c.wz},
      {"pitch", &c.pitch}, {"roll", &c.roll}, {"height", &c.height}};
  for (const auto& [name, dst] : fields) {
    auto it = j.find(name);
    if (it == j.end() || it->is_null()) continue;
    if (!it->is_number()) {
      *err = std::string("field ") + name + " must be a number";
      return false;
    }
    *dst = it->get<double>();
  }
  *out = c;
  return true;
}

std::string error_message(std::string_view code, std::string_view detail) {
  return json{{"type", "error"}, {"code", code}, {"detail", detail}}.dump();
}

using SessionPtr = std::unique_ptr<pmg_session, decltype(&pmg_session_free)>;

class WsSession : public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(tcp::socket&& socket, std::shared_ptr<Shared> shared, SessionPtr session,
            std::string id)
      : ws_(std::move(socket)),
        timer_(ws_.get_executor()),
        shared_(std::move(shared)),
        session_(std::move(session)),
        id_(std::move(id)),
        latest_(shared_->neutral),
        gco_(shared_->options.session.gco != 0),
        q_(shared_->dof),
        dt_(std::chrono::duration_cast<Clock::duration>(
            std::chrono::duration<double>(shared_->options.session.dt))) {
    shared_->active.fetch_add(1);
  }

  ~WsSession() {
    shared_->active.fetch_sub(1);
    log(LogLevel::kInfo, "session " + id_ + " closed after " + std::to_string(tick_) + " frames");
  }

  void run(http::request<http::string_body> req) {
    beast::get_lowest_layer(ws_).expires_never();
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, beast::bind_front_handler(&WsSession::on_accept, shared_from_this()));
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) {
      log(LogLevel::kWarn, "websocket accept failed: " + ec.message());
      return;
    }
    log(LogLevel::kInfo, "session " + id_ + " opened");
    send(json{{"type", "hello"},
              {"session_id", id_},
              {"dt", shared_->options.session.dt},
              {"dof", shared_->dof},
              {"gco", gco_},
              {"limits", shared_->limits},
              {"q_stand", shared_->q_stand}}
             .dump());
    start_ = Clock::now();
    next_ = start_ + dt_;
    arm_timer();
    do_read();
  }

  void arm_timer() {
    timer_.expires_at(next_);
    timer_.async_wait(beast::bind_front_handler(&WsSession::on_tick, shared_from_this()));
  }

  void on_tick(beast::error_code ec) {
    if (ec || closed_) return;
    const auto now = Clock::now();
    int n = 0;
    while (next_ <= now && n < kMaxCatchUp) {
      emit_frame();
      next_ += dt_;
      ++n;
    }
    if (next_ <= now) {
      log(LogLevel::kWarn, "session " + id_ + " fell behind; resetting tick schedule");
      next_ = now + dt_;
    }
    if (!closed_) arm_timer();
  }

  void emit_frame() {
    pmg_frame f{};
    const pmg_status s = pmg_session_step(session_.get(), &latest_, &f, q_.data(), nullptr, q_.size());
    if (s != PMG_OK) {
      send(error_message("step_failed", pmg_last_error()));
      return;
    }
    const double t_wall = std::chrono::duration<double>(Clock::now() - start_).count();
    json msg = {{"type", "frame"},
                {"session_id", id_},
                {"seq", tick_},
                {"t", f.t},
                {"phase", f.phase},
                {"period", f.period},
                {"standing", f.standing != 0},
                {"q_ref", q_},
                {"contact", {f.contact[0] != 0, f.contact[1] != 0}},
                {"u_prime", f.u_prime},
                {"correction", f.correction},
                {"slip_pre", f.slip_pre},
                {"slip_post", f.slip_post},
                {"stance_residual", f.stance_residual},
                {"u_cmd", command_json(f.command)},
                {"cmd_seq", cmd_seq_},
                {"gco", gco_},
                {"t_wall", t_wall}};
    ++tick_;
    send(msg.dump());
  }

  void do_read() {
    ws_.async_read(rbuf_, beast::bind_front_handler(&WsSession::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, size_t) {
    if (ec) {
      if (ec != websocket::error::closed) {
        log(LogLevel::kDebug, "session " + id_ + " read: " + ec.message());
      }
      shut_down();
      return;
    }
    const std::string text = beast::buffers_to_string(rbuf_.data());
    rbuf_.consume(rbuf_.size());
    handle_message(text);
    do_read();
  }

  void handle_message(const std::string& text) {
    const json j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      send(error_message("parse_error", "message is not a JSON object"));
      return;
    }
    auto type = j.find("type");
    if (type == j.end() || !type->is_string()) {
      send(error_message("bad_message", "missing string field type"));
      return;
    }
    const std::string& kind = type->get_ref<const std::string&>();
    if (kind == "command") {
      pmg_command c;
      std::string err;
      if (!parse_command(j, shared_->neutral, &c, &err)) {
        send(error_message("bad_message", err));
        return;
      }
      latest_ = c;
      auto seq = j.find("seq");
      cmd_seq_ = (seq != j.end() && seq->is_number_integer()) ? seq->get<int64_t>() : cmd_seq_ + 1;
    } else if (kind == "config") {
      auto gco = j.find("gco");
      if (gco == j.end() || !gco->is_boolean()) {
        send(error_message("bad_message", "config requires boolean field gco"));
        return;
      }
      gco_ = gco->get<bool>();
      pmg_session_set_gco(session_.get(), gco_ ? 1 : 0);
    } else {
      send(error_message("unknown_type", "unsupported message type " + kind));
    }
  }

  void send(std::string text) {
    if (closed_) return;
    if (outq_.size() >= shared_->options.max_queued_frames) {
      log(LogLevel::kWarn, "session " + id_ + " client too slow; dropping connection");
      shut_down();
      beast::get_lowest_layer(ws_).close();
      return;
    }
    outq_.push_back(std::move(text));
    if (!writing_) do_write();
  }

  void do_write() {
    writing_ = true;
    ws_.text(true);
    ws_.async_write(asio::buffer(outq_.front()),
                    beast::bind_front_handler(&WsSession::on_write, shared_from_this()));
  }

  void on_write(beast::error_code ec, size_t) {
    if (ec) {
      shut_down();
      return;
    }
    outq_.pop_front();
    if (!outq_.empty() && !closed_) {
      do_write();
    } else {
      writing_ = false;
    }
  }

  void shut_down() {
    closed_ = true;
    timer_.cancel();
  }

  websocket::stream<beast::tcp_stream> ws_;
  asio::steady_timer timer_;
  std::shared_ptr<Shared> shared_;
  SessionPtr session_;
  std::string id_;
  beast::flat_buffer rbuf_;
  std::deque<std::string> outq_;
  bool writing_ = false;
  bool closed_ = false;
  pmg_command latest_;
  int64_t cmd_seq_ = 0;
  bool gco_;
  std::vector<double> q_;
  Clock::duration dt_;
  Clock::time_point start_, next_;
  long tick_ = 0;
};

std::string_view mime_type(const std::filesystem::path& p) {
  const std::string ext = p.extension().string();
  if (ext == ".html" || ext == ".htm") return "text/html";
  if (ext == ".js" || ext == ".mjs") return "application/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".json") return "application/json";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  if (ext == ".wasm") return "application/wasm";
  if (ext == ".ico") return "image/x-icon";
  return "application/octet-stream";
}

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket&& socket, std::shared_ptr<Shared> shared)
      : stream_(std::move(socket)), shared_(std::move(shared)) {}

  void run() {
    asio::dispatch(stream_.get_executor(),
                   beast::bind_front_handler(&HttpSession::do_read, shared_from_this()));
  }

 private:
  using Response = http::response<http::string_body>;

  void do_read() {
    req_ = {};
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buf_, req_,
                     beast::bind_front_handler(&HttpSession::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, size_t) {
    if (ec == http::error::end_of_stream) {
      stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
      return;
    }
    if (ec) return;
    if (websocket::is_upgrade(req_)) {
      upgrade();
      return;
    }
    respond(handle());
  }

  void upgrade() {
    if (path() != "/session") {
      respond(text_response(http::status::not_found, "text/plain", "no such endpoint\n"));
      return;
    }
    const std::string id = "s" + std::to_string(shared_->next_id.fetch_add(1));
    pmg_session_config config = shared_->options.session;
    config.session_id = id.c_str();
    pmg_session* raw = nullptr;
    if (pmg_session_create(shared_->robot, shared_->clips, &config, &raw) != PMG_OK) {
      log(LogLevel::kError, std::string("session refused: ") + pmg_last_error());
      respond(text_response(http::status::service_unavailable, "text/plain",
                            std::string("session unavailable: ") + pmg_last_error() + "\n"));
      return;
    }
    std::make_shared<WsSession>(stream_.release_socket(), shared_,
                                SessionPtr(raw, &pmg_session_free), id)
        ->run(std::move(req_));
  }

  std::string path() const {
    std::string target(req_.target());
    const size_t q = target.find('?');
    if (q != std::string::npos) target.resize(q);
    return target;
  }

  Response text_response(http::status status, std::string_view type, std::string body) {
    Response res{status, req_.version()};
    res.set(http::field::server, "pmg");
    res.set(http::field::content_type, type);
    res.keep_alive(req_.keep_alive());
    res.body() = std::move(body);
    res.prepare_payload();
    return res;
  }

  Response handle() {
    if (req_.method() != http::verb::get && req_.method() != http::verb::head) {
      return text_response(http::status::method_not_allowed, "text/plain", "GET only\n");
    }
    std::string p = path();
    if (p == "/model") return text_response(http::status::ok, "application/json", shared_->model_json);
    const auto& root = shared_->options.assets_dir;
    if (root.empty()) {
      return text_response(http::status::not_found, "text/plain", "no asset bundle configured\n");
    }
    if (p.empty() || p.back() == '/') p += "index.html";
    if (p.find("..") != std::string::npos || p.front() != '/') {
      return text_response(http::status::bad_request, "text/plain", "bad path\n");
    }
    const std::filesystem::path file = root / p.substr(1);
    std::error_code fec;
    if (!std::filesystem::is_regular_file(file, fec)) {
      return text_response(http::status::not_found, "text/plain", "not found\n");
    }
    std::ifstream in(file, std::ios::binary);
    std::ostringstream body;
    body << in.rdbuf();
    Response res = text_response(http::status::ok, mime_type(file), body.str());
    if (req_.method() == http::verb::head) res.body().clear();
    return res;
  }

  void respond(Response res) {
    res_ = std::make_shared<Response>(std::move(res));
    http::async_write(stream_, *res_,
                      beast::bind_front_handler(&HttpSession::on_write, shared_from_this()));
  }

  void on_write(beast::error_code ec, size_t) {
    if (ec) return;
    if (res_->need_eof()) {
      stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
      return;
    }
    res_.reset();
    do_read();
  }

  beast::tcp_stream stream_;
  beast::flat_buffer buf_;
  http::request<http::string_body> req_;
  std::shared_ptr<Response> res_;
  std::shared_ptr<Shared> shared_;
};

}  // namespace

struct Server::Impl {
  asio::io_context ioc;
  asio::executor_work_guard<asio::io_context::executor_type> work{ioc.get_executor()};
  tcp::acceptor acceptor{ioc};
  std::shared_ptr<Shared> shared = std::make_shared<Shared>();
  std::vector<std::thread> threads;
  std::mutex mu;
  std::condition_variable cv;
  bool running = false;

  void do_accept() {
    acceptor.async_accept(asio::make_strand(ioc), [this](beast::error_code ec, tcp::socket s) {
      if (ec == asio::error::operation_aborted) return;
      if (ec) {
        log(LogLevel::kWarn, "accept: " + ec.message());
      } else {
        s.set_option(tcp::no_delay(true));
        std::make_shared<HttpSession>(std::move(s), shared)->run();
      }
      if (acceptor.is_open()) do_accept();
    });
  }
};

Server::Server(const pmg_robot* robot, const pmg_clipset* clips, ServerOptions options)
    : impl_(std::make_unique<Impl>()) {
  Shared& s = *impl_->shared;
  s.robot = robot;
  s.clips = clips;
  s.options = std::move(options);
  s.options.session.session_id = nullptr;
  s.dof = pmg_robot_dof(robot);
  size_t len = 0;
  pmg_robot_to_json(robot, nullptr, 0, &len);
  std::string text(len + 1, '\0');
  if (pmg_robot_to_json(robot, text.data(), text.size(), &len) != PMG_OK) {
    throw std::runtime_error(std::string("robot serialization failed: ") + pmg_last_error());
  }
  text.resize(len);
  s.model_json = std::move(text);
  pmg_command lo, hi;
  pmg_robot_command_limits(robot, &lo, &hi, &s.neutral);
  s.limits = {{"lower", command_json(lo)}, {"upper", command_json(hi)},
              {"neutral", command_json(s.neutral)}};
  s.q_stand.resize(s.dof);
  pmg_robot_q_stand(robot, s.q_stand.data(), s.dof);
}

Server::~Server() { stop(); }

unsigned short Server::start() {
  Impl& m = *impl_;
  const ServerOptions& o = m.shared->options;
  const tcp::endpoint ep(asio::ip::make_address(o.host), o.port);
  m.acceptor.open(ep.protocol());
  m.acceptor.set_option(asio::socket_base::reuse_address(true));
  m.acceptor.bind(ep);
  m.acceptor.listen(asio::socket_base::max_listen_connections);
  m.do_accept();
  {
    std::lock_guard<std::mutex> lock(m.mu);
    m.running = true;
  }
  const int n = std::max(1, o.threads);
  for (int i = 0; i < n; ++i) m.threads.emplace_back([&m] { m.ioc.run(); });
  return m.acceptor.local_endpoint().port();
}

void Server::stop() {
  Impl& m = *impl_;
  {
    std::lock_guard<std::mutex> lock(m.mu);
    if (!m.running && m.threads.empty()) return;
    m.running = false;
  }
  m.work.reset();
  m.ioc.stop();
  for (auto& t : m.threads) {
    if (t.joinable()) t.join();
  }
  m.threads.clear();
  beast::error_code ec;
  m.acceptor.close(ec);
  m.cv.notify_all();
}

void Server::wait() {
  std::unique_lock<std::mutex> lock(impl_->mu);
  impl_->cv.wait(lock, [this] { return !impl_->running; });
}

int Server::active_sessions() const { return impl_->shared->active.load(); }

std::filesystem::path resolve_assets_dir(const std::string& flag, const char* argv0) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("PMG_ASSETS_DIR"); env && *env) return env;
  fs::path exe = fs::read_symlink("/proc/self/exe", ec);
  if (ec && argv0) exe = fs::absolute(argv0, ec);
  std::vector<fs::path> candidates;
  if (!exe.empty()) candidates.push_back(exe.parent_path().parent_path() / "share" / "pmg" / "assets");
  candidates.push_back(fs::current_path(ec) / "assets");
#ifdef PMG_SOURCE_ASSETS_DIR
  candidates.emplace_back(PMG_SOURCE_ASSETS_DIR);
#endif
  for (const auto& c : candidates) {
    if (fs::is_directory(c, ec)) return c;
  }
  return {};
}

}  // namespace pmg::tools

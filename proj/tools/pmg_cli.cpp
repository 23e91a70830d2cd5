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


// pmg: batch pipelines and the streaming service.

#include <pthread.h>
#include <signal.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "log.hpp"
#include "pmg/pmg.h"
#include "server.hpp"

namespace {

using pmg::tools::log;
using pmg::tools::LogLevel;

struct Failure {
  pmg_status status;
};

void check(pmg_status s) {
  if (s != PMG_OK) throw Failure{s};
}

struct SessionFlags {
  std::optional<double> dt;
  std::optional<double> slew;
  std::optional<double> filter_hz;
  bool no_gco = false;

  void add(CLI::App* app) {
    app->add_option("--dt", dt, "Tick period in seconds");
    app->add_option("--slew", slew, "Command slew rate per second, 0 disables");
    app->add_option("--filter-hz", filter_hz, "Enable the command low-pass at this cutoff");
    app->add_flag("--no-gco", no_gco, "Disable ground-aware command optimization");
  }

  pmg_session_config config() const {
    pmg_session_config c;
    pmg_session_config_default(&c);
    if (dt) c.dt = *dt;
    if (slew) c.slew_rate = *slew;
    if (filter_hz) {
      c.filter = 1;
      c.filter_cutoff_hz = *filter_hz;
    }
    if (no_gco) c.gco = 0;
    return c;
  }
};

struct Assets {
  std::unique_ptr<pmg_robot, decltype(&pmg_robot_free)> robot{nullptr, &pmg_robot_free};
  std::unique_ptr<pmg_clipset, decltype(&pmg_clipset_free)> clips{nullptr, &pmg_clipset_free};

  Assets(const std::string& robot_path, const std::string& clips_path) {
    pmg_robot* r = nullptr;
    check(pmg_robot_load(robot_path.c_str(), &r));
    robot.reset(r);
    pmg_clipset* c = nullptr;
    check(pmg_clipset_load(clips_path.c_str(), robot.get(), &c));
    clips.reset(c);
  }
};

struct PreprocessArgs {
  std::string capture, out, robot, name, channel = "vx";
  int direction = 1;
  double rate = 0;
  double kernel = 3.0;
};

int run_preprocess(const PreprocessArgs& a) {
  pmg_preprocess_options o{};
  o.capture_path = a.capture.c_str();
  o.out_path = a.out.c_str();
  o.robot_path = a.robot.empty() ? nullptr : a.robot.c_str();
  o.name = a.name.empty() ? nullptr : a.name.c_str();
  o.channel = a.channel.c_str();
  o.direction = a.direction;
  o.rate_hz = a.rate;
  o.kernel_std = a.kernel;
  std::vector<char> warnings(1 << 14, '\0');
  check(pmg_preprocess(&o, warnings.data(), warnings.size()));
  std::string w(warnings.data());
  size_t start = 0;
  while (start < w.size()) {
    size_t end = w.find('\n', start);
    if (end == std::string::npos) end = w.size();
    if (end > start) log(LogLevel::kWarn, w.substr(start, end - start));
    start = end + 1;
  }
  log(LogLevel::kInfo, "wrote " + a.out);
  return 0;
}

struct GenerateArgs {
  std::string robot, clips, commands, out, diag;
  SessionFlags session;
};

int run_generate(const GenerateArgs& a) {
  pmg_generate_options o{};
  o.robot_path = a.robot.c_str();
  o.clips_path = a.clips.c_str();
  o.commands_path = a.commands.c_str();
  o.out_path = a.out.c_str();
  o.diag_path = a.diag.empty() ? nullptr : a.diag.c_str();
  o.session = a.session.config();
  pmg_generate_summary s{};
  check(pmg_generate_file(&o, &s));
  std::printf("frames=%ld max_slip_pre=%.6g max_slip_post=%.6g\n", s.frames, s.max_slip_pre,
              s.max_slip_post);
  return 0;
}

struct SysidArgs {
  std::string record, bounds, out;
  pmg_sysid_options o{};
};

int run_sysid(SysidArgs& a) {
  a.o.record_path = a.record.c_str();
  a.o.bounds_path = a.bounds.c_str();
  a.o.out_path = a.out.c_str();
  pmg_sysid_summary s{};
  check(pmg_sysid_run(&a.o, &s));
  std::printf("loss_before=%.6g loss_after=%.6g train_rms=%.6g validation_rms=%.6g evaluations=%ld%s\n",
              s.loss_before, s.loss_after, s.train_rms, s.validation_rms, s.evaluations,
              s.flagged ? " flagged" : "");
  if (s.flagged) log(LogLevel::kWarn, "identification flagged; see report for details");
  return 0;
}

struct ZerocalArgs {
  std::string samples, out;
  pmg_zerocal_options o{};
};

int run_zerocal(ZerocalArgs& a) {
  a.o.samples_path = a.samples.c_str();
  a.o.out_path = a.out.c_str();
  pmg_zerocal_summary s{};
  check(pmg_zerocal_run(&a.o, &s));
  std::printf("iterations=%d converged=%s\n", s.iterations, s.converged ? "yes" : "no");
  return 0;
}

struct BenchArgs {
  std::string robot, clips;
  long frames = 100000;
  SessionFlags session;
};

int run_bench(const BenchArgs& a) {
  if (a.frames <= 0) throw CLI::ValidationError("--frames", "must be positive");
  Assets assets(a.robot, a.clips);
  const pmg_session_config config = a.session.config();
  pmg_session* raw = nullptr;
  check(pmg_session_create(assets.robot.get(), assets.clips.get(), &config, &raw));
  std::unique_ptr<pmg_session, decltype(&pmg_session_free)> session(raw, &pmg_session_free);

  pmg_command lo, hi, neutral;
  check(pmg_robot_command_limits(assets.robot.get(), &lo, &hi, &neutral));
  const size_t dof = pmg_robot_dof(assets.robot.get());
  std::vector<double> q(dof), qd(dof);
  pmg_frame f{};
  double checksum = 0;

  // Slowly varying mixed command so every channel and both contact
  // patterns are exercised.
  const auto t0 = std::chrono::steady_clock::now();
  for (long k = 0; k < a.frames; ++k) {
    const double s = std::sin(1e-3 * static_cast<double>(k));
    pmg_command c = neutral;
    c.vx = 0.6 * hi.vx * s;
    c.vy = 0.3 * hi.vy * std::cos(7e-4 * static_cast<double>(k));
    c.wz = 0.3 * hi.wz * s;
    check(pmg_session_step(session.get(), &c, &f, q.data(), qd.data(), dof));
    checksum += q[0];
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("frames=%ld seconds=%.4f frames_per_second=%.0f gco=%s\n", a.frames, secs,
              static_cast<double>(a.frames) / secs, config.gco ? "on" : "off");
  log(LogLevel::kDebug, "checksum " + std::to_string(checksum));
  return 0;
}

struct ServeArgs {
  std::string robot, clips, host = "127.0.0.1", assets;
  int port = 8080;
  int threads = 2;
  SessionFlags session;
};

int run_serve(const ServeArgs& a, const char* argv0) {
  if (a.port < 0 || a.port > 65535) throw CLI::ValidationError("--port", "out of range");
  Assets assets(a.robot, a.clips);
  pmg::tools::ServerOptions o;
  o.host = a.host;
  o.port = static_cast<unsigned short>(a.port);
  o.threads = a.threads;
  o.session = a.session.config();
  o.assets_dir = pmg::tools::resolve_assets_dir(a.assets, argv0);

  // Worker threads inherit the blocked mask; the main thread waits for
  // the signal synchronously.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  pmg::tools::Server server(assets.robot.get(), assets.clips.get(), o);
  const unsigned short port = server.start();
  std::printf("listening on %s:%u\n", a.host.c_str(), port);
  std::fflush(stdout);
  if (o.assets_dir.empty()) {
    log(LogLevel::kWarn, "no asset bundle found; / will return 404");
  } else {
    log(LogLevel::kInfo, "serving assets from " + o.assets_dir.string());
  }
  int sig = 0;
  sigwait(&set, &sig);
  log(LogLevel::kInfo, "signal " + std::to_string(sig) + ", shutting down");
  server.stop();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parametric motion generator tools", "pmg"};
  app.require_subcommand(1);
  app.fallthrough();  // --log-level may follow the subcommand
  std::string level = "warn";
  app.add_option("--log-level", level, "debug, info, warn, error or off")
      ->check(CLI::IsMember({"debug", "info", "warn", "error", "off"}));

  PreprocessArgs pre;
  auto* p = app.add_subcommand("preprocess", "Convert a retargeted capture into a cyclic clip");
  p->add_option("--capture", pre.capture, "Capture CSV")->required();
  p->add_option("--out", pre.out, "Output clip JSON")->required();
  p->add_option("--rate", pre.rate, "Capture sample rate in Hz")->required();
  p->add_option("--robot", pre.robot, "Robot model for a DoF check");
  p->add_option("--name", pre.name, "Clip name");
  p->add_option("--channel", pre.channel, "Dynamic channel")->check(CLI::IsMember({"vx", "vy", "wz"}));
  p->add_option("--direction", pre.direction, "Channel direction")->check(CLI::IsMember({-1, 1}));
  p->add_option("--kernel", pre.kernel, "Seam smoothing kernel std in frames, 0 skips");

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Run the generator over a command schedule");
  g->add_option("--robot", gen.robot, "Robot model JSON")->required();
  g->add_option("--clips", gen.clips, "Clip set JSON")->required();
  g->add_option("--commands", gen.commands, "Command schedule CSV")->required();
  g->add_option("--out", gen.out, "Trajectory CSV")->required();
  g->add_option("--diag", gen.diag, "Per-frame diagnostics CSV");
  gen.session.add(g);

  SysidArgs sid;
  pmg_sysid_options_default(&sid.o);
  auto* s = app.add_subcommand("sysid", "Identify actuator parameters from a joint record");
  s->add_option("--record", sid.record, "Joint record CSV")->required();
  s->add_option("--bounds", sid.bounds, "Parameter bounds JSON")->required();
  s->add_option("--out", sid.out, "Report JSON")->required();
  s->add_option("--population", sid.o.population, "CMA-ES population, 0 picks default")
      ->capture_default_str();
  s->add_option("--max-evals", sid.o.max_evaluations, "Loss evaluation budget")->capture_default_str();
  s->add_option("--seed", sid.o.seed, "RNG seed")->capture_default_str();
  s->add_option("--threads", sid.o.threads, "Worker threads")->capture_default_str();
  s->add_option("--sigma0", sid.o.sigma0, "Initial step size in normalized units")
      ->capture_default_str();
  s->add_option("--holdout", sid.o.holdout_fraction, "Validation fraction")->capture_default_str();

  ZerocalArgs zc;
  pmg_zerocal_options_default(&zc.o);
  auto* z = app.add_subcommand("zerocal", "Estimate joint zero offsets from pose samples");
  z->add_option("--samples", zc.samples, "Pose samples JSON")->required();
  z->add_option("--out", zc.out, "Offsets JSON")->required();
  z->add_option("--alpha", zc.o.alpha, "Update gain")->capture_default_str();
  z->add_option("--tau", zc.o.tau, "IMU alignment gate in rad")->capture_default_str();
  z->add_option("--eps", zc.o.eps, "Convergence threshold in rad")->capture_default_str();
  z->add_option("--consecutive", zc.o.consecutive, "Iterations below eps")->capture_default_str();
  z->add_option("--max-iter", zc.o.max_iterations, "Iteration cap")->capture_default_str();

  BenchArgs bench;
  auto* b = app.add_subcommand("bench", "Measure single-thread generator throughput");
  b->add_option("--robot", bench.robot, "Robot model JSON")->required();
  b->add_option("--clips", bench.clips, "Clip set JSON")->required();
  b->add_option("--frames", bench.frames, "Frames to generate")->capture_default_str();
  bench.session.add(b);

  ServeArgs srv;
  auto* v = app.add_subcommand("serve", "Stream generator sessions over WebSocket");
  v->add_option("--robot", srv.robot, "Robot model JSON")->required();
  v->add_option("--clips", srv.clips, "Clip set JSON")->required();
  v->add_option("--host", srv.host, "Bind address")->capture_default_str();
  v->add_option("--port", srv.port, "Port, 0 picks a free one")->capture_default_str();
  v->add_option("--threads", srv.threads, "I/O threads")->capture_default_str();
  v->add_option("--assets", srv.assets, "Static asset directory");
  srv.session.add(v);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "pmg: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    std::cerr << (subs.empty() ? app.help() : subs.front()->help("pmg"));
    return 2;
  }
  pmg::tools::log_threshold() = *pmg::tools::parse_log_level(level);

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    if (name == "preprocess") return run_preprocess(pre);
    if (name == "generate") return run_generate(gen);
    if (name == "sysid") return run_sysid(sid);
    if (name == "zerocal") return run_zerocal(zc);
    if (name == "bench") return run_bench(bench);
    if (name == "serve") return run_serve(srv, argv[0]);
  } catch (const Failure& f) {
    std::cerr << "pmg " << name << ": " << pmg_status_name(f.status) << ": " << pmg_last_error() << '\n';
    return 1;
  } catch (const CLI::ValidationError& e) {
    std::cerr << "pmg " << name << ": " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "pmg " << name << ": " << e.what() << '\n';
    return 1;
  }
  return 1;
}

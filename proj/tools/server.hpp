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


// WebSocket streaming service. Each connection on /session owns one
// generator session ticked on its own timer; robot and clips are shared
// read-only across connections.

#ifndef PMG_TOOLS_SERVER_HPP_
#define PMG_TOOLS_SERVER_HPP_

#include <filesystem>
#include <memory>
#include <string>

#include "pmg/pmg.h"

namespace pmg::tools {

struct ServerOptions {
  std::string host = "127.0.0.1";
  unsigned short port = 8080;  // 0 picks a free port
  int threads = 2;
  std::filesystem::path assets_dir;  // empty disables static hosting
  pmg_session_config session{};      // session_id is ignored
  size_t max_queued_frames = 512;    // slow clients past this are dropped
};

class Server {
 public:
  // robot and clips must outlive the server.
  Server(const pmg_robot* robot, const pmg_clipset* clips, ServerOptions options);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Binds and starts worker threads. Returns the bound port.
  unsigned short start();
  // Stops accepting, closes sessions and joins the workers. Idempotent.
  void stop();
  // Blocks until stop() is called from another thread or a signal handler.
  void wait();

  int active_sessions() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Resolution order: explicit flag, then PMG_ASSETS_DIR, then
// <exe>/../share/pmg/assets, then ./assets. Returns empty if none exists.
std::filesystem::path resolve_assets_dir(const std::string& flag, const char* argv0);

}  // namespace pmg::tools

#endif  // PMG_TOOLS_SERVER_HPP_

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


// Writes the synthetic humanoid robot and clip set used by the tests, for
// trying the CLI and the service by hand.

#include <exception>
#include <iostream>

#include "humanoid.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: pmg_make_fixture <dir>\n";
    return 2;
  }
  try {
    std::filesystem::create_directories(argv[1]);
    const auto files = pmg::fixture::write_fixture(argv[1]);
    std::cout << files.robot.string() << '\n' << files.clips.string() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "pmg_make_fixture: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

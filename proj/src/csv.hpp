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

// Minimal comma-separated table I/O. Numbers are written in shortest
// round-trip form so files reload bit-exactly.

#ifndef PMG_SRC_CSV_HPP_
#define PMG_SRC_CSV_HPP_

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace pmg::detail {

struct CsvTable {
  std::vector<std::string> header;  // empty when the file had none
  std::vector<std::vector<double>> rows;

  // Index of a named column, or -1.
  int column(const std::string& name) const;
};

// A first line that does not parse as numbers is taken as the header.
CsvTable read_csv(const std::filesystem::path& path);

void write_number(std::ostream& out, double v);
void write_row(std::ostream& out, const std::vector<double>& values);

}  // namespace pmg::detail

#endif  // PMG_SRC_CSV_HPP_

// json_io.hpp - internal helpers for the versioned JSON model containers.

// Copyright 2026  The dialectid authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef DIALECTID_SRC_JSON_IO_HPP_
#define DIALECTID_SRC_JSON_IO_HPP_

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dialectid/common.hpp"

namespace dialectid {

using json = nlohmann::json;

inline void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path);
  out << j.dump(1) << '\n';
  if (!out) throw DataError("short write to " + path);
}

inline json read_json_file(const std::string& path, const std::string& format,
                           int version) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw DataError(path + ": " + e.what());
  }
  if (j.value("format", "") != format)
    throw DataError(path + ": expected format '" + format + "'");
  if (j.value("version", -1) != version)
    throw DataError(path + ": unsupported container version");
  return j;
}

// Little-endian f64 tensor blob <-> base64, for containers whose tensors
// are too large to store as JSON number arrays.
std::string doubles_to_base64(const std::vector<double>& values);
std::vector<double> base64_to_doubles(const std::string& text);

}  // namespace dialectid

#endif  // DIALECTID_SRC_JSON_IO_HPP_

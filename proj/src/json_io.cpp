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

#include "json_io.hpp"

#include <cstring>

namespace dialectid {

namespace {
constexpr char kB64[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int b64_value(char c) {
  if (c >= 'A' && c <= 'Z') return c - 'A';
  if (c >= 'a' && c <= 'z') return c - 'a' + 26;
  if (c >= '0' && c <= '9') return c - '0' + 52;
  if (c == '+') return 62;
  if (c == '/') return 63;
  return -1;
}
}  // namespace

std::string doubles_to_base64(const std::vector<double>& values) {
  std::vector<unsigned char> bytes(values.size() * 8);
  for (size_t i = 0; i < values.size(); ++i) {
    uint64_t v;
    std::memcpy(&v, &values[i], 8);
    for (int b = 0; b < 8; ++b)
      bytes[i * 8 + b] = static_cast<unsigned char>((v >> (8 * b)) & 0xff);
  }
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  for (size_t i = 0; i < bytes.size(); i += 3) {
    uint32_t chunk = bytes[i] << 16;
    int have = 1;
    if (i + 1 < bytes.size()) { chunk |= bytes[i + 1] << 8; have = 2; }
    if (i + 2 < bytes.size()) { chunk |= bytes[i + 2]; have = 3; }
    out.push_back(kB64[(chunk >> 18) & 63]);
    out.push_back(kB64[(chunk >> 12) & 63]);
    out.push_back(have >= 2 ? kB64[(chunk >> 6) & 63] : '=');
    out.push_back(have >= 3 ? kB64[chunk & 63] : '=');
  }
  return out;
}

std::vector<double> base64_to_doubles(const std::string& text) {
  std::vector<unsigned char> bytes;
  bytes.reserve(text.size() / 4 * 3);
  uint32_t chunk = 0;
  int have = 0;
  for (char c : text) {
    if (c == '=' || c == '\n' || c == '\r') continue;
    int v = b64_value(c);
    if (v < 0) throw DataError("invalid base64 tensor data");
    chunk = (chunk << 6) | static_cast<uint32_t>(v);
    if (++have == 4) {
      bytes.push_back(static_cast<unsigned char>((chunk >> 16) & 0xff));
      bytes.push_back(static_cast<unsigned char>((chunk >> 8) & 0xff));
      bytes.push_back(static_cast<unsigned char>(chunk & 0xff));
      chunk = 0;
      have = 0;
    }
  }
  if (have == 2) {
    bytes.push_back(static_cast<unsigned char>((chunk >> 4) & 0xff));
  } else if (have == 3) {
    bytes.push_back(static_cast<unsigned char>((chunk >> 10) & 0xff));
    bytes.push_back(static_cast<unsigned char>((chunk >> 2) & 0xff));
  } else if (have != 0) {
    throw DataError("truncated base64 tensor data");
  }
  if (bytes.size() % 8 != 0) throw DataError("base64 tensor not f64-aligned");
  std::vector<double> values(bytes.size() / 8);
  for (size_t i = 0; i < values.size(); ++i) {
    uint64_t v = 0;
    for (int b = 7; b >= 0; --b) v = (v << 8) | bytes[i * 8 + b];
    std::memcpy(&values[i], &v, 8);
  }
  return values;
}

}  // namespace dialectid

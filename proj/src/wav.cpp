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

#include "dialectid/wav.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>

namespace dialectid {

namespace {

void put_u16(std::string& buf, uint16_t v) {
  buf.push_back(static_cast<char>(v & 0xff));
  buf.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string& buf, uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

uint16_t get_u16(const unsigned char* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

uint32_t get_u32(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) |
         (static_cast<uint32_t>(p[3]) << 24);
}

struct WavHeader {
  int sample_rate = 0;
  size_t data_offset = 0;
  size_t data_bytes = 0;
};

WavHeader parse_header(const std::string& path,
                       const std::vector<unsigned char>& bytes) {
  if (bytes.size() < 44 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw DataError(path + ": not a RIFF WAV file");

  WavHeader h;
  size_t pos = 12;
  bool have_fmt = false;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* p = bytes.data() + pos;
    uint32_t chunk_size = get_u32(p + 4);
    if (std::memcmp(p, "fmt ", 4) == 0) {
      if (pos + 8 + 16 > bytes.size())
        throw DataError(path + ": truncated fmt chunk");
      uint16_t format = get_u16(p + 8);
      uint16_t channels = get_u16(p + 10);
      uint32_t rate = get_u32(p + 12);
      uint16_t bits = get_u16(p + 22);
      if (format != 1 || channels != 1 || bits != 16)
        throw DataError(path + ": only PCM 16-bit mono is supported");
      h.sample_rate = static_cast<int>(rate);
      have_fmt = true;
    } else if (std::memcmp(p, "data", 4) == 0) {
      h.data_offset = pos + 8;
      h.data_bytes = std::min<size_t>(chunk_size, bytes.size() - h.data_offset);
      break;
    }
    pos += 8 + chunk_size + (chunk_size & 1);
  }
  if (!have_fmt || h.data_offset == 0)
    throw DataError(path + ": missing fmt or data chunk");
  return h;
}

std::vector<unsigned char> read_file_bytes(const std::string& path,
                                           size_t limit = 0) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::vector<unsigned char> bytes;
  if (limit == 0) {
    bytes.assign(std::istreambuf_iterator<char>(in),
                 std::istreambuf_iterator<char>());
  } else {
    bytes.resize(limit);
    in.read(reinterpret_cast<char*>(bytes.data()),
            static_cast<std::streamsize>(limit));
    bytes.resize(static_cast<size_t>(in.gcount()));
  }
  return bytes;
}

}  // namespace

AudioBuffer read_wav(const std::string& path) {
  auto bytes = read_file_bytes(path);
  WavHeader h = parse_header(path, bytes);
  size_t n = h.data_bytes / 2;
  AudioBuffer audio;
  audio.sample_rate = h.sample_rate;
  audio.samples.resize(n);
  const unsigned char* p = bytes.data() + h.data_offset;
  for (size_t i = 0; i < n; ++i) {
    int16_t s = static_cast<int16_t>(get_u16(p + 2 * i));
    audio.samples[i] = s / 32768.0;
  }
  return audio;
}

void write_wav(const std::string& path, const AudioBuffer& audio) {
  if (audio.sample_rate <= 0) throw DataError("write_wav: bad sample rate");
  const uint32_t n = static_cast<uint32_t>(audio.samples.size());
  const uint32_t data_bytes = n * 2;
  std::string buf;
  buf.reserve(44 + data_bytes);
  buf += "RIFF";
  put_u32(buf, 36 + data_bytes);
  buf += "WAVEfmt ";
  put_u32(buf, 16);
  put_u16(buf, 1);  // PCM
  put_u16(buf, 1);  // mono
  put_u32(buf, static_cast<uint32_t>(audio.sample_rate));
  put_u32(buf, static_cast<uint32_t>(audio.sample_rate) * 2);
  put_u16(buf, 2);   // block align
  put_u16(buf, 16);  // bits
  buf += "data";
  put_u32(buf, data_bytes);
  for (uint32_t i = 0; i < n; ++i) {
    double v = std::clamp(audio.samples[i], -1.0, 1.0);
    int16_t s = static_cast<int16_t>(std::lrint(v * 32767.0));
    put_u16(buf, static_cast<uint16_t>(s));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw DataError("short write to " + path);
}

double wav_duration_seconds(const std::string& path) {
  auto bytes = read_file_bytes(path, 4096);
  WavHeader h = parse_header(path, bytes);
  // data_bytes from the in-memory slice can be clipped; use the chunk size
  // recorded in the header region instead.
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  size_t file_size = static_cast<size_t>(in.tellg());
  size_t data_bytes = file_size > h.data_offset ? file_size - h.data_offset : 0;
  return static_cast<double>(data_bytes / 2) / h.sample_rate;
}

}  // namespace dialectid

// wav.hpp - AudioBuffer and RIFF/PCM16 mono file IO.

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

#ifndef DIALECTID_WAV_HPP_
#define DIALECTID_WAV_HPP_

#include <string>
#include <vector>

#include "dialectid/common.hpp"

namespace dialectid {

struct AudioBuffer {
  std::vector<double> samples;  // normalized to [-1, 1]
  int sample_rate = 16000;

  double duration_seconds() const {
    return sample_rate > 0
               ? static_cast<double>(samples.size()) / sample_rate
               : 0.0;
  }
};

// Reads a PCM 16-bit mono RIFF WAV file. Rejects other encodings.
AudioBuffer read_wav(const std::string& path);

// Writes PCM 16-bit mono. Samples are clamped to [-1, 1] before quantizing.
void write_wav(const std::string& path, const AudioBuffer& audio);

// Header-only read of the duration in seconds; cheaper than read_wav.
double wav_duration_seconds(const std::string& path);

}  // namespace dialectid

#endif  // DIALECTID_WAV_HPP_

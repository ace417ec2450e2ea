// featext.hpp - silence trimming and the shared 39-dim MFCC front-end.

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

#ifndef DIALECTID_FEATEXT_HPP_
#define DIALECTID_FEATEXT_HPP_

#include <map>
#include <string>
#include <vector>

#include "dialectid/common.hpp"
#include "dialectid/wav.hpp"

namespace dialectid {

struct MfccConfig {
  double frame_length = 0.025;  // seconds
  double frame_shift = 0.010;   // seconds
  int num_mel_filters = 26;
  int num_cepstra = 13;
  double pre_emphasis = 0.97;
  int delta_window = 2;
  double low_freq = 0.0;    // mel filterbank edges, Hz
  double high_freq = 0.0;   // 0 means Nyquist

  void validate() const;
};

// Frame count for a signal of len samples: floor((len - frame) / shift) + 1.
int num_frames_for(int len, int frame_samples, int shift_samples);

// Removes leading and trailing frames whose energy falls below
// threshold_db relative to the utterance peak frame energy. Interior
// low-energy stretches are retained. min_speech_frames consecutive frames
// above threshold are required to open or close the speech region.
// Throws DataError("empty after trim") when nothing survives.
AudioBuffer trim_silence(const AudioBuffer& audio, double energy_threshold_db,
                         int min_speech_frames,
                         double frame_length = 0.025,
                         double frame_shift = 0.010);

// Static MFCCs (T x num_cepstra): pre-emphasis, Hamming window, magnitude
// spectrum, mel filterbank, log, orthonormal DCT-II.
FeatureMatrix compute_mfcc(const AudioBuffer& audio, const MfccConfig& cfg);

// First `rows` rows of the orthonormal DCT-II basis over `cols` points,
// row-major. B * B^T is the identity.
std::vector<double> dct_basis(int rows, int cols);

// Appends delta and delta-delta blocks computed from the static block by
// linear regression over +/- delta_window frames, edges replicated.
// Input must be T x 13 (or any D); output is T x 3D.
FeatureMatrix append_deltas(const FeatureMatrix& statics, int delta_window);

// Subtracts the per-utterance mean of each static coefficient. Only the
// first dim/3 columns are touched when the matrix carries deltas (D = 3d);
// for a pure static matrix the whole row is treated as static.
FeatureMatrix cepstral_mean_subtract(const FeatureMatrix& feat);

// Pads with zero rows or truncates so that the result has exactly
// target_frames rows.
FeatureMatrix fix_length(const FeatureMatrix& feat, int target_frames);

// round(mean frame count over the corpus) + margin.
int compute_target_frames(const std::vector<FeatureMatrix>& corpus,
                          int margin);

// Full front-end used by every system: trim, MFCC, deltas, CMS.
struct FrontEndConfig {
  MfccConfig mfcc;
  double trim_threshold_db = -40.0;
  int trim_min_speech_frames = 3;
  bool apply_trim = true;
  bool apply_cms = true;
};

FeatureMatrix extract_features(const AudioBuffer& audio,
                               const FrontEndConfig& cfg,
                               const std::string& utt_id = "");

// Feature archive container. Byte layout (all integers little-endian):
//   magic   8 bytes  "DIDFEAT1"
//   count   uint32   number of records
// then per record:
//   id_len  uint32   utterance id byte length
//   id      id_len bytes, UTF-8
//   T       uint32   frames
//   D       uint32   dims
//   shift   float64  frame shift in seconds
//   values  T*D float64, row-major
void write_feature_archive(const std::string& path,
                           const std::vector<FeatureMatrix>& feats);
std::vector<FeatureMatrix> read_feature_archive(const std::string& path);

// Convenience index over an archive.
std::map<std::string, FeatureMatrix> feature_map(
    std::vector<FeatureMatrix> feats);

}  // namespace dialectid

#endif  // DIALECTID_FEATEXT_HPP_

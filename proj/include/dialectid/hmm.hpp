// hmm.hpp - 3-state left-to-right phone HMMs, embedded Viterbi training,
// triphone expansion with occupancy tying, and forced alignment.

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

#ifndef DIALECTID_HMM_HPP_
#define DIALECTID_HMM_HPP_

#include <map>
#include <string>
#include <vector>

#include "dialectid/common.hpp"
#include "dialectid/corpus.hpp"
#include "dialectid/gmm.hpp"

namespace dialectid {

// Left-to-right phone model. The transition matrix is
// (num_states+2)^2 in the log domain with row 0 = entry, rows
// 1..num_states = emitting states, row num_states+1 = exit. Only self loops
// and forward transitions are allowed; entry and emitting rows each
// normalize to one in the linear domain.
struct PhoneHmm {
  std::string symbol;
  int num_states = 3;
  std::vector<double> log_trans;   // (S+2) x (S+2)
  std::vector<GmmModel> emissions; // one per emitting state

  int total_rows() const { return num_states + 2; }
  double trans(int from, int to) const {
    return log_trans[static_cast<size_t>(from) * total_rows() + to];
  }
  void set_trans(int from, int to, double logp) {
    log_trans[static_cast<size_t>(from) * total_rows() + to] = logp;
  }
  void validate() const;
};

// Makes symbol "left-center+right"; parse_triphone inverts it.
std::string triphone_symbol(const std::string& left, const std::string& center,
                            const std::string& right);
bool parse_triphone(const std::string& symbol, std::string* left,
                    std::string* center, std::string* right);

struct HmmSet {
  PhoneInventory inventory;
  std::map<std::string, PhoneHmm> models;
  std::map<std::string, std::string> tying;  // logical symbol -> physical
  bool context_dependent = false;

  // Follows tying; unseen triphones fall back to their center monophone so
  // every symbol met at decode time resolves to a physical model.
  const PhoneHmm& resolve(const std::string& symbol) const;
  const std::string& resolve_symbol(const std::string& symbol) const;
  bool has(const std::string& symbol) const;

  // Maps a word-internal phone sequence to model symbols: identity for a
  // monophone set, "sil" boundary triphones for a context-dependent one.
  std::vector<std::string> to_context_units(
      const std::vector<std::string>& word_phones) const;
};

struct AlignedSegment {
  std::string unit;
  int start_frame = 0;  // inclusive
  int end_frame = 0;    // exclusive
  double loglik = 0.0;
};

// Segments are contiguous, non-overlapping and cover [0, T). Segment
// log-likelihoods include each frame's emission score plus the transition
// entering that frame, so they sum to total_loglik.
struct Alignment {
  std::vector<AlignedSegment> segments;
  double total_loglik = 0.0;
};

// Identical 3-state models for every inventory phone: single-Gaussian
// emissions at the global data mean/variance, uniform forward transitions.
HmmSet flat_start(const PhoneInventory& inventory, const FeatureMatrix& frames,
                  int num_states = 3);

// Viterbi alignment of feat against the linear concatenation of the unit
// models. Throws AlignmentInfeasible when T is too short for the sequence.
Alignment forced_align(const HmmSet& set, const FeatureMatrix& feat,
                       const std::vector<std::string>& units);

struct TrainingUtterance {
  const FeatureMatrix* feat = nullptr;
  std::vector<std::string> units;  // phone or triphone symbols
};

struct EmbeddedTrainOptions {
  std::vector<int> mixture_schedule = {1, 2, 4, 8, 12, 16};
  int iters_per_stage = 5;
  double variance_floor_factor = 1e-3;
  int min_state_frames = 3;
  double transition_floor = 1e-10;
};

struct EmbeddedTrainStats {
  // Total best-path log-likelihood after each iteration, grouped by stage;
  // non-decreasing within a stage.
  std::vector<std::vector<double>> loglik_by_stage;
  int skipped_utterances = 0;  // infeasible (T too short), left out
};

// Viterbi-style embedded training: align with the current models, hard-assign
// frames to states, re-estimate emissions (one EM pass per state) and
// transition counts; grow emission mixtures at each schedule stage.
HmmSet train_embedded(HmmSet set, const std::vector<TrainingUtterance>& corpus,
                      const EmbeddedTrainOptions& opts,
                      EmbeddedTrainStats* stats = nullptr);

// Word-internal triphone expansion with "sil" boundary context. Triphones
// seen at least min_count times are cloned from their center monophone;
// rarer ones are tied back to the center. Word boundaries are given by the
// nested structure of `transcripts` (utterance -> words -> phones).
HmmSet expand_triphones(
    const HmmSet& set,
    const std::vector<std::vector<std::vector<std::string>>>& transcripts,
    int min_count);

// Enumerates the triphone symbols of one utterance, in order.
std::vector<std::string> triphone_units(
    const std::vector<std::vector<std::string>>& words,
    const std::string& boundary = "sil");

void save_hmm_set(const std::string& path, const HmmSet& set);
HmmSet load_hmm_set(const std::string& path);

}  // namespace dialectid

#endif  // DIALECTID_HMM_HPP_

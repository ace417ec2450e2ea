// systems.hpp - the dialect identification systems: GMM, CNN, PPR v1-v3,
// P-LVCSR, UPR-1 and UPR-2, plus the nasalization relabel rule, word-level
// reconfirmation and evaluation.

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

#ifndef DIALECTID_SYSTEMS_HPP_
#define DIALECTID_SYSTEMS_HPP_

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dialectid/common.hpp"
#include "dialectid/corpus.hpp"
#include "dialectid/decode.hpp"
#include "dialectid/gmm.hpp"
#include "dialectid/hmm.hpp"
#include "dialectid/lm.hpp"

namespace dialectid {

enum class SystemKind { Gmm, Cnn, PprV1, PprV2, PprV3, Plvcsr, Upr1, Upr2 };
const char* to_string(SystemKind k);
SystemKind system_from_string(const std::string& s);

enum class PprVersion { V1, V2, V3 };

struct Decision {
  Dialect label = Dialect::LT;
  SystemKind method = SystemKind::Gmm;
  double lt_score = 0.0;  // log-likelihoods, or word counts for UPR
  double ct_score = 0.0;
  bool fallback_used = false;
};

struct DidConfig {
  bool exclude_common = true;        // Both-membership words leave the bias
  bool duration_normalize = false;   // divide path scores by frame count
  bool equiprobable_negative = true; // standalone UPR scoring of ties
};

// Replaces a trailing (vowel, nasal consonant) pair with the grouped
// nasalized-vowel symbol. The sequence is one word's phones; Anywhere also
// rewrites word-internal pairs, left to right.
enum class NasalScope { WordFinal, Anywhere };
std::vector<std::string> apply_nasalization_relabel(
    const std::vector<std::string>& phones, const PhoneInventory& inventory,
    NasalScope scope = NasalScope::WordFinal);

// Per-word convenience over a word-segmented transcript.
std::vector<std::vector<std::string>> relabel_words(
    const std::vector<std::vector<std::string>>& words,
    const PhoneInventory& inventory, NasalScope scope = NasalScope::WordFinal);

// A phone recognizer for one dialect: acoustic models plus an optional
// phone LM. Both the joint-decoding and the acoustic-only loop are built up
// front so PPR v1/v2 and v3 can share trained systems. The model set lives
// behind a shared_ptr so the graphs' back-references stay valid across
// copies and moves.
struct PhoneRecognizer {
  std::shared_ptr<const HmmSet> set;
  std::optional<PhoneLM> lm;
  DecodingGraph loop_lm;    // valid when lm is set
  DecodingGraph loop_nolm;
};

PhoneRecognizer make_phone_recognizer(HmmSet set, std::optional<PhoneLM> lm);

// PPR: decode through both phone loops, pick the dialect with the higher
// best-path log-likelihood; ties go LT. V1/V2 decode jointly with the LM,
// V3 uses the acoustic scores alone. V2 expects the CT recognizer to have
// been trained on relabeled transcripts (its model set must cover the
// grouped nasalized symbol).
Decision ppr_identify(const PhoneRecognizer& lt, const PhoneRecognizer& ct,
                      const FeatureMatrix& feat, PprVersion version,
                      const DidConfig& cfg = {});

// A word recognizer for one dialect (or the unified system).
struct WordRecognizer {
  std::shared_ptr<const HmmSet> set;
  Lexicon lexicon;
  DecodingGraph graph;
};

WordRecognizer make_word_recognizer(HmmSet set, Lexicon lexicon);

// P-LVCSR: decode through both word loops, pick the dialect whose word
// sequence accumulated the higher log-likelihood; ties go LT.
Decision plvcsr_identify(const WordRecognizer& lt, const WordRecognizer& ct,
                         const FeatureMatrix& feat, const DidConfig& cfg = {});

struct WordSegment {
  std::string word;
  int start_frame = 0;
  int end_frame = 0;  // exclusive
  double loglik = 0.0;
};

// The unified recognizer: pooled models over the merged inventory plus the
// merged lexicon, and the per-word dialect membership used by the bias.
struct UnifiedRecognizer {
  WordRecognizer rec;
  std::map<std::string, Membership> word_membership;
};

// Membership resolution order: explicit dialect lexicons first, then the
// unified lexicon's own metadata.
UnifiedRecognizer make_unified_recognizer(HmmSet set, Lexicon unified,
                                          const Lexicon* lt = nullptr,
                                          const Lexicon* ct = nullptr);

// One decode pass over the unified word loop.
std::vector<WordSegment> upr_recognize(const UnifiedRecognizer& unified,
                                       const FeatureMatrix& feat);

enum class BiasVerdict { LT, CT, Equiprobable };

struct BiasResult {
  int lt_count = 0;
  int ct_count = 0;
  int excluded = 0;
  BiasVerdict verdict = BiasVerdict::Equiprobable;
};

// Majority count of recognized words per dialect. Both-membership words are
// excluded when exclude_common is set (the default), otherwise they add one
// to each side. Unknown words are a DataError.
BiasResult compute_bias(const std::vector<WordSegment>& words,
                        const std::map<std::string, Membership>& membership,
                        bool exclude_common = true);

// Per-word reconfirmation outcome; Excluded words leave the bias entirely.
enum class WordLabel { LT, CT, Excluded };

// Reconfirms one recognized word against its parallel-dictionary
// counterpart by forced alignment of the segment's frames:
//   (a) parallel absent, or equal to the recognized word -> the word keeps
//       its recognized dialect, except that a Both-membership word is
//       Excluded (it can never shift the bias);
//   (b) parallel alignment infeasible on the segment -> recognized dialect
//       is retained;
//   (c) otherwise the dialect of the higher-likelihood alignment wins.
WordLabel reconfirm_word(const WordSegment& seg, Membership recognized,
                         const ParallelDictionary& pdict,
                         const UnifiedRecognizer& unified,
                         const FeatureMatrix& utt_feat);

using FallbackFn = std::function<Decision(const FeatureMatrix&)>;

// UPR-1: bias verdict when decisive; on an equiprobable bias the fallback
// (P-LVCSR) decides and fallback_used is set. Without a fallback an
// equiprobable case resolves to LT with fallback_used set, so standalone
// scoring can count it as configured.
Decision upr1_identify(const UnifiedRecognizer& unified,
                       const FeatureMatrix& feat,
                       const FallbackFn& fallback = nullptr,
                       const DidConfig& cfg = {});

// UPR-2: recognize, reconfirm every word, recompute the bias over the
// reconfirmed labels, then fall back as in UPR-1 if still equiprobable.
Decision upr2_identify(const UnifiedRecognizer& unified,
                       const ParallelDictionary& pdict,
                       const FeatureMatrix& feat,
                       const FallbackFn& fallback = nullptr,
                       const DidConfig& cfg = {});

struct PerUtterance {
  std::string utt_id;
  Dialect truth = Dialect::LT;
  Decision decision;
  bool error = false;  // decode failure; counted as a misclassification
};

struct Metrics {
  double accuracy = 0.0;
  double confusion[2][2] = {{0, 0}, {0, 0}};  // row-normalized, truth-major
  std::vector<PerUtterance> per_utterance;
  int errors = 0;
  void validate() const;
};

using IdentifyFn =
    std::function<Decision(const UtteranceRecord&, const FeatureMatrix&)>;

// Runs the system on every test utterance. Failures inside the identify
// function are recorded and tallied as misclassifications so that accuracy
// stays a total function.
Metrics evaluate(const IdentifyFn& identify,
                 const std::vector<UtteranceRecord>& test,
                 const std::map<std::string, FeatureMatrix>& feats);

// In standalone UPR accounting an equiprobable (fallback_used) decision is
// wrong by definition; this recomputes metrics under that convention.
Metrics evaluate_standalone(const Metrics& fallback_metrics);

}  // namespace dialectid

#endif  // DIALECTID_SYSTEMS_HPP_

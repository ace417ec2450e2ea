// corpus.hpp - manifests, lexicons, parallel dictionaries and splits.

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

#ifndef DIALECTID_CORPUS_HPP_
#define DIALECTID_CORPUS_HPP_

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "dialectid/common.hpp"

namespace dialectid {

enum class Dialect { LT, CT };

enum class Membership { LT, CT, Both };

const char* to_string(Dialect d);
Dialect dialect_from_string(const std::string& s);
const char* to_string(Membership m);

struct UtteranceRecord {
  std::string utt_id;
  std::string audio_path;
  Dialect dialect = Dialect::LT;
  std::string speaker_id;
  std::vector<std::string> transcript;  // word tokens; may be empty
};

// Manifest format: UTF-8 TSV, one utterance per line, lines starting with
// '#' are comments. Fields: utt_id, audio_path, dialect, speaker_id,
// transcript (space-separated words; may be empty).
std::vector<UtteranceRecord> load_manifest(const std::string& path);
void save_manifest(const std::string& path,
                   const std::vector<UtteranceRecord>& records);

// Phone symbol table shared by the models. Symbols must not contain
// whitespace or the reserved characters ':', '-', '+'.
struct PhoneInventory {
  std::vector<std::string> phones;  // ordered, unique
  std::set<std::string> vowels;
  std::set<std::string> nasals;
  std::string nasalized_symbol;  // single grouped class; empty if undefined
  std::map<std::string, Membership> membership;
  std::string silence_symbol = "sil";

  bool contains(const std::string& p) const;
  bool is_vowel(const std::string& p) const { return vowels.count(p) > 0; }
  bool is_nasal(const std::string& p) const { return nasals.count(p) > 0; }
  void add(const std::string& phone, Membership m);
  void validate() const;
};

void save_inventory(const std::string& path, const PhoneInventory& inv);
PhoneInventory load_inventory(const std::string& path);

using Pronunciation = std::vector<std::string>;

struct Lexicon {
  enum class Tag { LT, CT, Unified };
  Tag tag = Tag::LT;
  // word -> alternative pronunciations, insertion order preserved per word.
  std::map<std::string, std::vector<Pronunciation>> entries;
  // Dialect membership per word; for a plain LT/CT lexicon every word simply
  // carries that dialect, for a unified lexicon overlap words carry Both.
  std::map<std::string, Membership> membership;

  bool contains(const std::string& word) const {
    return entries.count(word) > 0;
  }
  size_t size() const { return entries.size(); }
  void add(const std::string& word, Pronunciation pron);
  // Every pronunciation phone must be in the inventory, none may be empty.
  void validate(const PhoneInventory& inv) const;
};

// Lexicon file format: `word<TAB>phone phone ...`, one pronunciation per
// line; a repeated word adds an alternative pronunciation.
Lexicon load_lexicon(const std::string& path, Lexicon::Tag tag);
void save_lexicon(const std::string& path, const Lexicon& lex);

// Union of an LT and a CT lexicon. Overlap words keep membership Both and
// their pronunciation lists are concatenated with duplicates removed.
Lexicon merge_lexicons(const Lexicon& lt, const Lexicon& ct);

struct ParallelDictionary {
  std::map<std::string, std::string> lt_to_ct;  // rule-derived
  std::map<std::string, std::string> ct_to_lt;  // manual only
  std::map<std::string, std::string> overrides; // manual corrections, LT->CT

  // Overrides take precedence over rule-derived entries. Returns nullopt
  // when the word has no parallel in the requested direction.
  std::optional<std::string> parallel(const std::string& word,
                                      Dialect source) const;
  size_t size() const { return lt_to_ct.size() + overrides.size(); }
  bool empty() const { return lt_to_ct.empty() && overrides.empty() &&
                              ct_to_lt.empty(); }
};

// Rewrite rules are (pattern, replacement) substring rewrites applied to LT
// spellings in table order, each replacing all occurrences. A rule result is
// kept only when it names a word of the CT lexicon. Manual entries override
// rule results and are the only source of the CT->LT direction. Manual
// entries whose source is missing from the LT lexicon or whose target is
// missing from the CT lexicon are skipped with a warning.
ParallelDictionary build_parallel_dictionary(
    const std::vector<std::pair<std::string, std::string>>& rules,
    const std::map<std::string, std::string>& manual,
    const Lexicon& lt, const Lexicon& ct,
    std::vector<std::string>* warnings = nullptr);

// Parallel dictionary file format: `src<TAB>dst<TAB>{rule|manual}`.
// Rule rows populate lt_to_ct; manual rows populate overrides and ct_to_lt.
ParallelDictionary load_parallel_dictionary(const std::string& path);
void save_parallel_dictionary(const std::string& path,
                              const ParallelDictionary& dict);

// Speaker-disjoint train/test partition by greedy speaker-level duration
// packing: per dialect, unassigned speakers are taken in order of decreasing
// total duration (ties broken by a seeded permutation) and each is assigned
// to the side currently furthest below its duration target. A speaker keeps
// one side across dialects. Durations default to 1.0 per utterance when no
// entry is supplied.
struct SplitResult {
  std::vector<UtteranceRecord> train;
  std::vector<UtteranceRecord> test;
};

SplitResult split_speaker_disjoint(
    const std::vector<UtteranceRecord>& records, double train_fraction,
    uint64_t seed,
    const std::map<std::string, double>& durations_by_utt = {});

}  // namespace dialectid

#endif  // DIALECTID_CORPUS_HPP_

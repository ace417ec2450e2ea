// lm.hpp - phone unigram/bigram language model with add-k smoothing.

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

#ifndef DIALECTID_LM_HPP_
#define DIALECTID_LM_HPP_

#include <map>
#include <string>
#include <vector>

#include "dialectid/common.hpp"
#include "dialectid/corpus.hpp"

namespace dialectid {

// Conditional bigram plus unigram tables over the inventory and a sentence
// boundary symbol. The boundary acts as both start history and end target.
struct PhoneLM {
  std::vector<std::string> symbols;  // inventory order, boundary last
  std::map<std::string, int> index;
  std::string boundary = "<s>";
  double add_k = 1.0;
  std::vector<double> log_unigram;  // V
  std::vector<double> log_bigram;   // V x V, row = history

  int vocab_size() const { return static_cast<int>(symbols.size()); }
  double unigram(const std::string& p) const;
  double bigram(const std::string& history, const std::string& p) const;
  double start_logp(const std::string& p) const { return bigram(boundary, p); }
  double end_logp(const std::string& p) const { return bigram(p, boundary); }
  // Every history row sums to one in the linear domain (within 1e-9).
  void validate() const;
};

// Counts over the transcripts with one boundary per sentence end and start.
// add_k = 0 gives raw maximum-likelihood estimates (unseen events get
// log-zero); any transcript phone outside the inventory is a DataError.
PhoneLM estimate_bigram(const std::vector<std::vector<std::string>>& transcripts,
                        const PhoneInventory& inventory, double add_k = 1.0);

void save_phone_lm(const std::string& path, const PhoneLM& lm);
PhoneLM load_phone_lm(const std::string& path);

}  // namespace dialectid

#endif  // DIALECTID_LM_HPP_

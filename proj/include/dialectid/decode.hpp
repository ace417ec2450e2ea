// decode.hpp - token-passing Viterbi over phone loops, lexicon-constrained
// word loops and linear graphs.

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

#ifndef DIALECTID_DECODE_HPP_
#define DIALECTID_DECODE_HPP_

#include <limits>
#include <string>
#include <vector>

#include "dialectid/common.hpp"
#include "dialectid/corpus.hpp"
#include "dialectid/hmm.hpp"
#include "dialectid/lm.hpp"

namespace dialectid {

enum class GraphKind { PhoneLoop, WordLoop, Linear };

// One HMM instance in the graph. Nodes belonging to the same pronunciation
// chain share a chain id; the chain's output symbol (phone or word) is
// emitted once per traversal of the chain.
struct GraphNode {
  std::string model;   // symbol resolvable through the HmmSet
  std::string output;  // phone symbol or word
  int chain = -1;
  bool chain_start = false;
  bool chain_end = false;
};

struct GraphArc {
  int from = 0;
  int to = 0;
  double weight = 0.0;  // log-domain; LM score where applicable
};

struct DecodingGraph {
  GraphKind kind = GraphKind::PhoneLoop;
  const HmmSet* set = nullptr;  // not owned; must outlive the graph
  std::vector<GraphNode> nodes;
  std::vector<GraphArc> arcs;
  std::vector<std::pair<int, double>> start_arcs;  // (node, weight)
  std::vector<std::pair<int, double>> end_arcs;    // (node, weight)
};

// Every node must be reachable from a start node and co-reachable to an end
// node; throws DataError otherwise.
void check_graph(const DecodingGraph& graph);

// All-phones loop. With a language model the inter-phone arcs carry bigram
// log-probabilities and the start/end arcs the boundary scores; without one
// every arc weight is zero.
DecodingGraph build_phone_loop(const HmmSet& set, const PhoneLM* lm = nullptr);

// Word loop: each lexicon word expands to one linear phone-model chain per
// pronunciation; inter-word arcs are uniform (zero weight).
DecodingGraph build_word_graph(const HmmSet& set, const Lexicon& lexicon);

// Linear graph of one fixed unit sequence (the forced-alignment graph).
DecodingGraph build_linear_graph(const HmmSet& set,
                                 const std::vector<std::string>& units);

struct UnitSpan {
  std::string symbol;
  int start_frame = 0;
  int end_frame = 0;  // exclusive
  double loglik = 0.0;
};

struct DecodeResult {
  std::vector<UnitSpan> units;
  double total_loglik = 0.0;
  GraphKind kind = GraphKind::PhoneLoop;
};

constexpr double kUnboundedBeam = std::numeric_limits<double>::infinity();

// Highest-scoring path (acoustic plus arc weights). Exact with an unbounded
// beam; beam pruning drops states below the per-frame best minus beam.
// Throws SearchFailure when no token survives.
DecodeResult viterbi_decode(const DecodingGraph& graph,
                            const FeatureMatrix& feat,
                            double beam = kUnboundedBeam);

// Decode output line: `utt_id<TAB>total_loglik<TAB>sym:start:end ...`.
std::string format_decode_line(const std::string& utt_id,
                               const DecodeResult& result);
DecodeResult parse_decode_line(const std::string& line, std::string* utt_id);

}  // namespace dialectid

#endif  // DIALECTID_DECODE_HPP_

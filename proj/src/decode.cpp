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

#include "dialectid/decode.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <sstream>

namespace dialectid {

void check_graph(const DecodingGraph& graph) {
  const size_t n = graph.nodes.size();
  if (n == 0) throw DataError("decoding graph has no nodes");
  std::vector<std::vector<int>> fwd(n), bwd(n);
  for (const auto& arc : graph.arcs) {
    fwd[arc.from].push_back(arc.to);
    bwd[arc.to].push_back(arc.from);
  }
  auto sweep = [&](const std::vector<std::pair<int, double>>& seeds,
                   const std::vector<std::vector<int>>& edges) {
    std::vector<bool> seen(n, false);
    std::deque<int> queue;
    for (const auto& [node, weight] : seeds) {
      (void)weight;
      if (!seen[node]) {
        seen[node] = true;
        queue.push_back(node);
      }
    }
    while (!queue.empty()) {
      int u = queue.front();
      queue.pop_front();
      for (int v : edges[u])
        if (!seen[v]) {
          seen[v] = true;
          queue.push_back(v);
        }
    }
    return seen;
  };
  auto reachable = sweep(graph.start_arcs, fwd);
  auto coreachable = sweep(graph.end_arcs, bwd);
  for (size_t i = 0; i < n; ++i) {
    if (!reachable[i])
      throw DataError("graph node " + std::to_string(i) + " unreachable");
    if (!coreachable[i])
      throw DataError("graph node " + std::to_string(i) + " cannot reach an end");
  }
}

DecodingGraph build_phone_loop(const HmmSet& set, const PhoneLM* lm) {
  DecodingGraph g;
  g.kind = GraphKind::PhoneLoop;
  g.set = &set;
  for (size_t i = 0; i < set.inventory.phones.size(); ++i) {
    const std::string& phone = set.inventory.phones[i];
    GraphNode node;
    node.model = phone;
    node.output = phone;
    node.chain = static_cast<int>(i);
    node.chain_start = node.chain_end = true;
    g.nodes.push_back(std::move(node));
  }
  const int n = static_cast<int>(g.nodes.size());
  for (int u = 0; u < n; ++u) {
    for (int v = 0; v < n; ++v) {
      double w = lm ? lm->bigram(g.nodes[u].output, g.nodes[v].output) : 0.0;
      g.arcs.push_back({u, v, w});
    }
    g.start_arcs.emplace_back(u, lm ? lm->start_logp(g.nodes[u].output) : 0.0);
    g.end_arcs.emplace_back(u, lm ? lm->end_logp(g.nodes[u].output) : 0.0);
  }
  return g;
}

DecodingGraph build_word_graph(const HmmSet& set, const Lexicon& lexicon) {
  if (lexicon.entries.empty()) throw DataError("build_word_graph: empty lexicon");
  DecodingGraph g;
  g.kind = GraphKind::WordLoop;
  g.set = &set;
  int chain = 0;
  std::vector<int> starts, ends;
  for (const auto& [word, prons] : lexicon.entries) {
    for (const auto& pron : prons) {
      auto units = set.to_context_units(pron);
      int first = static_cast<int>(g.nodes.size());
      for (size_t i = 0; i < units.size(); ++i) {
        if (!set.has(units[i]))
          throw DataError("build_word_graph: unresolvable unit '" + units[i] +
                          "' in word '" + word + "'");
        GraphNode node;
        node.model = units[i];
        node.output = word;
        node.chain = chain;
        node.chain_start = i == 0;
        node.chain_end = i + 1 == units.size();
        g.nodes.push_back(std::move(node));
        if (i > 0)
          g.arcs.push_back({first + static_cast<int>(i) - 1,
                            first + static_cast<int>(i), 0.0});
      }
      starts.push_back(first);
      ends.push_back(static_cast<int>(g.nodes.size()) - 1);
      ++chain;
    }
  }
  for (int e : ends)
    for (int s : starts) g.arcs.push_back({e, s, 0.0});
  for (int s : starts) g.start_arcs.emplace_back(s, 0.0);
  for (int e : ends) g.end_arcs.emplace_back(e, 0.0);
  return g;
}

DecodingGraph build_linear_graph(const HmmSet& set,
                                 const std::vector<std::string>& units) {
  if (units.empty()) throw DataError("build_linear_graph: empty unit sequence");
  DecodingGraph g;
  g.kind = GraphKind::Linear;
  g.set = &set;
  for (size_t i = 0; i < units.size(); ++i) {
    GraphNode node;
    node.model = units[i];
    node.output = units[i];
    node.chain = static_cast<int>(i);
    node.chain_start = node.chain_end = true;
    g.nodes.push_back(std::move(node));
    if (i > 0)
      g.arcs.push_back({static_cast<int>(i) - 1, static_cast<int>(i), 0.0});
  }
  g.start_arcs.emplace_back(0, 0.0);
  g.end_arcs.emplace_back(static_cast<int>(units.size()) - 1, 0.0);
  return g;
}

namespace {

struct StateSpace {
  struct Edge {
    int src;
    double weight;
    bool new_chain;
  };
  std::vector<const PhoneHmm*> node_model;
  std::vector<int> offset;  // node -> first global state
  std::vector<int> node_of_state;
  std::vector<int> state_in_node;  // 1-based
  std::vector<std::vector<Edge>> incoming;
  std::vector<double> init;
  std::vector<double> final_w;
  int num_states = 0;

  // Emission cache over distinct state GMMs.
  std::vector<const GmmModel*> distinct;
  std::vector<int> state_to_distinct;
  std::vector<double> scores;

  void fill_scores(std::span<const double> frame) {
    for (size_t i = 0; i < distinct.size(); ++i)
      scores[i] = log_density(*distinct[i], frame);
  }
  double emission(int state) const { return scores[state_to_distinct[state]]; }
};

StateSpace expand(const DecodingGraph& g) {
  StateSpace ss;
  const size_t n = g.nodes.size();
  ss.node_model.reserve(n);
  ss.offset.resize(n + 1, 0);
  for (size_t i = 0; i < n; ++i) {
    ss.node_model.push_back(&g.set->resolve(g.nodes[i].model));
    ss.offset[i + 1] = ss.offset[i] + ss.node_model[i]->num_states;
  }
  ss.num_states = ss.offset[n];
  ss.node_of_state.resize(ss.num_states);
  ss.state_in_node.resize(ss.num_states);
  ss.incoming.resize(ss.num_states);
  ss.init.assign(ss.num_states, kLogZero);
  ss.final_w.assign(ss.num_states, kLogZero);

  for (size_t u = 0; u < n; ++u) {
    const PhoneHmm& m = *ss.node_model[u];
    for (int j = 1; j <= m.num_states; ++j) {
      int gs = ss.offset[u] + j - 1;
      ss.node_of_state[gs] = static_cast<int>(u);
      ss.state_in_node[gs] = j;
      for (int i = 1; i <= m.num_states; ++i) {
        double lp = m.trans(i, j);
        if (lp != kLogZero)
          ss.incoming[gs].push_back({ss.offset[u] + i - 1, lp, false});
      }
    }
  }
  for (const auto& arc : g.arcs) {
    const PhoneHmm& mu = *ss.node_model[arc.from];
    const PhoneHmm& mv = *ss.node_model[arc.to];
    bool new_chain = g.nodes[arc.to].chain != g.nodes[arc.from].chain ||
                     g.nodes[arc.to].chain_start;
    for (int i = 1; i <= mu.num_states; ++i) {
      double exit_lp = mu.trans(i, mu.num_states + 1);
      if (exit_lp == kLogZero) continue;
      for (int j = 1; j <= mv.num_states; ++j) {
        double entry_lp = mv.trans(0, j);
        if (entry_lp == kLogZero) continue;
        ss.incoming[ss.offset[arc.to] + j - 1].push_back(
            {ss.offset[arc.from] + i - 1, exit_lp + arc.weight + entry_lp,
             new_chain});
      }
    }
  }
  for (const auto& [node, weight] : g.start_arcs) {
    const PhoneHmm& m = *ss.node_model[node];
    for (int j = 1; j <= m.num_states; ++j) {
      double entry_lp = m.trans(0, j);
      if (entry_lp != kLogZero) {
        double& slot = ss.init[ss.offset[node] + j - 1];
        slot = std::max(slot, weight + entry_lp);
      }
    }
  }
  for (const auto& [node, weight] : g.end_arcs) {
    const PhoneHmm& m = *ss.node_model[node];
    for (int i = 1; i <= m.num_states; ++i) {
      double exit_lp = m.trans(i, m.num_states + 1);
      if (exit_lp != kLogZero) {
        double& slot = ss.final_w[ss.offset[node] + i - 1];
        slot = std::max(slot, exit_lp + weight);
      }
    }
  }

  std::map<const GmmModel*, int> ids;
  ss.state_to_distinct.resize(ss.num_states);
  for (int s = 0; s < ss.num_states; ++s) {
    const PhoneHmm& m = *ss.node_model[ss.node_of_state[s]];
    const GmmModel* gm = &m.emissions[ss.state_in_node[s] - 1];
    auto [it, inserted] = ids.emplace(gm, static_cast<int>(ss.distinct.size()));
    if (inserted) ss.distinct.push_back(gm);
    ss.state_to_distinct[s] = it->second;
  }
  ss.scores.resize(ss.distinct.size());
  return ss;
}

}  // namespace

DecodeResult viterbi_decode(const DecodingGraph& graph,
                            const FeatureMatrix& feat, double beam) {
  if (feat.num_frames < 1) throw DataError("viterbi_decode: empty features");
  if (beam <= 0.0) throw DataError("viterbi_decode: beam must be positive");
  StateSpace ss = expand(graph);
  const int t_count = feat.num_frames;
  const int s_count = ss.num_states;

  // Full score matrix kept so segment log-likelihoods fall out of the
  // traceback as score differences.
  std::vector<double> dp(static_cast<size_t>(t_count) * s_count, kLogZero);
  std::vector<int> backptr(static_cast<size_t>(t_count) * s_count, -1);
  std::vector<uint8_t> entered(static_cast<size_t>(t_count) * s_count, 0);

  ss.fill_scores(feat.frame(0));
  double frame_best = kLogZero;
  for (int s = 0; s < s_count; ++s) {
    if (ss.init[s] == kLogZero) continue;
    double v = ss.init[s] + ss.emission(s);
    dp[s] = v;
    entered[s] = 1;
    frame_best = std::max(frame_best, v);
  }
  if (frame_best == kLogZero)
    throw SearchFailure("viterbi_decode: no valid start state");

  for (int t = 1; t < t_count; ++t) {
    ss.fill_scores(feat.frame(t));
    const double* prev = dp.data() + static_cast<size_t>(t - 1) * s_count;
    double* cur = dp.data() + static_cast<size_t>(t) * s_count;
    const double prune = beam == kUnboundedBeam ? kLogZero : frame_best - beam;
    frame_best = kLogZero;
    for (int s = 0; s < s_count; ++s) {
      double best = kLogZero;
      int best_src = -1;
      bool best_flag = false;
      for (const auto& e : ss.incoming[s]) {
        double p = prev[e.src];
        if (p == kLogZero || p < prune) continue;
        double cand = p + e.weight;
        if (cand > best) {
          best = cand;
          best_src = e.src;
          best_flag = e.new_chain;
        }
      }
      if (best == kLogZero) continue;
      cur[s] = best + ss.emission(s);
      backptr[static_cast<size_t>(t) * s_count + s] = best_src;
      entered[static_cast<size_t>(t) * s_count + s] = best_flag ? 1 : 0;
      frame_best = std::max(frame_best, cur[s]);
    }
    if (frame_best == kLogZero)
      throw SearchFailure("viterbi_decode: no surviving token at frame " +
                          std::to_string(t) + " (beam too tight?)");
  }

  const double* last = dp.data() + static_cast<size_t>(t_count - 1) * s_count;
  double best = kLogZero;
  int best_state = -1;
  for (int s = 0; s < s_count; ++s) {
    if (ss.final_w[s] == kLogZero || last[s] == kLogZero) continue;
    double cand = last[s] + ss.final_w[s];
    if (cand > best) {
      best = cand;
      best_state = s;
    }
  }
  if (best_state < 0)
    throw SearchFailure("viterbi_decode: no token reaches an end state");

  std::vector<int> path(t_count);
  int s = best_state;
  for (int t = t_count - 1; t >= 0; --t) {
    path[t] = s;
    if (t > 0) s = backptr[static_cast<size_t>(t) * s_count + s];
  }

  DecodeResult result;
  result.kind = graph.kind;
  result.total_loglik = best;
  int seg_start = 0;
  for (int t = 1; t <= t_count; ++t) {
    bool boundary =
        t == t_count || entered[static_cast<size_t>(t) * s_count + path[t]];
    if (!boundary) continue;
    UnitSpan span;
    span.symbol = graph.nodes[ss.node_of_state[path[seg_start]]].output;
    span.start_frame = seg_start;
    span.end_frame = t;
    double at_end = dp[static_cast<size_t>(t - 1) * s_count + path[t - 1]];
    double at_start =
        seg_start == 0
            ? 0.0
            : dp[static_cast<size_t>(seg_start - 1) * s_count + path[seg_start - 1]];
    span.loglik = at_end - at_start;
    if (t == t_count) span.loglik += ss.final_w[path[t_count - 1]];
    result.units.push_back(std::move(span));
    seg_start = t;
  }
  return result;
}

std::string format_decode_line(const std::string& utt_id,
                               const DecodeResult& result) {
  std::ostringstream oss;
  oss.precision(12);
  oss << utt_id << '\t' << result.total_loglik << '\t';
  for (size_t i = 0; i < result.units.size(); ++i) {
    if (i) oss << ' ';
    const auto& u = result.units[i];
    oss << u.symbol << ':' << u.start_frame << ':' << u.end_frame;
  }
  return oss.str();
}

DecodeResult parse_decode_line(const std::string& line, std::string* utt_id) {
  auto fields = split_fields(line, '\t');
  if (fields.size() != 3)
    throw DataError("decode line: expected 3 tab-separated fields");
  if (utt_id) *utt_id = fields[0];
  DecodeResult result;
  result.total_loglik = std::stod(fields[1]);
  for (const auto& tok : split_tokens(fields[2])) {
    auto parts = split_fields(tok, ':');
    if (parts.size() != 3)
      throw DataError("decode line: bad unit span '" + tok + "'");
    UnitSpan span;
    span.symbol = parts[0];
    span.start_frame = std::stoi(parts[1]);
    span.end_frame = std::stoi(parts[2]);
    result.units.push_back(std::move(span));
  }
  return result;
}

}  // namespace dialectid

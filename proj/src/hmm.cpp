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

#include "dialectid/hmm.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <set>

#include "json_io.hpp"

namespace dialectid {

void PhoneHmm::validate() const {
  const int rows = total_rows();
  if (static_cast<int>(log_trans.size()) != rows * rows)
    throw DataError("hmm '" + symbol + "': bad transition matrix size");
  if (static_cast<int>(emissions.size()) != num_states)
    throw DataError("hmm '" + symbol + "': emission count mismatch");
  // Entry and emitting rows normalize to one; no backward transitions.
  for (int i = 0; i < rows - 1; ++i) {
    double sum = 0.0;
    for (int j = 0; j < rows; ++j) {
      double lp = trans(i, j);
      if (lp == kLogZero) continue;
      if (j < i) throw DataError("hmm '" + symbol + "': backward transition");
      sum += std::exp(lp);
    }
    if (std::abs(sum - 1.0) > 1e-10)
      throw DataError("hmm '" + symbol + "': row " + std::to_string(i) +
                      " sums to " + std::to_string(sum));
  }
  for (const auto& e : emissions) e.validate();
}

std::string triphone_symbol(const std::string& left, const std::string& center,
                            const std::string& right) {
  return left + "-" + center + "+" + right;
}

bool parse_triphone(const std::string& symbol, std::string* left,
                    std::string* center, std::string* right) {
  size_t dash = symbol.find('-');
  size_t plus = symbol.find('+');
  if (dash == std::string::npos || plus == std::string::npos || plus < dash)
    return false;
  if (left) *left = symbol.substr(0, dash);
  if (center) *center = symbol.substr(dash + 1, plus - dash - 1);
  if (right) *right = symbol.substr(plus + 1);
  return true;
}

const std::string& HmmSet::resolve_symbol(const std::string& symbol) const {
  if (models.count(symbol)) return symbol;
  if (auto it = tying.find(symbol); it != tying.end()) return it->second;
  // Unseen triphone: back off to the center monophone.
  static thread_local std::string center;
  std::string l, r;
  if (parse_triphone(symbol, &l, &center, &r) && models.count(center))
    return center;
  throw DataError("unknown unit symbol '" + symbol + "'");
}

const PhoneHmm& HmmSet::resolve(const std::string& symbol) const {
  return models.at(resolve_symbol(symbol));
}

bool HmmSet::has(const std::string& symbol) const {
  try {
    resolve_symbol(symbol);
    return true;
  } catch (const DataError&) {
    return false;
  }
}

std::vector<std::string> HmmSet::to_context_units(
    const std::vector<std::string>& word_phones) const {
  if (!context_dependent) return word_phones;
  std::vector<std::string> units;
  units.reserve(word_phones.size());
  const std::string& b = inventory.silence_symbol;
  for (size_t i = 0; i < word_phones.size(); ++i) {
    if (word_phones[i] == b) {
      units.push_back(b);
      continue;
    }
    const std::string& left = i == 0 ? b : word_phones[i - 1];
    const std::string& right = i + 1 == word_phones.size() ? b : word_phones[i + 1];
    units.push_back(triphone_symbol(left, word_phones[i], right));
  }
  return units;
}

HmmSet flat_start(const PhoneInventory& inventory, const FeatureMatrix& frames,
                  int num_states) {
  if (frames.num_frames < 1) throw DataError("flat_start: no frames");
  inventory.validate();
  GmmModel global = gmm_from_global_stats(frames);

  PhoneHmm prototype;
  prototype.num_states = num_states;
  const int rows = num_states + 2;
  prototype.log_trans.assign(static_cast<size_t>(rows) * rows, kLogZero);
  prototype.set_trans(0, 1, 0.0);  // entry
  const double half = std::log(0.5);
  for (int s = 1; s <= num_states; ++s) {
    prototype.set_trans(s, s, half);
    prototype.set_trans(s, s + 1, half);
  }
  prototype.emissions.assign(num_states, global);

  HmmSet set;
  set.inventory = inventory;
  for (const auto& phone : inventory.phones) {
    PhoneHmm model = prototype;
    model.symbol = phone;
    for (auto& e : model.emissions) e.label = phone;
    set.models.emplace(phone, std::move(model));
  }
  return set;
}

namespace {

// Concatenated state space of a unit sequence with per-state incoming edges.
struct LinearChain {
  struct Edge {
    int src;
    double weight;
  };
  std::vector<const PhoneHmm*> unit_models;
  std::vector<int> unit_of_state;
  std::vector<int> state_in_unit;   // 1-based within the model
  std::vector<std::vector<Edge>> incoming;
  std::vector<double> init;   // entry weight per state (kLogZero if not initial)
  std::vector<double> final_w;  // exit weight per state
  int num_states = 0;
};

LinearChain build_chain(const HmmSet& set, const std::vector<std::string>& units) {
  LinearChain chain;
  chain.unit_models.reserve(units.size());
  for (const auto& u : units) chain.unit_models.push_back(&set.resolve(u));

  std::vector<int> offset(units.size() + 1, 0);
  for (size_t k = 0; k < units.size(); ++k)
    offset[k + 1] = offset[k] + chain.unit_models[k]->num_states;
  chain.num_states = offset.back();

  chain.unit_of_state.resize(chain.num_states);
  chain.state_in_unit.resize(chain.num_states);
  chain.incoming.resize(chain.num_states);
  chain.init.assign(chain.num_states, kLogZero);
  chain.final_w.assign(chain.num_states, kLogZero);

  for (size_t k = 0; k < units.size(); ++k) {
    const PhoneHmm& m = *chain.unit_models[k];
    const int s_count = m.num_states;
    for (int j = 1; j <= s_count; ++j) {
      int gs = offset[k] + j - 1;
      chain.unit_of_state[gs] = static_cast<int>(k);
      chain.state_in_unit[gs] = j;
      // intra-model
      for (int i = 1; i <= s_count; ++i) {
        double lp = m.trans(i, j);
        if (lp != kLogZero)
          chain.incoming[gs].push_back({offset[k] + i - 1, lp});
      }
      double entry = m.trans(0, j);
      if (entry != kLogZero) {
        if (k == 0) {
          chain.init[gs] = entry;
        } else {
          const PhoneHmm& prev = *chain.unit_models[k - 1];
          for (int i = 1; i <= prev.num_states; ++i) {
            double exit_lp = prev.trans(i, prev.num_states + 1);
            if (exit_lp != kLogZero)
              chain.incoming[gs].push_back(
                  {offset[k - 1] + i - 1, exit_lp + entry});
          }
        }
      }
    }
    if (k + 1 == units.size()) {
      for (int i = 1; i <= s_count; ++i) {
        double exit_lp = m.trans(i, s_count + 1);
        if (exit_lp != kLogZero) chain.final_w[offset[k] + i - 1] = exit_lp;
      }
    }
  }
  return chain;
}

// Emission scores of the distinct state GMMs, computed once per frame.
struct EmissionCache {
  std::vector<const GmmModel*> distinct;
  std::vector<int> state_to_distinct;
  std::vector<double> scores;

  void build(const LinearChain& chain) {
    std::map<const GmmModel*, int> ids;
    state_to_distinct.resize(chain.num_states);
    for (int s = 0; s < chain.num_states; ++s) {
      const PhoneHmm& m = *chain.unit_models[chain.unit_of_state[s]];
      const GmmModel* g = &m.emissions[chain.state_in_unit[s] - 1];
      auto [it, inserted] = ids.emplace(g, static_cast<int>(distinct.size()));
      if (inserted) distinct.push_back(g);
      state_to_distinct[s] = it->second;
    }
    scores.resize(distinct.size());
  }

  void fill(std::span<const double> frame) {
    for (size_t i = 0; i < distinct.size(); ++i)
      scores[i] = log_density(*distinct[i], frame);
  }

  double score(int state) const { return scores[state_to_distinct[state]]; }
};

struct ChainAlignment {
  std::vector<int> state_path;  // global state per frame
  double total_loglik = 0.0;
  std::vector<double> enter_score;  // emission+transition charged to frame t
};

ChainAlignment viterbi_chain(const LinearChain& chain,
                             const FeatureMatrix& feat) {
  const int t_count = feat.num_frames;
  const int s_count = chain.num_states;
  EmissionCache cache;
  cache.build(chain);

  std::vector<double> prev(s_count, kLogZero), cur(s_count, kLogZero);
  std::vector<int> backptr(static_cast<size_t>(t_count) * s_count, -1);

  cache.fill(feat.frame(0));
  for (int s = 0; s < s_count; ++s)
    if (chain.init[s] != kLogZero) prev[s] = chain.init[s] + cache.score(s);

  for (int t = 1; t < t_count; ++t) {
    cache.fill(feat.frame(t));
    for (int s = 0; s < s_count; ++s) {
      double best = kLogZero;
      int best_src = -1;
      for (const auto& e : chain.incoming[s]) {
        double cand = prev[e.src] + e.weight;
        if (cand > best) {
          best = cand;
          best_src = e.src;
        }
      }
      cur[s] = best == kLogZero ? kLogZero : best + cache.score(s);
      backptr[static_cast<size_t>(t) * s_count + s] = best_src;
    }
    std::swap(prev, cur);
  }

  double best = kLogZero;
  int best_state = -1;
  for (int s = 0; s < s_count; ++s) {
    if (chain.final_w[s] == kLogZero || prev[s] == kLogZero) continue;
    double cand = prev[s] + chain.final_w[s];
    if (cand > best) {
      best = cand;
      best_state = s;
    }
  }
  if (best_state < 0)
    throw ComputeError("alignment: no complete path through the chain");

  ChainAlignment out;
  out.total_loglik = best;
  out.state_path.resize(t_count);
  int s = best_state;
  for (int t = t_count - 1; t >= 0; --t) {
    out.state_path[t] = s;
    if (t > 0) s = backptr[static_cast<size_t>(t) * s_count + s];
  }

  // Score charged to each frame: its emission plus the transition entering
  // it; the first frame carries the init weight, the exit weight is added to
  // the last frame. Segment logliks then sum exactly to total_loglik.
  out.enter_score.resize(t_count);
  for (int t = 0; t < t_count; ++t) {
    cache.fill(feat.frame(t));
    double score = cache.score(out.state_path[t]);
    if (t == 0) {
      score += chain.init[out.state_path[0]];
    } else {
      int src = out.state_path[t - 1], dst = out.state_path[t];
      double w = kLogZero;
      for (const auto& e : chain.incoming[dst])
        if (e.src == src) w = std::max(w, e.weight);
      score += w;
    }
    if (t == t_count - 1) score += chain.final_w[out.state_path[t]];
    out.enter_score[t] = score;
  }
  return out;
}

int min_frames_required(const HmmSet& set,
                        const std::vector<std::string>& units) {
  int total = 0;
  for (const auto& u : units) total += set.resolve(u).num_states;
  return total;
}

}  // namespace

Alignment forced_align(const HmmSet& set, const FeatureMatrix& feat,
                       const std::vector<std::string>& units) {
  if (units.empty()) throw DataError("forced_align: empty unit sequence");
  if (feat.num_frames < 1) throw DataError("forced_align: empty features");
  int required = min_frames_required(set, units);
  if (feat.num_frames < required)
    throw AlignmentInfeasible(required, feat.num_frames);

  LinearChain chain = build_chain(set, units);
  ChainAlignment ca = viterbi_chain(chain, feat);

  Alignment out;
  out.total_loglik = ca.total_loglik;
  int seg_start = 0;
  for (int t = 1; t <= feat.num_frames; ++t) {
    bool boundary = t == feat.num_frames ||
                    chain.unit_of_state[ca.state_path[t]] !=
                        chain.unit_of_state[ca.state_path[t - 1]];
    if (!boundary) continue;
    AlignedSegment seg;
    seg.unit = units[chain.unit_of_state[ca.state_path[seg_start]]];
    seg.start_frame = seg_start;
    seg.end_frame = t;
    for (int i = seg_start; i < t; ++i) seg.loglik += ca.enter_score[i];
    out.segments.push_back(std::move(seg));
    seg_start = t;
  }
  return out;
}

HmmSet train_embedded(HmmSet set, const std::vector<TrainingUtterance>& corpus,
                      const EmbeddedTrainOptions& opts,
                      EmbeddedTrainStats* stats) {
  if (corpus.empty()) throw DataError("train_embedded: empty corpus");
  if (stats) *stats = {};

  // Global variance floor over the training frames.
  FeatureMatrix pooled;
  for (const auto& utt : corpus) {
    if (!utt.feat) throw DataError("train_embedded: null features");
    for (int t = 0; t < utt.feat->num_frames; ++t)
      pooled.append_row(utt.feat->frame(t));
  }
  auto floor = variance_floor(pooled, opts.variance_floor_factor);

  std::set<const FeatureMatrix*> warned;
  EmOptions state_em;
  state_em.max_iters = 1;
  state_em.min_frames_per_component = 1;

  for (size_t stage = 0; stage < opts.mixture_schedule.size(); ++stage) {
    int target = opts.mixture_schedule[stage];
    for (auto& [symbol, model] : set.models) {
      (void)symbol;
      for (auto& e : model.emissions)
        if (e.num_components < target) e = grow_mixtures(e, target);
    }
    if (stats) stats->loglik_by_stage.emplace_back();

    for (int iter = 0; iter < opts.iters_per_stage; ++iter) {
      // symbol -> per-state frames and transition counts
      std::map<std::string, std::vector<FeatureMatrix>> state_frames;
      std::map<std::string, std::vector<double>> trans_counts;
      double total_ll = 0.0;
      int aligned = 0;

      for (const auto& utt : corpus) {
        std::vector<std::string> resolved;
        resolved.reserve(utt.units.size());
        for (const auto& u : utt.units) resolved.push_back(set.resolve_symbol(u));

        int required = min_frames_required(set, resolved);
        if (utt.feat->num_frames < required) {
          if (stats && iter == 0 && stage == 0) ++stats->skipped_utterances;
          if (warned.insert(utt.feat).second)
            std::cerr << "train_embedded: skipping infeasible utterance '"
                      << utt.feat->utt_id << "' (needs " << required
                      << " frames, has " << utt.feat->num_frames << ")\n";
          continue;
        }

        LinearChain chain = build_chain(set, resolved);
        ChainAlignment ca = viterbi_chain(chain, *utt.feat);
        total_ll += ca.total_loglik;
        ++aligned;

        for (int t = 0; t < utt.feat->num_frames; ++t) {
          int gs = ca.state_path[t];
          const std::string& sym = resolved[chain.unit_of_state[gs]];
          auto& frames = state_frames[sym];
          const PhoneHmm& m = set.models.at(sym);
          if (frames.empty()) frames.resize(m.num_states);
          frames[chain.state_in_unit[gs] - 1].append_row(utt.feat->frame(t));

          auto& counts = trans_counts[sym];
          const int rows = m.total_rows();
          if (counts.empty()) counts.assign(static_cast<size_t>(rows) * rows, 0.0);
          int j = chain.state_in_unit[gs];
          if (t == 0 || chain.unit_of_state[ca.state_path[t - 1]] !=
                            chain.unit_of_state[gs]) {
            counts[j] += 1.0;  // entry row 0 -> state j
            if (t > 0) {
              // exit of the previous unit
              int prev_gs = ca.state_path[t - 1];
              const std::string& prev_sym =
                  resolved[chain.unit_of_state[prev_gs]];
              const PhoneHmm& pm = set.models.at(prev_sym);
              auto& pc = trans_counts[prev_sym];
              const int prows = pm.total_rows();
              if (pc.empty()) pc.assign(static_cast<size_t>(prows) * prows, 0.0);
              pc[static_cast<size_t>(chain.state_in_unit[prev_gs]) * prows +
                 prows - 1] += 1.0;
            }
          } else {
            int i = chain.state_in_unit[ca.state_path[t - 1]];
            counts[static_cast<size_t>(i) * rows + j] += 1.0;
          }
          if (t == utt.feat->num_frames - 1)
            counts[static_cast<size_t>(j) * rows + rows - 1] += 1.0;
        }
      }

      if (aligned == 0)
        throw ComputeError("train_embedded: every utterance was infeasible");
      if (stats) stats->loglik_by_stage[stage].push_back(total_ll);

      // Re-estimate emissions (one EM pass over each state's hard-assigned
      // frames) and transitions (floored relative frequencies).
      for (auto& [symbol, model] : set.models) {
        auto frames_it = state_frames.find(symbol);
        if (frames_it != state_frames.end()) {
          for (int s = 0; s < model.num_states; ++s) {
            FeatureMatrix& frames = frames_it->second[s];
            GmmModel& emis = model.emissions[s];
            if (frames.num_frames <
                std::max(opts.min_state_frames, emis.num_components))
              continue;
            emis = em_fit(emis, frames, state_em, floor);
          }
        }
        auto counts_it = trans_counts.find(symbol);
        if (counts_it == trans_counts.end()) continue;
        const int rows = model.total_rows();
        for (int i = 0; i < rows - 1; ++i) {
          double row_total = 0.0;
          for (int j = 0; j < rows; ++j)
            row_total += counts_it->second[static_cast<size_t>(i) * rows + j];
          if (row_total <= 0.0) continue;
          double norm = 0.0;
          std::vector<double> probs(rows, 0.0);
          for (int j = 0; j < rows; ++j) {
            if (model.trans(i, j) == kLogZero) continue;  // keep topology
            double c = counts_it->second[static_cast<size_t>(i) * rows + j];
            probs[j] = std::max(c / row_total, opts.transition_floor);
            norm += probs[j];
          }
          for (int j = 0; j < rows; ++j)
            if (probs[j] > 0.0) model.set_trans(i, j, std::log(probs[j] / norm));
        }
      }
    }
  }
  return set;
}

std::vector<std::string> triphone_units(
    const std::vector<std::vector<std::string>>& words,
    const std::string& boundary) {
  std::vector<std::string> units;
  for (const auto& phones : words) {
    for (size_t i = 0; i < phones.size(); ++i) {
      const std::string& left = i == 0 ? boundary : phones[i - 1];
      const std::string& right =
          i + 1 == phones.size() ? boundary : phones[i + 1];
      units.push_back(triphone_symbol(left, phones[i], right));
    }
  }
  return units;
}

HmmSet expand_triphones(
    const HmmSet& set,
    const std::vector<std::vector<std::vector<std::string>>>& transcripts,
    int min_count) {
  std::map<std::string, long> counts;
  for (const auto& utt : transcripts)
    for (const auto& symbol : triphone_units(utt, set.inventory.silence_symbol))
      ++counts[symbol];

  HmmSet out = set;
  out.context_dependent = true;
  for (const auto& [symbol, count] : counts) {
    std::string left, center, right;
    parse_triphone(symbol, &left, &center, &right);
    if (!set.models.count(center))
      throw DataError("triphone center '" + center + "' has no model");
    if (count >= min_count) {
      PhoneHmm clone = set.models.at(center);
      clone.symbol = symbol;
      out.models.emplace(symbol, std::move(clone));
      out.tying[symbol] = symbol;
    } else {
      out.tying[symbol] = center;
    }
  }
  return out;
}

namespace {

json gmm_to_json(const GmmModel& g) {
  json j;
  j["num_components"] = g.num_components;
  j["dim"] = g.dim;
  j["label"] = g.label;
  j["weights"] = g.weights;
  j["means"] = g.means;
  j["vars"] = g.vars;
  return j;
}

GmmModel gmm_from_json(const json& j) {
  GmmModel g;
  g.num_components = j.at("num_components").get<int>();
  g.dim = j.at("dim").get<int>();
  g.label = j.value("label", "");
  g.weights = j.at("weights").get<std::vector<double>>();
  g.means = j.at("means").get<std::vector<double>>();
  g.vars = j.at("vars").get<std::vector<double>>();
  g.validate();
  g.finalize();
  return g;
}

json inventory_to_json(const PhoneInventory& inv) {
  json j;
  j["phones"] = inv.phones;
  json memb = json::object();
  for (const auto& [p, m] : inv.membership) memb[p] = to_string(m);
  j["membership"] = memb;
  j["vowels"] = std::vector<std::string>(inv.vowels.begin(), inv.vowels.end());
  j["nasals"] = std::vector<std::string>(inv.nasals.begin(), inv.nasals.end());
  j["nasalized_symbol"] = inv.nasalized_symbol;
  j["silence_symbol"] = inv.silence_symbol;
  return j;
}

PhoneInventory inventory_from_json(const json& j) {
  PhoneInventory inv;
  inv.silence_symbol = j.value("silence_symbol", "sil");
  inv.nasalized_symbol = j.value("nasalized_symbol", "");
  for (const auto& p : j.at("phones")) {
    std::string phone = p.get<std::string>();
    std::string m = j.at("membership").at(phone).get<std::string>();
    inv.add(phone, m == "LT" ? Membership::LT
                             : m == "CT" ? Membership::CT : Membership::Both);
  }
  for (const auto& v : j.value("vowels", std::vector<std::string>{}))
    inv.vowels.insert(v);
  for (const auto& n : j.value("nasals", std::vector<std::string>{}))
    inv.nasals.insert(n);
  inv.validate();
  return inv;
}

}  // namespace

void save_hmm_set(const std::string& path, const HmmSet& set) {
  json j;
  j["format"] = "dialectid-hmmset";
  j["version"] = 1;
  j["inventory"] = inventory_to_json(set.inventory);
  j["context_dependent"] = set.context_dependent;
  j["tying"] = set.tying;
  json models = json::array();
  for (const auto& [symbol, model] : set.models) {
    json m;
    m["symbol"] = symbol;
    m["num_states"] = model.num_states;
    // Transitions stored in the linear domain; JSON has no -inf literal.
    std::vector<double> linear(model.log_trans.size());
    for (size_t i = 0; i < linear.size(); ++i)
      linear[i] = model.log_trans[i] == kLogZero
                      ? 0.0
                      : std::exp(model.log_trans[i]);
    m["transitions"] = linear;
    json emis = json::array();
    for (const auto& e : model.emissions) emis.push_back(gmm_to_json(e));
    m["emissions"] = emis;
    models.push_back(std::move(m));
  }
  j["models"] = models;
  write_json_file(path, j);
}

HmmSet load_hmm_set(const std::string& path) {
  json j = read_json_file(path, "dialectid-hmmset", 1);
  HmmSet set;
  set.inventory = inventory_from_json(j.at("inventory"));
  set.context_dependent = j.value("context_dependent", false);
  set.tying = j.value("tying", std::map<std::string, std::string>{});
  for (const auto& m : j.at("models")) {
    PhoneHmm model;
    model.symbol = m.at("symbol").get<std::string>();
    model.num_states = m.at("num_states").get<int>();
    auto linear = m.at("transitions").get<std::vector<double>>();
    model.log_trans.resize(linear.size());
    for (size_t i = 0; i < linear.size(); ++i)
      model.log_trans[i] = linear[i] > 0.0 ? std::log(linear[i]) : kLogZero;
    for (const auto& e : m.at("emissions"))
      model.emissions.push_back(gmm_from_json(e));
    model.validate();
    set.models.emplace(model.symbol, std::move(model));
  }
  for (const auto& [logical, physical] : set.tying)
    if (!set.models.count(physical))
      throw DataError(path + ": tying target '" + physical + "' missing");
  for (const auto& p : set.inventory.phones)
    if (!set.models.count(p))
      throw DataError(path + ": inventory phone '" + p + "' has no model");
  return set;
}

}  // namespace dialectid

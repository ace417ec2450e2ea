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

#include "dialectid/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "json_io.hpp"

namespace dialectid {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;  // log(2*pi)
}

void GmmModel::finalize() {
  gconst.assign(num_components, 0.0);
  inv_var.assign(vars.size(), 0.0);
  for (int i = 0; i < num_components; ++i) {
    double logdet = 0.0;
    for (int d = 0; d < dim; ++d) {
      double v = var(i)[d];
      if (v <= 0.0) throw ComputeError("gmm: nonpositive variance");
      logdet += std::log(v);
      inv_var[static_cast<size_t>(i) * dim + d] = 1.0 / v;
    }
    double w = weights[i];
    gconst[i] = (w > 0.0 ? std::log(w) : kLogZero) - 0.5 * logdet -
                0.5 * dim * kLog2Pi;
  }
}

void GmmModel::validate(double floor) const {
  if (num_components <= 0 || dim <= 0)
    throw DataError("gmm: empty model");
  if (static_cast<int>(weights.size()) != num_components ||
      means.size() != static_cast<size_t>(num_components) * dim ||
      vars.size() != static_cast<size_t>(num_components) * dim)
    throw DataError("gmm: inconsistent dimensions");
  double sum = 0.0;
  for (double w : weights) {
    if (w < 0.0 || !std::isfinite(w)) throw DataError("gmm: bad weight");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-10)
    throw DataError("gmm: weights sum to " + std::to_string(sum));
  for (double v : vars)
    if (!(v > 0.0) || v < floor - 1e-12 || !std::isfinite(v))
      throw DataError("gmm: variance below floor");
  for (double m : means)
    if (!std::isfinite(m)) throw DataError("gmm: non-finite mean");
}

GmmModel gmm_from_global_stats(const FeatureMatrix& frames,
                               const std::string& label) {
  if (frames.num_frames < 1) throw DataError("gmm: no frames");
  const int d = frames.dim;
  GmmModel m;
  m.num_components = 1;
  m.dim = d;
  m.label = label;
  m.weights = {1.0};
  m.means.assign(d, 0.0);
  m.vars.assign(d, 0.0);
  for (int t = 0; t < frames.num_frames; ++t)
    for (int c = 0; c < d; ++c) m.means[c] += frames.at(t, c);
  for (int c = 0; c < d; ++c) m.means[c] /= frames.num_frames;
  for (int t = 0; t < frames.num_frames; ++t)
    for (int c = 0; c < d; ++c) {
      double diff = frames.at(t, c) - m.means[c];
      m.vars[c] += diff * diff;
    }
  for (int c = 0; c < d; ++c)
    m.vars[c] = std::max(m.vars[c] / frames.num_frames, 1e-8);
  m.finalize();
  return m;
}

std::vector<double> variance_floor(const FeatureMatrix& frames, double factor,
                                   double absolute_min) {
  GmmModel global = gmm_from_global_stats(frames);
  std::vector<double> floor(global.vars.size());
  for (size_t i = 0; i < floor.size(); ++i)
    floor[i] = std::max(global.vars[i] * factor, absolute_min);
  return floor;
}

double log_density(const GmmModel& model, std::span<const double> frame) {
  if (static_cast<int>(frame.size()) != model.dim)
    throw DataError("log_density: frame dimension mismatch");
  double best = kLogZero;
  double acc = 0.0;
  // Two passes of the streaming log-sum-exp would touch the exponentials
  // twice; instead keep the running max and rescale.
  for (int i = 0; i < model.num_components; ++i) {
    const double* mu = model.mean(i);
    const double* iv = model.inv_var.data() + static_cast<size_t>(i) * model.dim;
    double e = model.gconst[i];
    for (int d = 0; d < model.dim; ++d) {
      double diff = frame[d] - mu[d];
      e -= 0.5 * diff * diff * iv[d];
    }
    if (e == kLogZero) continue;
    if (e <= best) {
      acc += std::exp(e - best);
    } else {
      acc = acc * std::exp(best - e) + 1.0;
      best = e;
    }
  }
  if (best == kLogZero) return kLogZero;
  return best + std::log(acc);
}

double utterance_loglik(const GmmModel& model, const FeatureMatrix& feat) {
  if (feat.num_frames < 1) throw DataError("utterance_loglik: empty matrix");
  double total = 0.0;
  for (int t = 0; t < feat.num_frames; ++t)
    total += log_density(model, feat.frame(t));
  return total;
}

GmmModel em_fit(const GmmModel& init, const FeatureMatrix& frames,
                const EmOptions& opts, const std::vector<double>& floor,
                EmTrace* trace) {
  const int n = frames.num_frames;
  const int d = frames.dim;
  const int m_count = init.num_components;
  if (n < m_count)
    throw DataError("em_fit: fewer frames than components");
  if (d != init.dim) throw DataError("em_fit: dimension mismatch");
  if (!floor.empty() && static_cast<int>(floor.size()) != d)
    throw DataError("em_fit: floor dimension mismatch");

  GmmModel model = init;
  model.finalize();
  if (trace) *trace = {};

  double prev_ll = kLogZero;
  std::vector<double> resp(m_count);
  std::vector<double> acc_w(m_count), acc_mean(static_cast<size_t>(m_count) * d),
      acc_sq(static_cast<size_t>(m_count) * d);

  for (int iter = 0; iter < opts.max_iters; ++iter) {
    std::fill(acc_w.begin(), acc_w.end(), 0.0);
    std::fill(acc_mean.begin(), acc_mean.end(), 0.0);
    std::fill(acc_sq.begin(), acc_sq.end(), 0.0);
    double total_ll = 0.0;

    for (int t = 0; t < n; ++t) {
      const double* x = frames.row(t);
      double norm = kLogZero;
      for (int i = 0; i < m_count; ++i) {
        const double* mu = model.mean(i);
        const double* iv = model.inv_var.data() + static_cast<size_t>(i) * d;
        double e = model.gconst[i];
        for (int c = 0; c < d; ++c) {
          double diff = x[c] - mu[c];
          e -= 0.5 * diff * diff * iv[c];
        }
        resp[i] = e;
        norm = log_add(norm, e);
      }
      if (!std::isfinite(norm))
        throw ComputeError("em_fit: non-finite frame likelihood");
      total_ll += norm;
      for (int i = 0; i < m_count; ++i) {
        double g = std::exp(resp[i] - norm);
        if (g <= 0.0) continue;
        acc_w[i] += g;
        double* am = acc_mean.data() + static_cast<size_t>(i) * d;
        double* as = acc_sq.data() + static_cast<size_t>(i) * d;
        for (int c = 0; c < d; ++c) {
          am[c] += g * x[c];
          as[c] += g * x[c] * x[c];
        }
      }
    }

    if (trace) {
      trace->loglik_per_iter.push_back(total_ll);
      trace->iters_run = iter + 1;
    }

    // M-step; starved components keep their previous parameters.
    for (int i = 0; i < m_count; ++i) {
      if (acc_w[i] < opts.min_frames_per_component) continue;
      double* mu = model.mean(i);
      double* v = model.var(i);
      const double* am = acc_mean.data() + static_cast<size_t>(i) * d;
      const double* as = acc_sq.data() + static_cast<size_t>(i) * d;
      for (int c = 0; c < d; ++c) {
        mu[c] = am[c] / acc_w[i];
        double var = as[c] / acc_w[i] - mu[c] * mu[c];
        double fl = floor.empty() ? 1e-8 : floor[c];
        v[c] = std::max(var, fl);
      }
      model.weights[i] = acc_w[i] / n;
    }
    double wsum = 0.0;
    for (double w : model.weights) wsum += w;
    for (double& w : model.weights) w /= wsum;
    model.finalize();

    if (prev_ll != kLogZero && total_ll - prev_ll < opts.tol) {
      prev_ll = total_ll;
      break;
    }
    prev_ll = total_ll;
  }
  return model;
}

GmmModel split_mixtures(const GmmModel& model, double epsilon) {
  GmmModel out;
  out.num_components = model.num_components * 2;
  out.dim = model.dim;
  out.label = model.label;
  out.weights.reserve(out.num_components);
  out.means.reserve(model.means.size() * 2);
  out.vars.reserve(model.vars.size() * 2);
  for (int i = 0; i < model.num_components; ++i) {
    for (int copy = 0; copy < 2; ++copy) {
      double sign = copy == 0 ? 1.0 : -1.0;
      out.weights.push_back(model.weights[i] / 2.0);
      for (int d = 0; d < model.dim; ++d) {
        double sd = std::sqrt(model.var(i)[d]);
        out.means.push_back(model.mean(i)[d] + sign * epsilon * sd);
        out.vars.push_back(model.var(i)[d]);
      }
    }
  }
  out.finalize();
  return out;
}

GmmModel grow_mixtures(const GmmModel& model, int target_components,
                       double epsilon) {
  if (target_components < model.num_components)
    throw DataError("grow_mixtures: target below current component count");
  GmmModel out = model;
  while (out.num_components < target_components) {
    int heaviest = static_cast<int>(std::max_element(out.weights.begin(),
                                                     out.weights.end()) -
                                    out.weights.begin());
    const int d = out.dim;
    std::vector<double> mean_copy(out.mean(heaviest), out.mean(heaviest) + d);
    std::vector<double> var_copy(out.var(heaviest), out.var(heaviest) + d);
    out.weights[heaviest] /= 2.0;
    out.weights.push_back(out.weights[heaviest]);
    for (int c = 0; c < d; ++c) {
      double shift = epsilon * std::sqrt(var_copy[c]);
      out.mean(heaviest)[c] = mean_copy[c] - shift;
      out.means.push_back(mean_copy[c] + shift);
      out.vars.push_back(var_copy[c]);
    }
    ++out.num_components;
  }
  out.finalize();
  return out;
}

GmmModel train_gmm(const FeatureMatrix& frames, int num_components,
                   const EmOptions& opts, double floor_factor,
                   const std::string& label) {
  auto floor = variance_floor(frames, floor_factor);
  GmmModel model = gmm_from_global_stats(frames, label);
  model = em_fit(model, frames, opts, floor);
  while (model.num_components < num_components) {
    int target = std::min(model.num_components * 2, num_components);
    model = grow_mixtures(model, target);
    model = em_fit(model, frames, opts, floor);
  }
  return model;
}

std::pair<Dialect, GmmScores> classify_gmm(
    const std::map<Dialect, GmmModel>& models, const FeatureMatrix& feat) {
  GmmScores scores;
  scores.lt = utterance_loglik(models.at(Dialect::LT), feat);
  scores.ct = utterance_loglik(models.at(Dialect::CT), feat);
  Dialect label = scores.ct > scores.lt ? Dialect::CT : Dialect::LT;
  return {label, scores};
}

void save_gmm(const std::string& path, const GmmModel& model) {
  json j;
  j["format"] = "dialectid-gmm";
  j["version"] = 1;
  j["num_components"] = model.num_components;
  j["dim"] = model.dim;
  j["label"] = model.label;
  j["weights"] = model.weights;
  j["means"] = model.means;
  j["vars"] = model.vars;
  write_json_file(path, j);
}

GmmModel load_gmm(const std::string& path) {
  json j = read_json_file(path, "dialectid-gmm", 1);
  GmmModel m;
  m.num_components = j.at("num_components").get<int>();
  m.dim = j.at("dim").get<int>();
  m.label = j.value("label", "");
  m.weights = j.at("weights").get<std::vector<double>>();
  m.means = j.at("means").get<std::vector<double>>();
  m.vars = j.at("vars").get<std::vector<double>>();
  m.validate();
  m.finalize();
  return m;
}

}  // namespace dialectid

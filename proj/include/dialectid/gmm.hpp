// gmm.hpp - diagonal-covariance Gaussian mixtures and the GMM classifier.

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

#ifndef DIALECTID_GMM_HPP_
#define DIALECTID_GMM_HPP_

#include <map>
#include <string>
#include <vector>

#include "dialectid/common.hpp"
#include "dialectid/corpus.hpp"

namespace dialectid {

struct GmmModel {
  int num_components = 0;
  int dim = 0;
  std::vector<double> weights;  // M, sums to 1
  std::vector<double> means;    // M x D row-major
  std::vector<double> vars;     // M x D diagonal covariances
  std::string label;            // dialect tag or phone/state identity

  // Derived scoring tables; refreshed by finalize(). Any code that mutates
  // weights/means/vars directly must call finalize() before scoring.
  std::vector<double> gconst;   // log w_i - 0.5*sum(log var) - D/2*log(2pi)
  std::vector<double> inv_var;  // M x D

  double* mean(int i) { return means.data() + static_cast<size_t>(i) * dim; }
  const double* mean(int i) const {
    return means.data() + static_cast<size_t>(i) * dim;
  }
  double* var(int i) { return vars.data() + static_cast<size_t>(i) * dim; }
  const double* var(int i) const {
    return vars.data() + static_cast<size_t>(i) * dim;
  }

  void finalize();
  // Weight sum within 1e-10 of one, variances above floor, finite params.
  void validate(double floor = 0.0) const;
};

// Single-Gaussian model from global data statistics; the root of every
// mixture-splitting schedule.
GmmModel gmm_from_global_stats(const FeatureMatrix& frames,
                               const std::string& label = "");

// Per-dimension variance floor: factor times the global variance of the
// pooled frames (never below absolute_min).
std::vector<double> variance_floor(const FeatureMatrix& frames, double factor,
                                   double absolute_min = 1e-8);

// log p(x | model) via log-sum-exp over components.
double log_density(const GmmModel& model, std::span<const double> frame);

// Sum of per-frame log densities over the utterance.
double utterance_loglik(const GmmModel& model, const FeatureMatrix& feat);

struct EmOptions {
  int max_iters = 20;
  double tol = 1e-4;  // stop when total log-likelihood gains less
  int min_frames_per_component = 2;
};

struct EmTrace {
  std::vector<double> loglik_per_iter;  // total data log-likelihood
  int iters_run = 0;
};

// Expectation-maximization from the given initial model. The total data
// log-likelihood is non-decreasing per iteration up to numerical slack.
// floor is a per-dimension variance floor (see variance_floor).
GmmModel em_fit(const GmmModel& init, const FeatureMatrix& frames,
                const EmOptions& opts, const std::vector<double>& floor,
                EmTrace* trace = nullptr);

// Doubles the component count: each component is duplicated with means
// perturbed by +/- epsilon * sqrt(var) and its weight halved.
GmmModel split_mixtures(const GmmModel& model, double epsilon = 0.2);

// Grows to an arbitrary target component count by repeatedly splitting the
// heaviest component; supports non-doubling schedules such as 8 -> 12.
GmmModel grow_mixtures(const GmmModel& model, int target_components,
                       double epsilon = 0.2);

// Binary split-and-retrain schedule 1 -> 2 -> ... -> num_components.
GmmModel train_gmm(const FeatureMatrix& frames, int num_components,
                   const EmOptions& opts, double floor_factor = 1e-3,
                   const std::string& label = "");

struct GmmScores {
  double lt = 0.0;
  double ct = 0.0;
};

// Maximum-likelihood dialect decision over per-dialect models; ties go LT.
std::pair<Dialect, GmmScores> classify_gmm(
    const std::map<Dialect, GmmModel>& models, const FeatureMatrix& feat);

void save_gmm(const std::string& path, const GmmModel& model);
GmmModel load_gmm(const std::string& path);

}  // namespace dialectid

#endif  // DIALECTID_GMM_HPP_

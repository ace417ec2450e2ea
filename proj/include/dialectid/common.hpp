// common.hpp - shared numeric types, errors and deterministic sampling helpers.

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

#ifndef DIALECTID_COMMON_HPP_
#define DIALECTID_COMMON_HPP_

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dialectid {

constexpr double kLogZero = -std::numeric_limits<double>::infinity();

// Input or corpus-level problems (bad manifests, unknown symbols, ...).
struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failures during training or decoding (divergence, no path, ...).
struct ComputeError : std::runtime_error {
  explicit ComputeError(const std::string& msg) : std::runtime_error(msg) {}
};

// Forced alignment cannot place the requested unit sequence into the
// available frames. Catchable as a distinct outcome, not just a message.
struct AlignmentInfeasible : ComputeError {
  int required_frames;
  int available_frames;
  AlignmentInfeasible(int required, int available)
      : ComputeError("alignment infeasible: requires " +
                     std::to_string(required) + " frames, only " +
                     std::to_string(available) + " available"),
        required_frames(required),
        available_frames(available) {}
};

// Beam search ended with no surviving token.
struct SearchFailure : ComputeError {
  explicit SearchFailure(const std::string& msg) : ComputeError(msg) {}
};

// Time-major feature matrix; one row per frame. Used both for per-utterance
// features (utt_id set) and for anonymous pooled frame sets.
struct FeatureMatrix {
  int num_frames = 0;
  int dim = 0;
  std::vector<double> data;  // row-major, num_frames * dim
  double frame_shift = 0.01;
  std::string utt_id;

  FeatureMatrix() = default;
  FeatureMatrix(int t, int d)
      : num_frames(t), dim(d), data(static_cast<size_t>(t) * d, 0.0) {}

  double* row(int t) { return data.data() + static_cast<size_t>(t) * dim; }
  const double* row(int t) const {
    return data.data() + static_cast<size_t>(t) * dim;
  }
  double& at(int t, int d) { return data[static_cast<size_t>(t) * dim + d]; }
  double at(int t, int d) const {
    return data[static_cast<size_t>(t) * dim + d];
  }
  std::span<const double> frame(int t) const {
    return {row(t), static_cast<size_t>(dim)};
  }

  void append_row(std::span<const double> values) {
    if (dim == 0) dim = static_cast<int>(values.size());
    if (static_cast<int>(values.size()) != dim)
      throw DataError("append_row: dimension mismatch");
    data.insert(data.end(), values.begin(), values.end());
    ++num_frames;
  }

  bool all_finite() const {
    for (double v : data)
      if (!std::isfinite(v)) return false;
    return true;
  }
};

inline double log_sum_exp(std::span<const double> xs) {
  double m = kLogZero;
  for (double x : xs) m = std::max(m, x);
  if (m == kLogZero) return kLogZero;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

inline double log_add(double a, double b) {
  if (a == kLogZero) return b;
  if (b == kLogZero) return a;
  double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// All stochastic code in the toolkit draws from mt19937_64 through the
// helpers below so that a fixed seed reproduces bit-identical corpora and
// models regardless of the standard library's distribution implementations.
using Rng = std::mt19937_64;

inline double uniform01(Rng& rng) {
  return (rng() >> 11) * 0x1.0p-53;  // 53-bit mantissa in [0, 1)
}

inline double uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

// Uniform integer in [lo, hi] inclusive.
inline int uniform_int(Rng& rng, int lo, int hi) {
  uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
  return lo + static_cast<int>(rng() % span);
}

// Marsaglia polar method; deterministic for a given engine state.
inline double gaussian(Rng& rng) {
  double u, v, s;
  do {
    u = 2.0 * uniform01(rng) - 1.0;
    v = 2.0 * uniform01(rng) - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  return u * std::sqrt(-2.0 * std::log(s) / s);
}

template <typename T>
void shuffle_in_place(std::vector<T>& items, Rng& rng) {
  for (size_t i = items.size(); i > 1; --i) {
    size_t j = rng() % i;
    std::swap(items[i - 1], items[j]);
  }
}

// FNV-1a, used for config digests and output determinism checks.
inline uint64_t fnv1a(std::span<const unsigned char> bytes,
                      uint64_t h = 1469598103934665603ull) {
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 1099511628211ull;
  }
  return h;
}

inline uint64_t fnv1a(const std::string& s) {
  return fnv1a({reinterpret_cast<const unsigned char*>(s.data()), s.size()});
}

std::vector<std::string> split_fields(const std::string& line, char sep);
std::vector<std::string> split_tokens(const std::string& text);
std::string join_tokens(const std::vector<std::string>& tokens,
                        const std::string& sep = " ");

}  // namespace dialectid

#endif  // DIALECTID_COMMON_HPP_

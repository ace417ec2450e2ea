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

#include "dialectid/lm.hpp"

#include <cmath>

#include "json_io.hpp"

namespace dialectid {

double PhoneLM::unigram(const std::string& p) const {
  auto it = index.find(p);
  if (it == index.end()) throw DataError("lm: unknown symbol '" + p + "'");
  return log_unigram[it->second];
}

double PhoneLM::bigram(const std::string& history, const std::string& p) const {
  auto h = index.find(history);
  auto t = index.find(p);
  if (h == index.end()) throw DataError("lm: unknown history '" + history + "'");
  if (t == index.end()) throw DataError("lm: unknown symbol '" + p + "'");
  return log_bigram[static_cast<size_t>(h->second) * vocab_size() + t->second];
}

void PhoneLM::validate() const {
  const int v = vocab_size();
  for (int h = 0; h < v; ++h) {
    double sum = 0.0;
    for (int t = 0; t < v; ++t) {
      double lp = log_bigram[static_cast<size_t>(h) * v + t];
      if (lp != kLogZero) sum += std::exp(lp);
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw DataError("lm: history '" + symbols[h] + "' sums to " +
                      std::to_string(sum));
  }
}

PhoneLM estimate_bigram(
    const std::vector<std::vector<std::string>>& transcripts,
    const PhoneInventory& inventory, double add_k) {
  if (transcripts.empty()) throw DataError("estimate_bigram: no transcripts");
  if (add_k < 0.0) throw DataError("estimate_bigram: negative add_k");

  PhoneLM lm;
  lm.add_k = add_k;
  lm.symbols = inventory.phones;
  lm.symbols.push_back(lm.boundary);
  for (size_t i = 0; i < lm.symbols.size(); ++i)
    lm.index[lm.symbols[i]] = static_cast<int>(i);
  const int v = lm.vocab_size();
  const int boundary = lm.index.at(lm.boundary);

  std::vector<double> uni(v, 0.0);
  std::vector<double> bi(static_cast<size_t>(v) * v, 0.0);
  double total = 0.0;
  for (const auto& sentence : transcripts) {
    int prev = boundary;
    for (const auto& phone : sentence) {
      auto it = lm.index.find(phone);
      if (it == lm.index.end() || phone == lm.boundary)
        throw DataError("estimate_bigram: phone '" + phone +
                        "' outside the inventory");
      uni[it->second] += 1.0;
      total += 1.0;
      bi[static_cast<size_t>(prev) * v + it->second] += 1.0;
      prev = it->second;
    }
    bi[static_cast<size_t>(prev) * v + boundary] += 1.0;
    uni[boundary] += 1.0;
    total += 1.0;
  }

  lm.log_unigram.resize(v);
  for (int i = 0; i < v; ++i) {
    double p = (uni[i] + add_k) / (total + add_k * v);
    lm.log_unigram[i] = p > 0.0 ? std::log(p) : kLogZero;
  }
  lm.log_bigram.assign(static_cast<size_t>(v) * v, kLogZero);
  for (int h = 0; h < v; ++h) {
    double row_count = 0.0;
    for (int t = 0; t < v; ++t) row_count += bi[static_cast<size_t>(h) * v + t];
    for (int t = 0; t < v; ++t) {
      double denom = row_count + add_k * v;
      if (denom <= 0.0) {
        // Unseen history with raw counts: fall back to uniform so the
        // normalization invariant still holds.
        lm.log_bigram[static_cast<size_t>(h) * v + t] = -std::log(v);
        continue;
      }
      double p = (bi[static_cast<size_t>(h) * v + t] + add_k) / denom;
      lm.log_bigram[static_cast<size_t>(h) * v + t] =
          p > 0.0 ? std::log(p) : kLogZero;
    }
  }
  return lm;
}

void save_phone_lm(const std::string& path, const PhoneLM& lm) {
  json j;
  j["format"] = "dialectid-phonelm";
  j["version"] = 1;
  j["symbols"] = lm.symbols;
  j["boundary"] = lm.boundary;
  j["add_k"] = lm.add_k;
  // Linear domain: JSON cannot carry -inf.
  std::vector<double> uni(lm.log_unigram.size()), bi(lm.log_bigram.size());
  for (size_t i = 0; i < uni.size(); ++i)
    uni[i] = lm.log_unigram[i] == kLogZero ? 0.0 : std::exp(lm.log_unigram[i]);
  for (size_t i = 0; i < bi.size(); ++i)
    bi[i] = lm.log_bigram[i] == kLogZero ? 0.0 : std::exp(lm.log_bigram[i]);
  j["unigram"] = uni;
  j["bigram"] = bi;
  write_json_file(path, j);
}

PhoneLM load_phone_lm(const std::string& path) {
  json j = read_json_file(path, "dialectid-phonelm", 1);
  PhoneLM lm;
  lm.symbols = j.at("symbols").get<std::vector<std::string>>();
  lm.boundary = j.at("boundary").get<std::string>();
  lm.add_k = j.at("add_k").get<double>();
  for (size_t i = 0; i < lm.symbols.size(); ++i)
    lm.index[lm.symbols[i]] = static_cast<int>(i);
  auto uni = j.at("unigram").get<std::vector<double>>();
  auto bi = j.at("bigram").get<std::vector<double>>();
  lm.log_unigram.resize(uni.size());
  lm.log_bigram.resize(bi.size());
  for (size_t i = 0; i < uni.size(); ++i)
    lm.log_unigram[i] = uni[i] > 0.0 ? std::log(uni[i]) : kLogZero;
  for (size_t i = 0; i < bi.size(); ++i)
    lm.log_bigram[i] = bi[i] > 0.0 ? std::log(bi[i]) : kLogZero;
  lm.validate();
  return lm;
}

}  // namespace dialectid

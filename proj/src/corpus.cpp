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

#include "dialectid/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace dialectid {

const char* to_string(Dialect d) { return d == Dialect::LT ? "LT" : "CT"; }

Dialect dialect_from_string(const std::string& s) {
  if (s == "LT") return Dialect::LT;
  if (s == "CT") return Dialect::CT;
  throw DataError("unknown dialect tag '" + s + "'");
}

const char* to_string(Membership m) {
  switch (m) {
    case Membership::LT: return "LT";
    case Membership::CT: return "CT";
    default: return "BOTH";
  }
}

namespace {

Membership membership_from_string(const std::string& s) {
  if (s == "LT") return Membership::LT;
  if (s == "CT") return Membership::CT;
  if (s == "BOTH") return Membership::Both;
  throw DataError("unknown membership tag '" + s + "'");
}

std::string strip_cr(std::string line) {
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n'))
    line.pop_back();
  return line;
}

void validate_symbol(const std::string& sym) {
  if (sym.empty()) throw DataError("empty phone symbol");
  for (char c : sym)
    if (c == ':' || c == '-' || c == '+' || c == ' ' || c == '\t')
      throw DataError("phone symbol '" + sym + "' contains a reserved character");
}

}  // namespace

std::vector<UtteranceRecord> load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest " + path);
  std::vector<UtteranceRecord> records;
  std::set<std::string> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty() || line[0] == '#') continue;
    auto fields = split_fields(line, '\t');
    if (fields.size() < 4 || fields.size() > 5)
      throw DataError(path + ":" + std::to_string(lineno) +
                      ": expected 4 or 5 tab-separated fields, got " +
                      std::to_string(fields.size()));
    UtteranceRecord rec;
    rec.utt_id = fields[0];
    rec.audio_path = fields[1];
    rec.dialect = [&] {
      try {
        return dialect_from_string(fields[2]);
      } catch (const DataError& e) {
        throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
      }
    }();
    rec.speaker_id = fields[3];
    if (fields.size() == 5) rec.transcript = split_tokens(fields[4]);
    if (rec.utt_id.empty() || rec.audio_path.empty() || rec.speaker_id.empty())
      throw DataError(path + ":" + std::to_string(lineno) +
                      ": empty mandatory field");
    if (!seen.insert(rec.utt_id).second)
      throw DataError(path + ":" + std::to_string(lineno) +
                      ": duplicate utt_id '" + rec.utt_id + "'");
    records.push_back(std::move(rec));
  }
  return records;
}

void save_manifest(const std::string& path,
                   const std::vector<UtteranceRecord>& records) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write manifest " + path);
  for (const auto& rec : records) {
    out << rec.utt_id << '\t' << rec.audio_path << '\t'
        << to_string(rec.dialect) << '\t' << rec.speaker_id << '\t'
        << join_tokens(rec.transcript) << '\n';
  }
}

bool PhoneInventory::contains(const std::string& p) const {
  return std::find(phones.begin(), phones.end(), p) != phones.end();
}

void PhoneInventory::add(const std::string& phone, Membership m) {
  validate_symbol(phone);
  if (contains(phone)) throw DataError("duplicate phone '" + phone + "'");
  phones.push_back(phone);
  membership[phone] = m;
}

void PhoneInventory::validate() const {
  std::set<std::string> uniq(phones.begin(), phones.end());
  if (uniq.size() != phones.size())
    throw DataError("phone inventory has duplicate symbols");
  for (const auto& p : phones) {
    validate_symbol(p);
    if (!membership.count(p))
      throw DataError("phone '" + p + "' has no dialect membership");
  }
  for (const auto& v : vowels)
    if (!contains(v)) throw DataError("vowel '" + v + "' not in inventory");
  for (const auto& n : nasals)
    if (!contains(n)) throw DataError("nasal '" + n + "' not in inventory");
  if (!nasalized_symbol.empty()) {
    if (!contains(nasalized_symbol))
      throw DataError("nasalized symbol not in inventory");
    if (membership.at(nasalized_symbol) != Membership::CT)
      throw DataError("nasalized class must carry CT membership");
  }
}

void save_inventory(const std::string& path, const PhoneInventory& inv) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path);
  for (const auto& p : inv.phones) {
    std::vector<std::string> classes;
    if (inv.vowels.count(p)) classes.push_back("vowel");
    if (inv.nasals.count(p)) classes.push_back("nasal");
    if (p == inv.nasalized_symbol) classes.push_back("nasalized");
    if (p == inv.silence_symbol) classes.push_back("silence");
    out << p << '\t' << to_string(inv.membership.at(p)) << '\t'
        << join_tokens(classes, ",") << '\n';
  }
}

PhoneInventory load_inventory(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  PhoneInventory inv;
  inv.silence_symbol.clear();
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty() || line[0] == '#') continue;
    auto fields = split_fields(line, '\t');
    if (fields.size() != 3)
      throw DataError(path + ":" + std::to_string(lineno) +
                      ": expected 3 fields");
    inv.add(fields[0], membership_from_string(fields[1]));
    for (const auto& cls : split_fields(fields[2], ',')) {
      if (cls == "vowel") inv.vowels.insert(fields[0]);
      else if (cls == "nasal") inv.nasals.insert(fields[0]);
      else if (cls == "nasalized") inv.nasalized_symbol = fields[0];
      else if (cls == "silence") inv.silence_symbol = fields[0];
      else if (!cls.empty())
        throw DataError(path + ":" + std::to_string(lineno) +
                        ": unknown class '" + cls + "'");
    }
  }
  inv.validate();
  return inv;
}

void Lexicon::add(const std::string& word, Pronunciation pron) {
  if (word.empty()) throw DataError("lexicon: empty word");
  if (pron.empty()) throw DataError("lexicon: empty pronunciation for '" + word + "'");
  auto& prons = entries[word];
  if (std::find(prons.begin(), prons.end(), pron) == prons.end())
    prons.push_back(std::move(pron));
  if (!membership.count(word))
    membership[word] = tag == Tag::CT ? Membership::CT : Membership::LT;
}

void Lexicon::validate(const PhoneInventory& inv) const {
  for (const auto& [word, prons] : entries) {
    if (prons.empty())
      throw DataError("lexicon word '" + word + "' has no pronunciation");
    for (const auto& pron : prons) {
      if (pron.empty())
        throw DataError("lexicon word '" + word + "' has an empty pronunciation");
      for (const auto& p : pron)
        if (!inv.contains(p))
          throw DataError("lexicon word '" + word + "' uses phone '" + p +
                          "' outside the inventory");
    }
  }
}

Lexicon load_lexicon(const std::string& path, Lexicon::Tag tag) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open lexicon " + path);
  Lexicon lex;
  lex.tag = tag;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty() || line[0] == '#') continue;
    auto fields = split_fields(line, '\t');
    if (fields.size() != 2)
      throw DataError(path + ":" + std::to_string(lineno) +
                      ": expected `word<TAB>phones`");
    lex.add(fields[0], split_tokens(fields[1]));
  }
  return lex;
}

void save_lexicon(const std::string& path, const Lexicon& lex) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write lexicon " + path);
  for (const auto& [word, prons] : lex.entries)
    for (const auto& pron : prons)
      out << word << '\t' << join_tokens(pron) << '\n';
}

Lexicon merge_lexicons(const Lexicon& lt, const Lexicon& ct) {
  Lexicon unified;
  unified.tag = Lexicon::Tag::Unified;
  for (const auto& [word, prons] : lt.entries) {
    for (const auto& pron : prons) unified.entries[word].push_back(pron);
    unified.membership[word] = Membership::LT;
  }
  for (const auto& [word, prons] : ct.entries) {
    auto& target = unified.entries[word];
    for (const auto& pron : prons)
      if (std::find(target.begin(), target.end(), pron) == target.end())
        target.push_back(pron);
    auto it = unified.membership.find(word);
    unified.membership[word] = it != unified.membership.end() &&
                                       it->second == Membership::LT
                                   ? Membership::Both
                                   : Membership::CT;
  }
  return unified;
}

std::optional<std::string> ParallelDictionary::parallel(
    const std::string& word, Dialect source) const {
  if (source == Dialect::LT) {
    if (auto it = overrides.find(word); it != overrides.end())
      return it->second;
    if (auto it = lt_to_ct.find(word); it != lt_to_ct.end()) return it->second;
    return std::nullopt;
  }
  if (auto it = ct_to_lt.find(word); it != ct_to_lt.end()) return it->second;
  return std::nullopt;
}

ParallelDictionary build_parallel_dictionary(
    const std::vector<std::pair<std::string, std::string>>& rules,
    const std::map<std::string, std::string>& manual, const Lexicon& lt,
    const Lexicon& ct, std::vector<std::string>* warnings) {
  auto warn = [&](const std::string& msg) {
    if (warnings) warnings->push_back(msg);
  };
  ParallelDictionary dict;
  for (const auto& [word, prons] : lt.entries) {
    (void)prons;
    std::string s = word;
    for (const auto& [pattern, replacement] : rules) {
      if (pattern.empty()) continue;
      size_t pos = 0;
      while ((pos = s.find(pattern, pos)) != std::string::npos) {
        s.replace(pos, pattern.size(), replacement);
        pos += replacement.size();
      }
    }
    if (ct.contains(s)) dict.lt_to_ct[word] = s;
  }
  for (const auto& [src, dst] : manual) {
    if (!lt.contains(src) && !ct.contains(src)) {
      warn("parallel override source '" + src + "' absent from both lexicons");
      continue;
    }
    if (!ct.contains(dst) && !lt.contains(dst)) {
      warn("parallel override target '" + dst + "' absent from both lexicons");
      continue;
    }
    dict.overrides[src] = dst;
    dict.ct_to_lt[dst] = src;
  }
  return dict;
}

ParallelDictionary load_parallel_dictionary(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open parallel dictionary " + path);
  ParallelDictionary dict;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty() || line[0] == '#') continue;
    auto fields = split_fields(line, '\t');
    if (fields.size() != 3)
      throw DataError(path + ":" + std::to_string(lineno) +
                      ": expected `src<TAB>dst<TAB>{rule|manual}`");
    if (fields[2] == "rule") {
      dict.lt_to_ct[fields[0]] = fields[1];
    } else if (fields[2] == "manual") {
      dict.overrides[fields[0]] = fields[1];
      dict.ct_to_lt[fields[1]] = fields[0];
    } else {
      throw DataError(path + ":" + std::to_string(lineno) +
                      ": unknown provenance '" + fields[2] + "'");
    }
  }
  return dict;
}

void save_parallel_dictionary(const std::string& path,
                              const ParallelDictionary& dict) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path);
  for (const auto& [src, dst] : dict.lt_to_ct)
    out << src << '\t' << dst << "\trule\n";
  for (const auto& [src, dst] : dict.overrides)
    out << src << '\t' << dst << "\tmanual\n";
}

SplitResult split_speaker_disjoint(
    const std::vector<UtteranceRecord>& records, double train_fraction,
    uint64_t seed, const std::map<std::string, double>& durations_by_utt) {
  if (train_fraction <= 0.0 || train_fraction >= 1.0)
    throw DataError("split: train_fraction must be in (0, 1)");

  auto duration_of = [&](const UtteranceRecord& rec) {
    auto it = durations_by_utt.find(rec.utt_id);
    return it != durations_by_utt.end() ? it->second : 1.0;
  };

  for (Dialect d : {Dialect::LT, Dialect::CT}) {
    std::set<std::string> speakers;
    for (const auto& rec : records)
      if (rec.dialect == d) speakers.insert(rec.speaker_id);
    if (speakers.size() < 2)
      throw DataError(std::string("split: fewer than 2 speakers in dialect ") +
                      to_string(d));
  }

  // Seeded tie-break permutation over speakers.
  std::vector<std::string> all_speakers;
  {
    std::set<std::string> seen;
    for (const auto& rec : records)
      if (seen.insert(rec.speaker_id).second)
        all_speakers.push_back(rec.speaker_id);
  }
  Rng rng(seed);
  shuffle_in_place(all_speakers, rng);
  std::map<std::string, int> tie_rank;
  for (size_t i = 0; i < all_speakers.size(); ++i)
    tie_rank[all_speakers[i]] = static_cast<int>(i);

  std::map<std::string, bool> assigned_train;  // speaker -> side

  for (Dialect d : {Dialect::LT, Dialect::CT}) {
    std::map<std::string, double> speaker_dur;
    double total = 0.0;
    for (const auto& rec : records) {
      if (rec.dialect != d) continue;
      double dur = duration_of(rec);
      speaker_dur[rec.speaker_id] += dur;
      total += dur;
    }
    double train_target = train_fraction * total;
    double test_target = total - train_target;
    double train_sum = 0.0, test_sum = 0.0;

    // Speakers already pinned by the previous dialect keep their side and
    // count toward this dialect's totals first.
    std::vector<std::pair<std::string, double>> pending;
    for (const auto& [spk, dur] : speaker_dur) {
      auto it = assigned_train.find(spk);
      if (it != assigned_train.end()) {
        (it->second ? train_sum : test_sum) += dur;
      } else {
        pending.emplace_back(spk, dur);
      }
    }
    std::sort(pending.begin(), pending.end(), [&](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return tie_rank[a.first] < tie_rank[b.first];
    });
    for (const auto& [spk, dur] : pending) {
      bool to_train = (train_target - train_sum) >= (test_target - test_sum);
      assigned_train[spk] = to_train;
      (to_train ? train_sum : test_sum) += dur;
    }

    // Greedy packing can empty one side at extreme fractions; move the
    // smallest newly assigned speaker so each dialect keeps test and train
    // material.
    for (bool side : {true, false}) {
      double side_sum = side ? train_sum : test_sum;
      if (side_sum > 0.0 || pending.empty()) continue;
      auto smallest = std::min_element(
          pending.begin(), pending.end(),
          [](const auto& a, const auto& b) { return a.second < b.second; });
      assigned_train[smallest->first] = side;
    }
  }

  SplitResult result;
  for (const auto& rec : records)
    (assigned_train[rec.speaker_id] ? result.train : result.test).push_back(rec);
  return result;
}

}  // namespace dialectid

// pipeline.hpp - batch orchestration shared by the command line tool and
// the Python bindings: corpus directories, feature extraction over a
// manifest, per-system training, batch identification and reports.

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

#ifndef DIALECTID_PIPELINE_HPP_
#define DIALECTID_PIPELINE_HPP_

#include <map>
#include <string>
#include <vector>

#include "dialectid/cnn.hpp"
#include "dialectid/corpus.hpp"
#include "dialectid/featext.hpp"
#include "dialectid/gmm.hpp"
#include "dialectid/hmm.hpp"
#include "dialectid/systems.hpp"

namespace dialectid {

// A corpus directory as written by the synthetic generator:
// manifest.tsv, lexicon_lt.tsv, lexicon_ct.tsv, parallel_dict.tsv,
// phones.tsv and wav/.
struct CorpusDir {
  std::string dir;
  std::vector<UtteranceRecord> manifest;
  Lexicon lt_lexicon, ct_lexicon;
  ParallelDictionary pdict;
  PhoneInventory inventory;
};

CorpusDir load_corpus_dir(const std::string& dir,
                          const std::string& manifest_name = "manifest.tsv");

// Front-end over a manifest; audio paths are resolved relative to the
// manifest's directory when not absolute. Runs utterances in parallel and
// preserves manifest order.
std::vector<FeatureMatrix> extract_manifest_features(
    const std::vector<UtteranceRecord>& records, const std::string& base_dir,
    const FrontEndConfig& cfg, int workers = 0);

// Phone sequence of one utterance: lexicon lookup (first pronunciation) per
// word, optional nasalization relabel. Boundary silence units are only
// meaningful when the silence symbol is a modeled phone of the inventory
// (the front-end trims silence, so the default pipeline goes without).
std::vector<std::string> phone_transcript(const UtteranceRecord& record,
                                          const Lexicon& lexicon,
                                          const PhoneInventory& inventory,
                                          bool boundary_silence = false,
                                          bool relabel = false);

// Word-segmented variant (no boundary silence), for triphone enumeration.
std::vector<std::vector<std::string>> word_pronunciations(
    const UtteranceRecord& record, const Lexicon& lexicon);

// Phones of one dialect (membership d or Both) plus silence; with_nasalized
// additionally includes the grouped nasalized symbol.
PhoneInventory dialect_inventory(const PhoneInventory& unified, Dialect d,
                                 bool with_nasalized = false);

// Frames of the given records pooled into one matrix, subsampled uniformly
// to at most max_frames (0 = no cap) for training tractability.
FeatureMatrix pooled_frames(const std::vector<UtteranceRecord>& records,
                            const std::map<std::string, FeatureMatrix>& feats,
                            size_t max_frames = 0, uint64_t seed = 0);

struct TrainOptions {
  int gmm_components = 128;
  EmOptions gmm_em;
  double gmm_floor_factor = 1e-3;
  size_t gmm_max_frames = 60000;

  EmbeddedTrainOptions hmm;
  bool triphones = false;
  int triphone_min_count = 3;

  TrainHyper cnn;
  int cnn_target_frames = 0;    // 0: computed from the corpus plus margin
  int cnn_margin = 40;
  bool cnn_paper_arch = true;   // tiny architecture otherwise, for smokes

  NasalScope relabel_scope = NasalScope::WordFinal;
  uint64_t seed = 1;
};

// One trained acoustic system per dialect for the GMM classifier.
struct GmmDid {
  GmmModel lt, ct;
};
GmmDid train_gmm_did(const CorpusDir& corpus,
                     const std::vector<UtteranceRecord>& train,
                     const std::map<std::string, FeatureMatrix>& feats,
                     const TrainOptions& opts);

// Everything PPR v1/v2/v3 need: plain per-dialect phone systems with LMs
// and the relabeled CT system for v2.
struct PprModels {
  HmmSet lt_set, ct_set, ct_set_relabeled;
  PhoneLM lt_lm, ct_lm, ct_lm_relabeled;
};
PprModels train_ppr(const CorpusDir& corpus,
                    const std::vector<UtteranceRecord>& train,
                    const std::map<std::string, FeatureMatrix>& feats,
                    const TrainOptions& opts);

struct PlvcsrModels {
  HmmSet lt_set, ct_set;
};
PlvcsrModels train_plvcsr(const CorpusDir& corpus,
                          const std::vector<UtteranceRecord>& train,
                          const std::map<std::string, FeatureMatrix>& feats,
                          const TrainOptions& opts);

// Unified system: pooled data, merged inventory and lexicon.
struct UprModels {
  HmmSet unified_set;
  Lexicon unified_lexicon;
};
UprModels train_upr(const CorpusDir& corpus,
                    const std::vector<UtteranceRecord>& train,
                    const std::map<std::string, FeatureMatrix>& feats,
                    const TrainOptions& opts);

struct CnnDid {
  CnnModel model;
  int target_frames = 0;
};
CnnDid train_cnn_did(const CorpusDir& corpus,
                     const std::vector<UtteranceRecord>& train,
                     const std::map<std::string, FeatureMatrix>& feats,
                     const TrainOptions& opts);

Decision cnn_identify(CnnModel& model, int target_frames,
                      const FeatureMatrix& feat);

// Model directory layout helpers: save under dir with fixed file names and
// rebuild the ready-to-run recognizers for one system kind.
void save_gmm_did(const std::string& dir, const GmmDid& m);
void save_ppr(const std::string& dir, const PprModels& m);
void save_plvcsr(const std::string& dir, const PlvcsrModels& m);
void save_upr(const std::string& dir, const UprModels& m);
void save_cnn_did(const std::string& dir, const CnnDid& m);

// A loaded, decode-ready system of any kind.
struct IdentifySystem {
  SystemKind kind;
  IdentifyFn fn;
};

// Loads the models a system needs from model_dir (P-LVCSR models are also
// loaded for the UPR fallbacks) and binds the identify function.
IdentifySystem load_identify_system(SystemKind kind,
                                    const std::string& model_dir,
                                    const CorpusDir& corpus,
                                    const DidConfig& cfg);

// Runs identification over the manifest (parallel across utterances,
// results ordered by utt_id).
std::vector<std::pair<std::string, Decision>> identify_batch(
    const IdentifyFn& fn, const std::vector<UtteranceRecord>& records,
    const std::map<std::string, FeatureMatrix>& feats, int workers = 0);

// Decision file: '#'-prefixed reproducibility header, then
// `utt_id<TAB>label<TAB>lt_score<TAB>ct_score<TAB>fallback` sorted by id.
// Written atomically (temp file + rename).
void write_decisions(const std::string& path,
                     const std::vector<std::pair<std::string, Decision>>& rows,
                     SystemKind kind,
                     const std::map<std::string, std::string>& repro);
std::vector<std::pair<std::string, Decision>> load_decisions(
    const std::string& path, SystemKind* kind = nullptr);

// Metrics from a decisions file against the truth manifest.
Metrics score_decisions(
    const std::vector<std::pair<std::string, Decision>>& decisions,
    const std::vector<UtteranceRecord>& truth);

// Evaluation report: JSON with accuracy, confusion, per-utterance rows and
// the reproducibility block, plus a plain-text summary table.
void write_report_json(const std::string& path, const Metrics& metrics,
                       SystemKind kind,
                       const std::map<std::string, std::string>& repro);
void write_report_table(const std::string& path,
                        const std::vector<std::string>& report_json_paths);
std::string render_report_table(
    const std::vector<std::string>& report_json_paths);

// Simple deterministic parallel map; worker count 0 uses the hardware
// concurrency. Results are stored by index, so ordering never depends on
// scheduling.
void parallel_for(size_t n, int workers,
                  const std::function<void(size_t)>& body);

}  // namespace dialectid

#endif  // DIALECTID_PIPELINE_HPP_

// synth.hpp - deterministic two-dialect synthetic corpus generator.
//
// Utterances are sampled from per-phone generative models (formant
// templates with per-state envelopes and per-frame jitter) and rendered as
// sinusoid-plus-noise frames, which keeps the dialect classes separable
// through the MFCC front-end without aiming for natural speech. Dialect B
// carries the colloquial-style cues: shorter vowels, mostly vowel-final
// words, a nasalized realization of word-final vowel+nasal pairs, and one
// extra phone of its own.

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

#ifndef DIALECTID_SYNTH_HPP_
#define DIALECTID_SYNTH_HPP_

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dialectid/corpus.hpp"
#include "dialectid/wav.hpp"

namespace dialectid {

// Spectral template of one phone: up to three sinusoid formants plus a
// noise component. Frequencies in Hz, amplitudes relative.
struct PhoneAcoustics {
  std::vector<std::pair<double, double>> formants;  // (freq, amplitude)
  double noise_level = 0.05;
  double noise_low = 0.0, noise_high = 8000.0;  // band of the noise part
  int min_state_frames = 1, max_state_frames = 3;  // duration per HMM state
};

struct SynthSpec {
  int sample_rate = 16000;
  int frame_samples = 160;  // 10 ms render hop

  PhoneInventory inventory;  // unified; includes the nasalized class symbol
  std::map<std::string, PhoneAcoustics> acoustics;  // per phone, plus "sil"

  Lexicon lt_lexicon;
  Lexicon ct_lexicon;
  std::vector<std::pair<std::string, std::string>> parallel_rules;
  std::map<std::string, std::string> parallel_manual;
  // Sampling weight per word; unlisted words weigh 1.0.
  std::map<std::string, double> word_weight;

  int speakers_per_dialect = 10;
  int utterances_per_speaker = 25;
  int lt_words_min = 4, lt_words_max = 7;
  int ct_words_min = 3, ct_words_max = 5;
  // Dialect B speaks faster: vowel state durations are scaled down.
  double ct_vowel_duration_scale = 0.55;
  int silence_frames_min = 15, silence_frames_max = 30;
  double silence_level = 0.0008;
  double speaker_formant_spread = 0.08;   // +/- relative formant shift
  double frame_amp_jitter = 0.05;
  double peak_amplitude = 0.3;

  void validate() const;
};

// The deskscale default: 16 shared phones + silence, one dialect-B-only
// phone, a grouped nasalized class, ~20 words per dialect with 3 shared,
// rewrite rules covering most parallels and a manual table for the rest.
SynthSpec default_synth_spec();

SynthSpec load_synth_spec(const std::string& path);
void save_synth_spec(const std::string& path, const SynthSpec& spec);

struct SynthStats {
  double mean_lt_seconds = 0.0;
  double mean_ct_seconds = 0.0;
  // Word-final vowel+nasal positions per dialect-B utterance (the places
  // the relabel rule rewrites and the renderer nasalizes).
  double nasal_positions_per_ct_utt = 0.0;
};

struct SynthResult {
  std::vector<UtteranceRecord> manifest;
  std::map<std::string, double> durations;  // utt_id -> seconds
  Lexicon lt_lexicon, ct_lexicon;
  ParallelDictionary pdict;
  PhoneInventory inventory;
  SynthStats stats;
  std::string manifest_path;
};

// Renders the corpus under out_dir: wav/*.wav, manifest.tsv, lexicon_lt.tsv,
// lexicon_ct.tsv, parallel_dict.tsv, phones.tsv. Bit-identical for a fixed
// (spec, seed).
SynthResult generate_synthetic_corpus(const SynthSpec& spec,
                                      const std::string& out_dir,
                                      uint64_t seed);

// Renders a single word of the given dialect with a fresh speaker; used by
// closed-loop tests that need isolated word audio.
AudioBuffer render_word(const SynthSpec& spec, const std::string& word,
                        Dialect dialect, uint64_t seed);

}  // namespace dialectid

#endif  // DIALECTID_SYNTH_HPP_

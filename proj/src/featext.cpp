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

#include "dialectid/featext.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <fstream>
#include <numbers>

namespace dialectid {

namespace {

constexpr double kPi = std::numbers::pi;

int round_samples(double seconds, int rate) {
  return static_cast<int>(std::lround(seconds * rate));
}

// Iterative radix-2 FFT; n must be a power of two.
void fft(std::vector<std::complex<double>>& a) {
  const size_t n = a.size();
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    double ang = -2.0 * kPi / static_cast<double>(len);
    std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0);
      for (size_t k = 0; k < len / 2; ++k) {
        auto u = a[i + k];
        auto v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

size_t next_pow2(size_t n) {
  size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

// Triangular mel filterbank over FFT bins 0..nfft/2.
std::vector<std::vector<double>> mel_filterbank(int num_filters, int nfft,
                                                int rate, double low_hz,
                                                double high_hz) {
  if (high_hz <= 0.0) high_hz = rate / 2.0;
  const int bins = nfft / 2 + 1;
  double low_mel = hz_to_mel(low_hz), high_mel = hz_to_mel(high_hz);
  std::vector<double> centers(num_filters + 2);
  for (int i = 0; i < num_filters + 2; ++i) {
    double mel = low_mel + (high_mel - low_mel) * i / (num_filters + 1);
    centers[i] = mel_to_hz(mel) * nfft / rate;
  }
  std::vector<std::vector<double>> bank(num_filters,
                                        std::vector<double>(bins, 0.0));
  for (int m = 0; m < num_filters; ++m) {
    double left = centers[m], mid = centers[m + 1], right = centers[m + 2];
    for (int k = 0; k < bins; ++k) {
      if (k > left && k < mid)
        bank[m][k] = (k - left) / (mid - left);
      else if (k >= mid && k < right)
        bank[m][k] = (right - k) / (right - mid);
    }
  }
  return bank;
}

std::vector<double> frame_energies(const AudioBuffer& audio, int frame,
                                   int shift) {
  int t_count = num_frames_for(static_cast<int>(audio.samples.size()), frame,
                               shift);
  std::vector<double> energies(std::max(t_count, 0));
  for (int t = 0; t < t_count; ++t) {
    double e = 0.0;
    for (int i = 0; i < frame; ++i) {
      double v = audio.samples[static_cast<size_t>(t) * shift + i];
      e += v * v;
    }
    energies[t] = e / frame;
  }
  return energies;
}

// Columns of static coefficients in a matrix that may carry deltas.
int static_block_width(int dim) {
  return (dim >= 3 && dim % 3 == 0) ? dim / 3 : dim;
}

void put_u32_le(std::string& buf, uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64_le(std::string& buf, double d) {
  uint64_t v;
  std::memcpy(&v, &d, 8);
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

uint32_t get_u32_le(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) |
         (static_cast<uint32_t>(p[3]) << 24);
}

double get_f64_le(const unsigned char* p) {
  uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  double d;
  std::memcpy(&d, &v, 8);
  return d;
}

}  // namespace

void MfccConfig::validate() const {
  if (frame_shift > frame_length)
    throw DataError("MfccConfig: frame_shift must not exceed frame_length");
  if (num_cepstra > num_mel_filters)
    throw DataError("MfccConfig: num_cepstra must not exceed num_mel_filters");
  if (frame_length <= 0 || frame_shift <= 0 || num_mel_filters <= 0 ||
      num_cepstra <= 0)
    throw DataError("MfccConfig: nonpositive parameter");
}

int num_frames_for(int len, int frame_samples, int shift_samples) {
  if (len < frame_samples) return 0;
  return (len - frame_samples) / shift_samples + 1;
}

AudioBuffer trim_silence(const AudioBuffer& audio, double energy_threshold_db,
                         int min_speech_frames, double frame_length,
                         double frame_shift) {
  if (audio.samples.empty()) throw DataError("trim_silence: empty buffer");
  const int frame = round_samples(frame_length, audio.sample_rate);
  const int shift = round_samples(frame_shift, audio.sample_rate);
  auto energies = frame_energies(audio, frame, shift);
  if (energies.empty()) {
    // Shorter than one frame: keep as-is if it carries any energy.
    for (double v : audio.samples)
      if (v != 0.0) return audio;
    throw DataError("empty after trim");
  }
  double peak = *std::max_element(energies.begin(), energies.end());
  if (peak <= 0.0) throw DataError("empty after trim");

  std::vector<bool> speech(energies.size());
  for (size_t t = 0; t < energies.size(); ++t) {
    double db = 10.0 * std::log10(std::max(energies[t], 1e-300) / peak);
    speech[t] = db >= energy_threshold_db;
  }
  min_speech_frames = std::max(min_speech_frames, 1);

  // First and last run of at least min_speech_frames consecutive speech
  // frames; shorter bursts are treated as clicks.
  int first = -1, last = -1;
  int run = 0;
  for (int t = 0; t < static_cast<int>(speech.size()); ++t) {
    run = speech[t] ? run + 1 : 0;
    if (run >= min_speech_frames) {
      if (first < 0) first = t - run + 1;
      last = t;
    }
  }
  if (first < 0) throw DataError("empty after trim");

  size_t begin = first == 0 ? 0 : static_cast<size_t>(first) * shift;
  size_t end = last == static_cast<int>(speech.size()) - 1
                   ? audio.samples.size()
                   : std::min(audio.samples.size(),
                              static_cast<size_t>(last) * shift + frame);
  AudioBuffer out;
  out.sample_rate = audio.sample_rate;
  out.samples.assign(audio.samples.begin() + begin,
                     audio.samples.begin() + end);
  return out;
}

std::vector<double> dct_basis(int rows, int cols) {
  std::vector<double> basis(static_cast<size_t>(rows) * cols);
  for (int k = 0; k < rows; ++k) {
    double scale = std::sqrt(2.0 / cols) * (k == 0 ? 1.0 / std::sqrt(2.0) : 1.0);
    for (int n = 0; n < cols; ++n)
      basis[static_cast<size_t>(k) * cols + n] =
          scale * std::cos(kPi / cols * (n + 0.5) * k);
  }
  return basis;
}

FeatureMatrix compute_mfcc(const AudioBuffer& audio, const MfccConfig& cfg) {
  cfg.validate();
  const int rate = audio.sample_rate;
  const int frame = round_samples(cfg.frame_length, rate);
  const int shift = round_samples(cfg.frame_shift, rate);
  const int len = static_cast<int>(audio.samples.size());
  if (len < frame) throw DataError("compute_mfcc: audio shorter than one frame");
  const int t_count = num_frames_for(len, frame, shift);
  const size_t nfft = next_pow2(static_cast<size_t>(frame));

  // Global pre-emphasis.
  std::vector<double> x(audio.samples);
  for (int i = len - 1; i > 0; --i) x[i] -= cfg.pre_emphasis * x[i - 1];
  x[0] *= 1.0 - cfg.pre_emphasis;

  std::vector<double> window(frame);
  for (int i = 0; i < frame; ++i)
    window[i] = 0.54 - 0.46 * std::cos(2.0 * kPi * i / (frame - 1));

  auto bank = mel_filterbank(cfg.num_mel_filters, static_cast<int>(nfft), rate,
                             cfg.low_freq, cfg.high_freq);
  auto basis = dct_basis(cfg.num_cepstra, cfg.num_mel_filters);

  FeatureMatrix out(t_count, cfg.num_cepstra);
  out.frame_shift = cfg.frame_shift;
  std::vector<std::complex<double>> spec(nfft);
  std::vector<double> logmel(cfg.num_mel_filters);
  for (int t = 0; t < t_count; ++t) {
    std::fill(spec.begin(), spec.end(), std::complex<double>(0.0));
    const double* src = x.data() + static_cast<size_t>(t) * shift;
    for (int i = 0; i < frame; ++i) spec[i] = src[i] * window[i];
    fft(spec);
    for (int m = 0; m < cfg.num_mel_filters; ++m) {
      double e = 0.0;
      const auto& filt = bank[m];
      for (size_t k = 0; k < filt.size(); ++k) {
        if (filt[k] == 0.0) continue;
        e += filt[k] * std::norm(spec[k]);
      }
      logmel[m] = std::log(std::max(e, 1e-300));
    }
    double* row = out.row(t);
    for (int k = 0; k < cfg.num_cepstra; ++k) {
      double acc = 0.0;
      const double* b = basis.data() + static_cast<size_t>(k) * cfg.num_mel_filters;
      for (int m = 0; m < cfg.num_mel_filters; ++m) acc += b[m] * logmel[m];
      row[k] = acc;
    }
  }
  return out;
}

FeatureMatrix append_deltas(const FeatureMatrix& input, int delta_window) {
  if (input.num_frames < 2) throw DataError("append_deltas: needs T >= 2");
  if (delta_window < 1) throw DataError("append_deltas: window must be >= 1");
  const int d = static_block_width(input.dim);
  const int t_count = input.num_frames;

  double denom = 0.0;
  for (int n = 1; n <= delta_window; ++n) denom += 2.0 * n * n;

  auto regress = [&](const std::vector<double>& block,
                     std::vector<double>& out) {
    for (int t = 0; t < t_count; ++t) {
      for (int c = 0; c < d; ++c) {
        double acc = 0.0;
        for (int n = 1; n <= delta_window; ++n) {
          int hi = std::min(t + n, t_count - 1);
          int lo = std::max(t - n, 0);
          acc += n * (block[static_cast<size_t>(hi) * d + c] -
                      block[static_cast<size_t>(lo) * d + c]);
        }
        out[static_cast<size_t>(t) * d + c] = acc / denom;
      }
    }
  };

  std::vector<double> statics(static_cast<size_t>(t_count) * d);
  for (int t = 0; t < t_count; ++t)
    for (int c = 0; c < d; ++c)
      statics[static_cast<size_t>(t) * d + c] = input.at(t, c);

  std::vector<double> deltas(statics.size()), accels(statics.size());
  regress(statics, deltas);
  regress(deltas, accels);

  FeatureMatrix out(t_count, 3 * d);
  out.frame_shift = input.frame_shift;
  out.utt_id = input.utt_id;
  for (int t = 0; t < t_count; ++t) {
    double* row = out.row(t);
    for (int c = 0; c < d; ++c) {
      row[c] = statics[static_cast<size_t>(t) * d + c];
      row[d + c] = deltas[static_cast<size_t>(t) * d + c];
      row[2 * d + c] = accels[static_cast<size_t>(t) * d + c];
    }
  }
  return out;
}

FeatureMatrix cepstral_mean_subtract(const FeatureMatrix& feat) {
  if (feat.num_frames < 1) throw DataError("cepstral_mean_subtract: empty");
  const int d = static_block_width(feat.dim);
  std::vector<double> mean(d, 0.0);
  for (int t = 0; t < feat.num_frames; ++t)
    for (int c = 0; c < d; ++c) mean[c] += feat.at(t, c);
  for (int c = 0; c < d; ++c) mean[c] /= feat.num_frames;

  FeatureMatrix out = feat;
  for (int t = 0; t < out.num_frames; ++t)
    for (int c = 0; c < d; ++c) out.at(t, c) -= mean[c];
  return out;
}

FeatureMatrix fix_length(const FeatureMatrix& feat, int target_frames) {
  if (target_frames < 1) throw DataError("fix_length: target must be >= 1");
  FeatureMatrix out(target_frames, feat.dim);
  out.frame_shift = feat.frame_shift;
  out.utt_id = feat.utt_id;
  const int keep = std::min(feat.num_frames, target_frames);
  std::copy(feat.data.begin(),
            feat.data.begin() + static_cast<size_t>(keep) * feat.dim,
            out.data.begin());
  return out;
}

int compute_target_frames(const std::vector<FeatureMatrix>& corpus,
                          int margin) {
  if (corpus.empty()) throw DataError("compute_target_frames: empty corpus");
  double mean = 0.0;
  for (const auto& f : corpus) mean += f.num_frames;
  mean /= static_cast<double>(corpus.size());
  return static_cast<int>(std::lround(mean)) + margin;
}

FeatureMatrix extract_features(const AudioBuffer& audio,
                               const FrontEndConfig& cfg,
                               const std::string& utt_id) {
  AudioBuffer trimmed =
      cfg.apply_trim ? trim_silence(audio, cfg.trim_threshold_db,
                                    cfg.trim_min_speech_frames,
                                    cfg.mfcc.frame_length,
                                    cfg.mfcc.frame_shift)
                     : audio;
  FeatureMatrix statics = compute_mfcc(trimmed, cfg.mfcc);
  FeatureMatrix full = append_deltas(statics, cfg.mfcc.delta_window);
  if (cfg.apply_cms) full = cepstral_mean_subtract(full);
  full.utt_id = utt_id;
  return full;
}

void write_feature_archive(const std::string& path,
                           const std::vector<FeatureMatrix>& feats) {
  std::string buf;
  buf += "DIDFEAT1";
  put_u32_le(buf, static_cast<uint32_t>(feats.size()));
  for (const auto& f : feats) {
    put_u32_le(buf, static_cast<uint32_t>(f.utt_id.size()));
    buf += f.utt_id;
    put_u32_le(buf, static_cast<uint32_t>(f.num_frames));
    put_u32_le(buf, static_cast<uint32_t>(f.dim));
    put_f64_le(buf, f.frame_shift);
    for (double v : f.data) put_f64_le(buf, v);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw DataError("short write to " + path);
}

std::vector<FeatureMatrix> read_feature_archive(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::vector<unsigned char> bytes(std::istreambuf_iterator<char>(in), {});
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "DIDFEAT1", 8) != 0)
    throw DataError(path + ": not a feature archive");
  uint32_t count = get_u32_le(bytes.data() + 8);
  size_t pos = 12;
  auto need = [&](size_t n) {
    if (pos + n > bytes.size()) throw DataError(path + ": truncated archive");
  };
  std::vector<FeatureMatrix> feats;
  feats.reserve(count);
  for (uint32_t r = 0; r < count; ++r) {
    need(4);
    uint32_t id_len = get_u32_le(bytes.data() + pos);
    pos += 4;
    need(id_len);
    std::string id(reinterpret_cast<const char*>(bytes.data() + pos), id_len);
    pos += id_len;
    need(16);
    uint32_t t_count = get_u32_le(bytes.data() + pos);
    uint32_t dim = get_u32_le(bytes.data() + pos + 4);
    double shift = get_f64_le(bytes.data() + pos + 8);
    pos += 16;
    size_t values = static_cast<size_t>(t_count) * dim;
    need(values * 8);
    FeatureMatrix f(static_cast<int>(t_count), static_cast<int>(dim));
    f.utt_id = id;
    f.frame_shift = shift;
    for (size_t i = 0; i < values; ++i)
      f.data[i] = get_f64_le(bytes.data() + pos + i * 8);
    pos += values * 8;
    feats.push_back(std::move(f));
  }
  return feats;
}

std::map<std::string, FeatureMatrix> feature_map(
    std::vector<FeatureMatrix> feats) {
  std::map<std::string, FeatureMatrix> out;
  for (auto& f : feats) {
    std::string id = f.utt_id;
    out.emplace(std::move(id), std::move(f));
  }
  return out;
}

}  // namespace dialectid

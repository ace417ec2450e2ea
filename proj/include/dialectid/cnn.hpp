// cnn.hpp - from-scratch 1-D convolutional network over time with the MFCC
// dimensions as channels: forward, backpropagation, mini-batch training and
// finite-difference gradient verification.

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

#ifndef DIALECTID_CNN_HPP_
#define DIALECTID_CNN_HPP_

#include <string>
#include <vector>

#include "dialectid/common.hpp"
#include "dialectid/corpus.hpp"

namespace dialectid {

enum class Activation { Identity, ReLU, Softmax };

enum class LayerKind { Conv1d, MaxPool, Dropout, Flatten, Dense };

// One network layer. Parameter tensors are used by Conv1d (kernels shaped
// out_ch x kernel x in_ch, flattened row-major) and Dense (weights shaped
// out x in). Convolutions use same-size zero padding with pad_left =
// (kernel-1)/2, so even kernels pad one more frame on the right.
struct Layer {
  LayerKind kind = LayerKind::Conv1d;
  // conv
  int in_ch = 0, out_ch = 0, kernel = 0;
  // pool
  int pool = 2;
  // dropout
  double rate = 0.0;
  // dense
  int in_units = 0, out_units = 0;
  Activation act = Activation::Identity;

  std::vector<double> weights;  // conv kernels or dense weights
  std::vector<double> bias;

  static Layer conv1d(int in_ch, int out_ch, int kernel, Activation act);
  static Layer maxpool(int size);
  static Layer dropout(double rate);
  static Layer flatten();
  static Layer dense(int in_units, int out_units, Activation act);
};

struct CnnModel {
  int input_frames = 0;
  int input_channels = 0;
  std::vector<Layer> layers;
  Rng rng{0};  // drives init and dropout masks; part of determinism

  size_t num_parameters() const;
  void validate() const;  // layer shapes chain-consistent, softmax size 2
};

// Shape of the data flowing out of each layer, (frames, channels) with
// channels = 0 meaning a flat vector.
std::vector<std::pair<int, int>> shape_chain(const CnnModel& model);

// conv32k10 x2, pool2, drop.25, conv64k5 x2, pool2, drop.25, flatten,
// dense1024 ReLU, dense2 softmax, over a 440x39 input.
CnnModel build_paper_cnn(uint64_t seed = 1);

// Random He-scaled initialization of all parameter tensors.
void init_parameters(CnnModel& model);

// Softmax class probabilities. Dropout is active only in train_mode and is
// inverted (inference needs no rescaling). Input must be exactly
// input_frames x input_channels.
std::vector<double> forward(CnnModel& model, const FeatureMatrix& input,
                            bool train_mode = false);

// Cross-entropy of the true class under forward(.., train_mode=false).
double loss(CnnModel& model, const FeatureMatrix& input, int label);

struct TrainHyper {
  double learning_rate = 1e-3;
  int batch_size = 16;
  int epochs = 10;
  uint64_t seed = 1;
};

struct CnnSample {
  const FeatureMatrix* input = nullptr;
  int label = 0;  // 0 = LT, 1 = CT
};

// Plain mini-batch gradient descent on cross-entropy; deterministic under
// the hyper seed. Returns the mean training loss per epoch. Throws
// ComputeError with diagnostics when the loss diverges.
std::vector<double> train(CnnModel& model, const std::vector<CnnSample>& data,
                          const TrainHyper& hyper);

// Fraction of samples whose argmax matches the label (inference mode).
double training_accuracy(CnnModel& model, const std::vector<CnnSample>& data);

// Central finite differences against analytic gradients over a random
// parameter subset of at least min_params spanning every parameter tensor.
// Returns the maximum relative error. Dropout is ignored (inference path).
double gradient_check(CnnModel& model, const FeatureMatrix& input, int label,
                      double epsilon = 1e-4, int min_params = 200,
                      uint64_t seed = 7);

void save_cnn(const std::string& path, const CnnModel& model);
CnnModel load_cnn(const std::string& path);

}  // namespace dialectid

#endif  // DIALECTID_CNN_HPP_

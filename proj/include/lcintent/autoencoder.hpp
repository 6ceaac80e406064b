// Copyright 2026 The lcintent Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "lcintent/features.hpp"
#include "lcintent/io.hpp"
#include "lcintent/optim.hpp"

namespace lcintent {

/// Gate blocks are stacked in the order (input, forget, cell, output).
struct LstmCellParams {
  Eigen::MatrixXd input_weights;      // 4H x D
  Eigen::MatrixXd recurrent_weights;  // 4H x H
  Eigen::VectorXd bias;               // 4H

  static LstmCellParams zeros(int input_size, int hidden_size);
  int input_size() const { return static_cast<int>(input_weights.cols()); }
  int hidden_size() const { return static_cast<int>(recurrent_weights.cols()); }
};

struct LstmState {
  Eigen::VectorXd h;
  Eigen::VectorXd c;
};

/// One LSTM update. Throws NumericError on non-finite input, Error on a
/// shape mismatch.
LstmState lstm_step(const LstmCellParams& params, const Eigen::VectorXd& x, const LstmState& prev);

struct AutoencoderParams {
  LstmCellParams encoder;
  LstmCellParams decoder;
  Eigen::MatrixXd output_weights;  // D x H
  Eigen::VectorXd output_bias;     // D

  static AutoencoderParams zeros(int input_size, int hidden_size);
  TensorViews views();
  ConstTensorViews views() const;
};

/// Sequence autoencoder. The encoder consumes the sequence from a zero
/// state and its final hidden state is the encoding. The decoder starts at
/// (h = encoding, c = 0), runs on zero inputs and emits the sequence in
/// reverse time order through a linear projection.
class SeqAutoencoder {
 public:
  static constexpr int kDefaultEmbedding = 512;

  /// Zero-initialized model. Throws ConfigError unless
  /// 0 < embedding < seq_len * input_size.
  explicit SeqAutoencoder(int embedding = kDefaultEmbedding, int input_size = kSeqChannels, int seq_len = kSeqLen);

  /// Uniform(-1/sqrt(H), 1/sqrt(H)) initialization of every tensor.
  void initialize(std::uint64_t seed);

  int embedding() const { return embedding_; }
  int input_size() const { return input_size_; }
  int seq_len() const { return seq_len_; }

  /// `seq` is seq_len x input_size, rows oldest first.
  Eigen::VectorXd encode(const Eigen::MatrixXd& seq) const;
  /// Encodings as columns (embedding x batch).
  Eigen::MatrixXd encode_batch(std::span<const Eigen::MatrixXd> seqs) const;
  Eigen::MatrixXd decode(const Eigen::VectorXd& encoding) const;
  Eigen::MatrixXd reconstruct(const Eigen::MatrixXd& seq) const { return decode(encode(seq)); }

  /// Mean Huber reconstruction loss over all elements of the batch.
  double reconstruction_loss(std::span<const Eigen::MatrixXd> seqs) const;
  /// Same loss; `grad` is overwritten with d loss / d params.
  double loss_and_gradient(std::span<const Eigen::MatrixXd> seqs, AutoencoderParams& grad) const;

  AutoencoderParams& params() { return params_; }
  const AutoencoderParams& params() const { return params_; }

 private:
  void check_shape(const Eigen::MatrixXd& seq) const;

  int embedding_;
  int input_size_;
  int seq_len_;
  AutoencoderParams params_;
};

/// Elementwise 0.5 e^2 for |e| <= delta, else delta (|e| - 0.5 delta); mean.
double huber_loss(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target, double delta = 1.0);
double huber_loss(double error, double delta = 1.0);

struct AutoencoderTrainResult {
  SeqAutoencoder model;
  std::vector<double> loss_history;  // mean mini-batch loss per epoch
  int best_epoch = 0;
};

/// Mini-batch reconstruction training with per-epoch shuffling, global-norm
/// clipping before every AdamW update, and a best-epoch checkpoint.
/// Throws NumericError if the loss becomes non-finite.
AutoencoderTrainResult train_autoencoder(std::span<const Eigen::MatrixXd> train, int embedding,
                                         const TrainHyperparams& hyper);
AutoencoderTrainResult train_autoencoder(std::span<const Observation> train_scaled, int embedding,
                                         const TrainHyperparams& hyper);

std::vector<Eigen::MatrixXd> sequences_of(std::span<const Observation> observations);

Checkpoint to_checkpoint(const SeqAutoencoder& model, Metadata meta = {});
SeqAutoencoder autoencoder_from_checkpoint(const Checkpoint& ckpt);

}  // namespace lcintent

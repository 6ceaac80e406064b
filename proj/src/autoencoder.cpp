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

#include "lcintent/autoencoder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "detail/text.hpp"
#include "lcintent/rng.hpp"

namespace lcintent {

LstmCellParams LstmCellParams::zeros(int input_size, int hidden_size) {
  LstmCellParams p;
  p.input_weights = Eigen::MatrixXd::Zero(4 * hidden_size, input_size);
  p.recurrent_weights = Eigen::MatrixXd::Zero(4 * hidden_size, hidden_size);
  p.bias = Eigen::VectorXd::Zero(4 * hidden_size);
  return p;
}

namespace {

Eigen::ArrayXXd sigmoid(const Eigen::ArrayXXd& z) { return 1.0 / (1.0 + (-z).exp()); }

/// Activations of one LSTM pass over a batch (columns are samples).
struct SeqTrace {
  std::vector<Eigen::MatrixXd> gates;   // per step, 4H x B after activation
  std::vector<Eigen::MatrixXd> c;       // steps + 1 entries, c[0] initial
  std::vector<Eigen::MatrixXd> h;       // steps + 1 entries, h[0] initial
  std::vector<Eigen::MatrixXd> tanh_c;  // per step
};

// `xs == nullptr` runs the cell on zero inputs.
void lstm_forward(const LstmCellParams& p, const std::vector<Eigen::MatrixXd>* xs, int steps,
                  const Eigen::MatrixXd& h0, const Eigen::MatrixXd& c0, SeqTrace& tr) {
  const Eigen::Index H = p.hidden_size();
  tr.gates.resize(static_cast<std::size_t>(steps));
  tr.tanh_c.resize(static_cast<std::size_t>(steps));
  tr.h.assign(1, h0);
  tr.c.assign(1, c0);
  Eigen::MatrixXd z(4 * H, h0.cols());
  for (int t = 0; t < steps; ++t) {
    z.noalias() = p.recurrent_weights * tr.h.back();
    if (xs) z.noalias() += p.input_weights * (*xs)[static_cast<std::size_t>(t)];
    z.colwise() += p.bias;
    auto& g = tr.gates[static_cast<std::size_t>(t)];
    g.resize(4 * H, h0.cols());
    g.topRows(H) = sigmoid(z.topRows(H).array()).matrix();
    g.middleRows(H, H) = sigmoid(z.middleRows(H, H).array()).matrix();
    g.middleRows(2 * H, H) = z.middleRows(2 * H, H).array().tanh().matrix();
    g.bottomRows(H) = sigmoid(z.bottomRows(H).array()).matrix();
    Eigen::MatrixXd c = (g.middleRows(H, H).array() * tr.c.back().array() +
                         g.topRows(H).array() * g.middleRows(2 * H, H).array())
                            .matrix();
    auto& tc = tr.tanh_c[static_cast<std::size_t>(t)];
    tc = c.array().tanh().matrix();
    tr.h.push_back((g.bottomRows(H).array() * tc.array()).matrix());
    tr.c.push_back(std::move(c));
  }
}

// Backpropagation through time. `dh_out[t]` is the external gradient on the
// hidden state produced by step t; `dh`, `dc` seed the gradient at the final
// state. Accumulates into `grad`; returns the gradient on the initial h.
Eigen::MatrixXd lstm_backward(const LstmCellParams& p, const std::vector<Eigen::MatrixXd>* xs, const SeqTrace& tr,
                              const std::vector<Eigen::MatrixXd>* dh_out, Eigen::MatrixXd dh, Eigen::MatrixXd dc,
                              LstmCellParams& grad) {
  const Eigen::Index H = p.hidden_size();
  const int steps = static_cast<int>(tr.gates.size());
  Eigen::MatrixXd dz(4 * H, dh.cols());
  for (int t = steps - 1; t >= 0; --t) {
    const auto ts = static_cast<std::size_t>(t);
    if (dh_out) dh += (*dh_out)[ts];
    const auto& g = tr.gates[ts];
    const auto i = g.topRows(H).array();
    const auto f = g.middleRows(H, H).array();
    const auto cand = g.middleRows(2 * H, H).array();
    const auto o = g.bottomRows(H).array();
    const auto tc = tr.tanh_c[ts].array();
    dc.array() += dh.array() * o * (1.0 - tc * tc);
    dz.bottomRows(H) = (dh.array() * tc * o * (1.0 - o)).matrix();
    dz.topRows(H) = (dc.array() * cand * i * (1.0 - i)).matrix();
    dz.middleRows(H, H) = (dc.array() * tr.c[ts].array() * f * (1.0 - f)).matrix();
    dz.middleRows(2 * H, H) = (dc.array() * i * (1.0 - cand * cand)).matrix();
    grad.recurrent_weights.noalias() += dz * tr.h[ts].transpose();
    if (xs) grad.input_weights.noalias() += dz * (*xs)[ts].transpose();
    grad.bias += dz.rowwise().sum();
    dh.noalias() = p.recurrent_weights.transpose() * dz;
    dc = (dc.array() * f).matrix();
  }
  return dh;
}

double huber_grad(double e, double delta) { return std::abs(e) <= delta ? e : (e > 0 ? delta : -delta); }

}  // namespace

LstmState lstm_step(const LstmCellParams& params, const Eigen::VectorXd& x, const LstmState& prev) {
  const Eigen::Index H = params.hidden_size();
  if (x.size() != params.input_size() || prev.h.size() != H || prev.c.size() != H ||
      params.input_weights.rows() != 4 * H || params.bias.size() != 4 * H) {
    throw Error("lstm_step: shape mismatch");
  }
  if (!x.allFinite() || !prev.h.allFinite() || !prev.c.allFinite()) throw NumericError("lstm_step: non-finite input");
  const std::vector<Eigen::MatrixXd> xs{x};
  SeqTrace tr;
  lstm_forward(params, &xs, 1, prev.h, prev.c, tr);
  return {tr.h.back().col(0), tr.c.back().col(0)};
}

AutoencoderParams AutoencoderParams::zeros(int input_size, int hidden_size) {
  AutoencoderParams p;
  p.encoder = LstmCellParams::zeros(input_size, hidden_size);
  p.decoder = LstmCellParams::zeros(input_size, hidden_size);
  p.output_weights = Eigen::MatrixXd::Zero(input_size, hidden_size);
  p.output_bias = Eigen::VectorXd::Zero(input_size);
  return p;
}

namespace {
template <typename M>
std::span<double> view(M& m) {
  return {m.data(), static_cast<std::size_t>(m.size())};
}
template <typename M>
std::span<const double> cview(const M& m) {
  return {m.data(), static_cast<std::size_t>(m.size())};
}
}  // namespace

TensorViews AutoencoderParams::views() {
  return {view(encoder.input_weights), view(encoder.recurrent_weights), view(encoder.bias),
          view(decoder.input_weights), view(decoder.recurrent_weights), view(decoder.bias),
          view(output_weights),        view(output_bias)};
}

ConstTensorViews AutoencoderParams::views() const {
  return {cview(encoder.input_weights), cview(encoder.recurrent_weights), cview(encoder.bias),
          cview(decoder.input_weights), cview(decoder.recurrent_weights), cview(decoder.bias),
          cview(output_weights),        cview(output_bias)};
}

SeqAutoencoder::SeqAutoencoder(int embedding, int input_size, int seq_len)
    : embedding_(embedding), input_size_(input_size), seq_len_(seq_len) {
  if (input_size < 1 || seq_len < 1) throw ConfigError("autoencoder input shape must be positive");
  if (embedding < 1 || embedding >= input_size * seq_len) {
    throw ConfigError("embedding size " + std::to_string(embedding) + " must lie in [1, " +
                      std::to_string(input_size * seq_len) + ") to compress the flattened sequence");
  }
  params_ = AutoencoderParams::zeros(input_size, embedding);
}

void SeqAutoencoder::initialize(std::uint64_t seed) {
  Rng rng(seed);
  const double k = 1.0 / std::sqrt(static_cast<double>(embedding_));
  std::uniform_real_distribution<double> u(-k, k);
  for (auto t : params_.views()) {
    for (double& x : t) x = u(rng);
  }
}

void SeqAutoencoder::check_shape(const Eigen::MatrixXd& seq) const {
  if (seq.rows() != seq_len_ || seq.cols() != input_size_) {
    throw DataError("sequence shape " + std::to_string(seq.rows()) + "x" + std::to_string(seq.cols()) +
                    " does not match the autoencoder's " + std::to_string(seq_len_) + "x" +
                    std::to_string(input_size_));
  }
}

namespace {

std::vector<Eigen::MatrixXd> time_major(std::span<const Eigen::MatrixXd> seqs, int seq_len, int input_size) {
  std::vector<Eigen::MatrixXd> xs(static_cast<std::size_t>(seq_len),
                                  Eigen::MatrixXd(input_size, static_cast<Eigen::Index>(seqs.size())));
  for (std::size_t b = 0; b < seqs.size(); ++b) {
    for (int t = 0; t < seq_len; ++t) xs[static_cast<std::size_t>(t)].col(static_cast<Eigen::Index>(b)) = seqs[b].row(t).transpose();
  }
  return xs;
}

}  // namespace

Eigen::MatrixXd SeqAutoencoder::encode_batch(std::span<const Eigen::MatrixXd> seqs) const {
  for (const auto& s : seqs) check_shape(s);
  const auto xs = time_major(seqs, seq_len_, input_size_);
  const auto B = static_cast<Eigen::Index>(seqs.size());
  SeqTrace tr;
  lstm_forward(params_.encoder, &xs, seq_len_, Eigen::MatrixXd::Zero(embedding_, B),
               Eigen::MatrixXd::Zero(embedding_, B), tr);
  return tr.h.back();
}

Eigen::VectorXd SeqAutoencoder::encode(const Eigen::MatrixXd& seq) const {
  return encode_batch(std::span(&seq, 1)).col(0);
}

Eigen::MatrixXd SeqAutoencoder::decode(const Eigen::VectorXd& encoding) const {
  if (encoding.size() != embedding_) throw DataError("encoding size does not match the autoencoder embedding");
  SeqTrace tr;
  lstm_forward(params_.decoder, nullptr, seq_len_, encoding, Eigen::MatrixXd::Zero(embedding_, 1), tr);
  Eigen::MatrixXd out(seq_len_, input_size_);
  for (int k = 0; k < seq_len_; ++k) {
    const Eigen::VectorXd y = params_.output_weights * tr.h[static_cast<std::size_t>(k + 1)].col(0) + params_.output_bias;
    out.row(seq_len_ - 1 - k) = y.transpose();
  }
  return out;
}

double huber_loss(double error, double delta) {
  const double a = std::abs(error);
  return a <= delta ? 0.5 * error * error : delta * (a - 0.5 * delta);
}

double huber_loss(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target, double delta) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) throw Error("huber_loss: shape mismatch");
  if (pred.size() == 0) return 0.0;
  double s = 0.0;
  for (Eigen::Index i = 0; i < pred.size(); ++i) s += huber_loss(pred.data()[i] - target.data()[i], delta);
  return s / static_cast<double>(pred.size());
}

double SeqAutoencoder::reconstruction_loss(std::span<const Eigen::MatrixXd> seqs) const {
  AutoencoderParams scratch = AutoencoderParams::zeros(input_size_, embedding_);
  return loss_and_gradient(seqs, scratch);
}

double SeqAutoencoder::loss_and_gradient(std::span<const Eigen::MatrixXd> seqs, AutoencoderParams& grad) const {
  if (seqs.empty()) throw DataError("empty batch");
  for (const auto& s : seqs) check_shape(s);
  grad = AutoencoderParams::zeros(input_size_, embedding_);
  const auto B = static_cast<Eigen::Index>(seqs.size());
  const auto xs = time_major(seqs, seq_len_, input_size_);

  SeqTrace enc;
  lstm_forward(params_.encoder, &xs, seq_len_, Eigen::MatrixXd::Zero(embedding_, B),
               Eigen::MatrixXd::Zero(embedding_, B), enc);
  SeqTrace dec;
  lstm_forward(params_.decoder, nullptr, seq_len_, enc.h.back(), Eigen::MatrixXd::Zero(embedding_, B), dec);

  const double n = static_cast<double>(B) * seq_len_ * input_size_;
  double loss = 0.0;
  std::vector<Eigen::MatrixXd> dh_out(static_cast<std::size_t>(seq_len_));
  Eigen::MatrixXd y(input_size_, B);
  for (int k = 0; k < seq_len_; ++k) {
    const auto& hk = dec.h[static_cast<std::size_t>(k + 1)];
    y.noalias() = params_.output_weights * hk;
    y.colwise() += params_.output_bias;
    Eigen::MatrixXd dy = y - xs[static_cast<std::size_t>(seq_len_ - 1 - k)];
    for (Eigen::Index i = 0; i < dy.size(); ++i) {
      double& e = dy.data()[i];
      loss += huber_loss(e);
      e = huber_grad(e, 1.0) / n;
    }
    grad.output_weights.noalias() += dy * hk.transpose();
    grad.output_bias += dy.rowwise().sum();
    dh_out[static_cast<std::size_t>(k)].noalias() = params_.output_weights.transpose() * dy;
  }
  loss /= n;
  if (!std::isfinite(loss)) return loss;

  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(embedding_, B);
  const Eigen::MatrixXd d_encoding = lstm_backward(params_.decoder, nullptr, dec, &dh_out, zero, zero, grad.decoder);
  lstm_backward(params_.encoder, &xs, enc, nullptr, d_encoding, zero, grad.encoder);
  return loss;
}

std::vector<Eigen::MatrixXd> sequences_of(std::span<const Observation> observations) {
  std::vector<Eigen::MatrixXd> out;
  out.reserve(observations.size());
  for (const auto& o : observations) out.emplace_back(o.seq);
  return out;
}

AutoencoderTrainResult train_autoencoder(std::span<const Eigen::MatrixXd> train, int embedding,
                                         const TrainHyperparams& hyper) {
  if (train.empty()) throw DataError("autoencoder training set is empty");
  if (hyper.batch_size < 1 || hyper.epochs < 1) throw ConfigError("batch_size and epochs must be >= 1");
  const int input_size = static_cast<int>(train.front().cols());
  const int seq_len = static_cast<int>(train.front().rows());
  SeqAutoencoder model(embedding, input_size, seq_len);
  model.initialize(derive_seed(hyper.seed, "ae-init"));
  Rng shuffle_rng = make_rng(hyper.seed, "ae-shuffle");

  AdamW opt({hyper.learning_rate, 0.9, 0.999, 1e-8, hyper.weight_decay});
  AutoencoderParams grad = AutoencoderParams::zeros(input_size, embedding);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  AutoencoderTrainResult result{model, {}, 0};
  double best = std::numeric_limits<double>::infinity();
  std::vector<Eigen::MatrixXd> batch;
  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(hyper.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(hyper.batch_size));
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(train[order[i]]);
      const double loss = model.loss_and_gradient(batch, grad);
      if (!std::isfinite(loss)) {
        throw NumericError("autoencoder training diverged at epoch " + std::to_string(epoch) + ", batch starting at " +
                           std::to_string(start) + " (loss " + detail::format_double(loss) + ")");
      }
      epoch_loss += loss * static_cast<double>(end - start);
      clip_gradients(grad.views(), hyper.clip_norm);
      opt.step(model.params().views(), const_views(grad.views()));
    }
    epoch_loss /= static_cast<double>(order.size());
    result.loss_history.push_back(epoch_loss);
    if (epoch_loss < best) {
      best = epoch_loss;
      result.best_epoch = epoch;
      result.model = model;
    }
  }
  return result;
}

AutoencoderTrainResult train_autoencoder(std::span<const Observation> train_scaled, int embedding,
                                         const TrainHyperparams& hyper) {
  const auto seqs = sequences_of(train_scaled);
  return train_autoencoder(std::span<const Eigen::MatrixXd>(seqs), embedding, hyper);
}

Checkpoint to_checkpoint(const SeqAutoencoder& model, Metadata meta) {
  Checkpoint c;
  c.kind = CheckpointKind::Autoencoder;
  c.meta = std::move(meta);
  c.meta["embedding"] = std::to_string(model.embedding());
  c.meta["input_size"] = std::to_string(model.input_size());
  c.meta["seq_len"] = std::to_string(model.seq_len());
  const auto& p = model.params();
  c.add("encoder.input_weights", p.encoder.input_weights);
  c.add("encoder.recurrent_weights", p.encoder.recurrent_weights);
  c.add("encoder.bias", p.encoder.bias);
  c.add("decoder.input_weights", p.decoder.input_weights);
  c.add("decoder.recurrent_weights", p.decoder.recurrent_weights);
  c.add("decoder.bias", p.decoder.bias);
  c.add("output.weights", p.output_weights);
  c.add("output.bias", p.output_bias);
  return c;
}

SeqAutoencoder autoencoder_from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.kind != CheckpointKind::Autoencoder) throw ConfigError("checkpoint is not an autoencoder");
  auto num = [&](const char* key) {
    auto v = detail::parse_int(ckpt.meta_value(key));
    if (!v) throw DataError(std::string("bad checkpoint metadata ") + key);
    return static_cast<int>(*v);
  };
  SeqAutoencoder model(num("embedding"), num("input_size"), num("seq_len"));
  auto& p = model.params();
  auto load = [&](const char* name, auto& target) {
    const Eigen::MatrixXd m = ckpt.matrix(name);
    if (m.rows() != target.rows() || m.cols() != target.cols()) {
      throw DataError(std::string("checkpoint tensor ") + name + " has the wrong shape");
    }
    target = m;
  };
  load("encoder.input_weights", p.encoder.input_weights);
  load("encoder.recurrent_weights", p.encoder.recurrent_weights);
  load("encoder.bias", p.encoder.bias);
  load("decoder.input_weights", p.decoder.input_weights);
  load("decoder.recurrent_weights", p.decoder.recurrent_weights);
  load("decoder.bias", p.decoder.bias);
  load("output.weights", p.output_weights);
  load("output.bias", p.output_bias);
  return model;
}

}  // namespace lcintent

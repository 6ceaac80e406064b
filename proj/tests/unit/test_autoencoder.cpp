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

#include <cmath>
#include <sstream>

#include "doctest.h"
#include "gradcheck.hpp"
#include "lcintent/autoencoder.hpp"
#include "lcintent/rng.hpp"

using namespace lcintent;

namespace {

std::vector<Eigen::MatrixXd> random_sequences(std::size_t n, std::uint64_t seed, int rows = kSeqLen,
                                              int cols = kSeqChannels) {
  Rng rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Eigen::MatrixXd> out;
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = g(rng);
    out.push_back(m);
  }
  return out;
}

}  // namespace

TEST_CASE("lstm cell with zero parameters") {
  const auto p = LstmCellParams::zeros(5, 3);
  LstmState s{Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(3)};
  const auto next = lstm_step(p, Eigen::VectorXd::Constant(5, 2.0), s);
  CHECK(next.h.isZero(0.0));
  CHECK(next.c.isZero(0.0));

  // Gates are all 0.5, so c' = 0.5 c and h' = 0.5 tanh(c').
  s.c = Eigen::VectorXd::Constant(3, 1.0);
  const auto kept = lstm_step(p, Eigen::VectorXd::Zero(5), s);
  CHECK(kept.c(0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(kept.h(0) == doctest::Approx(0.5 * std::tanh(0.5)).epsilon(1e-15));
}

TEST_CASE("lstm hidden state stays in [-1, 1] for large inputs") {
  Rng rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto p = LstmCellParams::zeros(6, 4);
  for (Eigen::Index i = 0; i < p.input_weights.size(); ++i) p.input_weights.data()[i] = 5.0 * u(rng);
  for (Eigen::Index i = 0; i < p.recurrent_weights.size(); ++i) p.recurrent_weights.data()[i] = 5.0 * u(rng);
  LstmState s{Eigen::VectorXd::Zero(4), Eigen::VectorXd::Zero(4)};
  for (int t = 0; t < 200; ++t) {
    Eigen::VectorXd x(6);
    for (int k = 0; k < 6; ++k) x(k) = 1e3 * u(rng);
    s = lstm_step(p, x, s);
    REQUIRE(s.h.allFinite());
    CHECK(s.h.cwiseAbs().maxCoeff() <= 1.0);
  }
}

TEST_CASE("lstm step rejects bad inputs") {
  const auto p = LstmCellParams::zeros(2, 2);
  LstmState s{Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2)};
  Eigen::VectorXd x(2);
  x << 1.0, std::nan("");
  CHECK_THROWS_AS(lstm_step(p, x, s), NumericError);
  x(1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(lstm_step(p, x, s), NumericError);
  CHECK_THROWS_AS(lstm_step(p, Eigen::VectorXd::Zero(3), s), Error);
}

TEST_CASE("embedding size bounds") {
  CHECK_THROWS_AS(SeqAutoencoder(720), ConfigError);
  CHECK_THROWS_AS(SeqAutoencoder(0), ConfigError);
  CHECK_THROWS_AS(SeqAutoencoder(-3), ConfigError);
  CHECK_NOTHROW(SeqAutoencoder(719));
  CHECK(SeqAutoencoder().embedding() == 512);
}

TEST_CASE("zero model encodes and decodes to zero") {
  SeqAutoencoder ae(16);
  const auto seq = random_sequences(1, 1).front();
  const Eigen::VectorXd z = ae.encode(seq);
  CHECK(z.size() == 16);
  CHECK(z.isZero(0.0));
  const Eigen::MatrixXd r = ae.decode(z);
  CHECK(r.rows() == kSeqLen);
  CHECK(r.cols() == kSeqChannels);
  CHECK(r.isZero(0.0));
  CHECK_THROWS_AS(ae.encode(Eigen::MatrixXd::Zero(19, kSeqChannels)), DataError);
  CHECK_THROWS_AS(ae.decode(Eigen::VectorXd::Zero(15)), DataError);
}

TEST_CASE("decoder emits the reconstruction in reverse time order") {
  // Saturated input, forget, cell and output gates make c grow by ~1 per
  // step, so the decoder hidden state increases with the step count.
  SeqAutoencoder ae(4);
  auto& dec = ae.params().decoder;
  dec.bias.setConstant(10.0);
  ae.params().output_weights(0, 0) = 1.0;
  const Eigen::MatrixXd r = ae.decode(Eigen::VectorXd::Zero(4));
  const double s = 1.0 / (1.0 + std::exp(-10.0));
  const double c1 = s * std::tanh(10.0);
  CHECK(r(kSeqLen - 1, 0) == doctest::Approx(s * std::tanh(c1)).epsilon(1e-12));
  for (int t = 0; t + 1 < kSeqLen; ++t) CHECK(r(t, 0) > r(t + 1, 0));
}

TEST_CASE("batch encoding matches single encoding") {
  SeqAutoencoder ae(24);
  ae.initialize(9);
  const auto seqs = random_sequences(7, 3);
  const Eigen::MatrixXd batch = ae.encode_batch(seqs);
  REQUIRE(batch.cols() == 7);
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    const Eigen::VectorXd single = ae.encode(seqs[i]);
    CHECK((batch.col(static_cast<Eigen::Index>(i)) - single).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("huber loss examples") {
  CHECK(huber_loss(0.5) == 0.125);
  CHECK(huber_loss(-0.5) == 0.125);
  CHECK(huber_loss(2.0) == 1.5);
  CHECK(huber_loss(-2.0) == 1.5);
  CHECK(huber_loss(0.0) == 0.0);
  CHECK(huber_loss(1.0) == 0.5);
  Eigen::MatrixXd pred(1, 3), target = Eigen::MatrixXd::Zero(1, 3);
  pred << 0.5, 2.0, 0.0;
  CHECK(huber_loss(pred, target) == doctest::Approx((0.125 + 1.5 + 0.0) / 3.0).epsilon(1e-15));
  CHECK_THROWS_AS(huber_loss(pred, Eigen::MatrixXd::Zero(2, 3)), Error);
}

TEST_CASE("reconstruction loss of the zero model is the mean huber of the inputs") {
  SeqAutoencoder ae(8);
  const auto seqs = random_sequences(2, 5);
  double expect = 0.0;
  for (const auto& s : seqs) {
    for (Eigen::Index k = 0; k < s.size(); ++k) expect += huber_loss(s.data()[k]);
  }
  expect /= 2.0 * kSeqLen * kSeqChannels;
  CHECK(ae.reconstruction_loss(seqs) == doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("analytic gradient matches finite differences") {
  SeqAutoencoder ae(8);
  ae.initialize(21);
  const auto seqs = random_sequences(2, 22);
  AutoencoderParams grad = AutoencoderParams::zeros(kSeqChannels, 8);
  const double loss = ae.loss_and_gradient(seqs, grad);
  CHECK(loss == doctest::Approx(ae.reconstruction_loss(seqs)).epsilon(1e-14));
  const double err = testing::max_gradient_error(ae.params().views(), std::as_const(grad).views(),
                                                 [&] { return ae.reconstruction_loss(seqs); });
  MESSAGE("max relative gradient error " << err);
  CHECK(err < 1e-4);
}

TEST_CASE("initialization is uniform within 1/sqrt(H) and seeded") {
  SeqAutoencoder a(16), b(16), c(16);
  a.initialize(3);
  b.initialize(3);
  c.initialize(4);
  const double k = 0.25;
  bool differs = false;
  const auto va = std::as_const(a).params().views();
  const auto vb = std::as_const(b).params().views();
  const auto vc = std::as_const(c).params().views();
  for (std::size_t t = 0; t < va.size(); ++t) {
    for (std::size_t i = 0; i < va[t].size(); ++i) {
      CHECK(std::abs(va[t][i]) <= k);
      CHECK(va[t][i] == vb[t][i]);
      differs = differs || va[t][i] != vc[t][i];
    }
  }
  CHECK(differs);
}

TEST_CASE("training is deterministic and reduces the loss") {
  const auto seqs = random_sequences(16, 8);
  TrainHyperparams h;
  h.batch_size = 8;
  h.learning_rate = 3e-3;
  h.epochs = 15;
  h.seed = 1234;
  const auto r1 = train_autoencoder(std::span<const Eigen::MatrixXd>(seqs), 16, h);
  const auto r2 = train_autoencoder(std::span<const Eigen::MatrixXd>(seqs), 16, h);
  REQUIRE(r1.loss_history.size() == 15);
  CHECK(r1.loss_history == r2.loss_history);
  CHECK(r1.loss_history.back() < r1.loss_history.front());
  std::ostringstream o1, o2;
  write_checkpoint(o1, to_checkpoint(r1.model));
  write_checkpoint(o2, to_checkpoint(r2.model));
  CHECK(o1.str() == o2.str());
  CHECK(r1.best_epoch >= 0);
  CHECK(r1.model.reconstruction_loss(seqs) <= r1.loss_history.front());

  CHECK_THROWS_AS(train_autoencoder(std::span<const Eigen::MatrixXd>(), 16, h), DataError);
  h.batch_size = 0;
  CHECK_THROWS_AS(train_autoencoder(std::span<const Eigen::MatrixXd>(seqs), 16, h), ConfigError);
}

TEST_CASE("autoencoder checkpoint round trip") {
  SeqAutoencoder ae(12);
  ae.initialize(77);
  std::stringstream buf;
  write_checkpoint(buf, to_checkpoint(ae, {{"note", "x"}}));
  const auto ckpt = read_checkpoint(buf);
  CHECK(ckpt.meta_value("note") == "x");
  const auto back = autoencoder_from_checkpoint(ckpt);
  CHECK(back.embedding() == 12);
  const auto seq = random_sequences(1, 2).front();
  CHECK(back.encode(seq) == ae.encode(seq));
  CHECK(back.reconstruct(seq) == ae.reconstruct(seq));

  Checkpoint wrong = ckpt;
  wrong.kind = CheckpointKind::Classifier;
  CHECK_THROWS_AS(autoencoder_from_checkpoint(wrong), ConfigError);
}

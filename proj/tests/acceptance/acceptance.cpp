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

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Synthetic-data criteria use reduced model sizes so the
// whole suite fits a single-core budget; the sizes are listed in README.md.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>

#include "gradcheck.hpp"
#include "lcintent/autoencoder.hpp"
#include "lcintent/classifier.hpp"
#include "lcintent/ensemble.hpp"
#include "lcintent/evaluation.hpp"
#include "lcintent/features.hpp"
#include "lcintent/optim.hpp"
#include "lcintent/rng.hpp"
#include "lcintent/synth.hpp"
#include "metrics_oracle.hpp"

using namespace lcintent;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double time_limit_s;  // 0 for no limit
  std::function<Outcome()> run;
};

std::string fmt(double v, int precision = 4) {
  std::ostringstream s;
  s.precision(precision);
  s << v;
  return s.str();
}

// ------------------------------------------------------------ data helpers

ScenarioConfig scenario_config(std::uint64_t seed, int vehicles, double duration, double lc_rate) {
  ScenarioConfig c;
  c.n_vehicles = vehicles;
  c.duration = duration;
  c.lc_rate = lc_rate;
  c.position_noise_sigma = 0.05;
  c.seed = seed;
  return c;
}

std::vector<Observation> extract(const Scenario& s, std::uint64_t seed) {
  ExtractionParams p;
  p.seed = seed;
  return extract_observations(s.tracks, s.geometry, p, "synth").observations;
}

struct Dataset {
  std::vector<Observation> train;
  std::vector<Observation> test;
};

Dataset synthetic_dataset(std::uint64_t seed, int vehicles, double duration) {
  const auto scenario = generate_scenario(scenario_config(derive_seed(seed, "scenario"), vehicles, duration, 1.0));
  const auto obs = extract(scenario, derive_seed(seed, "extract"));
  auto split = split_by_vehicle(obs, 0.75, derive_seed(seed, "split"));
  return {std::move(split.train), std::move(split.test)};
}

std::shared_ptr<const SeqAutoencoder> train_encoder(std::span<const Observation> train_raw, int embedding,
                                                    std::uint64_t seed) {
  const auto scaler = zscore_fit(train_raw);
  const auto scaled = zscore_apply(scaler, train_raw);
  TrainHyperparams h;
  h.batch_size = 64;
  h.learning_rate = 3e-3;
  h.epochs = 20;
  h.seed = seed;
  return std::make_shared<const SeqAutoencoder>(train_autoencoder(scaled, embedding, h).model);
}

EnsembleTrainOptions ensemble_options(int beta, std::uint64_t seed) {
  EnsembleTrainOptions o;
  o.config.beta = beta;
  o.config.train_iters = 100;
  o.config.seed = seed;
  o.classifier.batch_size = 32;
  o.classifier.learning_rate = 0.01;
  return o;
}

std::vector<Maneuver> predicted_labels(const Ensemble& model, std::span<const Observation> obs) {
  std::vector<Maneuver> out;
  for (const auto& p : ensemble_predict(model, obs)) out.push_back(p.label);
  return out;
}

std::vector<Maneuver> true_labels(std::span<const Observation> obs) {
  std::vector<Maneuver> out;
  for (const auto& o : obs) out.push_back(o.label);
  return out;
}

// Average ranks, ties sharing the mean rank.
std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  const auto ra = ranks(a), rb = ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

// ------------------------------------------------------------ criteria

Outcome bag_invariants() {
  Rng rng(20240101);
  std::uniform_int_distribution<std::size_t> count(1, 10000);
  std::uniform_int_distribution<int> mu_dist(1, 4), beta_dist(1, 8), extra(0, 1);
  int coverage_checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int mu = mu_dist(rng);
    std::vector<std::size_t> counts(static_cast<std::size_t>(mu));
    std::size_t sum = 0;
    for (auto& c : counts) sum += (c = count(rng));
    const std::size_t expect = (sum + static_cast<std::size_t>(mu) - 1) / static_cast<std::size_t>(mu);
    if (bag_size(counts) != expect) return {false, "bag size mismatch at trial " + std::to_string(trial)};

    const int beta = beta_dist(rng);
    // Half the trials leave room for disjoint coverage bags, half force reuse.
    const std::size_t n_major = extra(rng) ? expect * static_cast<std::size_t>(beta) + count(rng) % 100
                                           : expect + count(rng) % (expect + 1);
    std::vector<std::size_t> majority(n_major);
    for (std::size_t i = 0; i < n_major; ++i) majority[i] = 7 + 2 * i;
    const std::set<std::size_t> pool(majority.begin(), majority.end());

    for (auto mode : {BagMode::Independent, BagMode::Coverage}) {
      const auto bags = make_bags(majority, counts, beta, mode, static_cast<std::uint64_t>(trial));
      if (bags.size() != static_cast<std::size_t>(beta)) return {false, "wrong bag count"};
      std::set<std::size_t> seen;
      bool disjoint = true;
      for (const auto& b : bags) {
        if (b.majority_subset.size() != expect) return {false, "bag of wrong size at trial " + std::to_string(trial)};
        const std::set<std::size_t> unique(b.majority_subset.begin(), b.majority_subset.end());
        if (unique.size() != expect) return {false, "duplicate index inside a bag"};
        for (auto i : unique) {
          if (!pool.count(i)) return {false, "index outside the majority pool"};
          disjoint = seen.insert(i).second && disjoint;
        }
      }
      if (mode == BagMode::Coverage && static_cast<std::size_t>(beta) * expect <= n_major) {
        ++coverage_checked;
        if (!disjoint) return {false, "coverage bags overlap at trial " + std::to_string(trial)};
      }
    }
  }
  return {true, "200 configurations; " + std::to_string(coverage_checked) + " coverage cases disjoint"};
}

Outcome table_anchor() {
  const std::size_t counts[] = {78565, 29972};
  const auto size = bag_size(counts);
  return {size == 54269, "bag size " + std::to_string(size)};
}

Outcome gradients() {
  Rng rng(8);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Eigen::MatrixXd> seqs(2, Eigen::MatrixXd(kSeqLen, kSeqChannels));
  for (auto& s : seqs) {
    for (Eigen::Index k = 0; k < s.size(); ++k) s.data()[k] = g(rng);
  }
  SeqAutoencoder ae(8);
  ae.initialize(5);
  AutoencoderParams ae_grad = AutoencoderParams::zeros(kSeqChannels, 8);
  ae.loss_and_gradient(seqs, ae_grad);
  const double ae_err = testing::max_gradient_error(ae.params().views(), std::as_const(ae_grad).views(),
                                                    [&] { return ae.reconstruction_loss(seqs); });

  double clf_err = 0.0;
  for (auto mode : {LossMode::CrossEntropy, LossMode::MulticlassHinge}) {
    auto p = init_classifier(8, mode, 3);
    Eigen::MatrixXd x(8, 2);
    for (Eigen::Index k = 0; k < x.size(); ++k) x.data()[k] = g(rng);
    const std::vector<Maneuver> y{Maneuver::LCL, Maneuver::LCR};
    ClassifierParams grad, scratch;
    classifier_loss_and_gradient(p, x, y, grad);
    clf_err = std::max(clf_err, testing::max_gradient_error(p.views(), std::as_const(grad).views(), [&] {
      return classifier_loss_and_gradient(p, x, y, scratch);
    }));
  }
  return {ae_err < 1e-4 && clf_err < 1e-4,
          "autoencoder " + fmt(ae_err, 3) + ", classifier " + fmt(clf_err, 3) + " (limit 1e-4)"};
}

Outcome clipping() {
  Rng rng(99);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> exponent(-4.0, 3.0);
  double worst_norm = 0.0, worst_dir = 0.0;
  int clipped = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<std::vector<double>> tensors(1 + trial % 4);
    const double scale = std::pow(10.0, exponent(rng));
    for (std::size_t t = 0; t < tensors.size(); ++t) {
      tensors[t].resize(1 + (trial * 7 + t * 13) % 60);
      for (auto& v : tensors[t]) v = scale * g(rng);
    }
    const auto original = tensors;
    TensorViews views;
    for (auto& t : tensors) views.emplace_back(t);
    const double pre = clip_gradients(views, 0.25);
    const double post = global_norm(const_views(views));
    worst_norm = std::max(worst_norm, post);
    const double factor = pre > 0.25 ? 0.25 / pre : 1.0;
    clipped += pre > 0.25;
    for (std::size_t t = 0; t < tensors.size(); ++t) {
      for (std::size_t i = 0; i < tensors[t].size(); ++i) {
        worst_dir = std::max(worst_dir, std::abs(tensors[t][i] - factor * original[t][i]) / std::max(pre * factor, 1e-300));
      }
    }
  }
  return {worst_norm <= 0.25 + 1e-12 && worst_dir <= 1e-12,
          "max post-clip norm " + fmt(worst_norm, 17) + ", max direction deviation " + fmt(worst_dir, 3) + ", " +
              std::to_string(clipped) + "/2000 clipped"};
}

Outcome zscore() {
  const auto data = synthetic_dataset(5, 40, 200.0);
  const auto scaler = zscore_fit(data.train);
  const auto scaled = zscore_apply(scaler, data.train);
  double worst_mean = 0.0, worst_std = 0.0;
  int floored = 0;
  const double n = static_cast<double>(scaled.size() * kSeqLen);
  for (int c = 0; c < kSeqChannels; ++c) {
    if (scaler.floored[static_cast<std::size_t>(c)]) {
      ++floored;
      continue;
    }
    double sum = 0.0;
    for (const auto& o : scaled) sum += o.seq.col(c).sum();
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto& o : scaled) ss += (o.seq.col(c).array() - mean).square().sum();
    worst_mean = std::max(worst_mean, std::abs(mean));
    worst_std = std::max(worst_std, std::abs(std::sqrt(ss / n) - 1.0));
  }
  return {worst_mean < 1e-9 && worst_std < 1e-9 && floored < kSeqChannels,
          std::to_string(scaled.size()) + " observations; max |mean| " + fmt(worst_mean, 3) + ", max |std-1| " +
              fmt(worst_std, 3) + ", " + std::to_string(floored) + " constant channels"};
}

Outcome dy_anchors() {
  // Binary-exact geometries, as found in integer- or dyadic-width layouts.
  bool exact = true;
  for (double width : {4.0, 3.5, 3.75, 3.25}) {
    for (int lane = 0; lane < 5; ++lane) {
      const double left = lane * width;
      exact = exact && compute_dy(left, left, width) == -1.0 && compute_dy(left + width / 2, left, width) == 0.0 &&
              compute_dy(left + width, left, width) == 1.0;
    }
  }
  // Decimal 3.6 m lanes: the dividers are exact, the centerline carries the
  // binary representation error of 5.4.
  const bool dividers = compute_dy(3.6, 3.6, 3.6) == -1.0 && compute_dy(7.2, 3.6, 3.6) == 1.0;
  const double center = compute_dy(5.4, 3.6, 3.6);
  return {exact && dividers,
          std::string("dyadic anchors ") + (exact ? "exact" : "NOT exact") + "; 3.6 m dividers " +
              (dividers ? "exact" : "NOT exact") + ", centerline " + fmt(center, 3)};
}

Outcome labeling_oracle() {
  std::size_t total = 0, matched = 0, strict = 0, maneuvers = 0, lc_obs = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto scenario = generate_scenario(scenario_config(1000 + s, 30, 180.0, 1.0));
    maneuvers += scenario.log.maneuvers.size();
    ExtractionParams params;
    params.seed = s;
    const auto obs = extract_observations(scenario.tracks, scenario.geometry, params, "synth").observations;
    const double tol = 0.2 + 1e-9;
    for (const auto& o : obs) {
      // Ground truth from the maneuver log with the crossing time known to
      // within `tol`: an LC observation needs a logged crossing in its
      // direction within `tol` of t_end + ttlc; an LK observation must have
      // no crossing further than `tol` inside the prediction window.
      bool ok = true;
      if (is_lane_change(o.label)) {
        ok = false;
        for (const auto& m : scenario.log.maneuvers) {
          if (m.vehicle_id == o.tv_id && m.direction == o.label &&
              std::abs(m.crossing_time - (o.t_end + o.ttlc)) <= tol) {
            ok = true;
          }
        }
      } else {
        for (const auto& m : scenario.log.maneuvers) {
          if (m.vehicle_id == o.tv_id && m.crossing_time > o.t_end + tol &&
              m.crossing_time <= o.t_end + params.prediction_window - tol) {
            ok = false;
          }
        }
      }
      const ManeuverRecord* next = nullptr;
      for (const auto& m : scenario.log.maneuvers) {
        if (m.vehicle_id != o.tv_id || m.crossing_time <= o.t_end + 1e-9) continue;
        if (m.crossing_time > o.t_end + params.prediction_window + 1e-9) continue;
        if (!next || m.crossing_time < next->crossing_time) next = &m;
      }
      const bool exact = o.label == (next ? next->direction : Maneuver::LK) &&
                         (!next || std::abs(o.ttlc - (next->crossing_time - o.t_end)) <= 1e-9);
      ++total;
      matched += ok;
      strict += exact;
      lc_obs += is_lane_change(o.label);
    }
  }
  const double rate = static_cast<double>(matched) / static_cast<double>(std::max<std::size_t>(total, 1));
  return {maneuvers >= 200 && rate >= 0.995,
          std::to_string(maneuvers) + " maneuvers, " + std::to_string(total) + " observations (" +
              std::to_string(lc_obs) + " LC), " + fmt(100.0 * rate, 5) + "% within 0.2 s, " +
              fmt(100.0 * static_cast<double>(strict) / static_cast<double>(std::max<std::size_t>(total, 1)), 5) +
              "% frame-exact"};
}

Outcome ae_overfit() {
  const auto data = synthetic_dataset(11, 12, 120.0);
  std::vector<Observation> pick;
  const auto scaler = zscore_fit(data.train);
  for (std::size_t i = 0; i < data.train.size() && pick.size() < 32; i += std::max<std::size_t>(1, data.train.size() / 32)) {
    pick.push_back(data.train[i]);
  }
  const auto scaled = zscore_apply(scaler, pick);
  TrainHyperparams h;
  h.batch_size = 32;
  h.learning_rate = 1e-2;
  h.weight_decay = 0.0;
  h.epochs = 1500;
  h.seed = 3;
  const auto r = train_autoencoder(scaled, 128, h);
  const auto seqs = sequences_of(scaled);
  const double loss = r.model.reconstruction_loss(seqs);
  return {scaled.size() == 32 && loss < 1e-3, "32 observations, H=128, " + std::to_string(h.epochs) +
                                                  " epochs: final Huber loss " + fmt(loss, 3)};
}

// Keeps every LK and 1/20 as many observations of each lane-change class.
std::vector<Observation> imbalance(std::span<const Observation> obs, std::uint64_t seed) {
  std::vector<Observation> lk, lcl, lcr;
  for (const auto& o : obs) (o.label == Maneuver::LK ? lk : (o.label == Maneuver::LCL ? lcl : lcr)).push_back(o);
  const std::size_t per_class = std::min({lk.size() / 20, lcl.size(), lcr.size()});
  Rng rng = make_rng(seed, "imbalance");
  std::shuffle(lcl.begin(), lcl.end(), rng);
  std::shuffle(lcr.begin(), lcr.end(), rng);
  std::shuffle(lk.begin(), lk.end(), rng);
  lk.resize(20 * per_class);
  std::vector<Observation> out = lk;
  out.insert(out.end(), lcl.begin(), lcl.begin() + static_cast<std::ptrdiff_t>(per_class));
  out.insert(out.end(), lcr.begin(), lcr.begin() + static_cast<std::ptrdiff_t>(per_class));
  return out;
}

Outcome mcbe_benefit() {
  const auto encoder_data = synthetic_dataset(500, 60, 300.0);
  const auto encoder = train_encoder(encoder_data.train, 64, 17);
  int wins = 0;
  double prec_single = 0.0, prec_ensemble = 0.0;
  std::ostringstream per_seed;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto data = synthetic_dataset(seed, 80, 300.0);
    const auto train = imbalance(data.train, seed);
    const auto scaler = zscore_fit(train);
    const auto test = balance_test_set(data.test, derive_seed(seed, "eval-balance")).balanced;
    const auto labels = true_labels(test);
    const auto single = train_ensemble(train, encoder, scaler, ensemble_options(1, derive_seed(seed, "single")));
    const auto mcbe = train_ensemble(train, encoder, scaler, ensemble_options(5, derive_seed(seed, "ensemble")));
    const auto ms = multiclass_metrics(confusion(predicted_labels(single, test), labels));
    const auto me = multiclass_metrics(confusion(predicted_labels(mcbe, test), labels));
    const double rs = ms.macro_recall().value_or(0.0), re = me.macro_recall().value_or(0.0);
    const double li = index_of(Maneuver::LK);
    const double ps = ms.precision[static_cast<std::size_t>(li)].value_or(0.0);
    const double pe = me.precision[static_cast<std::size_t>(li)].value_or(0.0);
    wins += re >= rs;
    prec_single += ps / 10.0;
    prec_ensemble += pe / 10.0;
    per_seed << (seed ? " " : "") << fmt(rs, 3) << "/" << fmt(re, 3);
  }
  return {wins >= 8 && prec_ensemble > prec_single,
          "macro recall ensemble >= single in " + std::to_string(wins) + "/10 seeds; mean LK precision " +
              fmt(prec_single, 4) + " -> " + fmt(prec_ensemble, 4) + " [single/ensemble recall: " + per_seed.str() +
              "]"};
}

Outcome ttlc_trend() {
  const auto data = synthetic_dataset(900, 80, 300.0);
  const auto encoder = train_encoder(data.train, 64, 23);
  const auto model = train_ensemble(data.train, encoder, zscore_fit(data.train), ensemble_options(5, 29));
  const auto curves = ttlc_curve(model, data.test, 0.5);
  // Pool both directions: n-weighted mean of the true-class probability.
  std::map<double, std::pair<double, std::size_t>> pooled;
  for (const auto& c : curves) {
    for (const auto& b : c.bins) {
      auto& [sum, n] = pooled[b.ttlc_center];
      sum += b.mean * static_cast<double>(b.n);
      n += b.n;
    }
  }
  std::vector<double> neg_ttlc, mean;
  std::ostringstream table;
  for (const auto& [center, acc] : pooled) {
    if (center < 0.5 || center > 4.0) continue;
    neg_ttlc.push_back(-center);
    mean.push_back(acc.first / static_cast<double>(acc.second));
    table << (table.tellp() > 0 ? " " : "") << fmt(center, 3) << ":" << fmt(mean.back(), 3);
  }
  const double rho = neg_ttlc.size() >= 3 ? spearman(neg_ttlc, mean) : 0.0;
  // Diagnostic only: the generator's 3-5 s maneuvers start moving at most
  // 2.5 s before the crossing, so longer horizons carry no lateral cue.
  std::vector<double> near_t, near_m;
  for (std::size_t i = 0; i < neg_ttlc.size(); ++i) {
    if (-neg_ttlc[i] <= 2.0) {
      near_t.push_back(neg_ttlc[i]);
      near_m.push_back(mean[i]);
    }
  }
  const double rho_near = near_t.size() >= 2 ? spearman(near_t, near_m) : 0.0;
  return {rho >= 0.8, "Spearman " + fmt(rho, 4) + " over " + std::to_string(mean.size()) + " bins [" + table.str() +
                          "]; bins <= 2 s alone: " + fmt(rho_near, 4)};
}

Outcome metrics_oracle() {
  Rng rng(404);
  std::uniform_int_distribution<int> cls(0, 2), len(0, 60);
  std::uniform_real_distribution<double> t(0.0, 4.0);
  for (int trial = 0; trial < 10000; ++trial) {
    const auto n = static_cast<std::size_t>(len(rng));
    std::vector<Maneuver> preds(n), labels(n);
    std::vector<double> ttlc(n);
    for (std::size_t i = 0; i < n; ++i) {
      preds[i] = maneuver_at(static_cast<std::size_t>(cls(rng)));
      labels[i] = maneuver_at(static_cast<std::size_t>(cls(rng)));
      ttlc[i] = labels[i] == Maneuver::LK ? 6.0 : t(rng);
    }
    const double tau = trial % 2 ? 1.5 : t(rng);
    const auto o = testing::recount(preds, labels, ttlc, tau);
    const auto cm = confusion(preds, labels);
    const auto m = multiclass_metrics(cm);
    const auto b = binary_lc_metrics(preds, labels, ttlc, tau);
    bool same = m.accuracy == o.accuracy && b.tp == o.tp && b.fp == o.fp && b.critical_fn == o.critical_fn &&
                b.precision == o.lc_precision && b.recall == o.lc_recall && b.f1 == o.lc_f1;
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      same = same && m.precision[c] == o.precision[c] && m.recall[c] == o.recall[c];
      for (std::size_t p = 0; p < kNumClasses; ++p) same = same && cm.m[c][p] == o.cell[c][p];
    }
    if (!same) return {false, "mismatch at trial " + std::to_string(trial)};
  }
  return {true, "10000 random vectors, exact agreement on both suites"};
}

Outcome full_scale_note() {
  std::ifstream in(LCINTENT_README_PATH);
  std::stringstream text;
  text << in.rdbuf();
  const bool documented = text.str().find("## Full-scale reproduction") != std::string::npos;
  return {documented, documented ? "documentation present in README.md; optional NGSIM job not run by default"
                                 : "README.md lacks the full-scale reproduction section"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "bagging invariants", 10.0, bag_invariants},
      {2, "bag size anchor", 0.0, table_anchor},
      {3, "gradient correctness", 60.0, gradients},
      {4, "gradient clipping", 0.0, clipping},
      {5, "z-score normalization", 0.0, zscore},
      {6, "lateral deviation anchors", 0.0, dy_anchors},
      {7, "labeling oracle", 120.0, labeling_oracle},
      {8, "autoencoder overfit", 300.0, ae_overfit},
      {9, "ensemble benefit under imbalance", 900.0, mcbe_benefit},
      {10, "ttlc confidence trend", 300.0, ttlc_trend},
      {11, "metrics oracle", 0.0, metrics_oracle},
      {12, "full-scale reproduction note", 0.0, full_scale_note},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.time_limit_s > 0.0 && secs > c.time_limit_s) {
      o.pass = false;
      o.detail += "; exceeded the " + fmt(c.time_limit_s) + " s budget";
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << c.id << "] " << c.name << ": " << o.detail << " ("
              << fmt(secs, 3) << " s)" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}

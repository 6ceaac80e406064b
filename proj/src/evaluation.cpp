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

#include "lcintent/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "detail/text.hpp"
#include "json.hpp"

namespace lcintent {

std::size_t ConfusionCounts::row_sum(std::size_t c) const {
  std::size_t s = 0;
  for (std::size_t j = 0; j < kNumClasses; ++j) s += m[c][j];
  return s;
}

std::size_t ConfusionCounts::col_sum(std::size_t c) const {
  std::size_t s = 0;
  for (std::size_t i = 0; i < kNumClasses; ++i) s += m[i][c];
  return s;
}

std::size_t ConfusionCounts::trace() const {
  std::size_t s = 0;
  for (std::size_t c = 0; c < kNumClasses; ++c) s += m[c][c];
  return s;
}

std::size_t ConfusionCounts::total() const {
  std::size_t s = 0;
  for (std::size_t c = 0; c < kNumClasses; ++c) s += row_sum(c);
  return s;
}

ConfusionCounts confusion(std::span<const Maneuver> preds, std::span<const Maneuver> labels) {
  if (preds.size() != labels.size()) {
    throw Error("confusion: " + std::to_string(preds.size()) + " predictions for " + std::to_string(labels.size()) +
                " labels");
  }
  ConfusionCounts out;
  for (std::size_t i = 0; i < preds.size(); ++i) ++out.m[index_of(labels[i])][index_of(preds[i])];
  return out;
}

namespace {

Metric ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

Metric MulticlassMetrics::macro_recall() const {
  double sum = 0.0;
  int n = 0;
  for (const auto& r : recall) {
    if (r) {
      sum += *r;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

MulticlassMetrics multiclass_metrics(const ConfusionCounts& counts) {
  MulticlassMetrics out;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    out.precision[c] = ratio(counts.m[c][c], counts.col_sum(c));
    out.recall[c] = ratio(counts.m[c][c], counts.row_sum(c));
  }
  out.accuracy = ratio(counts.trace(), counts.total());
  return out;
}

BinaryLcMetrics binary_lc_metrics(std::span<const Maneuver> preds, std::span<const Maneuver> labels,
                                  std::span<const double> ttlc, double tau) {
  if (preds.size() != labels.size() || ttlc.size() != labels.size()) {
    throw Error("binary_lc_metrics: predictions, labels and TTLC differ in length");
  }
  BinaryLcMetrics out;
  out.ttlc_threshold = tau;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (is_lane_change(labels[i])) {
      if (preds[i] == labels[i]) {
        ++out.tp;
      } else if (ttlc[i] <= tau) {
        ++out.critical_fn;
      }
    } else if (is_lane_change(preds[i])) {
      ++out.fp;
    }
  }
  out.precision = ratio(out.tp, out.tp + out.fp);
  out.recall = ratio(out.tp, out.tp + out.critical_fn);
  if (out.precision && out.recall && *out.precision + *out.recall > 0.0) {
    out.f1 = 2.0 * *out.precision * *out.recall / (*out.precision + *out.recall);
  }
  return out;
}

std::size_t ttlc_bin_index(double ttlc, double bin_width) {
  const double k = std::ceil(ttlc / bin_width - 1e-9) - 1.0;
  return k <= 0.0 ? 0 : static_cast<std::size_t>(k);
}

std::array<TtlcCurve, 2> ttlc_curve(std::span<const Observation> observations, std::span<const ClassProbs> probs,
                                    double bin_width) {
  if (observations.size() != probs.size()) throw Error("ttlc_curve: observation and probability counts differ");
  if (!(bin_width > 0.0)) throw ConfigError("ttlc bin width must be positive");
  std::array<TtlcCurve, 2> curves;
  curves[0].maneuver = Maneuver::LCL;
  curves[1].maneuver = Maneuver::LCR;
  for (std::size_t k = 0; k < 2; ++k) {
    std::map<std::size_t, std::vector<double>> bins;
    for (std::size_t i = 0; i < observations.size(); ++i) {
      if (observations[i].label != curves[k].maneuver) continue;
      bins[ttlc_bin_index(observations[i].ttlc, bin_width)].push_back(probs[i][index_of(curves[k].maneuver)]);
    }
    for (auto it = bins.rbegin(); it != bins.rend(); ++it) {
      const auto& v = it->second;
      TtlcBin bin;
      bin.ttlc_center = (static_cast<double>(it->first) + 0.5) * bin_width;
      bin.n = v.size();
      double sum = 0.0;
      for (double p : v) sum += p;
      bin.mean = sum / static_cast<double>(v.size());
      double ss = 0.0;
      for (double p : v) ss += (p - bin.mean) * (p - bin.mean);
      bin.std = std::sqrt(ss / static_cast<double>(v.size()));
      curves[k].bins.push_back(bin);
    }
  }
  return curves;
}

std::array<TtlcCurve, 2> ttlc_curve(const Ensemble& model, std::span<const Observation> observations,
                                    double bin_width) {
  std::vector<Observation> lc;
  for (const auto& o : observations) {
    if (is_lane_change(o.label)) lc.push_back(o);
  }
  std::vector<ClassProbs> probs;
  probs.reserve(lc.size());
  for (const auto& p : ensemble_predict(model, lc)) probs.push_back(p.probs);
  return ttlc_curve(lc, probs, bin_width);
}

Metric lk_holdout_recall(std::span<const Maneuver> holdout_preds) {
  const auto hits = static_cast<std::size_t>(std::count(holdout_preds.begin(), holdout_preds.end(), Maneuver::LK));
  return ratio(hits, holdout_preds.size());
}

Metric lk_holdout_recall(const Ensemble& model, std::span<const Observation> holdout) {
  std::vector<Maneuver> preds;
  for (const auto& p : ensemble_predict(model, holdout)) preds.push_back(p.label);
  return lk_holdout_recall(preds);
}

EvaluationReport evaluate(const Ensemble& model, std::span<const Observation> test,
                          std::span<const Observation> holdout, double tau, std::string model_name) {
  EvaluationReport r;
  r.model_name = std::move(model_name);
  r.n = test.size();
  std::vector<Maneuver> preds, labels;
  std::vector<double> ttlc;
  for (const auto& p : ensemble_predict(model, test)) preds.push_back(p.label);
  for (const auto& o : test) {
    labels.push_back(o.label);
    ttlc.push_back(o.ttlc);
  }
  r.confusion = confusion(preds, labels);
  r.multiclass = multiclass_metrics(r.confusion);
  r.binary = binary_lc_metrics(preds, labels, ttlc, tau);
  r.lk_holdout_n = holdout.size();
  if (!holdout.empty()) r.lk_holdout_recall = lk_holdout_recall(model, holdout);
  return r;
}

EvaluationReport cross_dataset_eval(const Ensemble& model, std::span<const Observation> d2_test, std::uint64_t seed,
                                    double tau, std::string model_name) {
  if (!model.scaler) throw ConfigError("cross-dataset evaluation needs the model's training-set scaler");
  const auto balanced = balance_test_set(d2_test, seed);
  return evaluate(model, balanced.balanced, balanced.lk_holdout, tau, std::move(model_name));
}

namespace {

nlohmann::ordered_json metric_json(const Metric& m) {
  if (!m) return nullptr;
  return *m;
}

std::string metric_text(const Metric& m) { return m ? detail::format_double(*m) : std::string("NA"); }

}  // namespace

std::string report_json(std::span<const EvaluationReport> reports) {
  nlohmann::ordered_json doc;
  doc["format"] = "lcintent-report";
  doc["version"] = 1;
  nlohmann::ordered_json models = nlohmann::ordered_json::array();
  for (const auto& r : reports) {
    nlohmann::ordered_json j;
    j["model"] = r.model_name;
    j["n"] = r.n;
    nlohmann::ordered_json cm = nlohmann::ordered_json::array();
    for (const auto& row : r.confusion.m) cm.push_back(row);
    j["confusion"] = cm;
    nlohmann::ordered_json per_class;
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      nlohmann::ordered_json pc;
      pc["precision"] = metric_json(r.multiclass.precision[c]);
      pc["recall"] = metric_json(r.multiclass.recall[c]);
      per_class[std::string(to_string(maneuver_at(c)))] = pc;
    }
    j["per_class"] = per_class;
    j["accuracy"] = metric_json(r.multiclass.accuracy);
    j["macro_recall"] = metric_json(r.multiclass.macro_recall());
    nlohmann::ordered_json b;
    b["precision"] = metric_json(r.binary.precision);
    b["recall"] = metric_json(r.binary.recall);
    b["f1"] = metric_json(r.binary.f1);
    b["tp"] = r.binary.tp;
    b["fp"] = r.binary.fp;
    b["critical_fn"] = r.binary.critical_fn;
    b["ttlc_threshold"] = r.binary.ttlc_threshold;
    j["binary"] = b;
    j["lk_holdout_recall"] = metric_json(r.lk_holdout_recall);
    j["lk_holdout_n"] = r.lk_holdout_n;
    models.push_back(j);
  }
  doc["models"] = models;
  return doc.dump(2) + "\n";
}

std::string report_tsv(std::span<const EvaluationReport> reports) {
  std::ostringstream out;
  out << "model\tprecision\trecall\tf1\taccuracy\tlk_holdout_recall\n";
  for (const auto& r : reports) {
    out << r.model_name << '\t' << metric_text(r.binary.precision) << '\t' << metric_text(r.binary.recall) << '\t'
        << metric_text(r.binary.f1) << '\t' << metric_text(r.multiclass.accuracy) << '\t'
        << metric_text(r.lk_holdout_recall) << '\n';
  }
  out << '\n' << "model\tprecision_LCL\tprecision_LK\tprecision_LCR\trecall_LCL\trecall_LK\trecall_LCR\taccuracy\n";
  for (const auto& r : reports) {
    out << r.model_name;
    for (const auto& p : r.multiclass.precision) out << '\t' << metric_text(p);
    for (const auto& p : r.multiclass.recall) out << '\t' << metric_text(p);
    out << '\t' << metric_text(r.multiclass.accuracy) << '\n';
  }
  return out.str();
}

std::string curves_tsv(std::span<const TtlcCurve> curves) {
  std::ostringstream out;
  out << "class\tttlc_center\tmean\tstd\tn\n";
  for (const auto& c : curves) {
    for (const auto& b : c.bins) {
      out << to_string(c.maneuver) << '\t' << detail::format_double(b.ttlc_center) << '\t'
          << detail::format_double(b.mean) << '\t' << detail::format_double(b.std) << '\t' << b.n << '\n';
    }
  }
  return out.str();
}

}  // namespace lcintent

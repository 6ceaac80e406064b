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

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "lcintent/cli.hpp"
#include "lcintent/ensemble.hpp"
#include "lcintent/evaluation.hpp"
#include "lcintent/features.hpp"
#include "lcintent/io.hpp"
#include "lcintent/synth.hpp"

namespace py = pybind11;
using namespace lcintent;

namespace {

std::vector<Maneuver> to_maneuvers(const std::vector<int>& v) {
  std::vector<Maneuver> out;
  for (int x : v) {
    if (x < 0 || x > 2) throw py::value_error("class index must be 0 (LCL), 1 (LK) or 2 (LCR)");
    out.push_back(maneuver_at(static_cast<std::size_t>(x)));
  }
  return out;
}

py::object metric(const Metric& m) { return m ? py::object(py::float_(*m)) : py::none(); }

}  // namespace

PYBIND11_MODULE(_lcintent, m) {
  m.doc() = "Lane-change intent prediction: synthetic scenarios, feature extraction, MCBE ensembles and metrics.";
  m.attr("__version__") = kToolVersion;

  // Translators run newest first, so the base class registers before its subclasses.
  const auto& base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base);
  py::register_exception<DataError>(m, "DataError", base);
  py::register_exception<NumericError>(m, "NumericError", base);

  py::enum_<Maneuver>(m, "Maneuver")
      .value("LCL", Maneuver::LCL)
      .value("LK", Maneuver::LK)
      .value("LCR", Maneuver::LCR);

  py::class_<ScenarioConfig>(m, "ScenarioConfig")
      .def(py::init<>())
      .def_readwrite("n_lanes", &ScenarioConfig::n_lanes)
      .def_readwrite("lane_width", &ScenarioConfig::lane_width)
      .def_readwrite("n_vehicles", &ScenarioConfig::n_vehicles)
      .def_readwrite("duration", &ScenarioConfig::duration)
      .def_readwrite("lc_rate", &ScenarioConfig::lc_rate)
      .def_readwrite("speed_min", &ScenarioConfig::speed_min)
      .def_readwrite("speed_max", &ScenarioConfig::speed_max)
      .def_readwrite("position_noise_sigma", &ScenarioConfig::position_noise_sigma)
      .def_readwrite("seed", &ScenarioConfig::seed)
      .def_readwrite("dataset", &ScenarioConfig::dataset);

  py::class_<ManeuverRecord>(m, "ManeuverRecord")
      .def_readonly("vehicle_id", &ManeuverRecord::vehicle_id)
      .def_readonly("direction", &ManeuverRecord::direction)
      .def_readonly("crossing_time", &ManeuverRecord::crossing_time)
      .def_readonly("crossing_frame", &ManeuverRecord::crossing_frame)
      .def_readonly("start_lane", &ManeuverRecord::start_lane)
      .def_readonly("end_lane", &ManeuverRecord::end_lane);

  py::class_<Scenario>(m, "Scenario")
      .def_property_readonly("n_tracks", [](const Scenario& s) { return s.tracks.size(); })
      .def_property_readonly("maneuvers", [](const Scenario& s) { return s.log.maneuvers; });

  m.def("generate_scenario", &generate_scenario, py::arg("config"), "Seeded synthetic highway scenario.");

  py::class_<ExtractionParams>(m, "ExtractionParams")
      .def(py::init<>())
      .def_readwrite("prediction_window", &ExtractionParams::prediction_window)
      .def_readwrite("lc_step_frames", &ExtractionParams::lc_step_frames)
      .def_readwrite("lk_step_frames", &ExtractionParams::lk_step_frames)
      .def_readwrite("sv_range", &ExtractionParams::sv_range)
      .def_readwrite("lk_halving", &ExtractionParams::lk_halving)
      .def_readwrite("seed", &ExtractionParams::seed);

  py::class_<Observation>(m, "Observation")
      .def(py::init<>())
      .def_property(
          "seq", [](const Observation& o) { return Eigen::MatrixXd(o.seq); },
          [](Observation& o, const Eigen::MatrixXd& s) {
            if (s.rows() != kSeqLen || s.cols() != kSeqChannels) throw py::value_error("seq must be 20 x 36");
            o.seq = s;
          })
      .def_readwrite("static_features", &Observation::static_features)
      .def_readwrite("label", &Observation::label)
      .def_readwrite("ttlc", &Observation::ttlc)
      .def_readwrite("tv_id", &Observation::tv_id)
      .def_readwrite("t_end", &Observation::t_end)
      .def_readwrite("dataset", &Observation::dataset);

  m.def(
      "extract_observations",
      [](const Scenario& s, const ExtractionParams& p, const std::string& dataset) {
        return extract_observations(s.tracks, s.geometry, p, dataset).observations;
      },
      py::arg("scenario"), py::arg("params") = ExtractionParams{}, py::arg("dataset") = "synth",
      "Labeled 20 x 36 observation windows from a scenario.");
  m.def("compute_dy", &compute_dy, py::arg("y_l"), py::arg("left_divider"), py::arg("lane_width"));
  m.def(
      "class_counts",
      [](const std::vector<Observation>& obs) { return class_counts(obs); }, py::arg("observations"));

  py::class_<Scaler>(m, "Scaler")
      .def_readonly("mean", &Scaler::mean)
      .def_readonly("std", &Scaler::std)
      .def_readonly("floored", &Scaler::floored);
  m.def(
      "zscore_fit", [](const std::vector<Observation>& obs) { return zscore_fit(obs); }, py::arg("train"));
  m.def(
      "zscore_apply",
      [](const Scaler& s, const std::vector<Observation>& obs) { return zscore_apply(s, std::span(obs)); },
      py::arg("scaler"), py::arg("observations"));

  m.def(
      "bag_size", [](const std::vector<std::size_t>& counts) { return bag_size(counts); },
      py::arg("minority_counts"));
  m.def(
      "make_bags",
      [](const std::vector<std::size_t>& majority, const std::vector<std::size_t>& counts, int beta,
         const std::string& mode, std::uint64_t seed) {
        std::vector<std::vector<std::size_t>> out;
        for (auto& b : make_bags(majority, counts, beta, parse_bag_mode(mode), seed)) out.push_back(b.majority_subset);
        return out;
      },
      py::arg("majority_indices"), py::arg("minority_counts"), py::arg("beta"), py::arg("mode") = "independent",
      py::arg("seed") = 0);
  m.def(
      "soft_vote", [](const std::vector<ClassProbs>& p) { return soft_vote(p); }, py::arg("member_probs"));

  m.def(
      "confusion",
      [](const std::vector<int>& preds, const std::vector<int>& labels) {
        return confusion(to_maneuvers(preds), to_maneuvers(labels)).m;
      },
      py::arg("preds"), py::arg("labels"), "3x3 counts, rows = true class, cols = predicted (LCL, LK, LCR).");
  m.def(
      "multiclass_metrics",
      [](const std::vector<int>& preds, const std::vector<int>& labels) {
        const auto mm = multiclass_metrics(confusion(to_maneuvers(preds), to_maneuvers(labels)));
        py::dict d;
        py::list p, r;
        for (std::size_t c = 0; c < kNumClasses; ++c) {
          p.append(metric(mm.precision[c]));
          r.append(metric(mm.recall[c]));
        }
        d["precision"] = p;
        d["recall"] = r;
        d["accuracy"] = metric(mm.accuracy);
        return d;
      },
      py::arg("preds"), py::arg("labels"));
  m.def(
      "binary_lc_metrics",
      [](const std::vector<int>& preds, const std::vector<int>& labels, const std::vector<double>& ttlc, double tau) {
        const auto b = binary_lc_metrics(to_maneuvers(preds), to_maneuvers(labels), ttlc, tau);
        py::dict d;
        d["precision"] = metric(b.precision);
        d["recall"] = metric(b.recall);
        d["f1"] = metric(b.f1);
        d["tp"] = b.tp;
        d["fp"] = b.fp;
        d["critical_fn"] = b.critical_fn;
        return d;
      },
      py::arg("preds"), py::arg("labels"), py::arg("ttlc"), py::arg("tau") = 1.5);

  py::class_<Ensemble>(m, "Ensemble")
      .def_property_readonly("n_members", [](const Ensemble& e) { return e.members.size(); })
      .def_property_readonly("use_static", [](const Ensemble& e) { return e.use_static; })
      .def_property_readonly("bag_sizes", [](const Ensemble& e) { return e.bag_sizes; });
  m.def("load_ensemble", &load_ensemble, py::arg("directory"));
  m.def(
      "ensemble_predict",
      [](const Ensemble& e, const std::vector<Observation>& obs) {
        std::vector<std::pair<Maneuver, ClassProbs>> out;
        for (const auto& p : ensemble_predict(e, std::span(obs))) out.emplace_back(p.label, p.probs);
        return out;
      },
      py::arg("ensemble"), py::arg("observations"), "Soft-voted (label, probabilities) per observation.");
  m.def(
      "load_observations", [](const std::filesystem::path& p) { return load_observations(p).observations; },
      py::arg("path"));

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code = 0;
        {
          py::gil_scoped_release release;
          code = run_cli(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs one pipeline subcommand; returns (exit_code, stdout, stderr).");
}

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

#include "lcintent/cli.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "detail/text.hpp"
#include "json.hpp"
#include "lcintent/autoencoder.hpp"
#include "lcintent/evaluation.hpp"
#include "lcintent/io.hpp"
#include "lcintent/rng.hpp"

namespace lcintent {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

// ---------------------------------------------------------------- config

namespace {

struct Field {
  std::string key;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <class Access>
Field real_field(std::string key, Access access) {
  return {key,
          [key, access](RunConfig& c, std::string_view v) {
            auto d = detail::parse_double(v);
            if (!d) throw ConfigError("config key '" + key + "' expects a number, got '" + std::string(v) + "'");
            access(c) = *d;
          },
          [access](const RunConfig& c) { return detail::format_double(access(const_cast<RunConfig&>(c))); }};
}

template <class Access>
Field int_field(std::string key, Access access) {
  return {key,
          [key, access](RunConfig& c, std::string_view v) {
            auto d = detail::parse_int(v);
            if (!d) throw ConfigError("config key '" + key + "' expects an integer, got '" + std::string(v) + "'");
            access(c) = static_cast<int>(*d);
          },
          [access](const RunConfig& c) { return std::to_string(access(const_cast<RunConfig&>(c))); }};
}

bool parse_bool(const std::string& key, std::string_view v) {
  v = detail::trim(v);
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError("config key '" + key + "' expects a boolean, got '" + std::string(v) + "'");
}

template <class Access>
Field bool_field(std::string key, Access access) {
  return {key, [key, access](RunConfig& c, std::string_view v) { access(c) = parse_bool(key, v); },
          [access](const RunConfig& c) { return std::string(access(const_cast<RunConfig&>(c)) ? "true" : "false"); }};
}

template <class Access>
Field string_field(std::string key, Access access) {
  return {key, [access](RunConfig& c, std::string_view v) { access(c) = std::string(detail::trim(v)); },
          [access](const RunConfig& c) { return std::string(access(const_cast<RunConfig&>(c))); }};
}

template <class Access>
Field path_field(std::string key, Access access) {
  return {key, [access](RunConfig& c, std::string_view v) { access(c) = fs::path(std::string(detail::trim(v))); },
          [access](const RunConfig& c) { return access(const_cast<RunConfig&>(c)).string(); }};
}

void add_hyper_fields(std::vector<Field>& f, const std::string& prefix, TrainHyperparams RunConfig::*member) {
  f.push_back(int_field(prefix + ".batch_size", [member](RunConfig& c) -> int& { return (c.*member).batch_size; }));
  f.push_back(real_field(prefix + ".learning_rate",
                         [member](RunConfig& c) -> double& { return (c.*member).learning_rate; }));
  f.push_back(real_field(prefix + ".clip_norm", [member](RunConfig& c) -> double& { return (c.*member).clip_norm; }));
  f.push_back(real_field(prefix + ".weight_decay",
                         [member](RunConfig& c) -> double& { return (c.*member).weight_decay; }));
  f.push_back(int_field(prefix + ".epochs", [member](RunConfig& c) -> int& { return (c.*member).epochs; }));
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back({"seed",
                 [](RunConfig& c, std::string_view v) {
                   auto s = detail::parse_uint(v);
                   if (!s) throw ConfigError("config key 'seed' expects a non-negative integer");
                   c.seed = *s;
                 },
                 [](const RunConfig& c) { return std::to_string(c.seed); }});
    f.push_back(path_field("input", [](RunConfig& c) -> fs::path& { return c.input; }));
    f.push_back(path_field("geometry", [](RunConfig& c) -> fs::path& { return c.geometry; }));
    f.push_back(path_field("cross.target", [](RunConfig& c) -> fs::path& { return c.cross_target; }));
    f.push_back(string_field("dataset", [](RunConfig& c) -> std::string& { return c.dataset; }));

    f.push_back(int_field("synth.n_lanes", [](RunConfig& c) -> int& { return c.synth.n_lanes; }));
    f.push_back(real_field("synth.lane_width", [](RunConfig& c) -> double& { return c.synth.lane_width; }));
    f.push_back(int_field("synth.n_vehicles", [](RunConfig& c) -> int& { return c.synth.n_vehicles; }));
    f.push_back(real_field("synth.duration", [](RunConfig& c) -> double& { return c.synth.duration; }));
    f.push_back(real_field("synth.lc_rate", [](RunConfig& c) -> double& { return c.synth.lc_rate; }));
    f.push_back(real_field("synth.speed_min", [](RunConfig& c) -> double& { return c.synth.speed_min; }));
    f.push_back(real_field("synth.speed_max", [](RunConfig& c) -> double& { return c.synth.speed_max; }));
    f.push_back(
        real_field("synth.noise_sigma", [](RunConfig& c) -> double& { return c.synth.position_noise_sigma; }));
    f.push_back(real_field("synth.maneuver_min_duration",
                           [](RunConfig& c) -> double& { return c.synth.maneuver_min_duration; }));
    f.push_back(real_field("synth.maneuver_max_duration",
                           [](RunConfig& c) -> double& { return c.synth.maneuver_max_duration; }));
    f.push_back(real_field("synth.maneuver_gap", [](RunConfig& c) -> double& { return c.synth.maneuver_gap; }));
    f.push_back(real_field("synth.speed_jitter", [](RunConfig& c) -> double& { return c.synth.speed_jitter; }));
    f.push_back(real_field("synth.mean_spacing", [](RunConfig& c) -> double& { return c.synth.mean_spacing; }));
    f.push_back(string_field("synth.dataset", [](RunConfig& c) -> std::string& { return c.synth.dataset; }));

    f.push_back(real_field("ingest.length_scale", [](RunConfig& c) -> double& { return c.columns.length_scale; }));
    f.push_back(string_field("ingest.col.vehicle_id", [](RunConfig& c) -> std::string& { return c.columns.vehicle_id; }));
    f.push_back(string_field("ingest.col.frame", [](RunConfig& c) -> std::string& { return c.columns.frame; }));
    f.push_back(string_field("ingest.col.lateral", [](RunConfig& c) -> std::string& { return c.columns.lateral; }));
    f.push_back(
        string_field("ingest.col.longitudinal", [](RunConfig& c) -> std::string& { return c.columns.longitudinal; }));
    f.push_back(string_field("ingest.col.speed", [](RunConfig& c) -> std::string& { return c.columns.speed; }));
    f.push_back(string_field("ingest.col.lane", [](RunConfig& c) -> std::string& { return c.columns.lane; }));
    f.push_back(
        string_field("ingest.col.vehicle_class", [](RunConfig& c) -> std::string& { return c.columns.vehicle_class; }));
    f.push_back(bool_field("smoothing", [](RunConfig& c) -> bool& { return c.smoothing.enabled; }));
    f.push_back(int_field("smoothing.window", [](RunConfig& c) -> int& { return c.smoothing.window; }));
    f.push_back(int_field("smoothing.order", [](RunConfig& c) -> int& { return c.smoothing.order; }));

    f.push_back(
        real_field("extract.prediction_window", [](RunConfig& c) -> double& { return c.extraction.prediction_window; }));
    f.push_back(real_field("extract.lk_ttlc", [](RunConfig& c) -> double& { return c.extraction.lk_ttlc; }));
    f.push_back(int_field("extract.lc_step_frames", [](RunConfig& c) -> int& { return c.extraction.lc_step_frames; }));
    f.push_back(int_field("extract.lk_step_frames", [](RunConfig& c) -> int& { return c.extraction.lk_step_frames; }));
    f.push_back(real_field("extract.sv_range", [](RunConfig& c) -> double& { return c.extraction.sv_range; }));
    f.push_back(bool_field("extract.lk_halving", [](RunConfig& c) -> bool& { return c.extraction.lk_halving; }));
    f.push_back(real_field("split.ratio", [](RunConfig& c) -> double& { return c.split_ratio; }));

    f.push_back(int_field("ae.embedding", [](RunConfig& c) -> int& { return c.embedding; }));
    add_hyper_fields(f, "ae", &RunConfig::autoencoder);
    add_hyper_fields(f, "clf", &RunConfig::classifier);
    f.push_back({"clf.loss",
                 [](RunConfig& c, std::string_view v) { c.loss_mode = parse_loss_mode(detail::trim(v)); },
                 [](const RunConfig& c) { return std::string(to_string(c.loss_mode)); }});
    f.push_back(int_field("ensemble.beta", [](RunConfig& c) -> int& { return c.ensemble.beta; }));
    f.push_back({"ensemble.bag_mode",
                 [](RunConfig& c, std::string_view v) { c.ensemble.bag_mode = parse_bag_mode(detail::trim(v)); },
                 [](const RunConfig& c) { return std::string(to_string(c.ensemble.bag_mode)); }});
    f.push_back(
        bool_field("ensemble.retrain_encoder", [](RunConfig& c) -> bool& { return c.ensemble.retrain_encoder; }));
    f.push_back(bool_field("static_features", [](RunConfig& c) -> bool& { return c.static_features; }));

    f.push_back(real_field("eval.tau", [](RunConfig& c) -> double& { return c.tau; }));
    f.push_back(real_field("eval.bin_width", [](RunConfig& c) -> double& { return c.bin_width; }));
    f.push_back(bool_field("eval.balance", [](RunConfig& c) -> bool& { return c.eval_balance; }));
    return f;
  }();
  return table;
}

}  // namespace

KeyValues parse_key_values(std::istream& in) {
  KeyValues out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    std::string_view s = line;
    if (auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
    s = detail::trim(s);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(number) + ": expected key = value");
    }
    const auto key = detail::trim(s.substr(0, eq));
    if (key.empty()) throw ConfigError("config line " + std::to_string(number) + ": empty key");
    out[std::string(key)] = std::string(detail::trim(s.substr(eq + 1)));
  }
  return out;
}

RunConfig apply_config(RunConfig base, const KeyValues& values) {
  for (const auto& [key, value] : values) {
    if (key == "workdir") {
      base.workdir = value;
      continue;
    }
    const auto& table = fields();
    auto it = std::find_if(table.begin(), table.end(), [&](const Field& f) { return f.key == key; });
    if (it == table.end()) throw ConfigError("unknown config key '" + key + "'");
    it->set(base, value);
  }
  return base;
}

KeyValues effective_config(const RunConfig& config) {
  KeyValues out;
  for (const auto& f : fields()) out[f.key] = f.get(config);
  return out;
}

std::string config_text(const KeyValues& values) {
  std::string s;
  for (const auto& [k, v] : values) s += k + " = " + v + "\n";
  return s;
}

// -------------------------------------------------------------- workdir

namespace {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    out << content;
    if (!out) throw DataError("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string hash_path(const fs::path& path) {
  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(path)) {
      if (e.is_regular_file()) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    std::string acc;
    for (const auto& f : files) acc += f.filename().string() + ":" + hash_path(f) + "\n";
    return hex64(fnv1a64(acc));
  }
  return hex64(fnv1a64(read_file(path)));
}

class WorkdirLock {
 public:
  explicit WorkdirLock(const fs::path& workdir) : path_(workdir / ".lock") {
    fd_ = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd_ < 0) {
      throw ConfigError("workdir " + workdir.string() + " is locked by another run (remove " + path_.string() +
                        " if no run is active)");
    }
  }
  ~WorkdirLock() {
    ::close(fd_);
    std::error_code ec;
    fs::remove(path_, ec);
  }
  WorkdirLock(const WorkdirLock&) = delete;
  WorkdirLock& operator=(const WorkdirLock&) = delete;

 private:
  fs::path path_;
  int fd_ = -1;
};

// File names inside the workdir.
constexpr const char* kTracks = "tracks.csv";
constexpr const char* kGeometry = "geometry.txt";
constexpr const char* kManeuvers = "maneuvers.csv";
constexpr const char* kIngestReport = "ingest_report.tsv";
constexpr const char* kTrainObs = "train.obs";
constexpr const char* kTestObs = "test.obs";
constexpr const char* kScaler = "scaler.ckpt";
constexpr const char* kExtractReport = "extract_report.json";
constexpr const char* kAutoencoder = "autoencoder.ckpt";
constexpr const char* kAeLoss = "ae_loss.tsv";
constexpr const char* kSingleModel = "model_single";
constexpr const char* kEnsembleModel = "model_ensemble";

struct Stage {
  const RunConfig& config;
  const fs::path& dir;
  std::ostream& out;
  std::string name;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;

  fs::path path(const std::string& file) const { return dir / file; }

  /// Loads and validates the manifest written by `producer`; a missing
  /// manifest means the producing stage never completed.
  ojson require_stage(const std::vector<std::string>& producers, const std::string& hint) const {
    for (const auto& p : producers) {
      const fs::path m = dir / (p + ".manifest.json");
      if (!fs::exists(m)) continue;
      ojson j;
      try {
        j = ojson::parse(read_file(m));
      } catch (const nlohmann::json::exception& e) {
        throw DataError("corrupt manifest " + m.string() + ": " + e.what());
      }
      if (j.value("format", "") != "lcintent-manifest" || j.value("version", 0) != kManifestVersion) {
        throw ConfigError("manifest " + m.string() + " has an unsupported version; re-run 'lcintent " + p + "'");
      }
      if (j.value("feature_layout", 0) != kFeatureLayoutVersion) {
        throw ConfigError("artifacts in " + dir.string() + " use feature layout " +
                          std::to_string(j.value("feature_layout", 0)) + ", this build expects " +
                          std::to_string(kFeatureLayoutVersion) + "; re-run 'lcintent " + p + "'");
      }
      return j;
    }
    throw ConfigError("missing prerequisite in " + dir.string() + ": run " + hint + " first");
  }

  void require_file(const std::string& file, const std::string& hint) const {
    if (!fs::exists(path(file))) {
      throw ConfigError("missing " + path(file).string() + ": run " + hint + " first");
    }
  }

  void finish(std::uint64_t stage_seed, const std::vector<std::pair<std::string, fs::path>>& external = {}) const {
    const KeyValues cfg = effective_config(config);
    ojson m;
    m["format"] = "lcintent-manifest";
    m["version"] = kManifestVersion;
    m["tool_version"] = kToolVersion;
    m["feature_layout"] = kFeatureLayoutVersion;
    m["stage"] = name;
    m["seed"] = std::to_string(config.seed);
    m["stage_seed"] = std::to_string(stage_seed);
    m["config_hash"] = hex64(fnv1a64(config_text(cfg)));
    ojson c = ojson::object();
    for (const auto& [k, v] : cfg) c[k] = v;
    m["config"] = c;
    ojson ins = ojson::array();
    for (const auto& [label, p] : external) ins.push_back({{"path", label}, {"fnv1a64", hash_path(p)}});
    for (const auto& f : inputs) ins.push_back({{"path", f}, {"fnv1a64", hash_path(path(f))}});
    m["inputs"] = ins;
    ojson outs = ojson::array();
    for (const auto& f : outputs) outs.push_back({{"path", f}, {"fnv1a64", hash_path(path(f))}});
    m["outputs"] = outs;
    write_file(path(name + ".manifest.json"), m.dump(2) + "\n");
  }
};

std::vector<VehicleTrack> load_tracks(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw DataError("cannot read " + p.string());
  return read_tracks(in);
}

LaneGeometry load_geometry(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw DataError("cannot read " + p.string());
  return load_lane_geometry(in);
}

std::string tracks_text(const std::vector<VehicleTrack>& tracks) {
  std::ostringstream ss;
  write_tracks(ss, tracks);
  return ss.str();
}

std::string geometry_text(const LaneGeometry& g) {
  std::ostringstream ss;
  write_lane_geometry(ss, g);
  return ss.str();
}

std::string counts_text(const std::array<std::size_t, kNumClasses>& c) {
  return "LCL=" + std::to_string(c[0]) + " LK=" + std::to_string(c[1]) + " LCR=" + std::to_string(c[2]);
}

// ---------------------------------------------------------------- stages

void stage_synth(Stage& s) {
  ScenarioConfig sc = s.config.synth;
  sc.seed = derive_seed(s.config.seed, "synth");
  const Scenario scenario = generate_scenario(sc);
  write_file(s.path(kTracks), tracks_text(scenario.tracks));
  write_file(s.path(kGeometry), geometry_text(scenario.geometry));
  std::ostringstream log;
  write_maneuver_log(log, scenario.log);
  write_file(s.path(kManeuvers), log.str());
  s.outputs = {kTracks, kGeometry, kManeuvers};
  s.finish(sc.seed);
  s.out << "synth: " << scenario.tracks.size() << " tracks, " << scenario.log.maneuvers.size() << " lane changes ("
        << scenario.log.dropped.size() << " dropped)\n";
}

void stage_ingest(Stage& s) {
  if (s.config.input.empty()) throw ConfigError("ingest needs a recording: pass --input or set input=");
  if (s.config.geometry.empty()) throw ConfigError("ingest needs a lane geometry file: pass --geometry or set geometry=");
  if (!fs::exists(s.config.input)) throw ConfigError("input recording " + s.config.input.string() + " does not exist");
  if (!fs::exists(s.config.geometry)) {
    throw ConfigError("geometry file " + s.config.geometry.string() + " does not exist");
  }
  const LaneGeometry geometry = load_geometry(s.config.geometry);
  std::ifstream in(s.config.input);
  if (!in) throw DataError("cannot read " + s.config.input.string());
  ParseResult parsed = parse_trajectory_file(in, s.config.columns);

  std::vector<VehicleTrack> tracks;
  std::size_t too_short = 0;
  for (auto& t : parsed.tracks) {
    if (t.samples.size() < 2) {
      parsed.rejected.push_back({t.vehicle_id, t.first_frame(), t.last_frame(), "fewer than two samples"});
      ++too_short;
      continue;
    }
    tracks.push_back(derive_velocities(std::move(t), s.config.smoothing));
  }
  if (tracks.empty()) {
    throw DataError("no usable track segments in " + s.config.input.string() + " (" +
                    std::to_string(parsed.row_errors.size()) + " malformed rows" +
                    (parsed.row_errors.empty() ? std::string()
                                               : ", first at line " + std::to_string(parsed.row_errors.front().line)) +
                    ")");
  }
  std::ostringstream report;
  report << "kind\tline_or_vehicle\tfirst_frame\tlast_frame\tmessage\n";
  for (const auto& e : parsed.row_errors) report << "row\t" << e.line << "\t\t\t" << e.message << '\n';
  for (const auto& r : parsed.rejected) {
    report << "segment\t" << r.vehicle_id << '\t' << r.first_frame << '\t' << r.last_frame << '\t' << r.reason << '\n';
  }
  write_file(s.path(kTracks), tracks_text(tracks));
  write_file(s.path(kGeometry), geometry_text(geometry));
  write_file(s.path(kIngestReport), report.str());
  s.outputs = {kTracks, kGeometry, kIngestReport};
  s.finish(0, {{s.config.input.string(), s.config.input}, {s.config.geometry.string(), s.config.geometry}});
  s.out << "ingest: " << tracks.size() << " track segments, " << parsed.row_errors.size() << " malformed rows, "
        << parsed.rejected.size() << " rejected segments\n";
}

std::string dataset_name(const Stage& s, const ojson& upstream) {
  return upstream.value("stage", "") == "synth" ? s.config.synth.dataset : s.config.dataset;
}

void stage_extract(Stage& s) {
  const ojson up = s.require_stage({"ingest", "synth"}, "'lcintent synth' or 'lcintent ingest'");
  s.require_file(kTracks, "'lcintent synth' or 'lcintent ingest'");
  s.require_file(kGeometry, "'lcintent synth' or 'lcintent ingest'");
  s.inputs = {kTracks, kGeometry};

  ExtractionParams params = s.config.extraction;
  params.seed = derive_seed(s.config.seed, "extract");
  const auto tracks = load_tracks(s.path(kTracks));
  const auto geometry = load_geometry(s.path(kGeometry));
  const auto result = extract_observations(tracks, geometry, params, dataset_name(s, up));
  const auto split = split_by_vehicle(result.observations, s.config.split_ratio, derive_seed(s.config.seed, "split"));
  const Scaler scaler = zscore_fit(split.train);

  Metadata meta = describe(params);
  meta["dataset"] = dataset_name(s, up);
  meta["split.ratio"] = detail::format_double(s.config.split_ratio);
  meta["split"] = "train";
  save_observations(s.path(kTrainObs), split.train, meta);
  meta["split"] = "test";
  save_observations(s.path(kTestObs), split.test, meta);
  save_checkpoint(s.path(kScaler), scaler_to_checkpoint(scaler));

  ojson rep;
  rep["windows"] = result.report.windows;
  rep["lc_windows"] = result.report.lc_windows;
  rep["lk_windows"] = result.report.lk_windows;
  rep["net_zero_windows"] = result.report.net_zero_windows;
  rep["multi_change_windows"] = result.report.multi_change_windows;
  rep["short_tracks"] = result.report.short_tracks;
  rep["lk_removed_by_halving"] = result.report.lk_removed_by_halving;
  const auto tc = class_counts(split.train);
  const auto ec = class_counts(split.test);
  rep["train"] = {{"LCL", tc[0]}, {"LK", tc[1]}, {"LCR", tc[2]}};
  rep["test"] = {{"LCL", ec[0]}, {"LK", ec[1]}, {"LCR", ec[2]}};
  ojson floored = ojson::array();
  for (int c = 0; c < kSeqChannels; ++c) {
    if (scaler.floored[static_cast<std::size_t>(c)]) floored.push_back(channel_name(c));
  }
  rep["floored_channels"] = floored;
  write_file(s.path(kExtractReport), rep.dump(2) + "\n");

  s.outputs = {kTrainObs, kTestObs, kScaler, kExtractReport};
  s.finish(params.seed);
  s.out << "extract: train " << counts_text(tc) << "; test " << counts_text(ec) << '\n';
}

struct TrainingData {
  std::vector<Observation> train;
  Scaler scaler;
};

TrainingData load_training_data(Stage& s) {
  s.require_stage({"extract"}, "'lcintent extract'");
  s.require_file(kTrainObs, "'lcintent extract'");
  s.require_file(kScaler, "'lcintent extract'");
  TrainingData d;
  d.train = load_observations(s.path(kTrainObs)).observations;
  d.scaler = scaler_from_checkpoint(load_checkpoint(s.path(kScaler), CheckpointKind::Scaler));
  return d;
}

void stage_train_ae(Stage& s) {
  const auto data = load_training_data(s);
  s.inputs = {kTrainObs, kScaler};
  TrainHyperparams hyper = s.config.autoencoder;
  hyper.seed = derive_seed(s.config.seed, "ae");
  const auto scaled = zscore_apply(data.scaler, data.train);
  const auto result = train_autoencoder(scaled, s.config.embedding, hyper);
  Metadata meta{{"best_epoch", std::to_string(result.best_epoch)},
                {"epochs", std::to_string(hyper.epochs)},
                {"seed", std::to_string(hyper.seed)}};
  save_checkpoint(s.path(kAutoencoder), to_checkpoint(result.model, meta));
  std::ostringstream loss;
  loss << "epoch\thuber_loss\n";
  for (std::size_t e = 0; e < result.loss_history.size(); ++e) {
    loss << e + 1 << '\t' << detail::format_double(result.loss_history[e]) << '\n';
  }
  write_file(s.path(kAeLoss), loss.str());
  s.outputs = {kAutoencoder, kAeLoss};
  s.finish(hyper.seed);
  s.out << "train-ae: embedding " << s.config.embedding << ", " << result.loss_history.size()
        << " epochs, final loss "
        << (result.loss_history.empty() ? std::string("NA") : detail::format_double(result.loss_history.back()))
        << ", best epoch " << result.best_epoch << '\n';
}

void train_model(Stage& s, int beta, const std::string& stream, const char* model_dir) {
  const auto data = load_training_data(s);
  s.inputs = {kTrainObs, kScaler};
  std::shared_ptr<const SeqAutoencoder> encoder;
  if (fs::exists(s.dir / "train-ae.manifest.json") || !s.config.ensemble.retrain_encoder) {
    s.require_stage({"train-ae"}, "'lcintent train-ae'");
    s.require_file(kAutoencoder, "'lcintent train-ae'");
    encoder = std::make_shared<const SeqAutoencoder>(
        autoencoder_from_checkpoint(load_checkpoint(s.path(kAutoencoder), CheckpointKind::Autoencoder)));
    s.inputs.push_back(kAutoencoder);
  } else {
    encoder = std::make_shared<const SeqAutoencoder>(s.config.embedding);
  }
  EnsembleTrainOptions opt;
  opt.config = s.config.ensemble;
  opt.config.beta = beta;
  opt.config.train_iters = s.config.classifier.epochs;
  opt.config.seed = derive_seed(s.config.seed, stream);
  opt.classifier = s.config.classifier;
  opt.autoencoder = s.config.autoencoder;
  opt.use_static = s.config.static_features;
  opt.loss_mode = s.config.loss_mode;
  const Ensemble ens = train_ensemble(data.train, encoder, data.scaler, opt);

  const fs::path dir = s.path(model_dir);
  fs::remove_all(dir);
  save_ensemble(dir, ens, {{"loss", std::string(to_string(opt.loss_mode))}});
  s.outputs = {model_dir};
  s.finish(opt.config.seed);
  s.out << s.name << ": " << ens.members.size() << " base learner(s), bag size "
        << (ens.bag_sizes.empty() ? 0 : ens.bag_sizes.front()) << ", majority " << to_string(ens.majority)
        << (ens.use_static ? ", static features" : "") << '\n';
}

std::string model_label(const Ensemble& e, bool ensemble_dir) {
  std::string name = ensemble_dir ? "mcbe" + std::to_string(e.members.size()) : std::string("single");
  if (e.use_static) name += "+static";
  return name;
}

struct LoadedModel {
  std::string label;
  std::string dir;
  Ensemble model;
};

std::vector<LoadedModel> load_models(Stage& s) {
  std::vector<LoadedModel> models;
  for (auto [dir, stage] : {std::pair{kSingleModel, "train"}, std::pair{kEnsembleModel, "train-ensemble"}}) {
    if (!fs::exists(s.dir / (std::string(stage) + ".manifest.json"))) continue;
    s.require_stage({stage}, std::string("'lcintent ") + stage + "'");
    s.require_file(dir, std::string("'lcintent ") + stage + "'");
    Ensemble e = load_ensemble(s.path(dir));
    models.push_back({model_label(e, std::string(dir) == kEnsembleModel), dir, std::move(e)});
    s.inputs.push_back(dir);
  }
  if (models.empty()) {
    throw ConfigError("no trained model in " + s.dir.string() +
                      ": run 'lcintent train' or 'lcintent train-ensemble' first");
  }
  return models;
}

std::vector<Observation> load_test(Stage& s) {
  s.require_stage({"extract"}, "'lcintent extract'");
  s.require_file(kTestObs, "'lcintent extract'");
  s.inputs.push_back(kTestObs);
  return load_observations(s.path(kTestObs)).observations;
}

void write_reports(Stage& s, const std::string& prefix, const std::vector<EvaluationReport>& reports) {
  write_file(s.path(prefix + ".json"), report_json(reports));
  const std::string tsv = report_tsv(reports);
  write_file(s.path(prefix + ".tsv"), tsv);
  s.outputs.push_back(prefix + ".json");
  s.outputs.push_back(prefix + ".tsv");
  s.out << tsv;
}

void stage_eval(Stage& s) {
  const auto test = load_test(s);
  const auto models = load_models(s);
  std::vector<Observation> eval_set = test;
  std::vector<Observation> holdout;
  const std::uint64_t seed = derive_seed(s.config.seed, "eval-balance");
  if (s.config.eval_balance) {
    auto b = balance_test_set(test, seed);
    eval_set = std::move(b.balanced);
    holdout = std::move(b.lk_holdout);
  }
  std::vector<EvaluationReport> reports;
  for (const auto& m : models) reports.push_back(evaluate(m.model, eval_set, holdout, s.config.tau, m.label));
  write_reports(s, "report", reports);
  s.finish(seed);
}

void stage_cross_eval(Stage& s) {
  if (s.config.cross_target.empty()) {
    throw ConfigError("cross-eval needs the evaluation dataset: pass --target <workdir or .obs file>");
  }
  const fs::path target = s.config.cross_target;
  std::vector<Observation> d2;
  std::vector<std::pair<std::string, fs::path>> external;
  if (fs::is_directory(target)) {
    for (const char* f : {kTrainObs, kTestObs}) {
      const fs::path p = target / f;
      if (!fs::exists(p)) throw ConfigError("missing " + p.string() + ": run 'lcintent extract' in that workdir first");
      auto set = load_observations(p).observations;
      d2.insert(d2.end(), set.begin(), set.end());
      external.emplace_back(p.string(), p);
    }
  } else if (fs::exists(target)) {
    d2 = load_observations(target).observations;
    external.emplace_back(target.string(), target);
  } else {
    throw ConfigError("cross-eval target " + target.string() + " does not exist");
  }
  const auto models = load_models(s);
  const std::uint64_t seed = derive_seed(s.config.seed, "cross-balance");
  std::vector<EvaluationReport> reports;
  for (const auto& m : models) reports.push_back(cross_dataset_eval(m.model, d2, seed, s.config.tau, m.label));
  write_reports(s, "cross_report", reports);
  s.finish(seed, external);
}

void stage_curves(Stage& s) {
  const auto test = load_test(s);
  const auto models = load_models(s);
  for (const auto& m : models) {
    const auto curves = ttlc_curve(m.model, test, s.config.bin_width);
    const std::string file = "curves_" + std::string(m.dir).substr(6) + ".tsv";
    write_file(s.path(file), curves_tsv(curves));
    s.outputs.push_back(file);
    s.out << "curves: " << m.label << " -> " << s.path(file).string() << '\n';
  }
  s.finish(0);
}

}  // namespace

// ------------------------------------------------------------ entry point

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Lane-change intent prediction pipeline: synthetic or recorded trajectories to evaluated models."};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1, 1);
  app.fallthrough();

  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> workdir, bag_mode, input, geometry, target, dataset;
  std::optional<int> beta, embedding;
  std::optional<bool> static_features, smoothing;

  app.add_option("--config", config_path, "Flat key=value config file")->check(CLI::ExistingFile);
  app.add_option("--set", overrides, "Config override key=value (repeatable)");
  app.add_option("--seed", seed, "Master seed");
  app.add_option("--workdir", workdir, "Artifact directory");
  app.add_option("--beta", beta, "Number of ensemble base learners");
  app.add_option("--embedding", embedding, "Autoencoder embedding size");
  app.add_flag("--static-features,!--no-static-features", static_features, "Append the static feature encoding");
  app.add_option("--bag-mode", bag_mode, "Ensemble bag sampling: independent | coverage");
  app.add_flag("--smoothing,!--no-smoothing", smoothing, "Polynomial position smoothing before differentiation");

  struct Command {
    const char* name;
    const char* help;
    void (*run)(Stage&);
  };
  static const std::vector<Command> commands = {
      {"synth", "Generate a synthetic highway scenario", stage_synth},
      {"ingest", "Parse a trajectory recording into tracks", stage_ingest},
      {"extract", "Extract, split and normalize labeled observations", stage_extract},
      {"train-ae", "Train the sequence autoencoder", stage_train_ae},
      {"train", "Train a single base learner (balanced undersampling)",
       [](Stage& s) { train_model(s, 1, "single", kSingleModel); }},
      {"train-ensemble", "Train the balancing ensemble",
       [](Stage& s) { train_model(s, s.config.ensemble.beta, "ensemble", kEnsembleModel); }},
      {"eval", "Evaluate trained models on the test split", stage_eval},
      {"cross-eval", "Evaluate trained models on another dataset", stage_cross_eval},
      {"curves", "TTLC confidence curves on the test split", stage_curves},
  };
  std::vector<CLI::App*> subs;
  for (const auto& c : commands) subs.push_back(app.add_subcommand(c.name, c.help));
  subs[1]->add_option("--input", input, "Raw trajectory recording");
  subs[1]->add_option("--geometry", geometry, "Lane geometry file");
  subs[1]->add_option("--dataset", dataset, "Dataset tag stored with the observations");
  subs[7]->add_option("--target", target, "Workdir or observation file of the evaluation dataset");

  std::vector<const char*> argv;
  argv.push_back("lcintent");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? 0 : 2;
  }

  try {
    RunConfig config;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      config = apply_config(config, parse_key_values(in));
    }
    KeyValues cmdline;
    for (const auto& o : overrides) {
      const auto eq = o.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + o + "'");
      cmdline[std::string(detail::trim(std::string_view(o).substr(0, eq)))] =
          std::string(detail::trim(std::string_view(o).substr(eq + 1)));
    }
    if (seed) cmdline["seed"] = std::to_string(*seed);
    if (workdir) cmdline["workdir"] = *workdir;
    if (beta) cmdline["ensemble.beta"] = std::to_string(*beta);
    if (embedding) cmdline["ae.embedding"] = std::to_string(*embedding);
    if (static_features) cmdline["static_features"] = *static_features ? "true" : "false";
    if (bag_mode) cmdline["ensemble.bag_mode"] = *bag_mode;
    if (smoothing) cmdline["smoothing"] = *smoothing ? "true" : "false";
    if (input) cmdline["input"] = *input;
    if (geometry) cmdline["geometry"] = *geometry;
    if (dataset) cmdline["dataset"] = *dataset;
    if (target) cmdline["cross.target"] = *target;
    config = apply_config(config, cmdline);

    std::size_t which = 0;
    while (!subs[which]->parsed()) ++which;
    const Command& cmd = commands[which];
    fs::create_directories(config.workdir);
    WorkdirLock lock(config.workdir);
    Stage stage{config, config.workdir, out, cmd.name, {}, {}};
    cmd.run(stage);
    return 0;
  } catch (const ConfigError& e) {
    err << "lcintent: configuration error: " << e.what() << '\n';
    return 2;
  } catch (const DataError& e) {
    err << "lcintent: data error: " << e.what() << '\n';
    return 3;
  } catch (const NumericError& e) {
    err << "lcintent: numeric failure: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    err << "lcintent: error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace lcintent

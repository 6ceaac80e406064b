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

#include "lcintent/ensemble.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>

#include "json.hpp"
#include "lcintent/rng.hpp"

namespace lcintent {

std::string_view to_string(BagMode mode) { return mode == BagMode::Independent ? "independent" : "coverage"; }

BagMode parse_bag_mode(std::string_view s) {
  if (s == "independent") return BagMode::Independent;
  if (s == "coverage") return BagMode::Coverage;
  throw ConfigError("unknown bag mode '" + std::string(s) + "' (expected independent or coverage)");
}

std::size_t bag_size(std::span<const std::size_t> minority_counts) {
  if (minority_counts.empty()) throw DataError("bag size needs at least one minority class");
  const std::size_t total = std::accumulate(minority_counts.begin(), minority_counts.end(), std::size_t{0});
  const std::size_t mu = minority_counts.size();
  return (total + mu - 1) / mu;
}

std::vector<Bag> make_bags(std::span<const std::size_t> majority_indices, std::span<const std::size_t> minority_counts,
                           int beta, BagMode mode, std::uint64_t seed) {
  if (beta < 1) throw ConfigError("number of base learners must be >= 1");
  const std::size_t size = bag_size(minority_counts);
  if (size > majority_indices.size()) {
    throw DataError("bag size " + std::to_string(size) + " exceeds the majority class count " +
                    std::to_string(majority_indices.size()));
  }
  std::vector<Bag> bags(static_cast<std::size_t>(beta));
  if (mode == BagMode::Independent) {
    std::vector<std::size_t> pool(majority_indices.begin(), majority_indices.end());
    for (int b = 0; b < beta; ++b) {
      Rng rng = make_rng(seed, "bag", static_cast<std::uint64_t>(b));
      // Partial Fisher-Yates: the first `size` slots become the sample.
      for (std::size_t i = 0; i < size; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
        std::swap(pool[i], pool[pick(rng)]);
      }
      auto& subset = bags[static_cast<std::size_t>(b)].majority_subset;
      subset.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(size));
      std::sort(subset.begin(), subset.end());
      // Restore the pool so every bag samples from the same ordering.
      pool.assign(majority_indices.begin(), majority_indices.end());
    }
    return bags;
  }

  Rng rng = make_rng(seed, "coverage");
  std::vector<std::size_t> pool(majority_indices.begin(), majority_indices.end());
  std::shuffle(pool.begin(), pool.end(), rng);
  std::size_t cursor = 0;
  for (auto& bag : bags) {
    std::set<std::size_t> taken;
    while (taken.size() < size) {
      if (cursor == pool.size()) {
        std::shuffle(pool.begin(), pool.end(), rng);
        cursor = 0;
      }
      taken.insert(pool[cursor++]);
    }
    bag.majority_subset.assign(taken.begin(), taken.end());
  }
  return bags;
}

Maneuver majority_class(const std::array<std::size_t, kNumClasses>& counts) {
  const auto it = std::max_element(counts.begin(), counts.end());
  if (std::count(counts.begin(), counts.end(), *it) > 1) {
    throw DataError("majority class is ambiguous: the two largest classes have equal counts");
  }
  return maneuver_at(static_cast<std::size_t>(it - counts.begin()));
}

int Ensemble::input_dim() const {
  return members.empty() ? 0 : members.front().input_dim();
}

Eigen::VectorXd classifier_input(const Eigen::VectorXd& encoding, const StaticVector& static_features,
                                 bool use_static) {
  if (!use_static) return encoding;
  Eigen::VectorXd v(encoding.size() + kStaticDim);
  v.head(encoding.size()) = encoding;
  for (int i = 0; i < kStaticDim; ++i) v(encoding.size() + i) = static_features[static_cast<std::size_t>(i)];
  return v;
}

namespace {

constexpr std::size_t kEncodeChunk = 256;

Eigen::MatrixXd encode_all(const SeqAutoencoder& encoder, std::span<const Observation> scaled,
                           std::span<const std::size_t> indices, bool use_static) {
  const Eigen::Index dim = encoder.embedding() + (use_static ? kStaticDim : 0);
  Eigen::MatrixXd out(dim, static_cast<Eigen::Index>(indices.size()));
  std::vector<Eigen::MatrixXd> chunk;
  for (std::size_t start = 0; start < indices.size(); start += kEncodeChunk) {
    const std::size_t end = std::min(indices.size(), start + kEncodeChunk);
    chunk.clear();
    for (std::size_t i = start; i < end; ++i) chunk.emplace_back(scaled[indices[i]].seq);
    const Eigen::MatrixXd enc = encoder.encode_batch(chunk);
    for (std::size_t i = start; i < end; ++i) {
      out.col(static_cast<Eigen::Index>(i)) =
          classifier_input(enc.col(static_cast<Eigen::Index>(i - start)), scaled[indices[i]].static_features, use_static);
    }
  }
  return out;
}

}  // namespace

Ensemble train_ensemble(std::span<const Observation> train, std::shared_ptr<const SeqAutoencoder> encoder,
                        const Scaler& scaler, const EnsembleTrainOptions& options) {
  const auto& cfg = options.config;
  if (cfg.beta < 1) throw ConfigError("beta must be >= 1");
  if (cfg.train_iters < 1) throw ConfigError("train_iters must be >= 1");
  if (!encoder) throw ConfigError("ensemble training needs a trained encoder");
  if (train.empty()) throw DataError("ensemble training set is empty");

  const auto scaled = zscore_apply(scaler, train);
  const auto counts = class_counts(scaled);
  const Maneuver majority = majority_class(counts);
  std::vector<std::size_t> majority_idx, minority_idx;
  std::vector<std::size_t> minority_counts;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    if (maneuver_at(c) == majority) continue;
    if (counts[c] == 0) {
      throw DataError("training set has no " + std::string(to_string(maneuver_at(c))) + " observations");
    }
    minority_counts.push_back(counts[c]);
  }
  for (std::size_t i = 0; i < scaled.size(); ++i) {
    (scaled[i].label == majority ? majority_idx : minority_idx).push_back(i);
  }
  const auto bags = make_bags(majority_idx, minority_counts, cfg.beta, cfg.bag_mode, derive_seed(cfg.seed, "bags"));

  Ensemble ens;
  ens.encoder = encoder;
  ens.scaler = scaler;
  ens.config = cfg;
  ens.use_static = options.use_static;
  ens.majority = majority;

  std::vector<std::size_t> all(scaled.size());
  std::iota(all.begin(), all.end(), 0);
  Eigen::MatrixXd shared_inputs;
  if (!cfg.retrain_encoder) shared_inputs = encode_all(*encoder, scaled, all, options.use_static);

  for (std::size_t b = 0; b < bags.size(); ++b) {
    std::vector<std::size_t> members = bags[b].majority_subset;
    members.insert(members.end(), minority_idx.begin(), minority_idx.end());
    std::sort(members.begin(), members.end());
    std::vector<Maneuver> labels;
    labels.reserve(members.size());
    for (auto i : members) labels.push_back(scaled[i].label);

    Eigen::MatrixXd inputs;
    if (cfg.retrain_encoder) {
      std::vector<Observation> subset;
      subset.reserve(members.size());
      for (auto i : members) subset.push_back(scaled[i]);
      TrainHyperparams ae_hyper = options.autoencoder;
      ae_hyper.seed = derive_seed(cfg.seed, "member-ae", b);
      auto trained = train_autoencoder(subset, encoder->embedding(), ae_hyper);
      auto member_encoder = std::make_shared<const SeqAutoencoder>(std::move(trained.model));
      std::vector<std::size_t> local(subset.size());
      std::iota(local.begin(), local.end(), 0);
      inputs = encode_all(*member_encoder, subset, local, options.use_static);
      ens.member_encoders.push_back(std::move(member_encoder));
    } else {
      inputs.resize(shared_inputs.rows(), static_cast<Eigen::Index>(members.size()));
      for (std::size_t j = 0; j < members.size(); ++j) {
        inputs.col(static_cast<Eigen::Index>(j)) = shared_inputs.col(static_cast<Eigen::Index>(members[j]));
      }
    }
    TrainHyperparams hyper = options.classifier;
    hyper.epochs = cfg.train_iters;
    hyper.seed = derive_seed(cfg.seed, "member", b);
    auto init = init_classifier(static_cast<int>(inputs.rows()), options.loss_mode,
                                derive_seed(cfg.seed, "member-init", b));
    ens.members.push_back(train_classifier(std::move(init), inputs, labels, hyper).params);
    ens.bag_sizes.push_back(bags[b].majority_subset.size());
  }
  return ens;
}

ClassProbs soft_vote(std::span<const ClassProbs> member_probs) {
  if (member_probs.empty()) throw Error("soft_vote needs at least one member");
  ClassProbs out{};
  for (const auto& p : member_probs) {
    for (std::size_t c = 0; c < kNumClasses; ++c) out[c] += p[c];
  }
  for (auto& x : out) x /= static_cast<double>(member_probs.size());
  return out;
}

std::vector<Prediction> ensemble_predict(const Ensemble& ensemble, std::span<const Observation> observations) {
  if (!ensemble.scaler) throw ConfigError("model has no scaler; the training-set statistics must travel with it");
  if (ensemble.members.empty()) throw ConfigError("ensemble has no members");
  if (!ensemble.encoder) throw ConfigError("ensemble has no encoder");
  const auto scaled = zscore_apply(*ensemble.scaler, observations);
  std::vector<std::size_t> all(scaled.size());
  std::iota(all.begin(), all.end(), 0);

  const std::size_t m = ensemble.members.size();
  std::vector<Eigen::MatrixXd> inputs;
  if (ensemble.member_encoders.empty()) {
    inputs.push_back(encode_all(*ensemble.encoder, scaled, all, ensemble.use_static));
  } else {
    for (const auto& enc : ensemble.member_encoders) inputs.push_back(encode_all(*enc, scaled, all, ensemble.use_static));
  }
  std::vector<Prediction> out(scaled.size());
  std::vector<ClassProbs> member(m);
  for (std::size_t i = 0; i < scaled.size(); ++i) {
    for (std::size_t k = 0; k < m; ++k) {
      const auto& in = inputs[inputs.size() == 1 ? 0 : k];
      member[k] = predict_proba(ensemble.members[k], in.col(static_cast<Eigen::Index>(i)));
    }
    out[i].probs = soft_vote(member);
    out[i].label = argmax_with_tie_rule(out[i].probs);
  }
  return out;
}

Prediction ensemble_predict(const Ensemble& ensemble, const Observation& observation) {
  return ensemble_predict(ensemble, std::span(&observation, 1)).front();
}

Ensemble member_view(const Ensemble& ensemble, std::size_t member) {
  if (member >= ensemble.members.size()) throw Error("member index out of range");
  Ensemble one = ensemble;
  one.members = {ensemble.members[member]};
  if (!ensemble.member_encoders.empty()) one.member_encoders = {ensemble.member_encoders[member]};
  if (member < ensemble.bag_sizes.size()) one.bag_sizes = {ensemble.bag_sizes[member]};
  one.config.beta = 1;
  return one;
}

namespace {

std::string member_file(const char* prefix, std::size_t i) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%02zu.ckpt", prefix, i);
  return buf;
}

}  // namespace

void save_ensemble(const std::filesystem::path& dir, const Ensemble& ens, const Metadata& extra) {
  if (!ens.scaler || !ens.encoder) throw ConfigError("cannot save an ensemble without scaler and encoder");
  std::filesystem::create_directories(dir);
  nlohmann::ordered_json manifest;
  manifest["format"] = "lcintent-ensemble";
  manifest["version"] = 1;
  manifest["beta"] = ens.config.beta;
  manifest["train_iters"] = ens.config.train_iters;
  manifest["seed"] = std::to_string(ens.config.seed);
  manifest["bag_mode"] = std::string(to_string(ens.config.bag_mode));
  manifest["retrain_encoder"] = ens.config.retrain_encoder;
  manifest["use_static"] = ens.use_static;
  manifest["majority"] = std::string(to_string(ens.majority));
  manifest["bag_sizes"] = ens.bag_sizes;
  manifest["scaler"] = "scaler.ckpt";
  save_checkpoint(dir / "scaler.ckpt", scaler_to_checkpoint(*ens.scaler));
  nlohmann::ordered_json members = nlohmann::ordered_json::array();
  if (ens.member_encoders.empty()) {
    manifest["encoder"] = "encoder.ckpt";
    save_checkpoint(dir / "encoder.ckpt", to_checkpoint(*ens.encoder));
  }
  for (std::size_t i = 0; i < ens.members.size(); ++i) {
    nlohmann::ordered_json m;
    m["classifier"] = member_file("member", i);
    m["seed"] = std::to_string(derive_seed(ens.config.seed, "member", i));
    save_checkpoint(dir / member_file("member", i), to_checkpoint(ens.members[i]));
    if (!ens.member_encoders.empty()) {
      m["encoder"] = member_file("encoder", i);
      save_checkpoint(dir / member_file("encoder", i), to_checkpoint(*ens.member_encoders[i]));
    }
    members.push_back(m);
  }
  manifest["members"] = members;
  nlohmann::ordered_json meta = nlohmann::ordered_json::object();
  for (const auto& [k, v] : extra) meta[k] = v;
  manifest["meta"] = meta;
  std::ofstream out(dir / "manifest.json");
  out << manifest.dump(2) << '\n';
  if (!out) throw DataError("cannot write ensemble manifest in " + dir.string());
}

Ensemble load_ensemble(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw ConfigError("no ensemble manifest in " + dir.string());
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("corrupt ensemble manifest: " + std::string(e.what()));
  }
  if (manifest.value("format", "") != "lcintent-ensemble" || manifest.value("version", 0) != 1) {
    throw ConfigError("unsupported ensemble manifest version in " + dir.string());
  }
  Ensemble ens;
  ens.config.beta = manifest.at("beta").get<int>();
  ens.config.train_iters = manifest.at("train_iters").get<int>();
  ens.config.seed = std::stoull(manifest.at("seed").get<std::string>());
  ens.config.bag_mode = parse_bag_mode(manifest.at("bag_mode").get<std::string>());
  ens.config.retrain_encoder = manifest.at("retrain_encoder").get<bool>();
  ens.use_static = manifest.at("use_static").get<bool>();
  ens.majority = parse_maneuver(manifest.at("majority").get<std::string>()).value_or(Maneuver::LK);
  ens.bag_sizes = manifest.at("bag_sizes").get<std::vector<std::size_t>>();
  ens.scaler = scaler_from_checkpoint(load_checkpoint(dir / manifest.at("scaler").get<std::string>(), CheckpointKind::Scaler));
  if (manifest.contains("encoder")) {
    ens.encoder = std::make_shared<const SeqAutoencoder>(autoencoder_from_checkpoint(
        load_checkpoint(dir / manifest.at("encoder").get<std::string>(), CheckpointKind::Autoencoder)));
  }
  for (const auto& m : manifest.at("members")) {
    ens.members.push_back(classifier_from_checkpoint(
        load_checkpoint(dir / m.at("classifier").get<std::string>(), CheckpointKind::Classifier)));
    if (m.contains("encoder")) {
      ens.member_encoders.push_back(std::make_shared<const SeqAutoencoder>(autoencoder_from_checkpoint(
          load_checkpoint(dir / m.at("encoder").get<std::string>(), CheckpointKind::Autoencoder))));
    }
  }
  if (!ens.encoder && !ens.member_encoders.empty()) ens.encoder = ens.member_encoders.front();
  return ens;
}

}  // namespace lcintent

// Copyright 2026 The pvzsl Authors.
// SPDX-License-Identifier: Apache-2.0

#include "pvzsl/train/config.hpp"

#include <json.hpp>

#include "pvzsl/ndcore/errors.hpp"

namespace pvzsl {

using nlohmann::json;

std::string to_string(TrainMode mode) { return mode == TrainMode::gzsl ? "gzsl" : "zsl"; }

TrainMode parse_train_mode(const std::string& name) {
  if (name == "gzsl") return TrainMode::gzsl;
  if (name == "zsl") return TrainMode::zsl;
  throw ValidationError("unknown mode '" + name + "' (gzsl, zsl)");
}

void TrainConfig::validate() const {
  loss.validate();
  distance.validate();
  if (batch_size < 2) throw ValidationError("batch_size must be >= 2");
  if (!(optim.lr > 0.0)) throw ValidationError("optim.lr must be > 0");
  if (!(optim.beta1 >= 0.0 && optim.beta1 < 1.0) || !(optim.beta2 >= 0.0 && optim.beta2 < 1.0)) {
    throw ValidationError("optim.beta1 and optim.beta2 must be in [0, 1)");
  }
  if (!(optim.eps > 0.0)) throw ValidationError("optim.eps must be > 0");
  if (model.hidden == 0) throw ValidationError("model.hidden must be > 0");
  if (!(model.dropout_rate >= 0.0 && model.dropout_rate < 1.0)) {
    throw ValidationError("model.dropout_rate must be in [0, 1)");
  }
  if (!(model.leaky_slope >= 0.0)) throw ValidationError("model.leaky_slope must be >= 0");
  if (eval_every == 0) throw ValidationError("eval_every must be >= 1");
}

namespace {

json to_json(const TrainConfig& c) {
  return {
      {"loss",
       {{"lambda0", c.loss.lambda0},
        {"lambda1", c.loss.lambda1},
        {"lambda2", c.loss.lambda2},
        {"lambda3", c.loss.lambda3},
        {"gamma1", c.loss.gamma1},
        {"gamma2", c.loss.gamma2},
        {"margin1", c.loss.margin1},
        {"margin2", c.loss.margin2},
        {"margin3", c.loss.margin3},
        {"margin4", c.loss.margin4},
        {"prob_floor", c.loss.prob_floor},
        {"mi_marginal", c.loss.mi_marginal}}},
      {"distance", {{"kind", std::string(to_string(c.distance.kind))}, {"m1", c.distance.m1}, {"m2", c.distance.m2}}},
      {"model",
       {{"hidden", c.model.hidden},
        {"dropout_rate", c.model.dropout_rate},
        {"leaky_slope", c.model.leaky_slope}}},
      {"optim",
       {{"lr", c.optim.lr}, {"beta1", c.optim.beta1}, {"beta2", c.optim.beta2}, {"eps", c.optim.eps}}},
      {"batch_size", c.batch_size},
      {"max_epochs", c.max_epochs},
      {"patience", c.patience},
      {"seed", c.seed},
      {"eval_every", c.eval_every},
      {"mode", to_string(c.mode)}};
}

template <typename T>
T field(const json& j, const char* key, const std::string& path) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError("config field '" + path + key + "' has the wrong type");
  }
}

double real(const json& j, const char* key, const std::string& path) {
  const json& v = j.at(key);
  if (!v.is_number()) throw ValidationError("config field '" + path + key + "' must be a number");
  return v.get<double>();
}

std::size_t count(const json& j, const char* key, const std::string& path) {
  const json& v = j.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    throw ValidationError("config field '" + path + key + "' must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

TrainConfig from_json(const json& j) {
  TrainConfig c;
  const json& l = j.at("loss");
  c.loss.lambda0 = real(l, "lambda0", "loss.");
  c.loss.lambda1 = real(l, "lambda1", "loss.");
  c.loss.lambda2 = real(l, "lambda2", "loss.");
  c.loss.lambda3 = real(l, "lambda3", "loss.");
  c.loss.gamma1 = real(l, "gamma1", "loss.");
  c.loss.gamma2 = real(l, "gamma2", "loss.");
  c.loss.margin1 = real(l, "margin1", "loss.");
  c.loss.margin2 = real(l, "margin2", "loss.");
  c.loss.margin3 = real(l, "margin3", "loss.");
  c.loss.margin4 = real(l, "margin4", "loss.");
  c.loss.prob_floor = real(l, "prob_floor", "loss.");
  if (!l.at("mi_marginal").is_boolean()) {
    throw ValidationError("config field 'loss.mi_marginal' must be a boolean");
  }
  c.loss.mi_marginal = l.at("mi_marginal").get<bool>();
  const json& d = j.at("distance");
  c.distance.kind = parse_distance_kind(field<std::string>(d, "kind", "distance."));
  c.distance.m1 = real(d, "m1", "distance.");
  c.distance.m2 = real(d, "m2", "distance.");
  const json& m = j.at("model");
  c.model.hidden = count(m, "hidden", "model.");
  c.model.dropout_rate = real(m, "dropout_rate", "model.");
  c.model.leaky_slope = real(m, "leaky_slope", "model.");
  const json& o = j.at("optim");
  c.optim.lr = real(o, "lr", "optim.");
  c.optim.beta1 = real(o, "beta1", "optim.");
  c.optim.beta2 = real(o, "beta2", "optim.");
  c.optim.eps = real(o, "eps", "optim.");
  c.batch_size = count(j, "batch_size", "");
  c.max_epochs = count(j, "max_epochs", "");
  c.patience = count(j, "patience", "");
  const json& seed = j.at("seed");
  if (!seed.is_number_unsigned()) throw ValidationError("config field 'seed' must be a non-negative integer");
  c.seed = seed.get<std::uint64_t>();
  c.eval_every = count(j, "eval_every", "");
  c.mode = parse_train_mode(field<std::string>(j, "mode", ""));
  return c;
}

/// Copies `src` into `dst` key by key; every key must already exist in `dst`.
void merge_strict(json& dst, const json& src, const std::string& path) {
  if (!src.is_object()) throw ValidationError("config section '" + path + "' must be an object");
  for (auto it = src.begin(); it != src.end(); ++it) {
    const std::string key = path.empty() ? it.key() : path + "." + it.key();
    if (!dst.contains(it.key())) throw ValidationError("unknown config key '" + key + "'");
    json& target = dst[it.key()];
    if (target.is_object()) {
      merge_strict(target, it.value(), key);
    } else {
      if (it.value().is_object()) throw ValidationError("config key '" + key + "' is not a section");
      target = it.value();
    }
  }
}

json parse_override_value(const std::string& text) {
  json v = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (v.is_discarded()) return json(text);
  return v;
}

}  // namespace

std::string config_to_json(const TrainConfig& cfg) { return to_json(cfg).dump(2) + "\n"; }

TrainConfig resolve_config(const std::string& json_text,
                           const std::vector<std::pair<std::string, std::string>>& overrides) {
  json resolved = to_json(TrainConfig{});
  if (json_text.find_first_not_of(" \t\r\n") != std::string::npos) {
    json doc = json::parse(json_text, nullptr, false);
    if (doc.is_discarded()) throw ValidationError("config is not valid JSON");
    merge_strict(resolved, doc, "");
  }
  for (const auto& [path, text] : overrides) {
    json* node = &resolved;
    std::size_t start = 0;
    while (true) {
      const std::size_t dot = path.find('.', start);
      const std::string key = path.substr(start, dot == std::string::npos ? dot : dot - start);
      if (key.empty() || !node->is_object() || !node->contains(key)) {
        throw ValidationError("unknown config key '" + path + "'");
      }
      node = &(*node)[key];
      if (dot == std::string::npos) break;
      start = dot + 1;
    }
    if (node->is_object()) throw ValidationError("config key '" + path + "' is a section");
    *node = parse_override_value(text);
  }
  TrainConfig cfg = from_json(resolved);
  cfg.validate();
  return cfg;
}

}  // namespace pvzsl

// Copyright 2026 The pvzsl Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pvzsl/losses/losses.hpp"
#include "pvzsl/ndcore/adam.hpp"
#include "pvzsl/proto/distance.hpp"
#include "pvzsl/proto/embed_net.hpp"

namespace pvzsl {

/// gzsl selects checkpoints by validation H (or seen accuracy when there is no unseen
/// validation split); zsl by validation accuracy over target classes only.
enum class TrainMode { gzsl, zsl };

std::string to_string(TrainMode mode);
TrainMode parse_train_mode(const std::string& name);

struct TrainConfig {
  LossConfig loss;
  DistanceSpec distance;
  EmbedNetConfig model;
  AdamConfig optim;
  std::size_t batch_size = 512;
  std::size_t max_epochs = 200;
  std::size_t patience = 10;
  std::uint64_t seed = 42;
  std::size_t eval_every = 1;
  TrainMode mode = TrainMode::gzsl;

  /// Throws ValidationError on any out-of-range field.
  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

/// Fully resolved JSON form (every field present), stable key order.
std::string config_to_json(const TrainConfig& cfg);

/// Builds a config from defaults, then a JSON document (may be partial), then dot-path
/// overrides such as {"loss.lambda1", "0.5"}. Unknown keys and ill-typed values throw
/// ValidationError. Override values are parsed as JSON when possible, else taken as strings.
TrainConfig resolve_config(const std::string& json_text,
                           const std::vector<std::pair<std::string, std::string>>& overrides = {});

}  // namespace pvzsl

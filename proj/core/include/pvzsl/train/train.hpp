// Copyright 2026 The pvzsl Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pvzsl/data/bundle.hpp"
#include "pvzsl/proto/embed_net.hpp"
#include "pvzsl/train/config.hpp"

namespace pvzsl {

struct EpochRecord {
  std::size_t epoch = 0;
  /// Batch-mean of every loss term plus "total".
  std::map<std::string, double> losses;
  std::optional<double> val_ts;
  std::optional<double> val_tr;
  std::optional<double> val_h;
  std::optional<double> val_zsl;
  /// The quantity early stopping maximizes.
  double val_metric = 0.0;
  /// MI between train-split points and the target classes.
  double mi_target = 0.0;
  double mi_target_nats = 0.0;
  /// Generated points kept by selection at the start of the epoch (0/0 without generated data).
  std::size_t gen_selected = 0;
  std::size_t gen_total = 0;

  bool operator==(const EpochRecord&) const = default;
};

struct TrainHistory {
  std::vector<EpochRecord> records;
  std::size_t best_epoch = 0;  // 0 when no evaluation ran
  double best_metric = 0.0;
  bool stopped_early = false;
  std::vector<std::string> warnings;

  bool operator==(const TrainHistory&) const = default;
};

struct TrainResult {
  EmbedNet net;  // parameters of the best validation checkpoint
  TrainHistory history;
};

/// Mini-batch Adam on L_D = L_CE + λ1·L_MI + λ2·L_EC + λ3·L_SPCE. Each step runs one
/// train-mode forward pass of the attribute table, evaluates every term against the fresh
/// prototypes, and back-propagates once. Keeps the best checkpoint by the validation metric and
/// stops after `patience` evaluations without improvement. Deterministic given cfg.seed.
TrainResult train_deterministic(const DatasetBundle& bundle, const TrainConfig& cfg);

/// As train_deterministic, adding γ1·L̃_CE on generated points kept by selection (re-run at
/// the start of every epoch) and γ2·L̃_MI on the generated pool. Generated mini-batches are
/// paired 1:1 with seen mini-batches, cycling through the generated data.
TrainResult train_with_generated(const DatasetBundle& bundle, const GeneratedSet& gen,
                                 const TrainConfig& cfg);

struct GridRow {
  double lambda1 = 0.0;
  double val_metric = 0.0;
  std::size_t best_epoch = 0;
};

struct GridResult {
  double best_lambda1 = 0.0;
  std::vector<GridRow> table;
};

inline const std::vector<double> kDefaultLambda1Grid = {0.025, 0.05, 0.5, 1.0};

/// Trains one model per λ1 (all with cfg.seed) and returns the value with the best validation
/// metric; ties go to the smaller λ1.
GridResult grid_search_lambda1(const DatasetBundle& bundle, const TrainConfig& cfg,
                               const std::vector<double>& grid = kDefaultLambda1Grid);

/// "epoch,<terms...>,val_ts,val_tr,val_h,val_zsl,val_metric,mi_target,mi_target_nats,
/// gen_selected,gen_total" with empty cells for absent values.
std::string history_csv(const TrainHistory& h);

// ---- checkpoints --------------------------------------------------------------------------

/// Directory holding checkpoint.json (dims, block files, config echo) and one GZS1 f32 file per
/// parameter block. Values are stored as binary32; optimizer state is not stored.
void save_checkpoint(const EmbedNet& net, const TrainConfig& cfg, const std::filesystem::path& dir);

struct Checkpoint {
  EmbedNet net;
  TrainConfig config;
};

Checkpoint load_checkpoint(const std::filesystem::path& dir);

/// Rounds every parameter to binary32, matching what a checkpoint round trip yields.
void quantize_parameters(EmbedNet& net);

}  // namespace pvzsl

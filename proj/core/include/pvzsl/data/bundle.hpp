// Copyright 2026 The pvzsl Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pvzsl/ndcore/matrix.hpp"
#include "pvzsl/proto/class_set.hpp"
#include "pvzsl/proto/points.hpp"

namespace pvzsl {

using Index = std::uint32_t;

enum class PreprocessMode { none, max_norm_scale };

std::string to_string(PreprocessMode mode);
PreprocessMode parse_preprocess_mode(const std::string& name);

/// How X was transformed after loading raw features. For max_norm_scale, every feature
/// row was divided by `scale` and rounded to binary32.
struct Preprocessing {
  PreprocessMode mode = PreprocessMode::none;
  double scale = 1.0;

  bool operator==(const Preprocessing&) const = default;
};

struct Provenance {
  std::string generator;  // "synth_benchmark", "csv", or free text from an importer
  std::optional<std::uint64_t> seed;
  std::map<std::string, double> params;

  bool operator==(const Provenance&) const = default;
};

/// Visual features, labels, class attributes, and instance splits of one GZSL dataset.
/// Class ids are 1..S (sources) then S+1..S+T (targets); row c-1 of `v` describes class c.
struct DatasetBundle {
  Matrix x;                 // N×P
  std::vector<ClassId> y;   // N
  Matrix v;                 // (S+T)×Q
  ClassLayout layout;
  std::vector<Index> train_idx;
  std::vector<Index> val_idx;
  std::vector<Index> test_seen_idx;
  std::vector<Index> test_unseen_idx;
  /// Optional target-class validation points; empty unless explicitly carved out.
  std::vector<Index> val_unseen_idx;
  Preprocessing preprocessing;
  Provenance provenance;

  std::size_t num_points() const noexcept { return y.size(); }
  std::size_t feature_dim() const noexcept { return x.cols(); }
  std::size_t attribute_dim() const noexcept { return v.cols(); }
  std::vector<ClassId> source_ids() const;
  std::vector<ClassId> target_ids() const;

  /// Rows and labels selected by `idx`, in order.
  LabeledPoints points(std::span<const Index> idx) const;

  bool operator==(const DatasetBundle&) const = default;
};

/// Throws ValidationError naming the first violated invariant: shapes, label range, split
/// sides (train/val/test_seen hold sources, test_unseen/val_unseen hold targets), pairwise
/// disjoint splits, index range, finite values.
void validate_bundle(const DatasetBundle& b);

// ---- on-disk bundle -----------------------------------------------------------------------

inline constexpr int kManifestVersion = 1;

/// Writes manifest.json plus one GZS1 file per tensor into `dir` (created if missing).
void save_bundle(const DatasetBundle& b, const std::filesystem::path& dir);
/// Reads and validates a bundle. FormatError for file-level problems (naming the file),
/// ValidationError for semantic ones.
DatasetBundle load_bundle(const std::filesystem::path& dir);

/// The dims recorded in a manifest, without reading the tensors.
struct ManifestDims {
  std::size_t n = 0, p = 0, q = 0, s = 0, t = 0;
};
ManifestDims read_manifest_dims(const std::filesystem::path& dir);

/// CSV fixture directory: X.csv (N rows of P values), y.csv, V.csv ((S+T) rows of Q values),
/// layout.csv ("S,T"), and train_idx.csv, val_idx.csv, test_seen_idx.csv, test_unseen_idx.csv
/// (0-based row indices; val_idx.csv may be absent). Vector files may hold one value per line
/// or several per line. No header rows. Ragged matrix rows raise FormatError with the line.
DatasetBundle load_csv_bundle(const std::filesystem::path& dir);

// ---- preprocessing ------------------------------------------------------------------------

/// `none` returns the bundle unchanged. `max_norm_scale` divides every row of X by the largest
/// train-split L2 norm and records that scalar. Throws ValidationError on a zero norm, an
/// empty train split, or an already-scaled bundle.
DatasetBundle preprocess_features(const DatasetBundle& b, PreprocessMode mode);

/// Applies a recorded preprocessing to other feature rows (held-out or generated);
/// bit-identical to what preprocess_features did to the bundle's own rows.
Matrix apply_preprocessing(const Matrix& x, const Preprocessing& pre);

// ---- generated features -------------------------------------------------------------------

/// A generated set lives in a directory holding X.gzs (M×P f32) and y.gzs (M u32 labels).
void save_generated(const GeneratedSet& gen, const std::filesystem::path& dir);
/// Loads raw generated features and applies the bundle's preprocessing. FormatError when P
/// differs from the bundle, ValidationError for labels outside the target classes.
GeneratedSet load_generated(const std::filesystem::path& dir, const DatasetBundle& bundle);
/// Label/shape checks against a bundle's layout.
void validate_generated(const GeneratedSet& gen, const DatasetBundle& bundle);

}  // namespace pvzsl

// Copyright 2026 The pvzsl Authors.
// SPDX-License-Identifier: Apache-2.0

#include "pvzsl/data/bundle.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pvzsl/data/gzs1.hpp"
#include "pvzsl/ndcore/errors.hpp"

namespace pvzsl {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(PreprocessMode mode) {
  return mode == PreprocessMode::none ? "none" : "max_norm_scale";
}

PreprocessMode parse_preprocess_mode(const std::string& name) {
  if (name == "none") return PreprocessMode::none;
  if (name == "max_norm_scale") return PreprocessMode::max_norm_scale;
  throw ValidationError("unknown preprocessing mode '" + name + "' (none, max_norm_scale)");
}

std::vector<ClassId> DatasetBundle::source_ids() const {
  std::vector<ClassId> out(layout.num_source);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<ClassId>(i + 1);
  return out;
}

std::vector<ClassId> DatasetBundle::target_ids() const {
  std::vector<ClassId> out(layout.num_target);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<ClassId>(layout.num_source + i + 1);
  }
  return out;
}

LabeledPoints DatasetBundle::points(std::span<const Index> idx) const {
  std::vector<std::size_t> rows(idx.begin(), idx.end());
  LabeledPoints out;
  out.x = gather_rows(x, rows);
  out.y.reserve(idx.size());
  for (Index i : idx) out.y.push_back(y.at(i));
  return out;
}

// ---- validation ---------------------------------------------------------------------------

namespace {

struct NamedSplit {
  const char* name;
  const std::vector<Index>* idx;
  bool target_side;
};

}  // namespace

void validate_bundle(const DatasetBundle& b) {
  const std::size_t n = b.x.rows();
  if (b.y.size() != n) {
    throw ValidationError("X has " + std::to_string(n) + " rows but y has " +
                          std::to_string(b.y.size()) + " labels");
  }
  if (b.layout.num_source == 0) throw ValidationError("bundle has no source classes");
  if (b.v.rows() != b.layout.num_classes()) {
    throw ValidationError("V has " + std::to_string(b.v.rows()) + " rows but S+T = " +
                          std::to_string(b.layout.num_classes()));
  }
  if (n > 0 && b.x.cols() == 0) throw ValidationError("X has zero feature columns");
  if (b.v.cols() == 0) throw ValidationError("V has zero attribute columns");
  if (!b.x.all_finite()) throw ValidationError("X contains non-finite values");
  if (!b.v.all_finite()) throw ValidationError("V contains non-finite values");
  for (std::size_t i = 0; i < n; ++i) {
    if (!b.layout.valid_id(b.y[i])) {
      throw ValidationError("label " + std::to_string(b.y[i]) + " at row " + std::to_string(i) +
                            " is outside 1.." + std::to_string(b.layout.num_classes()));
    }
  }
  const NamedSplit splits[] = {{"train_idx", &b.train_idx, false},
                               {"val_idx", &b.val_idx, false},
                               {"test_seen_idx", &b.test_seen_idx, false},
                               {"test_unseen_idx", &b.test_unseen_idx, true},
                               {"val_unseen_idx", &b.val_unseen_idx, true}};
  std::vector<const char*> owner(n, nullptr);
  for (const NamedSplit& s : splits) {
    for (Index i : *s.idx) {
      if (i >= n) {
        throw ValidationError(std::string(s.name) + " index " + std::to_string(i) +
                              " out of range (N = " + std::to_string(n) + ")");
      }
      const ClassId label = b.y[i];
      if (s.target_side && !b.layout.is_target(label)) {
        throw ValidationError(std::string(s.name) + " row " + std::to_string(i) + " has label " +
                              std::to_string(label) + ", which is not a target class");
      }
      if (!s.target_side && !b.layout.is_source(label)) {
        throw ValidationError(std::string(s.name) + " row " + std::to_string(i) + " has label " +
                              std::to_string(label) + ", which is not a source class");
      }
      if (owner[i] != nullptr) {
        throw ValidationError("row " + std::to_string(i) + " appears in both " + owner[i] +
                              " and " + s.name);
      }
      owner[i] = s.name;
    }
  }
  if (!(b.preprocessing.scale > 0.0) || !std::isfinite(b.preprocessing.scale)) {
    throw ValidationError("preprocessing scale must be positive and finite");
  }
  if (b.preprocessing.mode == PreprocessMode::none && b.preprocessing.scale != 1.0) {
    throw ValidationError("preprocessing mode none requires scale 1");
  }
}

// ---- binary bundle ------------------------------------------------------------------------

namespace {

const char* const kSplitNames[] = {"train_idx", "val_idx", "test_seen_idx", "test_unseen_idx",
                                   "val_unseen_idx"};

std::vector<Index>& split_ref(DatasetBundle& b, std::size_t k) {
  switch (k) {
    case 0: return b.train_idx;
    case 1: return b.val_idx;
    case 2: return b.test_seen_idx;
    case 3: return b.test_unseen_idx;
    default: return b.val_unseen_idx;
  }
}

const std::vector<Index>& split_ref(const DatasetBundle& b, std::size_t k) {
  return split_ref(const_cast<DatasetBundle&>(b), k);
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(path.string() + ": cannot open");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

template <typename T>
T manifest_field(const json& j, const char* key, const fs::path& path) {
  if (!j.contains(key)) throw FormatError(path.string() + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": field '" + key + "': " + e.what());
  }
}

}  // namespace

void save_bundle(const DatasetBundle& b, const fs::path& dir) {
  validate_bundle(b);
  fs::create_directories(dir);
  json files = {{"X", "X.gzs"}, {"y", "y.gzs"}, {"V", "V.gzs"}};
  gzs1::write_f32(dir / "X.gzs", b.x);
  gzs1::write_u32(dir / "y.gzs", b.y);
  gzs1::write_f32(dir / "V.gzs", b.v);
  for (std::size_t k = 0; k < std::size(kSplitNames); ++k) {
    const auto& idx = split_ref(b, k);
    if (k == 4 && idx.empty()) continue;
    const std::string file = std::string(kSplitNames[k]) + ".gzs";
    gzs1::write_u32(dir / file, idx);
    files[kSplitNames[k]] = file;
  }
  json provenance = {{"generator", b.provenance.generator}, {"params", b.provenance.params}};
  provenance["seed"] = b.provenance.seed ? json(*b.provenance.seed) : json(nullptr);
  const json manifest = {
      {"format", "GZS1"},
      {"version", kManifestVersion},
      {"dims",
       {{"N", b.num_points()},
        {"P", b.x.cols()},
        {"Q", b.v.cols()},
        {"S", b.layout.num_source},
        {"T", b.layout.num_target}}},
      {"files", files},
      {"preprocessing",
       {{"mode", to_string(b.preprocessing.mode)}, {"scale", b.preprocessing.scale}}},
      {"provenance", provenance}};
  std::ofstream out(dir / "manifest.json", std::ios::trunc);
  if (!out) throw FormatError((dir / "manifest.json").string() + ": cannot open for writing");
  out << manifest.dump(2) << '\n';
}

namespace {

ManifestDims parse_dims(const json& m, const fs::path& path) {
  const json dims = manifest_field<json>(m, "dims", path);
  ManifestDims d;
  d.n = manifest_field<std::size_t>(dims, "N", path);
  d.p = manifest_field<std::size_t>(dims, "P", path);
  d.q = manifest_field<std::size_t>(dims, "Q", path);
  d.s = manifest_field<std::size_t>(dims, "S", path);
  d.t = manifest_field<std::size_t>(dims, "T", path);
  return d;
}

json checked_manifest(const fs::path& dir) {
  const fs::path path = dir / "manifest.json";
  json m = read_json(path);
  if (!m.is_object()) throw FormatError(path.string() + ": manifest must be a JSON object");
  const auto format = manifest_field<std::string>(m, "format", path);
  if (format != "GZS1") throw FormatError(path.string() + ": unsupported format '" + format + "'");
  const int version = manifest_field<int>(m, "version", path);
  if (version != kManifestVersion) {
    throw FormatError(path.string() + ": unsupported manifest version " + std::to_string(version));
  }
  return m;
}

void expect_shape(const fs::path& file, std::size_t rows, std::size_t cols,
                  std::size_t want_rows, std::size_t want_cols) {
  if (rows != want_rows || cols != want_cols) {
    throw FormatError(file.string() + ": manifest says " + std::to_string(want_rows) + "x" +
                      std::to_string(want_cols) + ", file holds " + std::to_string(rows) + "x" +
                      std::to_string(cols));
  }
}

}  // namespace

ManifestDims read_manifest_dims(const fs::path& dir) {
  return parse_dims(checked_manifest(dir), dir / "manifest.json");
}

DatasetBundle load_bundle(const fs::path& dir) {
  const fs::path mpath = dir / "manifest.json";
  const json m = checked_manifest(dir);
  const ManifestDims d = parse_dims(m, mpath);
  const json files = manifest_field<json>(m, "files", mpath);
  auto file_of = [&](const char* key) { return dir / manifest_field<std::string>(files, key, mpath); };

  DatasetBundle b;
  b.layout = {d.s, d.t};
  const fs::path xf = file_of("X");
  b.x = gzs1::read_f32(xf);
  expect_shape(xf, b.x.rows(), b.x.cols(), d.n, d.p);
  const fs::path yf = file_of("y");
  b.y = gzs1::read_u32(yf);
  expect_shape(yf, b.y.size(), 1, d.n, 1);
  const fs::path vf = file_of("V");
  b.v = gzs1::read_f32(vf);
  expect_shape(vf, b.v.rows(), b.v.cols(), d.s + d.t, d.q);
  for (std::size_t k = 0; k < std::size(kSplitNames); ++k) {
    if (k == 4 && !files.contains(kSplitNames[k])) continue;
    split_ref(b, k) = gzs1::read_u32(file_of(kSplitNames[k]));
  }

  if (m.contains("preprocessing")) {
    const json pre = m.at("preprocessing");
    b.preprocessing.mode = parse_preprocess_mode(manifest_field<std::string>(pre, "mode", mpath));
    b.preprocessing.scale = manifest_field<double>(pre, "scale", mpath);
  }
  if (m.contains("provenance")) {
    const json prov = m.at("provenance");
    if (prov.contains("generator")) b.provenance.generator = prov.at("generator").get<std::string>();
    if (prov.contains("seed") && !prov.at("seed").is_null()) {
      b.provenance.seed = prov.at("seed").get<std::uint64_t>();
    }
    if (prov.contains("params")) {
      b.provenance.params = prov.at("params").get<std::map<std::string, double>>();
    }
  }
  validate_bundle(b);
  return b;
}

// ---- CSV fixtures -------------------------------------------------------------------------

namespace {

struct CsvRow {
  std::string line;  // 1-based source line, for diagnostics
  std::vector<std::string> cells;
};

std::vector<CsvRow> read_csv_rows(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(path.string() + ": cannot open");
  std::vector<CsvRow> rows;
  std::string text;
  std::size_t line_no = 0;
  while (std::getline(in, text)) {
    ++line_no;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.find_first_not_of(" \t") == std::string::npos) continue;
    CsvRow row{std::to_string(line_no), {}};
    if (text.back() == ',') throw FormatError(path.string() + ":" + row.line + ": trailing comma");
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      const auto first = cell.find_first_not_of(" \t");
      const auto last = cell.find_last_not_of(" \t");
      if (first == std::string::npos) throw FormatError(path.string() + ":" + row.line + ": empty cell");
      row.cells.push_back(cell.substr(first, last - first + 1));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

double parse_real(const std::string& s, const fs::path& path, const std::string& line) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0' || errno == ERANGE || !std::isfinite(v)) {
    throw FormatError(path.string() + ":" + line + ": not a finite number: '" + s + "'");
  }
  return v;
}

std::uint32_t parse_uint(const std::string& s, const fs::path& path, const std::string& line) {
  errno = 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
  if (s.empty() || s[0] == '-' || end == s.c_str() || *end != '\0' || errno == ERANGE ||
      v > 0xffffffffull) {
    throw FormatError(path.string() + ":" + line + ": not a non-negative integer: '" + s + "'");
  }
  return static_cast<std::uint32_t>(v);
}

Matrix read_csv_matrix(const fs::path& path) {
  const auto rows = read_csv_rows(path);
  if (rows.empty()) throw FormatError(path.string() + ": no rows");
  const std::size_t cols = rows.front().cells.size();
  Matrix m(rows.size(), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const CsvRow& row = rows[r];
    if (row.cells.size() != cols) {
      throw FormatError(path.string() + ":" + row.line + ": ragged row (" +
                        std::to_string(row.cells.size()) + " values, expected " +
                        std::to_string(cols) + ")");
    }
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = parse_real(row.cells[c], path, row.line);
  }
  return m;
}

std::vector<std::uint32_t> read_csv_uints(const fs::path& path) {
  std::vector<std::uint32_t> out;
  for (const CsvRow& row : read_csv_rows(path)) {
    for (const std::string& cell : row.cells) out.push_back(parse_uint(cell, path, row.line));
  }
  return out;
}

}  // namespace

DatasetBundle load_csv_bundle(const fs::path& dir) {
  DatasetBundle b;
  const auto layout = read_csv_uints(dir / "layout.csv");
  if (layout.size() != 2) {
    throw FormatError((dir / "layout.csv").string() + ": expected two values \"S,T\"");
  }
  b.layout = {layout[0], layout[1]};
  b.x = read_csv_matrix(dir / "X.csv");
  b.y = read_csv_uints(dir / "y.csv");
  b.v = read_csv_matrix(dir / "V.csv");
  b.train_idx = read_csv_uints(dir / "train_idx.csv");
  if (fs::exists(dir / "val_idx.csv")) b.val_idx = read_csv_uints(dir / "val_idx.csv");
  b.test_seen_idx = read_csv_uints(dir / "test_seen_idx.csv");
  b.test_unseen_idx = read_csv_uints(dir / "test_unseen_idx.csv");
  if (fs::exists(dir / "val_unseen_idx.csv")) {
    b.val_unseen_idx = read_csv_uints(dir / "val_unseen_idx.csv");
  }
  b.provenance.generator = "csv";
  validate_bundle(b);
  return b;
}

// ---- preprocessing ------------------------------------------------------------------------

Matrix apply_preprocessing(const Matrix& x, const Preprocessing& pre) {
  if (pre.mode == PreprocessMode::none) return x;
  if (!(pre.scale > 0.0) || !std::isfinite(pre.scale)) {
    throw ValidationError("preprocessing scale must be positive and finite");
  }
  Matrix out = x;
  for (double& v : out.values()) v /= pre.scale;
  quantize_to_f32(out);
  return out;
}

DatasetBundle preprocess_features(const DatasetBundle& b, PreprocessMode mode) {
  if (mode == PreprocessMode::none) return b;
  if (b.preprocessing.mode != PreprocessMode::none) {
    throw ValidationError("bundle features are already preprocessed (" +
                          to_string(b.preprocessing.mode) + ")");
  }
  if (b.train_idx.empty()) throw ValidationError("max_norm_scale needs a non-empty train split");
  double max_norm = 0.0;
  for (Index i : b.train_idx) max_norm = std::max(max_norm, std::sqrt(squared_norm(b.x.row(i))));
  if (!(max_norm > 0.0)) throw ValidationError("max_norm_scale: train-split features are all zero");
  DatasetBundle out = b;
  out.preprocessing = {PreprocessMode::max_norm_scale, max_norm};
  out.x = apply_preprocessing(b.x, out.preprocessing);
  return out;
}

// ---- generated features -------------------------------------------------------------------

void validate_generated(const GeneratedSet& gen, const DatasetBundle& bundle) {
  if (gen.x.rows() != gen.y.size()) {
    throw ValidationError("generated set has " + std::to_string(gen.x.rows()) + " rows but " +
                          std::to_string(gen.y.size()) + " labels");
  }
  if (!gen.empty() && gen.x.cols() != bundle.feature_dim()) {
    throw ValidationError("generated features have dimension " + std::to_string(gen.x.cols()) +
                          ", bundle has " + std::to_string(bundle.feature_dim()));
  }
  if (!gen.x.all_finite()) throw ValidationError("generated features contain non-finite values");
  for (std::size_t i = 0; i < gen.y.size(); ++i) {
    if (!bundle.layout.is_target(gen.y[i])) {
      throw ValidationError("generated label " + std::to_string(gen.y[i]) + " at row " +
                            std::to_string(i) + " is not a target class");
    }
  }
}

void save_generated(const GeneratedSet& gen, const fs::path& dir) {
  if (gen.x.rows() != gen.y.size()) throw ValidationError("generated set rows/labels mismatch");
  fs::create_directories(dir);
  gzs1::write_f32(dir / "X.gzs", gen.x);
  gzs1::write_u32(dir / "y.gzs", gen.y);
}

GeneratedSet load_generated(const fs::path& dir, const DatasetBundle& bundle) {
  const fs::path xf = dir / "X.gzs";
  const fs::path yf = dir / "y.gzs";
  GeneratedSet gen;
  gen.x = gzs1::read_f32(xf);
  gen.y = gzs1::read_u32(yf);
  if (gen.x.cols() != bundle.feature_dim()) {
    throw FormatError(xf.string() + ": feature dimension " + std::to_string(gen.x.cols()) +
                      " does not match the bundle's P = " + std::to_string(bundle.feature_dim()));
  }
  if (gen.x.rows() != gen.y.size()) {
    throw FormatError(yf.string() + ": " + std::to_string(gen.y.size()) + " labels for " +
                      std::to_string(gen.x.rows()) + " feature rows");
  }
  validate_generated(gen, bundle);
  gen.x = apply_preprocessing(gen.x, bundle.preprocessing);
  return gen;
}

}  // namespace pvzsl

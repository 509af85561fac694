// Copyright 2026 The pvzsl Authors.
// SPDX-License-Identifier: Apache-2.0

#include "pvzsl/train/train.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "pvzsl/data/gzs1.hpp"
#include "pvzsl/eval/metrics.hpp"
#include "pvzsl/losses/losses.hpp"
#include "pvzsl/ndcore/errors.hpp"
#include "pvzsl/ndcore/rng.hpp"

namespace pvzsl {

namespace {

enum Stream : std::uint64_t { kInit = 1, kShuffle = 2, kDropout = 3, kGenerated = 4 };

void check_trainable(const DatasetBundle& b, const TrainConfig& cfg) {
  cfg.validate();
  validate_bundle(b);
  if (b.layout.num_target == 0) throw ValidationError("training needs at least one target class");
  if (b.layout.num_source < 2) throw ValidationError("training needs at least two source classes");
  if (b.train_idx.size() < 2) throw ValidationError("training needs at least two train points");
}

/// Consecutive chunks of `batch` indices; a final chunk smaller than 2 joins its predecessor so
/// every batch supports the batch-marginal MI estimate.
std::vector<std::pair<std::size_t, std::size_t>> batch_ranges(std::size_t n, std::size_t batch) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t start = 0; start < n; start += batch) {
    out.emplace_back(start, std::min(n, start + batch));
  }
  if (out.size() > 1 && out.back().second - out.back().first < 2) {
    const std::size_t end = out.back().second;
    out.pop_back();
    out.back().second = end;
  }
  return out;
}

/// Cycles through a shuffled order of rows, handing out fixed-size slices.
class Cycler {
 public:
  Cycler(std::size_t n, Rng& rng) : order_(n) {
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(order_));
  }

  std::vector<std::size_t> next(std::size_t count) {
    std::vector<std::size_t> out;
    if (order_.empty()) return out;
    count = std::min(count, order_.size());
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      out.push_back(order_[pos_]);
      pos_ = (pos_ + 1) % order_.size();
    }
    return out;
  }

 private:
  std::vector<std::size_t> order_;
  std::size_t pos_ = 0;
};

GeneratedSet take_rows(const GeneratedSet& g, const std::vector<std::size_t>& rows) {
  GeneratedSet out;
  out.x = gather_rows(g.x, rows);
  out.y.reserve(rows.size());
  for (std::size_t r : rows) out.y.push_back(g.y[r]);
  if (rows.empty()) out.x = Matrix(0, g.x.cols());
  return out;
}

double validation_metric(const ValidationMetrics& m, const TrainConfig& cfg, double mean_loss) {
  if (cfg.mode == TrainMode::zsl && m.zsl) return *m.zsl;
  if (m.h) return *m.h;
  if (m.tr) return *m.tr;
  return -mean_loss;
}

TrainResult run_training(const DatasetBundle& b, const GeneratedSet* gen, const TrainConfig& cfg) {
  check_trainable(b, cfg);
  if (gen != nullptr) validate_generated(*gen, b);

  const Rng root(cfg.seed);
  Rng init_rng = root.derive(kInit);
  Rng shuffle_rng = root.derive(kShuffle);
  Rng dropout_rng = root.derive(kDropout);
  Rng gen_rng = root.derive(kGenerated);

  EmbedNet net(b.attribute_dim(), b.feature_dim(), cfg.model);
  net.initialize(init_rng);
  TrainResult result{net, {}};
  TrainHistory& history = result.history;
  if (cfg.max_epochs == 0) return result;

  const LossContext ctx{b.layout, cfg.distance, cfg.loss.prob_floor};
  const LabeledPoints train_points = b.points(b.train_idx);
  if (cfg.mode == TrainMode::zsl && b.val_unseen_idx.empty()) {
    history.warnings.emplace_back("zsl mode without val_unseen_idx: selecting on seen accuracy");
  }
  if (cfg.mode == TrainMode::gzsl && b.val_unseen_idx.empty()) {
    history.warnings.emplace_back("no val_unseen_idx: selecting on seen validation accuracy");
  }

  std::vector<Index> order = b.train_idx;
  const auto ranges = batch_ranges(order.size(), cfg.batch_size);
  double best = -std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  std::uint64_t step = 0;

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    shuffle_rng.shuffle(std::span<Index>(order));

    GeneratedSet selected;
    std::optional<Cycler> sel_cycle, pool_cycle;
    EpochRecord rec;
    rec.epoch = epoch;
    if (gen != nullptr) {
      selected = select_generated(*gen, embed_prototypes(net, b.v), ctx, cfg.loss.margin4);
      rec.gen_selected = selected.size();
      rec.gen_total = gen->size();
      sel_cycle.emplace(selected.size(), gen_rng);
      pool_cycle.emplace(gen->size(), gen_rng);
    }

    std::map<std::string, double> sums;
    for (std::size_t bi = 0; bi < ranges.size(); ++bi) {
      const auto [lo, hi] = ranges[bi];
      const LabeledPoints batch =
          b.points(std::span<const Index>(order.data() + lo, hi - lo));
      const ForwardCache cache = forward_layers(net, b.v, /*train_mode=*/true, dropout_rng);
      Matrix dz = Matrix::zeros_like(cache.output);
      LossReport report;
      if (gen == nullptr) {
        report = deterministic_loss(batch, b.v, cache.output, ctx, cfg.loss, &dz);
      } else {
        const GeneratedSet sel_batch = take_rows(selected, sel_cycle->next(cfg.batch_size));
        const GeneratedSet pool_batch = take_rows(*gen, pool_cycle->next(cfg.batch_size));
        report = generated_loss(batch, sel_batch, pool_batch.x, b.v, cache.output, ctx, cfg.loss,
                                &dz);
      }
      if (!std::isfinite(report.total) || !dz.all_finite()) {
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(bi + 1));
      }
      backward_layers(net, cache, dz);
      net.step(cfg.optim, ++step);
      for (const auto& [name, value] : report.per_term) sums[name] += value;
      sums["total"] += report.total;
    }
    for (const auto& [name, value] : sums) {
      rec.losses[name] = value / static_cast<double>(ranges.size());
    }

    const bool evaluate = epoch % cfg.eval_every == 0 || epoch == cfg.max_epochs;
    if (!evaluate) continue;
    const Matrix z = embed_prototypes(net, b.v);
    const ValidationMetrics vm = validation_metrics(z, b, cfg.distance);
    rec.val_ts = vm.ts;
    rec.val_tr = vm.tr;
    rec.val_h = vm.h;
    rec.val_zsl = vm.zsl;
    rec.val_metric = validation_metric(vm, cfg, rec.losses["total"]);
    const MiEstimate mi = mi_estimate(train_points.x, z, ClassSet::target(b.layout), ctx);
    rec.mi_target = mi.regularized;
    rec.mi_target_nats = mi.nats;
    history.records.push_back(rec);

    if (rec.val_metric > best) {
      best = rec.val_metric;
      history.best_epoch = epoch;
      history.best_metric = best;
      result.net = net;
      since_best = 0;
    } else if (++since_best >= cfg.patience && cfg.patience > 0) {
      history.stopped_early = epoch < cfg.max_epochs;
      break;
    }
  }
  return result;
}

}  // namespace

TrainResult train_deterministic(const DatasetBundle& bundle, const TrainConfig& cfg) {
  return run_training(bundle, nullptr, cfg);
}

TrainResult train_with_generated(const DatasetBundle& bundle, const GeneratedSet& gen,
                                 const TrainConfig& cfg) {
  return run_training(bundle, &gen, cfg);
}

GridResult grid_search_lambda1(const DatasetBundle& bundle, const TrainConfig& cfg,
                               const std::vector<double>& grid) {
  if (grid.empty()) throw ValidationError("lambda1 grid is empty");
  GridResult out;
  bool have_best = false;
  double best_metric = 0.0;
  for (double lambda1 : grid) {
    TrainConfig c = cfg;
    c.loss.lambda1 = lambda1;
    const TrainResult r = train_deterministic(bundle, c);
    const double metric = r.history.best_metric;
    out.table.push_back({lambda1, metric, r.history.best_epoch});
    const bool better = !have_best || metric > best_metric ||
                        (metric == best_metric && lambda1 < out.best_lambda1);
    if (better) {
      have_best = true;
      best_metric = metric;
      out.best_lambda1 = lambda1;
    }
  }
  return out;
}

namespace {

void put_optional(std::ostringstream& out, const std::optional<double>& v) {
  out << ',';
  if (v) out << *v;
}

}  // namespace

std::string history_csv(const TrainHistory& h) {
  std::vector<std::string> terms;
  for (const EpochRecord& r : h.records) {
    for (const auto& [name, value] : r.losses) {
      if (std::find(terms.begin(), terms.end(), name) == terms.end()) terms.push_back(name);
    }
  }
  std::sort(terms.begin(), terms.end());
  std::ostringstream out;
  out.precision(17);
  out << "epoch";
  for (const auto& t : terms) out << ',' << t;
  out << ",val_ts,val_tr,val_h,val_zsl,val_metric,mi_target,mi_target_nats,gen_selected,gen_total\n";
  for (const EpochRecord& r : h.records) {
    out << r.epoch;
    for (const auto& t : terms) {
      out << ',';
      if (auto it = r.losses.find(t); it != r.losses.end()) out << it->second;
    }
    put_optional(out, r.val_ts);
    put_optional(out, r.val_tr);
    put_optional(out, r.val_h);
    put_optional(out, r.val_zsl);
    out << ',' << r.val_metric << ',' << r.mi_target << ',' << r.mi_target_nats << ','
        << r.gen_selected << ',' << r.gen_total << '\n';
  }
  return out.str();
}

// ---- checkpoints --------------------------------------------------------------------------

void quantize_parameters(EmbedNet& net) {
  for (ParamBlock* p : net.params()) quantize_to_f32(p->value);
  net.mark_modified();
}

void save_checkpoint(const EmbedNet& net, const TrainConfig& cfg, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::json blocks = nlohmann::json::object();
  for (const ParamBlock* p : net.params()) {
    const std::string file = p->name + ".gzs";
    gzs1::write_f32(dir / file, p->value);
    blocks[p->name] = file;
  }
  const nlohmann::json doc = {
      {"format", "GZS1-checkpoint"},
      {"version", 1},
      {"dims", {{"Q", net.input_dim()}, {"hidden", net.hidden_dim()}, {"P", net.output_dim()}}},
      {"blocks", blocks},
      {"config", nlohmann::json::parse(config_to_json(cfg))}};
  std::ofstream out(dir / "checkpoint.json", std::ios::trunc);
  if (!out) throw FormatError((dir / "checkpoint.json").string() + ": cannot open for writing");
  out << doc.dump(2) << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& dir) {
  const auto path = dir / "checkpoint.json";
  std::ifstream in(path);
  if (!in) throw FormatError(path.string() + ": cannot open");
  nlohmann::json doc;
  std::size_t q = 0, hidden = 0, p_dim = 0;
  try {
    doc = nlohmann::json::parse(in);
    if (doc.at("format").get<std::string>() != "GZS1-checkpoint" || doc.at("version").get<int>() != 1) {
      throw FormatError(path.string() + ": unsupported checkpoint format");
    }
    const auto& dims = doc.at("dims");
    q = dims.at("Q").get<std::size_t>();
    hidden = dims.at("hidden").get<std::size_t>();
    p_dim = dims.at("P").get<std::size_t>();
    if (!doc.at("blocks").is_object() || !doc.at("config").is_object()) {
      throw FormatError(path.string() + ": 'blocks' and 'config' must be objects");
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  TrainConfig cfg = resolve_config(doc.at("config").dump());
  cfg.model.hidden = hidden;
  EmbedNet net(q, p_dim, cfg.model);
  for (ParamBlock* p : net.params()) {
    const auto& blocks = doc.at("blocks");
    if (!blocks.contains(p->name) || !blocks.at(p->name).is_string()) {
      throw FormatError(path.string() + ": missing block '" + p->name + "'");
    }
    const auto file = dir / blocks.at(p->name).get<std::string>();
    Matrix value = gzs1::read_f32(file);
    if (!value.same_shape(p->value)) {
      throw FormatError(file.string() + ": expected " + p->value.shape_string() + ", file holds " +
                        value.shape_string());
    }
    p->value = std::move(value);
  }
  net.mark_modified();
  return {std::move(net), cfg};
}

}  // namespace pvzsl

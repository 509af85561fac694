// Copyright 2026 The pvzsl Authors.
// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pvzsl/data/bundle.hpp"
#include "pvzsl/data/gzs1.hpp"
#include "pvzsl/eval/metrics.hpp"
#include "pvzsl/losses/losses.hpp"
#include "pvzsl/ndcore/errors.hpp"
#include "pvzsl/train/config.hpp"
#include "pvzsl/train/train.hpp"

namespace pvzsl::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + p.string());
}

fs::path require_out(const RunSpec& spec) {
  if (spec.output_dir.empty()) throw ValidationError(spec.command + ": --out is required");
  fs::create_directories(spec.output_dir);
  return spec.output_dir;
}

TrainConfig resolved_config(const RunSpec& spec) {
  const std::string text = spec.config_path ? read_text(*spec.config_path) : std::string();
  return resolve_config(text, spec.overrides);
}

json synth_json(const SynthConfig& c) {
  return {{"seed", c.seed},
          {"num_source", c.num_source},
          {"num_target", c.num_target},
          {"attribute_dim", c.attribute_dim},
          {"feature_dim", c.feature_dim},
          {"n_per_class", c.n_per_class},
          {"noise_sigma", c.noise_sigma},
          {"projection_scale", c.projection_scale},
          {"mixing_concentration", c.mixing_concentration},
          {"val_unseen_frac", c.val_unseen_frac}};
}

/// run.json: everything needed to repeat the run.
void write_run_json(const fs::path& dir, const RunSpec& spec, const json& config,
                    const json& extra = json::object()) {
  json j = {{"tool", "pvzsl"}, {"version", kVersion}, {"command", spec.command}};
  json inputs = json::object();
  if (!spec.data_dir.empty()) inputs["data"] = spec.data_dir;
  if (!spec.checkpoint_dir.empty()) inputs["checkpoint"] = spec.checkpoint_dir;
  if (!spec.gen_dir.empty()) inputs["generated"] = spec.gen_dir;
  if (spec.config_path) inputs["config_file"] = *spec.config_path;
  j["inputs"] = inputs;
  json ov = json::array();
  for (const auto& [k, v] : spec.overrides) ov.push_back(k + "=" + v);
  j["overrides"] = ov;
  j["config"] = config;
  for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
  write_text(dir / "run.json", j.dump(2) + "\n");
}

DatasetBundle load_data(const RunSpec& spec) {
  if (spec.data_dir.empty()) throw ValidationError(spec.command + ": --data is required");
  return load_bundle(spec.data_dir);
}

void write_eval_outputs(const fs::path& dir, const EmbedNet& net, const DatasetBundle& b,
                        const TrainConfig& cfg, std::size_t bins, std::ostream& out) {
  const EvalReport report = gzsl_report(net, b, cfg.distance);
  const Diagnostics diag = compute_diagnostics(net, b, cfg.distance);
  write_text(dir / "report.json", report_to_json(report, &diag));
  const double lim = std::log(2.0);
  write_text(dir / "entropy_gaps.csv", histogram_csv(diag.entropy_gaps, bins, -lim, lim));
  out << "ts=" << report.ts << " tr=" << report.tr << " H=" << report.h;
  if (report.zsl) out << " zsl=" << *report.zsl;
  out << "\n";
}

GeneratedSet read_raw_generated(const fs::path& dir) {
  GeneratedSet g;
  g.x = gzs1::read_f32(dir / "X.gzs");
  const auto labels = gzs1::read_u32(dir / "y.gzs");
  g.y.assign(labels.begin(), labels.end());
  if (g.y.size() != g.x.rows()) {
    throw FormatError("generated set: X.gzs has " + std::to_string(g.x.rows()) + " rows, y.gzs " +
                      std::to_string(g.y.size()) + " labels");
  }
  return g;
}

int cmd_synth(const RunSpec& spec, std::ostream& out) {
  const fs::path dir = require_out(spec);
  const SynthResult s = synth_benchmark(spec.synth);
  const PreprocessMode mode = parse_preprocess_mode(spec.preprocess);
  save_bundle(preprocess_features(s.bundle, mode), dir);
  json extra = {{"synth", synth_json(spec.synth)}, {"preprocess", spec.preprocess}};
  if (spec.gen_kind) {
    const GeneratedKind kind = parse_generated_kind(*spec.gen_kind);
    const std::uint64_t seed = spec.gen_seed.value_or(spec.synth.seed + 1000);
    save_generated(synth_generated(s, kind, spec.gen_per_class, seed), dir / "generated");
    extra["generated"] = {{"kind", *spec.gen_kind}, {"per_class", spec.gen_per_class}, {"seed", seed}};
  }
  write_run_json(dir, spec, nullptr, extra);
  out << "wrote " << dir.string() << " N=" << s.bundle.num_points() << "\n";
  return kExitOk;
}

int cmd_train(const RunSpec& spec, bool with_gen, std::ostream& out) {
  const TrainConfig cfg = resolved_config(spec);
  const fs::path dir = require_out(spec);
  const DatasetBundle b = load_data(spec);
  if (with_gen && spec.gen_dir.empty()) throw ValidationError("train-gen: --gen is required");
  TrainResult r = with_gen ? train_with_generated(b, load_generated(spec.gen_dir, b), cfg)
                           : train_deterministic(b, cfg);
  // Evaluate what the checkpoint will hold so a later `eval` reproduces the report exactly.
  quantize_parameters(r.net);
  save_checkpoint(r.net, cfg, dir / "checkpoint");
  write_text(dir / "history.csv", history_csv(r.history));
  for (const auto& w : r.history.warnings) out << "warning: " << w << "\n";
  write_eval_outputs(dir, r.net, b, cfg, spec.hist_bins, out);
  write_run_json(dir, spec, json::parse(config_to_json(cfg)),
                 {{"best_epoch", r.history.best_epoch}, {"stopped_early", r.history.stopped_early}});
  return kExitOk;
}

int cmd_eval(const RunSpec& spec, std::ostream& out) {
  if (spec.checkpoint_dir.empty()) throw ValidationError("eval: --checkpoint is required");
  const fs::path dir = require_out(spec);
  const Checkpoint ck = load_checkpoint(spec.checkpoint_dir);
  const DatasetBundle b = load_data(spec);
  write_eval_outputs(dir, ck.net, b, ck.config, spec.hist_bins, out);
  write_run_json(dir, spec, json::parse(config_to_json(ck.config)));
  return kExitOk;
}

int cmd_grid(const RunSpec& spec, std::ostream& out) {
  const TrainConfig cfg = resolved_config(spec);
  const fs::path dir = require_out(spec);
  const DatasetBundle b = load_data(spec);
  const std::vector<double> grid = spec.grid.empty() ? kDefaultLambda1Grid : spec.grid;
  const GridResult g = grid_search_lambda1(b, cfg, grid);
  std::ostringstream csv;
  csv.precision(17);
  csv << "lambda1,val_metric,best_epoch\n";
  for (const auto& row : g.table) csv << row.lambda1 << "," << row.val_metric << "," << row.best_epoch << "\n";
  write_text(dir / "grid.csv", csv.str());
  write_run_json(dir, spec, json::parse(config_to_json(cfg)),
                 {{"grid", grid}, {"best_lambda1", g.best_lambda1}});
  out << "best lambda1=" << g.best_lambda1 << "\n";
  return kExitOk;
}

int cmd_select(const RunSpec& spec, std::ostream& out) {
  if (spec.checkpoint_dir.empty()) throw ValidationError("select: --checkpoint is required");
  if (spec.gen_dir.empty()) throw ValidationError("select: --gen is required");
  const fs::path dir = require_out(spec);
  const Checkpoint ck = load_checkpoint(spec.checkpoint_dir);
  const DatasetBundle b = load_data(spec);
  const GeneratedSet raw = read_raw_generated(spec.gen_dir);
  GeneratedSet scaled{apply_preprocessing(raw.x, b.preprocessing), raw.y};
  validate_generated(scaled, b);
  const double margin4 = spec.margin4.value_or(ck.config.loss.margin4);
  const LossContext ctx{b.layout, ck.config.distance, ck.config.loss.prob_floor};
  const auto rows = selected_rows(scaled.x, embed_prototypes(ck.net, b.v), ctx, margin4);
  GeneratedSet kept;
  kept.x = gather_rows(raw.x, rows);
  for (std::size_t r : rows) kept.y.push_back(raw.y[r]);
  save_generated(kept, dir / "selected");
  const json counts = {{"total", raw.size()},
                       {"kept", kept.size()},
                       {"rejected", raw.size() - kept.size()},
                       {"margin4", margin4}};
  write_text(dir / "select.json", counts.dump(2) + "\n");
  write_run_json(dir, spec, json::parse(config_to_json(ck.config)), {{"margin4", margin4}});
  out << "kept " << kept.size() << " of " << raw.size() << " (rejected " << raw.size() - kept.size()
      << ")\n";
  return kExitOk;
}

int cmd_inspect(const RunSpec& spec, std::ostream& out) {
  const fs::path p = spec.inspect_path;
  if (fs::exists(p / "checkpoint.json")) {
    const Checkpoint ck = load_checkpoint(p);
    out << "checkpoint Q=" << ck.net.input_dim() << " hidden=" << ck.net.hidden_dim()
        << " P=" << ck.net.output_dim() << "\n";
    return kExitOk;
  }
  const ManifestDims d = read_manifest_dims(p);
  out << "N=" << d.n << " P=" << d.p << " Q=" << d.q << " S=" << d.s << " T=" << d.t << "\n";
  const json manifest = json::parse(read_text(p / "manifest.json"));
  out << "preprocessing=" << manifest.at("preprocessing").at("mode").get<std::string>() << "\n";
  if (!spec.output_dir.empty()) write_run_json(require_out(spec), spec, nullptr);
  return kExitOk;
}

}  // namespace

int run(const RunSpec& spec, std::ostream& out, std::ostream& err) {
  try {
    if (spec.command == "synth") return cmd_synth(spec, out);
    if (spec.command == "train") return cmd_train(spec, false, out);
    if (spec.command == "train-gen") return cmd_train(spec, true, out);
    if (spec.command == "eval") return cmd_eval(spec, out);
    if (spec.command == "grid") return cmd_grid(spec, out);
    if (spec.command == "select") return cmd_select(spec, out);
    if (spec.command == "inspect") return cmd_inspect(spec, out);
    err << "error: unknown command '" << spec.command << "'\n";
    return kExitValidation;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const DimensionError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

namespace {

std::pair<std::string, std::string> split_override(const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw CLI::ValidationError("--set", "expected key=value, got '" + kv + "'");
  }
  return {kv.substr(0, eq), kv.substr(eq + 1)};
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Prototype probability-vector models for generalized zero-shot learning", "pvzsl"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", kVersion);

  RunSpec spec;
  std::vector<std::string> sets;
  std::string config_path;

  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file (partial configs are merged into the defaults)")
        ->check(CLI::ExistingFile);
    sub->add_option("--set", sets, "Config override as dot.path=value (repeatable)");
  };
  auto add_out = [&](CLI::App* sub, bool required) {
    auto* o = sub->add_option("--out", spec.output_dir, "Output directory");
    if (required) o->required();
  };

  auto* synth = app.add_subcommand("synth", "Write the seeded synthetic benchmark bundle");
  synth->add_option("--seed", spec.synth.seed, "Generator seed")->capture_default_str();
  synth->add_option("--sources", spec.synth.num_source, "Source classes")->capture_default_str();
  synth->add_option("--targets", spec.synth.num_target, "Target classes")->capture_default_str();
  synth->add_option("--attr-dim", spec.synth.attribute_dim, "Attribute dimension Q")->capture_default_str();
  synth->add_option("--feature-dim", spec.synth.feature_dim, "Feature dimension P")->capture_default_str();
  synth->add_option("--per-class", spec.synth.n_per_class, "Points per class")->capture_default_str();
  synth->add_option("--noise", spec.synth.noise_sigma, "Per-dimension noise sigma")->capture_default_str();
  synth->add_option("--projection-scale", spec.synth.projection_scale, "Scale of the attribute map")
      ->capture_default_str();
  synth->add_option("--mixing-concentration", spec.synth.mixing_concentration,
                    "Dirichlet parameter of the target mixtures")
      ->capture_default_str();
  synth->add_option("--val-unseen-frac", spec.synth.val_unseen_frac,
                    "Fraction of each target class held out for validation")
      ->capture_default_str();
  synth->add_option("--preprocess", spec.preprocess, "Feature preprocessing: none or max_norm_scale")
      ->capture_default_str()
      ->check(CLI::IsMember({"none", "max_norm_scale"}));
  synth->add_option("--gen", spec.gen_kind, "Also write a generated target set: oracle or noise")
      ->check(CLI::IsMember({"oracle", "noise"}));
  synth->add_option("--gen-per-class", spec.gen_per_class, "Generated points per target class")
      ->capture_default_str();
  synth->add_option("--gen-seed", spec.gen_seed, "Seed of the generated set (default seed + 1000)");
  add_out(synth, true);

  auto* train = app.add_subcommand("train", "Train on a bundle with the deterministic objective");
  auto* train_gen = app.add_subcommand("train-gen", "Train with an additional generated target set");
  for (auto* sub : {train, train_gen}) {
    sub->add_option("--data", spec.data_dir, "Bundle directory")->required();
    add_config(sub);
    add_out(sub, true);
  }
  train_gen->add_option("--gen", spec.gen_dir, "Generated set directory (X.gzs, y.gzs)")->required();

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a bundle's test splits");
  eval->add_option("--data", spec.data_dir, "Bundle directory")->required();
  eval->add_option("--checkpoint", spec.checkpoint_dir, "Checkpoint directory")->required();
  add_out(eval, true);

  auto* grid = app.add_subcommand("grid", "Pick lambda1 by validation metric");
  grid->add_option("--data", spec.data_dir, "Bundle directory")->required();
  grid->add_option("--grid", spec.grid, "Comma-separated lambda1 values")->delimiter(',');
  add_config(grid);
  add_out(grid, true);

  auto* select = app.add_subcommand("select", "Filter a generated set by target-side entropy");
  select->add_option("--data", spec.data_dir, "Bundle directory")->required();
  select->add_option("--checkpoint", spec.checkpoint_dir, "Checkpoint directory")->required();
  select->add_option("--gen", spec.gen_dir, "Generated set directory")->required();
  select->add_option("--margin4", spec.margin4, "Entropy threshold (default: checkpoint config)");
  add_out(select, true);

  auto* inspect = app.add_subcommand("inspect", "Print the dimensions of a bundle or checkpoint");
  inspect->add_option("path", spec.inspect_path, "Bundle or checkpoint directory")->required();
  add_out(inspect, false);

  for (auto* sub : {train, train_gen, eval}) {
    sub->add_option("--hist-bins", spec.hist_bins, "Bins of the entropy-gap histogram")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
    for (const auto& kv : sets) spec.overrides.push_back(split_override(kv));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    if (code == 0) return kExitOk;
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.back()->help());
    return kExitValidation;
  }
  spec.command = app.get_subcommands().front()->get_name();
  if (!config_path.empty()) spec.config_path = config_path;
  return run(spec, out, err);
}

}  // namespace pvzsl::cli

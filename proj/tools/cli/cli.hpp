// Copyright 2026 The pvzsl Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "pvzsl/data/synth.hpp"

namespace pvzsl::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitValidation = 2;

/// One parsed command line. Fields a command does not use stay empty.
struct RunSpec {
  std::string command;  // synth, train, train-gen, eval, grid, select, inspect
  std::optional<std::string> config_path;
  std::vector<std::pair<std::string, std::string>> overrides;  // dot-path = value
  std::string output_dir;

  std::string data_dir;
  std::string checkpoint_dir;
  std::string gen_dir;
  std::string inspect_path;

  pvzsl::SynthConfig synth;
  std::string preprocess = "none";
  std::optional<std::string> gen_kind;  // oracle or noise
  std::size_t gen_per_class = 300;
  std::optional<std::uint64_t> gen_seed;

  // grid
  std::vector<double> grid;

  // select
  std::optional<double> margin4;

  std::size_t hist_bins = 40;
};

/// Executes a parsed spec, writing artifacts under spec.output_dir. Returns an exit code:
/// 0 success, 2 invalid input (bad config, bad bundle, bad file), 1 any other failure.
int run(const RunSpec& spec, std::ostream& out, std::ostream& err);

/// Parses argv into a RunSpec and runs it. Unknown flags print usage and return 2.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pvzsl::cli

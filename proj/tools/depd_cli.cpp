// Copyright 2026 The depd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "depd/common.hpp"
#include "depd/experiment.hpp"

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;

  depd::CommandOverrides overrides() const {
    depd::CommandOverrides o;
    o.seed = seed;
    if (out) o.out = *out;
    return o;
  }
};

void add_flags(CLI::App* cmd, Flags& flags) {
  cmd->add_option("--config", flags.config, "Experiment configuration (JSON)")->required();
  cmd->add_option("--seed", flags.seed, "Override the run seed");
  cmd->add_option("--out", flags.out, "Override the output path");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decentralized stochastic primal-dual simulator"};
  app.require_subcommand(1);

  Flags run_flags, reference_flags, sweep_flags;
  auto* run = app.add_subcommand("run", "Run one algorithm and write a CSV trace");
  add_flags(run, run_flags);
  auto* reference = app.add_subcommand("reference", "Compute and save a reference solution");
  add_flags(reference, reference_flags);
  auto* sweep = app.add_subcommand("sweep", "Run over several seeds and summarize");
  add_flags(sweep, sweep_flags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      std::cout << depd::cmd_run(run_flags.config, run_flags.overrides()).string() << '\n';
    } else if (reference->parsed()) {
      std::cout << depd::cmd_reference(reference_flags.config, reference_flags.overrides()).string()
                << '\n';
    } else if (sweep->parsed()) {
      const auto result = depd::cmd_sweep(sweep_flags.config, sweep_flags.overrides());
      for (const auto& path : result.traces) std::cout << path.string() << '\n';
    }
  } catch (const depd::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

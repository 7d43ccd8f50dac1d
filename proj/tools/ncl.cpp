// Copyright 2026 The ncl Authors
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

// ncl: command-line driver.
//
//   ncl predict      [--optimize]
//   ncl optimize
//   ncl lrt          (--model PATH | --counterexample) [--tol X]
//   ncl simulate
//   ncl characterize
//
// Common flags: --config PATH, --seed N, --out DIR, --format json|csv|table.
// The report goes to stdout. With --out (or [output] dir) the report and any
// auxiliary files are also written there, each through a temporary file and a
// rename. Exit codes: 0 ok, 2 invalid input, 3 runtime failure or infeasible.

#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ncl/commands.hpp"
#include "ncl/config.hpp"
#include "ncl/errors.hpp"
#include "ncl/lrt_io.hpp"
#include "ncl/lrt_models.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

namespace fs = std::filesystem;

void write_atomically(const fs::path& path, const std::string& contents) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << contents;
    out.flush();
    if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

std::string render(const ncl::Json& report, const std::string& format) {
  if (format == "csv") return ncl::render_csv(report);
  if (format == "table") return ncl::render_table(report);
  return report.dump(2) + "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Single-qubit nonclassicality test: predictions, hidden-variable models, simulation"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string format = "json";
  app.add_option("--config", config_path, "Configuration file (INI)")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Master seed");
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--format", format, "Report format")->check(CLI::IsMember({"json", "csv", "table"}));

  // Options are accepted before or after the subcommand.
  app.fallthrough();

  auto* predict = app.add_subcommand("predict", "Quantum predictions on the configured state");
  bool with_optimizer = false;
  predict->add_flag("--optimize", with_optimizer, "Also run the parameter search");

  app.add_subcommand("optimize", "Search parameters maximizing the violation");

  auto* lrt = app.add_subcommand("lrt", "Moments and dominance check of a hidden-variable model");
  std::string model_path;
  bool counterexample = false;
  double tol = 0.0;
  auto* model_opt = lrt->add_option("--model", model_path, "Model file (JSON)");
  auto* cex_opt = lrt->add_flag("--counterexample", counterexample, "Use the step-function model of the test parameters");
  model_opt->excludes(cex_opt);
  lrt->add_option("--tol", tol, "Dominance tolerance")->check(CLI::NonNegativeNumber);

  app.add_subcommand("simulate", "Monte Carlo test campaign and assembled test quantities");
  app.add_subcommand("characterize", "Source characterization with the polarizers removed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    ncl::RunConfig cfg = config_path.empty() ? ncl::RunConfig{} : ncl::load_config(config_path);
    if (seed) cfg.execution.seed = *seed;
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    cfg.validate();

    ncl::CommandOutput output;
    if (command == "predict") {
      output = ncl::cmd_predict(cfg, with_optimizer);
    } else if (command == "optimize") {
      output = ncl::cmd_optimize(cfg);
    } else if (command == "lrt") {
      if (model_path.empty() && !counterexample) throw ncl::InvalidArgument("lrt needs --model PATH or --counterexample");
      const auto model = counterexample ? ncl::counterexample_model(cfg.test) : ncl::load_model(model_path);
      output = ncl::cmd_lrt(model, tol);
    } else if (command == "simulate") {
      cfg.seed();
      output = ncl::cmd_simulate(cfg);
    } else {
      cfg.seed();
      output = ncl::cmd_characterize(cfg);
    }

    const std::string text = render(output.report, format);
    if (!cfg.output_dir.empty()) {
      const fs::path dir(cfg.output_dir);
      fs::create_directories(dir);
      write_atomically(dir / (command + "_report.json"), output.report.dump(2) + "\n");
      if (format != "json") write_atomically(dir / (command + "_report." + (format == "csv" ? "csv" : "txt")), text);
      for (const auto& [name, contents] : output.files) write_atomically(dir / name, contents);
    }
    std::cout << text;
    return kExitOk;
  } catch (const std::invalid_argument& e) {
    std::cerr << "ncl " << command << ": invalid input: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ncl::DegeneratePrefactorError& e) {
    std::cerr << "ncl " << command << ": invalid input: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "ncl " << command << ": " << e.what() << '\n';
    return kExitRuntime;
  }
}

// geozero: runs named zero-field experiments and writes CSV/SVG artifacts.

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "geozero/acceptance.hpp"
#include "geozero/config.hpp"
#include "geozero/errors.hpp"
#include "geozero/experiments.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Flags {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> realizations;
  bool svg = false;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "INI-style run configuration")->check(CLI::ExistingFile);
  sub->add_option("--out", f.out, "output directory (overrides [output] dir)");
  sub->add_option("--seed", f.seed, "Monte Carlo seed");
  sub->add_option("--realizations", f.realizations, "Monte Carlo realizations")->check(CLI::PositiveNumber);
  sub->add_flag("--svg", f.svg, "also write SVG plots");
}

geozero::RunConfig load(const Flags& f, const std::string& command) {
  geozero::RunConfig c = f.config.empty() ? geozero::RunConfig{} : geozero::parse_config_file(f.config);
  if (!c.experiment.name.empty() && c.experiment.name != command) {
    throw geozero::ConfigError("config names experiment '" + c.experiment.name + "' but the command is '" + command +
                                   "'",
                               0, "experiment.name");
  }
  c.experiment.name = command;
  if (f.out) c.out_dir = *f.out;
  if (f.seed) c.seed = *f.seed;
  if (f.realizations) c.n = *f.realizations;
  if (f.svg) c.svg = true;
  return c;
}

int run_experiment_command(const std::string& name, const Flags& f) {
  const geozero::RunConfig c = load(f, name);
  const geozero::CommandOutput out = geozero::run_command(name, c);
  for (const auto& path : geozero::write_outputs(out, c, c.out_dir)) std::cout << path.string() << '\n';
  if (!out.summary.is_null()) std::cout << out.summary.dump(2) << '\n';
  return 0;
}

int run_accept(const std::vector<int>& only, unsigned threads) {
  geozero::AcceptanceOptions o;
  o.only = only;
  o.threads = threads;
  const auto results = geozero::run_acceptance(o, &std::cout);
  int failed = 0;
  for (const auto& r : results) failed += r.passed ? 0 : 1;
  std::cout << results.size() - failed << "/" << results.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phased geometric control of a zero-field three-level spin"};
  app.set_version_flag("--version", geozero::version_string());
  app.require_subcommand(1);

  Flags flags;
  for (const auto& name : geozero::command_names()) add_common(app.add_subcommand(name, "run the " + name + " experiment"), flags);

  std::vector<int> only;
  unsigned threads = 0;
  CLI::App* accept = app.add_subcommand("accept", "run the acceptance suite");
  accept->add_option("--only", only, "criterion numbers to run")->check(CLI::Range(1, 10));
  accept->add_option("--threads", threads, "worker threads (0 = hardware)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (accept->parsed()) return run_accept(only, threads);
    for (const auto& name : geozero::command_names()) {
      if (app.got_subcommand(name)) return run_experiment_command(name, flags);
    }
  } catch (const geozero::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return 0;
}

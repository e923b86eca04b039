// kcsprng: generate bitstreams, manage the curve table, run the statistical
// battery and the restart demonstration.

#include <cstdlib>
#include <iostream>
#include <string>

#if __has_include(<CLI/CLI.hpp>)
#include <CLI/CLI.hpp>
#else
#include <CLI11.hpp>
#endif

#include "cli.hpp"

namespace {

void add_table_option(CLI::App* app, kcsprng::cli::CliConfig& cfg) {
  app->add_option("--table", cfg.table, "curve table file (default: $KCSPRNG_TABLE)");
}

void add_seed_options(CLI::App* app, kcsprng::cli::CliConfig& cfg) {
  auto* file = app->add_option("--seed-file", cfg.seed_file, "seed file, 72 bytes per (re)seed");
  auto* os = app->add_flag("--seed-os", cfg.seed_os, "seed from OS randomness (not a physical noise source)");
  file->excludes(os);
  os->excludes(file);
}

}  // namespace

int main(int argc, char** argv) {
  using kcsprng::cli::CliConfig;
  CliConfig cfg;

  CLI::App app{"Elliptic-curve masked alternating-step pseudorandom bit generator"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen", "generate a raw bitstream");
  add_table_option(gen, cfg);
  add_seed_options(gen, cfg);
  gen->add_option("--bits", cfg.bits, "number of bits to generate")->required();
  gen->add_option("--out", cfg.out, "output file, - for standard output")->required();
  gen->add_flag("--freeze-curves", cfg.freeze_curves, "testing only: do not mark the curve pair used");
  gen->add_option("--report", cfg.report, "write a JSON report");

  auto* curves = app.add_subcommand("curves", "manage the curve table");
  curves->require_subcommand(1);
  for (const char* action : {"verify", "list", "reset", "init"}) {
    auto* sub = curves->add_subcommand(action);
    add_table_option(sub, cfg);
    if (std::string(action) == "verify") sub->add_option("--report", cfg.report, "write a JSON report");
    if (std::string(action) == "init") {
      sub->description("write a new table: the two reference curves plus synthetic placeholders (testing aid)");
      sub->add_option("--placeholders", cfg.placeholders, "number of synthetic curves")->capture_default_str();
      sub->add_option("--rng-seed", cfg.rng_seed, "seed for the placeholder search")->capture_default_str();
      sub->add_flag("--force", cfg.force, "overwrite an existing file");
    }
  }

  auto* stats = app.add_subcommand("stats", "run the statistical battery on a raw bitstream file");
  stats->add_option("--in", cfg.in, "raw bitstream file (MSB-first)")->required();
  stats->add_option("--tests", cfg.tests, "comma-separated test list")->delimiter(',');
  stats->add_option("--lag", cfg.lag, "autocorrelation lag")->capture_default_str();
  stats->add_option("--block-size", cfg.block_size, "block frequency block size")->capture_default_str();
  stats->add_option("--apen-m", cfg.apen_m, "approximate entropy pattern length")->capture_default_str();
  stats->add_option("--serial-m", cfg.serial_m, "serial test pattern length")->capture_default_str();
  stats->add_option("--report", cfg.report, "write a JSON report");

  auto* restart = app.add_subcommand("restart", "boot repeatedly with one seed and compare output prefixes");
  add_table_option(restart, cfg);
  add_seed_options(restart, cfg);
  restart->add_option("--runs", cfg.runs, "number of boots")->capture_default_str();
  restart->add_option("--prefix", cfg.prefix, "prefix length in bits")->capture_default_str();
  restart->add_flag("--freeze-curves", cfg.freeze_curves, "testing only: do not mark curve pairs used");
  restart->add_option("--report", cfg.report, "write a JSON report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kcsprng::cli::kUsage;
  }

  if (cfg.table.empty())
    if (const char* env = std::getenv("KCSPRNG_TABLE")) cfg.table = env;

  for (auto* sub : app.get_subcommands()) {
    cfg.subcommand = sub->get_name();
    if (cfg.subcommand == "curves") cfg.curves_action = sub->get_subcommands().front()->get_name();
  }
  return kcsprng::cli::dispatch(cfg);
}

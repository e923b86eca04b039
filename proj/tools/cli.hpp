#pragma once

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kcsprng/curvestore.hpp"
#include "kcsprng/error.hpp"
#include "kcsprng/generator.hpp"
#include "kcsprng/restart.hpp"
#include "kcsprng/stats.hpp"

namespace kcsprng::cli {

enum ExitCode : int {
  kOk = 0,
  kTestFailed = 1,
  kUsage = 2,
  kTable = 3,
  kSeed = 4,
  kIo = 5,
};

struct CliConfig {
  std::string subcommand;     // gen, curves, stats, restart
  std::string curves_action;  // verify, list, reset, init
  std::filesystem::path table;
  std::optional<std::filesystem::path> seed_file;
  bool seed_os = false;
  std::filesystem::path out;
  std::filesystem::path in;
  std::optional<std::filesystem::path> report;
  std::size_t bits = 0;
  std::vector<std::string> tests;
  std::size_t lag = 1;
  std::size_t runs = 6;
  std::size_t prefix = 32;
  std::size_t block_size = 128;
  int apen_m = 10;
  int serial_m = 16;
  bool freeze_curves = false;
  // curves init
  std::size_t placeholders = 10;
  std::uint64_t rng_seed = 1;
  bool force = false;
};

inline const std::vector<std::string>& all_stat_tests() {
  static const std::vector<std::string> names{"monobit",     "block_frequency", "runs",    "longest_run",
                                              "approximate_entropy", "serial", "autocorrelation",
                                              "entropy", "serial_correlation"};
  return names;
}

namespace detail {

inline void write_report(const std::optional<std::filesystem::path>& path, const nlohmann::json& j) {
  if (!path) return;
  std::ofstream os(*path, std::ios::trunc);
  if (!os) throw IoError("cannot create report " + path->string());
  os << j.dump(2) << '\n';
  if (!os) throw IoError("write failed for report " + path->string());
}

inline nlohmann::json to_json(const TestReport& r) {
  nlohmann::json j{{"test", r.name}, {"statistic", r.statistic}, {"passed", r.passed}};
  j["p_value"] = r.p_value ? nlohmann::json(*r.p_value) : nlohmann::json(nullptr);
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [k, v] : r.parameters) params[k] = v;
  j["parameters"] = params;
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

inline std::shared_ptr<EntropySource> open_seed_source(const CliConfig& cfg) {
  if (cfg.seed_os) return std::make_shared<OsEntropySource>();
  if (cfg.seed_file) return std::make_shared<SeedFileSource>(*cfg.seed_file);
  throw UsageError("a seed source is required: --seed-file PATH or --seed-os");
}

inline void require_table(const CliConfig& cfg) {
  if (cfg.table.empty()) throw UsageError("no curve table: pass --table PATH or set KCSPRNG_TABLE");
}

}  // namespace detail

inline int cmd_gen(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.bits < 1) throw UsageError("--bits must be at least 1");
  if (cfg.out.empty()) throw UsageError("--out PATH is required (use - for standard output)");
  detail::require_table(cfg);

  auto source = detail::open_seed_source(cfg);
  const std::size_t seeds_needed = (cfg.bits + kReseedInterval - 1) / kReseedInterval;
  if (const auto* file = dynamic_cast<const SeedBufferSource*>(source.get()); file && file->remaining() < seeds_needed)
    throw EntropyError(source->describe() + " holds " + std::to_string(file->remaining()) + " seed(s), " +
                       std::to_string(cfg.bits) + " bits need " + std::to_string(seeds_needed));

  CurveTable table = CurveTable::load(cfg.table);
  KcsPrng gen = KcsPrng::boot(source, table, cfg.freeze_curves ? SelectMode::frozen : SelectMode::rotate);
  table.unlock();
  const auto& sel = *gen.selection();
  if (sel.statuses_reset)
    err << "warning: fewer than two un-used curves were left; all statuses were reset\n";

  std::ofstream file;
  std::ostream* os = &out;
  if (cfg.out != "-") {
    file.open(cfg.out, std::ios::binary | std::ios::trunc);
    if (!file) throw IoError("cannot create " + cfg.out.string());
    os = &file;
  }
  BitWriter writer(*os);
  const auto t0 = std::chrono::steady_clock::now();
  gen.generate(cfg.bits, [&writer](const BitStream& seg) { writer.write(seg); });
  const int pad = writer.finish();
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const double mbps = secs > 0 ? static_cast<double>(cfg.bits) / secs / 1e6 : 0.0;

  err << "curves: " << sel.first.index << ", " << sel.second.index << "\n"
      << "bits: " << cfg.bits << "\n"
      << "pad bits: " << pad << "\n"
      << "seeds consumed: " << gen.seeds_consumed() << "\n"
      << "key space: 2^" << gen.key_space_exponent() << "\n"
      << "throughput: " << std::fixed << std::setprecision(3) << mbps << " Mbps\n";

  detail::write_report(cfg.report, {{"bits", cfg.bits},
                                    {"pad_bits", pad},
                                    {"seeds_consumed", gen.seeds_consumed()},
                                    {"key_space_exponent", gen.key_space_exponent()},
                                    {"curves", {sel.first.index, sel.second.index}},
                                    {"statuses_reset", sel.statuses_reset},
                                    {"seconds", secs},
                                    {"throughput_mbps", mbps}});
  return kOk;
}

inline int cmd_curves(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  detail::require_table(cfg);
  const std::string& action = cfg.curves_action;

  if (action == "init") {
    if (std::filesystem::exists(cfg.table) && !cfg.force)
      throw UsageError(cfg.table.string() + " exists; pass --force to overwrite");
    std::vector<CurveRecord> recs;
    for (const auto& c : reference_curves()) recs.push_back({recs.size(), false, c});
    std::mt19937_64 rng(cfg.rng_seed);
    for (std::size_t i = 0; i < cfg.placeholders; ++i) recs.push_back({recs.size(), false, synthesize_placeholder_curve(rng)});
    CurveTable::in_memory(std::move(recs)).save_as(cfg.table);
    err << "wrote " << 2 + cfg.placeholders << " curves to " << cfg.table.string() << " (" << cfg.placeholders
        << " synthetic placeholders, not vetted)\n";
    return kOk;
  }

  if (action == "verify") {
    CurveTable table = CurveTable::load(cfg.table, {.verify = false, .lock = true});
    bool ok = true;
    nlohmann::json j = nlohmann::json::array();
    for (const auto& r : table.records()) {
      const auto rep = verify_curve(r.curve);
      nlohmann::json checks = nlohmann::json::array();
      for (const auto& c : rep.checks) {
        out << "curve " << r.index << ": " << std::left << std::setw(14) << c.name << ' ' << to_string(c.status);
        if (!c.detail.empty()) out << "  (" << c.detail << ')';
        out << '\n';
        checks.push_back({{"check", c.name}, {"status", std::string(to_string(c.status))}, {"detail", c.detail}});
      }
      if (const auto* bad = rep.first_failure()) {
        ok = false;
        err << "curve " << r.index << " failed check " << bad->name << '\n';
      }
      j.push_back({{"index", r.index}, {"passed", rep.passed()}, {"checks", checks}});
    }
    detail::write_report(cfg.report, j);
    return ok ? kOk : kTable;
  }

  if (action == "list") {
    CurveTable table = CurveTable::load(cfg.table, {.verify = false, .lock = true});
    for (const auto& r : table.records())
      out << r.index << ' ' << (r.used ? 1 : 0) << ' ' << r.curve.p.to_hex() << '\n';
    err << table.unused_count() << " of " << table.size() << " curves un-used\n";
    return kOk;
  }

  if (action == "reset") {
    CurveTable table = CurveTable::load(cfg.table, {.verify = false, .lock = true});
    table.reset_statuses();
    err << "reset " << table.size() << " statuses\n";
    return kOk;
  }

  throw UsageError("unknown curves action '" + action + "'");
}

inline int cmd_stats(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.in.empty()) throw UsageError("--in PATH is required");
  const BitStream s = read_bitstream(cfg.in);
  const std::vector<std::string>& tests = cfg.tests.empty() ? all_stat_tests() : cfg.tests;
  for (const auto& t : tests)
    if (std::find(all_stat_tests().begin(), all_stat_tests().end(), t) == all_stat_tests().end())
      throw UsageError("unknown test '" + t + "'");
  if (s.size() < 100) throw ShortStreamError(cfg.in.string() + ": " + std::to_string(s.size()) + " bits, need at least 100");
  if (s.size() < 1000000) err << "note: " << s.size() << " bits; estimates are weak below 10^6 bits\n";

  std::vector<TestReport> reports;
  nlohmann::json values = nlohmann::json::object();
  for (const auto& t : tests) {
    if (t == "monobit") reports.push_back(monobit(s));
    else if (t == "block_frequency") reports.push_back(block_frequency(s, cfg.block_size));
    else if (t == "runs") reports.push_back(runs_test(s));
    else if (t == "longest_run") reports.push_back(longest_run(s));
    else if (t == "approximate_entropy") reports.push_back(approximate_entropy(s, cfg.apen_m));
    else if (t == "serial") for (auto& r : serial_test(s, cfg.serial_m)) reports.push_back(r);
    else if (t == "autocorrelation") reports.push_back(autocorrelation(s, cfg.lag));
    else if (t == "entropy") {
      const double h = entropy_per_bit(s);
      out << "entropy_per_bit " << std::setprecision(10) << h << '\n';
      values["entropy_per_bit"] = h;
    } else if (t == "serial_correlation") {
      const double c = serial_correlation(s);
      out << "serial_correlation " << std::setprecision(10) << c << '\n';
      values["serial_correlation"] = c;
    }
  }

  bool ok = true;
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : reports) {
    out << std::left << std::setw(20) << r.name << " statistic=" << std::setprecision(10) << r.statistic
        << " p=" << (r.p_value ? std::to_string(*r.p_value) : std::string("n/a")) << ' '
        << (r.passed ? "PASS" : "FAIL");
    if (!r.note.empty()) out << "  (" << r.note << ')';
    out << '\n';
    ok = ok && r.passed;
    j.push_back(detail::to_json(r));
  }
  detail::write_report(cfg.report, {{"bits", s.size()}, {"tests", j}, {"values", values}});
  return ok ? kOk : kTestFailed;
}

inline int cmd_restart(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.seed_os) throw UsageError("restart needs a fixed seed: use --seed-file");
  if (!cfg.seed_file) throw UsageError("--seed-file PATH is required");
  detail::require_table(cfg);
  CurveTable table = CurveTable::load(cfg.table);
  const auto rep =
      restart_test(*cfg.seed_file, table, cfg.runs, cfg.prefix, cfg.freeze_curves ? SelectMode::frozen : SelectMode::rotate);

  nlohmann::json boots = nlohmann::json::array();
  for (std::size_t i = 0; i < rep.boots.size(); ++i) {
    const auto& b = rep.boots[i];
    const std::string bits = rep.prefix_bits <= 256 ? b.prefix.to_string() : b.prefix.slice(0, 256).to_string() + "...";
    out << "run " << i + 1 << "  curves " << b.curve1 << ',' << b.curve2 << "  " << bits << '\n';
    boots.push_back({{"run", i + 1}, {"curves", {b.curve1, b.curve2}}, {"statuses_reset", b.statuses_reset},
                     {"prefix", b.prefix.to_string()}});
  }
  out << "mean pairwise distance: " << std::fixed << std::setprecision(4) << rep.mean_distance_fraction << '\n'
      << "verdict: " << to_string(rep.verdict) << '\n';
  if (rep.verdict == RestartVerdict::rotation_exhausted)
    err << "warning: curve table ran out of un-used curves; a pair was reused\n";

  detail::write_report(cfg.report, {{"runs", cfg.runs},
                                    {"prefix_bits", cfg.prefix},
                                    {"boots", boots},
                                    {"distances", rep.distances},
                                    {"mean_distance_fraction", rep.mean_distance_fraction},
                                    {"all_distinct", rep.all_distinct},
                                    {"verdict", std::string(to_string(rep.verdict))}});
  return rep.failed() ? kTestFailed : kOk;
}

/// Runs one command, mapping library errors to exit codes.
inline int dispatch(const CliConfig& cfg, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  try {
    if (cfg.subcommand == "gen") return cmd_gen(cfg, out, err);
    if (cfg.subcommand == "curves") return cmd_curves(cfg, out, err);
    if (cfg.subcommand == "stats") return cmd_stats(cfg, out, err);
    if (cfg.subcommand == "restart") return cmd_restart(cfg, out, err);
    throw UsageError("unknown subcommand '" + cfg.subcommand + "'");
  } catch (const VerificationError& e) {
    err << "table error: " << e.what() << '\n';
    return kTable;
  } catch (const TableError& e) {
    err << "table error: " << e.what() << '\n';
    return kTable;
  } catch (const EntropyError& e) {
    err << "seed error: " << e.what() << '\n';
    return kSeed;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const ShortStreamError& e) {
    err << "short stream: " << e.what() << '\n';
    return kUsage;
  } catch (const UsageError& e) {
    err << "usage: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
}

}  // namespace kcsprng::cli

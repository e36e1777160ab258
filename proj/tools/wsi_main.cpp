// wsi: drive workloads, judge history files, benchmark the status oracle and
// inspect commit logs.
#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "wsi/bench.hpp"
#include "wsi/errors.hpp"
#include "wsi/history.hpp"
#include "wsi/wal.hpp"
#include "wsi/workload.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

wsi::IsolationLevel level_flag(const std::string& text) {
  auto level = wsi::parse_isolation_level(text);
  if (!level) throw UsageError("--policy must be si or wsi, got '" + text + "'");
  return *level;
}

std::optional<std::size_t> capacity_flag(const std::string& text) {
  if (text == "unbounded") return std::nullopt;
  try {
    std::size_t pos = 0;
    const unsigned long long n = std::stoull(text, &pos);
    if (pos == text.size() && n > 0) return static_cast<std::size_t>(n);
  } catch (const std::exception&) {
  }
  throw UsageError("--capacity must be a positive integer or 'unbounded', got '" + text + "'");
}

std::optional<std::filesystem::path> wal_flag(const std::string& text) {
  if (text.empty() || text == "off") return std::nullopt;
  return std::filesystem::path(text);
}

struct Lines {
  std::vector<std::string> text;
  std::vector<std::size_t> number;  // 1-based line numbers
};

// History file: one history per line; blank lines and '#' comments skipped.
Lines read_history_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw wsi::Error("cannot open " + path);
  Lines lines;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    lines.text.push_back(line);
    lines.number.push_back(n);
  }
  return lines;
}

std::vector<wsi::history::History> parse_all(const std::string& path, const Lines& lines) {
  std::vector<wsi::history::History> out;
  for (std::size_t i = 0; i < lines.text.size(); ++i) {
    try {
      out.push_back(wsi::history::parse(lines.text[i]));
    } catch (const wsi::ParseError& e) {
      std::ostringstream msg;
      msg << path << ":" << lines.number[i] << ":" << e.column() << ": " << e.what();
      throw wsi::Error(msg.str());
    }
  }
  return out;
}

const char* decision_name(wsi::history::Decision d) {
  switch (d) {
    case wsi::history::Decision::kCommitted: return "committed";
    case wsi::history::Decision::kAborted: return "aborted";
    case wsi::history::Decision::kClientAbort: return "client-abort";
    case wsi::history::Decision::kUnfinished: return "unfinished";
  }
  return "?";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Snapshot and write-snapshot isolation toolkit"};
  app.require_subcommand(1, 1);

  // run
  auto* run = app.add_subcommand("run", "Execute a workload and print one CSV row");
  std::string run_policy = "wsi", run_dist, run_mix, run_wal = "off", run_capacity = "unbounded";
  std::string run_config;
  std::optional<std::uint32_t> run_clients, run_ops_max;
  std::optional<std::uint64_t> run_txns, run_keys, run_seed;
  std::optional<double> run_read_fraction;
  bool run_no_yield = false, run_no_header = false;
  run->add_option("--config", run_config, "key=value workload file; flags override it");
  run->add_option("--policy", run_policy, "si | wsi");
  run->add_option("--dist", run_dist, "uniform | zipfian | zipfian-latest");
  run->add_option("--mix", run_mix, "complex | mixed");
  run->add_option("--clients", run_clients);
  run->add_option("--txns", run_txns);
  run->add_option("--keys", run_keys);
  run->add_option("--seed", run_seed);
  run->add_option("--ops-max", run_ops_max, "maximum operations per transaction");
  run->add_option("--read-fraction", run_read_fraction, "read share inside complex transactions");
  run->add_option("--wal", run_wal, "log file path or 'off'");
  run->add_option("--capacity", run_capacity, "rows tracked by the oracle or 'unbounded'");
  run->add_flag("--no-yield", run_no_yield, "do not yield between operations");
  run->add_flag("--no-header", run_no_header, "omit the CSV header");

  // check
  auto* check = app.add_subcommand("check", "Judge every history in a file under SI, WSI and serializability");
  std::string check_path;
  check->add_option("path", check_path)->required();

  // replay
  auto* replay = app.add_subcommand("replay", "Replay every history in a file through the engine");
  std::string replay_path, replay_policy = "wsi";
  replay->add_option("path", replay_path)->required();
  replay->add_option("--policy", replay_policy, "si | wsi");

  // bench-oracle
  auto* bench = app.add_subcommand("bench-oracle", "Drive the status oracle with synthetic commit requests");
  std::vector<std::string> bench_policies{"si", "wsi"};
  std::vector<std::uint32_t> bench_clients{1};
  wsi::bench::BenchSpec bench_spec;
  std::string bench_capacity = "unbounded", bench_wal = "off";
  bool bench_no_header = false;
  bench->add_option("--policy", bench_policies, "si | wsi, comma separated")->delimiter(',');
  bench->add_option("--clients", bench_clients, "client counts, comma separated")->delimiter(',');
  bench->add_option("--requests", bench_spec.requests, "commit requests per row");
  bench->add_option("--rows-per-txn", bench_spec.rows_per_txn);
  bench->add_option("--outstanding", bench_spec.outstanding, "open transactions per client");
  bench->add_option("--keys", bench_spec.keys);
  bench->add_option("--seed", bench_spec.seed);
  bench->add_option("--capacity", bench_capacity, "rows tracked by the oracle or 'unbounded'");
  bench->add_option("--wal", bench_wal, "log file path or 'off'");
  bench->add_flag("--no-header", bench_no_header, "omit the CSV header");

  // recover
  auto* recover = app.add_subcommand("recover", "Replay a commit log and summarize the recovered state");
  std::string recover_path, recover_capacity = "unbounded";
  recover->add_option("path", recover_path)->required();
  recover->add_option("--capacity", recover_capacity);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*run) {
      wsi::workload::WorkloadSpec spec;
      wsi::workload::RunOptions options;
      try {
        if (!run_config.empty()) spec = wsi::workload::load_spec_file(run_config);
        if (!run_dist.empty()) {
          auto d = wsi::workload::parse_distribution(run_dist);
          if (!d) throw UsageError("unknown --dist '" + run_dist + "'");
          spec.distribution = *d;
        }
        if (!run_mix.empty()) {
          auto m = wsi::workload::parse_mix(run_mix);
          if (!m) throw UsageError("unknown --mix '" + run_mix + "'");
          spec.mix = *m;
        }
        if (run_clients) spec.client_count = *run_clients;
        if (run_txns) spec.txn_count = *run_txns;
        if (run_keys) spec.key_space = *run_keys;
        if (run_seed) spec.seed = *run_seed;
        if (run_ops_max) spec.ops_per_txn_max = *run_ops_max;
        if (run_read_fraction) spec.read_fraction = *run_read_fraction;
        if (run_no_yield) spec.yield_between_ops = false;
        wsi::workload::validate(spec);
        options.level = level_flag(run_policy);
        options.capacity = capacity_flag(run_capacity);
        options.wal_path = wal_flag(run_wal);
      } catch (const wsi::PreconditionError& e) {
        throw UsageError(e.what());
      }
      const auto metrics = wsi::workload::run(spec, options);
      if (!metrics.valid) {
        std::cerr << "wsi run: " << metrics.error << "\n";
        return kFailure;
      }
      if (!run_no_header) std::cout << wsi::workload::kRunCsvHeader << "\n";
      std::cout << wsi::workload::csv_row(metrics) << "\n";
      return kOk;
    }

    if (*check) {
      const Lines lines = read_history_file(check_path);
      for (const auto& h : parse_all(check_path, lines)) {
        std::cout << wsi::history::check_report(h) << "\n";
      }
      return kOk;
    }

    if (*replay) {
      const auto level = level_flag(replay_policy);
      const Lines lines = read_history_file(replay_path);
      for (const auto& h : parse_all(replay_path, lines)) {
        const auto result = wsi::history::replay_policy(h, level);
        std::string sep;
        for (const auto& [txn, decision] : result.decisions) {
          std::cout << sep << "txn" << txn << "=" << decision_name(decision);
          sep = " ";
        }
        std::cout << "\n";
      }
      return kOk;
    }

    if (*bench) {
      std::vector<wsi::IsolationLevel> levels;
      for (const auto& p : bench_policies) levels.push_back(level_flag(p));
      bench_spec.capacity = capacity_flag(bench_capacity);
      bench_spec.wal_path = wal_flag(bench_wal);
      if (bench_spec.keys == 0) throw UsageError("--keys must be positive");
      for (auto c : bench_clients) {
        if (c == 0) throw UsageError("--clients must be positive");
      }
      if (!bench_no_header) std::cout << wsi::bench::kBenchCsvHeader << "\n";
      if (bench_spec.requests == 0) return kOk;
      for (auto clients : bench_clients) {
        for (auto level : levels) {
          wsi::bench::BenchSpec s = bench_spec;
          s.level = level;
          s.clients = clients;
          if (s.wal_path) std::filesystem::remove(*s.wal_path);
          std::cout << wsi::bench::csv_row(wsi::bench::run_bench(s)) << std::endl;
        }
      }
      return kOk;
    }

    if (*recover) {
      const auto capacity = capacity_flag(recover_capacity);
      const auto contents = wsi::read_log(recover_path);
      const auto state = wsi::replay(contents.records, capacity);
      std::cout << "records=" << contents.records.size() << "\n"
                << "torn_tail=" << (contents.torn_tail ? "yes" : "no") << "\n"
                << "committed=" << state.table.commit_records().size() << "\n"
                << "aborted=" << state.table.aborted().size() << "\n"
                << "tracked_rows=" << state.table.tracked_rows() << "\n"
                << "t_max=" << state.table.t_max() << "\n"
                << "reserved_upto=" << state.reserved_upto << "\n";
      return kOk;
    }
  } catch (const UsageError& e) {
    std::cerr << "wsi: " << e.what() << "\n\n" << app.help();
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "wsi: " << e.what() << "\n";
    return kFailure;
  }
  return kUsage;
}

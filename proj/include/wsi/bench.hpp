#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "wsi/types.hpp"
#include "wsi/wal.hpp"
#include "wsi/workload.hpp"

namespace wsi::bench {

// Synthetic load on the status oracle alone: no version store, zero
// execution time. Each client keeps `outstanding` transactions open and as
// many decisions in flight; every step submits the commit request of the
// oldest open transaction and begins a new one. Latency runs from submission
// until the decision is durable.
struct BenchSpec {
  IsolationLevel level = IsolationLevel::kWriteSnapshot;
  std::uint32_t clients = 1;
  std::uint64_t requests = 100'000;  // total, split across clients
  std::uint32_t rows_per_txn = 20;   // each read or written with equal odds
  std::uint32_t outstanding = 100;
  std::optional<std::size_t> capacity;
  std::uint64_t keys = 20'000'000;
  std::uint64_t seed = 1;
  std::optional<std::filesystem::path> wal_path;
  BatchPolicy batch;
};

struct BenchResult {
  IsolationLevel level = IsolationLevel::kWriteSnapshot;
  std::uint32_t clients = 1;
  std::uint64_t decisions = 0;
  std::uint64_t committed = 0;
  std::uint64_t aborted = 0;
  std::uint64_t pessimistic_aborts = 0;
  double wall_seconds = 0.0;
  workload::LatencyHistogram latency;

  double decisions_per_sec() const;
};

BenchResult run_bench(const BenchSpec& spec);

inline constexpr const char* kBenchCsvHeader =
    "policy,clients,decisions_per_sec,p50_us,p99_us,committed,aborted,"
    "pessimistic_aborts";
std::string csv_row(const BenchResult& r);

}  // namespace wsi::bench

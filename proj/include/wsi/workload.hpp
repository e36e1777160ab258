#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "wsi/generators.hpp"
#include "wsi/types.hpp"

namespace wsi::workload {

enum class Mix : std::uint8_t { kComplex, kMixed };
enum class Distribution : std::uint8_t { kUniform, kZipfian, kZipfianLatest };

const char* to_string(Mix mix);
const char* to_string(Distribution dist);
std::optional<Mix> parse_mix(const std::string& text);
std::optional<Distribution> parse_distribution(const std::string& text);

struct WorkloadSpec {
  std::uint64_t key_space = 100'000;
  Mix mix = Mix::kMixed;
  Distribution distribution = Distribution::kUniform;
  double zipf_constant = 0.99;
  std::uint32_t ops_per_txn_max = 20;
  double read_fraction = 0.5;  // within complex transactions
  std::uint64_t seed = 1;
  std::uint64_t txn_count = 10'000;
  std::uint32_t client_count = 1;
  // Yield the CPU after every operation so concurrent clients interleave
  // even when they share a core, the way real store round trips would.
  bool yield_between_ops = true;
};

// Throws PreconditionError describing the first invalid field.
void validate(const WorkloadSpec& spec);

// key=value lines; '#' starts a comment. Unknown keys are errors.
WorkloadSpec load_spec(std::istream& in, WorkloadSpec base = {});
WorkloadSpec load_spec_file(const std::filesystem::path& path,
                            WorkloadSpec base = {});

enum class TxnKind : std::uint8_t { kReadOnly, kComplex };

struct Operation {
  bool write = false;
  std::uint64_t key = 0;
  bool operator==(const Operation&) const = default;
};

struct Script {
  TxnKind kind = TxnKind::kComplex;
  std::vector<Operation> ops;
  bool operator==(const Script&) const = default;
};

RowId row_name(std::uint64_t key);

// Draws keys from the spec's distribution.
class KeyChooser {
 public:
  explicit KeyChooser(const WorkloadSpec& spec);
  std::uint64_t next(Rng& rng) const;

 private:
  Distribution dist_;
  std::uint64_t keys_;
  std::optional<ScrambledZipfianGenerator> scrambled_;
  std::optional<SkewedLatestGenerator> latest_;
};

// Script number `index` of the run. Depends only on (spec, index), so runs
// with any number of clients execute the same scripts.
Script generate_txn(const WorkloadSpec& spec, const KeyChooser& keys,
                    std::uint64_t index);
Script generate_txn(const WorkloadSpec& spec, std::uint64_t index);

// Log-bucketed latency histogram in microseconds.
class LatencyHistogram {
 public:
  void record(std::chrono::nanoseconds d);
  void merge(const LatencyHistogram& other);
  std::uint64_t count() const { return count_; }
  // Upper bound of the bucket holding quantile q (0 < q <= 1), in us.
  double percentile_us(double q) const;
  double mean_us() const;

 private:
  static constexpr std::size_t kBuckets = 512;
  static std::size_t bucket_of(double us);
  static double bucket_upper(std::size_t b);
  std::array<std::uint64_t, kBuckets> buckets_{};
  std::uint64_t count_ = 0;
  double sum_us_ = 0.0;
};

struct RunMetrics {
  IsolationLevel level = IsolationLevel::kWriteSnapshot;
  Distribution distribution = Distribution::kUniform;
  Mix mix = Mix::kMixed;
  std::uint32_t clients = 1;

  std::uint64_t committed = 0;
  std::uint64_t aborted = 0;
  std::uint64_t read_only_committed = 0;
  std::uint64_t read_only_aborted = 0;
  std::uint64_t pessimistic_aborts = 0;
  double wall_seconds = 0.0;

  LatencyHistogram begin_latency;
  LatencyHistogram read_latency;
  LatencyHistogram write_latency;
  LatencyHistogram commit_latency;

  bool valid = true;
  std::string error;

  double abort_rate() const;
  double throughput() const;  // committed per wall second
};

struct RunOptions {
  IsolationLevel level = IsolationLevel::kWriteSnapshot;
  std::optional<std::size_t> capacity;
  std::optional<std::filesystem::path> wal_path;
  // Collect shadowed versions every this many finished transactions; 0 never.
  std::uint64_t gc_interval = 1024;
};

// Executes spec.txn_count scripts over spec.client_count threads against a
// fresh engine. Aborts are final; nothing is retried.
RunMetrics run(const WorkloadSpec& spec, const RunOptions& options);

inline constexpr const char* kRunCsvHeader =
    "policy,distribution,mix,clients,committed,aborted,abort_rate,"
    "pessimistic_aborts,throughput";
std::string csv_row(const RunMetrics& m);

}  // namespace wsi::workload

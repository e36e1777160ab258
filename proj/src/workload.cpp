#include "wsi/workload.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "wsi/errors.hpp"
#include "wsi/txn.hpp"

namespace wsi::workload {

namespace {

using Clock = std::chrono::steady_clock;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  std::istringstream in(value);
  T out{};
  if (!(in >> out) || !in.eof()) {
    throw PreconditionError("config: bad value for " + key + ": '" + value + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "on" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "off" || value == "no") return false;
  throw PreconditionError("config: bad value for " + key + ": '" + value + "'");
}

Rng script_rng(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

std::string encode_value(Timestamp writer) {
  std::string v(8, '\0');
  for (int i = 0; i < 8; ++i) v[i] = static_cast<char>(writer.value >> (8 * i));
  return v;
}

}  // namespace

const char* to_string(Mix mix) {
  return mix == Mix::kComplex ? "complex" : "mixed";
}

const char* to_string(Distribution dist) {
  switch (dist) {
    case Distribution::kUniform: return "uniform";
    case Distribution::kZipfian: return "zipfian";
    case Distribution::kZipfianLatest: return "zipfian-latest";
  }
  return "?";
}

std::optional<Mix> parse_mix(const std::string& text) {
  if (text == "complex") return Mix::kComplex;
  if (text == "mixed") return Mix::kMixed;
  return std::nullopt;
}

std::optional<Distribution> parse_distribution(const std::string& text) {
  if (text == "uniform") return Distribution::kUniform;
  if (text == "zipfian") return Distribution::kZipfian;
  if (text == "zipfian-latest" || text == "zipfianLatest" || text == "latest") {
    return Distribution::kZipfianLatest;
  }
  return std::nullopt;
}

void validate(const WorkloadSpec& spec) {
  if (spec.key_space == 0) throw PreconditionError("workload: key space must be positive");
  if (spec.client_count == 0) throw PreconditionError("workload: need at least one client");
  if (!(spec.zipf_constant > 0.0) || spec.zipf_constant == 1.0) {
    throw PreconditionError("workload: zipf constant must be positive and not 1");
  }
  if (spec.read_fraction < 0.0 || spec.read_fraction > 1.0) {
    throw PreconditionError("workload: read fraction must be in [0, 1]");
  }
}

WorkloadSpec load_spec(std::istream& in, WorkloadSpec spec) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw PreconditionError("config: line " + std::to_string(line_no) +
                              ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "keys" || key == "key_space") {
      spec.key_space = parse_number<std::uint64_t>(key, value);
    } else if (key == "mix") {
      auto mix = parse_mix(value);
      if (!mix) throw PreconditionError("config: unknown mix '" + value + "'");
      spec.mix = *mix;
    } else if (key == "dist" || key == "distribution") {
      auto dist = parse_distribution(value);
      if (!dist) throw PreconditionError("config: unknown distribution '" + value + "'");
      spec.distribution = *dist;
    } else if (key == "zipf_constant") {
      spec.zipf_constant = parse_number<double>(key, value);
    } else if (key == "ops_max" || key == "ops_per_txn_max") {
      spec.ops_per_txn_max = parse_number<std::uint32_t>(key, value);
    } else if (key == "read_fraction") {
      spec.read_fraction = parse_number<double>(key, value);
    } else if (key == "seed") {
      spec.seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "txns" || key == "txn_count") {
      spec.txn_count = parse_number<std::uint64_t>(key, value);
    } else if (key == "clients" || key == "client_count") {
      spec.client_count = parse_number<std::uint32_t>(key, value);
    } else if (key == "yield") {
      spec.yield_between_ops = parse_bool(key, value);
    } else {
      throw PreconditionError("config: line " + std::to_string(line_no) +
                              ": unknown key '" + key + "'");
    }
  }
  validate(spec);
  return spec;
}

WorkloadSpec load_spec_file(const std::filesystem::path& path, WorkloadSpec base) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("config: cannot open " + path.string());
  return load_spec(in, base);
}

RowId row_name(std::uint64_t key) { return "row" + std::to_string(key); }

KeyChooser::KeyChooser(const WorkloadSpec& spec)
    : dist_(spec.distribution), keys_(spec.key_space) {
  validate(spec);
  if (dist_ == Distribution::kZipfian) {
    scrambled_.emplace(spec.key_space, spec.zipf_constant);
  } else if (dist_ == Distribution::kZipfianLatest) {
    latest_.emplace(spec.key_space, spec.zipf_constant);
  }
}

std::uint64_t KeyChooser::next(Rng& rng) const {
  switch (dist_) {
    case Distribution::kUniform:
      return std::uniform_int_distribution<std::uint64_t>(0, keys_ - 1)(rng);
    case Distribution::kZipfian:
      return scrambled_->next(rng);
    case Distribution::kZipfianLatest:
      return latest_->next(rng);
  }
  return 0;
}

Script generate_txn(const WorkloadSpec& spec, const KeyChooser& keys,
                    std::uint64_t index) {
  Rng rng = script_rng(spec.seed, index);
  Script script;
  const auto n = std::uniform_int_distribution<std::uint32_t>(0, spec.ops_per_txn_max)(rng);
  script.kind = TxnKind::kComplex;
  if (spec.mix == Mix::kMixed && std::bernoulli_distribution(0.5)(rng)) {
    script.kind = TxnKind::kReadOnly;
  }
  std::bernoulli_distribution is_write(1.0 - spec.read_fraction);
  script.ops.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    Operation op;
    op.key = keys.next(rng);
    op.write = script.kind == TxnKind::kComplex && is_write(rng);
    script.ops.push_back(op);
  }
  return script;
}

Script generate_txn(const WorkloadSpec& spec, std::uint64_t index) {
  return generate_txn(spec, KeyChooser(spec), index);
}

std::size_t LatencyHistogram::bucket_of(double us) {
  // 16 buckets per power of two starting at 0.0625 us.
  if (us <= 0.0625) return 0;
  const double b = std::log2(us / 0.0625) * 16.0;
  return std::min<std::size_t>(kBuckets - 1, static_cast<std::size_t>(b) + 1);
}

double LatencyHistogram::bucket_upper(std::size_t b) {
  return 0.0625 * std::exp2(static_cast<double>(b) / 16.0);
}

void LatencyHistogram::record(std::chrono::nanoseconds d) {
  const double us = static_cast<double>(d.count()) / 1000.0;
  ++buckets_[bucket_of(us)];
  ++count_;
  sum_us_ += us;
}

void LatencyHistogram::merge(const LatencyHistogram& other) {
  for (std::size_t i = 0; i < kBuckets; ++i) buckets_[i] += other.buckets_[i];
  count_ += other.count_;
  sum_us_ += other.sum_us_;
}

double LatencyHistogram::percentile_us(double q) const {
  if (count_ == 0) return 0.0;
  const auto rank = static_cast<std::uint64_t>(std::ceil(q * static_cast<double>(count_)));
  std::uint64_t seen = 0;
  for (std::size_t b = 0; b < kBuckets; ++b) {
    seen += buckets_[b];
    if (seen >= std::max<std::uint64_t>(rank, 1)) return bucket_upper(b);
  }
  return bucket_upper(kBuckets - 1);
}

double LatencyHistogram::mean_us() const {
  return count_ == 0 ? 0.0 : sum_us_ / static_cast<double>(count_);
}

double RunMetrics::abort_rate() const {
  const auto total = committed + aborted;
  return total == 0 ? 0.0 : static_cast<double>(aborted) / static_cast<double>(total);
}

double RunMetrics::throughput() const {
  return wall_seconds > 0.0 ? static_cast<double>(committed) / wall_seconds : 0.0;
}

RunMetrics run(const WorkloadSpec& spec, const RunOptions& options) {
  validate(spec);
  RunMetrics total;
  total.level = options.level;
  total.distribution = spec.distribution;
  total.mix = spec.mix;
  total.clients = spec.client_count;

  EngineOptions engine_options;
  engine_options.level = options.level;
  engine_options.capacity = options.capacity;
  engine_options.wal_path = options.wal_path;
  Engine engine(engine_options);
  const KeyChooser keys(spec);

  constexpr std::uint64_t kIdle = std::numeric_limits<std::uint64_t>::max();
  std::vector<std::atomic<std::uint64_t>> active(spec.client_count);
  for (auto& slot : active) slot.store(kIdle);
  std::atomic<std::uint64_t> next_index{0};
  std::atomic<std::uint64_t> finished{0};
  std::atomic<bool> stop{false};
  std::mutex merge_mu;
  std::mutex gc_mu;

  auto collect = [&] {
    std::unique_lock lock(gc_mu, std::try_to_lock);
    if (!lock) return;
    // Read the clock before the slots: a client that publishes after the
    // scan begins after this value was read.
    std::uint64_t watermark = engine.timestamps().last_issued().value + 1;
    for (auto& slot : active) watermark = std::min(watermark, slot.load());
    engine.store().collect_garbage(Timestamp{watermark}, engine.oracle());
  };

  auto client = [&](std::size_t id) {
    RunMetrics local;
    try {
      while (!stop.load(std::memory_order_relaxed)) {
        const std::uint64_t index = next_index.fetch_add(1);
        if (index >= spec.txn_count) break;
        const Script script = generate_txn(spec, keys, index);

        active[id].store(engine.timestamps().last_issued().value + 1);
        auto t0 = Clock::now();
        Transaction txn = engine.begin();
        active[id].store(txn.start_ts().value);
        local.begin_latency.record(Clock::now() - t0);

        const std::string value = encode_value(txn.start_ts());
        for (const Operation& op : script.ops) {
          const RowId row = row_name(op.key);
          t0 = Clock::now();
          if (op.write) {
            txn.write(row, value);
            local.write_latency.record(Clock::now() - t0);
          } else {
            (void)txn.read(row);
            local.read_latency.record(Clock::now() - t0);
          }
          if (spec.yield_between_ops) std::this_thread::yield();
        }

        const bool read_only = txn.read_only();
        t0 = Clock::now();
        const CommitDecision decision = txn.commit();
        local.commit_latency.record(Clock::now() - t0);
        active[id].store(kIdle);

        if (decision.is_committed()) {
          ++local.committed;
          if (read_only) ++local.read_only_committed;
        } else {
          ++local.aborted;
          if (read_only) ++local.read_only_aborted;
        }
        const auto done = finished.fetch_add(1) + 1;
        if (options.gc_interval != 0 && done % options.gc_interval == 0) collect();
      }
    } catch (const std::exception& e) {
      local.valid = false;
      local.error = e.what();
      stop.store(true);
    }
    active[id].store(kIdle);
    std::lock_guard lock(merge_mu);
    total.committed += local.committed;
    total.aborted += local.aborted;
    total.read_only_committed += local.read_only_committed;
    total.read_only_aborted += local.read_only_aborted;
    total.begin_latency.merge(local.begin_latency);
    total.read_latency.merge(local.read_latency);
    total.write_latency.merge(local.write_latency);
    total.commit_latency.merge(local.commit_latency);
    if (!local.valid && total.valid) {
      total.valid = false;
      total.error = local.error;
    }
  };

  const auto start = Clock::now();
  std::vector<std::thread> threads;
  threads.reserve(spec.client_count);
  for (std::size_t i = 0; i < spec.client_count; ++i) threads.emplace_back(client, i);
  for (auto& t : threads) t.join();
  total.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  total.pessimistic_aborts = engine.oracle().metrics().pessimistic_aborts;
  return total;
}

std::string csv_row(const RunMetrics& m) {
  std::ostringstream out;
  out << to_string(m.level) << ',' << to_string(m.distribution) << ','
      << to_string(m.mix) << ',' << m.clients << ',' << m.committed << ','
      << m.aborted << ',' << std::fixed << std::setprecision(6) << m.abort_rate()
      << ',' << m.pessimistic_aborts << ',' << std::setprecision(1)
      << m.throughput();
  return out.str();
}

}  // namespace wsi::workload

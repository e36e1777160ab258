#include "wsi/bench.hpp"

#include <chrono>
#include <deque>
#include <iomanip>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

#include "wsi/errors.hpp"
#include "wsi/oracle.hpp"
#include "wsi/timestamp.hpp"
#include "wsi/wal.hpp"

namespace wsi::bench {

namespace {

using Clock = std::chrono::steady_clock;

struct Pending {
  Timestamp start;
  RowSet writes;
  RowSet reads;
};

// A complex transaction: every touched row is read or written with equal
// odds.
void draw_rows(workload::Rng& rng, std::uint64_t keys, std::uint32_t n, Pending& p) {
  std::uniform_int_distribution<std::uint64_t> pick(0, keys - 1);
  std::bernoulli_distribution is_write(0.5);
  for (std::uint32_t i = 0; i < n; ++i) {
    RowId row = workload::row_name(pick(rng));
    (is_write(rng) ? p.writes : p.reads).insert(std::move(row));
  }
}

}  // namespace

double BenchResult::decisions_per_sec() const {
  return wall_seconds > 0.0 ? static_cast<double>(decisions) / wall_seconds : 0.0;
}

BenchResult run_bench(const BenchSpec& spec) {
  if (spec.clients == 0) throw PreconditionError("bench: need at least one client");
  if (spec.keys == 0) throw PreconditionError("bench: key space must be positive");

  BenchResult result;
  result.level = spec.level;
  result.clients = spec.clients;
  if (spec.requests == 0) return result;

  std::unique_ptr<WriteAheadLog> wal;
  if (spec.wal_path) wal = std::make_unique<WriteAheadLog>(*spec.wal_path, spec.batch);
  auto timestamps = wal ? std::make_unique<TimestampOracle>(wal.get(), kDefaultReservationBlock)
                        : std::make_unique<TimestampOracle>();
  StatusOracle oracle(OracleConfig{spec.level, spec.capacity}, *timestamps, wal.get());

  std::mutex merge_mu;
  std::string error;
  auto client = [&](std::uint32_t id) {
    const std::uint64_t share = spec.requests / spec.clients +
                                (id < spec.requests % spec.clients ? 1 : 0);
    workload::Rng rng(spec.seed * 0x9E3779B97F4A7C15ULL + id);
    workload::LatencyHistogram local;
    std::deque<Pending> window;
    // Submitted decisions whose log record is not yet known to be durable.
    std::deque<std::pair<Lsn, Clock::time_point>> in_flight;
    try {
      const std::size_t depth = std::max<std::uint32_t>(spec.outstanding, 1);
      std::uint64_t begun = 0;
      auto begin_one = [&] {
        Pending p{timestamps->next(), {}, {}};
        draw_rows(rng, spec.keys, spec.rows_per_txn, p);
        window.push_back(std::move(p));
        ++begun;
      };
      auto retire_one = [&] {
        auto [lsn, t0] = in_flight.front();
        in_flight.pop_front();
        oracle.await_durable(lsn);
        local.record(Clock::now() - t0);
      };
      while (begun < share && window.size() < depth) begin_one();
      while (!window.empty()) {
        Pending p = std::move(window.front());
        window.pop_front();
        const auto t0 = Clock::now();
        const auto submitted =
            oracle.submit(CommitRequest{p.start, std::move(p.writes), std::move(p.reads)});
        if (submitted.lsn == 0) {
          local.record(Clock::now() - t0);
        } else {
          in_flight.emplace_back(submitted.lsn, t0);
          if (in_flight.size() >= depth) retire_one();
        }
        if (begun < share) begin_one();
      }
      while (!in_flight.empty()) retire_one();
    } catch (const std::exception& e) {
      std::lock_guard lock(merge_mu);
      if (error.empty()) error = e.what();
    }
    std::lock_guard lock(merge_mu);
    result.latency.merge(local);
  };

  const auto start = Clock::now();
  std::vector<std::thread> threads;
  for (std::uint32_t i = 0; i < spec.clients; ++i) threads.emplace_back(client, i);
  for (auto& t : threads) t.join();
  result.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  if (wal) wal->close();
  if (!error.empty()) throw Error("bench: " + error);

  const OracleMetrics m = oracle.metrics();
  result.committed = m.committed;
  result.aborted = m.aborted;
  result.pessimistic_aborts = m.pessimistic_aborts;
  result.decisions = m.committed + m.aborted;
  return result;
}

std::string csv_row(const BenchResult& r) {
  std::ostringstream out;
  out << to_string(r.level) << ',' << r.clients << ',' << std::fixed
      << std::setprecision(1) << r.decisions_per_sec() << ','
      << std::setprecision(2) << r.latency.percentile_us(0.5) << ','
      << r.latency.percentile_us(0.99) << ',' << r.committed << ','
      << r.aborted << ',' << r.pessimistic_aborts;
  return out.str();
}

}  // namespace wsi::bench

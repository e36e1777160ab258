#include <gtest/gtest.h>

#include <regex>

#include "test_support.hpp"
#include "wsi/bench.hpp"
#include "wsi/errors.hpp"

using namespace wsi;
using namespace wsi::bench;

TEST(Bench, ZeroRequestsIsEmpty) {
  BenchSpec spec;
  spec.requests = 0;
  const auto r = run_bench(spec);
  EXPECT_EQ(r.decisions, 0u);
  EXPECT_EQ(r.latency.count(), 0u);
}

TEST(Bench, RejectsNoClients) {
  BenchSpec spec;
  spec.clients = 0;
  EXPECT_THROW(run_bench(spec), PreconditionError);
}

TEST(Bench, EveryRequestDecided) {
  for (auto level : {IsolationLevel::kSnapshot, IsolationLevel::kWriteSnapshot}) {
    for (std::uint32_t clients : {1u, 3u}) {
      BenchSpec spec;
      spec.level = level;
      spec.clients = clients;
      spec.requests = 5000;
      spec.keys = 100'000;
      const auto r = run_bench(spec);
      EXPECT_EQ(r.decisions, 5000u);
      EXPECT_EQ(r.committed + r.aborted, 5000u);
      EXPECT_EQ(r.latency.count(), 5000u);
      EXPECT_GT(r.decisions_per_sec(), 0.0);
    }
  }
}

TEST(Bench, SmallTableAbortsPessimistically) {
  BenchSpec spec;
  spec.requests = 3000;
  spec.capacity = 16;
  const auto r = run_bench(spec);
  EXPECT_GT(r.pessimistic_aborts, 0u);
  EXPECT_LE(r.pessimistic_aborts, r.aborted);
}

TEST(Bench, WithLog) {
  wsi::testing::TempDir dir;
  BenchSpec spec;
  spec.requests = 2000;
  spec.outstanding = 10;
  spec.wal_path = dir.file("bench.wal");
  spec.batch.max_delay = std::chrono::microseconds(200);
  spec.batch.sync = false;
  const auto r = run_bench(spec);
  EXPECT_EQ(r.decisions, 2000u);
  const auto log = read_log(*spec.wal_path);
  std::size_t decisions = 0;
  for (const auto& rec : log.records) decisions += rec.kind != RecordKind::kTsReserve;
  EXPECT_GT(decisions, 0u);
}

TEST(Bench, CsvShape) {
  BenchSpec spec;
  spec.requests = 100;
  const auto r = run_bench(spec);
  EXPECT_TRUE(std::regex_match(csv_row(r), std::regex(R"(wsi,1,[0-9.]+,[0-9.]+,[0-9.]+,[0-9]+,[0-9]+,[0-9]+)")))
      << csv_row(r);
}

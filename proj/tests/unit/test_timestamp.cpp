#include <gtest/gtest.h>

#include <algorithm>
#include <mutex>
#include <set>
#include <thread>
#include <vector>

#include "test_support.hpp"
#include "wsi/errors.hpp"
#include "wsi/timestamp.hpp"
#include "wsi/wal.hpp"

using namespace wsi;
using wsi::testing::TempDir;

namespace {

BatchPolicy fast_policy() {
  BatchPolicy p;
  p.max_delay = std::chrono::microseconds(100);
  p.sync = false;
  return p;
}

std::size_t reservation_count(const std::filesystem::path& path) {
  std::size_t n = 0;
  for (const auto& r : read_log(path).records) n += r.kind == RecordKind::kTsReserve;
  return n;
}

}  // namespace

TEST(TimestampOracle, FreshOracleCountsFromOne) {
  TimestampOracle ts;
  EXPECT_EQ(ts.next(), Timestamp{1});
  EXPECT_EQ(ts.next(), Timestamp{2});
  EXPECT_EQ(ts.next(), Timestamp{3});
  EXPECT_EQ(ts.last_issued(), Timestamp{3});
}

TEST(TimestampOracle, ConcurrentCallsAreDistinct) {
  TimestampOracle ts;
  std::mutex mu;
  std::set<Timestamp> seen;
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&] {
      std::vector<Timestamp> mine;
      for (int i = 0; i < 1250; ++i) mine.push_back(ts.next());
      // Program order within one thread is real-time order.
      EXPECT_TRUE(std::is_sorted(mine.begin(), mine.end()));
      std::lock_guard lock(mu);
      seen.insert(mine.begin(), mine.end());
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(seen.size(), 10'000u);
  EXPECT_EQ(*seen.rbegin(), Timestamp{10'000});
}

TEST(TimestampOracle, PersistentConcurrentCallsAreDistinct) {
  TempDir dir;
  WriteAheadLog wal(dir.file("ts.wal"), fast_policy());
  TimestampOracle ts(&wal, 7);
  std::mutex mu;
  std::set<Timestamp> seen;
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&] {
      for (int i = 0; i < 250; ++i) {
        auto v = ts.next();
        std::lock_guard lock(mu);
        EXPECT_TRUE(seen.insert(v).second);
      }
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(seen.size(), 1000u);
  EXPECT_GE(ts.reserved_upto(), ts.last_issued());
}

TEST(TimestampOracle, BlockReservationServesThousandWithoutPersisting) {
  TempDir dir;
  const auto path = dir.file("ts.wal");
  {
    WriteAheadLog wal(path, fast_policy());
    TimestampOracle ts(&wal, 1000);
    EXPECT_EQ(ts.reserve_block(1000), Timestamp{1});
    EXPECT_EQ(ts.reserved_upto(), Timestamp{1000});
    Timestamp last;
    for (int i = 0; i < 1000; ++i) last = ts.next();
    EXPECT_EQ(last, Timestamp{1000});
    wal.flush();
    EXPECT_EQ(reservation_count(path), 1u);
    EXPECT_EQ(ts.next(), Timestamp{1001});
    wal.flush();
    EXPECT_EQ(reservation_count(path), 2u);
    EXPECT_EQ(ts.reserved_upto(), Timestamp{2000});
    wal.close();
  }
}

TEST(TimestampOracle, BlockOfOnePersistsEveryTimestamp) {
  TempDir dir;
  const auto path = dir.file("ts.wal");
  WriteAheadLog wal(path, fast_policy());
  TimestampOracle ts(&wal, 1);
  EXPECT_EQ(ts.reserve_block(1), Timestamp{1});
  for (std::uint64_t i = 1; i <= 5; ++i) {
    EXPECT_EQ(ts.next(), Timestamp{i});
    EXPECT_EQ(ts.reserved_upto(), Timestamp{i});
  }
  wal.close();
  EXPECT_EQ(reservation_count(path), 5u);
}

TEST(TimestampOracle, ReserveBlockRejectsZero) {
  TimestampOracle ts;
  EXPECT_THROW(ts.reserve_block(0), PreconditionError);
}

TEST(TimestampOracle, RecoveryResumesAboveReservation) {
  TempDir dir;
  const auto path = dir.file("ts.wal");
  {
    WriteAheadLog wal(path, fast_policy());
    wal.append(WalRecord::reservation(Timestamp{1000}));
    wal.close();
  }
  const auto state = recover(path);
  EXPECT_EQ(state.reserved_upto, Timestamp{1000});
  WriteAheadLog wal(path, fast_policy());
  TimestampOracle ts(&wal, 1000, state.reserved_upto);
  EXPECT_GE(ts.next(), Timestamp{1001});
  wal.close();
}

TEST(TimestampOracle, CrashMidBlockNeverReusesAbandonedBlock) {
  TempDir dir;
  const auto path = dir.file("ts.wal");
  Timestamp issued;
  {
    WriteAheadLog wal(path, fast_policy());
    TimestampOracle ts(&wal, 1000);
    for (int i = 0; i < 10; ++i) issued = ts.next();
    wal.simulate_crash();
  }
  EXPECT_EQ(issued, Timestamp{10});
  const auto state = recover(path);
  WriteAheadLog wal(path, fast_policy());
  TimestampOracle ts(&wal, 1000, state.reserved_upto);
  EXPECT_GE(ts.next(), Timestamp{1001});
  wal.close();
}

TEST(TimestampOracle, RepeatedCrashesNeverReissue) {
  TempDir dir;
  const auto path = dir.file("ts.wal");
  wsi::testing::Rng rng(11);
  std::set<Timestamp> all;
  for (int round = 0; round < 20; ++round) {
    const auto state = recover(path);
    WriteAheadLog wal(path, fast_policy());
    TimestampOracle ts(&wal, 16, state.reserved_upto);
    const int n = std::uniform_int_distribution<int>(0, 60)(rng);
    for (int i = 0; i < n; ++i) ASSERT_TRUE(all.insert(ts.next()).second);
    wal.simulate_crash();
  }
}

TEST(TimestampOracle, FailedReservationIssuesNothingFromTheBlock) {
  TempDir dir;
  WriteAheadLog wal(dir.file("ts.wal"), fast_policy());
  TimestampOracle ts(&wal, 4);
  for (int i = 0; i < 4; ++i) ts.next();
  wal.set_fault_injector([] { return true; });
  EXPECT_THROW(ts.next(), ReservationError);
  EXPECT_EQ(ts.last_issued(), Timestamp{4});
  EXPECT_EQ(ts.reserved_upto(), Timestamp{4});
}

TEST(IsolationLevel, ParsesBothSpellings) {
  EXPECT_EQ(parse_isolation_level("si"), IsolationLevel::kSnapshot);
  EXPECT_EQ(parse_isolation_level("WSI"), IsolationLevel::kWriteSnapshot);
  EXPECT_FALSE(parse_isolation_level("serializable"));
  EXPECT_STREQ(to_string(IsolationLevel::kSnapshot), "si");
}

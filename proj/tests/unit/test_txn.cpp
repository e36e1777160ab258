#include <gtest/gtest.h>

#include <mutex>
#include <set>
#include <thread>

#include "test_support.hpp"
#include "wsi/errors.hpp"
#include "wsi/txn.hpp"

using namespace wsi;
using wsi::testing::TempDir;

namespace {

EngineOptions opts(IsolationLevel level) {
  EngineOptions o;
  o.level = level;
  return o;
}

void seed(Engine& e, const RowId& row, const std::string& value) {
  auto t = e.begin();
  t.write(row, value);
  ASSERT_TRUE(t.commit().is_committed());
}

}  // namespace

TEST(Transaction, BeginIssuesIncreasingStartsAndEmptySets) {
  Engine e;
  auto a = e.begin();
  auto b = e.begin();
  EXPECT_LT(a.start_ts(), b.start_ts());
  EXPECT_TRUE(a.read_set().empty());
  EXPECT_TRUE(a.write_set().empty());
  EXPECT_TRUE(a.active());
}

TEST(Transaction, ConcurrentBeginsAreDistinct) {
  Engine e;
  std::mutex mu;
  std::set<Timestamp> starts;
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&] {
      for (int i = 0; i < 25; ++i) {
        auto txn = e.begin();
        std::lock_guard lock(mu);
        starts.insert(txn.start_ts());
      }
    });
  }
  for (auto& th : threads) th.join();
  EXPECT_EQ(starts.size(), 100u);
}

TEST(Transaction, ReadSeesCommittedStateAndTracksRow) {
  Engine e;
  seed(e, "x", "1");
  auto t = e.begin();
  EXPECT_EQ(t.read("x"), "1");
  EXPECT_FALSE(t.read("nothing"));
  EXPECT_EQ(t.read_set(), (RowSet{"nothing", "x"}));
}

TEST(Transaction, ReadYourOwnWrite) {
  Engine e;
  auto t = e.begin();
  t.write("x", "v");
  EXPECT_EQ(t.read("x"), "v");
  EXPECT_TRUE(t.read_set().contains("x"));
  EXPECT_TRUE(t.write_set().contains("x"));
}

TEST(Transaction, RepeatedReadIsStable) {
  Engine e;
  seed(e, "x", "before");
  auto reader = e.begin();
  EXPECT_EQ(reader.read("x"), "before");
  seed(e, "x", "after");
  EXPECT_EQ(reader.read("x"), "before");
}

TEST(Transaction, WritesInvisibleToEarlierSnapshots) {
  Engine e;
  auto early = e.begin();
  auto w = e.begin();
  w.write("x", "v");
  auto during = e.begin();
  ASSERT_TRUE(w.commit().is_committed());
  EXPECT_FALSE(early.read("x"));
  EXPECT_FALSE(during.read("x"));
  auto later = e.begin();
  EXPECT_EQ(later.read("x"), "v");
}

TEST(Transaction, BlindWriteLeavesReadSetAlone) {
  Engine e;
  auto t = e.begin();
  t.write("x", "1");
  t.write("x", "2");
  EXPECT_TRUE(t.read_set().empty());
  EXPECT_EQ(t.write_set().size(), 1u);
  EXPECT_EQ(e.store().versions("x").size(), 1u);
}

TEST(Transaction, ReadOnlyCommitDoesNoConflictWork) {
  for (auto level : {IsolationLevel::kSnapshot, IsolationLevel::kWriteSnapshot}) {
    Engine e(opts(level));
    seed(e, "x", "1");
    const auto before = e.oracle().metrics().rows_checked;
    auto r = e.begin();
    r.read("x");
    seed(e, "x", "2");
    EXPECT_TRUE(r.commit().is_committed());
    // Only the seeding writer was checked, and under WSI it read nothing.
    EXPECT_EQ(e.oracle().metrics().rows_checked,
              before + (level == IsolationLevel::kSnapshot ? 1 : 0));
    EXPECT_EQ(e.oracle().metrics().protocol_deviations, 0u);
  }
}

TEST(Transaction, WriteSkewThroughHandles) {
  for (auto level : {IsolationLevel::kSnapshot, IsolationLevel::kWriteSnapshot}) {
    Engine e(opts(level));
    seed(e, "x", "1");
    seed(e, "y", "1");
    auto t1 = e.begin();
    auto t2 = e.begin();
    t1.read("x");
    t1.read("y");
    t2.read("x");
    t2.read("y");
    t1.write("x", "-1");
    t2.write("y", "-1");
    EXPECT_TRUE(t1.commit().is_committed());
    const auto d2 = t2.commit();
    if (level == IsolationLevel::kSnapshot) {
      EXPECT_TRUE(d2.is_committed());
    } else {
      EXPECT_TRUE(d2.is_aborted());
      EXPECT_EQ(t2.state(), TxnState::kAborted);
      EXPECT_EQ(e.store().versions("y").size(), 1u);  // tentative purged
    }
  }
}

TEST(Transaction, LostUpdatePreventedUnderBothPolicies) {
  for (auto level : {IsolationLevel::kSnapshot, IsolationLevel::kWriteSnapshot}) {
    Engine e(opts(level));
    seed(e, "x", "0");
    auto t1 = e.begin();
    auto t2 = e.begin();
    t1.write("x", std::to_string(std::stoi(*t1.read("x")) + 1));
    t2.write("x", std::to_string(std::stoi(*t2.read("x")) + 1));
    const int committed = t2.commit().is_committed() + t1.commit().is_committed();
    EXPECT_EQ(committed, 1);
  }
}

TEST(Transaction, AbortHidesAndPurgesWrites) {
  Engine e;
  auto t = e.begin();
  t.write("x", "never");
  t.abort();
  EXPECT_EQ(t.state(), TxnState::kAborted);
  EXPECT_EQ(e.store().versions("x").size(), 0u);
  EXPECT_EQ(e.oracle().query_status(t.start_ts()).state, TxnState::kAborted);
  auto later = e.begin();
  EXPECT_FALSE(later.read("x"));
}

TEST(Transaction, ReadOnlyAbortTouchesNoStore) {
  Engine e;
  seed(e, "x", "1");
  const auto versions = e.store().version_count();
  auto t = e.begin();
  t.read("x");
  t.abort();
  EXPECT_EQ(e.store().version_count(), versions);
}

TEST(Transaction, OperationsAfterFinishAreStateErrors) {
  Engine e;
  auto t = e.begin();
  t.abort();
  EXPECT_THROW(t.abort(), StateError);
  EXPECT_THROW(t.read("x"), StateError);
  EXPECT_THROW(t.write("x", "v"), StateError);
  EXPECT_THROW(t.commit(), StateError);
  auto c = e.begin();
  c.commit();
  EXPECT_THROW(c.commit(), StateError);
}

TEST(Transaction, DestructorAbortsActiveHandle) {
  Engine e;
  Timestamp start;
  {
    auto t = e.begin();
    t.write("x", "v");
    start = t.start_ts();
  }
  EXPECT_EQ(e.oracle().query_status(start).state, TxnState::kAborted);
  EXPECT_EQ(e.store().version_count(), 0u);
}

TEST(Transaction, MoveTransfersOwnership) {
  Engine e;
  auto a = e.begin();
  a.write("x", "v");
  Transaction b = std::move(a);
  EXPECT_TRUE(b.active());
  EXPECT_FALSE(a.active());
  auto c = e.begin();
  const auto c_start = c.start_ts();
  c = std::move(b);  // c's own transaction is aborted
  EXPECT_EQ(e.oracle().query_status(c_start).state, TxnState::kAborted);
  EXPECT_TRUE(c.commit().is_committed());
}

TEST(Transaction, LogFailureLeavesHandleActive) {
  TempDir dir;
  EngineOptions o;
  o.wal_path = dir.file("e.wal");
  o.batch.max_delay = std::chrono::microseconds(100);
  o.batch.sync = false;
  Engine e(o);
  auto t = e.begin();
  t.write("x", "v");
  e.wal()->set_fault_injector([] { return true; });
  EXPECT_THROW(t.commit(), CommitError);
  EXPECT_TRUE(t.active());
}

TEST(Engine, ReopenRecoversOracleState) {
  TempDir dir;
  EngineOptions o;
  o.wal_path = dir.file("e.wal");
  o.batch.max_delay = std::chrono::microseconds(100);
  o.batch.sync = false;
  o.timestamp_block = 10;
  CommitTable before;
  Timestamp last;
  {
    Engine e(o);
    for (int i = 0; i < 30; ++i) {
      auto t = e.begin();
      t.read("k" + std::to_string(i % 4));
      t.write("k" + std::to_string((i + 1) % 4), "v");
      if (i % 7 == 0) t.abort();
      else t.commit();
    }
    before = e.oracle().table();
    last = e.timestamps().last_issued();
  }
  Engine again(o);
  const auto after = again.oracle().table();
  auto next = again.begin();
  EXPECT_GT(next.start_ts(), last);
  EXPECT_EQ(after.last_commits(), before.last_commits());
  EXPECT_EQ(after.aborted(), before.aborted());
  // Every transaction above wrote, so every commit was logged.
  EXPECT_EQ(after.commit_records(), before.commit_records());
}

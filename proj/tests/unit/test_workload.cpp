#include <gtest/gtest.h>

#include <map>
#include <regex>
#include <sstream>

#include "test_support.hpp"
#include "wsi/errors.hpp"
#include "wsi/history.hpp"
#include "wsi/txn.hpp"
#include "wsi/workload.hpp"

using namespace wsi;
using namespace wsi::workload;

namespace {

WorkloadSpec small_spec() {
  WorkloadSpec spec;
  spec.key_space = 200;
  spec.txn_count = 2000;
  spec.client_count = 1;
  return spec;
}

}  // namespace

TEST(Generate, MixedIsHalfReadOnly) {
  WorkloadSpec spec;
  KeyChooser keys(spec);
  std::uint64_t read_only = 0;
  const std::uint64_t n = 100'000;
  for (std::uint64_t i = 0; i < n; ++i) read_only += generate_txn(spec, keys, i).kind == TxnKind::kReadOnly;
  EXPECT_NEAR(static_cast<double>(read_only) / n, 0.5, 0.01);
}

TEST(Generate, LengthUniformOnZeroToTwenty) {
  WorkloadSpec spec;
  spec.mix = Mix::kComplex;
  KeyChooser keys(spec);
  std::map<std::size_t, std::uint64_t> lengths;
  std::uint64_t writes = 0, ops = 0;
  const std::uint64_t n = 105'000;
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto s = generate_txn(spec, keys, i);
    ASSERT_EQ(s.kind, TxnKind::kComplex);
    ASSERT_LE(s.ops.size(), 20u);
    ++lengths[s.ops.size()];
    for (const auto& op : s.ops) writes += op.write;
    ops += s.ops.size();
  }
  EXPECT_EQ(lengths.size(), 21u);
  for (const auto& [len, count] : lengths) EXPECT_NEAR(count, 5000.0, 400.0) << len;
  EXPECT_NEAR(static_cast<double>(writes) / ops, 0.5, 0.01);
}

TEST(Generate, ReadOnlyScriptsOnlyRead) {
  WorkloadSpec spec;
  KeyChooser keys(spec);
  for (std::uint64_t i = 0; i < 2000; ++i) {
    const auto s = generate_txn(spec, keys, i);
    if (s.kind != TxnKind::kReadOnly) continue;
    for (const auto& op : s.ops) ASSERT_FALSE(op.write);
  }
}

TEST(Generate, DeterministicPerIndex) {
  WorkloadSpec spec;
  spec.distribution = Distribution::kZipfian;
  for (std::uint64_t i = 0; i < 200; ++i) {
    EXPECT_EQ(generate_txn(spec, i), generate_txn(spec, KeyChooser(spec), i));
  }
  WorkloadSpec other = spec;
  other.seed = 2;
  int differ = 0;
  for (std::uint64_t i = 0; i < 50; ++i) differ += !(generate_txn(spec, i) == generate_txn(other, i));
  EXPECT_GT(differ, 40);
}

TEST(Spec, LoadsKeyValueFile) {
  std::istringstream in(
      "# comment\n"
      "keys = 5000\n"
      "dist=zipfian-latest\n"
      "mix=complex   # trailing\n"
      "\n"
      "clients=3\ntxns=77\nseed=9\nzipf_constant=0.8\nops_max=5\nyield=false\n");
  const auto spec = load_spec(in);
  EXPECT_EQ(spec.key_space, 5000u);
  EXPECT_EQ(spec.distribution, Distribution::kZipfianLatest);
  EXPECT_EQ(spec.mix, Mix::kComplex);
  EXPECT_EQ(spec.client_count, 3u);
  EXPECT_EQ(spec.txn_count, 77u);
  EXPECT_EQ(spec.seed, 9u);
  EXPECT_DOUBLE_EQ(spec.zipf_constant, 0.8);
  EXPECT_EQ(spec.ops_per_txn_max, 5u);
  EXPECT_FALSE(spec.yield_between_ops);
}

TEST(Spec, RejectsBadInput) {
  for (const char* text : {"bogus=1\n", "keys=abc\n", "keys=0\n", "dist=normal\n", "novalue\n",
                           "clients=0\n", "read_fraction=1.5\n"}) {
    std::istringstream in(text);
    EXPECT_THROW(load_spec(in), PreconditionError) << text;
  }
}

TEST(Histogram, PercentilesWithinBucketResolution) {
  LatencyHistogram h;
  for (int us = 1; us <= 1000; ++us) h.record(std::chrono::microseconds(us));
  EXPECT_EQ(h.count(), 1000u);
  EXPECT_NEAR(h.percentile_us(0.5), 500.0, 500.0 * 0.05);
  EXPECT_NEAR(h.percentile_us(0.99), 990.0, 990.0 * 0.05);
  EXPECT_NEAR(h.mean_us(), 500.5, 1e-6);
  LatencyHistogram other;
  other.record(std::chrono::seconds(2));
  h.merge(other);
  EXPECT_EQ(h.count(), 1001u);
  EXPECT_NEAR(h.percentile_us(1.0), 2e6, 2e6 * 0.05);
}

TEST(Run, EmptyScriptsCommitAsReadOnly) {
  WorkloadSpec spec = small_spec();
  spec.ops_per_txn_max = 0;
  const auto m = run(spec, {});
  EXPECT_EQ(m.committed, spec.txn_count);
  EXPECT_EQ(m.read_only_committed, spec.txn_count);
}

TEST(Run, CountsEveryScriptOnce) {
  for (auto level : {IsolationLevel::kSnapshot, IsolationLevel::kWriteSnapshot}) {
    WorkloadSpec spec = small_spec();
    spec.client_count = 4;
    RunOptions o;
    o.level = level;
    const auto m = run(spec, o);
    ASSERT_TRUE(m.valid) << m.error;
    EXPECT_EQ(m.committed + m.aborted, spec.txn_count);
    EXPECT_EQ(m.read_only_aborted, 0u);
    EXPECT_GT(m.aborted, 0u);  // 200 keys is contended
  }
}

TEST(Run, SingleClientIsDeterministic) {
  for (auto level : {IsolationLevel::kSnapshot, IsolationLevel::kWriteSnapshot}) {
    WorkloadSpec spec = small_spec();
    spec.distribution = Distribution::kZipfianLatest;
    RunOptions o;
    o.level = level;
    const auto a = run(spec, o), b = run(spec, o);
    EXPECT_EQ(a.committed, b.committed);
    EXPECT_EQ(a.aborted, b.aborted);
    EXPECT_EQ(a.read_only_committed, b.read_only_committed);
  }
}

TEST(Run, UniformOverManyKeysRarelyAborts) {
  for (auto level : {IsolationLevel::kSnapshot, IsolationLevel::kWriteSnapshot}) {
    WorkloadSpec spec;
    spec.key_space = 20'000'000;
    spec.txn_count = 5000;
    spec.client_count = 4;
    RunOptions o;
    o.level = level;
    const auto m = run(spec, o);
    EXPECT_LT(m.abort_rate(), 0.005);
  }
}

TEST(Run, ReadOnlyWorkloadNeverAborts) {
  for (auto level : {IsolationLevel::kSnapshot, IsolationLevel::kWriteSnapshot}) {
    WorkloadSpec spec = small_spec();
    spec.key_space = 5;
    spec.client_count = 4;
    spec.read_fraction = 1.0;
    RunOptions o;
    o.level = level;
    const auto m = run(spec, o);
    EXPECT_EQ(m.aborted, 0u);
    EXPECT_EQ(m.committed, spec.txn_count);
  }
}

TEST(Run, BoundedOracleReportsPessimisticAborts) {
  WorkloadSpec spec = small_spec();
  spec.key_space = 10'000;
  spec.client_count = 4;
  RunOptions o;
  o.capacity = 8;
  const auto m = run(spec, o);
  EXPECT_GT(m.pessimistic_aborts, 0u);
  EXPECT_EQ(m.read_only_aborted, 0u);
}

TEST(Run, WithLog) {
  wsi::testing::TempDir dir;
  WorkloadSpec spec = small_spec();
  spec.txn_count = 300;
  RunOptions o;
  o.wal_path = dir.file("run.wal");
  const auto m = run(spec, o);
  ASSERT_TRUE(m.valid) << m.error;
  EXPECT_EQ(m.committed + m.aborted, 300u);
  EXPECT_GT(read_log(*o.wal_path).records.size(), 0u);
}

TEST(Csv, RowShape) {
  RunMetrics m;
  m.level = IsolationLevel::kSnapshot;
  m.distribution = Distribution::kZipfian;
  m.mix = Mix::kComplex;
  m.clients = 8;
  m.committed = 90;
  m.aborted = 10;
  m.pessimistic_aborts = 2;
  m.wall_seconds = 2.0;
  EXPECT_EQ(csv_row(m), "si,zipfian,complex,8,90,10,0.100000,2,45.0");
  EXPECT_EQ(std::string(kRunCsvHeader),
            "policy,distribution,mix,clients,committed,aborted,abort_rate,pessimistic_aborts,throughput");
}

// Small interleaved executions of generated scripts, recorded as histories:
// the committed transactions of every WSI execution are serializable.
TEST(WorkloadProperty, SmallWsiRunsAreSerializable) {
  wsi::testing::Rng rng(9);
  WorkloadSpec spec;
  spec.key_space = 4;
  spec.ops_per_txn_max = 4;
  spec.mix = Mix::kMixed;
  int histories = 0;
  for (std::uint64_t round = 0; round < 400; ++round) {
    spec.seed = round;
    Engine engine(EngineOptions{IsolationLevel::kWriteSnapshot, {}, {}, {}, kDefaultReservationBlock});
    struct Live {
      int id;
      Script script;
      std::size_t next = 0;
      std::optional<Transaction> txn;
    };
    std::vector<Live> live;
    const int count = 1 + static_cast<int>(rng() % 8);
    for (int i = 0; i < count; ++i) live.push_back({i + 1, generate_txn(spec, i), 0, std::nullopt});
    std::string text;
    auto emit = [&](const std::string& tok) { text += (text.empty() ? "" : " ") + tok; };
    while (!live.empty()) {
      const auto pick = rng() % live.size();
      Live& l = live[pick];
      if (!l.txn) l.txn.emplace(engine.begin());
      if (l.next < l.script.ops.size()) {
        const auto& op = l.script.ops[l.next++];
        const auto row = "k" + std::to_string(op.key);
        if (op.write) {
          l.txn->write(row, "v");
          emit("w" + std::to_string(l.id) + "[" + row + "]");
        } else {
          l.txn->read(row);
          emit("r" + std::to_string(l.id) + "[" + row + "]");
        }
        continue;
      }
      const bool ok = l.txn->commit().is_committed();
      emit((ok ? "c" : "a") + std::to_string(l.id));
      live.erase(live.begin() + static_cast<long>(pick));
    }
    const auto h = history::parse(text);
    ASSERT_TRUE(history::is_serializable(h).serializable) << text;
    ++histories;
  }
  EXPECT_EQ(histories, 400);
}

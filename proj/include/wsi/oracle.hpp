#pragma once

#include <atomic>
#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <unordered_map>

#include "wsi/commit_table.hpp"
#include "wsi/timestamp.hpp"
#include "wsi/types.hpp"
#include "wsi/wal.hpp"

namespace wsi {

struct OracleConfig {
  IsolationLevel level = IsolationLevel::kWriteSnapshot;
  // Maximum number of rows whose last commit is remembered; nullopt keeps
  // every row.
  std::optional<std::size_t> capacity;
};

struct CommitRequest {
  Timestamp start_ts;
  RowSet write_set;
  RowSet read_set;
};

// A decision whose log record may not be durable yet. lsn is 0 when nothing
// was logged.
struct SubmittedDecision {
  CommitDecision decision = CommitDecision::aborted();
  Lsn lsn = 0;
};

struct OracleMetrics {
  std::uint64_t committed = 0;
  std::uint64_t aborted = 0;              // conflict + pessimistic
  std::uint64_t pessimistic_aborts = 0;   // caused only by t_max
  std::uint64_t read_only_commits = 0;
  std::uint64_t client_aborts = 0;        // report_abort
  std::uint64_t protocol_deviations = 0;  // read-only request with reads
  std::uint64_t rows_checked = 0;
};

// The status oracle: decides commit requests under the configured isolation
// level, assigns commit timestamps and answers status queries.
//
// Every decision runs in one critical section. If a log is attached, a
// write-transaction decision is appended before the caller sees it, and
// status queries for a decision whose record is still in flight wait for it
// to become durable.
class StatusOracle : public StatusSource {
 public:
  StatusOracle(OracleConfig config, TimestampOracle& timestamps,
               WriteAheadLog* wal = nullptr);
  // Resumes from recovered state. The table's capacity must match config.
  StatusOracle(OracleConfig config, TimestampOracle& timestamps,
               WriteAheadLog* wal, CommitTable recovered);

  StatusOracle(const StatusOracle&) = delete;
  StatusOracle& operator=(const StatusOracle&) = delete;

  // Write-write check against the last committer of each written row.
  // Requires SI and an unbounded table.
  CommitDecision commit_si(Timestamp start_ts, const RowSet& write_set);

  // Read-write check against the last committer of each read row; the write
  // set only updates the table. A request with no writes commits without
  // any check. Requires WSI and an unbounded table.
  CommitDecision commit_wsi(Timestamp start_ts, const RowSet& write_set,
                            const RowSet& read_set);

  // Same checks on a capacity-bounded table: a checked row that is no longer
  // tracked aborts the request if t_max > start_ts.
  CommitDecision commit_bounded(Timestamp start_ts, const RowSet& write_set,
                                const RowSet& read_set);

  // Routes to the operation matching the configured level and capacity.
  CommitDecision commit(const CommitRequest& request);

  // Pipelined form of commit(): decides and appends the log record, but
  // returns before it is durable. The caller must await_durable(lsn) before
  // acting on the decision. Status queries still wait for durability.
  SubmittedDecision submit(const CommitRequest& request);
  void await_durable(Lsn lsn);

  TxnStatus query_status(Timestamp start_ts) const override;

  // Marks a transaction aborted. Idempotent; throws ConflictError if the
  // transaction already committed.
  void report_abort(Timestamp start_ts);

  const OracleConfig& config() const { return config_; }
  OracleMetrics metrics() const;
  Timestamp t_max() const;
  // Copy of the full table, for inspection and tests.
  CommitTable table() const;
  TimestampOracle& timestamps() { return timestamps_; }

  // True once a log write failed after a decision was applied in memory.
  // All later commits are refused.
  bool failed() const { return failed_.load(); }

 private:
  using Lock = std::unique_lock<std::shared_mutex>;

  void check_not_decided(Timestamp start_ts) const;
  void check_usable() const;
  // With `defer` set, log records are appended but not awaited and the lsn
  // is stored there.
  CommitDecision decide_si(Timestamp start_ts, const RowSet& write_set,
                           Lock& lock, Lsn* defer);
  CommitDecision decide_wsi(Timestamp start_ts, const RowSet& write_set,
                            const RowSet& read_set, Lock& lock, Lsn* defer);
  CommitDecision decide_bounded(Timestamp start_ts, const RowSet& write_set,
                                const RowSet& read_set, Lock& lock, Lsn* defer);
  CommitDecision apply_commit(Timestamp start_ts, const RowSet& write_set,
                              Lock& lock, Lsn* defer);
  CommitDecision commit_read_only(Timestamp start_ts, const RowSet& read_set,
                                  Lock& lock);
  CommitDecision finish_abort(Timestamp start_ts, bool pessimistic, Lock& lock,
                              Lsn* defer);
  void log_decision(const WalRecord& record, Lock& lock, Lsn* defer = nullptr);

  OracleConfig config_;
  TimestampOracle& timestamps_;
  WriteAheadLog* wal_;

  mutable std::shared_mutex mu_;
  CommitTable table_;
  // start_ts -> lsn of decisions not yet acknowledged by the log
  std::unordered_map<Timestamp, Lsn> pending_;
  std::deque<std::pair<Lsn, Timestamp>> pending_order_;
  OracleMetrics metrics_;
  std::atomic<bool> failed_{false};
};

}  // namespace wsi

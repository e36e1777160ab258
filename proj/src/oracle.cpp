#include "wsi/oracle.hpp"

#include <string>
#include <vector>

#include "wsi/errors.hpp"

namespace wsi {

StatusOracle::StatusOracle(OracleConfig config, TimestampOracle& timestamps,
                           WriteAheadLog* wal)
    : StatusOracle(config, timestamps, wal, CommitTable(config.capacity)) {}

StatusOracle::StatusOracle(OracleConfig config, TimestampOracle& timestamps,
                           WriteAheadLog* wal, CommitTable recovered)
    : config_(config),
      timestamps_(timestamps),
      wal_(wal),
      table_(std::move(recovered)) {
  if (table_.capacity() != config_.capacity) {
    throw PreconditionError("oracle: recovered table capacity differs from config");
  }
  if (config_.capacity && *config_.capacity == 0) {
    throw PreconditionError("oracle: capacity must be positive");
  }
}

void StatusOracle::check_usable() const {
  if (failed_.load()) {
    throw WalError("oracle: log failure, refusing further decisions");
  }
}

void StatusOracle::check_not_decided(Timestamp start_ts) const {
  if (table_.is_decided(start_ts) || pending_.contains(start_ts)) {
    throw DuplicateRequestError("oracle: transaction " +
                                std::to_string(start_ts.value) +
                                " already decided");
  }
}

CommitDecision StatusOracle::commit_si(Timestamp start_ts,
                                       const RowSet& write_set) {
  if (config_.level != IsolationLevel::kSnapshot) {
    throw PreconditionError("commit_si: oracle is not configured for SI");
  }
  if (table_.bounded()) {
    throw PreconditionError("commit_si: bounded table, use commit_bounded");
  }
  Lock lock(mu_);
  return decide_si(start_ts, write_set, lock, nullptr);
}

CommitDecision StatusOracle::decide_si(Timestamp start_ts, const RowSet& write_set,
                                       Lock& lock, Lsn* defer) {
  check_usable();
  check_not_decided(start_ts);
  if (write_set.empty()) return commit_read_only(start_ts, {}, lock);
  for (const auto& row : write_set) {
    ++metrics_.rows_checked;
    if (auto last = table_.last_commit(row); last && *last > start_ts) {
      return finish_abort(start_ts, false, lock, defer);
    }
  }
  return apply_commit(start_ts, write_set, lock, defer);
}

CommitDecision StatusOracle::commit_wsi(Timestamp start_ts,
                                        const RowSet& write_set,
                                        const RowSet& read_set) {
  if (config_.level != IsolationLevel::kWriteSnapshot) {
    throw PreconditionError("commit_wsi: oracle is not configured for WSI");
  }
  if (table_.bounded()) {
    throw PreconditionError("commit_wsi: bounded table, use commit_bounded");
  }
  Lock lock(mu_);
  return decide_wsi(start_ts, write_set, read_set, lock, nullptr);
}

CommitDecision StatusOracle::decide_wsi(Timestamp start_ts, const RowSet& write_set,
                                        const RowSet& read_set, Lock& lock,
                                        Lsn* defer) {
  check_usable();
  check_not_decided(start_ts);
  if (write_set.empty()) return commit_read_only(start_ts, read_set, lock);
  for (const auto& row : read_set) {
    ++metrics_.rows_checked;
    if (auto last = table_.last_commit(row); last && *last > start_ts) {
      return finish_abort(start_ts, false, lock, defer);
    }
  }
  return apply_commit(start_ts, write_set, lock, defer);
}

CommitDecision StatusOracle::commit_bounded(Timestamp start_ts,
                                            const RowSet& write_set,
                                            const RowSet& read_set) {
  Lock lock(mu_);
  return decide_bounded(start_ts, write_set, read_set, lock, nullptr);
}

CommitDecision StatusOracle::decide_bounded(Timestamp start_ts,
                                            const RowSet& write_set,
                                            const RowSet& read_set, Lock& lock,
                                            Lsn* defer) {
  const bool wsi = config_.level == IsolationLevel::kWriteSnapshot;
  check_usable();
  check_not_decided(start_ts);
  if (write_set.empty()) {
    return commit_read_only(start_ts, wsi ? read_set : RowSet{}, lock);
  }
  // Tracked rows are examined first so an abort is tagged pessimistic only
  // when t_max alone forced it. The decision is the same either way.
  bool conflict = false;
  bool untracked_too_old = false;
  for (const auto& row : wsi ? read_set : write_set) {
    ++metrics_.rows_checked;
    if (auto last = table_.last_commit(row)) {
      if (*last > start_ts) {
        conflict = true;
        break;
      }
    } else if (table_.t_max() > start_ts) {
      untracked_too_old = true;
    }
  }
  if (conflict || untracked_too_old) {
    return finish_abort(start_ts, !conflict, lock, defer);
  }
  return apply_commit(start_ts, write_set, lock, defer);
}

CommitDecision StatusOracle::commit(const CommitRequest& request) {
  if (table_.bounded()) {
    return commit_bounded(request.start_ts, request.write_set, request.read_set);
  }
  if (config_.level == IsolationLevel::kSnapshot) {
    return commit_si(request.start_ts, request.write_set);
  }
  return commit_wsi(request.start_ts, request.write_set, request.read_set);
}

SubmittedDecision StatusOracle::submit(const CommitRequest& request) {
  SubmittedDecision out;
  Lock lock(mu_);
  if (table_.bounded()) {
    out.decision = decide_bounded(request.start_ts, request.write_set,
                                  request.read_set, lock, &out.lsn);
  } else if (config_.level == IsolationLevel::kSnapshot) {
    out.decision = decide_si(request.start_ts, request.write_set, lock, &out.lsn);
  } else {
    out.decision = decide_wsi(request.start_ts, request.write_set,
                              request.read_set, lock, &out.lsn);
  }
  return out;
}

void StatusOracle::await_durable(Lsn lsn) {
  if (lsn == 0 || wal_ == nullptr) return;
  try {
    wal_->await(lsn);
  } catch (const WalError&) {
    failed_.store(true);
    throw;
  }
}

CommitDecision StatusOracle::apply_commit(Timestamp start_ts,
                                          const RowSet& write_set, Lock& lock,
                                          Lsn* defer) {
  const Timestamp commit_ts = timestamps_.next();
  for (const auto& row : write_set) table_.record_write(row, commit_ts);
  table_.record_commit(start_ts, commit_ts);
  ++metrics_.committed;
  if (wal_ != nullptr) {
    log_decision(WalRecord::commit(
                     start_ts, commit_ts,
                     std::vector<RowId>(write_set.begin(), write_set.end())),
                 lock, defer);
  }
  return CommitDecision::committed(commit_ts);
}

// Read-only requests draw a commit timestamp but are neither checked nor
// logged: they change nothing a recovered oracle would need.
CommitDecision StatusOracle::commit_read_only(
    Timestamp start_ts, const RowSet& read_set,
    Lock&) {
  if (!read_set.empty()) ++metrics_.protocol_deviations;
  const Timestamp commit_ts = timestamps_.next();
  table_.record_commit(start_ts, commit_ts);
  ++metrics_.committed;
  ++metrics_.read_only_commits;
  return CommitDecision::committed(commit_ts);
}

CommitDecision StatusOracle::finish_abort(Timestamp start_ts, bool pessimistic,
                                          Lock& lock, Lsn* defer) {
  table_.record_abort(start_ts);
  ++metrics_.aborted;
  if (pessimistic) ++metrics_.pessimistic_aborts;
  if (wal_ != nullptr) log_decision(WalRecord::abort(start_ts), lock, defer);
  return CommitDecision::aborted();
}

// Appends the record while still inside the critical section, so the log
// order is the decision order, then waits for durability outside it. With
// `defer` the wait is left to the caller.
void StatusOracle::log_decision(const WalRecord& record, Lock& lock, Lsn* defer) {
  Lsn lsn;
  try {
    lsn = wal_->submit(record);
  } catch (const WalError&) {
    failed_.store(true);
    throw;
  }
  const Lsn durable = wal_->durable_lsn();
  while (!pending_order_.empty() && pending_order_.front().first <= durable) {
    pending_.erase(pending_order_.front().second);
    pending_order_.pop_front();
  }
  pending_.emplace(record.start_ts, lsn);
  pending_order_.emplace_back(lsn, record.start_ts);
  if (defer != nullptr) {
    *defer = lsn;
    return;
  }
  lock.unlock();
  try {
    wal_->await(lsn);
  } catch (const WalError&) {
    failed_.store(true);
    throw;
  }
  lock.lock();
  pending_.erase(record.start_ts);
}

TxnStatus StatusOracle::query_status(Timestamp start_ts) const {
  Lsn wait_for = 0;
  TxnStatus status;
  {
    std::shared_lock lock(mu_);
    status = table_.status(start_ts);
    if (status.state != TxnState::kInFlight) {
      if (auto it = pending_.find(start_ts); it != pending_.end()) {
        wait_for = it->second;
      }
    }
  }
  if (wait_for != 0) wal_->await(wait_for);
  return status;
}

void StatusOracle::report_abort(Timestamp start_ts) {
  std::unique_lock lock(mu_);
  check_usable();
  if (table_.commit_ts_of(start_ts)) {
    throw ConflictError("report_abort: transaction " +
                        std::to_string(start_ts.value) + " already committed");
  }
  if (table_.is_aborted(start_ts)) return;
  table_.record_abort(start_ts);
  ++metrics_.client_aborts;
  if (wal_ != nullptr) log_decision(WalRecord::abort(start_ts), lock);
}

OracleMetrics StatusOracle::metrics() const {
  std::shared_lock lock(mu_);
  return metrics_;
}

Timestamp StatusOracle::t_max() const {
  std::shared_lock lock(mu_);
  return table_.t_max();
}

CommitTable StatusOracle::table() const {
  std::shared_lock lock(mu_);
  return table_;
}

}  // namespace wsi

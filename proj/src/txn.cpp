#include "wsi/txn.hpp"

#include <string>
#include <utility>

#include "wsi/errors.hpp"

namespace wsi {

Engine::Engine(EngineOptions options) : options_(std::move(options)) {
  const OracleConfig config{options_.level, options_.capacity};
  if (options_.wal_path) {
    RecoveredState recovered = recover(*options_.wal_path, options_.capacity);
    wal_ = std::make_unique<WriteAheadLog>(*options_.wal_path, options_.batch);
    timestamps_ = std::make_unique<TimestampOracle>(
        wal_.get(), options_.timestamp_block, recovered.reserved_upto);
    oracle_ = std::make_unique<StatusOracle>(config, *timestamps_, wal_.get(),
                                             std::move(recovered.table));
  } else {
    timestamps_ = std::make_unique<TimestampOracle>();
    oracle_ = std::make_unique<StatusOracle>(config, *timestamps_);
  }
}

Engine::~Engine() {
  if (wal_) {
    try {
      wal_->close();
    } catch (...) {
    }
  }
}

Transaction Engine::begin() {
  return Transaction(this, timestamps_->next());
}

Transaction::Transaction(Engine* engine, Timestamp start_ts)
    : engine_(engine), start_ts_(start_ts) {}

Transaction::Transaction(Transaction&& other) noexcept
    : engine_(std::exchange(other.engine_, nullptr)),
      start_ts_(other.start_ts_),
      commit_ts_(other.commit_ts_),
      read_set_(std::move(other.read_set_)),
      write_set_(std::move(other.write_set_)),
      state_(std::exchange(other.state_, TxnState::kAborted)) {}

Transaction& Transaction::operator=(Transaction&& other) noexcept {
  if (this == &other) return *this;
  if (engine_ != nullptr && state_ == TxnState::kInFlight) {
    try {
      abort();
    } catch (...) {
    }
  }
  engine_ = std::exchange(other.engine_, nullptr);
  start_ts_ = other.start_ts_;
  commit_ts_ = other.commit_ts_;
  read_set_ = std::move(other.read_set_);
  write_set_ = std::move(other.write_set_);
  state_ = std::exchange(other.state_, TxnState::kAborted);
  return *this;
}

Transaction::~Transaction() {
  if (engine_ != nullptr && state_ == TxnState::kInFlight) {
    try {
      abort();
    } catch (...) {
    }
  }
}

void Transaction::require_active(const char* op) const {
  if (engine_ == nullptr || state_ != TxnState::kInFlight) {
    throw StateError(std::string(op) + ": transaction " +
                     std::to_string(start_ts_.value) + " is not active");
  }
}

std::optional<std::string> Transaction::read(const RowId& row) {
  require_active("read");
  read_set_.insert(row);
  return engine_->store().snapshot_read(row, start_ts_, engine_->oracle());
}

void Transaction::write(const RowId& row, std::string value) {
  require_active("write");
  engine_->store().put_tentative(row, start_ts_, std::move(value));
  write_set_.insert(row);
}

CommitDecision Transaction::commit() {
  require_active("commit");
  StatusOracle& oracle = engine_->oracle();
  CommitRequest request{start_ts_, write_set_, {}};
  // A read-only transaction sends empty sets under either level; SI never
  // needs the read set.
  if (engine_->level() == IsolationLevel::kWriteSnapshot && !write_set_.empty()) {
    request.read_set = read_set_;
  }
  CommitDecision decision = CommitDecision::aborted();
  try {
    decision = oracle.commit(request);
  } catch (const WalError& e) {
    throw CommitError(std::string("commit: ") + e.what());
  } catch (const ReservationError& e) {
    throw CommitError(std::string("commit: ") + e.what());
  }
  if (decision.is_committed()) {
    state_ = TxnState::kCommitted;
    commit_ts_ = decision.commit_ts();
  } else {
    state_ = TxnState::kAborted;
    purge_writes();
  }
  return decision;
}

void Transaction::abort() {
  require_active("abort");
  engine_->oracle().report_abort(start_ts_);
  state_ = TxnState::kAborted;
  purge_writes();
}

void Transaction::purge_writes() {
  for (const auto& row : write_set_) {
    engine_->store().purge_aborted(row, start_ts_, engine_->oracle());
  }
}

}  // namespace wsi

#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "wsi/mvstore.hpp"
#include "wsi/oracle.hpp"
#include "wsi/timestamp.hpp"
#include "wsi/types.hpp"
#include "wsi/wal.hpp"

namespace wsi {

struct EngineOptions {
  IsolationLevel level = IsolationLevel::kWriteSnapshot;
  std::optional<std::size_t> capacity;
  // When set, oracle state is recovered from and logged to this file.
  std::optional<std::filesystem::path> wal_path;
  BatchPolicy batch;
  std::uint64_t timestamp_block = kDefaultReservationBlock;
};

class Transaction;

// Wires the timestamp oracle, status oracle, version store and (optionally)
// the log into one embeddable engine.
class Engine {
 public:
  explicit Engine(EngineOptions options = {});
  ~Engine();

  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  Transaction begin();

  IsolationLevel level() const { return options_.level; }
  const EngineOptions& options() const { return options_; }
  TimestampOracle& timestamps() { return *timestamps_; }
  StatusOracle& oracle() { return *oracle_; }
  VersionStore& store() { return store_; }
  WriteAheadLog* wal() { return wal_.get(); }

 private:
  EngineOptions options_;
  std::unique_ptr<WriteAheadLog> wal_;
  std::unique_ptr<TimestampOracle> timestamps_;
  std::unique_ptr<StatusOracle> oracle_;
  VersionStore store_;
};

// Client-side transaction. Tracks the rows it reads and writes, buffers its
// writes as tentative versions and submits the sets to the oracle on commit.
//
// Move-only; use from one thread at a time. Destroying an active handle
// aborts it.
class Transaction {
 public:
  Transaction(Transaction&& other) noexcept;
  Transaction& operator=(Transaction&& other) noexcept;
  Transaction(const Transaction&) = delete;
  Transaction& operator=(const Transaction&) = delete;
  ~Transaction();

  // Snapshot read. The row joins the read set even if nothing is visible.
  std::optional<std::string> read(const RowId& row);
  void write(const RowId& row, std::string value);

  // Throws StateError if not active, CommitError if the oracle failed to
  // persist the decision (the handle then stays active).
  CommitDecision commit();
  void abort();

  Timestamp start_ts() const { return start_ts_; }
  const RowSet& read_set() const { return read_set_; }
  const RowSet& write_set() const { return write_set_; }
  TxnState state() const { return state_; }
  bool active() const { return state_ == TxnState::kInFlight; }
  bool read_only() const { return write_set_.empty(); }
  // Valid once committed.
  Timestamp commit_ts() const { return commit_ts_; }

 private:
  friend class Engine;
  Transaction(Engine* engine, Timestamp start_ts);

  void require_active(const char* op) const;
  void purge_writes();

  Engine* engine_ = nullptr;
  Timestamp start_ts_;
  Timestamp commit_ts_;
  RowSet read_set_;
  RowSet write_set_;
  TxnState state_ = TxnState::kInFlight;
};

}  // namespace wsi

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <absl/container/flat_hash_map.h>

#include "wsi/types.hpp"

namespace wsi {

// Oracle memory: last commit timestamp per row, optionally bounded to
// `capacity` rows, plus the outcome of every decided transaction.
//
// When bounded, entries with the smallest commit timestamp are evicted first
// (ties broken by row id) and t_max tracks the largest evicted value, so any
// row missing from the table was last committed at or before t_max.
class CommitTable {
 public:
  explicit CommitTable(std::optional<std::size_t> capacity = std::nullopt);

  std::optional<std::size_t> capacity() const { return capacity_; }
  bool bounded() const { return capacity_.has_value(); }

  std::optional<Timestamp> last_commit(const RowId& row) const;
  Timestamp t_max() const { return t_max_; }

  // Sets last_commit(row) = commit_ts and evicts down to capacity. Returns
  // the evicted entries.
  std::vector<std::pair<RowId, Timestamp>> record_write(const RowId& row,
                                                        Timestamp commit_ts);
  void record_commit(Timestamp start_ts, Timestamp commit_ts);
  void record_abort(Timestamp start_ts);

  std::optional<Timestamp> commit_ts_of(Timestamp start_ts) const;
  bool is_aborted(Timestamp start_ts) const;
  bool is_decided(Timestamp start_ts) const;
  TxnStatus status(Timestamp start_ts) const;

  std::size_t tracked_rows() const { return last_commit_.size(); }
  std::uint64_t evictions() const { return evictions_; }

  const absl::flat_hash_map<RowId, Timestamp>& last_commits() const {
    return last_commit_;
  }
  const std::unordered_map<Timestamp, Timestamp>& commit_records() const {
    return commit_records_;
  }
  const std::unordered_set<Timestamp>& aborted() const { return aborted_; }

  // Compares the decision state (rows, t_max, records); eviction counters
  // are bookkeeping and not part of equality.
  bool operator==(const CommitTable& other) const;

 private:
  std::optional<std::size_t> capacity_;
  absl::flat_hash_map<RowId, Timestamp> last_commit_;
  std::set<std::pair<Timestamp, RowId>> by_commit_;  // bounded mode only
  Timestamp t_max_;
  std::uint64_t evictions_ = 0;
  std::unordered_map<Timestamp, Timestamp> commit_records_;
  std::unordered_set<Timestamp> aborted_;
};

}  // namespace wsi

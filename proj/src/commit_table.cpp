#include "wsi/commit_table.hpp"

#include <algorithm>

namespace wsi {

CommitTable::CommitTable(std::optional<std::size_t> capacity)
    : capacity_(capacity) {}

std::optional<Timestamp> CommitTable::last_commit(const RowId& row) const {
  auto it = last_commit_.find(row);
  if (it == last_commit_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::pair<RowId, Timestamp>> CommitTable::record_write(
    const RowId& row, Timestamp commit_ts) {
  std::vector<std::pair<RowId, Timestamp>> evicted;
  auto [it, inserted] = last_commit_.try_emplace(row, commit_ts);
  if (!capacity_) {
    if (!inserted) it->second = commit_ts;
    return evicted;
  }
  if (!inserted) {
    by_commit_.erase({it->second, row});
    it->second = commit_ts;
  }
  by_commit_.emplace(commit_ts, row);
  while (last_commit_.size() > *capacity_) {
    auto oldest = by_commit_.begin();
    t_max_ = std::max(t_max_, oldest->first);
    evicted.emplace_back(oldest->second, oldest->first);
    last_commit_.erase(oldest->second);
    by_commit_.erase(oldest);
    ++evictions_;
  }
  return evicted;
}

void CommitTable::record_commit(Timestamp start_ts, Timestamp commit_ts) {
  commit_records_[start_ts] = commit_ts;
}

void CommitTable::record_abort(Timestamp start_ts) {
  aborted_.insert(start_ts);
}

std::optional<Timestamp> CommitTable::commit_ts_of(Timestamp start_ts) const {
  auto it = commit_records_.find(start_ts);
  if (it == commit_records_.end()) return std::nullopt;
  return it->second;
}

bool CommitTable::is_aborted(Timestamp start_ts) const {
  return aborted_.contains(start_ts);
}

bool CommitTable::is_decided(Timestamp start_ts) const {
  return commit_records_.contains(start_ts) || aborted_.contains(start_ts);
}

TxnStatus CommitTable::status(Timestamp start_ts) const {
  if (auto tc = commit_ts_of(start_ts)) return {TxnState::kCommitted, *tc};
  if (is_aborted(start_ts)) return {TxnState::kAborted, Timestamp{}};
  return {};
}

bool CommitTable::operator==(const CommitTable& other) const {
  return capacity_ == other.capacity_ && t_max_ == other.t_max_ &&
         last_commit_ == other.last_commit_ &&
         commit_records_ == other.commit_records_ && aborted_ == other.aborted_;
}

}  // namespace wsi

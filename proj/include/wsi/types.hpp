#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <set>
#include <string>

namespace wsi {

// Logical time issued by the timestamp oracle. Start and commit timestamps
// share one sequence; 0 means "before all time".
struct Timestamp {
  std::uint64_t value = 0;

  constexpr Timestamp() = default;
  constexpr explicit Timestamp(std::uint64_t v) : value(v) {}

  constexpr auto operator<=>(const Timestamp&) const = default;

  static constexpr Timestamp zero() { return Timestamp{}; }
};

inline std::ostream& operator<<(std::ostream& os, Timestamp ts) {
  return os << ts.value;
}

// Opaque row identifier. Equality is byte-wise.
using RowId = std::string;
using RowSet = std::set<RowId>;

enum class IsolationLevel : std::uint8_t {
  kSnapshot,       // write-write conflicts abort
  kWriteSnapshot,  // read-write conflicts abort
};

inline const char* to_string(IsolationLevel level) {
  return level == IsolationLevel::kSnapshot ? "si" : "wsi";
}

std::optional<IsolationLevel> parse_isolation_level(const std::string& text);

class CommitDecision {
 public:
  static CommitDecision committed(Timestamp commit_ts) {
    return CommitDecision(commit_ts);
  }
  static CommitDecision aborted() { return CommitDecision(std::nullopt); }

  bool is_committed() const { return commit_ts_.has_value(); }
  bool is_aborted() const { return !commit_ts_.has_value(); }
  // Only meaningful when committed.
  Timestamp commit_ts() const { return commit_ts_.value_or(Timestamp{}); }

  bool operator==(const CommitDecision&) const = default;

 private:
  explicit CommitDecision(std::optional<Timestamp> ts) : commit_ts_(ts) {}
  std::optional<Timestamp> commit_ts_;
};

enum class TxnState : std::uint8_t { kInFlight, kCommitted, kAborted };

struct TxnStatus {
  TxnState state = TxnState::kInFlight;
  Timestamp commit_ts;  // valid when state == kCommitted

  bool operator==(const TxnStatus&) const = default;
};

// Anything that can tell a reader what happened to the writer of a version.
class StatusSource {
 public:
  virtual ~StatusSource() = default;
  virtual TxnStatus query_status(Timestamp start_ts) const = 0;
};

}  // namespace wsi

template <>
struct std::hash<wsi::Timestamp> {
  std::size_t operator()(wsi::Timestamp ts) const noexcept {
    return std::hash<std::uint64_t>{}(ts.value);
  }
};

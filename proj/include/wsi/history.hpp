#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wsi/types.hpp"

namespace wsi::history {

using TxnId = int;
// Writer identity 0 is the virtual transaction that installed the initial
// version of every item.
inline constexpr TxnId kInitialWriter = 0;

enum class EventKind : std::uint8_t { kRead, kWrite, kCommit, kAbort };

struct Event {
  EventKind kind = EventKind::kRead;
  TxnId txn = 0;
  std::string item;                  // read/write only
  std::optional<std::string> value;  // explicit value of w<id>[<item>=<value>]

  bool operator==(const Event&) const = default;
};

// Interleaved operations of several transactions in real-time order.
struct History {
  std::vector<Event> events;

  // Transaction ids in order of first appearance.
  std::vector<TxnId> transactions() const;
  std::vector<TxnId> committed() const;  // has a commit event
  bool operator==(const History&) const = default;
};

// Parses whitespace-separated tokens: r1[x]  w1[x]  w1[x=v]  c1  a1.
// Throws ParseError on malformed tokens, operations after a transaction
// finished, or a second commit/abort.
History parse(std::string_view text);
// Canonical single-space form; format(parse(t)) is t with normalized spacing.
std::string format(const History& h);

// Value a write event stores: its explicit value, or a synthesized symbol
// unique to (txn, item, occurrence).
std::string written_value(const History& h, std::size_t event_index);

// Per-transaction read results as writer identities, in program order.
using ReadResults = std::map<TxnId, std::vector<TxnId>>;
// Final writer of every item referenced by the history.
using FinalState = std::map<std::string, TxnId>;

struct Outcome {
  ReadResults reads;
  FinalState final_state;
  bool operator==(const Outcome&) const = default;
};

// What the committed transactions of `h` observe under snapshot reads: each
// transaction sees its own earlier writes, else the latest write of a
// transaction that committed before its first event. Aborted and unfinished
// transactions are excluded.
Outcome snapshot_outcome(const History& h);

// Runs the committed transactions one after another in `order` on a
// single-version store that starts with the initial versions.
Outcome serial_outcome(const History& h, const std::vector<TxnId>& order);

enum class Decision : std::uint8_t {
  kCommitted,     // commit event accepted
  kAborted,       // commit event rejected by the oracle
  kClientAbort,   // abort event in the history
  kUnfinished,    // no commit or abort event
};

struct ReplayResult {
  std::map<TxnId, Decision> decisions;
  std::map<TxnId, Timestamp> start_ts;
  std::map<TxnId, Timestamp> commit_ts;
  // Writer identity of every read, as observed through the engine.
  ReadResults observed_reads;

  // Every commit event in the history was accepted.
  bool admissible() const;
  // Transactions whose commit event was rejected, ascending.
  std::vector<TxnId> rejected() const;
};

// Drives a fresh engine through the history: a transaction begins at its
// first event and every event executes in history order.
ReplayResult replay_policy(const History& h, IsolationLevel level);

// Non-interleaved equivalent of a history that WSI admits: aborted and
// unfinished transactions dropped, read-only transactions moved to their
// first event, write transactions moved to their commit. Throws
// PreconditionError if WSI does not admit the history.
History construct_serial(const History& h);

// Committed transactions of a serial history, in order.
std::vector<TxnId> serial_order(const History& serial);

inline constexpr std::size_t kMaxCheckedTransactions = 8;

struct SerializabilityVerdict {
  bool serializable = false;
  std::optional<std::vector<TxnId>> witness;

  // "SERIALIZABLE witness=(1,2)" or "NOT-SERIALIZABLE".
  std::string to_string() const;
};

// Brute force over every order of the committed transactions, in
// lexicographic order; the first order whose serial outcome equals the
// snapshot outcome of `h` is the witness. Throws CapacityError beyond
// kMaxCheckedTransactions committed transactions.
SerializabilityVerdict is_serializable(const History& h);

// One-line verdict used by `wsi check`, e.g.
// "SI:admissible WSI:txn2-aborted SER:no".
std::string check_report(const History& h);

}  // namespace wsi::history

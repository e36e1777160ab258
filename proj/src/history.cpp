#include "wsi/history.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>
#include <sstream>
#include <unordered_map>

#include "wsi/errors.hpp"
#include "wsi/txn.hpp"

namespace wsi::history {

namespace {

bool is_item_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

struct Token {
  std::string_view text;
  std::size_t column;  // 1-based
};

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    const std::size_t begin = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i > begin) tokens.push_back({text.substr(begin, i - begin), begin + 1});
  }
  return tokens;
}

Event parse_token(const Token& tok, std::size_t index) {
  auto fail = [&](const std::string& why) -> ParseError {
    return ParseError("token " + std::to_string(index + 1) + " '" +
                          std::string(tok.text) + "' at column " +
                          std::to_string(tok.column) + ": " + why,
                      index, tok.column);
  };
  const std::string_view t = tok.text;
  Event ev;
  switch (t[0]) {
    case 'r': ev.kind = EventKind::kRead; break;
    case 'w': ev.kind = EventKind::kWrite; break;
    case 'c': ev.kind = EventKind::kCommit; break;
    case 'a': ev.kind = EventKind::kAbort; break;
    default: throw fail("expected r, w, c or a");
  }
  std::size_t pos = 1;
  while (pos < t.size() && std::isdigit(static_cast<unsigned char>(t[pos]))) ++pos;
  if (pos == 1) throw fail("missing transaction id");
  auto [end, ec] = std::from_chars(t.data() + 1, t.data() + pos, ev.txn);
  if (ec != std::errc{} || ev.txn <= 0) throw fail("transaction id must be a positive integer");
  (void)end;

  if (ev.kind == EventKind::kCommit || ev.kind == EventKind::kAbort) {
    if (pos != t.size()) throw fail("unexpected characters after transaction id");
    return ev;
  }
  if (pos >= t.size() || t[pos] != '[' || t.back() != ']') {
    throw fail("expected [item]");
  }
  const std::string_view body = t.substr(pos + 1, t.size() - pos - 2);
  const auto eq = body.find('=');
  const std::string_view item = body.substr(0, eq);
  if (item.empty() || !std::all_of(item.begin(), item.end(), is_item_char)) {
    throw fail("item names use letters, digits and '_'");
  }
  ev.item = std::string(item);
  if (eq != std::string_view::npos) {
    if (ev.kind != EventKind::kWrite) throw fail("only writes carry a value");
    const std::string_view value = body.substr(eq + 1);
    if (value.empty() || value.find_first_of("[]") != std::string_view::npos) {
      throw fail("bad value");
    }
    ev.value = std::string(value);
  }
  return ev;
}

struct TxnInfo {
  std::size_t first = 0;
  std::optional<std::size_t> commit;
  bool aborted = false;
  bool writes = false;
};

std::map<TxnId, TxnInfo> analyze(const History& h) {
  std::map<TxnId, TxnInfo> info;
  for (std::size_t i = 0; i < h.events.size(); ++i) {
    const Event& e = h.events[i];
    auto [it, fresh] = info.try_emplace(e.txn);
    if (fresh) it->second.first = i;
    if (e.kind == EventKind::kCommit) it->second.commit = i;
    if (e.kind == EventKind::kAbort) it->second.aborted = true;
    if (e.kind == EventKind::kWrite) it->second.writes = true;
  }
  return info;
}

std::set<std::string> items_of(const History& h) {
  std::set<std::string> items;
  for (const Event& e : h.events) {
    if (e.kind == EventKind::kRead || e.kind == EventKind::kWrite) items.insert(e.item);
  }
  return items;
}

// Values written through the engine carry the writer id as a prefix so reads
// can be attributed to a transaction even when explicit values repeat.
std::string tag_value(TxnId txn, const std::string& value) {
  return std::to_string(txn) + "|" + value;
}

TxnId writer_of(const std::optional<std::string>& stored) {
  if (!stored) return kInitialWriter;
  return std::stoi(stored->substr(0, stored->find('|')));
}

std::string join_ids(const std::vector<TxnId>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(ids[i]);
  }
  return out;
}

}  // namespace

std::vector<TxnId> History::transactions() const {
  std::vector<TxnId> out;
  std::set<TxnId> seen;
  for (const Event& e : events) {
    if (seen.insert(e.txn).second) out.push_back(e.txn);
  }
  return out;
}

std::vector<TxnId> History::committed() const {
  std::vector<TxnId> out;
  for (const Event& e : events) {
    if (e.kind == EventKind::kCommit) out.push_back(e.txn);
  }
  return out;
}

History parse(std::string_view text) {
  History h;
  std::unordered_map<TxnId, bool> finished;
  const auto tokens = tokenize(text);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    Event ev = parse_token(tokens[i], i);
    bool& done = finished[ev.txn];
    if (done) {
      const char* what = ev.kind == EventKind::kCommit ? "duplicate commit"
                         : ev.kind == EventKind::kAbort ? "duplicate abort"
                                                        : "operation after commit/abort";
      throw ParseError("token " + std::to_string(i + 1) + " '" +
                           std::string(tokens[i].text) + "' at column " +
                           std::to_string(tokens[i].column) + ": " + what +
                           " of transaction " + std::to_string(ev.txn),
                       i, tokens[i].column);
    }
    if (ev.kind == EventKind::kCommit || ev.kind == EventKind::kAbort) done = true;
    h.events.push_back(std::move(ev));
  }
  return h;
}

std::string format(const History& h) {
  std::string out;
  for (const Event& e : h.events) {
    if (!out.empty()) out += ' ';
    switch (e.kind) {
      case EventKind::kRead: out += 'r'; break;
      case EventKind::kWrite: out += 'w'; break;
      case EventKind::kCommit: out += 'c'; break;
      case EventKind::kAbort: out += 'a'; break;
    }
    out += std::to_string(e.txn);
    if (e.kind == EventKind::kRead || e.kind == EventKind::kWrite) {
      out += '[';
      out += e.item;
      if (e.value) {
        out += '=';
        out += *e.value;
      }
      out += ']';
    }
  }
  return out;
}

std::string written_value(const History& h, std::size_t event_index) {
  const Event& e = h.events.at(event_index);
  if (e.kind != EventKind::kWrite) {
    throw PreconditionError("written_value: event is not a write");
  }
  if (e.value) return *e.value;
  int occurrence = 0;
  for (std::size_t i = 0; i < event_index; ++i) {
    const Event& p = h.events[i];
    if (p.kind == EventKind::kWrite && p.txn == e.txn && p.item == e.item) ++occurrence;
  }
  return "t" + std::to_string(e.txn) + "." + e.item + "." + std::to_string(occurrence);
}

Outcome snapshot_outcome(const History& h) {
  const auto info = analyze(h);
  Outcome out;
  for (const auto& item : items_of(h)) out.final_state[item] = kInitialWriter;

  // Committed writers of each item, ordered by commit position.
  std::map<std::string, std::vector<std::pair<std::size_t, TxnId>>> writers;
  for (const auto& [txn, ti] : info) {
    if (!ti.commit) continue;
    out.reads[txn];
    for (const Event& e : h.events) {
      if (e.txn == txn && e.kind == EventKind::kWrite) {
        auto& list = writers[e.item];
        if (list.empty() || list.back().second != txn ||
            list.back().first != *ti.commit) {
          list.emplace_back(*ti.commit, txn);
        }
      }
    }
  }
  for (auto& [item, list] : writers) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
    out.final_state[item] = list.back().second;
  }

  for (const auto& [txn, ti] : info) {
    if (!ti.commit) continue;
    std::set<std::string> own;
    auto& reads = out.reads[txn];
    for (const Event& e : h.events) {
      if (e.txn != txn) continue;
      if (e.kind == EventKind::kWrite) own.insert(e.item);
      if (e.kind != EventKind::kRead) continue;
      if (own.contains(e.item)) {
        reads.push_back(txn);
        continue;
      }
      TxnId seen = kInitialWriter;
      if (auto it = writers.find(e.item); it != writers.end()) {
        for (const auto& [commit_pos, writer] : it->second) {
          if (commit_pos < ti.first && writer != txn) seen = writer;
        }
      }
      reads.push_back(seen);
    }
  }
  return out;
}

Outcome serial_outcome(const History& h, const std::vector<TxnId>& order) {
  Outcome out;
  for (const auto& item : items_of(h)) out.final_state[item] = kInitialWriter;
  for (TxnId txn : order) {
    auto& reads = out.reads[txn];
    for (const Event& e : h.events) {
      if (e.txn != txn) continue;
      if (e.kind == EventKind::kRead) reads.push_back(out.final_state[e.item]);
      if (e.kind == EventKind::kWrite) out.final_state[e.item] = txn;
    }
  }
  return out;
}

bool ReplayResult::admissible() const {
  return std::none_of(decisions.begin(), decisions.end(),
                      [](const auto& d) { return d.second == Decision::kAborted; });
}

std::vector<TxnId> ReplayResult::rejected() const {
  std::vector<TxnId> out;
  for (const auto& [txn, d] : decisions) {
    if (d == Decision::kAborted) out.push_back(txn);
  }
  return out;
}

ReplayResult replay_policy(const History& h, IsolationLevel level) {
  EngineOptions options;
  options.level = level;
  Engine engine(options);
  std::map<TxnId, Transaction> live;
  ReplayResult result;

  for (std::size_t i = 0; i < h.events.size(); ++i) {
    const Event& e = h.events[i];
    auto it = live.find(e.txn);
    if (it == live.end()) {
      it = live.emplace(e.txn, engine.begin()).first;
      result.start_ts[e.txn] = it->second.start_ts();
      result.decisions[e.txn] = Decision::kUnfinished;
      result.observed_reads[e.txn];
    }
    Transaction& txn = it->second;
    switch (e.kind) {
      case EventKind::kRead:
        result.observed_reads[e.txn].push_back(writer_of(txn.read(e.item)));
        break;
      case EventKind::kWrite:
        txn.write(e.item, tag_value(e.txn, written_value(h, i)));
        break;
      case EventKind::kCommit: {
        const CommitDecision d = txn.commit();
        result.decisions[e.txn] = d.is_committed() ? Decision::kCommitted
                                                   : Decision::kAborted;
        if (d.is_committed()) result.commit_ts[e.txn] = d.commit_ts();
        break;
      }
      case EventKind::kAbort:
        txn.abort();
        result.decisions[e.txn] = Decision::kClientAbort;
        break;
    }
  }
  return result;
}

History construct_serial(const History& h) {
  const ReplayResult wsi = replay_policy(h, IsolationLevel::kWriteSnapshot);
  if (!wsi.admissible()) {
    throw PreconditionError("construct_serial: history is not admitted by WSI (txn " +
                            join_ids(wsi.rejected()) + " aborted)");
  }
  const auto info = analyze(h);
  std::vector<std::pair<std::size_t, TxnId>> anchors;
  for (const auto& [txn, ti] : info) {
    if (!ti.commit) continue;
    anchors.emplace_back(ti.writes ? *ti.commit : ti.first, txn);
  }
  std::sort(anchors.begin(), anchors.end());

  History serial;
  for (const auto& [anchor, txn] : anchors) {
    for (const Event& e : h.events) {
      if (e.txn == txn && e.kind != EventKind::kCommit) serial.events.push_back(e);
    }
    serial.events.push_back(Event{EventKind::kCommit, txn, {}, std::nullopt});
  }
  return serial;
}

std::vector<TxnId> serial_order(const History& serial) {
  return serial.committed();
}

std::string SerializabilityVerdict::to_string() const {
  if (!serializable) return "NOT-SERIALIZABLE";
  return "SERIALIZABLE witness=(" + join_ids(witness.value_or(std::vector<TxnId>{})) + ")";
}

SerializabilityVerdict is_serializable(const History& h) {
  std::vector<TxnId> order = h.committed();
  if (order.size() > kMaxCheckedTransactions) {
    throw CapacityError("is_serializable: " + std::to_string(order.size()) +
                        " committed transactions exceed the limit of " +
                        std::to_string(kMaxCheckedTransactions));
  }
  std::sort(order.begin(), order.end());
  const Outcome target = snapshot_outcome(h);
  do {
    if (serial_outcome(h, order) == target) return {true, order};
  } while (std::next_permutation(order.begin(), order.end()));
  return {false, std::nullopt};
}

std::string check_report(const History& h) {
  auto policy_part = [&](IsolationLevel level) {
    const ReplayResult r = replay_policy(h, level);
    const std::string name = level == IsolationLevel::kSnapshot ? "SI:" : "WSI:";
    if (r.admissible()) return name + "admissible";
    std::string out = name;
    const auto rejected = r.rejected();
    for (std::size_t i = 0; i < rejected.size(); ++i) {
      if (i) out += ',';
      out += "txn" + std::to_string(rejected[i]) + "-aborted";
    }
    return out;
  };
  std::string ser;
  if (h.committed().size() > kMaxCheckedTransactions) {
    ser = "SER:unchecked";
  } else {
    const auto verdict = is_serializable(h);
    ser = verdict.serializable
              ? "SER:yes witness=(" + join_ids(*verdict.witness) + ")"
              : "SER:no";
  }
  return policy_part(IsolationLevel::kSnapshot) + " " +
         policy_part(IsolationLevel::kWriteSnapshot) + " " + ser;
}

}  // namespace wsi::history

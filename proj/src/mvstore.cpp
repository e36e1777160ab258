#include "wsi/mvstore.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

#include "wsi/errors.hpp"

namespace wsi {

namespace {

std::string to_hex(const std::string& bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (unsigned char c : bytes) {
    out.push_back(kDigits[c >> 4]);
    out.push_back(kDigits[c & 0xf]);
  }
  return out;
}

int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

std::string from_hex(const std::string& hex) {
  if (hex.size() % 2 != 0) throw PreconditionError("store load: odd-length hex value");
  std::string out;
  out.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    int hi = hex_digit(hex[i]);
    int lo = hex_digit(hex[i + 1]);
    if (hi < 0 || lo < 0) throw PreconditionError("store load: bad hex digit");
    out.push_back(static_cast<char>(hi << 4 | lo));
  }
  return out;
}

}  // namespace

VersionStore::Stripe& VersionStore::stripe_for(const RowId& row) {
  return stripes_[std::hash<RowId>{}(row) % kStripes];
}

const VersionStore::Stripe& VersionStore::stripe_for(const RowId& row) const {
  return stripes_[std::hash<RowId>{}(row) % kStripes];
}

void VersionStore::put_tentative(const RowId& row, Timestamp writer,
                                 std::string value) {
  Stripe& stripe = stripe_for(row);
  std::lock_guard lock(stripe.mu);
  VersionList& list = stripe.rows[row];
  auto it = std::lower_bound(
      list.begin(), list.end(), writer,
      [](const Entry& e, Timestamp ts) { return e.writer > ts; });
  if (it != list.end() && it->writer == writer) {
    it->value = std::move(value);
  } else {
    list.insert(it, Entry{writer, std::move(value)});
  }
}

std::optional<std::string> VersionStore::snapshot_read(
    const RowId& row, Timestamp reader, const StatusSource& status) const {
  const Stripe& stripe = stripe_for(row);
  // Collect candidate writers under the stripe lock, resolve their status
  // without it (a status lookup may wait on the log), then fetch the chosen
  // value. Only aborted or shadowed versions are ever removed, so the chosen
  // one is still there unless it was garbage collected below a watermark this
  // reader is above; that case is retried.
  for (;;) {
    std::vector<Timestamp> writers;
    {
      std::lock_guard lock(stripe.mu);
      auto it = stripe.rows.find(row);
      if (it == stripe.rows.end()) return std::nullopt;
      for (const Entry& e : it->second) {
        if (e.writer == reader) return e.value;  // own write
        // A writer that started at or after the reader commits after it too.
        if (e.writer < reader) writers.push_back(e.writer);
      }
    }

    std::optional<Timestamp> best_writer;
    Timestamp best_commit;
    for (Timestamp w : writers) {
      const TxnStatus st = status.query_status(w);
      if (st.state != TxnState::kCommitted || st.commit_ts >= reader) continue;
      if (!best_writer || st.commit_ts > best_commit) {
        best_writer = w;
        best_commit = st.commit_ts;
      }
    }
    if (!best_writer) return std::nullopt;

    std::lock_guard lock(stripe.mu);
    auto it = stripe.rows.find(row);
    if (it == stripe.rows.end()) continue;
    for (const Entry& e : it->second) {
      if (e.writer == *best_writer) return e.value;
    }
  }
}

void VersionStore::purge_aborted(const RowId& row, Timestamp writer,
                                 const StatusSource& status) {
  if (status.query_status(writer).state != TxnState::kAborted) {
    throw PreconditionError("purge_aborted: writer " +
                            std::to_string(writer.value) + " is not aborted");
  }
  Stripe& stripe = stripe_for(row);
  std::lock_guard lock(stripe.mu);
  auto it = stripe.rows.find(row);
  if (it == stripe.rows.end()) return;
  std::erase_if(it->second, [&](const Entry& e) { return e.writer == writer; });
  if (it->second.empty()) stripe.rows.erase(it);
}

std::size_t VersionStore::collect_garbage(Timestamp low_watermark,
                                          const StatusSource& status) {
  std::size_t removed = 0;
  for (Stripe& stripe : stripes_) {
    std::lock_guard lock(stripe.mu);
    for (auto row_it = stripe.rows.begin(); row_it != stripe.rows.end();) {
      VersionList& list = row_it->second;
      if (list.size() > 1) {
        std::optional<Timestamp> keep;  // writer of newest settled version
        Timestamp keep_commit;
        std::vector<Timestamp> drop;
        for (const Entry& e : list) {
          if (e.writer >= low_watermark) continue;
          const TxnStatus st = status.query_status(e.writer);
          if (st.state == TxnState::kAborted) {
            drop.push_back(e.writer);
          } else if (st.state == TxnState::kCommitted &&
                     st.commit_ts < low_watermark) {
            if (!keep || st.commit_ts > keep_commit) {
              if (keep) drop.push_back(*keep);
              keep = e.writer;
              keep_commit = st.commit_ts;
            } else {
              drop.push_back(e.writer);
            }
          }
        }
        if (!drop.empty()) {
          std::sort(drop.begin(), drop.end());
          removed += std::erase_if(list, [&](const Entry& e) {
            return std::binary_search(drop.begin(), drop.end(), e.writer);
          });
        }
      }
      if (list.empty()) {
        row_it = stripe.rows.erase(row_it);
      } else {
        ++row_it;
      }
    }
  }
  return removed;
}

std::vector<CellVersion> VersionStore::versions(const RowId& row) const {
  const Stripe& stripe = stripe_for(row);
  std::lock_guard lock(stripe.mu);
  std::vector<CellVersion> out;
  auto it = stripe.rows.find(row);
  if (it == stripe.rows.end()) return out;
  for (const Entry& e : it->second) out.push_back({row, e.writer, e.value});
  return out;
}

std::size_t VersionStore::version_count() const {
  std::size_t n = 0;
  for (const Stripe& stripe : stripes_) {
    std::lock_guard lock(stripe.mu);
    for (const auto& [row, list] : stripe.rows) n += list.size();
  }
  return n;
}

std::size_t VersionStore::row_count() const {
  std::size_t n = 0;
  for (const Stripe& stripe : stripes_) {
    std::lock_guard lock(stripe.mu);
    n += stripe.rows.size();
  }
  return n;
}

void VersionStore::dump(std::ostream& out) const {
  std::vector<CellVersion> all;
  for (const Stripe& stripe : stripes_) {
    std::lock_guard lock(stripe.mu);
    for (const auto& [row, list] : stripe.rows) {
      for (const Entry& e : list) all.push_back({row, e.writer, e.value});
    }
  }
  std::sort(all.begin(), all.end(), [](const CellVersion& a, const CellVersion& b) {
    if (a.row != b.row) return a.row < b.row;
    return a.writer_start_ts > b.writer_start_ts;
  });
  for (const auto& v : all) {
    out << v.row << '\t' << v.writer_start_ts.value << '\t' << to_hex(v.value)
        << '\n';
  }
}

void VersionStore::load(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab1 = line.find('\t');
    const auto tab2 = tab1 == std::string::npos ? tab1 : line.find('\t', tab1 + 1);
    if (tab2 == std::string::npos) {
      throw PreconditionError("store load: line " + std::to_string(line_no) +
                              " needs three tab-separated fields");
    }
    std::uint64_t writer = 0;
    std::istringstream ts(line.substr(tab1 + 1, tab2 - tab1 - 1));
    if (!(ts >> writer) || !ts.eof()) {
      throw PreconditionError("store load: line " + std::to_string(line_no) +
                              " has a bad timestamp");
    }
    put_tentative(line.substr(0, tab1), Timestamp{writer},
                  from_hex(line.substr(tab2 + 1)));
  }
}

}  // namespace wsi

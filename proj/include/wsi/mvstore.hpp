#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "wsi/types.hpp"

namespace wsi {

struct CellVersion {
  RowId row;
  Timestamp writer_start_ts;
  std::string value;

  bool operator==(const CellVersion&) const = default;
};

// In-memory multi-version store. Every write lands as a version keyed by the
// writer's start timestamp; commit timestamps live only in the status oracle
// and are looked up at read time.
//
// Rows are spread over lock stripes; no operation waits on a transaction.
class VersionStore {
 public:
  VersionStore() = default;
  VersionStore(const VersionStore&) = delete;
  VersionStore& operator=(const VersionStore&) = delete;

  // Upserts the version (row, writer). A second write by the same
  // transaction replaces the first.
  void put_tentative(const RowId& row, Timestamp writer, std::string value);

  // Value of the visible version with the largest commit timestamp below
  // `reader`, or the reader's own write if it has one.
  std::optional<std::string> snapshot_read(const RowId& row, Timestamp reader,
                                           const StatusSource& status) const;

  // Drops the version written by an aborted transaction. Throws
  // PreconditionError if the writer is not aborted.
  void purge_aborted(const RowId& row, Timestamp writer,
                     const StatusSource& status);

  // Drops versions no reader starting at or after `low_watermark` can see:
  // aborted versions, and committed versions shadowed by a newer version that
  // committed before the watermark. Returns the number removed.
  std::size_t collect_garbage(Timestamp low_watermark,
                              const StatusSource& status);

  // Versions of `row`, newest writer first.
  std::vector<CellVersion> versions(const RowId& row) const;
  std::size_t version_count() const;
  std::size_t row_count() const;

  // Line format: row \t writer_start_ts \t hex(value)
  void dump(std::ostream& out) const;
  void load(std::istream& in);

 private:
  struct Entry {
    Timestamp writer;
    std::string value;
  };
  // Newest writer first.
  using VersionList = std::vector<Entry>;

  struct Stripe {
    mutable std::mutex mu;
    std::unordered_map<RowId, VersionList> rows;
  };

  static constexpr std::size_t kStripes = 64;
  Stripe& stripe_for(const RowId& row);
  const Stripe& stripe_for(const RowId& row) const;

  std::array<Stripe, kStripes> stripes_;
};

}  // namespace wsi

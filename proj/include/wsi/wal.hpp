#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "wsi/commit_table.hpp"
#include "wsi/types.hpp"

namespace wsi {

// On-disk layout, little-endian throughout:
//
//   "WSIWAL01"
//   repeated { u32 length, u32 crc32(payload), payload[length] }
//
// payload = u8 kind, u64 start_ts, then
//   Commit:    u64 commit_ts, u32 row_count, row_count x { u16 len, bytes }
//   Abort:     nothing
//   TsReserve: u64 reserved_upto
inline constexpr char kWalMagic[8] = {'W', 'S', 'I', 'W', 'A', 'L', '0', '1'};

enum class RecordKind : std::uint8_t {
  kCommit = 1,
  kAbort = 2,
  kTsReserve = 3,
};

struct WalRecord {
  RecordKind kind = RecordKind::kAbort;
  Timestamp start_ts;
  Timestamp commit_ts;          // kCommit
  std::vector<RowId> rows;      // kCommit: the write set
  Timestamp reserved_upto;      // kTsReserve

  static WalRecord commit(Timestamp start, Timestamp commit,
                          std::vector<RowId> rows);
  static WalRecord abort(Timestamp start);
  static WalRecord reservation(Timestamp upto);

  bool operator==(const WalRecord&) const = default;
};

// Framed bytes (length + checksum + payload) for one record.
std::vector<std::uint8_t> encode_record(const WalRecord& rec);
// Decodes a payload (without the 8-byte frame). Throws RecoveryError.
WalRecord decode_payload(std::span<const std::uint8_t> payload);

struct BatchPolicy {
  std::size_t max_bytes = 1024;
  std::chrono::microseconds max_delay{5000};
  // fdatasync after each batch write. Tests on tmpfs may turn it off.
  bool sync = true;
};

// Sequence number of a submitted record; 1-based, in append order.
using Lsn = std::uint64_t;

// Single-file write-ahead log with size/time triggered group flushing.
//
// A background flusher writes the pending buffer once it reaches
// max_bytes, or max_delay after the previous flush, whichever first.
// Acknowledgements follow append order.
class WriteAheadLog {
 public:
  // Opens or creates the log. An existing log is validated; a torn tail is
  // truncated before new records are appended. Throws WalError/RecoveryError.
  WriteAheadLog(std::filesystem::path path, BatchPolicy policy = {});
  ~WriteAheadLog();

  WriteAheadLog(const WriteAheadLog&) = delete;
  WriteAheadLog& operator=(const WriteAheadLog&) = delete;

  // Buffers the record and returns its sequence number without waiting.
  Lsn submit(const WalRecord& rec);
  // Blocks until every record up to `lsn` is durable. Throws WalError if the
  // batch containing it failed or the log was closed before it was flushed.
  void await(Lsn lsn);
  // submit + await.
  void append(const WalRecord& rec) { await(submit(rec)); }

  // Forces the pending buffer out and waits for it.
  void flush();
  // Flushes and closes. Further appends throw WalError.
  void close();
  // Stops the flusher and closes the file without writing the pending
  // buffer, as a process crash would.
  void simulate_crash();

  Lsn durable_lsn() const;
  std::uint64_t flush_count() const;
  const std::filesystem::path& path() const { return path_; }
  const BatchPolicy& policy() const { return policy_; }

  // Test hook: consulted before every batch write; returning true makes the
  // write fail as if the device reported an I/O error.
  void set_fault_injector(std::function<bool()> injector);

 private:
  void flusher_loop();
  bool write_batch(const std::vector<std::uint8_t>& bytes);

  std::filesystem::path path_;
  BatchPolicy policy_;
  int fd_ = -1;

  mutable std::mutex mu_;
  std::condition_variable work_cv_;
  std::condition_variable durable_cv_;
  std::vector<std::uint8_t> buffer_;
  Lsn submitted_ = 0;
  Lsn durable_ = 0;
  Lsn failed_from_ = 0;  // first lsn lost to an I/O failure; 0 if none
  bool force_ = false;
  bool closing_ = false;
  bool closed_ = false;
  bool crashed_ = false;
  std::uint64_t flushes_ = 0;
  std::chrono::steady_clock::time_point last_trigger_;
  std::function<bool()> fault_injector_;
  std::thread flusher_;
};

struct LogContents {
  std::vector<WalRecord> records;
  std::uint64_t valid_bytes = 0;  // offset just past the last good record
  bool torn_tail = false;
};

// Reads every intact record. A damaged final record is reported as a torn
// tail and skipped; damage anywhere else throws RecoveryError.
LogContents read_log(const std::filesystem::path& path);

struct RecoveredState {
  CommitTable table;
  Timestamp reserved_upto;  // highest persisted reservation
};

// Rebuilds oracle state by replaying the log through a fresh table with the
// given capacity.
RecoveredState recover(const std::filesystem::path& path,
                       std::optional<std::size_t> capacity = std::nullopt);
RecoveredState replay(std::span<const WalRecord> records,
                      std::optional<std::size_t> capacity = std::nullopt);

}  // namespace wsi

#pragma once

#include <atomic>
#include <cstdint>
#include <mutex>

#include "wsi/types.hpp"

namespace wsi {

class WriteAheadLog;

inline constexpr std::uint64_t kDefaultReservationBlock = 1000;

// Centralized source of unique, strictly increasing timestamps.
//
// Without a log the oracle is a plain atomic counter. With a log, timestamps
// are handed out from blocks whose upper bound has been made durable first,
// so a restarted oracle seeded with the recovered bound never reissues a
// value.
class TimestampOracle {
 public:
  TimestampOracle();
  TimestampOracle(WriteAheadLog* wal, std::uint64_t block_size,
                  Timestamp recovered_upto = Timestamp{});

  TimestampOracle(const TimestampOracle&) = delete;
  TimestampOracle& operator=(const TimestampOracle&) = delete;

  Timestamp next();

  // Makes the next `count` timestamps available without further persistence
  // and returns the first of them. The returned value is what the next call
  // to next() yields. Throws ReservationError if the reservation could not be
  // persisted; nothing from the failed block is ever issued.
  Timestamp reserve_block(std::uint64_t count);

  // Highest timestamp issued so far (0 if none).
  Timestamp last_issued() const;
  // Highest persisted reservation bound (0 without a log).
  Timestamp reserved_upto() const;
  std::uint64_t block_size() const { return block_size_; }
  bool persistent() const { return wal_ != nullptr; }

 private:
  Timestamp reserve_locked(std::uint64_t count);

  WriteAheadLog* wal_ = nullptr;
  std::uint64_t block_size_ = kDefaultReservationBlock;

  std::atomic<std::uint64_t> counter_{0};  // last issued
  mutable std::mutex mu_;                  // persistent mode only
  std::uint64_t reserved_upto_ = 0;
};

}  // namespace wsi

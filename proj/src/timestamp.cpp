#include "wsi/timestamp.hpp"

#include <algorithm>
#include <string>

#include "wsi/errors.hpp"
#include "wsi/wal.hpp"

namespace wsi {

std::optional<IsolationLevel> parse_isolation_level(const std::string& text) {
  if (text == "si" || text == "SI") return IsolationLevel::kSnapshot;
  if (text == "wsi" || text == "WSI") return IsolationLevel::kWriteSnapshot;
  return std::nullopt;
}

TimestampOracle::TimestampOracle() = default;

TimestampOracle::TimestampOracle(WriteAheadLog* wal, std::uint64_t block_size,
                                 Timestamp recovered_upto)
    : wal_(wal),
      block_size_(std::max<std::uint64_t>(block_size, 1)),
      counter_(recovered_upto.value),
      reserved_upto_(recovered_upto.value) {}

Timestamp TimestampOracle::next() {
  if (wal_ == nullptr) {
    return Timestamp{counter_.fetch_add(1, std::memory_order_acq_rel) + 1};
  }
  std::lock_guard lock(mu_);
  std::uint64_t candidate = counter_.load(std::memory_order_relaxed) + 1;
  if (candidate > reserved_upto_) reserve_locked(block_size_);
  counter_.store(candidate, std::memory_order_release);
  return Timestamp{candidate};
}

Timestamp TimestampOracle::reserve_block(std::uint64_t count) {
  if (count == 0) throw PreconditionError("reserve_block: count must be >= 1");
  if (wal_ == nullptr) {
    return Timestamp{counter_.load(std::memory_order_acquire) + 1};
  }
  std::lock_guard lock(mu_);
  return reserve_locked(count);
}

Timestamp TimestampOracle::reserve_locked(std::uint64_t count) {
  const std::uint64_t first = counter_.load(std::memory_order_relaxed) + 1;
  const std::uint64_t upto = std::max(reserved_upto_, first + count - 1);
  try {
    wal_->append(WalRecord::reservation(Timestamp{upto}));
  } catch (const Error& e) {
    throw ReservationError(std::string("timestamp reservation failed: ") +
                           e.what());
  }
  reserved_upto_ = upto;
  return Timestamp{first};
}

Timestamp TimestampOracle::last_issued() const {
  return Timestamp{counter_.load(std::memory_order_acquire)};
}

Timestamp TimestampOracle::reserved_upto() const {
  if (wal_ == nullptr) return Timestamp{};
  std::lock_guard lock(mu_);
  return Timestamp{reserved_upto_};
}

}  // namespace wsi

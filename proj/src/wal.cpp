#include "wsi/wal.hpp"

#include <fcntl.h>
#include <unistd.h>
#include <zlib.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include "wsi/errors.hpp"

namespace wsi {

namespace {

constexpr std::size_t kFrameBytes = 8;  // u32 length + u32 crc
constexpr std::size_t kMagicBytes = sizeof(kWalMagic);

void put_u8(std::vector<std::uint8_t>& out, std::uint8_t v) { out.push_back(v); }

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
}

template <typename T>
T get_le(std::span<const std::uint8_t> in, std::size_t at) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    v |= static_cast<T>(in[at + i]) << (8 * i);
  }
  return v;
}

std::uint32_t checksum(std::span<const std::uint8_t> bytes) {
  return static_cast<std::uint32_t>(
      ::crc32(0L, bytes.data(), static_cast<uInt>(bytes.size())));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  template <typename T>
  T take() {
    need(sizeof(T));
    T v = get_le<T>(in_, pos_);
    pos_ += sizeof(T);
    return v;
  }
  std::string take_bytes(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw RecoveryError("wal: record payload truncated");
  }
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

std::string errno_text(const char* what) {
  return std::string(what) + ": " + std::strerror(errno);
}

bool write_all(int fd, const std::uint8_t* data, std::size_t size) {
  while (size > 0) {
    ssize_t n = ::write(fd, data, size);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    data += n;
    size -= static_cast<std::size_t>(n);
  }
  return true;
}

}  // namespace

WalRecord WalRecord::commit(Timestamp start, Timestamp commit,
                            std::vector<RowId> rows) {
  WalRecord r;
  r.kind = RecordKind::kCommit;
  r.start_ts = start;
  r.commit_ts = commit;
  r.rows = std::move(rows);
  return r;
}

WalRecord WalRecord::abort(Timestamp start) {
  WalRecord r;
  r.kind = RecordKind::kAbort;
  r.start_ts = start;
  return r;
}

WalRecord WalRecord::reservation(Timestamp upto) {
  WalRecord r;
  r.kind = RecordKind::kTsReserve;
  r.reserved_upto = upto;
  return r;
}

std::vector<std::uint8_t> encode_record(const WalRecord& rec) {
  std::vector<std::uint8_t> out(kFrameBytes);
  put_u8(out, static_cast<std::uint8_t>(rec.kind));
  put_le<std::uint64_t>(out, rec.start_ts.value);
  switch (rec.kind) {
    case RecordKind::kCommit:
      put_le<std::uint64_t>(out, rec.commit_ts.value);
      put_le<std::uint32_t>(out, static_cast<std::uint32_t>(rec.rows.size()));
      for (const auto& row : rec.rows) {
        if (row.size() > std::numeric_limits<std::uint16_t>::max()) {
          throw WalError("wal: row id longer than 65535 bytes");
        }
        put_le<std::uint16_t>(out, static_cast<std::uint16_t>(row.size()));
        out.insert(out.end(), row.begin(), row.end());
      }
      break;
    case RecordKind::kAbort:
      break;
    case RecordKind::kTsReserve:
      put_le<std::uint64_t>(out, rec.reserved_upto.value);
      break;
  }
  const auto payload = std::span(out).subspan(kFrameBytes);
  const auto length = static_cast<std::uint32_t>(payload.size());
  const std::uint32_t crc = checksum(payload);
  for (std::size_t i = 0; i < 4; ++i) {
    out[i] = static_cast<std::uint8_t>(length >> (8 * i));
    out[4 + i] = static_cast<std::uint8_t>(crc >> (8 * i));
  }
  return out;
}

WalRecord decode_payload(std::span<const std::uint8_t> payload) {
  Reader in(payload);
  WalRecord rec;
  const auto kind = in.take<std::uint8_t>();
  rec.start_ts = Timestamp{in.take<std::uint64_t>()};
  switch (kind) {
    case static_cast<std::uint8_t>(RecordKind::kCommit): {
      rec.kind = RecordKind::kCommit;
      rec.commit_ts = Timestamp{in.take<std::uint64_t>()};
      const auto count = in.take<std::uint32_t>();
      rec.rows.reserve(std::min<std::uint32_t>(count, 1024));
      for (std::uint32_t i = 0; i < count; ++i) {
        const auto len = in.take<std::uint16_t>();
        rec.rows.push_back(in.take_bytes(len));
      }
      break;
    }
    case static_cast<std::uint8_t>(RecordKind::kAbort):
      rec.kind = RecordKind::kAbort;
      break;
    case static_cast<std::uint8_t>(RecordKind::kTsReserve):
      rec.kind = RecordKind::kTsReserve;
      rec.reserved_upto = Timestamp{in.take<std::uint64_t>()};
      break;
    default:
      throw RecoveryError("wal: unknown record kind " + std::to_string(kind));
  }
  if (!in.done()) throw RecoveryError("wal: trailing bytes in record payload");
  return rec;
}

LogContents read_log(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw RecoveryError("wal: cannot open " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(file)),
                                        std::istreambuf_iterator<char>());
  LogContents out;
  if (bytes.empty()) return out;
  if (bytes.size() < kMagicBytes) {
    // Crashed while writing the header.
    if (std::memcmp(bytes.data(), kWalMagic, bytes.size()) != 0) {
      throw RecoveryError("wal: bad magic in " + path.string());
    }
    out.torn_tail = true;
    return out;
  }
  if (std::memcmp(bytes.data(), kWalMagic, kMagicBytes) != 0) {
    throw RecoveryError("wal: bad magic in " + path.string());
  }

  const std::span<const std::uint8_t> all(bytes);
  std::size_t pos = kMagicBytes;
  out.valid_bytes = pos;
  while (pos < bytes.size()) {
    const std::size_t remaining = bytes.size() - pos;
    if (remaining < kFrameBytes) {
      out.torn_tail = true;
      break;
    }
    const auto length = get_le<std::uint32_t>(all, pos);
    const auto crc = get_le<std::uint32_t>(all, pos + 4);
    if (remaining - kFrameBytes < length) {
      out.torn_tail = true;
      break;
    }
    const auto payload = all.subspan(pos + kFrameBytes, length);
    const std::size_t end = pos + kFrameBytes + length;
    const bool last = end == bytes.size();
    if (checksum(payload) != crc) {
      if (last) {
        out.torn_tail = true;
        break;
      }
      throw RecoveryError("wal: checksum mismatch at offset " +
                          std::to_string(pos));
    }
    out.records.push_back(decode_payload(payload));
    pos = end;
    out.valid_bytes = pos;
  }
  return out;
}

RecoveredState replay(std::span<const WalRecord> records,
                      std::optional<std::size_t> capacity) {
  RecoveredState state{CommitTable(capacity), Timestamp{}};
  for (const auto& rec : records) {
    switch (rec.kind) {
      case RecordKind::kCommit:
        for (const auto& row : rec.rows) state.table.record_write(row, rec.commit_ts);
        state.table.record_commit(rec.start_ts, rec.commit_ts);
        break;
      case RecordKind::kAbort:
        state.table.record_abort(rec.start_ts);
        break;
      case RecordKind::kTsReserve:
        state.reserved_upto = std::max(state.reserved_upto, rec.reserved_upto);
        break;
    }
  }
  return state;
}

RecoveredState recover(const std::filesystem::path& path,
                       std::optional<std::size_t> capacity) {
  if (!std::filesystem::exists(path)) return {CommitTable(capacity), Timestamp{}};
  const LogContents contents = read_log(path);
  return replay(contents.records, capacity);
}

WriteAheadLog::WriteAheadLog(std::filesystem::path path, BatchPolicy policy)
    : path_(std::move(path)), policy_(policy) {
  std::uint64_t keep = 0;
  const bool existed = std::filesystem::exists(path_) &&
                       std::filesystem::file_size(path_) > 0;
  if (existed) keep = read_log(path_).valid_bytes;

  fd_ = ::open(path_.c_str(), O_WRONLY | O_CREAT, 0644);
  if (fd_ < 0) throw WalError(errno_text(("wal: open " + path_.string()).c_str()));
  if (keep < kMagicBytes) {
    if (::ftruncate(fd_, 0) != 0 || ::lseek(fd_, 0, SEEK_SET) < 0 ||
        !write_all(fd_, reinterpret_cast<const std::uint8_t*>(kWalMagic), kMagicBytes) ||
        (policy_.sync && ::fdatasync(fd_) != 0)) {
      const std::string msg = errno_text("wal: writing header");
      ::close(fd_);
      throw WalError(msg);
    }
  } else {
    if (::ftruncate(fd_, static_cast<off_t>(keep)) != 0 ||
        ::lseek(fd_, static_cast<off_t>(keep), SEEK_SET) < 0) {
      const std::string msg = errno_text("wal: truncating torn tail");
      ::close(fd_);
      throw WalError(msg);
    }
  }
  last_trigger_ = std::chrono::steady_clock::now();
  flusher_ = std::thread([this] { flusher_loop(); });
}

WriteAheadLog::~WriteAheadLog() {
  try {
    close();
  } catch (...) {
  }
}

Lsn WriteAheadLog::submit(const WalRecord& rec) {
  auto bytes = encode_record(rec);
  std::lock_guard lock(mu_);
  if (closed_ || closing_) throw WalError("wal: append after close");
  if (buffer_.empty()) {
    // After an idle period the first record opens a new batching window
    // instead of being flushed alone.
    const auto now = std::chrono::steady_clock::now();
    if (now >= last_trigger_ + policy_.max_delay) last_trigger_ = now;
  }
  buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
  const Lsn lsn = ++submitted_;
  if (buffer_.size() >= policy_.max_bytes) work_cv_.notify_one();
  else if (buffer_.size() == bytes.size()) work_cv_.notify_one();  // arm timer
  return lsn;
}

void WriteAheadLog::await(Lsn lsn) {
  std::unique_lock lock(mu_);
  durable_cv_.wait(lock, [&] {
    return durable_ >= lsn || (failed_from_ != 0 && lsn >= failed_from_) ||
           crashed_ || (closed_ && durable_ < lsn);
  });
  if (failed_from_ != 0 && lsn >= failed_from_) {
    throw WalError("wal: write failed for record " + std::to_string(lsn));
  }
  if (durable_ < lsn) throw WalError("wal: closed before record was durable");
}

void WriteAheadLog::flush() {
  Lsn target;
  {
    std::lock_guard lock(mu_);
    if (closed_) return;
    target = submitted_;
    if (durable_ >= target) return;
    force_ = true;
  }
  work_cv_.notify_one();
  await(target);
}

void WriteAheadLog::close() {
  {
    std::lock_guard lock(mu_);
    if (closed_) return;
    closing_ = true;
  }
  work_cv_.notify_one();
  if (flusher_.joinable()) flusher_.join();
  std::lock_guard lock(mu_);
  if (fd_ >= 0) ::close(fd_);
  fd_ = -1;
  closed_ = true;
  durable_cv_.notify_all();
}

void WriteAheadLog::simulate_crash() {
  {
    std::lock_guard lock(mu_);
    if (closed_) return;
    crashed_ = true;
    buffer_.clear();
  }
  work_cv_.notify_one();
  if (flusher_.joinable()) flusher_.join();
  std::lock_guard lock(mu_);
  if (fd_ >= 0) ::close(fd_);
  fd_ = -1;
  closed_ = true;
  durable_cv_.notify_all();
}

Lsn WriteAheadLog::durable_lsn() const {
  std::lock_guard lock(mu_);
  return durable_;
}

std::uint64_t WriteAheadLog::flush_count() const {
  std::lock_guard lock(mu_);
  return flushes_;
}

void WriteAheadLog::set_fault_injector(std::function<bool()> injector) {
  std::lock_guard lock(mu_);
  fault_injector_ = std::move(injector);
}

bool WriteAheadLog::write_batch(const std::vector<std::uint8_t>& bytes) {
  if (!write_all(fd_, bytes.data(), bytes.size())) return false;
  return !policy_.sync || ::fdatasync(fd_) == 0;
}

void WriteAheadLog::flusher_loop() {
  std::unique_lock lock(mu_);
  while (true) {
    if (crashed_) return;
    if (buffer_.empty()) {
      force_ = false;
      if (closing_) return;
      work_cv_.wait(lock, [&] { return !buffer_.empty() || closing_ || crashed_; });
      continue;
    }
    const auto deadline = last_trigger_ + policy_.max_delay;
    const bool due = buffer_.size() >= policy_.max_bytes || force_ || closing_ ||
                     std::chrono::steady_clock::now() >= deadline;
    if (!due) {
      work_cv_.wait_until(lock, deadline, [&] {
        return buffer_.size() >= policy_.max_bytes || force_ || closing_ || crashed_;
      });
      continue;
    }

    std::vector<std::uint8_t> batch;
    batch.swap(buffer_);
    const Lsn upto = submitted_;
    force_ = false;
    last_trigger_ = std::chrono::steady_clock::now();
    auto injector = fault_injector_;
    lock.unlock();
    const bool ok = !(injector && injector()) && write_batch(batch);
    lock.lock();
    ++flushes_;
    if (ok) {
      durable_ = upto;
    } else if (failed_from_ == 0) {
      failed_from_ = durable_ + 1;
    }
    durable_cv_.notify_all();
  }
}

}  // namespace wsi

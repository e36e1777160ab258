#pragma once

#include <cstdint>
#include <random>

namespace wsi::workload {

using Rng = std::mt19937_64;

// Generalized harmonic number: sum_{i=1..n} i^-theta. Exact summation up to
// a cutoff, Euler-Maclaurin beyond it.
double zeta(std::uint64_t n, double theta);

// Zipfian over [0, items) with item 0 most popular, following the
// rejection-free method of Gray et al. as used by YCSB.
class ZipfianGenerator {
 public:
  ZipfianGenerator(std::uint64_t items, double theta);
  ZipfianGenerator(std::uint64_t items, double theta, double zetan);

  std::uint64_t next(Rng& rng) const;
  std::uint64_t items() const { return items_; }
  double theta() const { return theta_; }

 private:
  std::uint64_t items_;
  double theta_;
  double zetan_;
  double alpha_;
  double eta_;
  double half_pow_theta_;
};

// YCSB's 64-bit FNV-1a over the little-endian bytes of `value`, folded to a
// non-negative number the way Java's Math.abs does.
std::uint64_t fnv_hash64(std::uint64_t value);

// Zipfian popularity scattered over the key space: draws from a zipfian over
// ten billion items and hashes into [0, items).
class ScrambledZipfianGenerator {
 public:
  static constexpr std::uint64_t kSourceItems = 10'000'000'000ULL;
  // zeta(kSourceItems, 0.99), as hard-coded by YCSB.
  static constexpr double kZetan = 26.46902820178302;

  ScrambledZipfianGenerator(std::uint64_t items, double theta);
  std::uint64_t next(Rng& rng) const;

 private:
  std::uint64_t items_;
  ZipfianGenerator source_;
};

// Popularity concentrated on the highest ids, standing in for the most
// recently inserted rows: items - 1 - zipf(items).
class SkewedLatestGenerator {
 public:
  SkewedLatestGenerator(std::uint64_t items, double theta);
  std::uint64_t next(Rng& rng) const;

 private:
  std::uint64_t items_;
  ZipfianGenerator zipf_;
};

}  // namespace wsi::workload

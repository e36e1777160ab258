#include "wsi/generators.hpp"

#include <cmath>
#include <cstdlib>

#include "wsi/errors.hpp"

namespace wsi::workload {

namespace {

constexpr std::uint64_t kExactTerms = 1'000'000;

double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace

double zeta(std::uint64_t n, double theta) {
  double sum = 0.0;
  const std::uint64_t exact = n < kExactTerms ? n : kExactTerms;
  for (std::uint64_t i = 1; i <= exact; ++i) {
    sum += 1.0 / std::pow(static_cast<double>(i), theta);
  }
  if (n <= exact) return sum;
  // Tail sum_{i=m+1..n} f(i) with f(x) = x^-theta, m = exact:
  // integral_m^n f + (f(n) - f(m)) / 2 - (f'(n) - f'(m)) / 12.
  const double m = static_cast<double>(exact);
  const double nd = static_cast<double>(n);
  auto f = [&](double x) { return std::pow(x, -theta); };
  auto df = [&](double x) { return -theta * std::pow(x, -theta - 1.0); };
  double integral;
  if (std::abs(theta - 1.0) < 1e-12) {
    integral = std::log(nd / m);
  } else {
    integral = (std::pow(nd, 1.0 - theta) - std::pow(m, 1.0 - theta)) / (1.0 - theta);
  }
  return sum + integral + (f(nd) - f(m)) / 2.0 - (df(nd) - df(m)) / 12.0;
}

ZipfianGenerator::ZipfianGenerator(std::uint64_t items, double theta)
    : ZipfianGenerator(items, theta, zeta(items, theta)) {}

ZipfianGenerator::ZipfianGenerator(std::uint64_t items, double theta,
                                   double zetan)
    : items_(items), theta_(theta), zetan_(zetan) {
  if (items == 0) throw PreconditionError("zipfian: need at least one item");
  if (!(theta > 0.0) || theta == 1.0) {
    throw PreconditionError("zipfian: theta must be positive and not 1");
  }
  const double zeta2 = zeta(2, theta);
  alpha_ = 1.0 / (1.0 - theta);
  eta_ = (1.0 - std::pow(2.0 / static_cast<double>(items), 1.0 - theta)) /
         (1.0 - zeta2 / zetan_);
  half_pow_theta_ = 1.0 + std::pow(0.5, theta);
}

std::uint64_t ZipfianGenerator::next(Rng& rng) const {
  const double u = uniform01(rng);
  const double uz = u * zetan_;
  if (uz < 1.0) return 0;
  if (uz < half_pow_theta_ && items_ > 1) return 1;
  const auto v = static_cast<std::uint64_t>(
      static_cast<double>(items_) * std::pow(eta_ * u - eta_ + 1.0, alpha_));
  return v < items_ ? v : items_ - 1;
}

std::uint64_t fnv_hash64(std::uint64_t value) {
  constexpr std::uint64_t kOffsetBasis = 0xCBF29CE484222325ULL;
  constexpr std::uint64_t kPrime = 1099511628211ULL;
  std::uint64_t hash = kOffsetBasis;
  for (int i = 0; i < 8; ++i) {
    const std::uint64_t octet = value & 0xff;
    value >>= 8;
    hash ^= octet;
    hash *= kPrime;
  }
  const auto signed_hash = static_cast<std::int64_t>(hash);
  // Java's Math.abs(Long.MIN_VALUE) stays negative; keep it in range.
  if (signed_hash == INT64_MIN) return static_cast<std::uint64_t>(INT64_MAX);
  return static_cast<std::uint64_t>(std::llabs(signed_hash));
}

ScrambledZipfianGenerator::ScrambledZipfianGenerator(std::uint64_t items,
                                                     double theta)
    : items_(items),
      source_(kSourceItems, theta,
              theta == 0.99 ? kZetan : zeta(kSourceItems, theta)) {
  if (items == 0) throw PreconditionError("zipfian: need at least one item");
}

std::uint64_t ScrambledZipfianGenerator::next(Rng& rng) const {
  return fnv_hash64(source_.next(rng)) % items_;
}

SkewedLatestGenerator::SkewedLatestGenerator(std::uint64_t items, double theta)
    : items_(items), zipf_(items, theta) {}

std::uint64_t SkewedLatestGenerator::next(Rng& rng) const {
  return items_ - 1 - zipf_.next(rng);
}

}  // namespace wsi::workload

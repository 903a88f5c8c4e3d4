#pragma once

#include <cstdint>
#include <random>

namespace distdyn {

// Inverse of the standard normal CDF (Acklam's rational approximation plus one
// Halley refinement step); accurate to ~1e-15 over (0,1).
double inverse_normal_cdf(double p);

// Deterministic random stream with reproducible substreams.
//
// Wraps std::mt19937_64 (bit-exact across platforms by standard) but converts
// to doubles in-house: the std::*_distribution adapters are not required to be
// bit-portable across standard libraries. substream(i) derives a fresh,
// statistically independent stream from the original seed and the index, so
// parallel loops can hand stream b to replication b regardless of thread
// scheduling.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed);

  RngStream substream(std::uint64_t index) const;

  std::uint64_t next_u64();

  // Uniform on [0,1): 53-bit mantissa, never returns 1.
  double uniform();
  // Uniform on (0,1): never returns 0 or 1 (safe for inverse-CDF sampling).
  double uniform_open();
  // Standard normal via inverse-CDF transform of uniform_open().
  double normal();
  // Unbiased integer in [0,n) by rejection.
  std::size_t uniform_index(std::size_t n);

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace distdyn

#pragma once

#include <cstdint>

namespace switchlab {

// Counter-based generator: every draw is a pure function of
// (master seed, stream, trial, index), so trials can be evaluated in any
// order or partitioned across threads without changing the result stream.
namespace rng_detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix4(std::uint64_t a, std::uint64_t b, std::uint64_t c,
                          std::uint64_t d) {
  std::uint64_t h = splitmix64(a);
  h = splitmix64(h ^ (b + 0x8e9d5aab9f0c1b37ULL));
  h = splitmix64(h ^ (c + 0xc6a4a7935bd1e995ULL));
  h = splitmix64(h ^ (d + 0xff51afd7ed558ccdULL));
  return h;
}

} // namespace rng_detail

// Domain-separated streams. Values are part of the on-disk reproducibility
// contract: changing them changes every sampled artifact.
enum class rng_stream : std::uint64_t {
  var_stage = 1,
  block_stage = 2,
  family = 3,
};

class counter_rng {
public:
  explicit counter_rng(std::uint64_t master_seed) : master_(master_seed) {}

  std::uint64_t master_seed() const noexcept { return master_; }

  // Raw 64-bit draw, uniform over [0, 2^64).
  std::uint64_t draw(rng_stream stream, std::uint64_t trial,
                     std::uint64_t index) const {
    return rng_detail::mix4(master_, static_cast<std::uint64_t>(stream), trial,
                            index);
  }

  // Bernoulli with dyadic probability num/2^log2_den, exact: compares the
  // top log2_den bits of a draw against num. Requires log2_den <= 64.
  bool bernoulli_dyadic(rng_stream stream, std::uint64_t trial,
                        std::uint64_t index, std::uint64_t num,
                        unsigned log2_den) const {
    if (log2_den == 0) return num > 0;
    std::uint64_t r = draw(stream, trial, index);
    if (log2_den < 64) r >>= (64 - log2_den);
    return r < num;
  }

  // Uniform in [0, bound) via fixed-point multiply; bias < 2^-64 per draw,
  // fine for rejection-sampling tries but not for exact probabilities
  // (those go through bernoulli_dyadic).
  std::uint64_t bounded(rng_stream stream, std::uint64_t trial,
                        std::uint64_t index, std::uint64_t bound) const {
    std::uint64_t r = draw(stream, trial, index);
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(r) * bound) >> 64);
  }

private:
  std::uint64_t master_;
};

} // namespace switchlab

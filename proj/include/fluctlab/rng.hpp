#pragma once

// Counter-based random numbers.
//
// Every random quantity in the library is a pure function of
// (seed, replica, stream, coordinates).  Nothing is drawn from a
// sequential generator whose state depends on evaluation order, so a site
// weight or a bond clock can be recomputed in isolation and ensembles are
// bit-identical regardless of scheduling.

#include <array>
#include <cmath>
#include <cstdint>

namespace fluctlab {

/// (seed, replica) pair that fully determines one replica's randomness.
struct StreamKey {
  std::uint64_t seed = 0;
  std::uint64_t replica = 0;

  friend bool operator==(const StreamKey&, const StreamKey&) = default;
};

/// Disjoint sub-streams of a replica.
enum class Stream : std::uint32_t {
  LatticeWeights = 0, ///< LPP site weights, keyed by (i, j)
  Padding = 1,        ///< geometric zero runs of the padded boundary
  InitialOccupancy = 2,
  BondClocks = 3,
  Auxiliary = 4,
};

namespace detail {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline constexpr void mulhilo32(std::uint32_t a, std::uint32_t b,
                                std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = std::uint64_t{a} * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

} // namespace detail

/// Philox4x32-10 (Salmon et al., SC'11).
class Philox4x32 {
public:
  using Counter = std::array<std::uint32_t, 4>;

  constexpr explicit Philox4x32(std::uint64_t key)
      : k0_(static_cast<std::uint32_t>(key)), k1_(static_cast<std::uint32_t>(key >> 32)) {}

  constexpr Counter operator()(Counter c) const {
    std::uint32_t k0 = k0_, k1 = k1_;
    for (int r = 0; r < 10; ++r) {
      std::uint32_t hi0, lo0, hi1, lo1;
      detail::mulhilo32(0xD2511F53u, c[0], hi0, lo0);
      detail::mulhilo32(0xCD9E8D57u, c[2], hi1, lo1);
      c = {hi1 ^ c[1] ^ k0, lo1, hi0 ^ c[3] ^ k1, lo0};
      k0 += 0x9E3779B9u;
      k1 += 0xBB67AE85u;
    }
    return c;
  }

private:
  std::uint32_t k0_, k1_;
};

/// Uniform on [0, 1) with 53 random bits.
inline constexpr double to_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = (std::uint64_t{hi} << 32) | lo;
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Inverse-CDF exponential sample; u in [0, 1).
inline double exponential_from_unit(double u, double rate) { return -std::log1p(-u) / rate; }

/// Number of failures before the first success, P(n) = p (1-p)^n.
inline std::uint64_t geometric_from_unit(double u, double success_prob) {
  if (success_prob >= 1.0) return 0;
  const double n = std::floor(std::log1p(-u) / std::log1p(-success_prob));
  return static_cast<std::uint64_t>(n);
}

/// Counter-based generator bound to one replica.  Each call is a pure
/// function of its arguments.
class CounterRng {
public:
  explicit CounterRng(const StreamKey& key)
      : philox_(detail::splitmix64(key.seed ^ detail::splitmix64(key.replica + 0x632BE59BD9B4E019ULL))) {}

  /// Two uniforms from the block addressed by (stream, a, b, c).
  std::array<double, 2> pair(Stream s, std::uint32_t a, std::uint32_t b, std::uint32_t c = 0) const {
    const auto out = philox_({a, b, static_cast<std::uint32_t>(s), c});
    return {to_unit(out[0], out[1]), to_unit(out[2], out[3])};
  }

  double uniform(Stream s, std::uint32_t a, std::uint32_t b = 0, std::uint32_t c = 0) const {
    return pair(s, a, b, c)[0];
  }

  /// Uniform attached to lattice site (i, j).  Sites (2k, j) and (2k+1, j)
  /// share one Philox block.
  double site_uniform(std::uint32_t i, std::uint32_t j) const {
    return pair(Stream::LatticeWeights, i >> 1, j)[i & 1u];
  }

private:
  Philox4x32 philox_;
};

/// Maps a signed lattice coordinate onto the unsigned counter space.
inline constexpr std::uint32_t signed_coordinate(std::int64_t x) {
  return static_cast<std::uint32_t>(x + 0x80000000LL);
}

} // namespace fluctlab

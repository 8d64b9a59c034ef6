#pragma once

// Counter-based random streams.
//
// Every Monte Carlo replicate owns a stream addressed by (master_seed,
// stream_id); a replicate's draws depend only on its address and never on
// which worker produced them.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace vecext {

struct RngPolicy {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_id = 0;

  RngPolicy with_stream(std::uint64_t id) const { return {master_seed, id}; }

  // Derives an independent seed for a sub-experiment (e.g. one rung of a
  // ladder) so that sub-experiments do not share replicate streams.
  RngPolicy derive(std::uint64_t salt) const {
    std::uint64_t z = master_seed + 0x9E3779B97F4A7C15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return {z ^ (z >> 31), stream_id};
  }

  friend bool operator==(const RngPolicy&, const RngPolicy&) = default;
};

namespace detail {

inline void philox_round(std::array<std::uint32_t, 4>& ctr,
                         std::array<std::uint32_t, 2> key) {
  const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * ctr[0];
  const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * ctr[2];
  const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
  const auto lo0 = static_cast<std::uint32_t>(p0);
  const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
  const auto lo1 = static_cast<std::uint32_t>(p1);
  ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
}

inline std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                                  std::array<std::uint32_t, 2> key) {
  for (int r = 0; r < 10; ++r) {
    philox_round(ctr, key);
    key[0] += 0x9E3779B9u;
    key[1] += 0xBB67AE85u;
  }
  return ctr;
}

// Ziggurat tables (128 layers, Doornik's ZIGNOR layout).
struct ZigguratTables {
  static constexpr int kLayers = 128;
  static constexpr double kR = 3.442619855899;
  static constexpr double kV = 9.91256303526217e-3;
  std::array<double, kLayers + 1> x{};
  std::array<double, kLayers> ratio{};

  ZigguratTables() {
    double f = std::exp(-0.5 * kR * kR);
    x[0] = kV / f;
    x[1] = kR;
    x[kLayers] = 0.0;
    for (int i = 2; i < kLayers; ++i) {
      x[i] = std::sqrt(-2.0 * std::log(kV / x[i - 1] + f));
      f = std::exp(-0.5 * x[i] * x[i]);
    }
    for (int i = 0; i < kLayers; ++i) ratio[i] = x[i + 1] / x[i];
  }
};

inline const ZigguratTables& ziggurat() {
  static const ZigguratTables tables;
  return tables;
}

}  // namespace detail

// Sequential view of one stream. The stream address (master_seed, stream_id)
// is hashed through Philox4x32-10 into the 256-bit state of a xoshiro256++
// generator, so each replicate's draws are a pure function of its address.
class RandomStream {
 public:
  explicit RandomStream(RngPolicy policy) {
    const std::array<std::uint32_t, 2> key{static_cast<std::uint32_t>(policy.master_seed),
                                           static_cast<std::uint32_t>(policy.master_seed >> 32)};
    for (std::uint32_t half = 0; half < 2; ++half) {
      const auto out = detail::philox4x32_10(
          {half, 0x5EED0000u, static_cast<std::uint32_t>(policy.stream_id),
           static_cast<std::uint32_t>(policy.stream_id >> 32)},
          key);
      s_[2 * half] = (std::uint64_t{out[1]} << 32) | out[0];
      s_[2 * half + 1] = (std::uint64_t{out[3]} << 32) | out[2];
    }
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  std::uint32_t next_u32() { return static_cast<std::uint32_t>(next_u64()); }

  // Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  double normal() {
    const auto& zt = *zig_;
    for (;;) {
      const std::uint64_t r = next_u64();
      const int i = static_cast<int>(r & 0x7F);
      const double u = 2.0 * ((static_cast<double>(r >> 11) + 0.5) * 0x1.0p-53) - 1.0;
      if (std::fabs(u) < zt.ratio[i]) return u * zt.x[i];
      if (i == 0) return tail(u < 0.0);
      const double x = u * zt.x[i];
      const double f0 = std::exp(-0.5 * (zt.x[i] * zt.x[i] - x * x));
      const double f1 = std::exp(-0.5 * (zt.x[i + 1] * zt.x[i + 1] - x * x));
      if (f1 + uniform() * (f0 - f1) < 1.0) return x;
    }
  }

  void fill_normal(double* out, std::size_t count) {
    for (std::size_t k = 0; k < count; ++k) out[k] = normal();
  }

 private:
  double tail(bool negative) {
    constexpr double r = detail::ZigguratTables::kR;
    double x = 0.0;
    double y = 0.0;
    do {
      x = std::log(uniform()) / r;
      y = std::log(uniform());
    } while (-2.0 * y < x * x);
    return negative ? x - r : r - x;
  }

  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::array<std::uint64_t, 4> s_{};
  const detail::ZigguratTables* zig_ = &detail::ziggurat();
};

}  // namespace vecext

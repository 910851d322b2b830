// Counter-based random streams. Every random number is a pure function of
// (seed, stream, domain, counter), so trajectories are reproducible no matter
// how they are scheduled across workers.
#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace qbt {

/// Philox4x32-10 block function.
class Philox4x32 {
 public:
  using Block = std::array<std::uint32_t, 4>;

  explicit Philox4x32(std::uint64_t seed)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

  Block operator()(Block ctr) const {
    std::array<std::uint32_t, 2> k = key_;
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = std::uint64_t{kM0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kM1} * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ k[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ k[1], static_cast<std::uint32_t>(p0)};
      k[0] += kW0;
      k[1] += kW1;
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;
  std::array<std::uint32_t, 2> key_;
};

/// Random draws addressed by (domain, level, counter, sub) within one stream.
class CounterRng {
 public:
  enum class Domain : std::uint8_t { Wiener = 1, Jump = 2, Generic = 3 };

  CounterRng(std::uint64_t seed, std::uint64_t stream) : philox_(seed), stream_(stream) {}

  /// Two uniforms in the open interval (0, 1).
  std::array<double, 2> uniforms(Domain domain, std::uint32_t level, std::uint64_t counter,
                                 std::uint32_t sub = 0) const;
  double uniform(Domain domain, std::uint32_t level, std::uint64_t counter, std::uint32_t sub = 0) const {
    return uniforms(domain, level, counter, sub)[0];
  }
  /// Standard normal via Box-Muller on one counter block.
  double normal(Domain domain, std::uint32_t level, std::uint64_t counter, std::uint32_t sub = 0) const;

 private:
  Philox4x32 philox_;
  std::uint64_t stream_;
};

/// Measurement noise for one trajectory.
///
/// Wiener increments are generated on a coarse grid of step `noise_dt` and
/// refined by Brownian bridges down to the integration step `dt`
/// (noise_dt / dt must be a power of two). Running the same stream at dt and
/// dt/2 therefore sees the same Brownian path.
///
/// Click decisions use exponential hazard thresholds: a click fires when the
/// accumulated hazard -log(1 - p) crosses an Exp(1) threshold. Conditional on
/// the past each step clicks with probability exactly p, and paths at
/// different dt stay coupled.
class NoiseStream {
 public:
  NoiseStream(std::uint64_t seed, std::uint64_t stream, double dt, double noise_dt = 0);

  double dt() const { return dt_; }
  /// Increment of the Wiener process over the next integration step.
  double wiener_increment();
  /// Bernoulli(p) for the next integration step.
  bool click(double probability);

 private:
  CounterRng rng_;
  double dt_;
  double noise_dt_;
  int levels_ = 0;
  std::uint64_t wiener_step_ = 0;
  std::vector<double> increments_;
  std::uint64_t jumps_ = 0;
  double hazard_ = 0;
  double threshold_ = 0;
};

}  // namespace qbt

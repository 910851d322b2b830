#include "qbt/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qbt {

std::array<double, 2> CounterRng::uniforms(Domain domain, std::uint32_t level, std::uint64_t counter,
                                           std::uint32_t sub) const {
  const Philox4x32::Block out = philox_({static_cast<std::uint32_t>(counter),
                                         static_cast<std::uint32_t>(counter >> 32) ^ (sub * 0x9E3779B1u),
                                         static_cast<std::uint32_t>(stream_),
                                         (static_cast<std::uint32_t>(stream_ >> 32) & 0xFFFFu) |
                                             ((level & 0xFFu) << 16) |
                                             (static_cast<std::uint32_t>(domain) << 24)});
  auto to_unit = [](std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = (std::uint64_t{hi >> 5} << 26) | (lo >> 6);  // 53 bits
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  };
  return {to_unit(out[0], out[1]), to_unit(out[2], out[3])};
}

double CounterRng::normal(Domain domain, std::uint32_t level, std::uint64_t counter, std::uint32_t sub) const {
  const auto u = uniforms(domain, level, counter, sub);
  return std::sqrt(-2.0 * std::log(u[0])) * std::cos(2.0 * std::numbers::pi * u[1]);
}

NoiseStream::NoiseStream(std::uint64_t seed, std::uint64_t stream, double dt, double noise_dt)
    : rng_(seed, stream), dt_(dt), noise_dt_(noise_dt > 0 ? noise_dt : dt) {
  if (!(dt > 0) || !std::isfinite(dt)) throw std::invalid_argument("NoiseStream: dt must be positive");
  const double ratio = noise_dt_ / dt_;
  const long r = std::lround(ratio);
  if (r < 1 || std::abs(ratio - static_cast<double>(r)) > 1e-9 * ratio || (r & (r - 1)) != 0)
    throw std::invalid_argument("NoiseStream: noise_dt / dt must be a power of two");
  while ((1L << levels_) < r) ++levels_;
  threshold_ = -std::log(rng_.uniform(CounterRng::Domain::Jump, 0, 0));
}

double NoiseStream::wiener_increment() {
  const std::uint64_t per = std::uint64_t{1} << levels_;
  const std::uint64_t coarse = wiener_step_ >> levels_;
  const std::uint64_t sub = wiener_step_ & (per - 1);
  if (sub == 0) {
    increments_.assign(1, std::sqrt(noise_dt_) * rng_.normal(CounterRng::Domain::Wiener, 0, coarse));
    double h = noise_dt_;
    for (int level = 1; level <= levels_; ++level) {
      std::vector<double> finer(increments_.size() * 2);
      for (std::size_t i = 0; i < increments_.size(); ++i) {
        const double xi = rng_.normal(CounterRng::Domain::Wiener, static_cast<std::uint32_t>(level), coarse,
                                      static_cast<std::uint32_t>(i));
        const double half = 0.5 * increments_[i];
        const double spread = 0.5 * std::sqrt(h) * xi;
        finer[2 * i] = half + spread;
        finer[2 * i + 1] = half - spread;
      }
      increments_.swap(finer);
      h *= 0.5;
    }
  }
  ++wiener_step_;
  return increments_[sub];
}

bool NoiseStream::click(double probability) {
  if (!(probability >= 0) || probability > 1) throw std::domain_error("click probability outside [0, 1]");
  if (probability == 0) return false;
  hazard_ += -std::log1p(-probability);
  if (hazard_ < threshold_) return false;
  hazard_ = 0;
  ++jumps_;
  threshold_ = -std::log(rng_.uniform(CounterRng::Domain::Jump, 0, jumps_));
  return true;
}

}  // namespace qbt

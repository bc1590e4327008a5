// Test-only oracles, independent of the library's closed forms: a
// truncated-series matrix exponential, a fine-step RK4 integrator for
// the second-order impedance law, and a tiny deterministic RNG.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace oracle {

// sum_{k=0}^{terms} (A t)^k / k!
inline Eigen::Matrix2d expm_series(const Eigen::Matrix2d& a, double t,
                                   int terms = 30) {
  const Eigen::Matrix2d at = a * t;
  Eigen::Matrix2d sum = Eigen::Matrix2d::Identity();
  Eigen::Matrix2d term = Eigen::Matrix2d::Identity();
  for (int k = 1; k <= terms; ++k) {
    term = term * at / static_cast<double>(k);
    sum += term;
  }
  return sum;
}

struct State {
  double y = 0.0;
  double v = 0.0;
};

// Classic fourth-order Runge-Kutta on M y'' + D y' + K y = F (constant
// force), step h, sampling every `sample_stride` steps. Returns
// total_steps / sample_stride + 1 samples including the initial state.
inline std::vector<State> rk4_constant_force(double mass, double damping,
                                             double stiffness, double force,
                                             double h, long long total_steps,
                                             long long sample_stride) {
  auto accel = [&](double y, double v) {
    return (force - damping * v - stiffness * y) / mass;
  };
  std::vector<State> samples;
  samples.reserve(static_cast<size_t>(total_steps / sample_stride) + 1);
  State s;
  samples.push_back(s);
  for (long long k = 1; k <= total_steps; ++k) {
    const double k1y = s.v, k1v = accel(s.y, s.v);
    const double k2y = s.v + 0.5 * h * k1v,
                 k2v = accel(s.y + 0.5 * h * k1y, s.v + 0.5 * h * k1v);
    const double k3y = s.v + 0.5 * h * k2v,
                 k3v = accel(s.y + 0.5 * h * k2y, s.v + 0.5 * h * k2v);
    const double k4y = s.v + h * k3v,
                 k4v = accel(s.y + h * k3y, s.v + h * k3v);
    s.y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
    s.v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    if (k % sample_stride == 0) samples.push_back(s);
  }
  return samples;
}

// splitmix64, good enough for test sampling and fully portable.
struct Rng {
  std::uint64_t state;

  explicit Rng(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  double uniform(double lo, double hi) {
    const double u =
        static_cast<double>(next() >> 11) * 0x1.0p-53;  // [0, 1)
    return lo + (hi - lo) * u;
  }

  int uniform_int(int lo, int hi) {  // inclusive
    return lo + static_cast<int>(next() % static_cast<std::uint64_t>(
                                              hi - lo + 1));
  }
};

}  // namespace oracle

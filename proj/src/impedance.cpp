#include "tactsim/impedance.hpp"

#include <cmath>
#include <stdexcept>

namespace tactsim {

ImpedanceParams::ImpedanceParams(double mass_kg, double damping_ns_per_m,
                                 double stiffness_n_per_m)
    : mass_(mass_kg), damping_(damping_ns_per_m), stiffness_(stiffness_n_per_m) {
  if (!std::isfinite(mass_) || !std::isfinite(damping_) ||
      !std::isfinite(stiffness_))
    throw std::invalid_argument("impedance parameters must be finite");
  if (!(mass_ > 0.0))
    throw std::invalid_argument("impedance mass must be positive");
  if (damping_ < 0.0 || stiffness_ < 0.0)
    throw std::invalid_argument("damping and stiffness must be non-negative");
}

ContinuousModel continuous_matrices(const ImpedanceParams& params) {
  ContinuousModel model;
  model.state_matrix << 0.0, 1.0,  //
      -params.stiffness() / params.mass(), -params.damping() / params.mass();
  model.input_matrix << 0.0, 1.0 / params.mass();
  return model;
}

CharacteristicCoefficients characteristic(const ImpedanceParams& params) {
  CharacteristicCoefficients coeffs;
  coeffs.a = -params.damping() / params.mass();
  coeffs.b = -params.stiffness() / params.mass();
  coeffs.c = 1.0 / params.mass();

  // Roots of s^2 - a s - b.
  const double half_a = 0.5 * coeffs.a;
  const double disc = half_a * half_a + coeffs.b;
  if (disc >= 0.0) {
    const double root = std::sqrt(disc);
    coeffs.lambda1 = {half_a + root, 0.0};
    coeffs.lambda2 = {half_a - root, 0.0};
  } else {
    const double omega = std::sqrt(-disc);
    coeffs.lambda1 = {half_a, omega};
    coeffs.lambda2 = {half_a, -omega};
  }
  return coeffs;
}

DampingClass classify_damping(const ImpedanceParams& params) {
  if (params.stiffness() == 0.0) return DampingClass::RigidBodyDegenerate;
  const double d2 = params.damping() * params.damping();
  const double mk4 = 4.0 * params.mass() * params.stiffness();
  if (std::abs(d2 - mk4) <= 1e-9 * std::max(d2, mk4))
    return DampingClass::CriticallyDamped;
  return d2 < mk4 ? DampingClass::Underdamped : DampingClass::Overdamped;
}

Eigen::Matrix2d matrix_exponential(const ContinuousModel& model, double t) {
  const Eigen::Matrix2d& a = model.state_matrix;
  const double mean = 0.5 * a.trace();
  // (u*t)^2 where +/-u are the eigenvalues of A - mean*I; its sign picks
  // the regime: positive = distinct real, negative = complex pair,
  // near-zero = repeated root.
  const double x2 = (mean * mean - a.determinant()) * t * t;

  double ch;   // cosh(u t)
  double shc;  // sinh(u t) / (u t)
  if (std::abs(x2) < 1e-8) {
    // Series in x2, valid for either sign; next omitted term is O(x2^4).
    ch = 1.0 + x2 / 2.0 * (1.0 + x2 / 12.0 * (1.0 + x2 / 30.0));
    shc = 1.0 + x2 / 6.0 * (1.0 + x2 / 20.0 * (1.0 + x2 / 42.0));
  } else if (x2 > 0.0) {
    const double s = std::sqrt(x2);
    ch = std::cosh(s);
    shc = std::sinh(s) / s;
  } else {
    const double w = std::sqrt(-x2);
    ch = std::cos(w);
    shc = std::sin(w) / w;
  }

  return std::exp(mean * t) *
         ((ch - mean * t * shc) * Eigen::Matrix2d::Identity() + t * shc * a);
}

DiscreteModel discretize(const ImpedanceParams& params, double sample_time) {
  if (!(sample_time > 0.0) || !std::isfinite(sample_time))
    throw std::invalid_argument("sample_time must be positive");

  const ContinuousModel model = continuous_matrices(params);
  DiscreteModel discrete;
  discrete.sample_time = sample_time;
  discrete.transition = matrix_exponential(model, sample_time);

  if (params.stiffness() > 0.0) {
    // A^{-1} B = [c/b, 0] = [-1/K, 0].
    const Eigen::Vector2d a_inv_b(-1.0 / params.stiffness(), 0.0);
    discrete.input_gain =
        (discrete.transition - Eigen::Matrix2d::Identity()) * a_inv_b;
  } else {
    // Singular A: the ZOH integral as its convergent series
    // T B + T^2/2 A B + T^3/6 A^2 B + ...
    Eigen::Vector2d term = sample_time * model.input_matrix;
    Eigen::Vector2d sum = term;
    for (int k = 2; k <= 80; ++k) {
      term = (sample_time / k) * (model.state_matrix * term);
      sum += term;
      if (term.norm() <= 1e-14 * sum.norm()) break;
    }
    discrete.input_gain = sum;
  }
  return discrete;
}

ImpedanceState step(const DiscreteModel& model, const ImpedanceState& state,
                    double external_force_n) {
  const Eigen::Vector2d x(state.displacement, state.velocity);
  const Eigen::Vector2d next =
      model.transition * x + model.input_gain * external_force_n;
  return {next(0), next(1)};
}

std::vector<ImpedanceState> simulate(const ImpedanceParams& params,
                                     double sample_time,
                                     std::span<const double> force_profile) {
  if (force_profile.empty())
    throw std::invalid_argument("force profile must be non-empty");
  const DiscreteModel model = discretize(params, sample_time);
  std::vector<ImpedanceState> trajectory;
  trajectory.reserve(force_profile.size() + 1);
  trajectory.push_back(ImpedanceState{});
  for (double force : force_profile)
    trajectory.push_back(step(model, trajectory.back(), force));
  return trajectory;
}

}  // namespace tactsim

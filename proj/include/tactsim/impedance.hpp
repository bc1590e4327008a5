#pragma once

#include <Eigen/Dense>
#include <complex>
#include <span>
#include <vector>

namespace tactsim {

// Coefficients of the per-contact virtual mass-spring-damper law
//
//   M * dy'' + D * dy' + K * dy = F_ext(t),
//
// where dy is the displacement correction added to the commanded
// contact-point position along the palm normal.
class ImpedanceParams {
 public:
  // mass > 0, damping >= 0, stiffness >= 0; throws std::invalid_argument
  // otherwise (including non-finite values).
  ImpedanceParams(double mass_kg, double damping_ns_per_m,
                  double stiffness_n_per_m);

  double mass() const { return mass_; }
  double damping() const { return damping_; }
  double stiffness() const { return stiffness_; }

 private:
  double mass_;
  double damping_;
  double stiffness_;
};

// Continuous state-space form x' = A x + B F with x = [dy, dy'],
//   A = [[0, 1], [-K/M, -D/M]],  B = [0, 1/M].
struct ContinuousModel {
  Eigen::Matrix2d state_matrix;
  Eigen::Vector2d input_matrix;
};

// Characteristic data of A: its polynomial is s^2 - a*s - b with
// a = -D/M, b = -K/M; c = 1/M is the input scale.
struct CharacteristicCoefficients {
  double a;
  double b;
  double c;
  std::complex<double> lambda1;
  std::complex<double> lambda2;
};

// Second-order response regime from the sign of D^2 - 4*M*K; K = 0 is
// the degenerate rigid-body case (no restoring spring).
enum class DampingClass {
  Underdamped,
  CriticallyDamped,
  Overdamped,
  RigidBodyDegenerate,
};

// Exact zero-order-hold sampling of the continuous model:
//   x[k+1] = A_d x[k] + B_d F[k],
// with A_d = e^{AT} and B_d the ZOH input integral.
struct DiscreteModel {
  Eigen::Matrix2d transition;
  Eigen::Vector2d input_gain;
  double sample_time;
};

// Displacement correction state: dy in meters, dy' in meters per second.
struct ImpedanceState {
  double displacement = 0.0;
  double velocity = 0.0;
};

ContinuousModel continuous_matrices(const ImpedanceParams& params);

CharacteristicCoefficients characteristic(const ImpedanceParams& params);

// Discriminant rule with a relative tolerance of 1e-9 on D^2 vs 4*M*K
// for the critical equality; K = 0 always classifies as degenerate.
DampingClass classify_damping(const ImpedanceParams& params);

// Closed-form e^{At} for the 2x2 model via its characteristic polynomial
// (Cayley-Hamilton): e^{At} = e^{mt} (cosh(ut) I + sinh(ut)/u (A - mI))
// with m = tr(A)/2 and u^2 = m^2 - det(A). The three eigenvalue regimes
// (distinct real, complex pair, repeated) map to cosh/sinh, cos/sin and
// the u -> 0 series, each evaluated in its numerically stable form.
Eigen::Matrix2d matrix_exponential(const ContinuousModel& model, double t);

// ZOH discretization at sample_time (> 0, else std::invalid_argument).
// With K > 0, B_d = (A_d - I) A^{-1} B using the closed-form
// A^{-1} B = [-1/K, 0]. With K = 0, A is singular and B_d falls back to
// the convergent integral series sum_{k>=1} T^k/k! A^{k-1} B, truncated
// at relative term size 1e-14.
DiscreteModel discretize(const ImpedanceParams& params, double sample_time);

ImpedanceState step(const DiscreteModel& model, const ImpedanceState& state,
                    double external_force_n);

// Trajectory under a per-sample force profile. Element 0 is the zero
// state; element k is the state after k steps. Throws
// std::invalid_argument on an empty profile.
std::vector<ImpedanceState> simulate(const ImpedanceParams& params,
                                     double sample_time,
                                     std::span<const double> force_profile);

}  // namespace tactsim

#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "alb/lattice.hpp"

// Discrete Fourier transform on Z^d_{2N+1}, the constructive quantitative
// uncertainty principle and the parameter scheduler with the Scale_0
// divisibility constraint (2N0+1) = (2L+1)(2K+1) = (2L'+1)(2K'+1).
namespace alb::uncertainty {

using lattice::Box;
using lattice::Coord;
using lattice::Site;
using cplx = std::complex<double>;

struct SupportViolationError : std::runtime_error {
  SupportViolationError() : std::runtime_error("construct_b: input not supported in Lambda_K") {}
};
struct DegenerateProjectionError : std::runtime_error {
  DegenerateProjectionError()
      : std::runtime_error("construct_b: projected vector is numerically zero") {}
};
struct InfeasibleScheduleError : std::runtime_error {
  explicit InfeasibleScheduleError(const std::string& what) : std::runtime_error(what) {}
};

struct ParameterSchedule {
  Coord N0 = 0;
  double delta = 0.0;
  Coord L = 0, Lp = 0;  // L' < L
  Coord K = 0, Kp = 0;  // K < K'
  double gamma0 = 0.0;
  // The paper-formula values delta = (log N0)^{-1000} and
  // gamma0 = (log N0^2)^{-2000} underflow; their magnitudes are carried
  // symbolically as base-10 exponents.
  double delta_formula_log10 = 0.0;
  double gamma0_formula_log10 = 0.0;

  bool factorizations_ok() const {
    return 2 * N0 + 1 == (2 * L + 1) * (2 * K + 1) && 2 * N0 + 1 == (2 * Lp + 1) * (2 * Kp + 1);
  }
  // Named violations; the smallness thresholds are configuration values
  // (violating them is reported, not fatal).
  std::vector<std::string> violations(double smallness_condition2 = 0.1,
                                      double smallness_condition3 = 0.1) const;
};

// Smallest N0 >= target with (2N0+1) divisible by (2L+1)(2L'+1), where
// L = floor(delta^{-1/24}) and L' = floor(delta^{-1/48}); gamma0 is clamped
// to a configured floor.
ParameterSchedule schedule_parameters(Coord N0_target, double delta, double gamma0_floor = 1e-2);

// Unitary DFT: a^_l = (2N+1)^{-d/2} sum_n a_n e^{-2 pi i (n.l)/(2N+1)},
// n, l in Lambda_N.
Eigen::VectorXcd dft(const Eigen::VectorXcd& a, Coord N, int d);
Eigen::VectorXcd idft(const Eigen::VectorXcd& ahat, Coord N, int d);

struct UPResult {
  Eigen::VectorXcd a;
  Eigen::VectorXcd b;
  double rel_error = 0.0;               // ||a-b|| / ||a||, the measured property (1)
  double coset_constancy_defect = 0.0;  // property (2), exact by construction
  double norm_defect = 0.0;             // property (3), exact after rescaling
};

// b^ is set on each coset {l' + k'(2L'+1)} to the representative value
// a^_{k'(2L'+1)}, then b is rescaled to ||a||.
UPResult construct_b(const Eigen::VectorXcd& a, const ParameterSchedule& sched, int d);

}  // namespace alb::uncertainty

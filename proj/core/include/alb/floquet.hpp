#pragma once

#include <Eigen/Dense>
#include <complex>
#include <map>
#include <vector>

#include "alb/model.hpp"

// Periodic approximation of the restricted operator and the Floquet-Bloch
// machinery: transform, fiber matrices, Floquet spectrum, Floquet and
// modified canonical bases. All complex arithmetic stays in this module;
// exported spectra are real.
namespace alb::floquet {

using lattice::Box;
using lattice::Coord;
using lattice::Site;
using cplx = std::complex<double>;

// Potential tiled with period (2N0+1) per axis from its values on Lambda_N0.
struct PeriodicPotential {
  Box period_box;
  std::vector<double> values;  // by IndexMap order of period_box

  double value_at(const Site& n) const;
};

// Values are D(eps)_n for n in Lambda_N0 computed with the true
// (non-periodic) configuration, then tiled.
PeriodicPotential periodize(const model::DisorderConfig& cfg, const model::AlloyPotential& p,
                            Coord N0);

// u_k(x) = sum_{l in [(2N+1)Z]^d} u_{k+l} e^{2 pi i l.x}, k in Lambda_N.
Eigen::VectorXcd floquet_transform(const std::map<Site, cplx>& u, const std::vector<double>& x,
                                   Coord N);

// Fiber symbol h(x) = offset + scale * T^(x).
struct SymbolForm {
  double offset = 0.0;
  double scale = 1.0;
};

// Coefficients h_k(x) of the folded symbol; the matrix (h_{k-j}(x)) is
// diagonalized by the Floquet basis with eigenvalues h(x + s/(2N+1)).
Eigen::VectorXcd h_coefficients(const model::HoppingKernel& k, const SymbolForm& form,
                                const std::vector<double>& x, Coord N);
inline Eigen::VectorXcd h_coefficients(const model::HoppingKernel& k, double M,
                                       const std::vector<double>& x, Coord N) {
  return h_coefficients(k, SymbolForm{M, -1.0}, x, N);
}

struct FiberMatrix {
  std::vector<double> quasi_momentum;
  Eigen::MatrixXcd matrix;     // p_part + diag(diagonal_part)
  Eigen::MatrixXcd p_part;     // folded symbol block
  Eigen::VectorXd diagonal_part;

  double hermitian_defect() const;
  Eigen::VectorXd eigenvalues() const;  // real, ascending
};

// General form: P(h) + diag(diagonal).
FiberMatrix fiber_matrix(const model::HoppingKernel& k, const SymbolForm& form,
                         const Eigen::VectorXd& diagonal, const std::vector<double>& x, Coord N);
// The edge fiber M^{N0}(x) = P(M - T^) + diag(shift - D~(site)).
FiberMatrix edge_fiber(const model::HoppingKernel& k, double M, const PeriodicPotential& per,
                       double shift, const std::vector<double>& x, Coord N);
// The plain periodic operator fiber: P(T^) + diag(V~(site)).
FiberMatrix operator_fiber(const model::HoppingKernel& k, const PeriodicPotential& per,
                           const std::vector<double>& x, Coord N);

// {j/((2N+1)P) : j = 0..P-1}^d, the grid whose fiber union equals the
// covering-torus spectrum.
std::vector<std::vector<double>> commensurate_grid(Coord N, int P, int d);

// Sorted multiset of operator-fiber eigenvalues over the grid.
std::vector<double> floquet_spectrum(const model::HoppingKernel& k, const PeriodicPotential& per,
                                     Coord N, const std::vector<std::vector<double>>& x_grid);

// The periodic operator restricted to the covering torus Z_{P(2N+1)}^d with
// wrapped hopping; independent diagonalization path for the oracle.
Eigen::MatrixXd torus_operator(const model::HoppingKernel& k, const PeriodicPotential& per, int P);

// Columns are beta_s(x), s in Lambda_N order; rows are canonical sites k.
Eigen::MatrixXcd floquet_basis(const std::vector<double>& x, Coord N, int d);
// v_l = e^{-2 pi i x.l} delta_l in canonical coordinates.
Eigen::VectorXcd modified_canonical(const Site& l, const std::vector<double>& x, Coord N);

}  // namespace alb::floquet

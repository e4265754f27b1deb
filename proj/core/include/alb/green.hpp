#pragma once

#include <Eigen/Dense>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "alb/cover.hpp"
#include "alb/model.hpp"

// Green's functions on boxes and site sets, goodness certificates (operator
// norm + off-diagonal decay), the initial-scale Neumann certificate, block
// classification over a cover and the coupling-lemma verification harness.
namespace alb::green {

using lattice::Box;
using lattice::Coord;
using lattice::Site;
using model::BoxHamiltonian;

struct NearSingularError : std::runtime_error {
  double energy;
  double gap;
  NearSingularError(double E, double g)
      : std::runtime_error("green: E is within singular tolerance of the spectrum"),
        energy(E),
        gap(g) {}
};

struct ContractionFailedError : std::runtime_error {
  ContractionFailedError() : std::runtime_error("neumann_green: series does not contract") {}
};

struct GoodnessThresholds {
  double gamma = 0.5;                  // required off-diagonal rate
  double norm_exponent = 0.9;          // ||G|| < e^{N^norm_exponent}
  double offdiag_start_fraction = 0.1; // check pairs with |n-n'| > N * fraction
  double slack = 2.0;                  // multiplicative slack for perturbed variants
};

struct GreenSolve {
  Eigen::MatrixXd G;
  double residual = 0.0;  // max |(H-E)G - I|
  double op_norm = 0.0;   // 1 / dist(E, spec H)
  double min_gap = 0.0;
};

// (H - E)^{-1} with symmetric eigensolve; throws NearSingularError when
// dist(E, spec) < 1e-12 * order.
GreenSolve green_function(const Eigen::MatrixXd& H, double E);

// Entries of G below roughly this level are solver noise; decay checks and
// rate fits must not read them as signal.
double noise_floor(double op_norm, std::size_t order);

struct GreenReport {
  double energy = 0.0;
  Box box;
  double operator_norm = std::numeric_limits<double>::infinity();
  double gamma_hat = 0.0;
  bool norm_ok = false;
  bool decay_ok = false;
  bool good = false;
  double residual = std::numeric_limits<double>::infinity();
  double noise_floor = 0.0;
  int decay_pairs = 0;       // pairs entering the rate fit
  double worst_margin = 0.0; // min over checked pairs of log(bound) - log|G|
  // per-distance profile max_{|n-n'|=r} |G(n,n')| for reporting
  std::vector<std::pair<double, double>> decay_samples;
};

GreenReport green_report(const BoxHamiltonian& H, double E, const GoodnessThresholds& th,
                         double slack_factor = 1.0);

// Caches one symmetric eigendecomposition and serves reports across an
// energy grid (each report is one O(n^3) reconstruction, not a new solve).
class ResolventFactory {
 public:
  explicit ResolventFactory(const BoxHamiltonian& H);
  GreenReport report(double E, const GoodnessThresholds& th, double slack_factor = 1.0) const;
  double min_gap(double E) const;
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }

 private:
  Box box_;
  Eigen::MatrixXd H_;
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd eigenvectors_;
  std::vector<Site> sites_;
};

// Same certificate on an arbitrary site subset of an assembled region.
GreenReport subset_green_report(const Eigen::MatrixXd& H_region,
                                const std::vector<Site>& region_sites,
                                const std::vector<std::size_t>& subset, double E, Coord scale,
                                const GoodnessThresholds& th, double slack_factor = 1.0,
                                double decay_rate_override = -1.0, Coord decay_start = -1,
                                double norm_bound_override = -1.0);

// Initial-scale Neumann certificate: with B = (T+1)(E+1-D)^{-1}, certifies
// ||B^2|| <= 1 - delta and, under the edge hypotheses, the closed-form bound
// ||G|| <= ((M+1-delta)^{-1} + (M+1)(M+1-delta)^{-2}) / delta.
struct InitialCertificate {
  bool certified = false;
  double product_norm = 0.0;
  bool applicable = true;  // false iff delta == 0 (bound degenerates)
  double norm_bound = std::numeric_limits<double>::infinity();
  double measured_norm = 0.0;
  bool bound_ok = false;
  bool chain_hypotheses = false;  // min(E+1-D) >= M+1-delta and ||T+1|| <= M+1
};

InitialCertificate initial_certificate(const Eigen::MatrixXd& T_box, const Eigen::VectorXd& D_box,
                                       double E, double delta, double M);

// Partial sums of G = (D-E-1)^{-1} sum_s (-1)^s ((T+1)(D-E-1)^{-1})^s.
// Throws ContractionFailedError when paired term norms stop decreasing.
Eigen::MatrixXd neumann_green(const Eigen::MatrixXd& T_box, const Eigen::VectorXd& D_box, double E,
                              int terms);

struct BlockClassification {
  Coord scale = 0;
  msa::BoxCover cover;
  Site region_center;
  std::vector<std::pair<Box, GreenReport>> blocks;
  std::vector<Site> bad_centers;
};

BlockClassification classify_blocks(const Box& region, Coord N, const model::HoppingKernel& k,
                                    const model::AlloyPotential& p,
                                    const model::DisorderConfig& cfg, double E,
                                    const GoodnessThresholds& th);

struct CouplingConfig {
  double rate_drop_coeff = 0.6;  // gamma_{N1} = gamma_N - C N^{-1/10}
};

enum class CouplingStatus { Ok, HypothesisUnmet };

// Direct-inversion verification of the coupling step: hypotheses measured,
// conclusions checked on the union A of good blocks and on the region.
struct CouplingReport {
  CouplingStatus status = CouplingStatus::HypothesisUnmet;
  std::vector<std::string> unmet;

  double buffer_norm = 0.0;
  double buffer_norm_bound = 0.0;
  double gamma_n = 0.0;  // min fitted rate over the good cover blocks

  double annulus_norm = 0.0;
  double annulus_norm_bound = 0.0;
  bool annulus_norm_ok = false;
  bool annulus_decay_ok = false;
  double annulus_decay_margin = 0.0;
  int annulus_checked_pairs = 0;

  double gamma_next = 0.0;
  GreenReport region_report;
  bool region_good = false;

  bool conclusions_ok() const { return annulus_norm_ok && annulus_decay_ok; }
};

CouplingReport coupling_check(const model::HoppingKernel& k, const model::AlloyPotential& p,
                              const model::DisorderConfig& cfg, const Box& region,
                              const Box& inner, const Box& buffer,
                              const BlockClassification& cls, double E,
                              const GoodnessThresholds& th, const CouplingConfig& ccfg = {});

}  // namespace alb::green

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "alb/cover.hpp"
#include "alb/green.hpp"
#include "alb/randomness.hpp"

// The multi-scale pipeline: scale schedule, first-order eigenvalue variation
// with influence bounds, Wegner-type and double-bad-block Monte Carlo
// estimators, and localization diagnostics.
namespace alb::msa {

using lattice::Box;
using lattice::Coord;
using lattice::Site;
using randomness::EventEstimate;
using uncertainty::ParameterSchedule;

struct InfeasibleScaleError : std::runtime_error {
  explicit InfeasibleScaleError(const std::string& w) : std::runtime_error(w) {}
};
struct DegenerateEigenvalueError : std::runtime_error {
  DegenerateEigenvalueError()
      : std::runtime_error("eigen_variation: selected eigenvalue is not simple") {}
};
struct CrossingDetectedError : std::runtime_error {
  CrossingDetectedError()
      : std::runtime_error("influence: eigenvalue crossing along the segment") {}
};
struct SeparationViolatedError : std::runtime_error {
  SeparationViolatedError()
      : std::runtime_error("double_bad_probability: blocks closer than N/5") {}
};

struct ScaleSchedule {
  std::vector<Coord> scales;  // N_0 < N_1 < ..., N_{k+1} = round(N_k^{4/3})
};

// Snapping keeps each scale within 1% of the 4/3 power of its predecessor.
ScaleSchedule scale_schedule(const ParameterSchedule& sched, int depth);

// d E / d t_j of the eigen_index-th eigenvalue counted from the top (0 is
// the largest), via the first-order formula lambda sum_n A_{n-j} |xi_n|^2.
double eigen_variation(const Box& box, const model::HoppingKernel& k,
                       const model::AlloyPotential& p, const model::DisorderConfig& cfg,
                       const Site& free_site, int eigen_index_from_top,
                       double gap_tol = 1e-8);

struct InfluenceConfig {
  int track_points = 21;        // eigenpath sampling along t in [-1,1]
  int quad_points = 16;         // Gauss-Legendre nodes
  double overlap_threshold = 0.6;
  double C1 = 1.0;              // upper bound b = exp(C1 gamma_N (log N)^2 N)
  double C2 = 1.0;              // lower bound a = exp(C2 (log N)^2 N)
  double gamma_n = 0.0;
  int l_index = 0;              // label distance |r_l - r0| / (log N)^2
};

struct InfluenceReport {
  int l_index = 0;
  double value_endpoint = 0.0;    // E(+1) - E(-1) along the tracked branch
  double value_quadrature = 0.0;  // integral of the variation formula
  double agreement = 0.0;         // |endpoint - quadrature|
  double min_track_overlap = 1.0;
  double log_lower = 0.0;  // log a^{-l}; reported, not asserted
  double log_upper = 0.0;  // log b^{-l}
};

InfluenceReport influence(const Box& box, const model::HoppingKernel& k,
                          const model::AlloyPotential& p, const model::DisorderConfig& cfg,
                          const Site& free_site, int eigen_index_from_top,
                          const InfluenceConfig& icfg = {});

// P(dist(spec H_{N1}, E) < eta) by Monte Carlo; one eigensolve per trial.
EventEstimate wegner_estimate(const model::AlloyPotential& p, const model::HoppingKernel& k,
                              const ParameterSchedule& sched, Coord N1, double E, double eta,
                              long trials, std::uint64_t seed, int threads = 1);

// P(exists E in grid: both blocks bad); requires dist > N/5.
EventEstimate double_bad_probability(const model::AlloyPotential& p,
                                     const model::HoppingKernel& k,
                                     const ParameterSchedule& sched, Coord N, const Site& k1,
                                     const Site& k2, const std::vector<double>& E_grid,
                                     const green::GoodnessThresholds& th, long trials,
                                     std::uint64_t seed, int threads = 1);

struct EigenpairDiag {
  int index_from_top = 0;
  double energy = 0.0;
  Site peak;
  Coord mass_radius = 0;     // smallest radius holding 95% of |xi|^2
  double decay_slope = 0.0;  // positive for decaying profiles
  double ipr = 0.0;          // sum |xi|^4
};

struct LocalizationReport {
  std::vector<EigenpairDiag> pairs;
};

// Diagnostics for eigenpairs with energy in [window_lo, window_hi], counted
// from the top of the spectrum; max_pairs = 0 reports all in the window.
LocalizationReport localization_report(const model::BoxHamiltonian& H, double window_lo,
                                       double window_hi, int max_pairs = 0);

}  // namespace alb::msa

#include "alb/msa.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>

#include "alb/parallel.hpp"
#include "alb/rng.hpp"

namespace alb::msa {

ScaleSchedule scale_schedule(const ParameterSchedule& sched, int depth) {
  if (depth < 1) throw std::invalid_argument("scale_schedule: depth must be >= 1");
  ScaleSchedule out;
  out.scales.push_back(sched.N0);
  for (int i = 1; i < depth; ++i) {
    double target = std::pow(static_cast<double>(out.scales.back()), 4.0 / 3.0);
    Coord next = static_cast<Coord>(std::llround(target));
    if (std::abs(static_cast<double>(next) - target) > 0.01 * target)
      throw InfeasibleScaleError("scale_schedule: 1% snap band holds no integer");
    out.scales.push_back(next);
  }
  return out;
}

namespace {

// Derivative of the tracked eigenvalue in the free coordinate.
double variation_formula(const model::AlloyPotential& p, const lattice::IndexMap& map,
                         const Site& free_site, const Eigen::VectorXd& xi) {
  double s = 0.0;
  for (std::size_t i = 0; i < map.size(); ++i) {
    double a = p.site_kernel.at(map.site_at(i) - free_site);
    if (a != 0.0) {
      double c = xi(static_cast<Eigen::Index>(i));
      s += a * c * c;
    }
  }
  return p.lambda * s;
}

// Gauss-Legendre nodes/weights on [-1,1] by Newton on the Legendre polynomial.
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(static_cast<std::size_t>(n), 0.0);
  weights.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= n; ++j) {
        double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[static_cast<std::size_t>(i)] = -x;
    nodes[static_cast<std::size_t>(n - 1 - i)] = x;
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    weights[static_cast<std::size_t>(i)] = w;
    weights[static_cast<std::size_t>(n - 1 - i)] = w;
  }
}

}  // namespace

double eigen_variation(const Box& box, const model::HoppingKernel& k,
                       const model::AlloyPotential& p, const model::DisorderConfig& cfg,
                       const Site& free_site, int eigen_index_from_top, double gap_tol) {
  model::BoxHamiltonian H = model::assemble_hamiltonian(box, k, p, cfg);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H.matrix);
  const auto n = H.matrix.rows();
  Eigen::Index idx = n - 1 - eigen_index_from_top;
  if (idx < 0 || idx >= n) throw std::invalid_argument("eigen_variation: index out of range");
  double gap = std::numeric_limits<double>::infinity();
  if (idx > 0) gap = std::min(gap, es.eigenvalues()(idx) - es.eigenvalues()(idx - 1));
  if (idx + 1 < n) gap = std::min(gap, es.eigenvalues()(idx + 1) - es.eigenvalues()(idx));
  if (!(gap > gap_tol)) throw DegenerateEigenvalueError();
  lattice::IndexMap map(box);
  Eigen::VectorXd xi = es.eigenvectors().col(idx);
  return variation_formula(p, map, free_site, xi);
}

InfluenceReport influence(const Box& box, const model::HoppingKernel& k,
                          const model::AlloyPotential& p, const model::DisorderConfig& cfg,
                          const Site& free_site, int eigen_index_from_top,
                          const InfluenceConfig& icfg) {
  std::vector<double> qnodes, qweights;
  gauss_legendre(icfg.quad_points, qnodes, qweights);

  // merged, sorted parameter path: tracking grid plus quadrature nodes
  std::vector<double> ts;
  for (int i = 0; i < icfg.track_points; ++i)
    ts.push_back(-1.0 + 2.0 * static_cast<double>(i) / (icfg.track_points - 1));
  for (double q : qnodes) ts.push_back(q);
  std::sort(ts.begin(), ts.end());

  lattice::IndexMap map(box);
  const Eigen::MatrixXd T = model::assemble_hopping(box, k);

  Eigen::VectorXd prev_vec;
  double min_overlap = 1.0;
  double e_start = 0.0, e_end = 0.0;
  std::vector<std::pair<double, double>> derivs;  // (t, dE/dt)

  for (std::size_t step = 0; step < ts.size(); ++step) {
    double t = ts[step];
    model::DisorderConfig c = cfg.with_override(free_site, t);
    Eigen::MatrixXd H = T;
    H.diagonal() += model::potential_diagonal(box, p, c);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    const auto n = H.rows();
    Eigen::Index idx;
    if (step == 0) {
      idx = n - 1 - eigen_index_from_top;
      if (idx < 0) throw std::invalid_argument("influence: index out of range");
    } else {
      Eigen::VectorXd ov = (es.eigenvectors().transpose() * prev_vec).cwiseAbs();
      Eigen::Index best;
      ov.maxCoeff(&best);
      idx = best;
      min_overlap = std::min(min_overlap, ov(best));
      if (ov(best) < icfg.overlap_threshold) throw CrossingDetectedError();
    }
    prev_vec = es.eigenvectors().col(idx);
    double e = es.eigenvalues()(idx);
    if (step == 0) e_start = e;
    e_end = e;
    for (int q = 0; q < icfg.quad_points; ++q)
      if (ts[step] == qnodes[static_cast<std::size_t>(q)])
        derivs.emplace_back(t, variation_formula(p, map, free_site, prev_vec));
  }

  InfluenceReport rep;
  rep.l_index = icfg.l_index;
  rep.value_endpoint = e_end - e_start;
  double quad = 0.0;
  for (int q = 0; q < icfg.quad_points; ++q) {
    // find the derivative recorded at this node
    for (const auto& [t, dE] : derivs)
      if (t == qnodes[static_cast<std::size_t>(q)]) {
        quad += qweights[static_cast<std::size_t>(q)] * dE;
        break;
      }
  }
  rep.value_quadrature = quad;
  rep.agreement = std::abs(rep.value_endpoint - rep.value_quadrature);
  rep.min_track_overlap = min_overlap;
  const double N = static_cast<double>(box.radius);
  const double lg2N = std::pow(std::log(N), 2) * N;
  rep.log_lower = -static_cast<double>(icfg.l_index) * icfg.C2 * lg2N;
  rep.log_upper = -static_cast<double>(icfg.l_index) * icfg.C1 * icfg.gamma_n * lg2N;
  return rep;
}

EventEstimate wegner_estimate(const model::AlloyPotential& p, const model::HoppingKernel& k,
                              const ParameterSchedule& sched, Coord N1, double E, double eta,
                              long trials, std::uint64_t seed, int threads) {
  (void)sched;
  if (!(eta > 0)) throw std::invalid_argument("wegner_estimate: eta must be positive");
  Box region = Box::centered(p.dim(), N1);
  Box window = region.inflated(p.truncation_radius());
  std::atomic<long> hits{0};
  parallel_for(
      static_cast<std::size_t>(trials),
      [&](std::size_t t) {
        auto cfg = model::sample_config(rng::derive(seed, t), window);
        model::BoxHamiltonian H = model::assemble_hamiltonian(region, k, p, cfg);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H.matrix, Eigen::EigenvaluesOnly);
        if ((es.eigenvalues().array() - E).abs().minCoeff() < eta) hits.fetch_add(1);
      },
      threads);
  return randomness::wilson_interval(hits.load(), trials, seed);
}

EventEstimate double_bad_probability(const model::AlloyPotential& p,
                                     const model::HoppingKernel& k,
                                     const ParameterSchedule& sched, Coord N, const Site& k1,
                                     const Site& k2, const std::vector<double>& E_grid,
                                     const green::GoodnessThresholds& th, long trials,
                                     std::uint64_t seed, int threads) {
  (void)sched;
  Box b1(k1, N), b2(k2, N);
  if (5 * lattice::box_distance(b1, b2) <= N) throw SeparationViolatedError();

  // one window covering both blocks plus the potential truncation margin
  const int d = p.dim();
  Site c = Site::zero(d);
  Coord r = 0;
  for (int i = 0; i < d; ++i) c[i] = (k1[i] + k2[i]) / 2;
  for (int i = 0; i < d; ++i)
    r = std::max(r, std::max(lattice::abs_coord(k1[i] - c[i]), lattice::abs_coord(k2[i] - c[i])) + N +
                        p.truncation_radius());
  Box window(c, r);

  std::atomic<long> hits{0};
  parallel_for(
      static_cast<std::size_t>(trials),
      [&](std::size_t t) {
        auto cfg = model::sample_config(rng::derive(seed, t), window);
        green::ResolventFactory f1(model::assemble_hamiltonian(b1, k, p, cfg));
        green::ResolventFactory f2(model::assemble_hamiltonian(b2, k, p, cfg));
        for (double E : E_grid) {
          if (!f1.report(E, th).good && !f2.report(E, th).good) {
            hits.fetch_add(1);
            return;
          }
        }
      },
      threads);
  return randomness::wilson_interval(hits.load(), trials, seed);
}

LocalizationReport localization_report(const model::BoxHamiltonian& H, double window_lo,
                                       double window_hi, int max_pairs) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H.matrix);
  lattice::IndexMap map(H.box);
  const auto n = H.matrix.rows();
  LocalizationReport rep;
  for (Eigen::Index pos = n - 1; pos >= 0; --pos) {
    double e = es.eigenvalues()(pos);
    if (e < window_lo || e > window_hi) continue;
    if (max_pairs > 0 && static_cast<int>(rep.pairs.size()) >= max_pairs) break;
    Eigen::VectorXd xi = es.eigenvectors().col(pos);
    EigenpairDiag diag;
    diag.index_from_top = static_cast<int>(n - 1 - pos);
    diag.energy = e;
    Eigen::Index peak;
    xi.cwiseAbs().maxCoeff(&peak);
    diag.peak = map.site_at(static_cast<std::size_t>(peak));
    // smallest radius holding 95% of the mass
    std::vector<std::pair<Coord, double>> by_dist;
    by_dist.reserve(static_cast<std::size_t>(n));
    double ipr = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double w = xi(i) * xi(i);
      ipr += w * w;
      by_dist.emplace_back(lattice::sup_dist(map.site_at(static_cast<std::size_t>(i)), diag.peak),
                           w);
    }
    std::sort(by_dist.begin(), by_dist.end());
    double acc = 0.0;
    for (const auto& [dist, w] : by_dist) {
      acc += w;
      if (acc >= 0.95) {
        diag.mass_radius = dist;
        break;
      }
    }
    diag.ipr = ipr;
    // least-squares fit of log|xi| against distance from the peak
    double sr = 0, sy = 0, srr = 0, sry = 0;
    long cnt = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double a = std::abs(xi(i));
      if (a < 1e-12) continue;
      double rdist = static_cast<double>(
          lattice::sup_dist(map.site_at(static_cast<std::size_t>(i)), diag.peak));
      double y = std::log(a);
      sr += rdist;
      sy += y;
      srr += rdist * rdist;
      sry += rdist * y;
      ++cnt;
    }
    if (cnt >= 2) {
      double denom = static_cast<double>(cnt) * srr - sr * sr;
      if (denom > 0) diag.decay_slope = -(static_cast<double>(cnt) * sry - sr * sy) / denom;
    }
    rep.pairs.push_back(diag);
  }
  return rep;
}

}  // namespace alb::msa

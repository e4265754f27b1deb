#include "alb/green.hpp"

#include <algorithm>
#include <cmath>

namespace alb::green {

namespace {

double spectral_norm(const Eigen::MatrixXd& A) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A.transpose() * A, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

double symmetric_norm(const Eigen::MatrixXd& A) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
  return std::max(std::abs(es.eigenvalues().minCoeff()), std::abs(es.eigenvalues().maxCoeff()));
}

struct DecayCheck {
  double gamma_hat = 0.0;
  bool decay_ok = true;
  int fit_pairs = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
  std::vector<std::pair<double, double>> profile;  // (r, max |G|)
};

// Pairwise decay certificate and unweighted least-squares rate fit over
// pairs beyond `start`; entries at or below the noise floor pass the bound
// by convention and stay out of the fit.
DecayCheck check_decay(const Eigen::MatrixXd& G, const std::vector<Site>& sites, double start,
                       double rate, double slack, double floor) {
  DecayCheck out;
  const auto n = static_cast<std::size_t>(G.rows());
  std::map<Coord, double> prof;
  double sr = 0, sy = 0, srr = 0, sry = 0;
  long cnt = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      Coord r = lattice::sup_dist(sites[i], sites[j]);
      double a = std::abs(G(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
      auto it = prof.find(r);
      if (it == prof.end())
        prof.emplace(r, a);
      else
        it->second = std::max(it->second, a);
      if (static_cast<double>(r) <= start) continue;
      double bound = slack * std::exp(-rate * static_cast<double>(r));
      if (a > std::max(bound, floor)) out.decay_ok = false;
      if (a > floor) {
        out.worst_margin = std::min(out.worst_margin, std::log(bound) - std::log(a));
        double y = -std::log(a);
        sr += static_cast<double>(r);
        sy += y;
        srr += static_cast<double>(r) * static_cast<double>(r);
        sry += static_cast<double>(r) * y;
        ++cnt;
      }
    }
  }
  if (cnt >= 2) {
    double denom = static_cast<double>(cnt) * srr - sr * sr;
    if (denom > 0) out.gamma_hat = (static_cast<double>(cnt) * sry - sr * sy) / denom;
  }
  out.fit_pairs = static_cast<int>(cnt);
  if (!std::isfinite(out.worst_margin)) out.worst_margin = 0.0;
  for (const auto& [r, a] : prof) out.profile.emplace_back(static_cast<double>(r), a);
  return out;
}

GreenReport sentinel_report(const Box& box, double E) {
  GreenReport rep;
  rep.energy = E;
  rep.box = box;
  rep.operator_norm = std::numeric_limits<double>::infinity();
  rep.norm_ok = false;
  rep.decay_ok = false;
  rep.good = false;
  rep.residual = std::numeric_limits<double>::infinity();
  return rep;
}

Box bounding_box(const std::vector<Site>& sites) {
  int d = sites.front().dim();
  Site lo = sites.front(), hi = sites.front();
  for (const Site& s : sites)
    for (int i = 0; i < d; ++i) {
      lo[i] = std::min(lo[i], s[i]);
      hi[i] = std::max(hi[i], s[i]);
    }
  Site c = Site::zero(d);
  Coord r = 0;
  for (int i = 0; i < d; ++i) {
    c[i] = (lo[i] + hi[i]) / 2;
    r = std::max(r, (hi[i] - lo[i] + 1) / 2);
  }
  return Box(c, std::max<Coord>(r, 0));
}

}  // namespace

GreenSolve green_function(const Eigen::MatrixXd& H, double E) {
  const auto n = H.rows();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
  if (es.info() != Eigen::Success) throw std::runtime_error("green_function: eigensolve failed");
  const Eigen::VectorXd& lam = es.eigenvalues();
  double gap = (lam.array() - E).abs().minCoeff();
  double singular_tol = 1e-12 * static_cast<double>(n);
  if (gap < singular_tol) throw NearSingularError(E, gap);
  Eigen::VectorXd inv = (lam.array() - E).inverse();
  GreenSolve out;
  out.G = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
  out.min_gap = gap;
  out.op_norm = 1.0 / gap;
  Eigen::MatrixXd R = (H - E * Eigen::MatrixXd::Identity(n, n)) * out.G -
                      Eigen::MatrixXd::Identity(n, n);
  out.residual = R.cwiseAbs().maxCoeff();
  return out;
}

double noise_floor(double op_norm, std::size_t order) {
  return 1e-12 * std::max(1.0, op_norm) * std::max(1.0, std::sqrt(static_cast<double>(order)) / 8.0);
}

namespace {

GreenReport report_from_solve(const Box& box, const std::vector<Site>& sites,
                              const GreenSolve& sol, double E, const GoodnessThresholds& th,
                              double slack_factor) {
  GreenReport rep;
  rep.energy = E;
  rep.box = box;
  const double N = static_cast<double>(box.radius);
  rep.operator_norm = sol.op_norm;
  rep.residual = sol.residual;
  rep.noise_floor = noise_floor(sol.op_norm, sites.size());
  rep.norm_ok = sol.op_norm < slack_factor * std::exp(std::pow(N, th.norm_exponent));
  DecayCheck dc = check_decay(sol.G, sites, N * th.offdiag_start_fraction, th.gamma, slack_factor,
                              rep.noise_floor);
  rep.gamma_hat = dc.gamma_hat;
  rep.decay_ok = dc.decay_ok;
  rep.decay_pairs = dc.fit_pairs;
  rep.worst_margin = dc.worst_margin;
  rep.decay_samples = std::move(dc.profile);
  rep.good = rep.norm_ok && rep.decay_ok;
  return rep;
}

}  // namespace

GreenReport green_report(const BoxHamiltonian& H, double E, const GoodnessThresholds& th,
                         double slack_factor) {
  GreenSolve sol;
  try {
    sol = green_function(H.matrix, E);
  } catch (const NearSingularError&) {
    return sentinel_report(H.box, E);
  }
  return report_from_solve(H.box, lattice::box_sites(H.box), sol, E, th, slack_factor);
}

ResolventFactory::ResolventFactory(const BoxHamiltonian& H)
    : box_(H.box), H_(H.matrix), sites_(lattice::box_sites(H.box)) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H_);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("ResolventFactory: eigensolve failed");
  eigenvalues_ = es.eigenvalues();
  eigenvectors_ = es.eigenvectors();
}

double ResolventFactory::min_gap(double E) const {
  return (eigenvalues_.array() - E).abs().minCoeff();
}

GreenReport ResolventFactory::report(double E, const GoodnessThresholds& th,
                                     double slack_factor) const {
  const auto n = H_.rows();
  double gap = min_gap(E);
  if (gap < 1e-12 * static_cast<double>(n)) return sentinel_report(box_, E);
  GreenSolve sol;
  Eigen::VectorXd inv = (eigenvalues_.array() - E).inverse();
  sol.G = eigenvectors_ * inv.asDiagonal() * eigenvectors_.transpose();
  sol.min_gap = gap;
  sol.op_norm = 1.0 / gap;
  Eigen::MatrixXd R = (H_ - E * Eigen::MatrixXd::Identity(n, n)) * sol.G -
                      Eigen::MatrixXd::Identity(n, n);
  sol.residual = R.cwiseAbs().maxCoeff();
  return report_from_solve(box_, sites_, sol, E, th, slack_factor);
}

GreenReport subset_green_report(const Eigen::MatrixXd& H_region,
                                const std::vector<Site>& region_sites,
                                const std::vector<std::size_t>& subset, double E, Coord scale,
                                const GoodnessThresholds& th, double slack_factor,
                                double decay_rate_override, Coord decay_start,
                                double norm_bound_override) {
  if (subset.empty()) throw std::invalid_argument("subset_green_report: empty subset");
  const auto m = static_cast<Eigen::Index>(subset.size());
  Eigen::MatrixXd Hs(m, m);
  std::vector<Site> sites;
  sites.reserve(subset.size());
  for (Eigen::Index i = 0; i < m; ++i) {
    sites.push_back(region_sites[subset[static_cast<std::size_t>(i)]]);
    for (Eigen::Index j = 0; j < m; ++j)
      Hs(i, j) = H_region(static_cast<Eigen::Index>(subset[static_cast<std::size_t>(i)]),
                          static_cast<Eigen::Index>(subset[static_cast<std::size_t>(j)]));
  }
  Box bb = bounding_box(sites);
  GreenReport rep;
  rep.energy = E;
  rep.box = bb;
  GreenSolve sol;
  try {
    sol = green_function(Hs, E);
  } catch (const NearSingularError&) {
    return sentinel_report(bb, E);
  }
  const double N = static_cast<double>(scale);
  rep.operator_norm = sol.op_norm;
  rep.residual = sol.residual;
  rep.noise_floor = noise_floor(sol.op_norm, subset.size());
  double norm_bound = norm_bound_override > 0 ? norm_bound_override
                                              : slack_factor * std::exp(std::pow(N, th.norm_exponent));
  rep.norm_ok = sol.op_norm < norm_bound;
  double start = decay_start >= 0 ? static_cast<double>(decay_start) - 0.5
                                  : N * th.offdiag_start_fraction;
  double rate = decay_rate_override > 0 ? decay_rate_override : th.gamma;
  DecayCheck dc = check_decay(sol.G, sites, start, rate, slack_factor, rep.noise_floor);
  rep.gamma_hat = dc.gamma_hat;
  rep.decay_ok = dc.decay_ok;
  rep.decay_pairs = dc.fit_pairs;
  rep.worst_margin = dc.worst_margin;
  rep.decay_samples = std::move(dc.profile);
  rep.good = rep.norm_ok && rep.decay_ok;
  return rep;
}

InitialCertificate initial_certificate(const Eigen::MatrixXd& T_box, const Eigen::VectorXd& D_box,
                                       double E, double delta, double M) {
  const auto n = T_box.rows();
  Eigen::VectorXd denom = (E + 1.0) - D_box.array();
  if ((denom.array() <= 0).any())
    throw std::domain_error("initial_certificate: requires E+1-D_n > 0");
  Eigen::MatrixXd Tp = T_box + Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd B = Tp * denom.cwiseInverse().asDiagonal();
  InitialCertificate out;
  out.product_norm = spectral_norm(B * B);
  out.certified = out.product_norm <= 1.0 - delta;
  out.applicable = delta > 0.0 && (M + 1.0 - delta) > 0.0;
  double tp_norm = symmetric_norm(Tp);
  out.chain_hypotheses =
      denom.minCoeff() >= M + 1.0 - delta - 1e-12 && tp_norm <= M + 1.0 + 1e-12;
  if (out.applicable) {
    double md = M + 1.0 - delta;
    out.norm_bound = (1.0 / md + (M + 1.0) / (md * md)) / delta;
  }
  Eigen::MatrixXd H = T_box;
  H.diagonal() += D_box;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H, Eigen::EigenvaluesOnly);
  double gap = (es.eigenvalues().array() - E).abs().minCoeff();
  out.measured_norm = gap > 0 ? 1.0 / gap : std::numeric_limits<double>::infinity();
  out.bound_ok = out.certified && out.applicable && out.chain_hypotheses &&
                 out.measured_norm <= out.norm_bound;
  return out;
}

Eigen::MatrixXd neumann_green(const Eigen::MatrixXd& T_box, const Eigen::VectorXd& D_box, double E,
                              int terms) {
  const auto n = T_box.rows();
  Eigen::VectorXd denom = (E + 1.0) - D_box.array();
  if ((denom.array().abs() < 1e-300).any())
    throw std::domain_error("neumann_green: E+1-D_n vanishes");
  Eigen::VectorXd R = denom.cwiseInverse();
  Eigen::MatrixXd B = (T_box + Eigen::MatrixXd::Identity(n, n)) * R.asDiagonal();
  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n, n);
  std::vector<double> norms;
  int rising = 0;
  for (int s = 0; s <= terms; ++s) {
    Eigen::MatrixXd term = (-R).asDiagonal() * power;
    sum += term;
    double t = term.norm();
    norms.push_back(t);
    if (s >= 2) {
      if (t >= norms[static_cast<std::size_t>(s - 2)] * (1.0 - 1e-12) && t > 1e-280) {
        if (++rising >= 3) throw ContractionFailedError();
      } else {
        rising = 0;
      }
      if (t > 1e12 * (norms[0] + 1e-300)) throw ContractionFailedError();
    }
    if (t < 1e-300) break;
    if (s < terms) power = B * power;
  }
  return sum;
}

BlockClassification classify_blocks(const Box& region, Coord N, const model::HoppingKernel& k,
                                    const model::AlloyPotential& p,
                                    const model::DisorderConfig& cfg, double E,
                                    const GoodnessThresholds& th) {
  if (N > region.radius) throw std::invalid_argument("classify_blocks: N exceeds region radius");
  BlockClassification cls;
  cls.scale = N;
  cls.region_center = region.center;
  cls.cover = msa::build_cover(region.radius, N, region.dim());
  for (const Site& c : cls.cover.centers()) {
    Box block(c + region.center, N);
    BoxHamiltonian H = model::assemble_hamiltonian(block, k, p, cfg);
    GreenReport rep = green_report(H, E, th);
    if (!rep.good) cls.bad_centers.push_back(block.center);
    cls.blocks.emplace_back(block, std::move(rep));
  }
  return cls;
}

namespace {

bool box_inside(const Box& inner, const Box& outer, Coord margin = 0) {
  for (int i = 0; i < inner.dim(); ++i)
    if (lattice::abs_coord(inner.center[i] - outer.center[i]) + inner.radius + margin > outer.radius)
      return false;
  return true;
}

}  // namespace

CouplingReport coupling_check(const model::HoppingKernel& k, const model::AlloyPotential& p,
                              const model::DisorderConfig& cfg, const Box& region,
                              const Box& inner, const Box& buffer,
                              const BlockClassification& cls, double E,
                              const GoodnessThresholds& th, const CouplingConfig& ccfg) {
  CouplingReport rep;
  const Coord N = cls.scale;
  const Coord N1 = region.radius;
  const Coord L1 = buffer.radius;

  if (!box_inside(buffer, region)) rep.unmet.push_back("buffer not contained in region");
  if (!box_inside(inner, buffer)) rep.unmet.push_back("inner not contained in buffer");
  Coord nbhd = static_cast<Coord>(std::ceil(static_cast<double>(L1) / 10.0));
  if (!box_inside(inner, buffer, nbhd))
    rep.unmet.push_back("buffer misses the L1/10-neighborhood of inner");
  if (!(N < L1 && 2 * L1 <= N1 + 1)) rep.unmet.push_back("size regime N << L1 <= N1/2 violated");

  // good cover blocks inside the region
  std::vector<const Box*> good_blocks;
  double gamma_n = std::numeric_limits<double>::infinity();
  for (const auto& [block, block_rep] : cls.blocks) {
    if (!block_rep.good) continue;
    if (!box_inside(block, region)) continue;
    good_blocks.push_back(&block);
    gamma_n = std::min(gamma_n, block_rep.gamma_hat);
  }
  if (good_blocks.empty()) {
    rep.unmet.push_back("no good blocks");
    return rep;
  }
  rep.gamma_n = gamma_n;

  // every site outside inner carries its N/5-neighborhood into a good block,
  // and buffer with the good blocks covers the region
  const Coord n5 = N / 5;
  lattice::IndexMap rmap(region);
  bool nbhd_ok = true, union_ok = true;
  for (std::size_t i = 0; i < rmap.size(); ++i) {
    Site n = rmap.site_at(i);
    bool in_good = false;
    for (const Box* b : good_blocks)
      if (b->contains(n)) {
        in_good = true;
        break;
      }
    if (!in_good && !buffer.contains(n)) union_ok = false;
    if (inner.contains(n)) continue;
    bool covered = false;
    for (const Box* b : good_blocks) {
      bool inside = true;
      for (int ax = 0; ax < region.dim() && inside; ++ax) {
        Coord lo = std::max(n[ax] - n5, region.center[ax] - region.radius);
        Coord hi = std::min(n[ax] + n5, region.center[ax] + region.radius);
        if (lo < b->center[ax] - b->radius || hi > b->center[ax] + b->radius) inside = false;
      }
      if (inside) {
        covered = true;
        break;
      }
    }
    if (!covered) {
      nbhd_ok = false;
      break;
    }
  }
  if (!nbhd_ok) rep.unmet.push_back("a site outside inner lacks a good N/5-neighborhood block");
  if (!union_ok) rep.unmet.push_back("buffer and good blocks do not cover the region");

  // buffer norm bound ||G_{L1}|| < e^{L1^{9/10}}
  rep.buffer_norm_bound = std::exp(std::pow(static_cast<double>(L1), th.norm_exponent));
  try {
    model::BoxHamiltonian Hb = model::assemble_hamiltonian(buffer, k, p, cfg);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Hb.matrix, Eigen::EigenvaluesOnly);
    double gap = (es.eigenvalues().array() - E).abs().minCoeff();
    rep.buffer_norm = gap > 0 ? 1.0 / gap : std::numeric_limits<double>::infinity();
  } catch (const std::exception&) {
    rep.buffer_norm = std::numeric_limits<double>::infinity();
  }
  if (!(rep.buffer_norm < rep.buffer_norm_bound))
    rep.unmet.push_back("buffer norm bound violated");

  if (!rep.unmet.empty()) return rep;

  model::BoxHamiltonian Hr = model::assemble_hamiltonian(region, k, p, cfg);
  auto region_sites = lattice::box_sites(region);
  std::vector<std::size_t> annulus;
  for (std::size_t i = 0; i < region_sites.size(); ++i)
    for (const Box* b : good_blocks)
      if (b->contains(region_sites[i])) {
        annulus.push_back(i);
        break;
      }

  const double Nd = static_cast<double>(N);
  rep.annulus_norm_bound = std::exp(2.0 * std::pow(Nd, th.norm_exponent));
  GreenReport arep = subset_green_report(Hr.matrix, region_sites, annulus, E, N, th,
                                         /*slack*/ 1.0,
                                         /*rate*/ 0.8 * gamma_n,
                                         /*start*/ N,
                                         /*norm bound*/ rep.annulus_norm_bound);
  rep.annulus_norm = arep.operator_norm;
  rep.annulus_norm_ok = arep.norm_ok;
  rep.annulus_decay_ok = arep.decay_ok;
  rep.annulus_decay_margin = arep.worst_margin;
  rep.annulus_checked_pairs = arep.decay_pairs;

  rep.gamma_next = gamma_n - ccfg.rate_drop_coeff * std::pow(Nd, -0.1);
  GoodnessThresholds th_next = th;
  th_next.gamma = rep.gamma_next;
  rep.region_report = green_report(Hr, E, th_next);
  rep.region_good = rep.region_report.good;

  rep.status = CouplingStatus::Ok;
  return rep;
}

}  // namespace alb::green

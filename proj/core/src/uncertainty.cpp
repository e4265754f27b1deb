#include "alb/uncertainty.hpp"

#include <cmath>
#include <numbers>

namespace alb::uncertainty {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double site_dot(const Site& a, const Site& b) {
  double s = 0.0;
  for (int i = 0; i < a.dim(); ++i)
    s += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return s;
}
}  // namespace

std::vector<std::string> ParameterSchedule::violations(double smallness_condition2,
                                                       double smallness_condition3) const {
  std::vector<std::string> v;
  if (!(delta > 0.0 && delta < 1.0)) v.push_back("delta outside (0,1)");
  if (!(Lp < L)) v.push_back("L' >= L");
  if (!(K < Kp)) v.push_back("K >= K'");
  if (!factorizations_ok()) v.push_back("(2N0+1) factorization condition violated");
  if (std::pow(delta, 1.0 / 12.0) * static_cast<double>(L) > smallness_condition2)
    v.push_back("smallness condition delta^{1/12} L exceeded (reported)");
  if (Kp > 0 && static_cast<double>(K) / static_cast<double>(Kp) > smallness_condition3)
    v.push_back("smallness condition K/K' exceeded (reported)");
  return v;
}

ParameterSchedule schedule_parameters(Coord N0_target, double delta, double gamma0_floor) {
  if (!(delta > 0.0 && delta < 1.0))
    throw InfeasibleScheduleError("schedule_parameters: delta must lie in (0,1)");
  ParameterSchedule s;
  s.delta = delta;
  s.L = static_cast<Coord>(std::floor(std::pow(delta, -1.0 / 24.0)));
  s.Lp = static_cast<Coord>(std::floor(std::pow(delta, -1.0 / 48.0)));
  if (!(s.Lp < s.L))
    throw InfeasibleScheduleError("schedule_parameters: requires L' < L (delta too large)");
  const Coord D = (2 * s.L + 1) * (2 * s.Lp + 1);
  if (2 * N0_target + 1 < D)
    throw InfeasibleScheduleError("schedule_parameters: target too small for (2L+1)(2L'+1)");
  Coord N0 = N0_target;
  while ((2 * N0 + 1) % D != 0) {
    ++N0;
    if (N0 > N0_target + D)
      throw InfeasibleScheduleError("schedule_parameters: no divisible N0 found");
  }
  const Coord q = (2 * N0 + 1) / D;
  s.N0 = N0;
  s.K = ((2 * s.Lp + 1) * q - 1) / 2;
  s.Kp = ((2 * s.L + 1) * q - 1) / 2;
  const double logN0 = std::log(static_cast<double>(N0));
  s.delta_formula_log10 = -1000.0 * std::log10(logN0);
  s.gamma0_formula_log10 = -2000.0 * std::log10(2.0 * logN0);
  s.gamma0 = gamma0_floor;  // the formula value underflows at any feasible N0
  return s;
}

Eigen::VectorXcd dft(const Eigen::VectorXcd& a, Coord N, int d) {
  lattice::IndexMap m(Box::centered(d, N));
  const auto n = static_cast<Eigen::Index>(m.size());
  if (a.size() != n) throw std::invalid_argument("dft: size mismatch");
  const double period = static_cast<double>(2 * N + 1);
  const double norm = std::pow(period, -0.5 * d);
  Eigen::VectorXcd out(n);
  for (Eigen::Index l = 0; l < n; ++l) {
    Site sl = m.site_at(static_cast<std::size_t>(l));
    cplx acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double arg = -kTwoPi * site_dot(m.site_at(static_cast<std::size_t>(i)), sl) / period;
      acc += a(i) * cplx{std::cos(arg), std::sin(arg)};
    }
    out(l) = norm * acc;
  }
  return out;
}

Eigen::VectorXcd idft(const Eigen::VectorXcd& ahat, Coord N, int d) {
  lattice::IndexMap m(Box::centered(d, N));
  const auto n = static_cast<Eigen::Index>(m.size());
  if (ahat.size() != n) throw std::invalid_argument("idft: size mismatch");
  const double period = static_cast<double>(2 * N + 1);
  const double norm = std::pow(period, -0.5 * d);
  Eigen::VectorXcd out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Site si = m.site_at(static_cast<std::size_t>(i));
    cplx acc = 0.0;
    for (Eigen::Index l = 0; l < n; ++l) {
      double arg = kTwoPi * site_dot(si, m.site_at(static_cast<std::size_t>(l))) / period;
      acc += ahat(l) * cplx{std::cos(arg), std::sin(arg)};
    }
    out(i) = norm * acc;
  }
  return out;
}

UPResult construct_b(const Eigen::VectorXcd& a, const ParameterSchedule& sched, int d) {
  const Coord N0 = sched.N0;
  lattice::IndexMap m(Box::centered(d, N0));
  if (a.size() != static_cast<Eigen::Index>(m.size()))
    throw std::invalid_argument("construct_b: size does not match schedule");
  auto viol = sched.violations();
  for (const auto& v : viol)
    if (v.find("reported") == std::string::npos)
      throw std::invalid_argument("construct_b: invalid schedule: " + v);

  const double anorm = a.norm();
  for (std::size_t i = 0; i < m.size(); ++i)
    if (lattice::sup_norm(m.site_at(i)) > sched.K &&
        std::abs(a(static_cast<Eigen::Index>(i))) > 1e-14 * (anorm + 1e-300))
      throw SupportViolationError();

  Eigen::VectorXcd ahat = dft(a, N0, d);

  // b^ constant on each coset, set to the representative value at
  // l' = 0, i.e. at k'(2L'+1) per axis.
  Eigen::VectorXcd bhat = Eigen::VectorXcd::Zero(ahat.size());
  lattice::IndexMap kmap(Box::centered(d, sched.Kp));
  lattice::IndexMap lmap(Box::centered(d, sched.Lp));
  const Coord step = 2 * sched.Lp + 1;
  for (std::size_t kk = 0; kk < kmap.size(); ++kk) {
    Site kp = kmap.site_at(kk);
    Site rep = Site::zero(d);
    for (int i = 0; i < d; ++i) rep[i] = kp[i] * step;
    cplx val = ahat(static_cast<Eigen::Index>(m.index_of(rep)));
    for (std::size_t ll = 0; ll < lmap.size(); ++ll) {
      Site l = rep + lmap.site_at(ll);
      bhat(static_cast<Eigen::Index>(m.index_of(l))) = val;
    }
  }

  Eigen::VectorXcd b = idft(bhat, N0, d);
  const double bnorm = b.norm();
  if (!(bnorm > 1e-150 * (anorm + 1e-300))) throw DegenerateProjectionError();
  b *= anorm / bnorm;

  UPResult r;
  r.a = a;
  r.b = b;
  r.rel_error = anorm > 0 ? (a - b).norm() / anorm : 0.0;
  r.norm_defect = std::abs(a.norm() - b.norm());
  Eigen::VectorXcd bhat2 = dft(b, N0, d);
  double defect = 0.0;
  for (std::size_t kk = 0; kk < kmap.size(); ++kk) {
    Site kp = kmap.site_at(kk);
    Site rep = Site::zero(d);
    for (int i = 0; i < d; ++i) rep[i] = kp[i] * step;
    cplx val = bhat2(static_cast<Eigen::Index>(m.index_of(rep)));
    for (std::size_t ll = 0; ll < lmap.size(); ++ll) {
      Site l = rep + lmap.site_at(ll);
      defect = std::max(defect,
                        std::abs(bhat2(static_cast<Eigen::Index>(m.index_of(l))) - val));
    }
  }
  r.coset_constancy_defect = defect;
  return r;
}

}  // namespace alb::uncertainty

#include "alb/floquet.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace alb::floquet {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

Coord floor_mod(Coord a, Coord m) {
  Coord r = a % m;
  return r < 0 ? r + m : r;
}

cplx phase(double arg) { return {std::cos(kTwoPi * arg), std::sin(kTwoPi * arg)}; }
}  // namespace

double PeriodicPotential::value_at(const Site& n) const {
  const Coord period = period_box.side();
  Site r = Site::zero(n.dim());
  for (int i = 0; i < n.dim(); ++i)
    r[i] = floor_mod(n[i] + period_box.radius, period) - period_box.radius;
  return values[lattice::IndexMap(period_box).index_of(r)];
}

PeriodicPotential periodize(const model::DisorderConfig& cfg, const model::AlloyPotential& p,
                            Coord N0) {
  Box box = Box::centered(p.dim(), N0);
  lattice::IndexMap m(box);
  std::vector<double> vals(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) vals[i] = model::potential_at(p, cfg, m.site_at(i));
  return PeriodicPotential{box, std::move(vals)};
}

Eigen::VectorXcd floquet_transform(const std::map<Site, cplx>& u, const std::vector<double>& x,
                                   Coord N) {
  if (u.empty()) throw std::invalid_argument("floquet_transform: empty input");
  const int d = u.begin()->first.dim();
  const Coord period = 2 * N + 1;
  lattice::IndexMap m(Box::centered(d, N));
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(m.size()));
  for (const auto& [n, v] : u) {
    Site k = Site::zero(d);
    double arg = 0.0;
    for (int i = 0; i < d; ++i) {
      k[i] = floor_mod(n[i] + N, period) - N;
      arg += static_cast<double>(n[i] - k[i]) * x[static_cast<std::size_t>(i)];
    }
    out(static_cast<Eigen::Index>(m.index_of(k))) += v * phase(arg);
  }
  return out;
}

namespace {

// h_t(x) = sum_{l in [(2N+1)Z]^d, |t+l| <= R} c_{t+l} e^{2 pi i l.x} where
// c = form.offset delta_0 + form.scale T.
cplx folded_coefficient(const model::HoppingKernel& k, const SymbolForm& form, const Site& t,
                        const std::vector<double>& x, Coord N) {
  const Coord period = 2 * N + 1;
  const Coord R = k.truncation_radius();
  const int d = k.dim();
  cplx sum = 0.0;
  // iterate l on the sublattice grid covering |t + l| <= R
  std::vector<Coord> lo(static_cast<std::size_t>(d)), hi(static_cast<std::size_t>(d)),
      cur(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    // l_i = period * q, q in [(-R - t_i)/period, (R - t_i)/period]
    lo[static_cast<std::size_t>(i)] = static_cast<Coord>(
        std::ceil(static_cast<double>(-R - t[i]) / static_cast<double>(period)));
    hi[static_cast<std::size_t>(i)] = static_cast<Coord>(
        std::floor(static_cast<double>(R - t[i]) / static_cast<double>(period)));
    cur[static_cast<std::size_t>(i)] = lo[static_cast<std::size_t>(i)];
    if (lo[static_cast<std::size_t>(i)] > hi[static_cast<std::size_t>(i)]) return sum;
  }
  for (;;) {
    Site m = t;
    double arg = 0.0;
    for (int i = 0; i < d; ++i) {
      Coord l = cur[static_cast<std::size_t>(i)] * period;
      m[i] += l;
      arg += static_cast<double>(l) * x[static_cast<std::size_t>(i)];
    }
    double c = form.scale * k.at(m);
    if (lattice::sup_norm(m) == 0) c += form.offset;
    if (c != 0.0) sum += c * phase(arg);
    int axis = d - 1;
    while (axis >= 0) {
      if (++cur[static_cast<std::size_t>(axis)] <= hi[static_cast<std::size_t>(axis)]) break;
      cur[static_cast<std::size_t>(axis)] = lo[static_cast<std::size_t>(axis)];
      --axis;
    }
    if (axis < 0) break;
  }
  return sum;
}

}  // namespace

Eigen::VectorXcd h_coefficients(const model::HoppingKernel& k, const SymbolForm& form,
                                const std::vector<double>& x, Coord N) {
  lattice::IndexMap m(Box::centered(k.dim(), N));
  Eigen::VectorXcd out(static_cast<Eigen::Index>(m.size()));
  for (std::size_t i = 0; i < m.size(); ++i)
    out(static_cast<Eigen::Index>(i)) = folded_coefficient(k, form, m.site_at(i), x, N);
  return out;
}

double FiberMatrix::hermitian_defect() const {
  return (matrix - matrix.adjoint()).cwiseAbs().maxCoeff();
}

Eigen::VectorXd FiberMatrix::eigenvalues() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(matrix, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

FiberMatrix fiber_matrix(const model::HoppingKernel& k, const SymbolForm& form,
                         const Eigen::VectorXd& diagonal, const std::vector<double>& x, Coord N) {
  lattice::IndexMap m(Box::centered(k.dim(), N));
  const auto n = static_cast<Eigen::Index>(m.size());
  if (diagonal.size() != n) throw std::invalid_argument("fiber_matrix: diagonal size mismatch");
  FiberMatrix f;
  f.quasi_momentum = x;
  f.p_part.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Site si = m.site_at(static_cast<std::size_t>(i));
    for (Eigen::Index j = 0; j < n; ++j) {
      Site sj = m.site_at(static_cast<std::size_t>(j));
      f.p_part(i, j) = folded_coefficient(k, form, si - sj, x, N);
    }
  }
  f.diagonal_part = diagonal;
  f.matrix = f.p_part;
  f.matrix.diagonal() += diagonal.cast<cplx>();
  return f;
}

FiberMatrix edge_fiber(const model::HoppingKernel& k, double M, const PeriodicPotential& per,
                       double shift, const std::vector<double>& x, Coord N) {
  lattice::IndexMap m(Box::centered(k.dim(), N));
  Eigen::VectorXd diag(static_cast<Eigen::Index>(m.size()));
  for (std::size_t i = 0; i < m.size(); ++i)
    diag(static_cast<Eigen::Index>(i)) = shift - per.value_at(m.site_at(i));
  return fiber_matrix(k, SymbolForm{M, -1.0}, diag, x, N);
}

FiberMatrix operator_fiber(const model::HoppingKernel& k, const PeriodicPotential& per,
                           const std::vector<double>& x, Coord N) {
  lattice::IndexMap m(Box::centered(k.dim(), N));
  Eigen::VectorXd diag(static_cast<Eigen::Index>(m.size()));
  for (std::size_t i = 0; i < m.size(); ++i)
    diag(static_cast<Eigen::Index>(i)) = per.value_at(m.site_at(i));
  return fiber_matrix(k, SymbolForm{0.0, 1.0}, diag, x, N);
}

std::vector<std::vector<double>> commensurate_grid(Coord N, int P, int d) {
  const double Q = static_cast<double>(P) * static_cast<double>(2 * N + 1);
  std::vector<std::vector<double>> grid;
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  for (;;) {
    std::vector<double> x(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) x[static_cast<std::size_t>(i)] = idx[static_cast<std::size_t>(i)] / Q;
    grid.push_back(x);
    int axis = d - 1;
    while (axis >= 0) {
      if (++idx[static_cast<std::size_t>(axis)] < P) break;
      idx[static_cast<std::size_t>(axis)] = 0;
      --axis;
    }
    if (axis < 0) break;
  }
  return grid;
}

std::vector<double> floquet_spectrum(const model::HoppingKernel& k, const PeriodicPotential& per,
                                     Coord N, const std::vector<std::vector<double>>& x_grid) {
  std::vector<double> out;
  for (const auto& x : x_grid) {
    Eigen::VectorXd ev = operator_fiber(k, per, x, N).eigenvalues();
    for (Eigen::Index i = 0; i < ev.size(); ++i) out.push_back(ev(i));
  }
  std::sort(out.begin(), out.end());
  return out;
}

Eigen::MatrixXd torus_operator(const model::HoppingKernel& k, const PeriodicPotential& per,
                               int P) {
  const int d = k.dim();
  const Coord Q = static_cast<Coord>(P) * per.period_box.side();
  std::size_t total = 1;
  for (int i = 0; i < d; ++i) total *= static_cast<std::size_t>(Q);
  std::vector<std::size_t> strides(static_cast<std::size_t>(d), 1);
  for (int i = d - 2; i >= 0; --i)
    strides[static_cast<std::size_t>(i)] =
        strides[static_cast<std::size_t>(i + 1)] * static_cast<std::size_t>(Q);
  auto site_of = [&](std::size_t idx) {
    Site s = Site::zero(d);
    for (int i = 0; i < d; ++i) {
      s[i] = static_cast<Coord>(idx / strides[static_cast<std::size_t>(i)] %
                                static_cast<std::size_t>(Q));
    }
    return s;
  };
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(total),
                                            static_cast<Eigen::Index>(total));
  for (std::size_t i = 0; i < total; ++i) {
    Site si = site_of(i);
    // wrapped hopping: H(i,j) = sum over kernel offsets congruent mod Q
    k.entries.for_each_nonzero([&](const Site& off, double v) {
      std::size_t j = 0;
      for (int ax = 0; ax < d; ++ax)
        j += static_cast<std::size_t>(floor_mod(si[ax] - off[ax], Q)) *
             strides[static_cast<std::size_t>(ax)];
      H(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) += v;
    });
    H(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) += per.value_at(si);
  }
  return H;
}

Eigen::MatrixXcd floquet_basis(const std::vector<double>& x, Coord N, int d) {
  lattice::IndexMap m(Box::centered(d, N));
  const auto n = static_cast<Eigen::Index>(m.size());
  const double period = static_cast<double>(2 * N + 1);
  const double norm = std::pow(period, -0.5 * d);
  Eigen::MatrixXcd B(n, n);
  for (Eigen::Index s = 0; s < n; ++s) {
    Site ss = m.site_at(static_cast<std::size_t>(s));
    for (Eigen::Index kk = 0; kk < n; ++kk) {
      Site sk = m.site_at(static_cast<std::size_t>(kk));
      double arg = 0.0;
      for (int i = 0; i < d; ++i)
        arg -= (x[static_cast<std::size_t>(i)] + static_cast<double>(ss[i]) / period) *
               static_cast<double>(sk[i]);
      B(kk, s) = norm * phase(arg);
    }
  }
  return B;
}

Eigen::VectorXcd modified_canonical(const Site& l, const std::vector<double>& x, Coord N) {
  lattice::IndexMap m(Box::centered(l.dim(), N));
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(m.size()));
  double arg = 0.0;
  for (int i = 0; i < l.dim(); ++i)
    arg -= x[static_cast<std::size_t>(i)] * static_cast<double>(l[i]);
  v(static_cast<Eigen::Index>(m.index_of(l))) = phase(arg);
  return v;
}

}  // namespace alb::floquet

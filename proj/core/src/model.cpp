#include "alb/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "alb/rng.hpp"

namespace alb::model {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_half(double x) {
  double y = x - std::floor(x);  // [0,1)
  if (y >= 0.5) y -= 1.0;
  return y;
}
}  // namespace

bool HoppingKernel::is_even() const {
  bool ok = true;
  entries.for_each_nonzero([&](const Site& n, double v) {
    Site neg = Site::zero(n.dim()) - n;
    if (std::abs(entries.at(neg) - v) > 1e-15) ok = false;
  });
  return ok;
}

bool HoppingKernel::satisfies_decay() const {
  bool ok = true;
  entries.for_each_nonzero([&](const Site& n, double v) {
    Coord r = lattice::sup_norm(n);
    if (r == 0) return;
    if (std::abs(v) > std::exp(-decay_rate * static_cast<double>(r - 1)) + 1e-15) ok = false;
  });
  return ok;
}

HoppingKernel laplacian_kernel(int d) {
  KernelTable t(d, 1);
  IndexMap m(Box::centered(d, 1));
  for (std::size_t i = 0; i < m.size(); ++i) {
    Site n = m.site_at(i);
    if (lattice::one_norm(n) == 1) t.set(n, 1.0);
  }
  HoppingKernel k{std::move(t), std::numbers::ln2, 1e-12, "laplacian(d=" + std::to_string(d) + ")"};
  return k;
}

HoppingKernel exponential_kernel(int d, double c, double amplitude, double t0, double tol) {
  if (c <= 0) throw std::invalid_argument("exponential_kernel: rate must be positive");
  Coord R = static_cast<Coord>(std::ceil(-std::log(tol) / c));
  KernelTable t(d, R);
  IndexMap m(Box::centered(d, R));
  for (std::size_t i = 0; i < m.size(); ++i) {
    Site n = m.site_at(i);
    Coord r = lattice::sup_norm(n);
    if (r == 0) {
      t.set(n, t0);
    } else {
      double v = amplitude * std::exp(-c * static_cast<double>(r));
      if (std::abs(v) >= tol) t.set(n, v);
    }
  }
  HoppingKernel k{std::move(t), c, tol,
                  "exp(d=" + std::to_string(d) + ",c=" + std::to_string(c) + ")"};
  return k;
}

HoppingKernel scaled_kernel(const HoppingKernel& k, double kappa) {
  KernelTable t(k.dim(), k.entries.radius());
  k.entries.for_each_nonzero([&](const Site& n, double v) { t.set(n, kappa * v); });
  HoppingKernel out{std::move(t), k.decay_rate, k.truncation_tol,
                    k.id + "*" + std::to_string(kappa)};
  return out;
}

double symbol_eval(const HoppingKernel& k, const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != k.dim())
    throw std::invalid_argument("symbol_eval: dimension mismatch");
  double s = 0.0;
  k.entries.for_each_nonzero([&](const Site& n, double v) {
    double phase = 0.0;
    for (int i = 0; i < n.dim(); ++i) phase += static_cast<double>(n[i]) * x[static_cast<std::size_t>(i)];
    s += v * std::cos(kTwoPi * phase);
  });
  return s;
}

double torus_dist2(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double d = wrap_half(x[i] - y[i]);
    s += d * d;
  }
  return s;
}

namespace {

// One coordinate-wise parabolic ascent pass; h shrinks each sweep.
std::vector<double> refine_extremum(const HoppingKernel& k, std::vector<double> x, double h0,
                                    bool maximize, int sweeps = 24) {
  double sgn = maximize ? 1.0 : -1.0;
  double h = h0;
  for (int s = 0; s < sweeps; ++s) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      std::vector<double> xm = x, xp = x;
      xm[i] -= h;
      xp[i] += h;
      double fm = sgn * symbol_eval(k, xm);
      double f0 = sgn * symbol_eval(k, x);
      double fp = sgn * symbol_eval(k, xp);
      double denom = fm - 2 * f0 + fp;
      if (std::abs(denom) > 1e-300) {
        double step = 0.5 * h * (fm - fp) / denom;
        step = std::clamp(step, -h, h);
        std::vector<double> xc = x;
        xc[i] += step;
        if (sgn * symbol_eval(k, xc) >= f0) x = xc;
      }
    }
    h *= 0.5;
  }
  for (auto& xi : x) xi = wrap_half(xi);
  return x;
}

struct GridScan {
  double max_val, min_val;
  std::vector<std::vector<double>> local_maxima;
};

GridScan scan_grid(const HoppingKernel& k, int res) {
  int d = k.dim();
  std::size_t total = 1;
  for (int i = 0; i < d; ++i) total *= static_cast<std::size_t>(res);
  std::vector<double> vals(total);
  auto point = [&](std::size_t idx) {
    std::vector<double> x(static_cast<std::size_t>(d));
    for (int i = d - 1; i >= 0; --i) {
      x[static_cast<std::size_t>(i)] =
          -0.5 + static_cast<double>(idx % static_cast<std::size_t>(res)) / res;
      idx /= static_cast<std::size_t>(res);
    }
    return x;
  };
  GridScan g;
  g.max_val = -1e300;
  g.min_val = 1e300;
  for (std::size_t idx = 0; idx < total; ++idx) {
    vals[idx] = symbol_eval(k, point(idx));
    g.max_val = std::max(g.max_val, vals[idx]);
    g.min_val = std::min(g.min_val, vals[idx]);
  }
  // grid-local maxima: >= every axis-aligned and diagonal neighbour
  std::vector<std::size_t> strides(static_cast<std::size_t>(d), 1);
  for (int i = d - 2; i >= 0; --i)
    strides[static_cast<std::size_t>(i)] = strides[static_cast<std::size_t>(i + 1)] * static_cast<std::size_t>(res);
  std::vector<int> offs;  // neighbour deltas per axis in {-1,0,1}
  std::size_t ncomb = 1;
  for (int i = 0; i < d; ++i) ncomb *= 3;
  for (std::size_t idx = 0; idx < total; ++idx) {
    bool is_max = true;
    for (std::size_t c = 0; c < ncomb && is_max; ++c) {
      if (c == ncomb / 2) continue;  // the point itself
      std::size_t nidx = 0, cc = c, rem = idx;
      for (int i = 0; i < d; ++i) {
        int delta = static_cast<int>(cc % 3) - 1;
        cc /= 3;
        std::size_t coord = (rem / strides[static_cast<std::size_t>(i)]) % static_cast<std::size_t>(res);
        std::size_t nc = (coord + static_cast<std::size_t>(res + delta)) % static_cast<std::size_t>(res);
        nidx += nc * strides[static_cast<std::size_t>(i)];
      }
      if (vals[nidx] > vals[idx]) is_max = false;
    }
    if (is_max && vals[idx] >= g.max_val - 1e-9 * (1.0 + std::abs(g.max_val)))
      g.local_maxima.push_back(point(idx));
  }
  return g;
}

double theta_estimate(const HoppingKernel& k, int res, double M,
                      const std::vector<std::vector<double>>& thetas) {
  int d = k.dim();
  double spacing = 1.0 / res;
  std::size_t total = 1;
  for (int i = 0; i < d; ++i) total *= static_cast<std::size_t>(res);
  double theta = 1e300;
  std::vector<double> x(static_cast<std::size_t>(d));
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rem = idx;
    for (int i = d - 1; i >= 0; --i) {
      x[static_cast<std::size_t>(i)] =
          -0.5 + static_cast<double>(rem % static_cast<std::size_t>(res)) / res;
      rem /= static_cast<std::size_t>(res);
    }
    double d2 = 1e300;
    for (const auto& th : thetas) d2 = std::min(d2, torus_dist2(x, th));
    if (d2 <= spacing * spacing) continue;  // exclude one-cell neighbourhoods
    theta = std::min(theta, (M - symbol_eval(k, x)) / d2);
  }
  return theta == 1e300 ? 0.0 : theta;
}

}  // namespace

SymbolProfile analyze_symbol(const HoppingKernel& k, int grid_resolution, double refine_tol) {
  if (grid_resolution < 64) throw std::invalid_argument("analyze_symbol: resolution must be >= 64");
  int res = grid_resolution;
  GridScan g = scan_grid(k, res);
  double spacing = 1.0 / res;

  // refine candidates, then merge those within 2 grid cells (torus metric)
  std::vector<std::vector<double>> refined;
  double M = g.max_val;
  for (const auto& x0 : g.local_maxima) {
    auto x = refine_extremum(k, x0, spacing, true);
    M = std::max(M, symbol_eval(k, x));
    refined.push_back(x);
  }
  std::vector<std::vector<double>> thetas;
  double merge2 = std::max(4.0 * spacing * spacing, refine_tol * refine_tol);
  for (const auto& x : refined) {
    if (symbol_eval(k, x) < M - 1e-9 * (1.0 + std::abs(M))) continue;
    bool merged = false;
    for (const auto& t : thetas)
      if (torus_dist2(x, t) <= merge2) {
        merged = true;
        break;
      }
    if (!merged) thetas.push_back(x);
  }
  std::sort(thetas.begin(), thetas.end());

  // refine the minimum from the best grid point
  double m = g.min_val;
  {
    std::size_t total = 1;
    for (int i = 0; i < k.dim(); ++i) total *= static_cast<std::size_t>(res);
    std::vector<double> best;
    double best_v = 1e300;
    std::vector<double> x(static_cast<std::size_t>(k.dim()));
    for (std::size_t idx = 0; idx < total; ++idx) {
      std::size_t rem = idx;
      for (int i = k.dim() - 1; i >= 0; --i) {
        x[static_cast<std::size_t>(i)] =
            -0.5 + static_cast<double>(rem % static_cast<std::size_t>(res)) / res;
        rem /= static_cast<std::size_t>(res);
      }
      double v = symbol_eval(k, x);
      if (v < best_v) {
        best_v = v;
        best = x;
      }
    }
    m = std::min(m, symbol_eval(k, refine_extremum(k, best, spacing, false)));
  }

  SymbolProfile prof;
  prof.M = M;
  prof.m = m;
  prof.maximizers = thetas;
  prof.J = static_cast<int>(thetas.size());
  prof.grid_resolution = res;
  prof.id = k.id;
  prof.Theta = std::max(theta_estimate(k, res, M, thetas), 0.0);
  prof.a3_ok = prof.Theta > 0.0;
  if (res >= 128) {
    double coarse = theta_estimate(k, res / 2, M, thetas);
    if (coarse > 0 && prof.Theta > 0)
      prof.theta_stable = std::abs(coarse - prof.Theta) <= 0.05 * prof.Theta;
  }
  return prof;
}

AlloyPotential dyadic_potential(int d, double lambda, double tol) {
  if (lambda < 0) throw std::invalid_argument("dyadic_potential: lambda must be nonnegative");
  Coord R = static_cast<Coord>(std::ceil(-std::log2(tol)));
  KernelTable A(d, R);
  IndexMap m(Box::centered(d, R));
  for (std::size_t i = 0; i < m.size(); ++i) {
    Site n = m.site_at(i);
    A.set(n, std::pow(2.0, -static_cast<double>(lattice::sup_norm(n))));
  }
  double sum = A.sum();
  return AlloyPotential{lambda, std::move(A), sum,
                        "dyadic(d=" + std::to_string(d) + ",lambda=" + std::to_string(lambda) + ")"};
}

AlloyPotential make_potential(double lambda, KernelTable A, std::string id) {
  if (lambda < 0) throw std::invalid_argument("make_potential: lambda must be nonnegative");
  if (A.min_value() < 0) throw std::invalid_argument("make_potential: A_m must be nonnegative");
  if (A.at(Site::zero(A.dim())) <= 0) throw std::invalid_argument("make_potential: A_0 must be positive");
  double sum = A.sum();
  return AlloyPotential{lambda, std::move(A), sum, std::move(id)};
}

DisorderConfig DisorderConfig::with_override(const Site& n, double t) const {
  if (std::abs(t) > 1.0 + 1e-12)
    throw std::invalid_argument("with_override: magnitude must be <= 1");
  DisorderConfig out = *this;
  out.overrides_[n] = t;
  return out;
}

DisorderConfig DisorderConfig::with_sign(const Site& n, int s) const {
  DisorderConfig out = *this;
  if (!window_.contains(n)) throw std::out_of_range("with_sign: site outside window");
  out.values_[map_.index_of(n)] = static_cast<std::int8_t>(s >= 0 ? 1 : -1);
  out.overrides_.erase(n);
  return out;
}

DisorderConfig DisorderConfig::truncated(const Box& new_window, Fill fill) const {
  IndexMap nm(new_window);
  std::vector<std::int8_t> vals(nm.size(), 1);
  for (std::size_t i = 0; i < nm.size(); ++i) {
    Site n = nm.site_at(i);
    double v = window_.contains(n) ? static_cast<double>(values_[map_.index_of(n)])
                                   : (fill_ == Fill::PlusOne ? 1.0 : fill_ == Fill::MinusOne ? -1.0 : 0.0);
    vals[i] = static_cast<std::int8_t>(v >= 0 ? 1 : -1);
    if (v == 0.0) vals[i] = 0;
  }
  DisorderConfig out(new_window, std::move(vals), fill, seed_);
  for (const auto& [site, t] : overrides_)
    if (new_window.contains(site)) out.overrides_[site] = t;
  return out;
}

DisorderConfig sample_config(std::uint64_t seed, const Box& window, Fill fill) {
  IndexMap m(window);
  std::vector<std::int8_t> vals(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    Site n = m.site_at(i);
    std::uint64_t key = seed;
    for (int j = 0; j < n.dim(); ++j) key = rng::mix(key, n[j]);
    vals[i] = static_cast<std::int8_t>(rng::sign(rng::splitmix64(key)));
  }
  return DisorderConfig(window, std::move(vals), fill, seed);
}

DisorderConfig constant_config(const Box& window, int sign, Fill fill) {
  IndexMap m(window);
  std::vector<std::int8_t> vals(m.size(), static_cast<std::int8_t>(sign >= 0 ? 1 : -1));
  return DisorderConfig(window, std::move(vals), fill, 0);
}

double potential_at(const AlloyPotential& p, const DisorderConfig& cfg, const Site& n) {
  double s = 0.0;
  p.site_kernel.for_each_nonzero(
      [&](const Site& k, double a) { s += a * cfg.value(n - k); });
  return p.lambda * s;
}

double spectral_edge(const AlloyPotential& p, const SymbolProfile& prof) {
  return prof.M + p.lambda * p.kernel_sum;
}

Eigen::MatrixXd assemble_hopping(const Box& box, const HoppingKernel& k) {
  if (box.dim() != k.dim()) throw std::invalid_argument("assemble_hopping: dimension mismatch");
  IndexMap m(box);
  const auto n = static_cast<Eigen::Index>(m.size());
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Site si = m.site_at(static_cast<std::size_t>(i));
    k.entries.for_each_nonzero([&](const Site& off, double v) {
      Site sj = si - off;  // T(i,j) = T(s_i - s_j) = T(off)
      if (box.contains(sj)) T(i, static_cast<Eigen::Index>(m.index_of(sj))) = v;
    });
  }
  return T;
}

Eigen::VectorXd potential_diagonal(const Box& box, const AlloyPotential& p,
                                   const DisorderConfig& cfg) {
  IndexMap m(box);
  Eigen::VectorXd D(static_cast<Eigen::Index>(m.size()));
  for (std::size_t i = 0; i < m.size(); ++i)
    D(static_cast<Eigen::Index>(i)) = potential_at(p, cfg, m.site_at(i));
  return D;
}

BoxHamiltonian assemble_hamiltonian(const Box& box, const HoppingKernel& k,
                                    const AlloyPotential& p, const DisorderConfig& cfg) {
  Eigen::MatrixXd H = assemble_hopping(box, k);
  H.diagonal() += potential_diagonal(box, p, cfg);
  return BoxHamiltonian{box, std::move(H), k.id, p.id, cfg.seed()};
}

}  // namespace alb::model

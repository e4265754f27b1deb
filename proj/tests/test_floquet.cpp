#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <complex>

#include "alb/floquet.hpp"
#include "alb/model.hpp"
#include "alb/rng.hpp"

using namespace alb;
using namespace alb::lattice;
using namespace alb::model;
using namespace alb::floquet;

namespace {

PeriodicPotential sampled_periodic(int d, double lambda, Coord N0, std::uint64_t seed) {
  auto p = dyadic_potential(d, lambda);
  auto cfg = sample_config(seed, Box::centered(d, N0 + p.truncation_radius()));
  return periodize(cfg, p, N0);
}

std::vector<double> random_x(rng::Stream& st, int d, Coord N) {
  std::vector<double> x(static_cast<std::size_t>(d));
  double half = 0.5 / static_cast<double>(2 * N + 1);
  for (auto& xi : x) xi = (2.0 * st.next_uniform() - 1.0) * half;
  return x;
}

}  // namespace

TEST_CASE("periodize: constant potential and periodicity") {
  auto p = dyadic_potential(1, 1.0);
  auto plus = constant_config(Box::centered(1, 80), +1);
  auto per = periodize(plus, p, 5);
  CHECK(per.value_at(Site({0})) == doctest::Approx(3.0).epsilon(1e-11));
  CHECK(per.value_at(Site({7})) == per.value_at(Site({7 - 11})));
  CHECK(per.value_at(Site({123})) == per.value_at(Site({123 % 11})));

  auto per0 = periodize(plus, p, 0);
  CHECK(per0.value_at(Site({42})) == per0.value_at(Site({0})));
}

TEST_CASE("floquet_transform examples") {
  std::map<Site, cplx> u;
  u[Site({0})] = 1.0;
  auto v = floquet_transform(u, {0.3}, 2);
  IndexMap m(Box::centered(1, 2));
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m.site_at(i) == Site({0}))
      CHECK(std::abs(v(static_cast<Eigen::Index>(i)) - 1.0) < 1e-14);
    else
      CHECK(std::abs(v(static_cast<Eigen::Index>(i))) < 1e-14);
  }

  // support inside Lambda_N: plain restriction
  std::map<Site, cplx> w;
  w[Site({-1})] = cplx{0.5, -0.25};
  w[Site({2})] = cplx{1.5, 2.0};
  auto vw = floquet_transform(w, {0.41}, 2);
  CHECK(std::abs(vw(static_cast<Eigen::Index>(m.index_of(Site({-1})))) - w[Site({-1})]) < 1e-14);
  CHECK(std::abs(vw(static_cast<Eigen::Index>(m.index_of(Site({2})))) - w[Site({2})]) < 1e-14);

  // u = delta_{(2N+1) e1}: u_0(x) = e^{2 pi i (2N+1) x}
  Coord N = 3;
  std::map<Site, cplx> s;
  s[Site({2 * N + 1})] = 1.0;
  double x = 0.137;
  auto vs = floquet_transform(s, {x}, N);
  IndexMap m3(Box::centered(1, N));
  cplx want = std::exp(cplx{0, 2 * std::numbers::pi * static_cast<double>(2 * N + 1) * x});
  CHECK(std::abs(vs(static_cast<Eigen::Index>(m3.index_of(Site({0})))) - want) < 1e-13);
}

TEST_CASE("h_coefficients: folded laplacian at N=1, x=0") {
  auto k = laplacian_kernel(1);
  // h = M - T^ with M=2: matrix (h_{k-j}) has eigenvalues {0, 3, 3}
  auto f = fiber_matrix(k, SymbolForm{2.0, -1.0}, Eigen::VectorXd::Zero(3), {0.0}, 1);
  auto ev = f.eigenvalues();
  CHECK(ev(0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(ev(1) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(ev(2) == doctest::Approx(3.0).epsilon(1e-12));

  // the symbol itself: the Z_3 ring adjacency, eigenvalues {2, -1, -1}
  auto g = fiber_matrix(k, SymbolForm{0.0, 1.0}, Eigen::VectorXd::Zero(3), {0.0}, 1);
  auto ev2 = g.eigenvalues();
  CHECK(ev2(0) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(ev2(1) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(ev2(2) == doctest::Approx(2.0).epsilon(1e-12));

  // constant symbol: h == c has only the zero coefficient
  auto zero = scaled_kernel(k, 0.0);
  auto hc = h_coefficients(zero, SymbolForm{1.7, 1.0}, {0.2}, 2);
  IndexMap m(Box::centered(1, 2));
  for (std::size_t i = 0; i < m.size(); ++i) {
    cplx want = m.site_at(i) == Site({0}) ? cplx{1.7, 0.0} : cplx{0.0, 0.0};
    CHECK(std::abs(hc(static_cast<Eigen::Index>(i)) - want) < 1e-14);
  }
}

TEST_CASE("h_coefficients: Parseval against the fiber grid samples") {
  auto k = laplacian_kernel(1);
  rng::Stream st(5);
  for (Coord N : {2, 4}) {
    auto x = random_x(st, 1, N);
    auto hc = h_coefficients(k, 2.0, x, N);
    double lhs = hc.squaredNorm();
    double rhs = 0.0;
    for (Coord s = -N; s <= N; ++s) {
      double xs = x[0] + static_cast<double>(s) / static_cast<double>(2 * N + 1);
      double h = 2.0 - symbol_eval(k, {xs});
      rhs += h * h;
    }
    rhs /= static_cast<double>(2 * N + 1);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("fiber matrices: hermitian, positive P part, free eigenvalues") {
  auto k = laplacian_kernel(1);
  rng::Stream st(17);
  for (int t = 0; t < 5; ++t) {
    Coord N = 3;
    auto x = random_x(st, 1, N);
    auto per = sampled_periodic(1, 1.5, N, 100 + static_cast<std::uint64_t>(t));
    auto f = edge_fiber(k, 2.0, per, 1.5 * 3.0, x, N);
    CHECK(f.hermitian_defect() < 1e-12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(f.p_part, Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues().minCoeff() > -1e-10);

    // V = 0: eigenvalues are exactly h(x + s/(2N+1))
    auto free = fiber_matrix(k, SymbolForm{2.0, -1.0},
                             Eigen::VectorXd::Zero(static_cast<Eigen::Index>(2 * N + 1)), x, N);
    auto ev = free.eigenvalues();
    std::vector<double> want;
    for (Coord s = -N; s <= N; ++s)
      want.push_back(2.0 - symbol_eval(k, {x[0] + static_cast<double>(s) /
                                                     static_cast<double>(2 * N + 1)}));
    std::sort(want.begin(), want.end());
    for (Eigen::Index i = 0; i < ev.size(); ++i)
      CHECK(ev(i) == doctest::Approx(want[static_cast<std::size_t>(i)]).epsilon(1e-10));
  }
}

TEST_CASE("fiber with constant-potential shift: spectrum equals the P spectrum") {
  auto k = laplacian_kernel(1);
  auto p = dyadic_potential(1, 1.0);
  auto plus = constant_config(Box::centered(1, 60), +1);
  Coord N = 2;
  auto per = periodize(plus, p, N);
  double shift = p.lambda * p.kernel_sum;  // diagonal part vanishes
  auto f = edge_fiber(k, 2.0, per, shift, {0.05}, N);
  auto fp = fiber_matrix(k, SymbolForm{2.0, -1.0},
                         Eigen::VectorXd::Zero(static_cast<Eigen::Index>(2 * N + 1)), {0.05}, N);
  auto a = f.eigenvalues();
  auto b = fp.eigenvalues();
  for (Eigen::Index i = 0; i < a.size(); ++i)
    CHECK(a(i) == doctest::Approx(b(i)).epsilon(1e-10));
}

TEST_CASE("floquet spectrum equals the covering-torus diagonalization") {
  rng::Stream st(23);
  for (auto [d, N, P] : std::vector<std::tuple<int, Coord, int>>{{1, 3, 3}, {2, 2, 2}}) {
    auto k = laplacian_kernel(d);
    auto per = sampled_periodic(d, 1.0, N, 7);
    auto grid = commensurate_grid(N, P, d);
    auto fiber_spec = floquet_spectrum(k, per, N, grid);
    Eigen::MatrixXd T = torus_operator(k, per, P);
    CHECK((T - T.transpose()).cwiseAbs().maxCoeff() == 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T, Eigen::EigenvaluesOnly);
    REQUIRE(fiber_spec.size() == static_cast<std::size_t>(es.eigenvalues().size()));
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
      CHECK(std::abs(es.eigenvalues()(i) - fiber_spec[static_cast<std::size_t>(i)]) < 1e-8);
  }
}

TEST_CASE("floquet spectrum: single point and constant shift") {
  auto k = laplacian_kernel(1);
  Coord N = 3;
  auto p = dyadic_potential(1, 1.0);
  auto plus = constant_config(Box::centered(1, 60), +1);
  auto per = periodize(plus, p, N);  // constant c = 3 (truncated)
  auto spec = floquet_spectrum(k, per, N, {{0.0}});
  std::vector<double> want;
  for (Coord s = -N; s <= N; ++s)
    want.push_back(symbol_eval(k, {static_cast<double>(s) / static_cast<double>(2 * N + 1)}) +
                   per.value_at(Site({0})));
  std::sort(want.begin(), want.end());
  for (std::size_t i = 0; i < want.size(); ++i)
    CHECK(spec[i] == doctest::Approx(want[i]).epsilon(1e-10));
}

TEST_CASE("floquet basis: orthonormality and the modified canonical identities") {
  rng::Stream st(29);
  Coord N = 2;
  int d = 1;
  auto x = random_x(st, d, N);
  auto B = floquet_basis(x, N, d);
  Eigen::MatrixXcd gram = B.adjoint() * B;
  CHECK((gram - Eigen::MatrixXcd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() <
        1e-12);

  // <v_l, beta_s> = (2N+1)^{-d/2} e^{-2 pi i (s/(2N+1)).l}
  IndexMap m(Box::centered(d, N));
  for (Coord l = -N; l <= N; ++l) {
    auto v = modified_canonical(Site({l}), x, N);
    for (Coord s = -N; s <= N; ++s) {
      cplx ip = v.dot(B.col(static_cast<Eigen::Index>(m.index_of(Site({s})))));
      double arg = -2.0 * std::numbers::pi * static_cast<double>(s) * static_cast<double>(l) /
                   static_cast<double>(2 * N + 1);
      cplx want = std::exp(cplx{0, arg}) / std::sqrt(static_cast<double>(2 * N + 1));
      CHECK(std::abs(ip - want) < 1e-12);
    }
  }
}

TEST_CASE("shift identity between a^j and the recentered tilde a^j") {
  // <v_l, a^j> = e^{-2 pi i (k_j/(2N+1)).l} <v_l, tilde a^j> for coefficient
  // vectors supported on Lambda_K(k_j) in the Floquet basis
  rng::Stream st(31);
  Coord N = 6, K = 1, kj = 3;
  int d = 1;
  auto x = random_x(st, d, N);
  auto B = floquet_basis(x, N, d);
  IndexMap m(Box::centered(d, N));

  Eigen::VectorXcd coef = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(m.size()));
  Eigen::VectorXcd coef_shift = coef;
  for (Coord q = -K; q <= K; ++q) {
    cplx val{st.next_gaussian(), st.next_gaussian()};
    coef(static_cast<Eigen::Index>(m.index_of(Site({q + kj})))) = val;
    coef_shift(static_cast<Eigen::Index>(m.index_of(Site({q})))) = val;
  }
  Eigen::VectorXcd aj = B * coef;
  Eigen::VectorXcd aj_tilde = B * coef_shift;
  for (Coord l = -N; l <= N; ++l) {
    auto v = modified_canonical(Site({l}), x, N);
    cplx lhs = v.dot(aj);
    double arg = -2.0 * std::numbers::pi * static_cast<double>(kj) * static_cast<double>(l) /
                 static_cast<double>(2 * N + 1);
    cplx rhs = std::exp(cplx{0, arg}) * v.dot(aj_tilde);
    CHECK(std::abs(lhs - rhs) < 1e-12);
  }
}

TEST_CASE("approximate-eigenvalue inclusion via lifted fiber eigenvectors") {
  // a unit fiber eigenvector lifted to the covering torus has a small
  // residual, and dist(spec, mu) <= residual
  auto k = laplacian_kernel(1);
  Coord N = 3;
  int P = 3;
  auto per = sampled_periodic(1, 2.0, N, 77);
  auto grid = commensurate_grid(N, P, 1);
  const auto& x = grid[1];
  auto f = operator_fiber(k, per, x, N);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(f.matrix);
  Eigen::MatrixXd T = torus_operator(k, per, P);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> est(T, Eigen::EigenvaluesOnly);

  IndexMap m(Box::centered(1, N));
  const Coord Q = static_cast<Coord>(P) * (2 * N + 1);
  for (Eigen::Index which = 0; which < 2; ++which) {
    double mu = es.eigenvalues()(which);
    Eigen::VectorXcd u = es.eigenvectors().col(which);
    // xi_{k + l} = u_k e^{-2 pi i l.x} on the torus sites 0..Q-1
    Eigen::VectorXcd xi(Q);
    for (Coord n = 0; n < Q; ++n) {
      Coord kk = ((n + N) % (2 * N + 1)) - N;
      Coord l = n - kk;
      double arg = -2.0 * std::numbers::pi * static_cast<double>(l) * x[0];
      xi(n) = u(static_cast<Eigen::Index>(m.index_of(Site({kk})))) * std::exp(cplx{0, arg});
    }
    xi.normalize();
    double res = (T.cast<cplx>() * xi - mu * xi).norm();
    CHECK(res < 1e-9);
    CHECK((est.eigenvalues().array() - mu).abs().minCoeff() <= res + 1e-12);
  }
}

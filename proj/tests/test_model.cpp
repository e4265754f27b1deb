#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <numbers>

#include "alb/model.hpp"
#include "alb/rng.hpp"

using namespace alb;
using namespace alb::lattice;
using namespace alb::model;

namespace {

// Independent truncated brute-force sums over Lambda_60 for the dyadic
// profile; the implementation goes through KernelTable, this does not.
double dyadic_sum_oracle(int d) {
  IndexMap m(Box::centered(d, 60));
  double s = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i)
    s += std::pow(2.0, -static_cast<double>(sup_norm(m.site_at(i))));
  return s;
}

double potential_oracle_1d(const Site& n, const std::function<double(Coord)>& eps) {
  double s = 0.0;
  for (Coord m = n[0] - 60; m <= n[0] + 60; ++m)
    s += std::pow(2.0, -static_cast<double>(abs_coord(n[0] - m))) * eps(m);
  return s;
}

}  // namespace

TEST_CASE("laplacian kernel entries") {
  auto k1 = laplacian_kernel(1);
  CHECK(k1.at(Site({1})) == 1.0);
  CHECK(k1.at(Site({-1})) == 1.0);
  CHECK(k1.at(Site({0})) == 0.0);

  auto k2 = laplacian_kernel(2);
  int ones = 0;
  k2.entries.for_each_nonzero([&](const Site&, double v) {
    CHECK(v == 1.0);
    ++ones;
  });
  CHECK(ones == 4);
  CHECK(k2.is_even());
  CHECK(k2.satisfies_decay());
}

TEST_CASE("exponential kernel satisfies its decay certificate") {
  auto k = exponential_kernel(1, 0.7);
  CHECK(k.is_even());
  CHECK(k.satisfies_decay());
  CHECK(k.truncation_radius() >= 30);
}

TEST_CASE("symbol evaluation") {
  auto k = laplacian_kernel(1);
  CHECK(symbol_eval(k, {0.0}) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(symbol_eval(k, {0.25}) == doctest::Approx(0.0).epsilon(1e-14));

  auto zero = scaled_kernel(k, 0.0);
  CHECK(symbol_eval(zero, {0.123}) == 0.0);

  // evenness: T^(x) = T^(-x)
  rng::Stream st(3);
  auto k2 = laplacian_kernel(2);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> x = {st.next_uniform() - 0.5, st.next_uniform() - 0.5};
    std::vector<double> nx = {-x[0], -x[1]};
    CHECK(symbol_eval(k2, x) == doctest::Approx(symbol_eval(k2, nx)).epsilon(1e-13));
  }
}

TEST_CASE("analyze_symbol: d=1 laplacian") {
  auto prof = analyze_symbol(laplacian_kernel(1), 4096, 1e-9);
  CHECK(prof.M == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(prof.m == doctest::Approx(-2.0).epsilon(1e-12));
  REQUIRE(prof.J == 1);
  CHECK(std::abs(prof.maximizers[0][0]) < 1e-6);
  // global min of (2-2cos 2 pi x)/x^2 on the torus sits at x=1/2 with value 16
  CHECK(prof.Theta == doctest::Approx(16.0).epsilon(1e-3));
  CHECK(prof.a3_ok);
}

TEST_CASE("analyze_symbol: d=2 laplacian and dilation") {
  auto prof = analyze_symbol(laplacian_kernel(2), 128, 1e-9);
  CHECK(prof.M == doctest::Approx(4.0).epsilon(1e-12));
  REQUIRE(prof.J == 1);
  CHECK(std::abs(prof.maximizers[0][0]) < 1e-6);
  CHECK(std::abs(prof.maximizers[0][1]) < 1e-6);

  auto scaled = analyze_symbol(scaled_kernel(laplacian_kernel(1), 0.1), 4096, 1e-9);
  CHECK(scaled.M == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("potential_at: constant and mixed configurations") {
  auto p = dyadic_potential(1, 1.0);
  Box window = Box::centered(1, 80);
  auto plus = constant_config(window, +1, Fill::PlusOne);

  // eps == +1 everywhere: geometric sum 3, and exactly lambda * kernel_sum
  double v = potential_at(p, plus, Site({0}));
  CHECK(v == doctest::Approx(3.0).epsilon(1e-11));
  CHECK(v == doctest::Approx(p.lambda * p.kernel_sum).epsilon(1e-14));
  CHECK(potential_at(p, plus, Site({17})) == doctest::Approx(v).epsilon(1e-14));

  // eps_0 = +1, eps_m = -1 otherwise
  auto mixed = constant_config(window, -1, Fill::MinusOne).with_sign(Site({0}), +1);
  auto eps = [](Coord m) { return m == 0 ? 1.0 : -1.0; };
  CHECK(potential_at(p, mixed, Site({0})) ==
        doctest::Approx(potential_oracle_1d(Site({0}), eps)).epsilon(1e-11));
  CHECK(potential_at(p, mixed, Site({0})) == doctest::Approx(-1.0).epsilon(1e-10));
  CHECK(potential_at(p, mixed, Site({1})) == doctest::Approx(-2.0).epsilon(1e-10));

  auto p0 = dyadic_potential(1, 0.0);
  CHECK(potential_at(p0, plus, Site({5})) == 0.0);
}

TEST_CASE("spectral edge: 5 in d=1 and 21 in d=2") {
  auto prof1 = analyze_symbol(laplacian_kernel(1), 4096, 1e-9);
  auto p1 = dyadic_potential(1, 1.0);
  CHECK(std::abs(spectral_edge(p1, prof1) - (2.0 + dyadic_sum_oracle(1))) < 1e-9);
  CHECK(std::abs(spectral_edge(p1, prof1) - 5.0) < 1e-9);

  auto prof2 = analyze_symbol(laplacian_kernel(2), 128, 1e-9);
  auto p2 = dyadic_potential(2, 1.0);
  CHECK(std::abs(spectral_edge(p2, prof2) - (4.0 + dyadic_sum_oracle(2))) < 1e-9);
  CHECK(std::abs(spectral_edge(p2, prof2) - 21.0) < 1e-9);

  CHECK(spectral_edge(dyadic_potential(1, 0.0), prof1) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("hamiltonian assembly examples") {
  auto k = laplacian_kernel(1);
  auto p = dyadic_potential(1, 1.0);
  auto plus = constant_config(Box::centered(1, 80), +1, Fill::PlusOne);

  auto h0 = assemble_hamiltonian(Box::centered(1, 0), k, p, plus);
  REQUIRE(h0.order() == 1);
  CHECK(h0.matrix(0, 0) == doctest::Approx(3.0).epsilon(1e-11));

  auto p0 = dyadic_potential(1, 0.0);
  auto h1 = assemble_hamiltonian(Box::centered(1, 1), k, p0, plus);
  Eigen::MatrixXd want(3, 3);
  want << 0, 1, 0, 1, 0, 1, 0, 1, 0;
  CHECK((h1.matrix - want).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("assembled matrices are exactly symmetric") {
  auto k = laplacian_kernel(2);
  auto p = dyadic_potential(2, 1.5);
  auto cfg = sample_config(99, Box::centered(2, 10));
  auto H = assemble_hamiltonian(Box::centered(2, 3), k, p, cfg);
  CHECK((H.matrix - H.matrix.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("spectrum lies in the symbol range plus the potential bound") {
  auto k = laplacian_kernel(1);
  double lambda = 2.0;
  auto p = dyadic_potential(1, lambda);
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    auto cfg = sample_config(seed, Box::centered(1, 60));
    auto H = assemble_hamiltonian(Box::centered(1, 12), k, p, cfg);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H.matrix, Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues().minCoeff() >= -2.0 - lambda * p.kernel_sum - 1e-9);
    CHECK(es.eigenvalues().maxCoeff() <= 2.0 + lambda * p.kernel_sum + 1e-9);
  }
}

TEST_CASE("edge deficit equals the path-graph closed form") {
  // H_N(eps==+1) = T_N + (lambda kernel_sum) I;
  // E* - lambda_max = 2 - 2 cos(pi/(2N+2)) up to the eigensolver
  auto k = laplacian_kernel(1);
  auto p = dyadic_potential(1, 1.0);
  auto prof = analyze_symbol(k, 4096, 1e-9);
  double estar = spectral_edge(p, prof);
  double prev = 1e300;
  for (Coord N : {8, 16, 32, 64}) {
    auto plus = constant_config(Box::centered(1, N + p.truncation_radius()), +1, Fill::PlusOne);
    auto H = assemble_hamiltonian(Box::centered(1, N), k, p, plus);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H.matrix, Eigen::EigenvaluesOnly);
    double deficit = estar - es.eigenvalues().maxCoeff();
    double want = 2.0 - 2.0 * std::cos(std::numbers::pi / (2.0 * static_cast<double>(N) + 2.0));
    CHECK(std::abs(deficit - want) < 1e-9);
    CHECK(deficit < prev);
    prev = deficit;
  }
}

TEST_CASE("sample_config determinism and restriction consistency") {
  Box big = Box::centered(1, 30);
  Box small = Box::centered(1, 10);
  auto a = sample_config(42, big);
  auto b = sample_config(42, big);
  auto c = sample_config(42, small);
  for (const Site& s : box_sites(small)) {
    CHECK(a.value(s) == b.value(s));
    CHECK(a.value(s) == c.value(s));
  }
  auto other = sample_config(43, big);
  int diff = 0;
  for (const Site& s : box_sites(big))
    if (a.value(s) != other.value(s)) ++diff;
  CHECK(diff > 0);
}

TEST_CASE("sample_config signs are fair (CLT bound)") {
  const long n = 1000000;
  Box w = Box::centered(1, 0);
  double sum = 0.0;
  for (long t = 0; t < n; ++t)
    sum += sample_config(rng::derive(2024, static_cast<std::uint64_t>(t)), w).value(Site({0}));
  CHECK(std::abs(sum / static_cast<double>(n)) < 4.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("free-site overrides take precedence and stay bounded") {
  Box w = Box::centered(1, 5);
  auto cfg = constant_config(w, +1).with_override(Site({2}), -0.25);
  CHECK(cfg.value(Site({2})) == -0.25);
  CHECK(cfg.value(Site({1})) == 1.0);
  CHECK_THROWS_AS(cfg.with_override(Site({0}), 1.5), std::invalid_argument);
}

TEST_CASE("potential locality: changes outside Lambda_{11N/10} are dyadically small") {
  auto p = dyadic_potential(1, 1.0);
  for (Coord N : {20, 55, 110}) {
    Coord w = (11 * N + 9) / 10;
    Box window = Box::centered(1, w);
    Box wide = Box::centered(1, w + p.truncation_radius() + 5);
    auto base = sample_config(5, wide);
    // flip everything outside the window
    auto flipped = base;
    for (const Site& s : box_sites(wide))
      if (!window.contains(s))
        flipped = flipped.with_sign(s, base.value(s) > 0 ? -1 : +1);
    // bound lambda * sum_{|m| > N/10} A_m (two-sided dyadic tail)
    double bound = 0.0;
    for (Coord m = N / 10 + 1; m <= p.truncation_radius() + 200; ++m)
      bound += 2.0 * std::pow(2.0, -static_cast<double>(m));
    double worst = 0.0;
    for (const Site& s : box_sites(Box::centered(1, N)))
      worst = std::max(worst, std::abs(potential_at(p, base, s) - potential_at(p, flipped, s)));
    CHECK(worst <= bound + 1e-12);
  }
}

#include <doctest.h>

#include <cmath>

#include "alb/rng.hpp"
#include "alb/uncertainty.hpp"

using namespace alb;
using namespace alb::lattice;
using namespace alb::uncertainty;

namespace {

Eigen::VectorXcd random_vector(rng::Stream& st, std::size_t n) {
  Eigen::VectorXcd v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = cplx{st.next_gaussian(), st.next_gaussian()};
  return v;
}

// schedule via the L = K', L' = K pairing (both factorizations coincide)
ParameterSchedule paired_schedule(Coord K, Coord Kp) {
  ParameterSchedule s;
  s.N0 = ((2 * K + 1) * (2 * Kp + 1) - 1) / 2;
  s.delta = 0.5;
  s.L = Kp;
  s.Lp = K;
  s.K = K;
  s.Kp = Kp;
  return s;
}

Eigen::VectorXcd supported_draw(rng::Stream& st, const ParameterSchedule& s, int d) {
  IndexMap m(Box::centered(d, s.N0));
  IndexMap sup(Box::centered(d, s.K));
  Eigen::VectorXcd a = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(m.size()));
  for (std::size_t i = 0; i < sup.size(); ++i)
    a(static_cast<Eigen::Index>(m.index_of(sup.site_at(i)))) =
        cplx{st.next_gaussian(), st.next_gaussian()};
  return a;
}

}  // namespace

TEST_CASE("dft: delta input, unitarity and round trip") {
  for (int d : {1, 2}) {
    for (Coord N : std::vector<Coord>{2, 4, 7}) {
      if (d == 2 && N == 7) continue;
      IndexMap m(Box::centered(d, N));
      Eigen::VectorXcd e0 = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(m.size()));
      e0(static_cast<Eigen::Index>(m.index_of(Site::zero(d)))) = 1.0;
      auto hat = dft(e0, N, d);
      double want = std::pow(static_cast<double>(2 * N + 1), -0.5 * d);
      for (Eigen::Index i = 0; i < hat.size(); ++i) CHECK(std::abs(hat(i) - want) < 1e-13);

      rng::Stream st(static_cast<std::uint64_t>(100 * d + N));
      auto a = random_vector(st, m.size());
      auto ahat = dft(a, N, d);
      CHECK(std::abs(ahat.norm() - a.norm()) < 1e-12 * a.norm());
      CHECK((idft(ahat, N, d) - a).norm() < 1e-12 * a.norm());
    }
  }
}

TEST_CASE("construct_b: delta_0 is already coset constant") {
  // K = 0, L = N0 = 4 and (L', K') = (1, 1) on Z_9
  ParameterSchedule s;
  s.N0 = 4;
  s.delta = 0.5;
  s.L = 4;
  s.Lp = 1;
  s.K = 0;
  s.Kp = 1;
  REQUIRE(s.factorizations_ok());
  IndexMap m(Box::centered(1, s.N0));
  Eigen::VectorXcd a = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(m.size()));
  a(static_cast<Eigen::Index>(m.index_of(Site({0})))) = 1.0;
  auto r = construct_b(a, s, 1);
  CHECK(r.rel_error < 1e-12);
  CHECK(r.coset_constancy_defect < 1e-12);
  CHECK(r.norm_defect < 1e-12);
}

TEST_CASE("construct_b: support violation is rejected") {
  auto s = paired_schedule(1, 3);  // N0 = 10
  IndexMap m(Box::centered(1, s.N0));
  Eigen::VectorXcd a = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(m.size()));
  a(static_cast<Eigen::Index>(m.index_of(Site({5})))) = 1.0;
  CHECK_THROWS_AS(construct_b(a, s, 1), SupportViolationError);
}

TEST_CASE("construct_b: coset constancy and norm equality on random draws") {
  rng::Stream st(41);
  for (auto [K, Kp] : std::vector<std::pair<Coord, Coord>>{{1, 3}, {1, 5}, {2, 5}}) {
    auto s = paired_schedule(K, Kp);
    for (int t = 0; t < 10; ++t) {
      auto a = supported_draw(st, s, 1);
      auto r = construct_b(a, s, 1);
      CHECK(r.coset_constancy_defect <= 1e-10);
      CHECK(r.norm_defect <= 1e-10);
      CHECK(std::abs((r.a - r.b).norm() / r.a.norm() - r.rel_error) < 1e-12);
    }
  }
}

TEST_CASE("construct_b: rel_error decreases with K/K'") {
  rng::Stream st(43);
  std::vector<double> means;
  for (Coord Kp : std::vector<Coord>{3, 5, 9}) {
    auto s = paired_schedule(1, Kp);
    double sum = 0;
    const int draws = 40;
    for (int t = 0; t < draws; ++t) sum += construct_b(supported_draw(st, s, 1), s, 1).rel_error;
    means.push_back(sum / draws);
  }
  CHECK(means[1] <= means[0]);
  CHECK(means[2] <= means[1]);
}

TEST_CASE("construct_b in two dimensions") {
  rng::Stream st(47);
  auto s = paired_schedule(1, 3);
  auto a = supported_draw(st, s, 2);
  auto r = construct_b(a, s, 2);
  CHECK(r.coset_constancy_defect <= 1e-10);
  CHECK(r.norm_defect <= 1e-10);
  CHECK(r.rel_error < 1.0);
}

TEST_CASE("schedule_parameters: worked example N0=52") {
  double delta = std::pow(2.0, -24);
  auto s = schedule_parameters(50, delta);
  CHECK(s.L == 2);
  CHECK(s.Lp == 1);
  CHECK(s.N0 == 52);  // 2*52+1 = 105 = 15 * 7
  CHECK(s.K == 10);
  CHECK(s.Kp == 17);
  CHECK(s.factorizations_ok());
  CHECK(s.K < s.Kp);
  CHECK(s.Lp < s.L);
  // smallness conditions with the 0.1 defaults are only reported
  bool reported = false;
  for (const auto& v : s.violations())
    if (v.find("reported") != std::string::npos) reported = true;
  CHECK(reported);
}

TEST_CASE("schedule_parameters: L' == L is rejected") {
  CHECK_THROWS_AS(schedule_parameters(50, 0.9), InfeasibleScheduleError);
}

TEST_CASE("schedule_parameters: factorizations hold across targets") {
  for (Coord target : std::vector<Coord>{30, 77, 120, 500}) {
    for (double delta : {std::pow(2.0, -24), 1e-9, 1e-12}) {
      auto s = schedule_parameters(target, delta);
      CHECK(s.N0 >= target);
      CHECK(s.factorizations_ok());
      CHECK(s.Lp < s.L);
      CHECK(s.K < s.Kp);
      CHECK((2 * s.N0 + 1) % ((2 * s.L + 1) * (2 * s.Lp + 1)) == 0);
    }
  }
}

TEST_CASE("schedule: paper-formula magnitudes are carried symbolically") {
  auto s = schedule_parameters(50, std::pow(2.0, -24));
  CHECK(s.delta_formula_log10 < -100.0);   // (log 52)^{-1000}
  CHECK(s.gamma0_formula_log10 < -100.0);  // (log 52^2)^{-2000}
  CHECK(s.gamma0 > 0.0);
}

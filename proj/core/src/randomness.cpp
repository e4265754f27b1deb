#include "alb/randomness.hpp"

#include <atomic>
#include <cmath>
#include <numbers>

#include "alb/parallel.hpp"
#include "alb/rng.hpp"

namespace alb::randomness {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

cplx phase(double arg) { return {std::cos(kTwoPi * arg), std::sin(kTwoPi * arg)}; }
}  // namespace

std::vector<Site> maximizer_integer_parts(const std::vector<std::vector<double>>& thetas,
                                          Coord N0) {
  std::vector<Site> out;
  const double period = static_cast<double>(2 * N0 + 1);
  for (const auto& th : thetas) {
    Site k = Site::zero(static_cast<int>(th.size()));
    for (std::size_t i = 0; i < th.size(); ++i) {
      double y = period * th[i];
      k[static_cast<int>(i)] = static_cast<Coord>(std::ceil(y - 0.5));  // k - y in [-1/2, 1/2)
    }
    out.push_back(k);
  }
  return out;
}

CorrelationSum corr_sum(CorrKind kind, const model::AlloyPotential& p, const DisorderConfig& cfg,
                        const std::vector<std::vector<double>>& thetas, int j, int jp,
                        const Site& kp, const ParameterSchedule& sched) {
  const int d = p.dim();
  if (j < 1 || jp < 1 || j > static_cast<int>(thetas.size()) ||
      jp > static_cast<int>(thetas.size()))
    throw std::invalid_argument("corr_sum: maximizer index out of range");
  if (lattice::sup_norm(kp) > sched.Kp)
    throw std::invalid_argument("corr_sum: k' outside Lambda_{K'}");

  const auto& tj = thetas[static_cast<std::size_t>(j - 1)];
  const auto& tjp = thetas[static_cast<std::size_t>(jp - 1)];
  std::vector<double> delta(static_cast<std::size_t>(d), 0.0);
  if (kind == CorrKind::S) {
    auto kints = maximizer_integer_parts(thetas, sched.N0);
    const Site& kj = kints[static_cast<std::size_t>(j - 1)];
    const Site& kjp = kints[static_cast<std::size_t>(jp - 1)];
    for (int i = 0; i < d; ++i)
      delta[static_cast<std::size_t>(i)] =
          static_cast<double>(kj[i] - kjp[i]) / static_cast<double>(2 * sched.N0 + 1);
  } else {
    for (int i = 0; i < d; ++i)
      delta[static_cast<std::size_t>(i)] = tj[static_cast<std::size_t>(i)] - tjp[static_cast<std::size_t>(i)];
  }

  Site base = Site::zero(d);
  for (int i = 0; i < d; ++i) base[i] = kp[i] * (2 * sched.Lp + 1);

  lattice::IndexMap lmap(Box::centered(d, sched.Lp));
  const double inv_vol = 1.0 / static_cast<double>(lmap.size());

  CorrelationSum out;
  out.kind = kind;
  out.j = j;
  out.jp = jp;
  out.kp = kp;

  cplx acc = 0.0;
  if (kind != CorrKind::I) {
    for (std::size_t li = 0; li < lmap.size(); ++li) {
      Site lp = lmap.site_at(li);
      double arg = 0.0;
      for (int i = 0; i < d; ++i) arg -= delta[static_cast<std::size_t>(i)] * static_cast<double>(lp[i]);
      acc += phase(arg) * model::potential_at(p, cfg, base + lp);
    }
    acc *= inv_vol;
  } else {
    // I(j,j',k') = lambda/(2L'+1)^d  sum_m A_{k'(2L'+1)-m}
    //              sum_{l' in Lambda_{L'}, l'+m != 0} e^{-2 pi i (th_j - th_j').l'} eps_{l'+m}
    p.site_kernel.for_each_nonzero([&](const Site& a_off, double A) {
      // a_off = base - m  =>  m = base - a_off
      Site msite = base - a_off;
      cplx inner = 0.0;
      for (std::size_t li = 0; li < lmap.size(); ++li) {
        Site lp = lmap.site_at(li);
        Site read = lp + msite;
        if (lattice::sup_norm(read) == 0) continue;  // the freed-origin term
        double arg = 0.0;
        for (int i = 0; i < d; ++i) arg -= delta[static_cast<std::size_t>(i)] * static_cast<double>(lp[i]);
        inner += phase(arg) * cfg.value(read);
      }
      acc += A * inner;
    });
    acc *= p.lambda * inv_vol;
  }
  out.value = acc;
  out.modulus = std::abs(acc);
  return out;
}

bool omega_event(const DisorderConfig& cfg, const model::AlloyPotential& p,
                 const model::SymbolProfile& prof, const ParameterSchedule& sched,
                 OmegaVariant variant) {
  if (!(p.lambda > 0)) throw std::invalid_argument("omega_event: requires lambda > 0");
  if (prof.J < 1) throw std::invalid_argument("omega_event: no maximizers");
  const double total = p.lambda * p.kernel_sum;
  const double threshold = variant == OmegaVariant::Initial
                               ? total / (2.0 * prof.J * prof.J)
                               : total / (4.0 * prof.J * prof.J);
  const CorrKind kind = variant == OmegaVariant::Initial ? CorrKind::N : CorrKind::I;
  lattice::IndexMap kmap(Box::centered(p.dim(), sched.Kp));
  for (int j = 1; j <= prof.J; ++j)
    for (int jp = 1; jp <= prof.J; ++jp)
      for (std::size_t ki = 0; ki < kmap.size(); ++ki) {
        CorrelationSum s =
            corr_sum(kind, p, cfg, prof.maximizers, j, jp, kmap.site_at(ki), sched);
        if (s.modulus >= threshold) return true;
      }
  return false;
}

OrliczEstimate estimate_orlicz(const std::vector<double>& samples, double alpha) {
  if (samples.empty()) throw std::invalid_argument("estimate_orlicz: no samples");
  double amax = 0.0;
  for (double s : samples) amax = std::max(amax, std::abs(s));
  if (amax == 0.0) throw AllZeroError();

  auto mean_exceeds_two = [&](double lam) {
    double acc = 0.0;
    const double n = static_cast<double>(samples.size());
    for (double s : samples) {
      double e = std::pow(std::abs(s) / lam, alpha);
      if (e > 700.0) return true;
      acc += std::exp(e);
      if (acc / n > 1e280) return true;
    }
    return acc / n > 2.0;
  };

  double lo = amax, hi = amax;
  while (mean_exceeds_two(hi)) hi *= 2.0;
  while (!mean_exceeds_two(lo)) lo *= 0.5;
  for (int it = 0; it < 200 && (hi - lo) > 1e-8 * hi; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mean_exceeds_two(mid))
      lo = mid;
    else
      hi = mid;
  }
  return OrliczEstimate{alpha, 0.5 * (lo + hi), static_cast<int>(samples.size())};
}

ChernoffCheck chernoff_check(const std::vector<double>& samples, double norm_upper_bound,
                             double alpha, const std::vector<double>& thresholds) {
  if (samples.empty()) throw std::invalid_argument("chernoff_check: no samples");
  if (!(norm_upper_bound > 0)) throw std::invalid_argument("chernoff_check: bound must be positive");
  ChernoffCheck out;
  const double n = static_cast<double>(samples.size());
  for (double t : thresholds) {
    ChernoffCheck::Row row;
    row.threshold = t;
    long c = 0;
    for (double s : samples)
      if (std::abs(s) >= t) ++c;
    row.empirical = static_cast<double>(c) / n;
    row.bound = 2.0 * std::exp(-std::pow(t / norm_upper_bound, alpha));
    row.slack = 4.0 * std::sqrt(std::max(row.empirical * (1.0 - row.empirical), 0.0) / n);
    row.violation = row.empirical > row.bound + row.slack;
    if (row.violation) ++out.violations;
    out.rows.push_back(row);
  }
  return out;
}

DudleyReport dudley_check(const std::vector<std::vector<std::vector<double>>>& families,
                          double alpha) {
  DudleyReport rep;
  for (const auto& fam : families) {
    if (fam.empty()) throw std::invalid_argument("dudley_check: empty family");
    std::size_t nvars = fam.front().size();
    if (nvars < 2) throw std::invalid_argument("dudley_check: family needs >= 2 variables");
    std::vector<double> maxed(fam.size());
    double worst_single = 0.0;
    for (std::size_t i = 0; i < nvars; ++i) {
      std::vector<double> column(fam.size());
      for (std::size_t s = 0; s < fam.size(); ++s) column[s] = fam[s][i];
      worst_single = std::max(worst_single, estimate_orlicz(column, alpha).norm_estimate);
    }
    for (std::size_t s = 0; s < fam.size(); ++s) {
      double m = 0.0;
      for (double v : fam[s]) m = std::max(m, std::abs(v));
      maxed[s] = m;
    }
    DudleyReport::Row row;
    row.family_size = nvars;
    row.max_norm = estimate_orlicz(maxed, alpha).norm_estimate;
    row.individual_norm = worst_single;
    row.ratio = row.max_norm /
                (std::sqrt(std::log(static_cast<double>(nvars))) * worst_single);
    rep.rows.push_back(row);
  }
  return rep;
}

SuborthReport suborthogonality_check(const std::vector<int>& ns, int trials, std::uint64_t seed) {
  SuborthReport rep;
  for (int n : ns) {
    if (n < 1) throw std::invalid_argument("suborthogonality_check: n must be >= 1");
    std::vector<double> sums(static_cast<std::size_t>(trials));
    std::vector<double> singles(static_cast<std::size_t>(trials));
    for (int t = 0; t < trials; ++t) {
      std::uint64_t key = rng::derive(seed, static_cast<std::uint64_t>(t));
      double s = 0.0;
      for (int i = 0; i < n; ++i)
        s += rng::sign(rng::derive(key, static_cast<std::uint64_t>(i)));
      sums[static_cast<std::size_t>(t)] = s;
      singles[static_cast<std::size_t>(t)] =
          rng::sign(rng::derive(key, 0));
    }
    SuborthReport::Row row;
    row.n = n;
    row.sum_norm = estimate_orlicz(sums, 2.0).norm_estimate;
    row.single_norm = estimate_orlicz(singles, 2.0).norm_estimate;
    row.ratio = (row.sum_norm * row.sum_norm) /
                (static_cast<double>(n) * row.single_norm * row.single_norm);
    rep.rows.push_back(row);
  }
  return rep;
}

EventEstimate wilson_interval(long hits, long trials, std::uint64_t seed) {
  EventEstimate e;
  e.hits = hits;
  e.trials = trials;
  e.seed = seed;
  if (trials <= 0) return e;
  const double z = 1.959963984540054;
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(hits) / n;
  e.p_hat = p;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  e.wilson_lo = std::max(0.0, center - half);
  e.wilson_hi = std::min(1.0, center + half);
  return e;
}

EventEstimate estimate_event(const ConfigPredicate& predicate, const ConfigSampler& sampler,
                             long trials, std::uint64_t seed, int threads) {
  if (trials < 1) throw std::invalid_argument("estimate_event: trials must be >= 1");
  std::atomic<long> hits{0};
  parallel_for(
      static_cast<std::size_t>(trials),
      [&](std::size_t t) {
        auto cfg = model::sample_config(rng::derive(seed, t), sampler.window, sampler.fill);
        if (predicate(cfg)) hits.fetch_add(1);
      },
      threads);
  return wilson_interval(hits.load(), trials, seed);
}

ConfigPredicate trim1(ConfigPredicate relaxed_predicate, const Site& center, Coord N) {
  Box window = trim1_window(center, N);
  return [pred = std::move(relaxed_predicate), window](const DisorderConfig& cfg) {
    return pred(cfg.truncated(window, model::Fill::Zero));
  };
}

ConfigPredicate trim2(ConfigPredicate bad_predicate, const Site& site) {
  return [pred = std::move(bad_predicate), site](const DisorderConfig& cfg) {
    return pred(cfg.with_override(site, 1.0)) || pred(cfg.with_override(site, -1.0));
  };
}

}  // namespace alb::randomness

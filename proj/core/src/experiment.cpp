#include "alb/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <set>

#include "alb/floquet.hpp"
#include "alb/green.hpp"
#include "alb/json_io.hpp"
#include "alb/model.hpp"
#include "alb/msa.hpp"
#include "alb/parallel.hpp"
#include "alb/randomness.hpp"
#include "alb/rng.hpp"
#include "alb/uncertainty.hpp"
#include "alb/version.hpp"

namespace alb::cli {

namespace fs = std::filesystem;
using io::format_double;

namespace {

const std::vector<std::string> kCommands = {
    "symbol-analyze", "edge",    "green-scan", "floquet-check", "up-check", "tails-check",
    "omega-mc",       "msa-run", "wegner-mc",  "double-bad-mc", "localize"};

class Params {
 public:
  Params(const json& j, std::initializer_list<const char*> allowed) : j_(j) {
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = j.begin(); it != j.end(); ++it)
      if (!ok.count(it.key())) throw ValidationError("unknown parameter '" + it.key() + "'");
  }

  bool has(const char* key) const { return j_.contains(key); }

  template <class T>
  T get(const char* key, T def) const {
    if (!j_.contains(key)) return def;
    try {
      return j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ValidationError(std::string("parameter '") + key + "' has the wrong type");
    }
  }

  json obj(const char* key) const {
    if (!j_.contains(key)) return json();
    if (!j_.at(key).is_object())
      throw ValidationError(std::string("parameter '") + key + "' must be an object");
    return j_.at(key);
  }

  json raw(const char* key) const { return j_.contains(key) ? j_.at(key) : json(); }

 private:
  const json& j_;
};

model::HoppingKernel kernel_from(const json& spec, int d) {
  json j = spec.is_null() ? json{{"type", "laplacian"}} : spec;
  Params p(j, {"type", "c", "amplitude", "t0", "kappa"});
  std::string type = p.get<std::string>("type", "laplacian");
  model::HoppingKernel k = [&] {
    if (type == "laplacian") return model::laplacian_kernel(d);
    if (type == "exponential") {
      double c = p.get<double>("c", 1.0);
      if (!(c > 0)) throw ValidationError("kernel: c must be positive");
      return model::exponential_kernel(d, c, p.get<double>("amplitude", 1.0),
                                       p.get<double>("t0", 0.0));
    }
    throw ValidationError("kernel type must be 'laplacian' or 'exponential'");
  }();
  double kappa = p.get<double>("kappa", 1.0);
  if (kappa != 1.0) k = model::scaled_kernel(k, kappa);
  return k;
}

void check_kernel_spec(const json& spec) {
  json j = spec.is_null() ? json{{"type", "laplacian"}} : spec;
  Params p(j, {"type", "c", "amplitude", "t0", "kappa"});
  std::string type = p.get<std::string>("type", "laplacian");
  if (type != "laplacian" && type != "exponential")
    throw ValidationError("kernel type must be 'laplacian' or 'exponential'");
  if (type == "exponential" && !(p.get<double>("c", 1.0) > 0))
    throw ValidationError("kernel: c must be positive");
}

double resolve_energy(const json& e, double estar) {
  if (e.is_null()) return estar;
  Params p(e, {"value", "offset"});
  if (p.has("value") && p.has("offset"))
    throw ValidationError("energy: give either 'value' or 'offset', not both");
  if (p.has("value")) return p.get<double>("value", estar);
  return estar - p.get<double>("offset", 0.0);
}

void check_energy_spec(const json& e) {
  if (e.is_null()) return;
  Params p(e, {"value", "offset"});
  if (p.has("value") && p.has("offset"))
    throw ValidationError("energy: give either 'value' or 'offset', not both");
}

green::GoodnessThresholds thresholds_from(const json& t) {
  green::GoodnessThresholds th;
  if (t.is_null()) return th;
  Params p(t, {"gamma", "norm_exponent", "offdiag_start_fraction", "slack"});
  th.gamma = p.get<double>("gamma", th.gamma);
  th.norm_exponent = p.get<double>("norm_exponent", th.norm_exponent);
  th.offdiag_start_fraction = p.get<double>("offdiag_start_fraction", th.offdiag_start_fraction);
  th.slack = p.get<double>("slack", th.slack);
  if (!(th.gamma > 0)) throw ValidationError("thresholds: gamma must be positive");
  if (!(th.norm_exponent > 0 && th.norm_exponent < 1))
    throw ValidationError("thresholds: norm_exponent must lie in (0,1)");
  return th;
}

void require_lambda(double lambda) {
  if (lambda < 0) throw ValidationError("lambda is negative");
}

int default_resolution(int d) { return d == 1 ? 4096 : 128; }

std::string site_csv(const lattice::Site& s) {
  std::string r;
  for (int i = 0; i < s.dim(); ++i) {
    if (i) r += ";";
    r += std::to_string(s[i]);
  }
  return r;
}

struct RunContext {
  const ExperimentSpec& spec;
  bool dry = false;  // validate only: stop after parameter checks
  fs::path dir;
  std::string provenance;
  json record;

  std::string file(const std::string& name) {
    record["outputs"].push_back(name);
    return (dir / name).string();
  }
};

// ---------------------------------------------------------------- commands

void run_symbol_analyze(RunContext& ctx) {
  Params p(ctx.spec.params, {"d", "kernel", "resolution", "refine_tol"});
  int d = p.get<int>("d", 1);
  if (d < 1) throw ValidationError("d must be >= 1");
  check_kernel_spec(p.obj("kernel"));
  int res = p.get<int>("resolution", default_resolution(d));
  if (res < 64) throw ValidationError("resolution must be >= 64");
  if (ctx.dry) return;

  auto k = kernel_from(p.obj("kernel"), d);
  auto prof = model::analyze_symbol(k, res, p.get<double>("refine_tol", 1e-9));
  json out{{"kernel", io::to_json(k)},
           {"profile", io::to_json(prof)},
           {"provenance", ctx.provenance}};
  std::ofstream f(ctx.file("symbol.json"));
  f << out.dump(2) << "\n";
  ctx.record["profile"] = io::to_json(prof);
}

void run_edge(RunContext& ctx) {
  Params p(ctx.spec.params, {"d", "kernel", "lambda", "resolution"});
  int d = p.get<int>("d", 1);
  if (d < 1) throw ValidationError("d must be >= 1");
  double lambda = p.get<double>("lambda", 1.0);
  require_lambda(lambda);
  check_kernel_spec(p.obj("kernel"));
  if (ctx.dry) return;

  auto k = kernel_from(p.obj("kernel"), d);
  auto prof = model::analyze_symbol(k, p.get<int>("resolution", default_resolution(d)), 1e-9);
  auto pot = model::dyadic_potential(d, lambda);
  double estar = model::spectral_edge(pot, prof);
  json out{{"M", prof.M},          {"m", prof.m},
           {"kernel_sum", pot.kernel_sum}, {"lambda", lambda},
           {"E_star", estar},      {"profile", io::to_json(prof)},
           {"provenance", ctx.provenance}};
  std::ofstream f(ctx.file("edge.json"));
  f << out.dump(2) << "\n";
  ctx.record["E_star"] = estar;
}

void run_green_scan(RunContext& ctx) {
  Params p(ctx.spec.params, {"d", "kernel", "lambda", "N", "energy", "thresholds", "seeds",
                             "resolution", "dump_hamiltonian"});
  int d = p.get<int>("d", 1);
  double lambda = p.get<double>("lambda", 1.0);
  require_lambda(lambda);
  lattice::Coord N = p.get<lattice::Coord>("N", 20);
  if (N < 0) throw ValidationError("N must be nonnegative");
  int seeds = p.get<int>("seeds", 1);
  if (seeds < 1) throw ValidationError("seeds must be >= 1");
  auto th = thresholds_from(p.obj("thresholds"));
  check_kernel_spec(p.obj("kernel"));
  check_energy_spec(p.raw("energy"));
  if (ctx.dry) return;

  auto k = kernel_from(p.obj("kernel"), d);
  auto prof = model::analyze_symbol(k, p.get<int>("resolution", default_resolution(d)), 1e-9);
  auto pot = model::dyadic_potential(d, lambda);
  double E = resolve_energy(p.raw("energy"), model::spectral_edge(pot, prof));

  io::CsvWriter csv(ctx.file("green_scan.csv"), "seed,N,E,norm,gamma_hat,good", ctx.provenance);
  lattice::Box box = lattice::Box::centered(d, N);
  lattice::Box window = box.inflated(pot.truncation_radius());
  int good_count = 0;
  for (int s = 0; s < seeds; ++s) {
    auto cfg =
        model::sample_config(rng::derive(ctx.spec.seed, static_cast<std::uint64_t>(s)), window);
    auto H = model::assemble_hamiltonian(box, k, pot, cfg);
    if (p.get<bool>("dump_hamiltonian", false) && s == 0)
      io::write_matrix_csv(ctx.file("hamiltonian_seed0.csv"), H.matrix, ctx.provenance);
    auto rep = green::green_report(H, E, th);
    if (rep.good) ++good_count;
    csv.row({std::to_string(s), io::green_csv_row(rep)});
  }
  ctx.record["good_fraction"] = static_cast<double>(good_count) / seeds;
}

void run_floquet_check(RunContext& ctx) {
  Params p(ctx.spec.params, {"d", "kernel", "lambda", "N", "P", "seeds"});
  int d = p.get<int>("d", 1);
  double lambda = p.get<double>("lambda", 1.0);
  require_lambda(lambda);
  lattice::Coord N = p.get<lattice::Coord>("N", 4);
  int P = p.get<int>("P", 2);
  int seeds = p.get<int>("seeds", 5);
  if (N < 1) throw ValidationError("N must be >= 1");
  if (P < 2) throw ValidationError("P must be >= 2");
  if (seeds < 1) throw ValidationError("seeds must be >= 1");
  check_kernel_spec(p.obj("kernel"));
  if (ctx.dry) return;

  auto k = kernel_from(p.obj("kernel"), d);
  auto pot = model::dyadic_potential(d, lambda);

  io::CsvWriter csv(ctx.file("floquet_check.csv"), "seed,d,N,P,max_gap", ctx.provenance);
  double overall = 0.0;
  for (int s = 0; s < seeds; ++s) {
    auto cfg = model::sample_config(rng::derive(ctx.spec.seed, static_cast<std::uint64_t>(s)),
                                    lattice::Box::centered(d, N + pot.truncation_radius()));
    auto per = floquet::periodize(cfg, pot, N);
    auto grid = floquet::commensurate_grid(N, P, d);
    auto fiber_spec = floquet::floquet_spectrum(k, per, N, grid);
    Eigen::MatrixXd T = floquet::torus_operator(k, per, P);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T, Eigen::EigenvaluesOnly);
    double max_gap = 0.0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
      max_gap = std::max(max_gap,
                         std::abs(es.eigenvalues()(i) - fiber_spec[static_cast<std::size_t>(i)]));
    overall = std::max(overall, max_gap);
    csv.row({std::to_string(s), std::to_string(d), std::to_string(N), std::to_string(P),
             format_double(max_gap)});

    if (s == 0) {
      std::string header;
      for (int i = 0; i < d; ++i) header += "x" + std::to_string(i) + ",";
      header += "index,value";
      io::CsvWriter bands(ctx.file("bands.csv"), header, ctx.provenance);
      for (const auto& x : grid) {
        auto ev = floquet::operator_fiber(k, per, x, N).eigenvalues();
        for (Eigen::Index i = 0; i < ev.size(); ++i) {
          std::vector<std::string> cells;
          for (double xi : x) cells.push_back(format_double(xi));
          cells.push_back(std::to_string(i));
          cells.push_back(format_double(ev(i)));
          bands.row(cells);
        }
      }
    }
  }
  ctx.record["max_gap"] = overall;
}

void run_up_check(RunContext& ctx) {
  Params p(ctx.spec.params, {"pairs", "draws"});
  json pairs = p.has("pairs") ? p.raw("pairs")
                              : json::array({{1, 3}, {1, 5}, {1, 9}, {1, 15}});
  if (!pairs.is_array() || pairs.empty()) throw ValidationError("'pairs' must be a nonempty array");
  for (const auto& pr : pairs) {
    if (!pr.is_array() || pr.size() != 2) throw ValidationError("each pair must be [K, Kp]");
    lattice::Coord K = pr.at(0).get<lattice::Coord>();
    lattice::Coord Kp = pr.at(1).get<lattice::Coord>();
    if (K < 0) throw ValidationError("K must be nonnegative");
    if (!(K < Kp)) throw ValidationError("up-check: K >= K'");
  }
  int draws = p.get<int>("draws", 100);
  if (draws < 1) throw ValidationError("draws must be >= 1");
  if (ctx.dry) return;

  io::CsvWriter csv(ctx.file("up_check.csv"),
                    "K,Kp,ratio,mean_rel_error,std_rel_error,max_coset_defect,max_norm_defect",
                    ctx.provenance);
  for (const auto& pr : pairs) {
    lattice::Coord K = pr.at(0).get<lattice::Coord>();
    lattice::Coord Kp = pr.at(1).get<lattice::Coord>();
    // schedule with L = K' and L' = K: both factorizations agree by design
    uncertainty::ParameterSchedule sched;
    sched.N0 = ((2 * K + 1) * (2 * Kp + 1) - 1) / 2;
    sched.delta = 0.5;
    sched.L = Kp;
    sched.Lp = K;
    sched.K = K;
    sched.Kp = Kp;

    lattice::IndexMap m(lattice::Box::centered(1, sched.N0));
    lattice::IndexMap sup(lattice::Box::centered(1, K));
    double sum = 0, sum2 = 0, max_coset = 0, max_norm = 0;
    for (int t = 0; t < draws; ++t) {
      Eigen::VectorXcd a = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(m.size()));
      std::uint64_t key = rng::derive(ctx.spec.seed, static_cast<std::uint64_t>(t));
      for (std::size_t i = 0; i < sup.size(); ++i) {
        std::uint64_t ki = rng::derive(key, i);
        a(static_cast<Eigen::Index>(m.index_of(sup.site_at(i)))) =
            uncertainty::cplx{rng::gaussian(ki), rng::gaussian(rng::splitmix64(ki))};
      }
      auto r = uncertainty::construct_b(a, sched, 1);
      sum += r.rel_error;
      sum2 += r.rel_error * r.rel_error;
      max_coset = std::max(max_coset, r.coset_constancy_defect);
      max_norm = std::max(max_norm, r.norm_defect);
    }
    double mean = sum / draws;
    double var = std::max(0.0, sum2 / draws - mean * mean);
    csv.row({std::to_string(K), std::to_string(Kp),
             format_double(static_cast<double>(K) / static_cast<double>(Kp)),
             format_double(mean), format_double(std::sqrt(var)), format_double(max_coset),
             format_double(max_norm)});
  }
}

void run_tails_check(RunContext& ctx) {
  Params p(ctx.spec.params, {"samples", "family_sizes", "suborth_ns"});
  int nsamples = p.get<int>("samples", 100000);
  if (nsamples < 100) throw ValidationError("samples must be >= 100");
  std::vector<int> fams = p.get<std::vector<int>>("family_sizes", {4, 16, 64, 256});
  std::vector<int> ns = p.get<std::vector<int>>("suborth_ns", {1, 4, 16, 64});
  for (int f : fams)
    if (f < 2) throw ValidationError("family sizes must be >= 2");
  for (int n : ns)
    if (n < 1) throw ValidationError("suborth ns must be >= 1");
  if (ctx.dry) return;

  json out;
  std::vector<double> rad(static_cast<std::size_t>(nsamples));
  for (int i = 0; i < nsamples; ++i)
    rad[static_cast<std::size_t>(i)] =
        rng::sign(rng::derive(ctx.spec.seed, static_cast<std::uint64_t>(i)));
  const double exact = 1.0 / std::sqrt(std::numbers::ln2);
  std::vector<double> ts = {0.25, 0.5, 0.75, 1.0, 1.5, 2.0};
  auto ok = randomness::chernoff_check(rad, exact, 2.0, ts);
  auto bad = randomness::chernoff_check(rad, exact / 2.0, 2.0, ts);
  out["chernoff"] = {{"violations_valid", ok.violations}, {"violations_halved", bad.violations}};

  std::vector<std::vector<std::vector<double>>> families;
  for (int Nf : fams) {
    std::vector<std::vector<double>> fam(static_cast<std::size_t>(nsamples),
                                         std::vector<double>(static_cast<std::size_t>(Nf)));
    for (int s = 0; s < nsamples; ++s) {
      std::uint64_t key = rng::derive(ctx.spec.seed ^ 0x5afeULL, static_cast<std::uint64_t>(s));
      for (int i = 0; i < Nf; ++i)
        fam[static_cast<std::size_t>(s)][static_cast<std::size_t>(i)] =
            rng::gaussian(rng::derive(key, static_cast<std::uint64_t>(i)));
    }
    families.push_back(std::move(fam));
  }
  auto dud = randomness::dudley_check(families);
  json drows = json::array();
  for (const auto& r : dud.rows)
    drows.push_back({{"N", r.family_size}, {"ratio", r.ratio}, {"max_norm", r.max_norm}});
  out["dudley"] = drows;

  auto sub = randomness::suborthogonality_check(ns, nsamples, ctx.spec.seed ^ 0x50b0ULL);
  json srows = json::array();
  for (const auto& r : sub.rows) srows.push_back({{"n", r.n}, {"ratio", r.ratio}});
  out["suborthogonality"] = srows;

  out["provenance"] = ctx.provenance;
  std::ofstream f(ctx.file("tails.json"));
  f << out.dump(2) << "\n";
  ctx.record["tails"] = {{"chernoff_valid", ok.violations}, {"chernoff_halved", bad.violations}};
}

void run_omega_mc(RunContext& ctx) {
  Params p(ctx.spec.params, {"lambda", "N0", "L", "Lp_list", "trials", "variant", "resolution"});
  double lambda = p.get<double>("lambda", 1.0);
  require_lambda(lambda);
  if (lambda == 0.0) throw ValidationError("omega-mc requires lambda > 0");
  lattice::Coord N0 = p.get<lattice::Coord>("N0", 157);
  lattice::Coord L = p.get<lattice::Coord>("L", 4);
  std::vector<lattice::Coord> lps = p.get<std::vector<lattice::Coord>>("Lp_list", {1, 2, 3});
  long trials = p.get<long>("trials", 10000);
  if (trials < 1) throw ValidationError("trials must be >= 1");
  std::string variant = p.get<std::string>("variant", "initial");
  if (variant != "initial" && variant != "free_site")
    throw ValidationError("variant must be 'initial' or 'free_site'");
  if ((2 * N0 + 1) % (2 * L + 1) != 0)
    throw ValidationError("(2N0+1) not divisible by (2L+1)");
  for (auto lp : lps) {
    if (!(lp < L)) throw ValidationError("L' >= L");
    if ((2 * N0 + 1) % (2 * lp + 1) != 0)
      throw ValidationError("(2N0+1) not divisible by (2L'+1)");
  }
  if (ctx.dry) return;

  auto k = kernel_from(json(), 1);
  auto prof = model::analyze_symbol(k, p.get<int>("resolution", 4096), 1e-9);
  auto pot = model::dyadic_potential(1, lambda);
  auto var = variant == "initial" ? randomness::OmegaVariant::Initial
                                  : randomness::OmegaVariant::FreeSite;

  io::CsvWriter csv(ctx.file("omega_mc.csv"),
                    "event,N,params_hash,hits,trials,p_hat,wilson_lo,wilson_hi,seed",
                    ctx.provenance);
  randomness::ConfigSampler sampler{lattice::Box::centered(1, N0 + pot.truncation_radius()),
                                    model::Fill::PlusOne};
  for (auto lp : lps) {
    uncertainty::ParameterSchedule sched;
    sched.N0 = N0;
    sched.delta = 0.5;
    sched.L = L;
    sched.Lp = lp;
    sched.K = ((2 * N0 + 1) / (2 * L + 1) - 1) / 2;
    sched.Kp = ((2 * N0 + 1) / (2 * lp + 1) - 1) / 2;
    auto est = randomness::estimate_event(
        [&](const model::DisorderConfig& cfg) {
          return randomness::omega_event(cfg, pot, prof, sched, var);
        },
        sampler, trials, ctx.spec.seed, ctx.spec.threads);
    std::string name = "omega_" + variant + "_Lp" + std::to_string(lp);
    csv.row({name, std::to_string(N0), io::hash_hex(io::to_json(sched).dump()),
             std::to_string(est.hits), std::to_string(est.trials), format_double(est.p_hat),
             format_double(est.wilson_lo), format_double(est.wilson_hi),
             std::to_string(est.seed)});
    ctx.record["p_hat_Lp" + std::to_string(lp)] = est.p_hat;
  }
}

void run_wegner_mc(RunContext& ctx) {
  Params p(ctx.spec.params, {"d", "kernel", "lambda", "N1", "energy", "eta", "trials",
                             "resolution", "delta", "N0_target"});
  int d = p.get<int>("d", 1);
  double lambda = p.get<double>("lambda", 1.0);
  require_lambda(lambda);
  lattice::Coord N1 = p.get<lattice::Coord>("N1", 52);
  if (N1 < 1) throw ValidationError("N1 must be >= 1");
  double eta = p.get<double>("eta", 1e-3);
  if (!(eta > 0)) throw ValidationError("eta must be positive");
  long trials = p.get<long>("trials", 200);
  if (trials < 1) throw ValidationError("trials must be >= 1");
  check_kernel_spec(p.obj("kernel"));
  check_energy_spec(p.raw("energy"));
  if (ctx.dry) return;

  auto k = kernel_from(p.obj("kernel"), d);
  auto prof = model::analyze_symbol(k, p.get<int>("resolution", default_resolution(d)), 1e-9);
  auto pot = model::dyadic_potential(d, lambda);
  double E = resolve_energy(p.raw("energy"), model::spectral_edge(pot, prof));
  auto sched = uncertainty::schedule_parameters(p.get<lattice::Coord>("N0_target", 10),
                                                p.get<double>("delta", std::pow(2.0, -24)));
  auto est =
      msa::wegner_estimate(pot, k, sched, N1, E, eta, trials, ctx.spec.seed, ctx.spec.threads);
  io::CsvWriter csv(ctx.file("wegner_mc.csv"),
                    "event,N,params_hash,hits,trials,p_hat,wilson_lo,wilson_hi,seed",
                    ctx.provenance);
  csv.row({"wegner", std::to_string(N1), ctx.spec.content_hash(), std::to_string(est.hits),
           std::to_string(est.trials), format_double(est.p_hat), format_double(est.wilson_lo),
           format_double(est.wilson_hi), std::to_string(est.seed)});
  ctx.record["p_hat"] = est.p_hat;
}

void run_double_bad_mc(RunContext& ctx) {
  Params p(ctx.spec.params, {"d", "kernel", "lambda", "N", "k1", "k2", "delta", "grid_points",
                             "thresholds", "trials", "resolution"});
  int d = p.get<int>("d", 1);
  double lambda = p.get<double>("lambda", 1.0);
  require_lambda(lambda);
  lattice::Coord N = p.get<lattice::Coord>("N", 10);
  if (N < 1) throw ValidationError("N must be >= 1");
  double delta = p.get<double>("delta", 0.5);
  if (!(delta > 0)) throw ValidationError("delta must be positive");
  int points = p.get<int>("grid_points", 11);
  if (points < 2) throw ValidationError("grid_points must be >= 2");
  long trials = p.get<long>("trials", 100);
  if (trials < 1) throw ValidationError("trials must be >= 1");
  auto th = thresholds_from(p.obj("thresholds"));
  check_kernel_spec(p.obj("kernel"));
  json k1j = p.has("k1") ? p.raw("k1") : json::array({0});
  json k2j = p.has("k2") ? p.raw("k2") : json::array({3 * N});
  if (!k1j.is_array() || !k2j.is_array()) throw ValidationError("k1/k2 must be integer arrays");
  lattice::Site k1 = io::site_from_json(k1j);
  lattice::Site k2 = io::site_from_json(k2j);
  if (k1.dim() != d || k2.dim() != d) throw ValidationError("k1/k2 dimension mismatch");
  if (ctx.dry) return;

  auto k = kernel_from(p.obj("kernel"), d);
  auto prof = model::analyze_symbol(k, p.get<int>("resolution", default_resolution(d)), 1e-9);
  auto pot = model::dyadic_potential(d, lambda);
  double estar = model::spectral_edge(pot, prof);
  std::vector<double> grid;
  for (int i = 0; i < points; ++i)
    grid.push_back(estar - delta / 2.0 + (delta / 2.0) * i / (points - 1));

  uncertainty::ParameterSchedule sched;  // provenance only
  sched.N0 = N;
  sched.delta = delta;
  auto est = msa::double_bad_probability(pot, k, sched, N, k1, k2, grid, th, trials,
                                         ctx.spec.seed, ctx.spec.threads);
  io::CsvWriter csv(ctx.file("double_bad_mc.csv"),
                    "event,N,params_hash,hits,trials,p_hat,wilson_lo,wilson_hi,seed",
                    ctx.provenance);
  csv.row({"double_bad", std::to_string(N), ctx.spec.content_hash(), std::to_string(est.hits),
           std::to_string(est.trials), format_double(est.p_hat), format_double(est.wilson_lo),
           format_double(est.wilson_hi), std::to_string(est.seed)});
  ctx.record["p_hat"] = est.p_hat;
}

void run_localize(RunContext& ctx) {
  Params p(ctx.spec.params,
           {"d", "kernel", "lambda", "N", "window_offset", "top_k", "seeds", "resolution"});
  int d = p.get<int>("d", 1);
  double lambda = p.get<double>("lambda", 2.0);
  require_lambda(lambda);
  lattice::Coord N = p.get<lattice::Coord>("N", 300);
  if (N < 1) throw ValidationError("N must be >= 1");
  double off = p.get<double>("window_offset", 1.5);
  int top_k = p.get<int>("top_k", 5);
  if (top_k < 1) throw ValidationError("top_k must be >= 1");
  int seeds = p.get<int>("seeds", 50);
  if (seeds < 1) throw ValidationError("seeds must be >= 1");
  check_kernel_spec(p.obj("kernel"));
  if (ctx.dry) return;

  auto k = kernel_from(p.obj("kernel"), d);
  auto prof = model::analyze_symbol(k, p.get<int>("resolution", default_resolution(d)), 1e-9);
  auto pot = model::dyadic_potential(d, lambda);
  double estar = model::spectral_edge(pot, prof);

  io::CsvWriter csv(ctx.file("localize.csv"),
                    "seed,index,energy,peak,mass_radius,decay_slope,ipr", ctx.provenance);
  lattice::Box box = lattice::Box::centered(d, N);
  lattice::Box window = box.inflated(pot.truncation_radius());
  for (int s = 0; s < seeds; ++s) {
    auto cfg =
        model::sample_config(rng::derive(ctx.spec.seed, static_cast<std::uint64_t>(s)), window);
    auto H = model::assemble_hamiltonian(box, k, pot, cfg);
    auto rep = msa::localization_report(H, estar - off, estar + 1.0, top_k);
    for (const auto& pr : rep.pairs)
      csv.row({std::to_string(s), std::to_string(pr.index_from_top), format_double(pr.energy),
               site_csv(pr.peak), std::to_string(pr.mass_radius), format_double(pr.decay_slope),
               format_double(pr.ipr)});
  }
}

void run_msa_run(RunContext& ctx) {
  Params p(ctx.spec.params, {"lambda", "delta", "N0_target", "depth", "energy", "thresholds",
                             "eta", "wegner_trials", "resolution", "influence_box_radius"});
  double lambda = p.get<double>("lambda", 3.0);
  require_lambda(lambda);
  double delta = p.get<double>("delta", std::pow(2.0, -24));
  if (!(delta > 0 && delta < 1)) throw ValidationError("delta must lie in (0,1)");
  int depth = p.get<int>("depth", 2);
  if (depth < 2) throw ValidationError("depth must be >= 2");
  double eta = p.get<double>("eta", 1e-3);
  if (!(eta > 0)) throw ValidationError("eta must be positive");
  auto th = thresholds_from(p.obj("thresholds"));
  check_energy_spec(p.raw("energy"));
  uncertainty::ParameterSchedule sched;
  try {
    sched = uncertainty::schedule_parameters(p.get<lattice::Coord>("N0_target", 50), delta);
  } catch (const uncertainty::InfeasibleScheduleError& e) {
    throw ValidationError(e.what());
  }
  if (ctx.dry) return;

  auto scales = msa::scale_schedule(sched, depth);
  auto k = kernel_from(json(), 1);
  auto prof = model::analyze_symbol(k, p.get<int>("resolution", 4096), 1e-9);
  auto pot = model::dyadic_potential(1, lambda);
  double E = resolve_energy(p.raw("energy"), model::spectral_edge(pot, prof));

  json rec;
  rec["schedule"] = io::to_json(sched);
  rec["scales"] = scales.scales;
  rec["E"] = E;

  const lattice::Coord N = scales.scales[0];
  const lattice::Coord N1 = scales.scales[1];
  auto region = lattice::Box::centered(1, N1);
  auto cfg = model::sample_config(ctx.spec.seed, region.inflated(pot.truncation_radius()));
  auto cls = green::classify_blocks(region, N, k, pot, cfg, E, th);
  json blocks = json::array();
  double min_gamma = std::numeric_limits<double>::infinity();
  for (const auto& [box, brep] : cls.blocks) {
    blocks.push_back({{"center", io::to_json(box.center)},
                      {"good", brep.good},
                      {"gamma_hat", brep.gamma_hat},
                      {"norm", std::isfinite(brep.operator_norm) ? json(brep.operator_norm)
                                                                 : json("inf")}});
    if (brep.good) min_gamma = std::min(min_gamma, brep.gamma_hat);
  }
  rec["classification"] = {
      {"scale", N},
      {"blocks", blocks},
      {"bad_count", cls.bad_centers.size()},
      {"min_gamma_good", std::isfinite(min_gamma) ? json(min_gamma) : json(0)}};

  {
    auto labels = cls.cover.labels();
    auto centers = cls.cover.centers();
    std::set<lattice::Site> qualifying;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      lattice::Site c = centers[i] + region.center;
      bool bad = false;
      for (const auto& b : cls.bad_centers)
        if (b == c) bad = true;
      if (!bad) qualifying.insert(labels[i]);
    }
    lattice::Site r0 = labels.front();
    if (!cls.bad_centers.empty()) {
      for (std::size_t i = 0; i < labels.size(); ++i)
        if (centers[i] + region.center == cls.bad_centers.front()) r0 = labels[i];
    }
    auto sel = msa::select_free_sites(cls.cover, qualifying, r0);
    rec["free_sites"] = {{"r0", io::to_json(r0)},
                         {"selected", sel.selected_labels.size()},
                         {"blocks_without_label", sel.blocks_without_label.size()},
                         {"min_site_distance", sel.min_site_distance}};
  }

  auto wegner = msa::wegner_estimate(pot, k, sched, N1, E, eta,
                                     p.get<long>("wegner_trials", 100), ctx.spec.seed,
                                     ctx.spec.threads);
  rec["wegner"] = io::to_json(wegner);

  {
    lattice::Coord R = p.get<lattice::Coord>("influence_box_radius", 20);
    lattice::Box box = lattice::Box::centered(1, R);
    auto icfg_cfg = model::sample_config(ctx.spec.seed ^ 0xfeedULL,
                                         box.inflated(pot.truncation_radius()));
    json table = json::array();
    for (int l = 1; l <= 3; ++l) {
      lattice::Site site = lattice::Site::zero(1);
      site[0] = 5 * l * (R / 4) / 4;
      if (!box.contains(site)) break;
      msa::InfluenceConfig icfg;
      icfg.l_index = l;
      icfg.gamma_n = std::isfinite(min_gamma) ? min_gamma : th.gamma;
      try {
        auto irep = msa::influence(box, k, pot, icfg_cfg, site, 0, icfg);
        table.push_back(io::to_json(irep));
      } catch (const msa::CrossingDetectedError&) {
        table.push_back({{"l_index", l}, {"crossing_detected", true}});
      }
    }
    rec["influence"] = table;
  }

  rec["provenance"] = ctx.provenance;
  std::ofstream f(ctx.file("msa_run.json"));
  f << rec.dump(2) << "\n";
  ctx.record["scales"] = scales.scales;
}

using Runner = void (*)(RunContext&);

Runner runner_for(const std::string& cmd) {
  if (cmd == "symbol-analyze") return run_symbol_analyze;
  if (cmd == "edge") return run_edge;
  if (cmd == "green-scan") return run_green_scan;
  if (cmd == "floquet-check") return run_floquet_check;
  if (cmd == "up-check") return run_up_check;
  if (cmd == "tails-check") return run_tails_check;
  if (cmd == "omega-mc") return run_omega_mc;
  if (cmd == "msa-run") return run_msa_run;
  if (cmd == "wegner-mc") return run_wegner_mc;
  if (cmd == "double-bad-mc") return run_double_bad_mc;
  if (cmd == "localize") return run_localize;
  return nullptr;
}

fs::path resolve_out_dir(const ExperimentSpec& spec) {
  std::string dir = spec.output_dir;
  if (dir.empty()) {
    const char* env = std::getenv("ALB_OUTPUT_DIR");
    dir = env ? env : "alb_out";
  }
  fs::path p(dir);
  fs::create_directories(p);
  return p;
}

}  // namespace

const std::vector<std::string>& known_commands() { return kCommands; }

json ExperimentSpec::resolved() const {
  return json{{"command", command},
              {"params", params},
              {"seed", seed},
              {"output_dir", output_dir},
              {"threads", threads}};
}

std::string ExperimentSpec::content_hash() const { return io::hash_hex(resolved().dump()); }

ExperimentSpec parse_spec(const json& j) {
  if (!j.is_object()) throw ValidationError("spec must be a JSON object");
  static const std::set<std::string> allowed = {"command", "params", "seed", "output_dir",
                                                "threads"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw ValidationError("unknown key '" + it.key() + "'");
  ExperimentSpec s;
  if (!j.contains("command") || !j.at("command").is_string())
    throw ValidationError("missing string field 'command'");
  s.command = j.at("command").get<std::string>();
  if (std::find(kCommands.begin(), kCommands.end(), s.command) == kCommands.end())
    throw ValidationError("unknown command '" + s.command + "'");
  if (j.contains("params")) {
    if (!j.at("params").is_object()) throw ValidationError("'params' must be an object");
    s.params = j.at("params");
  }
  if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("output_dir")) s.output_dir = j.at("output_dir").get<std::string>();
  if (j.contains("threads")) s.threads = j.at("threads").get<int>();
  if (s.threads < 0) throw ValidationError("'threads' must be >= 0");
  if (s.threads == 0) s.threads = default_threads();
  return s;
}

ExperimentSpec load_spec(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ValidationError("cannot open spec file '" + path + "'");
  json j;
  try {
    j = json::parse(f);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("parse error: ") + e.what());
  }
  return parse_spec(j);
}

std::vector<std::string> validate(const ExperimentSpec& spec) {
  std::vector<std::string> diags;
  Runner r = runner_for(spec.command);
  if (!r) {
    diags.push_back("unknown command '" + spec.command + "'");
    return diags;
  }
  RunContext ctx{spec, /*dry=*/true, fs::path(), "", json::object()};
  try {
    r(ctx);
  } catch (const ValidationError& e) {
    diags.push_back(e.what());
  } catch (const std::exception& e) {
    diags.push_back(e.what());
  }
  return diags;
}

int run(const ExperimentSpec& spec, std::ostream& log) {
  Runner r = runner_for(spec.command);
  if (!r) {
    log << "error: unknown command '" << spec.command << "'\n";
    return 2;
  }
  {
    auto diags = validate(spec);
    if (!diags.empty()) {
      for (const auto& d : diags) log << "validation error: " << d << "\n";
      return 2;
    }
  }
  RunContext ctx{spec, /*dry=*/false, resolve_out_dir(spec), "", json::object()};
  ctx.provenance = "alb " + std::string(kVersion) + " spec=" + spec.content_hash() +
                   " cmd=" + spec.command + " seed=" + std::to_string(spec.seed);
  ctx.record = json{{"spec", spec.resolved()},
                    {"spec_hash", spec.content_hash()},
                    {"version", kVersion},
                    {"outputs", json::array()}};
  try {
    r(ctx);
  } catch (const ValidationError& e) {
    log << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    log << "numerical failure: " << e.what() << "\n";
    return 3;
  }
  std::ofstream rec((ctx.dir / "run_record.json").string());
  rec << ctx.record.dump(2) << "\n";
  log << "ok: wrote " << ctx.record["outputs"].size() << " artifact(s) to " << ctx.dir.string()
      << "\n";
  return 0;
}

int run_file(const std::string& path, std::ostream& log) {
  try {
    ExperimentSpec spec = load_spec(path);
    return run(spec, log);
  } catch (const ValidationError& e) {
    log << "validation error: " << e.what() << "\n";
    return 2;
  }
}

int validate_file(const std::string& path, std::ostream& log) {
  try {
    ExperimentSpec spec = load_spec(path);
    auto diags = validate(spec);
    if (diags.empty()) {
      log << "ok\n";
      return 0;
    }
    for (const auto& d : diags) log << "violation: " << d << "\n";
    return 2;
  } catch (const ValidationError& e) {
    log << "violation: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace alb::cli

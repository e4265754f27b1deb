#pragma once

#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

#include "alb/model.hpp"
#include "alb/uncertainty.hpp"

// Correlation sums S/N/I over disorder, Orlicz-norm estimation with the
// Chernoff / Dudley / sub-orthogonality property checks, Monte Carlo event
// probability estimation, and the Trim1/Trim2 event surgeries.
namespace alb::randomness {

using lattice::Box;
using lattice::Coord;
using lattice::Site;
using model::DisorderConfig;
using uncertainty::ParameterSchedule;
using cplx = std::complex<double>;

enum class CorrKind { S, N, I };

struct CorrelationSum {
  CorrKind kind;
  int j = 1, jp = 1;
  Site kp;
  cplx value = 0.0;
  double modulus = 0.0;
};

// k_j = integer part of (2N0+1) theta_j, i.e. k_j - (2N0+1) theta_j in [-1/2, 1/2).
std::vector<Site> maximizer_integer_parts(const std::vector<std::vector<double>>& thetas,
                                          Coord N0);

CorrelationSum corr_sum(CorrKind kind, const model::AlloyPotential& p, const DisorderConfig& cfg,
                        const std::vector<std::vector<double>>& thetas, int j, int jp,
                        const Site& kp, const ParameterSchedule& sched);

enum class OmegaVariant { Initial, FreeSite };

// sup over (j, j', k' in Lambda_{K'}) of |N| (resp. |I|) against the
// threshold lambda sum A / (2 J^2) (resp. / (4 J^2)).
bool omega_event(const DisorderConfig& cfg, const model::AlloyPotential& p,
                 const model::SymbolProfile& prof, const ParameterSchedule& sched,
                 OmegaVariant variant);

struct AllZeroError : std::runtime_error {
  AllZeroError() : std::runtime_error("estimate_orlicz: all samples are zero") {}
};

struct OrliczEstimate {
  double alpha = 2.0;
  double norm_estimate = 0.0;
  int sample_count = 0;
};

// The scale lam solving mean(exp((|f|/lam)^alpha)) = 2, by bisection.
OrliczEstimate estimate_orlicz(const std::vector<double>& samples, double alpha);

struct ChernoffCheck {
  struct Row {
    double threshold = 0.0;
    double empirical = 0.0;
    double bound = 0.0;   // 2 e^{-(t/B)^alpha}
    double slack = 0.0;   // 4 sqrt(p(1-p)/n)
    bool violation = false;
  };
  std::vector<Row> rows;
  int violations = 0;
};

ChernoffCheck chernoff_check(const std::vector<double>& samples, double norm_upper_bound,
                             double alpha, const std::vector<double>& thresholds);

struct DudleyReport {
  struct Row {
    std::size_t family_size = 0;
    double max_norm = 0.0;
    double individual_norm = 0.0;
    double ratio = 0.0;  // ||max|X_i||| / (sqrt(log N) max_i ||X_i||)
  };
  std::vector<Row> rows;
};

// families[f][sample][i]; every family needs >= 2 variables.
DudleyReport dudley_check(const std::vector<std::vector<std::vector<double>>>& families,
                          double alpha = 2.0);

struct SuborthReport {
  struct Row {
    int n = 0;
    double sum_norm = 0.0;
    double single_norm = 0.0;
    double ratio = 0.0;  // ||sum eps||^2 / (n ||eps_1||^2)
  };
  std::vector<Row> rows;
};

SuborthReport suborthogonality_check(const std::vector<int>& ns, int trials, std::uint64_t seed);

struct EventEstimate {
  long hits = 0;
  long trials = 0;
  double p_hat = 0.0;
  double wilson_lo = 0.0;
  double wilson_hi = 0.0;
  std::uint64_t seed = 0;
};

EventEstimate wilson_interval(long hits, long trials, std::uint64_t seed);

struct ConfigSampler {
  Box window;
  model::Fill fill = model::Fill::PlusOne;
};

using ConfigPredicate = std::function<bool(const DisorderConfig&)>;

// Deterministic given seed: trial t uses the derived seed (seed, t).
EventEstimate estimate_event(const ConfigPredicate& predicate, const ConfigSampler& sampler,
                             long trials, std::uint64_t seed, int threads = 1);

// Trim1: evaluate on the configuration truncated to Lambda_{ceil(11N/10)}(center)
// with zero extension outside. The caller passes the slack-relaxed predicate.
ConfigPredicate trim1(ConfigPredicate relaxed_predicate, const Site& center, Coord N);

inline Box trim1_window(const Site& center, Coord N) {
  return Box(center, (11 * N + 9) / 10);
}

// Trim2: bad'(eps without site) = bad(site=+1) or bad(site=-1); the result
// never reads the freed site.
ConfigPredicate trim2(ConfigPredicate bad_predicate, const Site& site);

}  // namespace alb::randomness

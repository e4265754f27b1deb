#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "alb/lattice.hpp"

// The operator model: hopping kernel T with its symbol and assumption
// certificates, the alloy potential D(eps), the spectral edge E*, disorder
// configurations (with continuous free-site overrides) and box Hamiltonians.
namespace alb::model {

using lattice::Box;
using lattice::Coord;
using lattice::IndexMap;
using lattice::Site;

// Dense table of real amplitudes over offsets |m| <= radius.
class KernelTable {
 public:
  KernelTable(int d, Coord radius)
      : map_(Box::centered(d, radius)), values_(map_.size(), 0.0) {}

  int dim() const { return map_.box().dim(); }
  Coord radius() const { return map_.box().radius; }

  double at(const Site& offset) const {
    if (lattice::sup_norm(offset) > radius()) return 0.0;
    return values_[map_.index_of(offset)];
  }
  void set(const Site& offset, double a) { values_[map_.index_of(offset)] = a; }

  template <class F>
  void for_each_nonzero(F&& f) const {
    for (std::size_t i = 0; i < values_.size(); ++i)
      if (values_[i] != 0.0) f(map_.site_at(i), values_[i]);
  }

  double sum() const {
    double s = 0;
    for (double v : values_) s += v;
    return s;
  }
  double min_value() const {
    double m = values_.empty() ? 0.0 : values_[0];
    for (double v : values_) m = std::min(m, v);
    return m;
  }

 private:
  IndexMap map_;
  std::vector<double> values_;
};

// Hopping operator T(n - n'), even (T(-n) = T(n)) so H stays real symmetric.
// decay_rate is the certified rate c of the exponential envelope; the
// certificate is checked one shell off the origin, |T(n)| <= e^{-c(|n|-1)}.
struct HoppingKernel {
  KernelTable entries;
  double decay_rate = 0.0;
  double truncation_tol = 1e-12;
  std::string id;

  int dim() const { return entries.dim(); }
  Coord truncation_radius() const { return entries.radius(); }
  double at(const Site& n) const { return entries.at(n); }

  bool is_even() const;
  bool satisfies_decay() const;  // the (A2)-style envelope at rate decay_rate
};

HoppingKernel laplacian_kernel(int d);
// T(n) = amplitude * e^{-c |n|} for 0 < |n| <= R_T, T(0) = t0.
HoppingKernel exponential_kernel(int d, double c, double amplitude = 1.0, double t0 = 0.0,
                                 double tol = 1e-12);
HoppingKernel scaled_kernel(const HoppingKernel& k, double kappa);

// T^(x) = sum_n T(n) e^{2 pi i n.x}; real by evenness. x in torus coords.
double symbol_eval(const HoppingKernel& k, const std::vector<double>& x);

// Non-degeneracy profile of the symbol: max M, min m, maximizers theta_j and
// the quadratic constant Theta with M - T^(x) >= Theta min_j |x-theta_j|^2.
struct SymbolProfile {
  double M = 0.0;
  double m = 0.0;
  std::vector<std::vector<double>> maximizers;  // theta_j in [-1/2,1/2)^d
  int J = 0;
  double Theta = 0.0;
  int grid_resolution = 0;
  bool a3_ok = false;        // false: degenerate-flat symbol, Theta estimate <= 0
  bool theta_stable = true;  // false: halving the grid moved Theta by > 5%
  std::string id;
};

SymbolProfile analyze_symbol(const HoppingKernel& k, int grid_resolution, double refine_tol);

double torus_dist2(const std::vector<double>& x, const std::vector<double>& y);

// Alloy profile A_m >= 0, A_0 > 0; default is the dyadic kernel 2^{-|m|}.
struct AlloyPotential {
  double lambda = 1.0;
  KernelTable site_kernel;
  double kernel_sum = 0.0;  // truncated sum of A_m
  std::string id;

  int dim() const { return site_kernel.dim(); }
  Coord truncation_radius() const { return site_kernel.radius(); }
};

AlloyPotential dyadic_potential(int d, double lambda, double tol = 1e-12);
AlloyPotential make_potential(double lambda, KernelTable A, std::string id = "custom");

enum class Fill { PlusOne, MinusOne, Zero };

// Bernoulli signs on a finite window plus continuous overrides in [-1,1]
// (the free-site extension). Values outside the window follow the fill
// policy. A site's sign depends only on (seed, site), never on the window.
class DisorderConfig {
 public:
  DisorderConfig(Box window, std::vector<std::int8_t> values, Fill fill, std::uint64_t seed)
      : window_(window), map_(window), values_(std::move(values)), fill_(fill), seed_(seed) {
    if (values_.size() != map_.size())
      throw std::invalid_argument("DisorderConfig: value count does not match window");
  }

  const Box& window() const { return window_; }
  Fill fill() const { return fill_; }
  std::uint64_t seed() const { return seed_; }
  const std::map<Site, double>& overrides() const { return overrides_; }

  double value(const Site& n) const {
    auto it = overrides_.find(n);
    if (it != overrides_.end()) return it->second;
    if (window_.contains(n)) return static_cast<double>(values_[map_.index_of(n)]);
    switch (fill_) {
      case Fill::PlusOne: return 1.0;
      case Fill::MinusOne: return -1.0;
      case Fill::Zero: return 0.0;
    }
    return 0.0;
  }

  DisorderConfig with_override(const Site& n, double t) const;
  DisorderConfig with_sign(const Site& n, int s) const;
  // Restriction to a window with a new fill outside; overrides inside kept.
  DisorderConfig truncated(const Box& new_window, Fill fill = Fill::Zero) const;

 private:
  Box window_;
  IndexMap map_;
  std::vector<std::int8_t> values_;
  Fill fill_;
  std::uint64_t seed_;
  std::map<Site, double> overrides_;
};

DisorderConfig sample_config(std::uint64_t seed, const Box& window, Fill fill = Fill::PlusOne);
DisorderConfig constant_config(const Box& window, int sign, Fill fill = Fill::PlusOne);

// D(eps)_n = lambda sum_k A_k eps_{n-k}, truncated at the profile radius.
double potential_at(const AlloyPotential& p, const DisorderConfig& cfg, const Site& n);

// E* = M + lambda sum_m A_m (truncated sum).
double spectral_edge(const AlloyPotential& p, const SymbolProfile& prof);

struct BoxHamiltonian {
  Box box;
  Eigen::MatrixXd matrix;
  std::string kernel_id;
  std::string potential_id;
  std::uint64_t config_seed = 0;

  std::size_t order() const { return static_cast<std::size_t>(matrix.rows()); }
};

// Hopping part alone (T(0) on the diagonal).
Eigen::MatrixXd assemble_hopping(const Box& box, const HoppingKernel& k);
Eigen::VectorXd potential_diagonal(const Box& box, const AlloyPotential& p,
                                   const DisorderConfig& cfg);
BoxHamiltonian assemble_hamiltonian(const Box& box, const HoppingKernel& k,
                                    const AlloyPotential& p, const DisorderConfig& cfg);

}  // namespace alb::model

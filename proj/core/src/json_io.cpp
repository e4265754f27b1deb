#include "alb/json_io.hpp"

#include <cstdio>

namespace alb::io {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_hex(const std::string& s) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(s)));
  return buf;
}

json to_json(const lattice::Site& s) {
  json a = json::array();
  for (int i = 0; i < s.dim(); ++i) a.push_back(s[i]);
  return a;
}

lattice::Site site_from_json(const json& j) {
  std::vector<lattice::Coord> c;
  for (const auto& v : j) c.push_back(v.get<lattice::Coord>());
  return lattice::Site(std::move(c));
}

json to_json(const lattice::Box& b) {
  return json{{"center", to_json(b.center)}, {"radius", b.radius}, {"dim", b.dim()}};
}

json to_json(const model::HoppingKernel& k) {
  json entries = json::array();
  k.entries.for_each_nonzero([&](const lattice::Site& n, double v) {
    entries.push_back(json{{"n", to_json(n)}, {"t", v}});
  });
  return json{{"id", k.id},
              {"dim", k.dim()},
              {"decay_rate", k.decay_rate},
              {"truncation_tol", k.truncation_tol},
              {"truncation_radius", k.truncation_radius()},
              {"entries", entries}};
}

json to_json(const model::SymbolProfile& p) {
  json maxima = json::array();
  for (const auto& th : p.maximizers) maxima.push_back(th);
  return json{{"id", p.id},          {"M", p.M},
              {"m", p.m},            {"maximizers", maxima},
              {"J", p.J},            {"Theta", p.Theta},
              {"grid_resolution", p.grid_resolution},
              {"a3_ok", p.a3_ok},    {"theta_stable", p.theta_stable}};
}

json to_json(const model::AlloyPotential& p) {
  return json{{"id", p.id},
              {"lambda", p.lambda},
              {"kernel_sum", p.kernel_sum},
              {"truncation_radius", p.truncation_radius()},
              {"dim", p.dim()}};
}

json to_json(const green::GreenReport& r) {
  return json{{"energy", r.energy},
              {"box", to_json(r.box)},
              {"operator_norm", std::isfinite(r.operator_norm) ? json(r.operator_norm) : json("inf")},
              {"gamma_hat", r.gamma_hat},
              {"norm_ok", r.norm_ok},
              {"decay_ok", r.decay_ok},
              {"good", r.good},
              {"residual", std::isfinite(r.residual) ? json(r.residual) : json("inf")},
              {"noise_floor", r.noise_floor},
              {"decay_pairs", r.decay_pairs},
              {"worst_margin", r.worst_margin}};
}

json to_json(const uncertainty::ParameterSchedule& s) {
  return json{{"N0", s.N0},
              {"delta", s.delta},
              {"L", s.L},
              {"Lp", s.Lp},
              {"K", s.K},
              {"Kp", s.Kp},
              {"gamma0", s.gamma0},
              {"delta_formula_log10", s.delta_formula_log10},
              {"gamma0_formula_log10", s.gamma0_formula_log10}};
}

json to_json(const randomness::EventEstimate& e) {
  return json{{"hits", e.hits},       {"trials", e.trials},       {"p_hat", e.p_hat},
              {"wilson_lo", e.wilson_lo}, {"wilson_hi", e.wilson_hi}, {"seed", e.seed}};
}

json to_json(const msa::InfluenceReport& r) {
  return json{{"l_index", r.l_index},
              {"value_endpoint", r.value_endpoint},
              {"value_quadrature", r.value_quadrature},
              {"agreement", r.agreement},
              {"min_track_overlap", r.min_track_overlap},
              {"log_lower", r.log_lower},
              {"log_upper", r.log_upper}};
}

std::string green_csv_row(const green::GreenReport& r) {
  return std::to_string(r.box.radius) + "," + format_double(r.energy) + "," +
         format_double(r.operator_norm) + "," + format_double(r.gamma_hat) + "," +
         (r.good ? "1" : "0");
}

CsvWriter::CsvWriter(const std::string& path, const std::string& header,
                     const std::string& provenance) {
  out_.open(path);
  if (!out_) throw std::runtime_error("CsvWriter: cannot open " + path);
  out_ << "# " << provenance << "\n" << header << "\n";
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ",";
    out_ << cells[i];
  }
  out_ << "\n";
}

void CsvWriter::close() { out_.close(); }

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m,
                      const std::string& provenance) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_matrix_csv: cannot open " + path);
  out << "# " << provenance << "\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ",";
      out << format_double(m(i, j));
    }
    out << "\n";
  }
}

}  // namespace alb::io

#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "alb/green.hpp"
#include "alb/model.hpp"
#include "alb/msa.hpp"
#include "alb/randomness.hpp"
#include "alb/uncertainty.hpp"

// JSON and CSV serialization. All numeric formatting goes through
// format_double so identical inputs produce byte-identical files.
namespace alb::io {

using nlohmann::json;

std::string format_double(double v);
std::uint64_t fnv1a(const std::string& s);
std::string hash_hex(const std::string& s);

json to_json(const lattice::Site& s);
lattice::Site site_from_json(const json& j);
json to_json(const lattice::Box& b);

json to_json(const model::HoppingKernel& k);
json to_json(const model::SymbolProfile& p);
json to_json(const model::AlloyPotential& p);
json to_json(const green::GreenReport& r);
json to_json(const uncertainty::ParameterSchedule& s);
json to_json(const randomness::EventEstimate& e);
json to_json(const msa::InfluenceReport& r);

// One flat CSV row (N, E, norm, gamma_hat, good) per report.
std::string green_csv_row(const green::GreenReport& r);

// CSV file with a provenance comment line and a fixed header.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::string& header, const std::string& provenance);
  void row(const std::vector<std::string>& cells);
  void close();

 private:
  std::ofstream out_;
};

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m,
                      const std::string& provenance);

}  // namespace alb::io

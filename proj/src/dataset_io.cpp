#include "antrace/dataset_io.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace antrace {

namespace {

std::string sidecar_path(const std::string& path) { return path + ".json"; }

[[noreturn]] void fail(const std::string& path, Eigen::Index line,
                       const std::string& what) {
  std::ostringstream os;
  os << path << ":" << line << ": " << what;
  throw std::runtime_error(os.str());
}

}  // namespace

TraceDataset load_dataset(const std::string& path, bool standardize,
                          bool standardize_response, IngestInfo* info) {
  nlohmann::json header;
  {
    std::ifstream meta(sidecar_path(path));
    if (!meta) {
      throw std::runtime_error("missing sidecar header: " + sidecar_path(path));
    }
    meta >> header;
  }
  const auto p1 = header.at("p1").get<Eigen::Index>();
  const auto p2 = header.at("p2").get<Eigen::Index>();
  const auto n = header.at("n").get<Eigen::Index>();
  if (p1 < 1 || p2 < 1 || n < 1) {
    throw std::runtime_error("sidecar header has nonpositive dimensions");
  }
  const Eigen::Index fields = p1 * p2 + 1;

  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open dataset: " + path);
  }
  Eigen::MatrixXd design(n, p1 * p2);
  Eigen::VectorXd responses(n);
  std::string line;
  Eigen::Index row = 0;
  Eigen::Index line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (row >= n) fail(path, line_no, "more rows than the header's n");
    std::stringstream ss(line);
    std::string cell;
    Eigen::Index col = 0;
    while (std::getline(ss, cell, ',')) {
      if (col >= fields) fail(path, line_no, "too many fields");
      double value = 0.0;
      try {
        std::size_t used = 0;
        value = std::stod(cell, &used);
        while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        fail(path, line_no, "unparsable numeric field '" + cell + "'");
      }
      if (!std::isfinite(value)) fail(path, line_no, "non-finite value");
      if (col < p1 * p2) {
        design(row, col) = value;
      } else {
        responses(row) = value;
      }
      ++col;
    }
    if (col != fields) fail(path, line_no, "expected p1*p2+1 fields");
    ++row;
  }
  if (row != n) {
    fail(path, line_no, "fewer rows than the header's n");
  }

  IngestInfo local;
  local.standardized = standardize;
  local.response_standardized = standardize_response;
  if (standardize) {
    for (Eigen::Index c = 0; c < design.cols(); ++c) {
      const double mean = design.col(c).mean();
      design.col(c).array() -= mean;
      const double sd =
          n > 1 ? std::sqrt(design.col(c).squaredNorm() / static_cast<double>(n - 1))
                : 0.0;
      if (sd > 0.0) {
        design.col(c) /= sd;
      } else {
        local.constant_columns.push_back(c);  // centered only
      }
    }
  }
  if (standardize_response) {
    const double mean = responses.mean();
    responses.array() -= mean;
    const double sd =
        n > 1 ? std::sqrt(responses.squaredNorm() / static_cast<double>(n - 1)) : 0.0;
    if (sd > 0.0) responses /= sd;
  }
  if (info != nullptr) *info = local;
  return dataset_from_design(design, std::move(responses), p1, p2);
}

void save_dataset(const TraceDataset& data, const std::string& path) {
  {
    nlohmann::ordered_json header;
    header["p1"] = data.p1;
    header["p2"] = data.p2;
    header["n"] = data.n;
    std::ofstream meta(sidecar_path(path));
    if (!meta) throw std::runtime_error("cannot write " + sidecar_path(path));
    meta << header.dump(2) << '\n';
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.precision(17);
  for (Eigen::Index i = 0; i < data.n; ++i) {
    for (Eigen::Index c = 0; c < data.design.cols(); ++c) {
      out << data.design(i, c) << ',';
    }
    out << data.responses(i) << '\n';
  }
}

}  // namespace antrace

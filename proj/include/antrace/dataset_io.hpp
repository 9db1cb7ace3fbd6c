#ifndef ANTRACE_DATASET_IO_HPP
#define ANTRACE_DATASET_IO_HPP

#include <string>
#include <vector>

#include "antrace/dataset.hpp"

namespace antrace {

struct IngestInfo {
  std::vector<Eigen::Index> constant_columns;  // centered but not scaled
  bool standardized = false;
  bool response_standardized = false;
};

/// Reads a dataset from a flat CSV (each row: p1*p2 predictor values in
/// column-major vec order, then the response) with a JSON sidecar header at
/// `path + ".json"` holding {"p1":..,"p2":..,"n":..}.
///
/// With standardize, every design column is centered by its mean and
/// divided by its sample standard deviation; zero-variance columns are
/// centered only and flagged. The response is left on its original scale
/// unless standardize_response is set.
///
/// Malformed rows raise with the offending line number; non-finite values
/// raise.
TraceDataset load_dataset(const std::string& path, bool standardize = false,
                          bool standardize_response = false,
                          IngestInfo* info = nullptr);

/// Writes the CSV + sidecar pair read back by load_dataset.
void save_dataset(const TraceDataset& data, const std::string& path);

}  // namespace antrace

#endif

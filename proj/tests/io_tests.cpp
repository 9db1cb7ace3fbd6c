#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "antrace/dataset_io.hpp"
#include "test_support.hpp"

using namespace antrace;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("antrace_io_test_" + std::to_string(std::rand()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

void write_file(const std::string& path, const std::string& body) {
  std::ofstream out(path);
  out << body;
}

}  // namespace

TEST_CASE("dataset round-trips through CSV and sidecar") {
  TempDir dir;
  Eigen::MatrixXd x0(2, 2), x1(2, 2);
  x0 << 1.5, -2.25, 0.0, 4.0;
  x1 << -0.125, 3.0, 7.5, 0.5;
  Eigen::VectorXd y(2);
  y << 10.0, -3.5;
  const TraceDataset data = make_dataset({x0, x1}, y);

  const std::string path = dir.file("toy.csv");
  save_dataset(data, path);
  const TraceDataset loaded = load_dataset(path);
  CHECK(loaded.p1 == 2);
  CHECK(loaded.p2 == 2);
  CHECK(loaded.n == 2);
  CHECK((loaded.design - data.design).norm() == 0.0);
  CHECK((loaded.responses - data.responses).norm() == 0.0);
  CHECK((loaded.predictors[1] - x1).norm() == 0.0);
}

TEST_CASE("standardization centers and scales the design") {
  TempDir dir;
  const TraceDataset data = test_support::random_instance(601, 2, 3, 40);
  const std::string path = dir.file("std.csv");
  save_dataset(data, path);

  IngestInfo info;
  const TraceDataset loaded = load_dataset(path, true, false, &info);
  CHECK(info.standardized);
  CHECK(info.constant_columns.empty());
  for (Eigen::Index c = 0; c < loaded.design.cols(); ++c) {
    CHECK(std::abs(loaded.design.col(c).mean()) < 1e-10);
    const double var = loaded.design.col(c).squaredNorm() /
                       static_cast<double>(loaded.n - 1);
    CHECK(var == doctest::Approx(1.0).epsilon(1e-10));
  }
  // response untouched by default
  CHECK((loaded.responses - data.responses).norm() == 0.0);
}

TEST_CASE("constant columns are flagged and centered only") {
  TempDir dir;
  const std::string path = dir.file("const.csv");
  write_file(path + ".json", R"({"p1":1,"p2":2,"n":3})");
  write_file(path,
             "5.0,1.0,0.5\n"
             "5.0,2.0,0.25\n"
             "5.0,3.0,0.125\n");
  IngestInfo info;
  const TraceDataset data = load_dataset(path, true, false, &info);
  REQUIRE(info.constant_columns.size() == 1);
  CHECK(info.constant_columns[0] == 0);
  CHECK(data.design.col(0).isZero(1e-14));  // centered, not scaled
  CHECK(std::abs(data.design.col(1).mean()) < 1e-14);
}

TEST_CASE("malformed input reports the line number") {
  TempDir dir;
  const std::string path = dir.file("bad.csv");
  write_file(path + ".json", R"({"p1":1,"p2":2,"n":2})");
  write_file(path,
             "1.0,2.0,3.0\n"
             "1.0,oops,3.0\n");
  try {
    load_dataset(path);
    FAIL("expected a parse error");
  } catch (const std::runtime_error& e) {
    const std::string what = e.what();
    CHECK(what.find(":2:") != std::string::npos);
    CHECK(what.find("oops") != std::string::npos);
  }

  write_file(path, "1.0,2.0,3.0\n1.0,nan,3.0\n");
  CHECK_THROWS_AS(load_dataset(path), std::runtime_error);

  write_file(path, "1.0,2.0,3.0\n");
  CHECK_THROWS_AS(load_dataset(path), std::runtime_error);  // row count short

  write_file(path, "1.0,2.0,3.0,4.0\n1.0,2.0,3.0\n");
  CHECK_THROWS_AS(load_dataset(path), std::runtime_error);  // too many fields

  CHECK_THROWS_AS(load_dataset(dir.file("missing.csv")), std::runtime_error);
}

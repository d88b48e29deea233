#include <doctest.h>

#include <charconv>
#include <filesystem>
#include <fstream>

#include "hubreg/csv.hpp"
#include "hubreg/rng.hpp"
#include "oracles.hpp"

using namespace hubreg;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "hubreg_csv_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

double reparse(const std::string& s) {
  double v = 0.0;
  std::from_chars(s.data(), s.data() + s.size(), v);
  return v;
}

}  // namespace

TEST_CASE("format_double round-trips exactly") {
  rng::Engine eng(55);
  for (int k = 0; k < 5000; ++k) {
    const double x = std::ldexp(eng.normal(), static_cast<int>(eng.below(600)) - 300);
    CHECK(reparse(csv::format_double(x)) == x);
  }
  for (const double x : {0.1, 1.0 / 3.0, 1e-300, 1e300, 0.0, -0.0,
                         123456789.123456789, 2.2250738585072014e-308}) {
    CHECK(reparse(csv::format_double(x)) == x);
  }
}

TEST_CASE("dataset CSV round-trips bitwise") {
  Dataset data = oracle::random_dataset(66, 37, 5, 10.0);
  data.X(0, 0) = 1e-300;
  data.X(1, 1) = -9.87654321e250;
  data.y[2] = 1.0 / 3.0;
  const auto path = temp_file("roundtrip.csv");
  csv::write_dataset(path.string(), data, {"unit test"});
  const Dataset back = csv::read_dataset(path.string());
  REQUIRE(back.n() == data.n());
  REQUIRE(back.d() == data.d());
  for (Index i = 0; i < data.n(); ++i) {
    CHECK(back.y[i] == data.y[i]);
    for (Index j = 0; j < data.d(); ++j) CHECK(back.X(i, j) == data.X(i, j));
  }
}

TEST_CASE("indexed vector round-trips bitwise") {
  const Vector v = oracle::random_vector(67, 23);
  const auto path = temp_file("vec.csv");
  csv::write_indexed_vector(path.string(), v, {});
  const Vector back = csv::read_indexed_vector(path.string());
  REQUIRE(back.size() == v.size());
  for (Index i = 0; i < v.size(); ++i) CHECK(back[i] == v[i]);
}

TEST_CASE("malformed files produce line-numbered diagnostics") {
  const auto path = temp_file("bad.csv");

  SUBCASE("wrong field count") {
    std::ofstream(path) << "y,x1,x2\n1.0,2.0,3.0\n4.0,5.0\n";
    try {
      csv::read_dataset(path.string());
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
  }

  SUBCASE("unparseable number") {
    std::ofstream(path) << "y,x1\n1.0,oops\n";
    try {
      csv::read_dataset(path.string());
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("line 2") != std::string::npos);
      CHECK(msg.find("oops") != std::string::npos);
    }
  }

  SUBCASE("bad header") {
    std::ofstream(path) << "a,b\n1,2\n";
    CHECK_THROWS_AS(csv::read_dataset(path.string()), ConfigError);
  }

  SUBCASE("missing file") {
    CHECK_THROWS_AS(csv::read_dataset("/nonexistent/no.csv"), ConfigError);
  }
}

TEST_CASE("comments and blank lines are skipped") {
  const auto path = temp_file("comments.csv");
  std::ofstream(path) << "# provenance\n\ny,x1\n1.5,2.5\n";
  const Dataset data = csv::read_dataset(path.string());
  CHECK(data.n() == 1);
  CHECK(data.y[0] == 1.5);
  CHECK(data.X(0, 0) == 2.5);
}

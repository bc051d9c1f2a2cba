#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <vector>

#include "nlsdamp/csv.hpp"
#include "nlsdamp/errors.hpp"
#include "nlsdamp/quadrature.hpp"

using namespace nlsdamp;

namespace {

std::vector<double> sample(double a, double b, int n, double (*f)(double)) {
  std::vector<double> y(n + 1);
  for (int i = 0; i <= n; ++i) y[i] = f(a + (b - a) * i / n);
  return y;
}

}  // namespace

TEST_SUITE("quadrature_csv") {
  TEST_CASE("simpson integrates cubics exactly for even and odd interval counts") {
    auto cubic = [](double x) { return 2 * x * x * x - x * x + 3 * x - 1; };
    // Antiderivative on [0, 2]: x^4/2 - x^3/3 + 3x^2/2 - x.
    const double exact = 8.0 - 8.0 / 3.0 + 6.0 - 2.0;
    for (int n : {6, 7, 10, 13}) {
      std::vector<double> y(n + 1);
      for (int i = 0; i <= n; ++i) y[i] = cubic(2.0 * i / n);
      CHECK(quad::simpson(y, 2.0 / n) == doctest::Approx(exact).epsilon(1e-13));
    }
  }

  TEST_CASE("trapezoid converges at second order") {
    auto f = [](double x) { return std::exp(x); };
    const double exact = std::numbers::e - 1.0;
    double prev = 0.0;
    for (int n : {20, 40, 80}) {
      std::vector<double> y(n + 1);
      for (int i = 0; i <= n; ++i) y[i] = f(static_cast<double>(i) / n);
      const double err = std::abs(quad::trapezoid(y, 1.0 / n) - exact);
      if (prev > 0.0) CHECK(prev / err == doctest::Approx(4.0).epsilon(0.01));
      prev = err;
    }
  }

  TEST_CASE("non-uniform trapezoid matches the uniform rule on a uniform grid") {
    const auto y = sample(0.0, 3.0, 30, [](double x) { return std::sin(x); });
    std::vector<double> x(31);
    for (int i = 0; i <= 30; ++i) x[i] = 0.1 * i;
    CHECK(quad::trapezoid(x, y) == doctest::Approx(quad::trapezoid(y, 0.1)).epsilon(1e-14));
  }

  TEST_CASE("gauss-legendre reaches machine precision on smooth integrands") {
    CHECK(quad::gauss_legendre([](double x) { return std::exp(x); }, 0.0, 1.0, 2, 20) ==
          doctest::Approx(std::numbers::e - 1.0).epsilon(1e-15));
    CHECK(quad::gauss_legendre([](double x) { return 1.0 / (1.0 + x * x); }, -1.0, 1.0, 8, 16) ==
          doctest::Approx(std::numbers::pi / 2).epsilon(1e-14));
  }

  TEST_CASE("csv round-trips doubles bit for bit") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> mant(-1.0, 1.0);
    std::uniform_int_distribution<int> expo(-300, 300);
    csv::Table t;
    t.comments = {"config_hash=abc", "note"};
    t.header = {"a", "b", "c"};
    for (int i = 0; i < 200; ++i)
      t.rows.push_back({std::ldexp(mant(rng), expo(rng)), mant(rng), 1.0 / (i + 1)});
    t.rows.push_back({0.0, -0.0, 5e-324});
    const auto path = std::filesystem::temp_directory_path() / "nlsdamp_csv_roundtrip.csv";
    csv::write(path, t);
    const csv::Table back = csv::read(path);
    CHECK(back.comments == t.comments);
    CHECK(back.header == t.header);
    REQUIRE(back.rows.size() == t.rows.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i)
      for (std::size_t j = 0; j < 3; ++j) CHECK(back.rows[i][j] == t.rows[i][j]);
    CHECK(back.column("c") == 2);
    CHECK_THROWS_AS((void)back.column("missing"), ValidationError);
    std::filesystem::remove(path);
  }

  TEST_CASE("csv formatting uses seventeen significant digits") {
    CHECK(csv::fmt(0.1) == "0.10000000000000001");
    CHECK(csv::fmt(1.0) == "1");
  }

  TEST_CASE("reading a missing csv file raises an io error") {
    CHECK_THROWS_AS(csv::read("/nonexistent/dir/file.csv"), IoError);
  }
}

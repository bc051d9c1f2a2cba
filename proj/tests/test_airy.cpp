#include <doctest.h>

#include <boost/math/special_functions/airy.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "nlsdamp/airy.hpp"
#include "nlsdamp/errors.hpp"

using namespace nlsdamp;

namespace {

const double kAi0 = 1.0 / (std::pow(3.0, 2.0 / 3.0) * std::tgamma(2.0 / 3.0));
const double kAip0 = -1.0 / (std::pow(3.0, 1.0 / 3.0) * std::tgamma(1.0 / 3.0));
const double kBi0 = 1.0 / (std::pow(3.0, 1.0 / 6.0) * std::tgamma(2.0 / 3.0));
const double kBip0 = std::pow(3.0, 1.0 / 6.0) / std::tgamma(1.0 / 3.0);

// Integrates y'' = s y from 0 to s_end with classical RK4. Returns {y, y'}.
std::array<double, 2> airy_rk4(double y0, double yp0, double s_end, int steps) {
  double y = y0, yp = yp0, s = 0.0;
  const double h = s_end / steps;
  for (int i = 0; i < steps; ++i) {
    const double k1y = yp, k1p = s * y;
    const double k2y = yp + 0.5 * h * k1p, k2p = (s + 0.5 * h) * (y + 0.5 * h * k1y);
    const double k3y = yp + 0.5 * h * k2p, k3p = (s + 0.5 * h) * (y + 0.5 * h * k2y);
    const double k4y = yp + h * k3p, k4p = (s + h) * (y + h * k3y);
    y += h / 6.0 * (k1y + 2 * k2y + 2 * k3y + k4y);
    yp += h / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p);
    s += h;
  }
  return {y, yp};
}

}  // namespace

TEST_SUITE("airy") {
  TEST_CASE("exact values at the origin") {
    const AiryPair a = airy_eval(0.0);
    CHECK(a.Ai == doctest::Approx(kAi0).epsilon(1e-13));
    CHECK(a.Ai_prime == doctest::Approx(kAip0).epsilon(1e-13));
    CHECK(a.Bi == doctest::Approx(kBi0).epsilon(1e-13));
    CHECK(a.Bi_prime == doctest::Approx(kBip0).epsilon(1e-13));
  }

  TEST_CASE("wronskian equals 1/pi at random points") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> s_dist(kAiryMin, kAiryMax);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const AiryPair a = airy_eval(s_dist(rng));
      const double w = a.Ai * a.Bi_prime - a.Ai_prime * a.Bi;
      worst = std::max(worst, std::abs(w - 1.0 / std::numbers::pi) * std::numbers::pi);
    }
    CHECK(worst < 1e-10);
  }

  TEST_CASE("agrees with an independent special-function library") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> s_dist(kAiryMin, kAiryMax);
    for (int i = 0; i < 300; ++i) {
      const double s = s_dist(rng);
      const AiryPair a = airy_eval(s);
      CAPTURE(s);
      // Absolute error for the oscillatory side, relative for the growing side.
      const double scale_ai = std::max(1.0, std::abs(boost::math::airy_ai(s)));
      const double scale_bi = std::max(1.0, std::abs(boost::math::airy_bi(s)));
      CHECK(std::abs(a.Ai - boost::math::airy_ai(s)) / scale_ai < 1e-11);
      CHECK(std::abs(a.Bi - boost::math::airy_bi(s)) / scale_bi < 1e-11);
      CHECK(std::abs(a.Ai_prime - boost::math::airy_ai_prime(s)) / std::max(1.0, std::abs(a.Ai_prime)) < 1e-10);
      CHECK(std::abs(a.Bi_prime - boost::math::airy_bi_prime(s)) / std::max(1.0, std::abs(a.Bi_prime)) < 1e-10);
    }
  }

  TEST_CASE("agrees with direct integration of the Airy equation") {
    for (double s : {-6.0, -2.66, -1.0, 0.7, 2.0}) {
      CAPTURE(s);
      const auto ai = airy_rk4(kAi0, kAip0, s, 20000);
      const auto bi = airy_rk4(kBi0, kBip0, s, 20000);
      const AiryPair a = airy_eval(s);
      CHECK(a.Ai == doctest::Approx(ai[0]).epsilon(1e-9).scale(1.0));
      CHECK(a.Ai_prime == doctest::Approx(ai[1]).epsilon(1e-9).scale(1.0));
      CHECK(a.Bi == doctest::Approx(bi[0]).epsilon(1e-9).scale(1.0));
      CHECK(a.Bi_prime == doctest::Approx(bi[1]).epsilon(1e-9).scale(1.0));
    }
  }

  TEST_CASE("Ai oscillates for large negative arguments") {
    int changes = 0;
    double prev = airy_eval(-20.0).Ai;
    for (double s = -19.99; s <= -10.0; s += 0.01) {
      const double v = airy_eval(s).Ai;
      if ((v > 0) != (prev > 0)) ++changes;
      prev = v;
    }
    // Ai has 12 zeros in [-20, -10] (the 10th zero is near -12.83, the 23rd near -19.94).
    CHECK(changes >= 10);
  }

  TEST_CASE("arguments outside the tabulated range are rejected") {
    CHECK_THROWS_AS(airy_eval(kAiryMin - 1.0), ValidationError);
    CHECK_THROWS_AS(airy_eval(kAiryMax + 1.0), ValidationError);
    CHECK_THROWS_AS(airy_eval(std::nan("")), ValidationError);
  }

  TEST_CASE("s* is the largest negative root of G") {
    const double s_star = find_s_star();
    CHECK(std::abs(s_star - (-2.666)) < 1e-3);
    CHECK(std::abs(airy_G(s_star)) < 1e-8);
    // Same root from the independent library.
    auto G = [](double s) { return std::sqrt(3.0) * boost::math::airy_ai(s) - boost::math::airy_bi(s); };
    CHECK(std::abs(G(s_star)) < 1e-10);
    // No sign change of G strictly between s* and 0.
    const double g0 = G(s_star + 1e-6);
    for (double s = s_star + 1e-3; s < 0.0; s += 1e-3) CHECK((G(s) > 0) == (g0 > 0));
  }

  TEST_CASE("kappa at the critical power") {
    const double kappa = kappa_critical();
    CHECK(std::abs(kappa - 1.614) < 1e-3);
    CHECK(kappa > 1.0);
    CHECK(kappa_critical(5e-13) == doctest::Approx(kappa).epsilon(1e-10));
    const double s_star = find_s_star();
    const double oracle = std::numbers::pi * (kBi0 * boost::math::airy_ai_prime(s_star) -
                                              kAi0 * boost::math::airy_bi_prime(s_star));
    CHECK(kappa == doctest::Approx(oracle).epsilon(1e-10));
  }
}

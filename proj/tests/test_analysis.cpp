#include <doctest.h>

#include <cmath>
#include <random>

#include "nlsdamp/analysis.hpp"
#include "nlsdamp/errors.hpp"
#include "nlsdamp/profiles.hpp"

using namespace nlsdamp;

namespace {

DiagnosticsSeries piecewise_linear(double T, double L_min, double pre, double post, double t_end, double dt) {
  DiagnosticsSeries d;
  d.amplitude_reference = 1.0;
  for (double t = 0.0; t <= t_end + 1e-12; t += dt) {
    DiagnosticSample s;
    s.t = t;
    s.L = t < T ? L_min + pre * (T - t) : L_min + post * (t - T);
    s.sup_norm = 1.0 / s.L;
    s.phase = 3.0 * t;
    d.samples.push_back(s);
  }
  return d;
}

std::vector<WidthPoint> synthetic_widths(double T, double (*law)(double, double), double A) {
  // Log-spaced distances to T between 1e-1 and 1e-8.
  std::vector<WidthPoint> out;
  for (int i = 0; i <= 300; ++i) {
    const double s = std::pow(10.0, -1.0 - 7.0 * i / 300.0);
    out.push_back({T - s, law(A, s), true});
  }
  return out;
}

}  // namespace

TEST_SUITE("analysis") {
  TEST_CASE("width from the on-axis amplitude") {
    DiagnosticsSeries d;
    d.amplitude_reference = 2.0;
    for (double a : {2.0, 4.0, 20.0, 0.0}) {
      DiagnosticSample s;
      s.axis_amplitude = a;
      d.samples.push_back(s);
    }
    const auto w5 = width_series(d, 5.0);
    CHECK(w5[0].L == doctest::Approx(1.0));
    CHECK(w5[1].L == doctest::Approx(0.25));
    CHECK(w5[2].L == doctest::Approx(0.01));
    CHECK_FALSE(w5[3].valid);
    const auto w7 = width_series(d, 7.0);
    CHECK(w7[1].L == doctest::Approx(0.125));
    CHECK_THROWS_AS(width_series(d, 1.0), ValidationError);
    d.amplitude_reference = 0.0;
    CHECK_THROWS_AS(width_series(d, 5.0), ValidationError);
  }

  TEST_CASE("Tmax from a sampled parabola is exact") {
    DiagnosticsSeries d;
    for (int i = 0; i <= 100; ++i) {
      DiagnosticSample s;
      s.t = 0.01 * i;
      s.sup_norm = 5.0 - 40.0 * (s.t - 0.3137) * (s.t - 0.3137);
      d.samples.push_back(s);
    }
    const TmaxResult r = detect_Tmax(d);
    CHECK(r.t == doctest::Approx(0.3137).epsilon(1e-12));
    CHECK(r.sup_norm == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(r.index == 31);
    CHECK_FALSE(r.on_boundary);

    for (auto& s : d.samples) s.sup_norm = s.t;
    CHECK(detect_Tmax(d).on_boundary);
    d.samples.resize(2);
    CHECK_THROWS_AS(detect_Tmax(d), ValidationError);
  }

  TEST_CASE("rescaled ground states fit with zero distance") {
    for (double p : {5.0, 7.0}) {
      const GroundStateProfile g = solve_ground_state(1, p);
      for (double L : {0.3, 0.05, 0.01}) {
        RadialField f;
        for (int i = 0; i <= 4000; ++i) {
          const double x = i * L / 200.0;
          f.x.push_back(x);
          f.psi.push_back(std::polar(std::pow(L, -2.0 / (p - 1.0)) * g.value(x / L), 0.7 * x));
        }
        const ProfileFit fit = fit_profile(f, g, p);
        CAPTURE(p);
        CAPTURE(L);
        CHECK(fit.rel_distance < 1e-10);
        CHECK(fit.L_fit == doctest::Approx(L).epsilon(1e-12));
        CHECK(fit.profile_kind == ProfileKind::R);
        CHECK(fit.points > 8);
      }
      CHECK_THROWS_AS(fit_profile(RadialField{}, g, p), ValidationError);
    }
  }

  TEST_CASE("rescaled Q profile fits with zero distance and differs from R") {
    const QProfile q = solve_Q_profile(7.0);
    const GroundStateProfile g = solve_ground_state(1, 7.0);
    const double L = 0.02;
    RadialField f;
    for (int i = 0; i <= 4000; ++i) {
      const double x = i * L / 200.0;
      f.x.push_back(x);
      f.psi.push_back(std::pow(L, -1.0 / 3.0) * q.modulus(x / L));
    }
    const ProfileFit fq = fit_profile(f, q, 7.0);
    CHECK(fq.rel_distance < 1e-10);
    CHECK(fq.profile_kind == ProfileKind::Q);
    const ProfileFit fr = fit_profile(f, g, 7.0);
    CHECK(fr.rel_distance > 0.01);
    CHECK_THROWS_AS(fit_profile(f, q, 5.0), ValidationError);
    CHECK_THROWS_AS(fit_profile(f, g, 5.0), ValidationError);
  }

  TEST_CASE("under-resolved cores are rejected") {
    const GroundStateProfile g = solve_ground_state(1, 5.0);
    RadialField f;
    for (int i = 0; i <= 100; ++i) {
      f.x.push_back(0.1 * i);
      f.psi.push_back(100.0 * g.value(1e4 * 0.1 * i));
    }
    CHECK_THROWS_AS(fit_profile(f, g, 5.0), ValidationError);
  }

  TEST_CASE("rate fits recover randomized synthetic laws to three significant digits") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> T_dist(0.5, 2.0), A_dist(0.5, 2.0), g_dist(0.4, 0.6);
    RateFitOptions opt;
    opt.min_focus = 10.0;
    opt.max_focus = 1e5;
    opt.L0 = 1.0;
    for (int trial = 0; trial < 100; ++trial) {
      const double T = T_dist(rng), A = A_dist(rng);
      CAPTURE(trial);
      {
        auto law = [](double a, double s) { return a * std::sqrt(s); };
        const RateFit f = fit_blowup_rate(synthetic_widths(T, law, A), RateModel::SquareRoot, opt);
        CHECK(f.T_c_fit == doctest::Approx(T).epsilon(1e-3));
        CHECK(f.prefactor == doctest::Approx(A).epsilon(1e-3));
        CHECK(f.residual < 1e-6);
      }
      {
        auto law = [](double a, double s) { return a * std::sqrt(s / std::log(std::abs(std::log(s)))); };
        const RateFit f = fit_blowup_rate(synthetic_widths(T, law, A), RateModel::LogLog, opt);
        CHECK(f.T_c_fit == doctest::Approx(T).epsilon(1e-3));
        CHECK(f.prefactor == doctest::Approx(A).epsilon(1e-3));
      }
    }
    for (int trial = 0; trial < 100; ++trial) {
      const double T = T_dist(rng), A = A_dist(rng);
      const double gamma = g_dist(rng);
      std::vector<WidthPoint> w;
      for (int i = 0; i <= 300; ++i) {
        const double s = std::pow(10.0, -1.0 - 7.0 * i / 300.0);
        w.push_back({T - s, A * std::pow(s, gamma), true});
      }
      RateFitOptions free = opt;
      free.free_exponent = true;
      const RateFit f = fit_blowup_rate(w, RateModel::SquareRoot, free);
      CAPTURE(trial);
      CHECK(f.exponent == doctest::Approx(gamma).epsilon(1e-3));
      CHECK(f.T_c_fit == doctest::Approx(T).epsilon(1e-3));
    }
  }

  TEST_CASE("loglog data is told apart from a pure square root") {
    RateFitOptions opt;
    opt.max_focus = 1e5;
    auto law = [](double a, double s) { return a * std::sqrt(s / std::log(std::abs(std::log(s)))); };
    const auto w = synthetic_widths(1.0, law, 1.0);
    const RateFit ll = fit_blowup_rate(w, RateModel::LogLog, opt);
    const RateFit sq = fit_blowup_rate(w, RateModel::SquareRoot, opt);
    CHECK(ll.residual < sq.residual);
  }

  TEST_CASE("rate model names and window validation") {
    for (auto m : {RateModel::SquareRoot, RateModel::LogLog, RateModel::Linear})
      CHECK(rate_model_from_string(to_string(m)) == m);
    CHECK_THROWS_AS(rate_model_from_string("cubic"), ValidationError);
    std::vector<WidthPoint> few = {{0.0, 0.05, true}, {0.1, 0.04, true}};
    CHECK_THROWS_AS(fit_blowup_rate(few, RateModel::SquareRoot), ValidationError);
  }

  TEST_CASE("mirrored collapse and regrowth has unit asymmetry") {
    const auto d = piecewise_linear(0.5, 0.01, 2.0, 2.0, 1.0, 1e-4);
    const AsymmetryRecord r = asymmetry_and_phase(d, 0.5);
    CHECK(r.window == doctest::Approx(0.005));
    CHECK(r.ratio == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r.pre_slope == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(r.L_min == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(r.theta_at_arrest == doctest::Approx(1.5).epsilon(1e-12));
  }

  TEST_CASE("asymmetric piecewise-linear data returns the slope ratio") {
    for (double kappa : {1.614, 3.0, 13.4}) {
      const auto d = piecewise_linear(0.3, 0.01, 1.0, kappa, 0.4, 1e-5);
      const AsymmetryRecord r = asymmetry_and_phase(d, 0.3);
      CHECK(r.ratio == doctest::Approx(kappa).epsilon(1e-9));
      CHECK(r.post_slope == doctest::Approx(kappa).epsilon(1e-9));
      // Regrowth windows: L doubles after L_min / kappa.
      const AsymmetryRecord g = asymmetry_and_phase(d, 0.3, {0.0, 2.0});
      CHECK(g.window == doctest::Approx(0.01 / kappa).epsilon(1e-6));
      CHECK(g.ratio == doctest::Approx(kappa).epsilon(1e-9));
    }
  }

  TEST_CASE("windows that extend past the data are rejected") {
    const auto d = piecewise_linear(0.5, 0.01, 1.0, 1.0, 0.502, 1e-4);
    CHECK_THROWS_AS(asymmetry_and_phase(d, 0.5), ValidationError);
    CHECK_THROWS_AS(asymmetry_and_phase(d, 0.5, {0.0, 10.0}), ValidationError);
    CHECK_THROWS_AS(asymmetry_and_phase(d, 0.6), ValidationError);
    CHECK_THROWS_AS(asymmetry_and_phase(d, 0.5, {0.0, 1.0}), ValidationError);
    const auto early = piecewise_linear(0.002, 0.01, 1.0, 1.0, 1.0, 1e-4);
    CHECK_THROWS_AS(asymmetry_and_phase(early, 0.002, {1.5, 2.0}), ValidationError);
  }
}

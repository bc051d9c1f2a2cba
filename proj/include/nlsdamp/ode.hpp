#pragma once

// Adaptive Dormand-Prince 5(4) integrator for small fixed-size systems.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>

namespace nlsdamp::ode {

template <std::size_t N>
using State = std::array<double, N>;

struct Options {
  double rtol = 1e-10;
  double atol = 1e-12;
  double h_init = 1e-3;
  double h_min = 0.0;  // steps below this are reported as a failure
  double h_max = std::numeric_limits<double>::infinity();
  std::size_t max_steps = 10'000'000;
};

enum class Status { Done, Stopped, StepUnderflow, TooManySteps, NonFinite };

template <std::size_t N>
struct StepResult {
  State<N> y;
  double err = 0.0;  // scaled error norm; accept when <= 1
};

/// One Dormand-Prince step from (t, y) with size h. The returned error is the
/// RMS of the embedded difference scaled by atol + rtol*max(|y|, |y_new|).
template <std::size_t N, class Rhs>
StepResult<N> dopri_step(Rhs& rhs, double t, const State<N>& y, double h, const Options& opt) {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  State<N> k1, k2, k3, k4, k5, k6, k7, tmp;
  k1 = rhs(t, y);
  for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * a21 * k1[i];
  k2 = rhs(t + c2 * h, tmp);
  for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
  k3 = rhs(t + c3 * h, tmp);
  for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
  k4 = rhs(t + c4 * h, tmp);
  for (std::size_t i = 0; i < N; ++i)
    tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
  k5 = rhs(t + c5 * h, tmp);
  for (std::size_t i = 0; i < N; ++i)
    tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
  k6 = rhs(t + h, tmp);
  StepResult<N> out;
  for (std::size_t i = 0; i < N; ++i)
    out.y[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
  k7 = rhs(t + h, out.y);
  double acc = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const double e =
        h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
    const double sc = opt.atol + opt.rtol * std::max(std::abs(y[i]), std::abs(out.y[i]));
    acc += (e / sc) * (e / sc);
  }
  out.err = std::sqrt(acc / static_cast<double>(N));
  return out;
}

template <std::size_t N>
bool all_finite(const State<N>& y) {
  return std::all_of(y.begin(), y.end(), [](double v) { return std::isfinite(v); });
}

/// Integrates from t0 to t1 (t1 > t0). `observe(t, y)` runs after every
/// accepted step and may return false to stop early. On return `t` and `y`
/// hold the last accepted point.
template <std::size_t N, class Rhs, class Observer>
Status integrate(Rhs&& rhs, double& t, State<N>& y, double t1, const Options& opt,
                 Observer&& observe) {
  double h = std::min(opt.h_init, t1 - t);
  std::size_t steps = 0;
  while (t < t1) {
    if (++steps > opt.max_steps) return Status::TooManySteps;
    const bool last = t + h >= t1;
    const double hh = last ? t1 - t : h;
    auto trial = dopri_step<N>(rhs, t, y, hh, opt);
    if (!all_finite(trial.y) || !std::isfinite(trial.err)) {
      h = 0.25 * hh;
      if (h < opt.h_min || h == 0.0) return Status::NonFinite;
      continue;
    }
    if (trial.err <= 1.0) {
      t = last ? t1 : t + hh;
      y = trial.y;
      if (!observe(t, y)) return Status::Stopped;
      const double fac = trial.err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(trial.err, -0.2), 0.2, 5.0);
      h = std::min(hh * fac, opt.h_max);
      if (last) break;
    } else {
      h = hh * std::max(0.2, 0.9 * std::pow(trial.err, -0.2));
      if (h < opt.h_min) return Status::StepUnderflow;
    }
  }
  return Status::Done;
}

template <std::size_t N, class Rhs>
Status integrate(Rhs&& rhs, double& t, State<N>& y, double t1, const Options& opt) {
  return integrate<N>(rhs, t, y, t1, opt, [](double, const State<N>&) { return true; });
}

}  // namespace nlsdamp::ode

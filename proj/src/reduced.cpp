#include "nlsdamp/reduced.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "nlsdamp/csv.hpp"
#include "nlsdamp/errors.hpp"
#include "nlsdamp/ode.hpp"
#include "nlsdamp/profiles.hpp"

namespace nlsdamp {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct ReducedRhs {
  ReducedParams prm;
  double gain;      // 2 c_q delta / M
  double exponent;  // (q-1) d / 2

  ode::State<3> operator()(double, const ode::State<3>& y) const {
    const double L = y[0], beta = y[2];
    const double damping = gain == 0.0 ? 0.0 : gain * std::pow(L, -exponent);
    return {y[1], -beta / (L * L * L), -nu(beta, prm.c_nu) / (L * L) - damping};
  }
};

ReducedState to_state(double t, const ode::State<3>& y) { return {t, y[0], y[1], y[2]}; }

// Least-squares slope of L(t) over the samples whose width lies in [lo, hi].
double window_slope(const std::vector<ReducedState>& s, std::size_t begin, std::size_t end,
                    double lo, double hi, std::size_t& used) {
  double st = 0, sL = 0, stt = 0, stL = 0;
  used = 0;
  const double t_ref = begin < end ? s[begin].t : 0.0;
  for (std::size_t i = begin; i < end; ++i) {
    if (s[i].L < lo || s[i].L > hi) continue;
    const double t = s[i].t - t_ref;
    st += t;
    sL += s[i].L;
    stt += t * t;
    stL += t * s[i].L;
    ++used;
  }
  if (used < 3) return kNaN;
  const double n = static_cast<double>(used);
  return (n * stL - st * sL) / (n * stt - st * st);
}

struct LineFit {
  double intercept = 0.0;
  double rms = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double b = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double a = (sy - b * sx) / n;
  double ss = 0;
  for (std::size_t i = 0; i < x.size(); ++i) ss += std::pow(y[i] - a - b * x[i], 2);
  return {a, std::sqrt(ss / n)};
}

}  // namespace

double nu(double beta, double c_nu) {
  if (!(beta > 0.0)) return 0.0;
  return c_nu * std::exp(-std::numbers::pi / std::sqrt(beta));
}

ReducedParams reduced_params(const GroundStateProfile& g, double q, double delta) {
  if (std::abs((g.p - 1.0) * g.d - 4.0) > 1e-12)
    throw ValidationError("reduced_params: the ground state must be critical, p = 1 + 4/d");
  if (!(q >= 1.0)) throw ValidationError("reduced_params: q must be at least 1");
  if (!(delta >= 0.0)) throw ValidationError("reduced_params: delta must be non-negative");
  return {g.d, q, delta, g.M, compute_cq(g, q), g.c_nu};
}

ReducedState explicit_initial_state(double T_c, double t0) {
  if (!(t0 < T_c)) throw ValidationError("explicit_initial_state: t0 must precede T_c");
  return {t0, T_c - t0, -1.0, 0.0};
}

ReducedTrajectory integrate_reduced(const ReducedParams& prm, const ReducedState& ic, double t_end,
                                    const ReducedOptions& opt) {
  if (!(ic.L > 0.0)) throw ValidationError("integrate_reduced: initial width must be positive");
  if (!(prm.M > 0.0 && prm.c_q > 0.0 && prm.c_nu >= 0.0))
    throw ValidationError("integrate_reduced: constants M, c_q must be positive");
  if (!(t_end > ic.t)) throw ValidationError("integrate_reduced: t_end must exceed the initial time");
  if (!(opt.tol > 0.0)) throw ValidationError("integrate_reduced: tol must be positive");

  const ReducedRhs rhs{prm, 2.0 * prm.c_q * prm.delta / prm.M, 0.5 * (prm.q - 1.0) * prm.d};
  ode::Options oo;
  oo.rtol = opt.tol;
  oo.atol = opt.tol * 1e-16;

  ReducedTrajectory out;
  double t = ic.t;
  ode::State<3> y{ic.L, ic.L_t, ic.beta};
  out.states.push_back(ic);
  double h = std::min(1e-3 * ic.L, t_end - t);
  std::size_t min_index = 0;

  for (std::size_t steps = 0; t < t_end; ++steps) {
    if (steps > 50'000'000) throw NumericalError("integrate_reduced: step budget exhausted");
    const double cap = opt.max_rel_step * y[0] / std::max(std::abs(y[1]), 1e-300);
    h = std::min({h, cap, t_end - t});
    auto trial = ode::dopri_step<3>(rhs, t, y, h, oo);
    if (!ode::all_finite(trial.y) || !std::isfinite(trial.err) || trial.y[0] <= 0.0) {
      h *= 0.25;
      if (h < 1e-300) throw NumericalError("integrate_reduced: non-finite state");
      continue;
    }
    if (trial.err > 1.0) {
      h *= std::max(0.2, 0.9 * std::pow(trial.err, -0.2));
      if (h <= std::abs(t) * 1e-17) throw NumericalError("integrate_reduced: step size underflow");
      continue;
    }
    if (!out.minimum_found && y[1] < 0.0 && trial.y[1] >= 0.0) {
      // Bisect on the sign of L_t within the accepted step.
      double a = 0.0, b = h;
      for (int it = 0; it < 200 && b - a > 1e-15 * std::max(h, 1e-300); ++it) {
        const double m = 0.5 * (a + b);
        if (ode::dopri_step<3>(rhs, t, y, m, oo).y[1] < 0.0) a = m;
        else b = m;
      }
      const double hm = 0.5 * (a + b);
      const auto ym = ode::dopri_step<3>(rhs, t, y, hm, oo).y;
      out.minimum_found = true;
      out.t_min = t + hm;
      out.L_min = ym[0];
      out.states.push_back(to_state(out.t_min, ym));
      min_index = out.states.size() - 1;
    }
    t += h;
    y = trial.y;
    out.states.push_back(to_state(t, y));
    h *= trial.err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(trial.err, -0.2), 0.2, 5.0);
    if (y[0] < opt.L_floor) {
      out.collapsed = true;
      break;
    }
    if (out.minimum_found && opt.stop_growth > 0.0 && y[0] > opt.stop_growth * out.L_min) break;
  }

  out.pre_slope = out.post_slope = kNaN;
  if (out.minimum_found) {
    const double lo = opt.slope_lo * out.L_min, hi = opt.slope_hi * out.L_min;
    out.pre_slope = window_slope(out.states, 0, min_index, lo, hi, out.pre_points);
    out.post_slope = window_slope(out.states, min_index + 1, out.states.size(), lo, hi, out.post_points);
  }
  return out;
}

KappaEstimate kappa_of_q(double q, int d, const std::vector<double>& deltas, double tol) {
  if (deltas.empty()) throw ValidationError("kappa_of_q: empty delta list");
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    if (!(deltas[i] > 0.0)) throw ValidationError("kappa_of_q: delta values must be positive");
    if (i > 0 && !(deltas[i] < deltas[i - 1]))
      throw ValidationError("kappa_of_q: delta list must be strictly decreasing");
  }
  const GroundStateProfile g = solve_ground_state(d, 1.0 + 4.0 / d);
  KappaEstimate est;
  est.q = q;
  est.d = d;
  est.deltas = deltas;
  ReducedOptions opt;
  opt.tol = tol;
  opt.stop_growth = 1.05 * opt.slope_hi;
  for (double delta : deltas) {
    const auto traj = integrate_reduced(reduced_params(g, q, delta), explicit_initial_state(1.0),
                                        1e3, opt);
    if (!traj.minimum_found || !std::isfinite(traj.post_slope)) {
      std::ostringstream msg;
      msg << "kappa_of_q: no arrest measured for q=" << q << ", delta=" << delta;
      throw NumericalError(msg.str());
    }
    est.slopes.push_back(traj.post_slope);
  }
  if (deltas.size() == 1) {
    est.kappa = est.kappa_linear = est.kappa_sqrt = est.slopes[0];
    est.chosen = "none";
    return est;
  }
  std::vector<double> x1, x2;
  for (double dl : deltas) {
    x1.push_back(dl);
    x2.push_back(std::sqrt(dl));
  }
  const LineFit f1 = fit_line(x1, est.slopes), f2 = fit_line(x2, est.slopes);
  est.kappa_linear = f1.intercept;
  est.kappa_sqrt = f2.intercept;
  est.residual_linear = f1.rms;
  est.residual_sqrt = f2.rms;
  const bool use_sqrt = f2.rms < f1.rms;
  est.kappa = use_sqrt ? f2.intercept : f1.intercept;
  est.chosen = use_sqrt ? "sqrt_delta" : "delta";
  est.settled = true;
  for (std::size_t i = 2; i < est.slopes.size(); ++i)
    if (std::abs(est.slopes[i] - est.slopes[i - 1]) >= std::abs(est.slopes[i - 1] - est.slopes[i - 2]))
      est.settled = false;
  return est;
}

void export_trajectory(const ReducedTrajectory& traj, const std::filesystem::path& csv_path) {
  csv::Table tab;
  tab.comments.push_back("minimum_found=" + std::string(traj.minimum_found ? "1" : "0") +
                         " t_min=" + csv::fmt(traj.t_min) + " L_min=" + csv::fmt(traj.L_min));
  tab.header = {"t", "L", "L_t", "beta"};
  for (const auto& s : traj.states) tab.rows.push_back({s.t, s.L, s.L_t, s.beta});
  csv::write(csv_path, tab);
}

void export_kappa_table(const std::vector<KappaEstimate>& rows, const std::filesystem::path& csv_path) {
  csv::Table tab;
  tab.header = {"q", "kappa", "kappa_delta", "kappa_sqrt_delta", "residual_delta",
                "residual_sqrt_delta", "use_sqrt_delta", "settled", "finest_slope"};
  for (const auto& r : rows)
    tab.rows.push_back({r.q, r.kappa, r.kappa_linear, r.kappa_sqrt, r.residual_linear,
                        r.residual_sqrt, r.chosen == "sqrt_delta" ? 1.0 : 0.0,
                        r.settled ? 1.0 : 0.0, r.slopes.back()});
  csv::write(csv_path, tab);
}

}  // namespace nlsdamp

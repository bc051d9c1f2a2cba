#include "nlsdamp/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>

#include <Eigen/Dense>
#include <boost/math/tools/minima.hpp>

#include "nlsdamp/errors.hpp"
#include "nlsdamp/profiles.hpp"
#include "nlsdamp/quadrature.hpp"

namespace nlsdamp {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double lerp_at(double t, double t0, double y0, double t1, double y1) {
  return t1 == t0 ? y0 : y0 + (y1 - y0) * (t - t0) / (t1 - t0);
}

// Linear interpolation of a sampled quantity at time t (t inside the sample range).
double interpolate(const std::vector<DiagnosticSample>& s, double t, double DiagnosticSample::*field) {
  auto it = std::lower_bound(s.begin(), s.end(), t, [](const DiagnosticSample& a, double v) { return a.t < v; });
  if (it == s.begin()) return (*it).*field;
  if (it == s.end()) return s.back().*field;
  const auto& b = *it;
  const auto& a = *(it - 1);
  return lerp_at(t, a.t, a.*field, b.t, b.*field);
}

double lsq_slope(const std::vector<std::pair<double, double>>& pts) {
  const double n = static_cast<double>(pts.size());
  double st = 0, sy = 0;
  for (const auto& [t, y] : pts) {
    st += t;
    sy += y;
  }
  const double tm = st / n, ym = sy / n;
  double stt = 0, sty = 0;
  for (const auto& [t, y] : pts) {
    stt += (t - tm) * (t - tm);
    sty += (t - tm) * (y - ym);
  }
  return sty / stt;
}

template <class Profile>
ProfileFit fit_generic(const RadialField& snap, double P0, const Profile& modulus, double p, double window,
                       ProfileKind kind) {
  if (snap.x.empty() || snap.x.size() != snap.psi.size()) throw ValidationError("fit_profile: empty snapshot");
  if (snap.x.front() != 0.0) throw ValidationError("fit_profile: snapshot must start on the axis");
  if (!(window > 0.0)) throw ValidationError("fit_profile: window must be positive");
  const double a0 = std::abs(snap.psi.front());
  if (!(a0 > 0.0)) throw ValidationError("fit_profile: zero on-axis amplitude");
  ProfileFit fit;
  fit.t = snap.t;
  fit.profile_kind = kind;
  fit.window = window;
  fit.L_fit = std::pow(P0 / a0, 0.5 * (p - 1.0));
  const double scale = std::pow(fit.L_fit, -2.0 / (p - 1.0));
  std::size_t inside_L = 0;
  std::vector<double> xs, diff2, ref2;
  for (std::size_t j = 0; j < snap.x.size() && snap.x[j] <= window * fit.L_fit; ++j) {
    const double x = snap.x[j];
    if (x <= fit.L_fit) ++inside_L;
    const double m = std::abs(snap.psi[j]);
    const double model = scale * modulus(x / fit.L_fit);
    xs.push_back(x);
    diff2.push_back((m - model) * (m - model));
    ref2.push_back(m * m);
  }
  if (inside_L < 8) throw ValidationError("fit_profile: core under-resolved (fewer than 8 points across L_fit)");
  fit.points = xs.size();
  const double num = quad::trapezoid(std::span<const double>(xs), std::span<const double>(diff2));
  const double den = quad::trapezoid(std::span<const double>(xs), std::span<const double>(ref2));
  fit.rel_distance = std::sqrt(num / den);
  return fit;
}

}  // namespace

std::vector<WidthPoint> width_series(const DiagnosticsSeries& diag, double p) {
  if (!(p > 1.0)) throw ValidationError("width_series: p must exceed 1");
  if (!(diag.amplitude_reference > 0.0)) throw ValidationError("width_series: missing amplitude reference");
  std::vector<WidthPoint> out;
  out.reserve(diag.samples.size());
  for (const auto& s : diag.samples) {
    WidthPoint w{s.t, std::numeric_limits<double>::quiet_NaN(), false};
    if (s.axis_amplitude > 0.0) {
      w.L = std::pow(diag.amplitude_reference / s.axis_amplitude, 0.5 * (p - 1.0));
      w.valid = true;
    }
    out.push_back(w);
  }
  return out;
}

TmaxResult detect_Tmax(const DiagnosticsSeries& diag) {
  const auto& s = diag.samples;
  if (s.size() < 3) throw ValidationError("detect_Tmax: fewer than three samples");
  std::size_t im = 0;
  for (std::size_t i = 1; i < s.size(); ++i)
    if (s[i].sup_norm > s[im].sup_norm) im = i;
  TmaxResult r{s[im].t, s[im].sup_norm, im, im == 0 || im + 1 == s.size()};
  if (r.on_boundary) return r;
  // Vertex of the parabola through three (possibly unevenly spaced) samples.
  const double t0 = s[im - 1].t, t1 = s[im].t, t2 = s[im + 1].t;
  const double y0 = s[im - 1].sup_norm, y1 = s[im].sup_norm, y2 = s[im + 1].sup_norm;
  const double d01 = (y1 - y0) / (t1 - t0), d12 = (y2 - y1) / (t2 - t1);
  const double curv = (d12 - d01) / (t2 - t0);
  if (curv < 0.0) {
    // Newton form y0 + d01 (t - t0) + curv (t - t0)(t - t1); its derivative vanishes at tv.
    const double tv = 0.5 * (t0 + t1) - d01 / (2.0 * curv);
    if (tv > t0 && tv < t2) {
      r.t = tv;
      r.sup_norm = y1 + d01 * (tv - t1) + curv * (tv - t0) * (tv - t1);
    }
  }
  return r;
}

const char* to_string(ProfileKind kind) { return kind == ProfileKind::R ? "R" : "Q"; }

ProfileFit fit_profile(const RadialField& snap, const GroundStateProfile& g, double p, double window) {
  if (g.d != 1 || std::abs(g.p - p) > 1e-12)
    throw ValidationError("fit_profile: ground state does not match (d = 1, p)");
  return fit_generic(snap, g.R0, [&g](double r) { return g.value(r); }, p, window, ProfileKind::R);
}

ProfileFit fit_profile(const RadialField& snap, const QProfile& q, double p, double window) {
  if (std::abs(q.p - p) > 1e-12) throw ValidationError("fit_profile: Q profile does not match p");
  return fit_generic(snap, q.Q0, [&q](double r) { return q.modulus(r); }, p, window, ProfileKind::Q);
}

const char* to_string(RateModel m) {
  switch (m) {
    case RateModel::SquareRoot: return "sqrt";
    case RateModel::LogLog: return "loglog";
    case RateModel::Linear: return "linear";
  }
  return "unknown";
}

RateModel rate_model_from_string(const std::string& name) {
  if (name == "sqrt") return RateModel::SquareRoot;
  if (name == "loglog") return RateModel::LogLog;
  if (name == "linear") return RateModel::Linear;
  throw ValidationError("unknown rate model '" + name + "'");
}

RateFit fit_blowup_rate(const std::vector<WidthPoint>& series, RateModel model, const RateFitOptions& opt) {
  std::vector<double> t, y;
  for (const auto& w : series) {
    if (!w.valid || !(w.L > 0.0)) continue;
    const double focus = opt.L0 / w.L;
    if (focus < opt.min_focus || focus > opt.max_focus) continue;
    t.push_back(w.t);
    y.push_back(std::log(w.L));
  }
  const bool free = model == RateModel::SquareRoot && opt.free_exponent;
  const std::size_t n_par = free ? 3 : 2;
  if (t.size() < n_par + 2) throw ValidationError("fit_blowup_rate: too few samples in the focusing window");
  const double t_last = *std::max_element(t.begin(), t.end());
  const double t_first = *std::min_element(t.begin(), t.end());
  const double span = t_last - t_first;
  if (!(span > 0.0)) throw ValidationError("fit_blowup_rate: degenerate time window");
  const std::size_t n = t.size();

  // Model: y = a + g(s) [+ gamma log s], s = T - t.
  auto shape = [model](double s) -> double {
    switch (model) {
      case RateModel::SquareRoot: return 0.5 * std::log(s);
      case RateModel::Linear: return std::log(s);
      case RateModel::LogLog: {
        const double ls = std::abs(std::log(s));
        if (!(ls > 1.0)) return std::numeric_limits<double>::quiet_NaN();
        return 0.5 * std::log(s) - 0.5 * std::log(std::log(ls));
      }
    }
    return 0.0;
  };

  struct Inner {
    double a = 0, gamma = 0.5, rms = kInf;
  };
  auto solve_inner = [&](double T) {
    Inner in;
    if (free) {
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const double x = std::log(T - t[i]);
        sx += x;
        sy += y[i];
        sxx += x * x;
        sxy += x * y[i];
      }
      const double dn = static_cast<double>(n);
      in.gamma = (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
      in.a = (sy - in.gamma * sx) / dn;
      double ss = 0;
      for (std::size_t i = 0; i < n; ++i) ss += std::pow(y[i] - in.a - in.gamma * std::log(T - t[i]), 2);
      in.rms = std::sqrt(ss / dn);
    } else {
      double sum = 0;
      std::vector<double> g(n);
      for (std::size_t i = 0; i < n; ++i) {
        g[i] = shape(T - t[i]);
        if (!std::isfinite(g[i])) return in;
        sum += y[i] - g[i];
      }
      in.a = sum / static_cast<double>(n);
      double ss = 0;
      for (std::size_t i = 0; i < n; ++i) ss += std::pow(y[i] - in.a - g[i], 2);
      in.rms = std::sqrt(ss / static_cast<double>(n));
      in.gamma = model == RateModel::Linear ? 1.0 : 0.5;
    }
    return in;
  };

  // Coarse scan of u = log(T - t_last), then Brent around the best node.
  const double u_lo = std::log(1e-9 * span), u_hi = std::log(10.0 * span);
  constexpr int kScan = 120;
  int best = -1;
  double best_val = kInf;
  for (int k = 0; k <= kScan; ++k) {
    const double u = u_lo + (u_hi - u_lo) * k / kScan;
    const double v = solve_inner(t_last + std::exp(u)).rms;
    if (v < best_val) {
      best_val = v;
      best = k;
    }
  }
  if (best < 0) throw NumericalError("fit_blowup_rate: model undefined on the whole search interval");
  const double du = (u_hi - u_lo) / kScan;
  const auto objective = [&](double u) { return solve_inner(t_last + std::exp(u)).rms; };
  const auto [u_best, _] = boost::math::tools::brent_find_minima(
      objective, std::max(u_lo, u_lo + (best - 1) * du), std::min(u_hi, u_lo + (best + 1) * du), 50);
  const double T = t_last + std::exp(u_best);
  const Inner in = solve_inner(T);

  RateFit fit;
  fit.model_kind = model;
  fit.T_c_fit = T;
  fit.prefactor = std::exp(in.a);
  fit.exponent = in.gamma;
  fit.residual = in.rms;
  fit.t_first = t_first;
  fit.t_last = t_last;
  fit.points = n;

  // Jacobian of the log model in (a, [gamma], T); the T column by central differences.
  Eigen::MatrixXd J(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n_par));
  const double hT = 1e-6 * (T - t_last);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    const double s = T - t[i];
    J(r, 0) = 1.0;
    if (free) {
      J(r, 1) = std::log(s);
      J(r, 2) = in.gamma / s;
    } else {
      J(r, 1) = (shape(s + hT) - shape(s - hT)) / (2.0 * hT);
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(J);
  const auto sv = svd.singularValues();
  fit.condition = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : kInf;
  fit.ill_conditioned = !(fit.condition < opt.condition_limit);
  return fit;
}

AsymmetryRecord asymmetry_and_phase(const DiagnosticsSeries& diag, double T_max,
                                    const AsymmetryOptions& options) {
  const auto& s = diag.samples;
  if (s.size() < 3) throw ValidationError("asymmetry_and_phase: fewer than three samples");
  if (!(T_max > s.front().t && T_max < s.back().t))
    throw ValidationError("asymmetry_and_phase: T_max outside the sampled interval (arrest not captured)");
  AsymmetryRecord rec;
  rec.T_max = T_max;
  rec.L_min = interpolate(s, T_max, &DiagnosticSample::L);
  for (const auto& v : s) rec.L_min = std::min(rec.L_min, v.L);
  if (options.window_fraction > 0.0) {
    rec.window = options.window_fraction * T_max;
  } else {
    const double k = options.regrowth;
    if (!(k > 1.0)) throw ValidationError("asymmetry_and_phase: regrowth factor must exceed 1");
    // First time after T_max at which L regrows to k * L_min.
    double t2 = -1.0;
    for (std::size_t i = 1; i < s.size(); ++i) {
      if (s[i].t <= T_max || s[i].L < k * rec.L_min) continue;
      const auto& a = s[i - 1];
      t2 = a.t >= T_max && a.L < k * rec.L_min ? lerp_at(k * rec.L_min, a.L, a.t, s[i].L, s[i].t) : s[i].t;
      break;
    }
    if (t2 < 0.0)
      throw ValidationError("asymmetry_and_phase: L never regrows to the requested multiple of L_min; window extends past data");
    rec.window = t2 - T_max;
  }
  if (T_max + rec.window > s.back().t)
    throw ValidationError("asymmetry_and_phase: post-arrest window extends past data");
  if (T_max - rec.window < s.front().t)
    throw ValidationError("asymmetry_and_phase: pre-arrest window extends past data");
  auto window_points = [&](double lo, double hi) {
    std::vector<std::pair<double, double>> pts;
    pts.emplace_back(lo, interpolate(s, lo, &DiagnosticSample::L));
    for (const auto& v : s)
      if (v.t > lo && v.t < hi) pts.emplace_back(v.t, v.L);
    pts.emplace_back(hi, interpolate(s, hi, &DiagnosticSample::L));
    return pts;
  };
  rec.pre_slope = -lsq_slope(window_points(T_max - rec.window, T_max));
  rec.post_slope = lsq_slope(window_points(T_max, T_max + rec.window));
  rec.ratio = rec.post_slope / rec.pre_slope;
  rec.theta_at_arrest = interpolate(s, T_max, &DiagnosticSample::phase);
  return rec;
}

}  // namespace nlsdamp

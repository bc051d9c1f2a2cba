#include "nlsdamp/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "nlsdamp/csv.hpp"
#include "nlsdamp/errors.hpp"
#include "nlsdamp/ode.hpp"
#include "nlsdamp/quadrature.hpp"

namespace nlsdamp {

using cplx = std::complex<double>;

double closed_form_R1d(double p, double x) {
  if (!(p > 1.0)) throw ValidationError("closed_form_R1d: p must exceed 1");
  const double amp = std::pow(0.5 * (p + 1.0), 1.0 / (p - 1.0));
  // cosh^{-2/(p-1)}(z) = (2 e^{-|z|} / (1 + e^{-2|z|}))^{2/(p-1)}, safe for large |z|
  const double z = std::abs(0.5 * (p - 1.0) * x);
  const double e = std::exp(-z);
  return amp * std::pow(2.0 * e / (1.0 + e * e), 2.0 / (p - 1.0));
}

double unit_sphere_area(int d) {
  if (d < 1) throw ValidationError("dimension must be positive");
  return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
}

namespace {

// Decaying solution of the linearized radial equation: r^{-nu} K_nu(r), nu = d/2 - 1.
double bessel_tail(int d, double r) {
  const double nu = 0.5 * d - 1.0;
  return std::pow(r, -nu) * std::cyl_bessel_k(std::abs(nu), r);
}

double bessel_tail_prime(int d, double r) {
  const double nu = 0.5 * d - 1.0;
  return -std::pow(r, -nu) * std::cyl_bessel_k(std::abs(nu + 1.0), r);
}

double hermite(double h, double s, double y0, double d0, double y1, double d1) {
  const double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h * d0 + (-2 * s3 + 3 * s2) * y1 +
         (s3 - s2) * h * d1;
}

enum class Fate { Over, Under, Undecided };

struct RadialOde {
  int d;
  double p;
  ode::State<2> operator()(double r, const ode::State<2>& y) const {
    const double R = y[0], Rp = y[1];
    const double damp = (d > 1 && r > 0.0) ? (d - 1) / r * Rp : 0.0;
    return {Rp, -damp + R - std::pow(std::abs(R), p - 1.0) * R};
  }
};

// Starting point off the axis. For d > 1 the Taylor expansion
// R = R0 + a r^2 / 2 with a = (R0 - R0^p)/d avoids the 1/r term.
ode::State<2> axis_start(int d, double p, double R0, double r_start) {
  const double a = (R0 - std::pow(R0, p)) / d;
  if (d == 1 || r_start == 0.0) return {R0, 0.0};
  return {R0 + 0.5 * a * r_start * r_start, a * r_start};
}

Fate classify(int d, double p, double R0, const ode::Options& opt) {
  RadialOde rhs{d, p};
  const double r_start = d == 1 ? 0.0 : 1e-5;
  double r = r_start;
  auto y = axis_start(d, p, R0, r_start);
  Fate fate = Fate::Undecided;
  ode::integrate<2>(rhs, r, y, 80.0, opt, [&](double rr, const ode::State<2>& s) {
    if (s[0] < 0.0) {
      fate = Fate::Over;
      return false;
    }
    if (s[1] > 0.0 && rr > r_start) {
      fate = Fate::Under;
      return false;
    }
    return true;
  });
  return fate;
}

// Samples a trajectory on the uniform grid until it stops being monotone-positive.
void sample_trajectory(int d, double p, double R0, double dr, std::size_t n,
                       const ode::Options& opt, std::vector<double>& R, std::vector<double>& Rp) {
  RadialOde rhs{d, p};
  R.assign(1, R0);
  Rp.assign(1, 0.0);
  const double r_start = d == 1 ? 0.0 : std::min(1e-5, 0.01 * dr);
  double r = r_start;
  auto y = axis_start(d, p, R0, r_start);
  ode::Options o = opt;
  o.h_init = dr;
  for (std::size_t i = 1; i < n; ++i) {
    const double target = i * dr;
    const auto st = ode::integrate<2>(rhs, r, y, target, o);
    if (st != ode::Status::Done || y[0] <= 0.0 || y[1] > 0.0) break;
    R.push_back(y[0]);
    Rp.push_back(y[1]);
  }
}

}  // namespace

double GroundStateProfile::value(double r) const {
  r = std::abs(r);
  if (r_grid.empty()) return 0.0;
  if (r >= r_grid.back()) return tail_coeff * bessel_tail(d, r);
  const auto i = std::min(static_cast<std::size_t>(r / dr), r_grid.size() - 2);
  const double s = (r - r_grid[i]) / dr;
  return hermite(dr, s, R_values[i], R_prime[i], R_values[i + 1], R_prime[i + 1]);
}

GroundStateProfile solve_ground_state(int d, double p, double tol, double dr, double r_max_request) {
  if (d < 1) throw ValidationError("solve_ground_state: d must be positive");
  if (!(p > 1.0)) throw ValidationError("solve_ground_state: p must exceed 1");
  if (d > 2 && !(p < (d + 2.0) / (d - 2.0)))
    throw ValidationError("solve_ground_state: p must be below the Sobolev exponent");
  if (!(tol > 0.0)) throw ValidationError("solve_ground_state: tol must be positive");
  if (!(dr > 0.0 && dr <= 0.1)) throw ValidationError("solve_ground_state: dr must lie in (0, 0.1]");
  if (!(r_max_request >= 0.0)) throw ValidationError("solve_ground_state: r_max must be non-negative");

  ode::Options opt;
  opt.rtol = std::clamp(1e-3 * tol, 1e-14, 1e-8);
  opt.atol = opt.rtol * 1e-3;
  opt.h_init = 1e-3;

  double lo = 1.0 + 1e-3, hi = 2.0;
  if (classify(d, p, lo, opt) != Fate::Under)
    throw NumericalError("solve_ground_state: lower shooting bracket is not undershooting");
  for (int k = 0; classify(d, p, hi, opt) != Fate::Over; ++k) {
    if (k > 40) throw NumericalError("solve_ground_state: no overshooting R(0) found");
    lo = hi;
    hi *= 2.0;
  }
  int iter = 0;
  while (hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi) {
    if (++iter > 200) throw NumericalError("solve_ground_state: bisection did not converge");
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const Fate f = classify(d, p, mid, opt);
    if (f == Fate::Over)
      hi = mid;
    else
      lo = mid;
  }

  GroundStateProfile g;
  g.d = d;
  g.p = p;
  g.tol = tol;
  g.dr = dr;
  g.R0 = 0.5 * (lo + hi);

  // Bracketing trajectories agree up to the point where the shooting error
  // (growing like e^{2r} relative to R) dominates; the nonlinear term decays
  // like R^{p-1}. Match to the linear Bessel tail where both are smallest.
  const std::size_t n_max = static_cast<std::size_t>(80.0 / g.dr);
  std::vector<double> Rl, Rpl, Rh, Rph;
  sample_trajectory(d, p, lo, g.dr, n_max, opt, Rl, Rpl);
  sample_trajectory(d, p, hi, g.dr, n_max, opt, Rh, Rph);
  const std::size_t common = std::min(Rl.size(), Rh.size());
  std::size_t best = 0;
  double best_err = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < common; ++i) {
    const double R = 0.5 * (Rl[i] + Rh[i]);
    const double err = std::max(std::abs(Rh[i] - Rl[i]) / R, std::pow(R, p - 1.0));
    if (err < best_err) {
      best_err = err;
      best = i;
    }
  }
  if (best * g.dr < 2.0 || best_err > 1e-6)
    throw NumericalError("solve_ground_state: grid too short for tail matching (error " +
                         std::to_string(best_err) + ")");
  g.match_r = best * g.dr;
  const double R_match = 0.5 * (Rl[best] + Rh[best]);
  g.tail_coeff = R_match / bessel_tail(d, g.match_r);
  g.A_R = g.tail_coeff * std::sqrt(std::numbers::pi / 2.0);

  // Extend until R < 1e-12 unless a longer table was requested.
  double r_max = g.match_r;
  while (g.tail_coeff * bessel_tail(d, r_max) >= 1e-12) r_max += 1.0;
  r_max = std::max(r_max, r_max_request);
  const std::size_t n = static_cast<std::size_t>(std::ceil(r_max / g.dr)) + 1;
  g.r_grid.resize(n);
  g.R_values.resize(n);
  g.R_prime.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = i * g.dr;
    g.r_grid[i] = r;
    if (i <= best) {
      g.R_values[i] = 0.5 * (Rl[i] + Rh[i]);
      g.R_prime[i] = 0.5 * (Rpl[i] + Rph[i]);
    } else {
      g.R_values[i] = g.tail_coeff * bessel_tail(d, r);
      g.R_prime[i] = g.tail_coeff * bessel_tail_prime(d, r);
    }
  }

  // Far-field amplitude: median of e^r r^{(d-1)/2} R over the last 20% of the grid.
  std::vector<double> prod;
  for (std::size_t i = n - n / 5; i < n; ++i) {
    const double r = g.r_grid[i];
    prod.push_back(std::exp(r) * std::pow(r, 0.5 * (d - 1)) * g.R_values[i]);
  }
  std::sort(prod.begin(), prod.end());
  g.A_R_median = prod[prod.size() / 2];
  g.A_R_fluctuation = (prod.back() - prod.front()) / g.A_R_median;

  const double S = unit_sphere_area(d);
  std::vector<double> f(n);
  for (std::size_t i = 0; i < n; ++i)
    f[i] = g.R_values[i] * g.R_values[i] * std::pow(g.r_grid[i], d - 1);
  g.P_cr = S * quad::simpson(f, g.dr);
  for (std::size_t i = 0; i < n; ++i) f[i] *= g.r_grid[i] * g.r_grid[i];
  g.M = 0.25 * S * quad::simpson(f, g.dr);
  g.c_nu = 2.0 * g.A_R * g.A_R / g.M;
  return g;
}

double compute_cq(const GroundStateProfile& profile, double q) {
  if (!(q >= 1.0)) throw ValidationError("compute_cq: q must be >= 1");
  if (profile.r_grid.size() < 3) throw ValidationError("compute_cq: empty profile");
  std::vector<double> f(profile.r_grid.size());
  for (std::size_t i = 0; i < f.size(); ++i)
    f[i] = std::pow(profile.R_values[i], q + 1.0) * std::pow(profile.r_grid[i], profile.d - 1);
  const double v = unit_sphere_area(profile.d) * quad::simpson(f, profile.dr);
  if (!std::isfinite(v) || v <= 0.0) throw NumericalError("compute_cq: quadrature failed");
  return v;
}

double compute_cq_gauss(const GroundStateProfile& profile, double q) {
  if (!(q >= 1.0)) throw ValidationError("compute_cq_gauss: q must be >= 1");
  const double rm = profile.r_max();
  const int panels = std::max(1, static_cast<int>(std::ceil(rm / 0.25)));
  const double v = quad::gauss_legendre(
      [&](double r) { return std::pow(profile.value(r), q + 1.0) * std::pow(r, profile.d - 1); },
      0.0, rm, panels, 16);
  return unit_sphere_area(profile.d) * v;
}

// ---------------------------------------------------------------------------
// Supercritical self-similar profile (d = 1)

namespace {

struct ProfileOde {
  double p, a;
  ode::State<4> operator()(double rho, const ode::State<4>& y) const {
    const cplx V{y[0], y[1]}, W{y[2], y[3]};
    const cplx I{0.0, 1.0};
    const cplx Vpp = V - I * a * (2.0 / (p - 1.0) * V + rho * W) - std::pow(std::abs(V), p - 1.0) * V;
    return {W.real(), W.imag(), Vpp.real(), Vpp.imag()};
  }
};

struct Shot {
  bool ok = false;
  cplx residual;  // normalized far-field mismatch
  std::vector<cplx> V, W;
};

// Far-field condition: V ~ C rho^{-g}(1 + c rho^{-2}), g = 2/(p-1) + i/a,
// with c = (g(g+1) + |V|^{p-1} rho^2) / (2 i a).
cplx far_field_mismatch(double p, double a, double rho, cplx V, cplx W) {
  const cplx I{0.0, 1.0};
  const cplx g = 2.0 / (p - 1.0) + I / a;
  const cplx c = (g * (g + 1.0) + std::pow(std::abs(V), p - 1.0) * rho * rho) / (2.0 * I * a);
  const cplx corr = 2.0 * c / (rho * rho) / (1.0 + c / (rho * rho));
  return (rho * W + g * V + corr * V) / std::abs(V);
}

Shot shoot_profile(double p, double Q0, double a, double rho_max, double drho,
                   const ode::Options& opt, bool record) {
  Shot s;
  ProfileOde rhs{p, a};
  ode::State<4> y{Q0, 0.0, 0.0, 0.0};
  double rho = 0.0;
  const auto n = static_cast<std::size_t>(std::llround(rho_max / drho));
  if (record) {
    s.V.reserve(n + 1);
    s.W.reserve(n + 1);
    s.V.emplace_back(Q0, 0.0);
    s.W.emplace_back(0.0, 0.0);
  }
  ode::Options o = opt;
  o.h_init = drho;
  o.max_steps = 2'000'000;
  for (std::size_t i = 1; i <= n; ++i) {
    const auto st = ode::integrate<4>(rhs, rho, y, i * drho, o);
    if (st != ode::Status::Done) return s;
    if (std::hypot(y[0], y[1]) > 1e6) return s;
    if (record) {
      s.V.emplace_back(y[0], y[1]);
      s.W.emplace_back(y[2], y[3]);
    }
  }
  s.residual = far_field_mismatch(p, a, rho_max, {y[0], y[1]}, {y[2], y[3]});
  s.ok = std::isfinite(s.residual.real()) && std::isfinite(s.residual.imag());
  return s;
}

struct Candidate {
  double Q0, a, res;
};

// Newton iteration in (Q0, a) with a finite-difference Jacobian.
bool newton_profile(double p, double& Q0, double& a, double rho_max, double drho,
                    const ode::Options& opt, double tol, double& res_out) {
  for (int it = 0; it < 60; ++it) {
    const Shot s0 = shoot_profile(p, Q0, a, rho_max, drho, opt, false);
    if (!s0.ok) return false;
    res_out = std::abs(s0.residual);
    if (res_out < tol) return true;
    const double hq = 1e-7 * std::max(1.0, Q0), ha = 1e-7 * std::max(1.0, a);
    const Shot sq = shoot_profile(p, Q0 + hq, a, rho_max, drho, opt, false);
    const Shot sa = shoot_profile(p, Q0, a + ha, rho_max, drho, opt, false);
    if (!sq.ok || !sa.ok) return false;
    const cplx dq = (sq.residual - s0.residual) / hq;
    const cplx da = (sa.residual - s0.residual) / ha;
    // Solve [Re dq Re da; Im dq Im da] [x; y] = -[Re F; Im F]
    const double J11 = dq.real(), J12 = da.real(), J21 = dq.imag(), J22 = da.imag();
    const double det = J11 * J22 - J12 * J21;
    if (det == 0.0 || !std::isfinite(det)) return false;
    double dQ = -(J22 * s0.residual.real() - J12 * s0.residual.imag()) / det;
    double dA = -(-J21 * s0.residual.real() + J11 * s0.residual.imag()) / det;
    // damped update
    double lam = 1.0;
    for (int k = 0; k < 20; ++k, lam *= 0.5) {
      const double q1 = Q0 + lam * dQ, a1 = a + lam * dA;
      if (q1 <= 0.0 || a1 <= 0.0) continue;
      const Shot s1 = shoot_profile(p, q1, a1, rho_max, drho, opt, false);
      if (s1.ok && std::abs(s1.residual) < res_out) {
        Q0 = q1;
        a = a1;
        break;
      }
      if (k == 19) return false;
    }
  }
  return res_out < tol;
}

double profile_hamiltonian(double p, double a, double drho, const std::vector<cplx>& V,
                           const std::vector<cplx>& W, cplx& coeff) {
  const std::size_t n = V.size();
  std::vector<double> f(n);
  for (std::size_t i = 0; i < n; ++i)
    f[i] = std::norm(W[i]) - 2.0 / (p + 1.0) * std::pow(std::abs(V[i]), p + 1.0);
  double h = quad::simpson(f, drho);
  // algebraic tail past rho_max
  const double rho = drho * static_cast<double>(n - 1);
  const cplx I{0.0, 1.0};
  const cplx g = 2.0 / (p - 1.0) + I / a;
  coeff = V.back() * std::pow(cplx(rho, 0.0), g);
  const double gr = g.real();
  const double C = std::abs(coeff);
  h += C * C * std::norm(g) * std::pow(rho, -2.0 * gr - 1.0) / (2.0 * gr + 1.0);
  h -= 2.0 / (p + 1.0) * std::pow(C, p + 1.0) * std::pow(rho, 1.0 - (p + 1.0) * gr) /
       ((p + 1.0) * gr - 1.0);
  return 2.0 * h;  // full line
}

bool monotone_modulus(const std::vector<cplx>& V) {
  for (std::size_t i = 1; i < V.size(); ++i)
    if (std::abs(V[i]) > std::abs(V[i - 1]) * (1.0 + 1e-12)) return false;
  return true;
}

}  // namespace

double QProfile::modulus(double rho) const {
  rho = std::abs(rho);
  if (rho_grid.size() < 4) return 0.0;
  const double h = rho_grid[1] - rho_grid[0];
  if (rho >= rho_grid.back()) {
    const double g = 2.0 / (p - 1.0);
    return std::abs(far_field_coeff) * std::pow(rho, -g);
  }
  // cubic Lagrange through four neighbours
  auto i = static_cast<std::ptrdiff_t>(rho / h) - 1;
  i = std::clamp<std::ptrdiff_t>(i, 0, static_cast<std::ptrdiff_t>(rho_grid.size()) - 4);
  const double s = (rho - rho_grid[i]) / h;
  const double y0 = std::abs(Q_values[i]), y1 = std::abs(Q_values[i + 1]),
               y2 = std::abs(Q_values[i + 2]), y3 = std::abs(Q_values[i + 3]);
  return y0 * (s - 1) * (s - 2) * (s - 3) / -6.0 + y1 * s * (s - 2) * (s - 3) / 2.0 +
         y2 * s * (s - 1) * (s - 3) / -2.0 + y3 * s * (s - 1) * (s - 2) / 6.0;
}

QProfile solve_Q_profile(double p, double tol) {
  if (!(p > 5.0)) throw ValidationError("solve_Q_profile: requires p > 5 (supercritical, d = 1)");
  if (!(tol > 0.0)) throw ValidationError("solve_Q_profile: tol must be positive");

  ode::Options opt;
  opt.rtol = std::clamp(1e-3 * tol, 1e-13, 1e-8);
  opt.atol = opt.rtol * 1e-2;
  const double drho = 0.01;

  // Coarse scan for sign structure of the mismatch on a short domain.
  const double rho_scan = 5.0;
  std::vector<Candidate> seeds;
  const int nq = 28, na = 30;
  std::vector<double> grid_res(nq * na, std::numeric_limits<double>::infinity());
  auto qv = [](int i) { return 1.0 + 0.05 * i; };
  auto av = [](int j) { return 0.1 + 0.06 * j; };
  for (int i = 0; i < nq; ++i)
    for (int j = 0; j < na; ++j) {
      const Shot s = shoot_profile(p, qv(i), av(j), rho_scan, 0.25, opt, false);
      if (s.ok) grid_res[i * na + j] = std::abs(s.residual);
    }
  for (int i = 0; i < nq; ++i)
    for (int j = 0; j < na; ++j) {
      const double v = grid_res[i * na + j];
      if (!std::isfinite(v)) continue;
      bool is_min = true;
      for (int di = -1; di <= 1 && is_min; ++di)
        for (int dj = -1; dj <= 1; ++dj) {
          if (!di && !dj) continue;
          const int ii = i + di, jj = j + dj;
          if (ii < 0 || jj < 0 || ii >= nq || jj >= na) continue;
          if (grid_res[ii * na + jj] < v) {
            is_min = false;
            break;
          }
        }
      if (is_min) seeds.push_back({qv(i), av(j), v});
    }
  std::sort(seeds.begin(), seeds.end(), [](auto& x, auto& y) { return x.res < y.res; });

  // Refine each seed with continuation in rho_max, keep converged monotone branches.
  const double rho_final = 60.0;
  std::vector<QProfile> found;
  std::ostringstream brackets;
  for (const auto& sd : seeds) {
    double Q0 = sd.Q0, a = sd.a, res = 0.0;
    bool ok = true;
    for (double rm : {5.0, 7.0, 10.0, 14.0, 20.0, 28.0, 40.0, rho_final}) {
      if (!newton_profile(p, Q0, a, rm, drho, opt, std::max(1e-11, 1e-3 * tol), res)) {
        ok = false;
        break;
      }
    }
    brackets << "(Q0=" << sd.Q0 << ", a=" << sd.a << (ok ? " converged" : " failed") << ") ";
    if (!ok) continue;
    const Shot s = shoot_profile(p, Q0, a, rho_final, drho, opt, true);
    if (!s.ok || !monotone_modulus(s.V)) continue;
    bool dup = false;
    for (const auto& f : found)
      if (std::abs(f.Q0 - Q0) < 1e-6 && std::abs(f.a - a) < 1e-6) dup = true;
    if (dup) continue;
    QProfile q;
    q.p = p;
    q.tol = tol;
    q.Q0 = Q0;
    q.a = a;
    q.kappa_Q = std::sqrt(2.0 * a);
    q.far_field_residual = res;
    q.hamiltonian_residual = profile_hamiltonian(p, a, drho, s.V, s.W, q.far_field_coeff);
    const std::size_t n = s.V.size();
    q.rho_grid.resize(n);
    q.V_values = s.V;
    q.Q_values.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double rho = i * drho;
      q.rho_grid[i] = rho;
      q.Q_values[i] = s.V[i] * std::polar(1.0, a * rho * rho / 4.0);
    }
    found.push_back(std::move(q));
  }
  // Keep the zero-Hamiltonian ones.
  std::vector<QProfile> zero_h;
  for (auto& f : found)
    if (std::abs(f.hamiltonian_residual) < std::max(tol, 1e-6) * 100.0) zero_h.push_back(std::move(f));
  if (zero_h.empty())
    throw NumericalError("solve_Q_profile: no admissible monotone branch; seeds: " + brackets.str());
  if (zero_h.size() > 1) {
    std::ostringstream os;
    os << "solve_Q_profile: multiple admissible branches:";
    for (const auto& z : zero_h) os << " (Q0=" << z.Q0 << ", a=" << z.a << ")";
    throw NumericalError(os.str());
  }
  return std::move(zero_h.front());
}

std::vector<cplx> explicit_blowup(const GroundStateProfile& profile, double alpha, double T_c,
                                  double t, const std::vector<double>& r_grid) {
  const int d = profile.d;
  if (std::abs(profile.p - (1.0 + 4.0 / d)) > 1e-12)
    throw ValidationError("explicit_blowup: profile is not critical (p != 1 + 4/d)");
  if (!(alpha > 0.0)) throw ValidationError("explicit_blowup: alpha must be positive");
  if (!(t < T_c)) throw ValidationError("explicit_blowup: requires t < T_c");
  const double L = alpha * (T_c - t);
  const double L_t = -alpha;
  const double tau = 1.0 / (alpha * alpha * (T_c - t));
  std::vector<cplx> out(r_grid.size());
  const double amp = std::pow(L, -0.5 * d);
  for (std::size_t i = 0; i < r_grid.size(); ++i) {
    const double r = r_grid[i];
    out[i] = amp * profile.value(r / L) * std::polar(1.0, tau + L_t / L * r * r / 4.0);
  }
  return out;
}

// ---------------------------------------------------------------------------
// persistence

namespace {

std::filesystem::path sidecar(const std::filesystem::path& csv_path) {
  auto p = csv_path;
  p.replace_extension(".meta.json");
  return p;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path.string());
  os << j.dump(2) << '\n';
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot read " + path.string());
  try {
    return nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

}  // namespace

void export_profile(const GroundStateProfile& g, const std::filesystem::path& csv_path) {
  csv::Table t;
  t.header = {"r", "R", "R_prime"};
  for (std::size_t i = 0; i < g.r_grid.size(); ++i)
    t.rows.push_back({g.r_grid[i], g.R_values[i], g.R_prime[i]});
  csv::write(csv_path, t);
  nlohmann::json m = {{"kind", "ground_state"}, {"d", g.d},          {"p", g.p},
                      {"dr", g.dr},             {"R0", g.R0},        {"A_R", g.A_R},
                      {"A_R_median", g.A_R_median},
                      {"A_R_fluctuation", g.A_R_fluctuation},
                      {"P_cr", g.P_cr},         {"M", g.M},          {"c_nu", g.c_nu},
                      {"tail_coeff", g.tail_coeff}, {"match_r", g.match_r}, {"tol", g.tol}};
  write_json(sidecar(csv_path), m);
}

GroundStateProfile import_ground_state(const std::filesystem::path& csv_path) {
  const auto m = read_json(sidecar(csv_path));
  if (m.value("kind", "") != "ground_state") throw IoError("not a ground-state sidecar");
  const auto t = csv::read(csv_path);
  GroundStateProfile g;
  try {
    g.d = m.at("d");
    g.p = m.at("p");
    g.dr = m.at("dr");
    g.R0 = m.at("R0");
    g.A_R = m.at("A_R");
    g.A_R_median = m.at("A_R_median");
    g.A_R_fluctuation = m.at("A_R_fluctuation");
    g.P_cr = m.at("P_cr");
    g.M = m.at("M");
    g.c_nu = m.at("c_nu");
    g.tail_coeff = m.at("tail_coeff");
    g.match_r = m.at("match_r");
    g.tol = m.at("tol");
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("ground-state sidecar: ") + e.what());
  }
  g.r_grid = t.column_values("r");
  g.R_values = t.column_values("R");
  g.R_prime = t.column_values("R_prime");
  return g;
}

void export_profile(const QProfile& q, const std::filesystem::path& csv_path) {
  csv::Table t;
  t.header = {"rho", "Q_re", "Q_im", "V_re", "V_im"};
  for (std::size_t i = 0; i < q.rho_grid.size(); ++i)
    t.rows.push_back({q.rho_grid[i], q.Q_values[i].real(), q.Q_values[i].imag(),
                      q.V_values[i].real(), q.V_values[i].imag()});
  csv::write(csv_path, t);
  nlohmann::json m = {{"kind", "q_profile"},
                      {"d", 1},
                      {"p", q.p},
                      {"Q0", q.Q0},
                      {"kappa_Q", q.kappa_Q},
                      {"a", q.a},
                      {"hamiltonian_residual", q.hamiltonian_residual},
                      {"far_field_residual", q.far_field_residual},
                      {"far_field_coeff", {q.far_field_coeff.real(), q.far_field_coeff.imag()}},
                      {"tol", q.tol}};
  write_json(sidecar(csv_path), m);
}

QProfile import_q_profile(const std::filesystem::path& csv_path) {
  const auto m = read_json(sidecar(csv_path));
  if (m.value("kind", "") != "q_profile") throw IoError("not a Q-profile sidecar");
  const auto t = csv::read(csv_path);
  QProfile q;
  try {
    q.p = m.at("p");
    q.Q0 = m.at("Q0");
    q.kappa_Q = m.at("kappa_Q");
    q.a = m.at("a");
    q.hamiltonian_residual = m.at("hamiltonian_residual");
    q.far_field_residual = m.at("far_field_residual");
    q.far_field_coeff = {m.at("far_field_coeff")[0].get<double>(),
                         m.at("far_field_coeff")[1].get<double>()};
    q.tol = m.at("tol");
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("Q-profile sidecar: ") + e.what());
  }
  q.rho_grid = t.column_values("rho");
  const auto qr = t.column_values("Q_re"), qi = t.column_values("Q_im");
  const auto vr = t.column_values("V_re"), vi = t.column_values("V_im");
  for (std::size_t i = 0; i < qr.size(); ++i) {
    q.Q_values.emplace_back(qr[i], qi[i]);
    q.V_values.emplace_back(vr[i], vi[i]);
  }
  return q;
}

}  // namespace nlsdamp

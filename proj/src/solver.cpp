#include "nlsdamp/solver.hpp"

#include <algorithm>
#include <array>
#include <cstddef>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "nlsdamp/csv.hpp"
#include "nlsdamp/errors.hpp"
#include "nlsdamp/profiles.hpp"

namespace nlsdamp {

using cplx = std::complex<double>;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// a2^e for the half-integer exponents that occur in practice, pow otherwise.
inline double power_of_square(double a2, double e) {
  if (e == 1.0) return a2;
  if (e == 2.0) return a2 * a2;
  if (e == 3.0) return a2 * a2 * a2;
  if (e == 4.0) return (a2 * a2) * (a2 * a2);
  if (e == 5.0) return (a2 * a2) * (a2 * a2) * a2;
  if (e == 0.0) return 1.0;
  return std::pow(a2, e);
}

bool is_critical_1d(double p) { return std::abs(p - 5.0) < 1e-12; }

std::string fmt_label(const char* key, double v) {
  std::ostringstream os;
  os << key << "=" << v;
  return os.str();
}

}  // namespace

const char* to_string(InitialKind kind) {
  switch (kind) {
    case InitialKind::Gaussian: return "gaussian";
    case InitialKind::ScaledGround: return "scaled_ground";
    case InitialKind::Explicit: return "explicit";
  }
  return "unknown";
}

InitialKind initial_kind_from_string(const std::string& name) {
  if (name == "gaussian") return InitialKind::Gaussian;
  if (name == "scaled_ground") return InitialKind::ScaledGround;
  if (name == "explicit") return InitialKind::Explicit;
  throw ValidationError("unknown initial condition kind '" + name + "'");
}

const char* to_string(StopReason reason) {
  switch (reason) {
    case StopReason::Completed: return "completed";
    case StopReason::FocusStop: return "focus_stop";
    case StopReason::BoundaryContamination: return "boundary_contamination";
    case StopReason::Regrown: return "regrown";
    case StopReason::NonFinite: return "non_finite";
    case StopReason::StepBudget: return "step_budget";
  }
  return "unknown";
}

void validate(const SolverConfig& c) {
  auto fail = [](const std::string& field, const std::string& why) {
    throw ValidationError("solver config: " + field + " " + why);
  };
  if (!(c.p > 1.0)) fail("p", "must exceed 1");
  if (!(c.q >= 1.0)) fail("q", "must be at least 1");
  if (!(c.delta >= 0.0)) fail("delta", "must be non-negative");
  if (!(c.domain_half_width > 0.0)) fail("domain_half_width", "must be positive");
  if (c.n_points < 16 || (c.n_points & (c.n_points - 1)) != 0)
    fail("n_points", "must be a power of two, at least 16");
  if (!(c.core_spacing >= 0.0)) fail("core_spacing", "must be non-negative");
  if (!(c.dt0 > 0.0)) fail("dt0", "must be positive");
  if (!(c.focus_stop > 1.0)) fail("focus_stop", "must exceed 1");
  if (!(c.t_end > 0.0)) fail("t_end", "must be positive");
  if (c.sample_stride < 1) fail("sample_stride", "must be at least 1");
  if (c.time_order != 2 && c.time_order != 4) fail("time_order", "must be 2 or 4");
  if (!(c.stop_after_growth == 0.0 || c.stop_after_growth > 1.0))
    fail("stop_after_growth", "must be 0 (off) or exceed 1");
  if (!(c.boundary_tol > 0.0)) fail("boundary_tol", "must be positive");
  const auto& ic = c.initial_condition;
  if (!(ic.amplitude > 0.0)) fail("initial_condition.amplitude", "must be positive");
  if (ic.kind == InitialKind::Explicit) {
    if (!is_critical_1d(c.p)) fail("initial_condition", "explicit data requires p = 5");
    if (!(ic.T_c > 0.0)) fail("initial_condition.T_c", "must be positive");
    if (!(ic.alpha > 0.0)) fail("initial_condition.alpha", "must be positive");
  }
  for (double f : c.snapshot_focus)
    if (!(f >= 1.0)) fail("snapshot_focus", "entries must be at least 1");
  for (double g : c.snapshot_growth)
    if (!(g > 1.0)) fail("snapshot_growth", "entries must exceed 1");
}

Grid Grid::sinh_grid(double X, int n, double dx0) {
  if (!(X > 0.0) || n < 3 || !(dx0 > 0.0)) throw ValidationError("sinh_grid: invalid arguments");
  const double ratio = X / dx0;
  const double m = n - 1.0;
  if (!(ratio > m)) throw ValidationError("sinh_grid: core spacing too coarse for a stretched grid");
  // log(sinh(m s) / sinh(s)) increases from log(m) at s = 0; bisect for log(ratio).
  auto g = [m](double s) {
    const double a = m * s;
    const double log_sinh_a = a > 20.0 ? a - std::log(2.0) + std::log1p(-std::exp(-2.0 * a)) : std::log(std::sinh(a));
    return log_sinh_a - std::log(std::sinh(s));
  };
  double lo = 0.0, hi = 1.0;
  const double target = std::log(ratio);
  while (g(hi) < target) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (g(mid) < target ? lo : hi) = mid;
  }
  Grid grid;
  grid.dxi = 0.5 * (lo + hi);
  grid.stretch = dx0 / std::sinh(grid.dxi);
  grid.x.resize(n);
  for (int j = 0; j < n; ++j) grid.x[j] = grid.stretch * std::sinh(j * grid.dxi);
  grid.x[0] = 0.0;
  grid.x[n - 1] = X;
  grid.jac.resize(n);
  grid.V.resize(n);
  grid.w.resize(n);
  for (int j = 0; j < n; ++j) {
    const double xi = j * grid.dxi;
    const double th = std::tanh(xi), sech = 1.0 / std::cosh(xi);
    grid.jac[j] = grid.stretch * std::cosh(xi);
    grid.V[j] = 0.25 * th * th - 0.5 * sech * sech;
    grid.w[j] = grid.dxi * grid.jac[j] * ((j == 0 || j == n - 1) ? 0.5 : 1.0);
  }
  return grid;
}

namespace {

double initial_width(const SolverConfig& c) {
  const auto& ic = c.initial_condition;
  return ic.kind == InitialKind::Explicit ? ic.alpha * ic.T_c : 1.0;
}

Grid grid_for(const SolverConfig& c) {
  const double dx0 = c.core_spacing > 0.0 ? c.core_spacing : initial_width(c) / (32.0 * c.focus_stop);
  return Grid::sinh_grid(c.domain_half_width, c.n_points, dx0);
}

}  // namespace

RadialField make_initial_condition(const SolverConfig& c, const Grid& grid, double* power_ratio) {
  validate(c);
  const auto& ic = c.initial_condition;
  RadialField f;
  f.x = grid.x;
  f.psi.resize(grid.size());
  f.label = "initial";
  switch (ic.kind) {
    case InitialKind::Gaussian:
      for (std::size_t j = 0; j < grid.size(); ++j) f.psi[j] = ic.amplitude * std::exp(-grid.x[j] * grid.x[j]);
      break;
    case InitialKind::ScaledGround: {
      const GroundStateProfile g = solve_ground_state(1, c.p);
      for (std::size_t j = 0; j < grid.size(); ++j) f.psi[j] = ic.amplitude * g.value(grid.x[j]);
      break;
    }
    case InitialKind::Explicit: {
      const GroundStateProfile g = solve_ground_state(1, 5.0);
      f.psi = explicit_blowup(g, ic.alpha, ic.T_c, 0.0, grid.x);
      if (ic.amplitude != 1.0)
        for (auto& v : f.psi) v *= ic.amplitude;
      break;
    }
  }
  double sup = 0.0;
  for (const auto& v : f.psi) sup = std::max(sup, std::abs(v));
  if (std::abs(f.psi.back()) > c.boundary_tol * sup)
    throw ValidationError("initial condition: domain too small to hold the profile");
  if (power_ratio) {
    *power_ratio = kNaN;
    if (is_critical_1d(c.p)) {
      double P = 0.0;
      for (std::size_t j = 0; j < grid.size(); ++j) P += 2.0 * grid.w[j] * std::norm(f.psi[j]);
      *power_ratio = P / solve_ground_state(1, 5.0).P_cr;
    }
  }
  return f;
}

Solver::Solver(const SolverConfig& config, RadialField initial)
    : cfg_(config), grid_(grid_for(config)), field_(std::move(initial)) {
  validate(cfg_);
  if (field_.psi.size() != grid_.size()) throw ValidationError("Solver: initial field does not match the grid");
  field_.x = grid_.x;
  L0_ = initial_width(cfg_);
  const double a0 = std::abs(field_.psi[0]);
  if (!(a0 > 0.0)) throw ValidationError("Solver: on-axis amplitude of the initial field is zero");
  // With reference amplitude a_ref, L = (a_ref / |psi(t,0)|)^{(p-1)/2} starts at L0.
  amp_ref_ = a0 * std::pow(L0_, 2.0 / (cfg_.p - 1.0));
  last_raw_phase_ = std::arg(field_.psi[0]);
  unwrapped_phase_ = last_raw_phase_;
  rhs_.resize(grid_.size());
  u_.resize(grid_.size());
  build_operator();
}

Solver::Solver(const SolverConfig& config)
    : Solver(config, make_initial_condition(config, grid_for(config))) {}

void Solver::local_flow(double dt) {
  // Points whose phase and amplitude would change by less than 1e-18 are left untouched.
  {
    // The smallest active exponent governs the change at small amplitude; linear damping (q = 1)
    // changes every point, so nothing is skipped then.
    double e = cfg_.enable_focusing ? 0.5 * (cfg_.p - 1.0) : std::numeric_limits<double>::infinity();
    if (cfg_.delta > 0.0) e = std::min(e, 0.5 * (cfg_.q - 1.0));
    const double rate = std::max(1.0, cfg_.delta) * std::abs(dt);
    if (e <= 0.0) skip_below_ = 0.0;
    else if (std::isinf(e)) skip_below_ = std::numeric_limits<double>::infinity();
    else skip_below_ = std::max(std::pow(1e-18 / std::max(rate, 1e-300), 1.0 / e), std::numeric_limits<double>::min());
  }
  const double hp = 0.5 * (cfg_.p - 1.0), hq = 0.5 * (cfg_.q - 1.0);
  const double delta = cfg_.delta, q = cfg_.q, p = cfg_.p;
  const double r = (p - 1.0) / (q - 1.0);
  for (auto& v : field_.psi) {
    const double a2 = std::norm(v);
    if (a2 < skip_below_) continue;
    double scale = 1.0, phase_time = dt;
    if (delta > 0.0) {
      if (q == 1.0) {
        const double z = delta * dt;
        scale = std::exp(-z);
        const double zp = (p - 1.0) * z;
        phase_time = std::abs(zp) > 1e-12 ? -std::expm1(-zp) / ((p - 1.0) * delta) : dt * (1.0 - 0.5 * zp);
      } else {
        // |u|_t = -delta |u|^q  =>  |u| = |u0| (1 + Z)^{-1/(q-1)},  Z = (q-1) delta |u0|^{q-1} t.
        const double Z = (q - 1.0) * delta * power_of_square(a2, hq) * dt;
        const double l1 = std::log1p(Z);
        scale = std::exp(-l1 / (q - 1.0));
        // int_0^dt |u|^{p-1} ds = |u0|^{p-1} dt G(Z)/Z with G(Z) = ((1+Z)^{1-r} - 1)/(1-r).
        double ratio;
        if (std::abs(Z) < 1e-12) ratio = 1.0 - 0.5 * r * Z;
        else if (r == 1.0) ratio = l1 / Z;
        else ratio = std::expm1((1.0 - r) * l1) / ((1.0 - r) * Z);
        phase_time = dt * ratio;
      }
    }
    const double phase = cfg_.enable_focusing ? power_of_square(a2, hp) * phase_time : 0.0;
    v *= scale * cplx(std::cos(phase), std::sin(phase));
  }
}

// With psi = u / sqrt(x'(xi)) the Laplacian becomes x'^{-2} (u_xixi - V u), so the
// linear flow is  x'^2 i u_t = -u_xixi + V u. The second xi-derivative uses the
// five-point fourth-order stencil with even reflection at both ends; after
// weighting row j by its trapezoid factor the band matrix K is symmetric, and
// Crank-Nicolson preserves sum_j w_j |psi_j|^2 exactly.
void Solver::build_operator() {
  const std::size_t n = grid_.size();
  const auto nn = static_cast<std::ptrdiff_t>(n);
  const double inv = 1.0 / (12.0 * grid_.dxi * grid_.dxi);
  static constexpr double stencil[5] = {1.0, -16.0, 30.0, -16.0, 1.0};  // -12 dxi^2 times the second difference
  K_.assign(n, {});
  mass_.resize(n);
  sqrt_jac_.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double scale = grid_.w[j] / grid_.jac[j];
    for (int o = -2; o <= 2; ++o) {
      std::ptrdiff_t c = static_cast<std::ptrdiff_t>(j) + o;
      if (c < 0) c = -c;
      if (c > nn - 1) c = 2 * (nn - 1) - c;
      K_[j][static_cast<std::size_t>(c - static_cast<std::ptrdiff_t>(j) + 2)] += scale * stencil[o + 2] * inv;
    }
    K_[j][2] += scale * grid_.V[j];
    mass_[j] = grid_.w[j] * grid_.jac[j];
    sqrt_jac_[j] = std::sqrt(grid_.jac[j]);
  }
}

void Solver::apply_K(const std::vector<cplx>& u, std::vector<cplx>& out) const {
  const std::size_t n = grid_.size();
  for (std::size_t j = 0; j < n; ++j) {
    cplx acc = K_[j][2] * u[j];
    if (j >= 1) acc += K_[j][1] * u[j - 1];
    if (j >= 2) acc += K_[j][0] * u[j - 2];
    if (j + 1 < n) acc += K_[j][3] * u[j + 1];
    if (j + 2 < n) acc += K_[j][4] * u[j + 2];
    out[j] = acc;
  }
}

Solver::Factorization& Solver::factor(double dt) {
  for (auto& f : factors_)
    if (f.dt == dt) return f;
  // LU of W + i (dt/2) K without pivoting; the Hermitian part W is positive definite.
  Factorization& fz = factors_[next_factor_];
  next_factor_ = (next_factor_ + 1) % factors_.size();
  auto& band_ = fz.band;
  auto& multiplier_ = fz.multiplier;
  auto& inv_pivot_ = fz.inv_pivot;
  const std::size_t n = grid_.size();
  band_.resize(n);
  multiplier_.resize(n);
  inv_pivot_.resize(n);
  const cplx k(0.0, 0.5 * dt);
  for (std::size_t j = 0; j < n; ++j)
    for (int c = 0; c < 5; ++c) band_[j][c] = k * K_[j][c] + (c == 2 ? cplx(mass_[j]) : cplx(0.0));
  for (std::size_t r = 0; r < n; ++r) {
    inv_pivot_[r] = 1.0 / band_[r][2];
    for (std::size_t i = r + 1; i <= std::min(r + 2, n - 1); ++i) {
      const cplx f = band_[i][2 - (i - r)] * inv_pivot_[r];
      multiplier_[i][i - r - 1] = f;
      for (std::size_t c = r + 1; c <= std::min(r + 2, n - 1); ++c) band_[i][c - i + 2] -= f * band_[r][c - r + 2];
    }
  }
  fz.dt = dt;
  return fz;
}

void Solver::linear_flow(double dt) {
  const std::size_t n = grid_.size();
  auto& psi = field_.psi;
  for (std::size_t j = 0; j < n; ++j) u_[j] = psi[j] / sqrt_jac_[j];
  apply_K(u_, rhs_);
  const cplx k(0.0, 0.5 * dt);
  for (std::size_t j = 0; j < n; ++j) rhs_[j] = mass_[j] * u_[j] - k * rhs_[j];
  const Factorization& fz = factor(dt);
  const auto& multiplier_ = fz.multiplier;
  const auto& band_ = fz.band;
  const auto& inv_pivot_ = fz.inv_pivot;
  for (std::size_t i = 1; i < n; ++i) {
    rhs_[i] -= multiplier_[i][0] * rhs_[i - 1];
    if (i >= 2) rhs_[i] -= multiplier_[i][1] * rhs_[i - 2];
  }
  for (std::size_t r = n; r-- > 0;) {
    cplx acc = rhs_[r];
    if (r + 1 < n) acc -= band_[r][3] * u_[r + 1];
    if (r + 2 < n) acc -= band_[r][4] * u_[r + 2];
    u_[r] = acc * inv_pivot_[r];
  }
  for (std::size_t j = 0; j < n; ++j) psi[j] = u_[j] * sqrt_jac_[j];
}

void Solver::strang(double dt) {
  local_flow(0.5 * dt);
  if (cfg_.enable_laplacian) linear_flow(dt);
  local_flow(0.5 * dt);
}

void Solver::step(double dt) {
  if (!(dt > 0.0)) throw ValidationError("step: dt must be positive");
  if (cfg_.time_order == 4) {
    // Triple-jump composition of the symmetric second-order step.
    const double cbrt2 = std::cbrt(2.0);
    const double w1 = 1.0 / (2.0 - cbrt2), w0 = -cbrt2 / (2.0 - cbrt2);
    // Adjacent local half-flows merge because the local flow is autonomous.
    local_flow(0.5 * w1 * dt);
    if (cfg_.enable_laplacian) linear_flow(w1 * dt);
    local_flow(0.5 * (w1 + w0) * dt);
    if (cfg_.enable_laplacian) linear_flow(w0 * dt);
    local_flow(0.5 * (w0 + w1) * dt);
    if (cfg_.enable_laplacian) linear_flow(w1 * dt);
    local_flow(0.5 * w1 * dt);
  } else {
    strang(dt);
  }
  field_.t += dt;
  const double raw = std::arg(field_.psi[0]);
  unwrapped_phase_ += std::remainder(raw - last_raw_phase_, 2.0 * std::numbers::pi);
  last_raw_phase_ = raw;
}

double Solver::sup_norm() const {
  double s = 0.0;
  for (const auto& v : field_.psi) s = std::max(s, std::norm(v));
  return std::sqrt(s);
}

constexpr double kChirpStepFactor = 0.01;

double Solver::suggested_dt() const {
  const double L2 = std::pow(amp_ref_ / sup_norm(), cfg_.p - 1.0);
  double dt = cfg_.dt0 * std::min(L2, std::max(1.0, L0_ * L0_));
  // After arrest the expanding core carries a large chirp, and dt0 L^2 alone lets the
  // splitting error in the damped power loss reach a few percent.
  const double k2 = mean_k2();
  if (k2 > 0.0) dt = std::min(dt, kChirpStepFactor / k2);
  // Round down to the ladder dt0 * 2^{-k/16} so that consecutive steps reuse factorizations.
  const double k = std::ceil(-16.0 * std::log2(dt / cfg_.dt0));
  return cfg_.dt0 * std::exp2(-k / 16.0);
}

double Solver::mean_k2() const {
  const std::size_t n = grid_.size();
  std::vector<cplx> u(n), Ku(n);
  for (std::size_t j = 0; j < n; ++j) u[j] = field_.psi[j] / sqrt_jac_[j];
  apply_K(u, Ku);
  double kin = 0.0;
  for (std::size_t j = 0; j < n; ++j) kin += (std::conj(u[j]) * Ku[j]).real();
  return 2.0 * kin / power();
}

double Solver::power() const {
  double P = 0.0;
  for (std::size_t j = 0; j < grid_.size(); ++j) P += grid_.w[j] * std::norm(field_.psi[j]);
  return 2.0 * P;
}

double Solver::damping_rate() const {
  if (cfg_.delta == 0.0) return 0.0;
  const double e = 0.5 * (cfg_.q + 1.0);
  double s = 0.0;
  for (std::size_t j = 0; j < grid_.size(); ++j) s += grid_.w[j] * power_of_square(std::norm(field_.psi[j]), e);
  return 2.0 * cfg_.delta * 2.0 * s;
}

double Solver::hamiltonian() const {
  const std::size_t n = grid_.size();
  const auto& psi = field_.psi;
  std::vector<cplx> u(n), Ku(n);
  for (std::size_t j = 0; j < n; ++j) u[j] = psi[j] / sqrt_jac_[j];
  apply_K(u, Ku);
  const double e = 0.5 * (cfg_.p + 1.0);
  double kin = 0.0, pot = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    kin += (std::conj(u[j]) * Ku[j]).real();
    pot += grid_.w[j] * power_of_square(std::norm(psi[j]), e);
  }
  return 2.0 * (kin - 2.0 / (cfg_.p + 1.0) * pot);
}

DiagnosticSample Solver::sample() const {
  DiagnosticSample s;
  s.t = field_.t;
  s.axis_amplitude = std::abs(field_.psi[0]);
  s.L = s.axis_amplitude > 0.0 ? std::pow(amp_ref_ / s.axis_amplitude, 0.5 * (cfg_.p - 1.0)) : kNaN;
  s.sup_norm = sup_norm();
  s.power = power();
  s.hamiltonian = hamiltonian();
  s.phase = unwrapped_phase_;
  s.damping_rate = damping_rate();
  return s;
}

RunResult run(const SolverConfig& config) {
  validate(config);
  const Grid grid = grid_for(config);
  RunResult out;
  RadialField init = make_initial_condition(config, grid, &out.power_ratio);
  Solver solver(config, std::move(init));
  out.diagnostics.p = config.p;
  out.diagnostics.amplitude_reference = solver.amplitude_reference();
  out.initial_power = solver.power();

  std::vector<double> focus_marks = config.snapshot_focus, growth_marks = config.snapshot_growth;
  std::sort(focus_marks.begin(), focus_marks.end());
  std::sort(growth_marks.begin(), growth_marks.end());
  std::size_t next_focus = 0, next_growth = 0;

  const double L0 = solver.L0_;
  const double exponent = 0.5 * (config.p - 1.0);
  double best_sup = solver.sup_norm();
  RadialField at_max = solver.field();
  at_max.label = "max";
  double L_min = L0;
  bool past_minimum = false;

  auto record = [&](double dt) {
    DiagnosticSample s = solver.sample();
    s.dt = dt;
    out.diagnostics.samples.push_back(s);
    out.max_focus = std::max(out.max_focus, L0 / s.L);
  };
  record(0.0);
  out.snapshots.push_back(solver.field());

  std::uint64_t step = 0;
  double dt = 0.0;
  while (true) {
    const double t = solver.field().t;
    if (t >= config.t_end) {
      out.reason = StopReason::Completed;
      break;
    }
    if (step >= config.max_steps) {
      out.reason = StopReason::StepBudget;
      break;
    }
    dt = std::min(solver.suggested_dt(), config.t_end - t);
    solver.step(dt);
    ++step;
    const auto& psi = solver.field().psi;
    const double sup = solver.sup_norm();
    if (!std::isfinite(sup)) {
      out.reason = StopReason::NonFinite;
      out.message = "non-finite field values; collapse is not resolved";
      break;
    }
    if (sup > best_sup) {
      best_sup = sup;
      at_max.psi = psi;
      at_max.t = solver.field().t;
    }
    const double L = std::pow(solver.amplitude_reference() / std::abs(psi[0]), exponent);
    if (L < L_min) L_min = L;
    else if (L > L_min * (1.0 + 1e-9)) past_minimum = true;
    const double focus = L0 / L;
    while (!past_minimum && next_focus < focus_marks.size() && focus >= focus_marks[next_focus]) {
      RadialField snap = solver.field();
      snap.label = fmt_label("focus", focus_marks[next_focus++]);
      out.snapshots.push_back(std::move(snap));
    }
    while (past_minimum && next_growth < growth_marks.size() && L >= growth_marks[next_growth] * L_min) {
      RadialField snap = solver.field();
      snap.label = fmt_label("growth", growth_marks[next_growth++]);
      out.snapshots.push_back(std::move(snap));
    }
    bool stop = false;
    if (focus >= config.focus_stop) {
      out.reason = StopReason::FocusStop;
      out.message = "collapse not arrested at desk scale (focus_stop reached)";
      stop = true;
    } else if (std::abs(psi.back()) > config.boundary_tol * sup) {
      out.reason = StopReason::BoundaryContamination;
      out.message = "field at the outer boundary exceeds the decay tolerance";
      stop = true;
    } else if (config.stop_after_growth > 0.0 && past_minimum && L > config.stop_after_growth * L_min) {
      out.reason = StopReason::Regrown;
      stop = true;
    }
    if (stop || step % static_cast<std::uint64_t>(config.sample_stride) == 0) record(dt);
    if (stop) break;
  }
  if (out.diagnostics.samples.back().t != solver.field().t) record(dt);
  out.steps = step;
  out.t_max_sup = at_max.t;
  out.snapshots.push_back(std::move(at_max));
  RadialField last = solver.field();
  last.label = "final";
  out.snapshots.push_back(std::move(last));
  return out;
}

void write_diagnostics(const DiagnosticsSeries& diag, const std::filesystem::path& path,
                       const std::string& config_hash) {
  csv::Table tab;
  tab.comments = {"config_hash=" + config_hash, "amplitude_reference=" + csv::fmt(diag.amplitude_reference),
                  "p=" + csv::fmt(diag.p)};
  tab.header = {"t", "L", "sup_norm", "axis_amplitude", "power", "hamiltonian", "phase", "damping_rate", "dt"};
  for (const auto& s : diag.samples)
    tab.rows.push_back({s.t, s.L, s.sup_norm, s.axis_amplitude, s.power, s.hamiltonian, s.phase, s.damping_rate, s.dt});
  csv::write(path, tab);
}

namespace {

double comment_value(const csv::Table& tab, const std::string& key, double fallback) {
  for (const auto& c : tab.comments)
    if (c.rfind(key + "=", 0) == 0) return std::stod(c.substr(key.size() + 1));
  return fallback;
}

std::string comment_string(const csv::Table& tab, const std::string& key) {
  for (const auto& c : tab.comments)
    if (c.rfind(key + "=", 0) == 0) return c.substr(key.size() + 1);
  return {};
}

}  // namespace

DiagnosticsSeries read_diagnostics(const std::filesystem::path& path) {
  const csv::Table tab = csv::read(path);
  DiagnosticsSeries d;
  d.amplitude_reference = comment_value(tab, "amplitude_reference", kNaN);
  d.p = comment_value(tab, "p", kNaN);
  const std::size_t it = tab.column("t"), iL = tab.column("L"), is = tab.column("sup_norm"),
                    ia = tab.column("axis_amplitude"), iP = tab.column("power"), iH = tab.column("hamiltonian"),
                    ip = tab.column("phase"), iD = tab.column("damping_rate"), idt = tab.column("dt");
  for (const auto& r : tab.rows)
    d.samples.push_back({r[it], r[iL], r[is], r[ia], r[iP], r[iH], r[ip], r[iD], r[idt]});
  return d;
}

void write_snapshot(const RadialField& f, const std::filesystem::path& path) {
  csv::Table tab;
  tab.comments = {"t=" + csv::fmt(f.t), "label=" + f.label};
  tab.header = {"x", "re", "im"};
  tab.rows.reserve(f.x.size());
  for (std::size_t j = 0; j < f.x.size(); ++j) tab.rows.push_back({f.x[j], f.psi[j].real(), f.psi[j].imag()});
  csv::write(path, tab);
}

RadialField read_snapshot(const std::filesystem::path& path) {
  const csv::Table tab = csv::read(path);
  RadialField f;
  f.t = comment_value(tab, "t", kNaN);
  f.label = comment_string(tab, "label");
  const std::size_t ix = tab.column("x"), ir = tab.column("re"), ii = tab.column("im");
  for (const auto& r : tab.rows) {
    f.x.push_back(r[ix]);
    f.psi.emplace_back(r[ir], r[ii]);
  }
  return f;
}

}  // namespace nlsdamp

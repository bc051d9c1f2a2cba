#pragma once

// One-dimensional damped NLS  i psi_t + psi_xx + |psi|^{p-1} psi + i delta |psi|^{q-1} psi = 0
// for even data. The field is stored on the half-line x >= 0 over a sinh-stretched grid
// whose spacing near the axis is fixed at construction; full-line quantities (power,
// Hamiltonian) are twice the half-line integrals.

#include <array>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace nlsdamp {

enum class InitialKind { Gaussian, ScaledGround, Explicit };

struct InitialCondition {
  InitialKind kind = InitialKind::Gaussian;
  double amplitude = 1.0;  // Gaussian: amplitude * exp(-x^2); ScaledGround: amplitude * R_p(x)
  double T_c = 1.0;        // Explicit: collapse time of the critical explicit solution
  double alpha = 1.0;      // Explicit: focusing velocity
};

const char* to_string(InitialKind kind);
InitialKind initial_kind_from_string(const std::string& name);

struct SolverConfig {
  double p = 5.0;
  double q = 5.0;
  double delta = 0.0;
  InitialCondition initial_condition;
  double domain_half_width = 40.0;
  int n_points = 2048;  // power of two
  double core_spacing = 0.0;  // grid spacing at x = 0; 0 selects L(0) / (32 focus_stop)
  double dt0 = 2e-3;          // dt = dt0 * L^2, capped at dt0 * max(1, L(0)^2)
  double focus_stop = 1e3;    // halt once L(0) / L exceeds this
  double t_end = 1.0;
  int sample_stride = 10;
  double stop_after_growth = 0.0;  // if > 0, halt once L > stop_after_growth * L_min after the minimum
  std::vector<double> snapshot_focus;   // focusing factors L(0)/L that trigger snapshots before T_max
  std::vector<double> snapshot_growth;  // L / L_min ratios that trigger snapshots after T_max
  double boundary_tol = 1e-8;
  std::uint64_t max_steps = 20'000'000;
  int time_order = 4;  // 2: Strang splitting; 4: its triple-jump composition
  bool enable_laplacian = true;
  bool enable_focusing = true;
};

/// Throws ValidationError naming the offending field.
void validate(const SolverConfig& config);

struct Grid {
  std::vector<double> x;  // 0 = x_0 < x_1 < ... < x_{n-1} = X
  std::vector<double> w;    // quadrature weights on the half-line (trapezoid in xi)
  std::vector<double> jac;  // dx/dxi
  std::vector<double> V;    // metric potential of the Liouville-transformed Laplacian
  double stretch = 0.0;     // x_j = stretch * sinh(j * dxi)
  double dxi = 0.0;

  static Grid sinh_grid(double half_width, int n_points, double core_spacing);
  [[nodiscard]] std::size_t size() const { return x.size(); }
};

struct RadialField {
  double t = 0.0;
  std::vector<double> x;
  std::vector<std::complex<double>> psi;
  std::string label;  // e.g. "focus=10", "max", "growth=2"
};

struct DiagnosticSample {
  double t = 0.0;
  double L = 0.0;
  double sup_norm = 0.0;
  double axis_amplitude = 0.0;
  double power = 0.0;
  double hamiltonian = 0.0;
  double phase = 0.0;         // unwrapped arg psi(t, 0)
  double damping_rate = 0.0;  // 2 delta int |psi|^{q+1} dx, equals -dP/dt
  double dt = 0.0;
};

struct DiagnosticsSeries {
  std::vector<DiagnosticSample> samples;
  double amplitude_reference = 0.0;  // |psi| whose ratio defines L, so that L(0) is as documented
  double p = 5.0;
};

enum class StopReason { Completed, FocusStop, BoundaryContamination, Regrown, NonFinite, StepBudget };
const char* to_string(StopReason reason);

struct RunResult {
  DiagnosticsSeries diagnostics;
  std::vector<RadialField> snapshots;
  StopReason reason = StopReason::Completed;
  std::string message;
  double initial_power = 0.0;
  double power_ratio = 0.0;  // initial power / P_cr when p is critical, NaN otherwise
  double max_focus = 1.0;    // max over samples of L(0)/L
  double t_max_sup = 0.0;    // time of the largest sup-norm seen on any step
  std::uint64_t steps = 0;
};

/// Initial field on the grid. `power_ratio` receives P / P_cr for critical p, else NaN.
RadialField make_initial_condition(const SolverConfig& config, const Grid& grid, double* power_ratio = nullptr);

/// Stateful integrator; run() drives it, tests may drive it directly.
class Solver {
 public:
  Solver(const SolverConfig& config, RadialField initial);
  explicit Solver(const SolverConfig& config);

  /// One step of the configured order, built from Strang steps
  /// (local flow dt/2, Crank-Nicolson dt, local flow dt/2).
  void step(double dt);

  /// Adaptive step size: dt0 L^2, capped by 0.01 / <k^2>.
  [[nodiscard]] double suggested_dt() const;

  [[nodiscard]] const RadialField& field() const { return field_; }
  [[nodiscard]] const Grid& grid() const { return grid_; }
  [[nodiscard]] DiagnosticSample sample() const;
  [[nodiscard]] double power() const;
  [[nodiscard]] double hamiltonian() const;
  [[nodiscard]] double damping_rate() const;
  /// Mean squared wavenumber, kinetic energy over power.
  [[nodiscard]] double mean_k2() const;
  [[nodiscard]] double sup_norm() const;
  [[nodiscard]] double amplitude_reference() const { return amp_ref_; }

 private:
  void local_flow(double dt);
  void strang(double dt);
  void build_operator();
  struct Factorization {
    double dt = 0.0;
    std::vector<std::array<std::complex<double>, 5>> band;  // U factor of W + i dt/2 K
    std::vector<std::array<std::complex<double>, 2>> multiplier;
    std::vector<std::complex<double>> inv_pivot;
  };
  Factorization& factor(double dt);
  void apply_K(const std::vector<std::complex<double>>& u, std::vector<std::complex<double>>& out) const;
  void linear_flow(double dt);

  SolverConfig cfg_;
  Grid grid_;
  RadialField field_;
  double amp_ref_ = 1.0;
  double skip_below_ = 0.0;
  double L0_ = 1.0;
  double unwrapped_phase_ = 0.0;
  double last_raw_phase_ = 0.0;
  std::vector<std::complex<double>> rhs_, u_;
  std::vector<std::array<double, 5>> K_;                   // band of K, columns j-2 .. j+2
  std::vector<double> mass_, sqrt_jac_;                     // diagonal of W, sqrt(dx/dxi)
  std::array<Factorization, 4> factors_;  // small cache keyed by dt
  std::size_t next_factor_ = 0;
  friend RunResult run(const SolverConfig& config);
};

RunResult run(const SolverConfig& config);

// CSV persistence. The diagnostics table names its columns and carries the
// configuration hash as a comment line.
void write_diagnostics(const DiagnosticsSeries& diag, const std::filesystem::path& csv_path,
                       const std::string& config_hash);
DiagnosticsSeries read_diagnostics(const std::filesystem::path& csv_path);
void write_snapshot(const RadialField& field, const std::filesystem::path& csv_path);
RadialField read_snapshot(const std::filesystem::path& csv_path);

}  // namespace nlsdamp

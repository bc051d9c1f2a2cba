#pragma once

// Modulation equations for the nonlinearly damped critical NLS:
//   beta_t = -nu(beta) / L^2 - (2 c_q delta / M) L^{-(q-1)d/2},   L_tt = -beta / L^3.

#include <filesystem>
#include <string>
#include <vector>

namespace nlsdamp {

struct GroundStateProfile;

struct ReducedParams {
  int d = 1;
  double q = 5.0;
  double delta = 0.0;
  double M = 0.0;
  double c_q = 0.0;
  double c_nu = 0.0;
};

/// Constants taken from the critical ground state of dimension profile.d.
ReducedParams reduced_params(const GroundStateProfile& critical_profile, double q, double delta);

struct ReducedState {
  double t = 0.0;
  double L = 0.0;
  double L_t = 0.0;
  double beta = 0.0;
};

struct ReducedOptions {
  double tol = 1e-10;
  double L_floor = 1e-14;      // below this the collapse is reported as unarrested
  double stop_growth = 0.0;    // if > 0, stop once L exceeds stop_growth * L_min after the minimum
  double slope_lo = 10.0;      // slope windows: L between slope_lo and slope_hi times L_min
  double slope_hi = 100.0;
  double max_rel_step = 0.02;  // step cap relative to L / |L_t|, keeps the slope windows populated
};

struct ReducedTrajectory {
  std::vector<ReducedState> states;
  bool minimum_found = false;
  bool collapsed = false;  // L fell below L_floor
  double t_min = 0.0;
  double L_min = 0.0;
  double pre_slope = 0.0;   // NaN when the window is not covered
  double post_slope = 0.0;
  std::size_t pre_points = 0;
  std::size_t post_points = 0;
};

/// c_nu exp(-pi / sqrt(beta)) for beta > 0, else 0.
double nu(double beta, double c_nu);

/// Integrates from ic to t_end (or an early stop), locating the minimum of L
/// by bisection on the sign change of L_t.
ReducedTrajectory integrate_reduced(const ReducedParams& params, const ReducedState& ic,
                                    double t_end, const ReducedOptions& options = {});

/// Initial state matching the explicit blowup solution with collapse time T_c.
ReducedState explicit_initial_state(double T_c, double t0 = 0.0);

struct KappaEstimate {
  double q = 0.0;
  int d = 1;
  double kappa = 0.0;
  std::vector<double> deltas;
  std::vector<double> slopes;
  double kappa_linear = 0.0;  // extrapolation against delta
  double kappa_sqrt = 0.0;    // extrapolation against sqrt(delta)
  double residual_linear = 0.0;
  double residual_sqrt = 0.0;
  std::string chosen;         // "delta" or "sqrt_delta"
  bool settled = false;       // successive slope differences shrink along the ladder
};

/// Post-collapse slope in the delta -> 0 limit, from explicit-solution data.
KappaEstimate kappa_of_q(double q, int d, const std::vector<double>& delta_list,
                         double tol = 1e-10);

void export_trajectory(const ReducedTrajectory& traj, const std::filesystem::path& csv_path);
void export_kappa_table(const std::vector<KappaEstimate>& rows, const std::filesystem::path& csv_path);

}  // namespace nlsdamp

#pragma once

// Post-processing of solver output: widths, arrest time, profile and rate fits,
// asymmetry and on-axis phase.

#include <string>
#include <vector>

#include "nlsdamp/solver.hpp"

namespace nlsdamp {

struct GroundStateProfile;
struct QProfile;

struct WidthPoint {
  double t = 0.0;
  double L = 0.0;
  bool valid = true;  // false when the on-axis amplitude vanishes
};

/// L(t) = (a_ref / |psi(t,0)|)^{(p-1)/2} with a_ref = diag.amplitude_reference.
std::vector<WidthPoint> width_series(const DiagnosticsSeries& diag, double p);

struct TmaxResult {
  double t = 0.0;
  double sup_norm = 0.0;
  std::size_t index = 0;
  bool on_boundary = false;  // maximum at the first or last sample: arrest not captured
};

/// Argmax of the sup-norm refined by the parabola through the three neighboring samples.
TmaxResult detect_Tmax(const DiagnosticsSeries& diag);

enum class ProfileKind { R, Q };
const char* to_string(ProfileKind kind);

struct ProfileFit {
  double t = 0.0;
  ProfileKind profile_kind = ProfileKind::R;
  double L_fit = 0.0;
  double rel_distance = 0.0;
  double window = 3.0;  // half-width of the comparison window in units of L_fit
  std::size_t points = 0;
};

/// Compares |psi| with L^{-2/(p-1)} |P(x/L)|, L from the on-axis amplitude ratio,
/// over 0 <= x <= window * L. The reference ground state must belong to the same p.
ProfileFit fit_profile(const RadialField& snapshot, const GroundStateProfile& profile, double p,
                       double window = 3.0);
ProfileFit fit_profile(const RadialField& snapshot, const QProfile& profile, double p, double window = 3.0);

enum class RateModel { SquareRoot, LogLog, Linear };
const char* to_string(RateModel model);
RateModel rate_model_from_string(const std::string& name);

struct RateFitOptions {
  bool free_exponent = false;  // SquareRoot only: fit L = A (T - t)^gamma
  double min_focus = 10.0;     // use samples with L(0)/L in [min_focus, max_focus]
  double max_focus = 1e300;
  double L0 = 1.0;
  double condition_limit = 1e10;
};

struct RateFit {
  RateModel model_kind = RateModel::SquareRoot;
  double T_c_fit = 0.0;
  double prefactor = 0.0;
  double exponent = 0.5;  // fitted for the free-exponent square-root model, nominal otherwise
  double residual = 0.0;  // RMS of log-width residuals
  double condition = 0.0; // singular-value ratio of the log-model Jacobian at the optimum
  bool ill_conditioned = false;
  double t_first = 0.0, t_last = 0.0;  // fit window
  std::size_t points = 0;
};

/// Least squares in log L. Linear parameters are eliminated in closed form and T_c
/// is found by Brent's method on log(T_c - t_last).
RateFit fit_blowup_rate(const std::vector<WidthPoint>& series, RateModel model,
                        const RateFitOptions& options = {});

struct AsymmetryRecord {
  double T_max = 0.0;
  double L_min = 0.0;
  double window = 0.0;       // half-width of the fitting windows
  double pre_slope = 0.0;    // -dL/dt on [T_max - window, T_max], positive when focusing
  double post_slope = 0.0;   // dL/dt on [T_max, T_max + window]
  double ratio = 0.0;        // post_slope / pre_slope
  double theta_at_arrest = 0.0;
};

// Window half-width: window_fraction * T_max when window_fraction > 0, otherwise
// the time L takes to regrow from L_min to regrowth * L_min.
struct AsymmetryOptions {
  double window_fraction = 0.01;
  double regrowth = 2.0;
};

AsymmetryRecord asymmetry_and_phase(const DiagnosticsSeries& diag, double T_max,
                                    const AsymmetryOptions& options = {});

}  // namespace nlsdamp

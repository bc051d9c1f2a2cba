#pragma once

// Ground-state and self-similar profile solvers.
//
// All integrals reported here are over the full space R^d: a radial integral
// int_0^inf f(r) r^{d-1} dr is multiplied by the surface measure of the unit
// sphere (2 for d = 1, 2*pi for d = 2, 4*pi for d = 3, ...).

#include <complex>
#include <filesystem>
#include <string>
#include <vector>

namespace nlsdamp {

struct GroundStateProfile {
  int d = 1;
  double p = 5.0;
  double dr = 0.0;                // uniform radial spacing
  std::vector<double> r_grid;     // 0, dr, 2dr, ..., r_max
  std::vector<double> R_values;   // R(r)
  std::vector<double> R_prime;    // R'(r), used for Hermite resampling
  double R0 = 0.0;
  double A_R = 0.0;               // lim e^r r^{(d-1)/2} R(r)
  double A_R_fluctuation = 0.0;   // relative spread of e^r r^{(d-1)/2} R over the last 20%
  double A_R_median = 0.0;        // median of that product over the last 20%
  double P_cr = 0.0;              // ||R||_2^2
  double M = 0.0;                 // (1/4) int |x|^2 R^2 dx
  double c_nu = 0.0;              // 2 A_R^2 / M
  double tol = 0.0;
  double tail_coeff = 0.0;        // R = tail_coeff * r^{-nu} K_nu(r) past the matching point
  double match_r = 0.0;

  /// R at arbitrary r >= 0 (cubic Hermite inside the table, Bessel tail beyond).
  [[nodiscard]] double value(double r) const;
  [[nodiscard]] double r_max() const { return r_grid.empty() ? 0.0 : r_grid.back(); }
};

struct QProfile {
  double p = 7.0;
  std::vector<double> rho_grid;
  std::vector<std::complex<double>> Q_values;  // solution of the chirped profile equation
  std::vector<std::complex<double>> V_values;  // Q * exp(-i a rho^2 / 4), the physical profile
  double Q0 = 0.0;
  double kappa_Q = 0.0;  // a = -L L_t = kappa^2 / 2
  double a = 0.0;
  double hamiltonian_residual = 0.0;
  double far_field_residual = 0.0;  // |rho V' + (2/(p-1) + i/a) V| / |V| at rho_max
  std::complex<double> far_field_coeff;  // V ~ C rho^{-2/(p-1) - i/a}
  double tol = 0.0;

  /// |Q(rho)|, with the algebraic far-field tail beyond the table.
  [[nodiscard]] double modulus(double rho) const;
};

/// Closed-form one-dimensional ground state.
double closed_form_R1d(double p, double x);

/// Surface measure of the unit sphere in R^d.
double unit_sphere_area(int d);

/// Nodeless solution of R'' + (d-1)/r R' - R + R^p = 0 by bisection on R(0),
/// tabulated with spacing dr out to where R < 1e-12, or to r_max if that is larger.
GroundStateProfile solve_ground_state(int d, double p, double tol = 1e-10, double dr = 1.0 / 128.0,
                                      double r_max = 0.0);

/// ||R||_{q+1}^{q+1} over R^d (composite Simpson on the table).
double compute_cq(const GroundStateProfile& profile, double q);

/// The same integral on a Gauss-Legendre resampling of the table.
double compute_cq_gauss(const GroundStateProfile& profile, double q);

/// Zero-Hamiltonian monotone solution of the supercritical profile equation (d = 1).
QProfile solve_Q_profile(double p, double tol = 1e-8);

/// Critical explicit blowup solution psi_{explicit,alpha}(t, r) sampled on r_grid.
/// Requires a critical profile (p = 1 + 4/d).
std::vector<std::complex<double>> explicit_blowup(const GroundStateProfile& profile, double alpha,
                                                  double T_c, double t,
                                                  const std::vector<double>& r_grid);

// CSV + JSON sidecar persistence.
void export_profile(const GroundStateProfile& profile, const std::filesystem::path& csv_path);
GroundStateProfile import_ground_state(const std::filesystem::path& csv_path);
void export_profile(const QProfile& profile, const std::filesystem::path& csv_path);
QProfile import_q_profile(const std::filesystem::path& csv_path);

}  // namespace nlsdamp

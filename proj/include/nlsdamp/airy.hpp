#pragma once

// Real-argument Airy functions and the critical post-collapse slope.

namespace nlsdamp {

struct AiryPair {
  double s = 0.0;
  double Ai = 0.0;
  double Bi = 0.0;
  double Ai_prime = 0.0;
  double Bi_prime = 0.0;
};

inline constexpr double kAiryMin = -20.0;
inline constexpr double kAiryMax = 5.0;

/// Ai, Bi and their derivatives for s in [kAiryMin, kAiryMax].
/// Throws ValidationError outside that range.
AiryPair airy_eval(double s);

/// G(s) = sqrt(3) Ai(s) - Bi(s).
double airy_G(double s);

/// Largest negative root of G, located by a sign scan and refined by TOMS 748.
double find_s_star(double tol = 1e-12);

/// pi * (Bi(0) Ai'(s*) - Ai(0) Bi'(s*)).
double kappa_critical(double tol = 1e-12);

}  // namespace nlsdamp

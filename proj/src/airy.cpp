#include "nlsdamp/airy.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <sstream>

#include <boost/math/tools/roots.hpp>

#include "nlsdamp/errors.hpp"

namespace nlsdamp {
namespace {

constexpr double kAi0 = 0.35502805388781723926;    // Ai(0)
constexpr double kAip0 = -0.25881940379280679840;  // Ai'(0)
constexpr double kSeriesRadius = 4.0;
constexpr double kStep = 0.5;

struct Cauchy {
  double y = 0.0;
  double dy = 0.0;
};

// Fundamental solutions of y'' = s y at the origin: f(0)=1, f'(0)=0 and g(0)=0, g'(0)=1.
void maclaurin(double s, Cauchy& f, Cauchy& g) {
  const double s3 = s * s * s;
  double tf = 1.0, tg = s, tdf = 0.5 * s * s, tdg = 1.0;
  f = {tf, tdf};
  g = {tg, tdg};
  for (int k = 1; k < 400; ++k) {
    const double k3 = 3.0 * k;
    tf *= s3 / ((k3 - 1.0) * k3);
    tg *= s3 / (k3 * (k3 + 1.0));
    tdf *= s3 / (k3 * (k3 + 2.0));
    tdg *= s3 / (k3 * (k3 - 2.0));
    f.y += tf;
    g.y += tg;
    f.dy += tdf;
    g.dy += tdg;
    const double size = std::abs(f.y) + std::abs(g.y) + std::abs(f.dy) + std::abs(g.dy);
    if (std::abs(tf) + std::abs(tg) + std::abs(tdf) + std::abs(tdg) < 1e-18 * size) break;
  }
}

// Advances a solution of y'' = s y from s0 to s0 + h with its local power
// series y = sum a_n h^n, where (n+2)(n+1) a_{n+2} = s0 a_n + a_{n-1}.
Cauchy taylor_advance(double s0, Cauchy c, double h) {
  constexpr int kTerms = 60;
  std::array<double, kTerms> a{};
  a[0] = c.y;
  a[1] = c.dy;
  a[2] = 0.5 * s0 * c.y;
  for (int n = 1; n + 2 < kTerms; ++n) a[n + 2] = (s0 * a[n] + a[n - 1]) / ((n + 2.0) * (n + 1.0));
  double y = 0.0, dy = 0.0;
  for (int n = kTerms - 1; n >= 1; --n) {
    y = y * h + a[n];
    dy = dy * h + n * a[n];
  }
  return {y * h + a[0], dy};
}

}  // namespace

AiryPair airy_eval(double s) {
  if (!(s >= kAiryMin && s <= kAiryMax)) {
    std::ostringstream msg;
    msg << "airy_eval: argument " << s << " outside [" << kAiryMin << ", " << kAiryMax << "]";
    throw ValidationError(msg.str());
  }
  const double s0 = std::clamp(s, -kSeriesRadius, kSeriesRadius);
  Cauchy f, g;
  maclaurin(s0, f, g);
  const double sq3 = std::numbers::sqrt3;
  Cauchy ai{kAi0 * f.y + kAip0 * g.y, kAi0 * f.dy + kAip0 * g.dy};
  Cauchy bi{sq3 * (kAi0 * f.y - kAip0 * g.y), sq3 * (kAi0 * f.dy - kAip0 * g.dy)};
  double at = s0;
  while (at != s) {
    const double h = std::clamp(s - at, -kStep, kStep);
    ai = taylor_advance(at, ai, h);
    bi = taylor_advance(at, bi, h);
    at = std::abs(s - (at + h)) < 1e-15 ? s : at + h;
  }
  return {s, ai.y, bi.y, ai.dy, bi.dy};
}

double airy_G(double s) {
  const AiryPair a = airy_eval(s);
  return std::numbers::sqrt3 * a.Ai - a.Bi;
}

double find_s_star(double tol) {
  if (!(tol > 0.0)) throw ValidationError("find_s_star: tol must be positive");
  // G vanishes at the origin, so the scan starts strictly left of it.
  constexpr double ds = 1e-3;
  double hi = -ds;
  double g_hi = airy_G(hi);
  for (double lo = hi - ds; lo >= kAiryMin; lo -= ds) {
    const double g_lo = airy_G(lo);
    if (g_lo == 0.0) return lo;
    if ((g_lo < 0.0) != (g_hi < 0.0)) {
      std::uintmax_t iters = 200;
      const auto stop = [tol](double a, double b) { return std::abs(b - a) <= tol; };
      const auto [a, b] =
          boost::math::tools::toms748_solve(airy_G, lo, hi, g_lo, g_hi, stop, iters);
      return 0.5 * (a + b);
    }
    hi = lo;
    g_hi = g_lo;
  }
  throw NumericalError("find_s_star: no sign change of G on the working range");
}

double kappa_critical(double tol) {
  const double s_star = find_s_star(tol);
  const AiryPair at0 = airy_eval(0.0);
  const AiryPair at = airy_eval(s_star);
  return std::numbers::pi * (at0.Bi * at.Ai_prime - at0.Ai * at.Bi_prime);
}

}  // namespace nlsdamp

#include "nlsdamp/quadrature.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace nlsdamp::quad {

double trapezoid(std::span<const double> y, double h) {
  if (y.size() < 2) return 0.0;
  double s = 0.5 * (y.front() + y.back());
  for (std::size_t i = 1; i + 1 < y.size(); ++i) s += y[i];
  return s * h;
}

double simpson(std::span<const double> y, double h) {
  const std::size_t n = y.size();
  if (n < 3) return trapezoid(y, h);
  std::size_t intervals = n - 1;
  std::size_t tail = 0;
  if (intervals % 2 == 1) {
    if (intervals < 3) return trapezoid(y, h);
    tail = 3;
    intervals -= 3;
  }
  double s = 0.0;
  for (std::size_t i = 0; i + 2 <= intervals; i += 2) s += y[i] + 4.0 * y[i + 1] + y[i + 2];
  s *= h / 3.0;
  if (tail) {
    const std::size_t k = intervals;
    s += 3.0 * h / 8.0 * (y[k] + 3.0 * y[k + 1] + 3.0 * y[k + 2] + y[k + 3]);
  }
  return s;
}

double trapezoid(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("trapezoid: size mismatch");
  double s = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) s += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
  return s;
}

namespace {

struct Rule {
  std::vector<double> nodes, weights;
};

Rule legendre_rule(int n) {
  Rule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    r.nodes[i] = x;
    r.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

}  // namespace

double gauss_legendre(const std::function<double(double)>& f, double a, double b, int panels,
                      int order) {
  if (panels < 1 || order < 1 || order > 64)
    throw std::invalid_argument("gauss_legendre: bad panel/order");
  const Rule rule = legendre_rule(order);
  const double w = (b - a) / panels;
  double s = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * w;
    double ps = 0.0;
    for (int i = 0; i < order; ++i) ps += rule.weights[i] * f(mid + 0.5 * w * rule.nodes[i]);
    s += 0.5 * w * ps;
  }
  return s;
}

}  // namespace nlsdamp::quad

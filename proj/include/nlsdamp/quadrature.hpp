#pragma once

#include <functional>
#include <span>

namespace nlsdamp::quad {

/// Composite trapezoid rule on uniformly spaced samples.
double trapezoid(std::span<const double> y, double h);

/// Composite Simpson rule on uniformly spaced samples. An odd number of
/// intervals is handled by closing with a 3/8 panel.
double simpson(std::span<const double> y, double h);

/// Trapezoid rule on arbitrary ordered abscissas.
double trapezoid(std::span<const double> x, std::span<const double> y);

/// Composite Gauss-Legendre over [a, b] split into `panels` equal pieces,
/// `order` nodes per panel (order <= 64).
double gauss_legendre(const std::function<double(double)>& f, double a, double b,
                      int panels, int order = 20);

}  // namespace nlsdamp::quad

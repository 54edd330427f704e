#ifndef NETHIST_QUADRATURE_H_
#define NETHIST_QUADRATURE_H_

#include <functional>
#include <span>
#include <vector>

namespace nethist {

struct Rect {
  double x0, x1, y0, y1;
  double area() const { return (x1 - x0) * (y1 - y0); }
};

// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussLegendreRule gauss_legendre(int order);

struct QuadratureOptions {
  int order = 10;
  double rel_tol = 1e-10;
  double abs_tol = 1e-14;
  int max_depth = 14;
};

// Adaptive tensor Gauss-Legendre: a cell is accepted once its estimate and
// the sum over its four quarters agree to rel_tol (or abs_tol).
double integrate_rect(const std::function<double(double, double)>& fn,
                      const Rect& rect, const QuadratureOptions& options = {});

// Tanh-sinh quadrature on [a, b] to rel_tol; tolerates endpoint singularities.
double integrate_interval(const std::function<double(double)>& fn, double a, double b,
                          const QuadratureOptions& options = {});

// As integrate_rect, but first splits the rectangle at the given axis cut points so
// that piecewise-smooth integrands are integrated piece by piece.
double integrate_rect_piecewise(const std::function<double(double, double)>& fn,
                                const Rect& rect, std::span<const double> cuts,
                                const QuadratureOptions& options = {});

}  // namespace nethist

#endif  // NETHIST_QUADRATURE_H_

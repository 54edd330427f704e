#include "nethist/quadrature.h"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "nethist/error.h"

namespace nethist {

GaussLegendreRule gauss_legendre(int order) {
  if (order < 1) throw ConfigError("Gauss-Legendre order must be positive");
  GaussLegendreRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  const int half = (order + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Newton iteration from the Chebyshev-like initial guess.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= order; ++k) {
        double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      if (order == 1) {
        p1 = x;
        p0 = 1.0;
      }
      dp = order * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged root.
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= order; ++k) {
      double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    dp = order == 1 ? 1.0 : order * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[order - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[order - 1 - i] = w;
  }
  if (order == 1) {
    rule.nodes[0] = 0.0;
    rule.weights[0] = 2.0;
  }
  return rule;
}

namespace {

const GaussLegendreRule& cached_rule(int order) {
  static std::mutex mu;
  static std::map<int, GaussLegendreRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, gauss_legendre(order)).first;
  return it->second;
}

double tensor_rule(const std::function<double(double, double)>& fn,
                   const Rect& r, const GaussLegendreRule& rule) {
  const double cx = 0.5 * (r.x0 + r.x1), hx = 0.5 * (r.x1 - r.x0);
  const double cy = 0.5 * (r.y0 + r.y1), hy = 0.5 * (r.y1 - r.y0);
  double sum = 0.0;
  for (size_t i = 0; i < rule.nodes.size(); ++i) {
    const double x = cx + hx * rule.nodes[i];
    double row = 0.0;
    for (size_t j = 0; j < rule.nodes.size(); ++j) {
      row += rule.weights[j] * fn(x, cy + hy * rule.nodes[j]);
    }
    sum += rule.weights[i] * row;
  }
  return sum * hx * hy;
}

double adapt(const std::function<double(double, double)>& fn, const Rect& r,
             double whole, const GaussLegendreRule& rule,
             const QuadratureOptions& opt, int depth) {
  const double mx = 0.5 * (r.x0 + r.x1), my = 0.5 * (r.y0 + r.y1);
  const Rect quarters[4] = {{r.x0, mx, r.y0, my},
                            {mx, r.x1, r.y0, my},
                            {r.x0, mx, my, r.y1},
                            {mx, r.x1, my, r.y1}};
  double parts[4];
  double refined = 0.0;
  for (int q = 0; q < 4; ++q) {
    parts[q] = tensor_rule(fn, quarters[q], rule);
    refined += parts[q];
  }
  const double diff = std::abs(refined - whole);
  if (diff <= opt.rel_tol * std::abs(refined) || diff <= opt.abs_tol * r.area() ||
      depth >= opt.max_depth) {
    return refined;
  }
  double total = 0.0;
  for (int q = 0; q < 4; ++q) {
    total += adapt(fn, quarters[q], parts[q], rule, opt, depth + 1);
  }
  return total;
}

}  // namespace

double integrate_rect(const std::function<double(double, double)>& fn,
                      const Rect& rect, const QuadratureOptions& options) {
  if (!(rect.x1 > rect.x0) || !(rect.y1 > rect.y0)) return 0.0;
  const auto& rule = cached_rule(options.order);
  return adapt(fn, rect, tensor_rule(fn, rect, rule), rule, options, 0);
}

double integrate_interval(const std::function<double(double)>& fn, double a, double b,
                          const QuadratureOptions& options) {
  if (!(b > a)) return 0.0;
  // The integrator caches abscissae and is not safe to share across threads.
  thread_local boost::math::quadrature::tanh_sinh<double> integrator;
  return integrator.integrate(fn, a, b, options.rel_tol);
}

double integrate_rect_piecewise(const std::function<double(double, double)>& fn,
                                const Rect& rect, std::span<const double> cuts,
                                const QuadratureOptions& options) {
  auto edges = [&](double lo, double hi) {
    std::vector<double> out{lo};
    for (double c : cuts) {
      if (c > lo && c < hi) out.push_back(c);
    }
    out.push_back(hi);
    return out;
  };
  const auto xs = edges(rect.x0, rect.x1);
  const auto ys = edges(rect.y0, rect.y1);
  double total = 0.0;
  for (size_t i = 0; i + 1 < xs.size(); ++i) {
    for (size_t j = 0; j + 1 < ys.size(); ++j) {
      total += integrate_rect(fn, {xs[i], xs[i + 1], ys[j], ys[j + 1]}, options);
    }
  }
  return total;
}

}  // namespace nethist

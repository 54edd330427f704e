#include "nethist/bandwidth.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nethist/error.h"
#include "nethist/histogram.h"

namespace nethist {

SlopeFit degree_slope_fit(const Graph& g, double c) {
  const std::vector<int> d = degrees(g);
  return degree_slope_fit(std::vector<double>(d.begin(), d.end()), c);
}

SlopeFit degree_slope_fit(std::vector<double> d, double c) {
  const int n = static_cast<int>(d.size());
  if (!(c > 0.0) || !std::isfinite(c)) throw ConfigError("window constant c must be positive");
  std::stable_sort(d.begin(), d.end());
  SlopeFit fit;
  fit.center = n / 2;
  fit.half_width = static_cast<int>(std::floor(c * std::sqrt(static_cast<double>(n))));
  if (fit.half_width < 1) {
    throw ConfigError("degree window is a single point; increase c");
  }
  const int lo = fit.center - fit.half_width;
  const int hi = fit.center + fit.half_width;
  if (lo < 1 || hi > n) {
    throw ConfigError("degree window [" + std::to_string(lo) + ", " + std::to_string(hi) +
                      "] escapes [1, " + std::to_string(n) + "]; decrease c");
  }
  double sum_jd = 0.0, sum_jj = 0.0, sum_d = 0.0;
  for (int j = -fit.half_width; j <= fit.half_width; ++j) {
    const double dj = d[fit.center + j - 1];
    sum_jd += j * dj;
    sum_jj += static_cast<double>(j) * j;
    sum_d += dj;
  }
  fit.m_hat = sum_jd / sum_jj;
  fit.b_hat = sum_d / (2 * fit.half_width + 1);
  return fit;
}

double degree_quadratic_form(const Graph& g) {
  double total = 0.0;
  for (int i = 0; i < g.num_nodes(); ++i) {
    double s = 0.0;
    for (int j : g.neighbors(i)) s += g.degree(j);
    total += g.degree(i) * s;
  }
  return total;
}

namespace {

double degree_norm_sq(const Graph& g) {
  double s = 0.0;
  for (int i = 0; i < g.num_nodes(); ++i) s += static_cast<double>(g.degree(i)) * g.degree(i);
  return s;
}

}  // namespace

double rank_one_coefficient(const Graph& g) {
  const double dd_inv = generalized_inverse(degree_norm_sq(g));
  const double rho_inv = generalized_inverse(estimate_density(g));
  return dd_inv * dd_inv * rho_inv * degree_quadratic_form(g);
}

double estimate_M2(const Graph& g, double c) {
  const SlopeFit fit = degree_slope_fit(g, c);
  const double n = g.num_nodes();
  const double s = rank_one_coefficient(g);
  return 2.0 * n * n * s * s * fit.m_hat * fit.m_hat * fit.b_hat * fit.b_hat;
}

double oracle_h_star(double M2, int n, double rho) {
  return std::pow(2.0 * M2 * rho, -0.25) * std::sqrt(static_cast<double>(n));
}

int round_bandwidth(double h_star, int n, bool* clamped) {
  const int lo = std::max(1, static_cast<int>(std::floor(h_star)) - 6);
  const int hi = std::min(n, std::max(lo, static_cast<int>(std::ceil(h_star))));
  int best = hi;
  for (int h = hi; h >= lo; --h) {
    if (n % h < n % best) best = h;
  }
  const int clamp_hi = std::max(2, n / 2);
  const int out = std::clamp(best, 2, clamp_hi);
  if (clamped) *clamped = out != best;
  return out;
}

BandwidthSelection select_bandwidth(const Graph& g, double c) {
  const int n = g.num_nodes();
  if (n < 4) throw ConfigError("bandwidth selection needs at least 4 nodes");
  const SlopeFit fit = degree_slope_fit(g, c);
  BandwidthSelection sel;
  sel.c = c;
  sel.n = n;
  sel.m_hat = fit.m_hat;
  sel.b_hat = fit.b_hat;
  sel.rho_hat = estimate_density(g);
  sel.rank_one_coeff = rank_one_coefficient(g);
  const double nn = n;
  sel.M2_hat = 2.0 * nn * nn * sel.rank_one_coeff * sel.rank_one_coeff * fit.m_hat *
               fit.m_hat * fit.b_hat * fit.b_hat;
  if (!(sel.M2_hat > 0.0)) {
    throw NumericalError("estimated M^2 is zero (flat degree profile); supply h manually");
  }
  sel.h_star_raw = oracle_h_star(sel.M2_hat, n, sel.rho_hat);
  const double dd_inv = generalized_inverse(degree_norm_sq(g));
  sel.h_star_alt = std::pow(2.0 * dd_inv * dd_inv * degree_quadratic_form(g) * fit.m_hat *
                                fit.b_hat,
                            -0.5) *
                   std::pow(sel.rho_hat, 0.25);
  if (!(std::abs(sel.h_star_alt - sel.h_star_raw) <= 1e-9 * sel.h_star_raw)) {
    throw NumericalError("bandwidth forms disagree: " + std::to_string(sel.h_star_raw) +
                         " vs " + std::to_string(sel.h_star_alt));
  }
  sel.h = round_bandwidth(sel.h_star_raw, n, &sel.clamped);
  if (sel.clamped) {
    sel.warning = "bandwidth " + std::to_string(sel.h_star_raw) + " clamped to " +
                  std::to_string(sel.h);
  }
  sel.k = n / sel.h;
  sel.r = n % sel.h;
  return sel;
}

double theorem_bound(double M2, int n, double rho, double h) {
  const double ratio = h / n;
  return M2 * (2.0 * ratio * ratio + 1.0 / n) + 1.0 / (h * h * rho);
}

double optimized_bound(double M2, int n, double rho) {
  const double pairs = 0.5 * n * (n - 1.0);
  return M2 * (2.0 / std::sqrt(M2) / std::sqrt(pairs * rho) + 1.0 / n);
}

}  // namespace nethist

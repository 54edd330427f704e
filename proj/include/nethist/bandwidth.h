#ifndef NETHIST_BANDWIDTH_H_
#define NETHIST_BANDWIDTH_H_

#include <string>
#include <vector>

#include "nethist/graph.h"

namespace nethist {

inline constexpr double kDefaultWindowConstant = 4.0;

struct SlopeFit {
  double m_hat = 0.0;  // slope of sorted degrees against offset
  double b_hat = 0.0;  // mean degree over the window
  int half_width = 0;  // floor(c sqrt(n))
  int center = 0;      // floor(n / 2), 1-based
};

// Least-squares line through the ascending degree sequence over the window
// floor(n/2) ± floor(c sqrt(n)). Ties in the sort are broken by node index.
SlopeFit degree_slope_fit(const Graph& g, double c = kDefaultWindowConstant);
// Same fit on an explicit degree sequence (sorted here, ascending).
SlopeFit degree_slope_fit(std::vector<double> degrees, double c = kDefaultWindowConstant);

// Scalar s with F = s·d dᵀ the best rank-one Frobenius approximation to
// A / rho_hat along the degree direction: s = {(dᵀd)⁺}² rho_hat⁺ dᵀAd.
double rank_one_coefficient(const Graph& g);

// dᵀ A d = Σ_i d_i Σ_{j ~ i} d_j.
double degree_quadratic_form(const Graph& g);

double estimate_M2(const Graph& g, double c = kDefaultWindowConstant);

struct BandwidthSelection {
  double c = kDefaultWindowConstant;
  double m_hat = 0.0;
  double b_hat = 0.0;
  double rank_one_coeff = 0.0;
  double M2_hat = 0.0;
  double rho_hat = 0.0;
  double h_star_raw = 0.0;  // (2 M2_hat rho_hat)^(-1/4) sqrt(n)
  double h_star_alt = 0.0;  // same quantity from the direct degree expression
  int n = 0;
  int h = 0;
  int k = 0;
  int r = 0;
  bool clamped = false;
  std::string warning;
};

// Throws NumericalError when M2_hat is zero (a flat degree profile leaves the
// bandwidth undefined) and ConfigError for an unusable window.
BandwidthSelection select_bandwidth(const Graph& g, double c = kDefaultWindowConstant);

// Integer bandwidth near h_star: the h in [floor(h_star) - 6, ceil(h_star)]
// leaving the smallest remainder n mod h, larger h on ties, then clamped to
// [2, floor(n/2)]. Sets *clamped when the clamp changed the value.
int round_bandwidth(double h_star, int n, bool* clamped = nullptr);

// Oracle-optimal bandwidth (2 M² rho)^(-1/4) sqrt(n).
double oracle_h_star(double M2, int n, double rho);

// M²{2(h/n)² + 1/n} + 1/(h² rho): the MISE bound for the oracle estimator.
double theorem_bound(double M2, int n, double rho, double h);

// M²[(2/M){(n choose 2) rho}^(-1/2) + 1/n], the bound's optimized rate.
double optimized_bound(double M2, int n, double rho);

}  // namespace nethist

#endif  // NETHIST_BANDWIDTH_H_

#ifndef NETHIST_GRAPHON_H_
#define NETHIST_GRAPHON_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"
#include "nethist/graph.h"
#include "nethist/quadrature.h"

namespace nethist {

// One term w·u(x)·v(y) of a separable kernel.
struct SeparableTerm {
  double weight = 1.0;
  std::function<double(double)> u;
  std::function<double(double)> v;
};

// A symmetric kernel on (0,1)^2 together with the smoothness metadata the
// error bounds need. Evaluation is pure and safe to call concurrently.
struct Graphon {
  std::string family;
  std::function<double(double, double)> eval;
  double alpha = 1.0;     // Hölder exponent
  double M = 0.0;         // Hölder / gradient constant
  double sup = 1.0;       // upper bound on f over (0,1)^2
  bool normalized = true; // integral over the unit square is 1
  bool holder = true;     // false for piecewise-constant kernels
  std::vector<double> cuts;  // sorted axis discontinuities, if any
  // When nonempty, f(x, y) equals the sum of these terms; block integrals are
  // then computed from one-dimensional integrals.
  std::vector<SeparableTerm> terms;

  double operator()(double x, double y) const { return eval(x, y); }
};

// Families: "constant"; "exp" {beta}: c·exp(-beta(x+y)) normalized;
// "linear": x + y; "block" {values: k×k, sizes?: k fractions, normalize?};
// "beta" {a, b in (0,1]}: proportional to Q(x)Q(y) + Q(1-x)Q(1-y) where Q is
// the Beta(a, b) quantile function.
Graphon builtin_graphon(const std::string& family,
                        const nlohmann::json& params = nlohmann::json::object());

// Reads {family, params, alpha?, M?}; explicit alpha/M override the
// family's metadata.
Graphon graphon_from_json(const nlohmann::json& config);

// Edge-density scale rho_n. Either constant or rho0 * (n / n0)^(-gamma)
// for n > n0.
class SparsitySchedule {
 public:
  static SparsitySchedule constant(double rho);
  static SparsitySchedule power_law(double rho0, int n0, double gamma);

  double rho(int n) const;
  // Checks that rho_n is non-increasing and n·rho_n / log^3 n increases
  // across [n_min, n_max].
  bool satisfies_growth(int n_min, int n_max) const;

 private:
  double rho0_ = 1.0;
  int n0_ = 1;
  double gamma_ = 0.0;
};

struct LatentSample {
  std::vector<double> xi;
  uint64_t seed = 0;
};

struct SampledGraph {
  Graph graph;
  LatentSample latent;
  double rho = 0.0;
};

// Draws xi_i ~ Uniform(0,1), then A_ij ~ Bernoulli(rho_n f(xi_i, xi_j)) for
// i < j. Every draw comes from a stream keyed by (seed, i, j), so the result
// is a pure function of the arguments.
SampledGraph sample_graph(const Graphon& f, const SparsitySchedule& schedule,
                          int n, uint64_t seed);

// Region of histogram block (a, b), 1-based; the last block extends to 1.
Rect block_region(int n, int h, int a, int b);

struct BlockAverage {
  double mean = 0.0;     // average of f over the block
  double mean_sq = 0.0;  // average of f^2 over the block
  double area = 0.0;
};

BlockAverage block_average(const Graphon& f, int a, int b, int h, int n,
                           const QuadratureOptions& options = {});

// Integral of f over the unit square.
double graphon_integral(const Graphon& f, const QuadratureOptions& options = {});

}  // namespace nethist

#endif  // NETHIST_GRAPHON_H_

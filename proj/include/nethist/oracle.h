#ifndef NETHIST_ORACLE_H_
#define NETHIST_ORACLE_H_

#include <cstdint>
#include <string>
#include <vector>

#include "nethist/graph.h"
#include "nethist/graphon.h"
#include "nethist/histogram.h"
#include "nethist/optimizer.h"

namespace nethist {

// What the oracle knows: the latent positions, the true density scale and
// the true graphon.
struct OracleContext {
  LatentSample xi;
  double rho_n = 1.0;
  Graphon f;

  void validate(int n) const;
};

// Label min(ceil(rank / h), k), ranking xi ascending with ties by index.
Assignment oracle_labeling(const LatentSample& xi, int h);

// Bin heights under the oracle labeling, scaled by 1 / rho_n.
NetworkHistogram oracle_estimator(const Graph& g, const OracleContext& ctx, int h);

// Per-block averages of f and f² on the histogram grid (k×k, row-major).
struct BlockMoments {
  int k = 0;
  std::vector<double> mean;
  std::vector<double> mean_sq;
  std::vector<double> area;
};
BlockMoments block_moments(const Graphon& f, const Bandwidth& bw,
                           const QuadratureOptions& options = {});

enum class AlignmentMethod { kExact, kHeuristic };
std::string to_string(AlignmentMethod method);

struct AlignmentResult {
  // Block a of the unit square is compared with histogram bin permutation[a].
  std::vector<int> permutation;
  double l2_sq = 0.0;
  double unaligned_l2_sq = 0.0;  // identity permutation
  AlignmentMethod method = AlignmentMethod::kExact;
};

// Integrated squared error between f and the histogram's estimate,
// minimized over relabelings of the bins: exhaustively when k <= exact_k_max,
// otherwise by pairwise-exchange descent from two starts (identity and a
// match of sorted marginal means). The heuristic value is an upper bound on
// the block-permutation minimum.
AlignmentResult aligned_ise(const Graphon& f, const NetworkHistogram& hist,
                            int exact_k_max = 8);
AlignmentResult aligned_ise(const BlockMoments& moments, const NetworkHistogram& hist,
                            int exact_k_max = 8);

// Squared error for one fixed permutation.
double permuted_ise(const BlockMoments& moments, const NetworkHistogram& hist,
                    const std::vector<int>& permutation);

enum class EstimatorKind { kOracle, kFitted };
EstimatorKind parse_estimator(const std::string& name);
std::string to_string(EstimatorKind kind);

struct MiseOptions {
  EstimatorKind estimator = EstimatorKind::kOracle;
  int exact_k_max = 8;
  int threads = 0;  // 0 means hardware concurrency
  // Search settings for the fitted estimator; its seed is replaced per
  // replicate.
  SearchConfig search;
};

struct MiseResult {
  double mise_hat = 0.0;
  double std_err = 0.0;
  int replicates = 0;
  // Heuristic if any replicate fell back to heuristic alignment.
  AlignmentMethod method = AlignmentMethod::kExact;
  std::vector<double> ise;  // per replicate
};

// Monte Carlo mean of the aligned ISE over seeded replicates. Each replicate
// r draws a fresh (graph, xi) from a seed derived from (seed, r), so the
// result does not depend on the thread count.
MiseResult mise_monte_carlo(const Graphon& f, const SparsitySchedule& schedule, int n,
                            int h, int replicates, uint64_t seed,
                            const MiseOptions& options = {});

// Moment bounds for one oracle bin (a, b are 1-based).
struct Prop1Bounds {
  double mean_bound = 0.0;  // rho M (2n)^(-alpha/2)
  double var_center = 0.0;  // (rho f̄ - rho² f̄²) / h²_ab
  double var_bound = 0.0;   // rho M / (h²_ab (2n)^(alpha/2)) + rho² M² (2n)^(-alpha)
  double f_bar = 0.0;
  double f_sq_bar = 0.0;
  int64_t pairs = 0;  // h²_ab
};
Prop1Bounds prop1_bounds(const Graphon& f, double rho, int n, int h, int a, int b);

// Grid sums against block integrals (a, b are 1-based). The grid averages
// use points (i/(n+1), j/(n+1)) over the rank pairs feeding bin (a, b).
struct QuadratureBounds {
  double f_tilde = 0.0;
  double f_sq_tilde = 0.0;
  double f_bar = 0.0;
  double f_sq_bar = 0.0;
  double oscillation = 0.0;  // block average of |f - f̄|²
  double linear_gap_bound = 0.0;
  double square_gap_bound = 0.0;
  double local_osc_bound = 0.0;
};
QuadratureBounds lemma_quadrature_bounds(const Graphon& f, int n, int h, int a, int b);

// |E A_(i)(j) - rho f(i_n, j_n)| bound for ordered latent positions.
double ordered_entry_bound(const Graphon& f, double rho, int n);

}  // namespace nethist

#endif  // NETHIST_ORACLE_H_

#ifndef NETHIST_OPTIMIZER_H_
#define NETHIST_OPTIMIZER_H_

#include <cstdint>
#include <span>
#include <vector>

#include "nethist/graph.h"
#include "nethist/histogram.h"
#include "nethist/random.h"

namespace nethist {

struct SearchConfig {
  int restarts = 300;
  // Consecutive non-improving proposals that end a greedy run; 0 means 5·n.
  int64_t stall_limit = 0;
  int perturb_rounds = 20;
  int perturb_pairs_max = 100;
  double triple_proportion = 0.2;
  double top_fraction_inspected = 0.05;
  uint64_t seed = 0;
  // Worker threads for the restart phase; 0 means hardware concurrency.
  int threads = 0;

  void validate() const;
};

struct FitResult {
  NetworkHistogram best;
  std::vector<double> history;        // final log-likelihood of each restart
  std::vector<int> top_restarts;      // indices of the inspected top fraction
  std::vector<double> perturb_history;  // incumbent after each perturb round
  int64_t proposals_evaluated = 0;
  // Log-likelihood accumulated from incremental deltas along the winning
  // search path, before the final from-scratch recomputation.
  double tracked_log_likelihood = 0.0;
  uint64_t seed = 0;
};

// Uniformly random member of Z_k: a random shuffle of the contiguous labels.
Assignment random_assignment(int n, int h, uint64_t seed);

// A node moving to a new group.
struct Move {
  int node;
  int to;
};

// Incrementally maintained block edge counts for one assignment. Group sizes
// never change, so the pair counts are fixed and only edge counts move.
class SearchState {
 public:
  SearchState(const Graph& g, const Assignment& z);

  const Assignment& assignment() const { return z_; }
  const std::vector<int>& labels() const { return labels_; }
  double log_likelihood() const { return log_likelihood_; }
  int64_t edges_in(int a, int b) const { return edge_counts_[a * k_ + b]; }

  // Change in log-likelihood if the moves were applied. The moves must keep
  // every group size fixed (a swap or a cyclic rotation).
  double delta(std::span<const Move> moves);
  // Applies moves whose delta has just been computed by delta().
  void apply(std::span<const Move> moves, double delta_value);

  double swap_delta(int i, int j);
  void swap(int i, int j);

  // Recomputes the log-likelihood from the edge counts.
  double recompute_log_likelihood() const;

  Assignment snapshot() const;

 private:
  int new_label(std::span<const Move> moves, int node) const;
  void touch(int a, int b, int change);

  const Graph* graph_;
  Bandwidth bw_;
  Assignment z_;
  int k_;
  std::vector<int> labels_;
  std::vector<int64_t> edge_counts_;  // symmetric k×k
  double log_likelihood_ = 0.0;
  // Scratch for delta(): pending changes keyed by (min, max) bin.
  std::vector<int64_t> pending_;
  std::vector<int> touched_;
};

// Delta log-likelihood of exchanging the groups of nodes i and j (z_i != z_j),
// computed from block statistics in O(k + deg(i) + deg(j)).
double swap_delta(const Graph& g, const NetworkHistogram& hist, int i, int j);

// Greedy strictly-improving local search from the state's current
// assignment. Returns the number of proposals evaluated.
int64_t greedy_search(SearchState& state, Rng& rng, int64_t stall_limit,
                      double triple_proportion);

FitResult fit(const Graph& g, int h, const SearchConfig& config = {});

// Exact maximizer over Z_k by enumerating assignments up to relabeling of
// interchangeable groups. Throws if that space exceeds max_space.
Assignment brute_force_fit(const Graph& g, int h, int64_t max_space = 1'000'000);

// Number of distinct partitions brute_force_fit would enumerate (saturates at
// INT64_MAX).
int64_t assignment_space_size(int n, int h);

}  // namespace nethist

#endif  // NETHIST_OPTIMIZER_H_

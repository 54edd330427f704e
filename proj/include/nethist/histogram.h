#ifndef NETHIST_HISTOGRAM_H_
#define NETHIST_HISTOGRAM_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "nethist/graph.h"

namespace nethist {

// n = h·k + r with k = floor(n / h) and 0 <= r < h.
struct Bandwidth {
  int n = 0;
  int h = 0;
  int k = 0;
  int r = 0;

  static Bandwidth make(int n, int h);

  // Size of group a (0-based): h, or h + r for the last group.
  int group_size(int a) const { return a == k - 1 ? h + r : h; }
  // Number of unordered node pairs in bin (a, b).
  int64_t pair_count(int a, int b) const;

  friend bool operator==(const Bandwidth&, const Bandwidth&) = default;
};

// Group labels 0..k-1 (label k-1 is the size-(h+r) group). Construction
// enforces the group-size constraints.
class Assignment {
 public:
  Assignment() = default;
  Assignment(Bandwidth bandwidth, std::vector<int> labels);

  // Canonical contiguous labeling (0,…,0,1,…,1,…,k-1,…,k-1).
  static Assignment contiguous(Bandwidth bandwidth);
  // From 1-based labels as used in files.
  static Assignment from_one_based(Bandwidth bandwidth, std::span<const int> labels);

  const Bandwidth& bandwidth() const { return bandwidth_; }
  const std::vector<int>& labels() const { return labels_; }
  int operator[](int node) const { return labels_[node]; }
  int size() const { return static_cast<int>(labels_.size()); }

  friend bool operator==(const Assignment&, const Assignment&) = default;

 private:
  Bandwidth bandwidth_;
  std::vector<int> labels_;
};

// Fitted blockmodel with equal-size bins. Matrices are k×k, row-major and
// symmetric; edge_counts and pair_counts are the sufficient statistics.
struct NetworkHistogram {
  Bandwidth bandwidth;
  Assignment assignment;
  std::vector<int64_t> edge_counts;
  std::vector<int64_t> pair_counts;
  std::vector<double> bin_heights;
  double rho_hat = 0.0;
  // Multiplier applied to bin heights by fhat(): the generalized inverse of
  // rho_hat for a fitted histogram, 1 / rho_n for the oracle estimator.
  double scale = 0.0;
  double log_likelihood = 0.0;

  int k() const { return bandwidth.k; }
  double height(int a, int b) const { return bin_heights[a * bandwidth.k + b]; }
  int64_t edges_in(int a, int b) const { return edge_counts[a * bandwidth.k + b]; }

  // Estimate at (x, y) in (0,1)^2.
  double fhat(double x, double y) const;
};

// 1/x for x > 0, else 0.
inline double generalized_inverse(double x) { return x > 0.0 ? 1.0 / x : 0.0; }

NetworkHistogram bin_heights(const Graph& g, const Assignment& z);

double evaluate_fhat(const NetworkHistogram& hist, double x, double y);

// Bin index (1-based) containing coordinate t: min(ceil(n t / h), k).
int bin_index(const Bandwidth& bw, double t);

// Bernoulli log-likelihood contribution of one bin with e edges among m
// pairs at its maximum-likelihood height e/m; 0·log 0 is taken as 0.
double bin_log_likelihood(int64_t e, int64_t m);

double log_likelihood(const Graph& g, const Assignment& z);
double log_likelihood(const NetworkHistogram& hist);

// Log-likelihood divided by (n choose 2)·rho_hat.
double normalized_log_likelihood(const Graph& g, const Assignment& z);
double normalized_log_likelihood(const NetworkHistogram& hist);

// JSON {h, k, r, rho_hat, bin_heights, z (1-based), log_likelihood,
// normalized_log_likelihood}.
nlohmann::json histogram_to_json(const NetworkHistogram& hist);

// k×k CSV with a header row of bin indices; optionally square-rooted, and
// optionally with rows and columns reordered (order[i] = bin shown i-th).
std::string matrix_csv(std::span<const double> values, int k, bool sqrt_transform,
                       std::span<const int> order = {});

}  // namespace nethist

#endif  // NETHIST_HISTOGRAM_H_

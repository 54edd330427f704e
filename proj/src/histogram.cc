#include "nethist/histogram.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nethist/error.h"
#include "nethist/format.h"

namespace nethist {

Bandwidth Bandwidth::make(int n, int h) {
  if (n < 1) throw ConfigError("bandwidth needs n >= 1");
  if (h < 1 || h > n) {
    throw ConfigError("bandwidth h=" + std::to_string(h) + " outside [1, " +
                      std::to_string(n) + "]");
  }
  return {n, h, n / h, n % h};
}

int64_t Bandwidth::pair_count(int a, int b) const {
  const int64_t sa = group_size(a);
  if (a == b) return sa * (sa - 1) / 2;
  return sa * group_size(b);
}

Assignment::Assignment(Bandwidth bandwidth, std::vector<int> labels)
    : bandwidth_(bandwidth), labels_(std::move(labels)) {
  if (static_cast<int>(labels_.size()) != bandwidth_.n) {
    throw ConfigError("assignment length does not match n");
  }
  std::vector<int> sizes(bandwidth_.k, 0);
  for (int label : labels_) {
    if (label < 0 || label >= bandwidth_.k) {
      throw ConfigError("group label out of range");
    }
    ++sizes[label];
  }
  for (int a = 0; a < bandwidth_.k; ++a) {
    if (sizes[a] != bandwidth_.group_size(a)) {
      throw ConfigError("group " + std::to_string(a + 1) + " has " +
                        std::to_string(sizes[a]) + " members, expected " +
                        std::to_string(bandwidth_.group_size(a)));
    }
  }
}

Assignment Assignment::contiguous(Bandwidth bandwidth) {
  std::vector<int> labels(bandwidth.n);
  for (int i = 0; i < bandwidth.n; ++i) {
    labels[i] = std::min(i / bandwidth.h, bandwidth.k - 1);
  }
  return Assignment(bandwidth, std::move(labels));
}

Assignment Assignment::from_one_based(Bandwidth bandwidth, std::span<const int> labels) {
  std::vector<int> zero_based(labels.begin(), labels.end());
  for (int& l : zero_based) --l;
  return Assignment(bandwidth, std::move(zero_based));
}

double bin_log_likelihood(int64_t e, int64_t m) {
  if (e <= 0 || e >= m) return 0.0;
  const double p = static_cast<double>(e) / static_cast<double>(m);
  return static_cast<double>(e) * std::log(p) +
         static_cast<double>(m - e) * std::log1p(-p);
}

NetworkHistogram bin_heights(const Graph& g, const Assignment& z) {
  const Bandwidth& bw = z.bandwidth();
  if (bw.n != g.num_nodes()) throw ConfigError("assignment does not match graph size");
  const int k = bw.k;
  NetworkHistogram hist;
  hist.bandwidth = bw;
  hist.assignment = z;
  hist.edge_counts.assign(static_cast<size_t>(k) * k, 0);
  hist.pair_counts.assign(static_cast<size_t>(k) * k, 0);
  hist.bin_heights.assign(static_cast<size_t>(k) * k, 0.0);
  for (int i = 0; i < g.num_nodes(); ++i) {
    for (int j : g.neighbors(i)) {
      if (j <= i) continue;
      const int a = z[i], b = z[j];
      ++hist.edge_counts[a * k + b];
      if (a != b) ++hist.edge_counts[b * k + a];
    }
  }
  double ll = 0.0;
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) {
      const int64_t m = bw.pair_count(a, b);
      hist.pair_counts[a * k + b] = m;
      const int64_t e = hist.edge_counts[a * k + b];
      hist.bin_heights[a * k + b] = m > 0 ? static_cast<double>(e) / m : 0.0;
      if (a <= b) ll += bin_log_likelihood(e, m);
    }
  }
  hist.log_likelihood = ll;
  hist.rho_hat = bw.n >= 2 ? estimate_density(g) : 0.0;
  hist.scale = generalized_inverse(hist.rho_hat);
  return hist;
}

int bin_index(const Bandwidth& bw, double t) {
  const double raw = std::ceil(static_cast<double>(bw.n) * t / bw.h);
  const int idx = static_cast<int>(std::max(1.0, raw));
  return std::min(idx, bw.k);
}

double NetworkHistogram::fhat(double x, double y) const {
  if (!(x > 0.0 && x < 1.0 && y > 0.0 && y < 1.0)) {
    throw ConfigError("fhat is defined on the open unit square");
  }
  const int a = bin_index(bandwidth, x) - 1;
  const int b = bin_index(bandwidth, y) - 1;
  return scale * height(a, b);
}

double evaluate_fhat(const NetworkHistogram& hist, double x, double y) {
  return hist.fhat(x, y);
}

double log_likelihood(const Graph& g, const Assignment& z) {
  return bin_heights(g, z).log_likelihood;
}

double log_likelihood(const NetworkHistogram& hist) { return hist.log_likelihood; }

double normalized_log_likelihood(const NetworkHistogram& hist) {
  const double n = hist.bandwidth.n;
  const double dof = n * (n - 1.0) / 2.0 * hist.rho_hat;
  if (!(dof > 0.0)) {
    throw NumericalError("normalized log-likelihood undefined for an edgeless graph");
  }
  return hist.log_likelihood / dof;
}

double normalized_log_likelihood(const Graph& g, const Assignment& z) {
  return normalized_log_likelihood(bin_heights(g, z));
}

nlohmann::json histogram_to_json(const NetworkHistogram& hist) {
  const int k = hist.k();
  nlohmann::json rows = nlohmann::json::array();
  for (int a = 0; a < k; ++a) {
    nlohmann::json row = nlohmann::json::array();
    for (int b = 0; b < k; ++b) row.push_back(round_sig(hist.height(a, b)));
    rows.push_back(std::move(row));
  }
  nlohmann::json z = nlohmann::json::array();
  for (int label : hist.assignment.labels()) z.push_back(label + 1);
  nlohmann::json out;
  out["h"] = hist.bandwidth.h;
  out["k"] = k;
  out["r"] = hist.bandwidth.r;
  out["rho_hat"] = round_sig(hist.rho_hat);
  out["bin_heights"] = std::move(rows);
  out["z"] = std::move(z);
  out["log_likelihood"] = round_sig(hist.log_likelihood);
  if (hist.rho_hat > 0.0) {
    out["normalized_log_likelihood"] = round_sig(normalized_log_likelihood(hist));
  } else {
    out["normalized_log_likelihood"] = nullptr;
  }
  return out;
}

std::string matrix_csv(std::span<const double> values, int k, bool sqrt_transform,
                       std::span<const int> order) {
  std::vector<int> idx(k);
  for (int a = 0; a < k; ++a) idx[a] = order.empty() ? a : order[a];
  std::ostringstream out;
  out << "bin";
  for (int b = 0; b < k; ++b) out << ',' << idx[b] + 1;
  out << '\n';
  for (int a = 0; a < k; ++a) {
    out << idx[a] + 1;
    for (int b = 0; b < k; ++b) {
      double v = values[static_cast<size_t>(idx[a]) * k + idx[b]];
      if (sqrt_transform) v = std::sqrt(v);
      out << ',' << format_number(v);
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace nethist

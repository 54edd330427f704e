#include "nethist/oracle.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include "nethist/error.h"

namespace nethist {

namespace {

constexpr uint64_t kTagReplicate = 11;
constexpr uint64_t kTagReplicateFit = 12;

}  // namespace

void OracleContext::validate(int n) const {
  if (static_cast<int>(xi.xi.size()) != n) {
    throw ConfigError("latent vector has " + std::to_string(xi.xi.size()) +
                      " entries for a graph on " + std::to_string(n) + " nodes");
  }
  if (!(rho_n > 0.0) || rho_n * f.sup > 1.0 + 1e-12) {
    throw ConfigError("oracle density scale must satisfy 0 < rho_n sup f <= 1");
  }
}

Assignment oracle_labeling(const LatentSample& xi, int h) {
  const int n = static_cast<int>(xi.xi.size());
  const Bandwidth bw = Bandwidth::make(n, h);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return xi.xi[a] < xi.xi[b]; });
  std::vector<int> labels(n);
  for (int rank = 1; rank <= n; ++rank) {
    labels[order[rank - 1]] = std::min((rank + h - 1) / h, bw.k) - 1;
  }
  return Assignment(bw, std::move(labels));
}

NetworkHistogram oracle_estimator(const Graph& g, const OracleContext& ctx, int h) {
  ctx.validate(g.num_nodes());
  NetworkHistogram hist = bin_heights(g, oracle_labeling(ctx.xi, h));
  hist.scale = 1.0 / ctx.rho_n;
  return hist;
}

BlockMoments block_moments(const Graphon& f, const Bandwidth& bw,
                           const QuadratureOptions& options) {
  const int k = bw.k;
  BlockMoments m;
  m.k = k;
  m.mean.assign(static_cast<size_t>(k) * k, 0.0);
  m.mean_sq.assign(m.mean.size(), 0.0);
  m.area.assign(m.mean.size(), 0.0);
  for (int a = 0; a < k; ++a) {
    for (int b = a; b < k; ++b) {
      const BlockAverage avg = block_average(f, a + 1, b + 1, bw.h, bw.n, options);
      for (int idx : {a * k + b, b * k + a}) {
        m.mean[idx] = avg.mean;
        m.mean_sq[idx] = avg.mean_sq;
        m.area[idx] = avg.area;
      }
    }
  }
  return m;
}

std::string to_string(AlignmentMethod method) {
  return method == AlignmentMethod::kExact ? "exact" : "heuristic";
}

namespace {

class IseEvaluator {
 public:
  IseEvaluator(const BlockMoments& moments, const NetworkHistogram& hist)
      : m_(moments), hist_(hist), k_(hist.k()) {
    if (moments.k != k_) throw ConfigError("block moments do not match histogram size");
  }

  int k() const { return k_; }

  double cell(const std::vector<int>& perm, int a, int b) const {
    const size_t idx = static_cast<size_t>(a) * k_ + b;
    const double v = hist_.scale * hist_.height(perm[a], perm[b]);
    return m_.area[idx] * (m_.mean_sq[idx] - 2.0 * v * m_.mean[idx] + v * v);
  }

  double total(const std::vector<int>& perm) const {
    double s = 0.0;
    for (int a = 0; a < k_; ++a) {
      for (int b = 0; b < k_; ++b) s += cell(perm, a, b);
    }
    return s;
  }

  // Sum over the cells in rows or columns p and q.
  double cross(const std::vector<int>& perm, int p, int q) const {
    double s = 0.0;
    for (int j = 0; j < k_; ++j) {
      s += cell(perm, p, j) + cell(perm, q, j);
      if (j != p && j != q) s += cell(perm, j, p) + cell(perm, j, q);
    }
    return s;
  }

  // Pairwise-exchange descent; returns the final total.
  double descend(std::vector<int>& perm) const {
    double current = total(perm);
    bool improved = true;
    while (improved) {
      improved = false;
      for (int p = 0; p < k_; ++p) {
        for (int q = p + 1; q < k_; ++q) {
          const double before = cross(perm, p, q);
          std::swap(perm[p], perm[q]);
          const double after = cross(perm, p, q);
          if (after < before - 1e-14 * std::max(1.0, std::abs(current))) {
            current += after - before;
            improved = true;
          } else {
            std::swap(perm[p], perm[q]);
          }
        }
      }
    }
    return total(perm);
  }

 private:
  const BlockMoments& m_;
  const NetworkHistogram& hist_;
  int k_;
};

std::vector<int> marginal_rank_order(const std::vector<double>& weights,
                                     const std::vector<double>& values, int k) {
  std::vector<double> marginal(k, 0.0);
  for (int a = 0; a < k; ++a) {
    double w = 0.0, s = 0.0;
    for (int b = 0; b < k; ++b) {
      w += weights[a * k + b];
      s += weights[a * k + b] * values[a * k + b];
    }
    marginal[a] = w > 0.0 ? s / w : 0.0;
  }
  std::vector<int> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return marginal[a] < marginal[b]; });
  return order;
}

}  // namespace

double permuted_ise(const BlockMoments& moments, const NetworkHistogram& hist,
                    const std::vector<int>& permutation) {
  return std::max(0.0, IseEvaluator(moments, hist).total(permutation));
}

AlignmentResult aligned_ise(const BlockMoments& moments, const NetworkHistogram& hist,
                            int exact_k_max) {
  const IseEvaluator eval(moments, hist);
  const int k = eval.k();
  std::vector<int> identity(k);
  std::iota(identity.begin(), identity.end(), 0);

  AlignmentResult result;
  result.unaligned_l2_sq = std::max(0.0, eval.total(identity));
  result.permutation = identity;
  result.l2_sq = eval.total(identity);

  if (k <= exact_k_max) {
    result.method = AlignmentMethod::kExact;
    std::vector<int> perm = identity;
    while (std::next_permutation(perm.begin(), perm.end())) {
      const double v = eval.total(perm);
      if (v < result.l2_sq) {
        result.l2_sq = v;
        result.permutation = perm;
      }
    }
  } else {
    result.method = AlignmentMethod::kHeuristic;
    std::vector<int> from_identity = identity;
    const double v_identity = eval.descend(from_identity);
    if (v_identity < result.l2_sq) {
      result.l2_sq = v_identity;
      result.permutation = from_identity;
    }
    // Match blocks of f and bins of the histogram by their marginal means.
    std::vector<double> hist_weights(static_cast<size_t>(k) * k);
    for (int a = 0; a < k; ++a) {
      for (int b = 0; b < k; ++b) {
        hist_weights[a * k + b] = static_cast<double>(hist.pair_counts[a * k + b]);
      }
    }
    const std::vector<int> f_order = marginal_rank_order(moments.area, moments.mean, k);
    const std::vector<int> h_order = marginal_rank_order(hist_weights, hist.bin_heights, k);
    std::vector<int> seeded(k);
    for (int t = 0; t < k; ++t) seeded[f_order[t]] = h_order[t];
    const double v_seeded = eval.descend(seeded);
    if (v_seeded < result.l2_sq) {
      result.l2_sq = v_seeded;
      result.permutation = seeded;
    }
  }
  result.l2_sq = std::max(0.0, result.l2_sq);
  return result;
}

AlignmentResult aligned_ise(const Graphon& f, const NetworkHistogram& hist, int exact_k_max) {
  return aligned_ise(block_moments(f, hist.bandwidth), hist, exact_k_max);
}

EstimatorKind parse_estimator(const std::string& name) {
  if (name == "oracle") return EstimatorKind::kOracle;
  if (name == "fitted") return EstimatorKind::kFitted;
  throw ConfigError("estimator must be 'oracle' or 'fitted', got '" + name + "'");
}

std::string to_string(EstimatorKind kind) {
  return kind == EstimatorKind::kOracle ? "oracle" : "fitted";
}

MiseResult mise_monte_carlo(const Graphon& f, const SparsitySchedule& schedule, int n,
                            int h, int replicates, uint64_t seed,
                            const MiseOptions& options) {
  if (replicates < 10) throw ConfigError("replicates must be at least 10");
  if (n < 2) throw ConfigError("n must be at least 2");
  const Bandwidth bw = Bandwidth::make(n, h);
  if (options.estimator == EstimatorKind::kFitted && h < 2) {
    throw ConfigError("the fitted estimator needs h >= 2");
  }
  const double rho = schedule.rho(n);
  const BlockMoments moments = block_moments(f, bw);

  std::vector<double> ise(replicates, 0.0);
  std::vector<char> heuristic(replicates, 0);
  int threads = options.threads > 0
                    ? options.threads
                    : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, replicates);

  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto worker = [&]() {
    for (int r = next++; r < replicates && !failed; r = next++) {
      try {
        const SampledGraph s = sample_graph(f, schedule, n, derive_seed(seed, kTagReplicate, r));
        NetworkHistogram hist;
        if (options.estimator == EstimatorKind::kOracle) {
          hist = oracle_estimator(s.graph, OracleContext{s.latent, rho, f}, h);
        } else {
          SearchConfig cfg = options.search;
          cfg.seed = derive_seed(seed, kTagReplicateFit, r);
          if (threads > 1) cfg.threads = 1;
          hist = fit(s.graph, h, cfg).best;
        }
        const AlignmentResult aligned = aligned_ise(moments, hist, options.exact_k_max);
        ise[r] = aligned.l2_sq;
        heuristic[r] = aligned.method == AlignmentMethod::kHeuristic;
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  MiseResult out;
  out.replicates = replicates;
  out.ise = ise;
  const double mean = std::accumulate(ise.begin(), ise.end(), 0.0) / replicates;
  double ss = 0.0;
  for (double v : ise) ss += (v - mean) * (v - mean);
  out.mise_hat = mean;
  out.std_err = std::sqrt(ss / (replicates - 1) / replicates);
  out.method = std::any_of(heuristic.begin(), heuristic.end(), [](char c) { return c != 0; })
                   ? AlignmentMethod::kHeuristic
                   : AlignmentMethod::kExact;
  return out;
}

namespace {

void check_block(const Bandwidth& bw, int a, int b) {
  if (a < 1 || a > bw.k || b < 1 || b > bw.k) {
    throw ConfigError("block (" + std::to_string(a) + ", " + std::to_string(b) +
                      ") outside 1.." + std::to_string(bw.k));
  }
}

double holder_constant(const Graphon& f) {
  return f.holder ? f.M : std::numeric_limits<double>::infinity();
}

}  // namespace

Prop1Bounds prop1_bounds(const Graphon& f, double rho, int n, int h, int a, int b) {
  const Bandwidth bw = Bandwidth::make(n, h);
  check_block(bw, a, b);
  const BlockAverage avg = block_average(f, a, b, h, n);
  const double M = holder_constant(f);
  const double alpha = f.alpha;
  const double two_n = 2.0 * n;
  Prop1Bounds out;
  out.pairs = bw.pair_count(a - 1, b - 1);
  out.f_bar = avg.mean;
  out.f_sq_bar = avg.mean_sq;
  const double pairs = static_cast<double>(out.pairs);
  out.mean_bound = rho * M * std::pow(two_n, -alpha / 2.0);
  out.var_center = (rho * avg.mean - rho * rho * avg.mean_sq) / pairs;
  out.var_bound = rho * M / (pairs * std::pow(two_n, alpha / 2.0)) +
                  rho * rho * M * M * std::pow(two_n, -alpha);
  return out;
}

QuadratureBounds lemma_quadrature_bounds(const Graphon& f, int n, int h, int a, int b) {
  const Bandwidth bw = Bandwidth::make(n, h);
  check_block(bw, a, b);
  auto first_rank = [&](int g) { return (g - 1) * h + 1; };
  auto last_rank = [&](int g) { return g == bw.k ? n : g * h; };
  const double scale = 1.0 / (n + 1.0);
  double s = 0.0, s_sq = 0.0;
  int64_t count = 0;
  for (int i = first_rank(a); i <= last_rank(a); ++i) {
    const int j_start = a == b ? i + 1 : first_rank(b);
    for (int j = j_start; j <= last_rank(b); ++j) {
      const double v = f(i * scale, j * scale);
      s += v;
      s_sq += v * v;
      ++count;
    }
  }
  const BlockAverage avg = block_average(f, a, b, h, n);
  QuadratureBounds out;
  out.f_tilde = count > 0 ? s / count : 0.0;
  out.f_sq_tilde = count > 0 ? s_sq / count : 0.0;
  out.f_bar = avg.mean;
  out.f_sq_bar = avg.mean_sq;
  const Rect region = block_region(n, h, a, b);
  const double f_bar = avg.mean;
  out.oscillation = integrate_rect_piecewise(
                        [&](double x, double y) {
                          const double d = f(x, y) - f_bar;
                          return d * d;
                        },
                        region, f.cuts) /
                    region.area();

  const double M = holder_constant(f);
  const double alpha = f.alpha;
  const double two_alpha = std::pow(2.0, alpha);
  out.linear_gap_bound = M * std::pow(2.0, alpha / 2.0) * std::pow(n, -alpha) *
                         (1.0 + (a == b ? two_alpha : 0.0));
  out.square_gap_bound = 2.0 * f.sup * out.linear_gap_bound;
  const bool edge_block = a == bw.k || b == bw.k;
  out.local_osc_bound = M * M * two_alpha * std::pow(static_cast<double>(h) / n, 2.0 * alpha) *
                        (1.0 + (edge_block ? two_alpha * two_alpha : 0.0));
  return out;
}

double ordered_entry_bound(const Graphon& f, double rho, int n) {
  return rho * holder_constant(f) * std::pow(2.0 * (n + 2.0), -f.alpha / 2.0);
}

}  // namespace nethist

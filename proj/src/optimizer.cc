#include "nethist/optimizer.h"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include "nethist/error.h"

namespace nethist {

namespace {

constexpr uint64_t kTagInit = 1;
constexpr uint64_t kTagRestart = 2;
constexpr uint64_t kTagPerturb = 3;

// Proposals must beat this to be accepted; absorbs rounding in the deltas.
constexpr double kImprovementTol = 1e-9;

int moved_label(std::span<const Move> moves, std::span<const int> labels, int node) {
  for (const Move& m : moves) {
    if (m.node == node) return m.to;
  }
  return labels[node];
}

bool is_moved(std::span<const Move> moves, int node) {
  for (const Move& m : moves) {
    if (m.node == node) return true;
  }
  return false;
}

// Calls emit(a, b, change) for every edge whose bin changes under the moves,
// once with the old bin (-1) and once with the new (+1). Edges between two
// moved nodes are visited once.
template <typename Emit>
void for_each_bin_change(const Graph& g, std::span<const int> labels,
                         std::span<const Move> moves, Emit&& emit) {
  for (const Move& m : moves) {
    const int u = m.node;
    const int new_u = m.to;
    const int old_u = labels[u];
    for (int v : g.neighbors(u)) {
      const bool v_moved = is_moved(moves, v);
      if (v_moved && v < u) continue;
      const int old_v = labels[v];
      const int new_v = v_moved ? moved_label(moves, labels, v) : old_v;
      const auto old_key = std::minmax(old_u, old_v);
      const auto new_key = std::minmax(new_u, new_v);
      if (old_key == new_key) continue;
      emit(old_key.first, old_key.second, -1);
      emit(new_key.first, new_key.second, +1);
    }
  }
}

void check_moves(std::span<const Move> moves, std::span<const int> labels) {
  // Size preservation: the multiset of source groups equals that of targets.
  constexpr size_t kSmall = 8;
  if (moves.size() <= kSmall) {
    std::array<int, kSmall> from{}, to{};
    for (size_t m = 0; m < moves.size(); ++m) {
      from[m] = labels[moves[m].node];
      to[m] = moves[m].to;
    }
    std::sort(from.begin(), from.begin() + moves.size());
    std::sort(to.begin(), to.begin() + moves.size());
    if (!std::equal(from.begin(), from.begin() + moves.size(), to.begin())) {
      throw ConfigError("moves must preserve group sizes");
    }
    return;
  }
  std::vector<int> from, to;
  for (const Move& m : moves) {
    from.push_back(labels[m.node]);
    to.push_back(m.to);
  }
  std::sort(from.begin(), from.end());
  std::sort(to.begin(), to.end());
  if (from != to) throw ConfigError("moves must preserve group sizes");
}

}  // namespace

void SearchConfig::validate() const {
  if (restarts < 1) throw ConfigError("restarts must be positive");
  if (stall_limit < 0) throw ConfigError("stall_limit must be non-negative");
  if (perturb_rounds < 0) throw ConfigError("perturb_rounds must be non-negative");
  if (perturb_pairs_max < 1) throw ConfigError("perturb_pairs_max must be positive");
  if (!(triple_proportion >= 0.0 && triple_proportion <= 1.0)) {
    throw ConfigError("triple_proportion must lie in [0, 1]");
  }
  if (!(top_fraction_inspected > 0.0 && top_fraction_inspected <= 1.0)) {
    throw ConfigError("top_fraction_inspected must lie in (0, 1]");
  }
  if (threads < 0) throw ConfigError("threads must be non-negative");
}

Assignment random_assignment(int n, int h, uint64_t seed) {
  if (h < 2 || h > n) {
    throw ConfigError("bandwidth h=" + std::to_string(h) + " outside [2, n]");
  }
  const Bandwidth bw = Bandwidth::make(n, h);
  std::vector<int> labels = Assignment::contiguous(bw).labels();
  Rng rng(seed);
  for (int i = n - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.below(static_cast<uint64_t>(i) + 1));
    std::swap(labels[i], labels[j]);
  }
  return Assignment(bw, std::move(labels));
}

SearchState::SearchState(const Graph& g, const Assignment& z)
    : graph_(&g), bw_(z.bandwidth()), z_(z), k_(z.bandwidth().k), labels_(z.labels()) {
  if (bw_.n != g.num_nodes()) throw ConfigError("assignment does not match graph size");
  edge_counts_.assign(static_cast<size_t>(k_) * k_, 0);
  for (int i = 0; i < g.num_nodes(); ++i) {
    for (int j : g.neighbors(i)) {
      if (j <= i) continue;
      const int a = labels_[i], b = labels_[j];
      ++edge_counts_[a * k_ + b];
      if (a != b) ++edge_counts_[b * k_ + a];
    }
  }
  pending_.assign(static_cast<size_t>(k_) * k_, 0);
  log_likelihood_ = recompute_log_likelihood();
}

double SearchState::recompute_log_likelihood() const {
  double ll = 0.0;
  for (int a = 0; a < k_; ++a) {
    for (int b = a; b < k_; ++b) {
      ll += bin_log_likelihood(edge_counts_[a * k_ + b], bw_.pair_count(a, b));
    }
  }
  return ll;
}

int SearchState::new_label(std::span<const Move> moves, int node) const {
  return moved_label(moves, labels_, node);
}

void SearchState::touch(int a, int b, int change) {
  int64_t& slot = pending_[a * k_ + b];
  if (slot == 0) touched_.push_back(a * k_ + b);
  slot += change;
}

double SearchState::delta(std::span<const Move> moves) {
  check_moves(moves, labels_);
  touched_.clear();
  for_each_bin_change(*graph_, labels_, moves,
                      [this](int a, int b, int change) { touch(a, b, change); });
  double d = 0.0;
  for (int key : touched_) {
    const int64_t change = pending_[key];
    pending_[key] = 0;
    if (change == 0) continue;
    const int a = key / k_, b = key % k_;
    const int64_t e = edge_counts_[key];
    const int64_t m = bw_.pair_count(a, b);
    d += bin_log_likelihood(e + change, m) - bin_log_likelihood(e, m);
  }
  return d;
}

void SearchState::apply(std::span<const Move> moves, double delta_value) {
  for_each_bin_change(*graph_, labels_, moves, [this](int a, int b, int change) {
    edge_counts_[a * k_ + b] += change;
    if (a != b) edge_counts_[b * k_ + a] += change;
  });
  for (const Move& m : moves) labels_[m.node] = m.to;
  log_likelihood_ += delta_value;
}

double SearchState::swap_delta(int i, int j) {
  if (labels_[i] == labels_[j]) throw ConfigError("swap within one group is a no-op");
  const Move moves[2] = {{i, labels_[j]}, {j, labels_[i]}};
  return delta(moves);
}

void SearchState::swap(int i, int j) {
  if (labels_[i] == labels_[j]) throw ConfigError("swap within one group is a no-op");
  const Move moves[2] = {{i, labels_[j]}, {j, labels_[i]}};
  apply(moves, delta(moves));
}

Assignment SearchState::snapshot() const { return Assignment(bw_, labels_); }

double swap_delta(const Graph& g, const NetworkHistogram& hist, int i, int j) {
  const auto& labels = hist.assignment.labels();
  if (labels[i] == labels[j]) throw ConfigError("swap within one group is a no-op");
  const Move moves[2] = {{i, labels[j]}, {j, labels[i]}};
  check_moves(moves, labels);
  // Sparse accumulation over the touched bins only.
  std::vector<std::pair<int, int>> changes;  // (bin key, ±1)
  const int k = hist.k();
  for_each_bin_change(g, labels, moves, [&](int a, int b, int change) {
    changes.emplace_back(a * k + b, change);
  });
  std::sort(changes.begin(), changes.end());
  double d = 0.0;
  for (size_t p = 0; p < changes.size();) {
    const int key = changes[p].first;
    int64_t change = 0;
    for (; p < changes.size() && changes[p].first == key; ++p) change += changes[p].second;
    if (change == 0) continue;
    const int64_t e = hist.edge_counts[key];
    const int64_t m = hist.pair_counts[key];
    d += bin_log_likelihood(e + change, m) - bin_log_likelihood(e, m);
  }
  return d;
}

int64_t greedy_search(SearchState& state, Rng& rng, int64_t stall_limit,
                      double triple_proportion) {
  const auto& labels = state.labels();
  const int n = static_cast<int>(labels.size());
  const int k = state.assignment().bandwidth().k;
  if (k < 2) return 0;
  auto pick = [&]() { return static_cast<int>(rng.below(static_cast<uint64_t>(n))); };

  int64_t proposals = 0;
  int64_t stall = 0;
  Move moves[3];
  while (stall < stall_limit) {
    ++proposals;
    size_t count = 2;
    const int i = pick();
    int j = pick();
    while (labels[j] == labels[i]) j = pick();
    if (k >= 3 && triple_proportion > 0.0 && rng.uniform() < triple_proportion) {
      int l = pick();
      while (labels[l] == labels[i] || labels[l] == labels[j]) l = pick();
      // Rotation i -> group(j) -> group(l) -> group(i).
      moves[0] = {i, labels[j]};
      moves[1] = {j, labels[l]};
      moves[2] = {l, labels[i]};
      count = 3;
    } else {
      moves[0] = {i, labels[j]};
      moves[1] = {j, labels[i]};
    }
    std::span<const Move> proposal(moves, count);
    const double d = state.delta(proposal);
    if (d > kImprovementTol) {
      state.apply(proposal, d);
      stall = 0;
    } else {
      ++stall;
    }
  }
  return proposals;
}

FitResult fit(const Graph& g, int h, const SearchConfig& config) {
  config.validate();
  const int n = g.num_nodes();
  if (h < 2 || h > n) {
    throw ConfigError("bandwidth h=" + std::to_string(h) + " outside [2, n]");
  }
  const int64_t stall_limit = config.stall_limit > 0 ? config.stall_limit : 5LL * n;

  struct Outcome {
    std::vector<int> labels;
    double log_likelihood = 0.0;
    int64_t proposals = 0;
  };
  std::vector<Outcome> outcomes(config.restarts);
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int r = next++; r < config.restarts; r = next++) {
      SearchState state(g, random_assignment(n, h, derive_seed(config.seed, kTagInit, r)));
      Rng rng(derive_seed(config.seed, kTagRestart, r));
      const int64_t proposals =
          greedy_search(state, rng, stall_limit, config.triple_proportion);
      outcomes[r] = {state.labels(), state.log_likelihood(), proposals};
    }
  };
  int threads = config.threads > 0
                    ? config.threads
                    : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, config.restarts);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  FitResult result;
  result.seed = config.seed;
  std::vector<int> order(config.restarts);
  std::iota(order.begin(), order.end(), 0);
  for (const auto& o : outcomes) {
    result.history.push_back(o.log_likelihood);
    result.proposals_evaluated += o.proposals;
  }
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return outcomes[a].log_likelihood > outcomes[b].log_likelihood;
  });
  const int top = std::max(
      1, static_cast<int>(std::ceil(config.top_fraction_inspected * config.restarts - 1e-9)));
  result.top_restarts.assign(order.begin(), order.begin() + top);

  const Bandwidth bw = Bandwidth::make(n, h);
  Assignment incumbent(bw, outcomes[order.front()].labels);
  double incumbent_ll = outcomes[order.front()].log_likelihood;
  double tracked = incumbent_ll;

  for (int round = 0; round < config.perturb_rounds; ++round) {
    Rng rng(derive_seed(config.seed, kTagPerturb, round));
    SearchState state(g, incumbent);
    const auto& labels = state.labels();
    const int swaps = 1 + static_cast<int>(rng.below(config.perturb_pairs_max));
    if (bw.k >= 2) {
      for (int s = 0; s < swaps; ++s) {
        const int i = static_cast<int>(rng.below(n));
        int j = static_cast<int>(rng.below(n));
        while (labels[j] == labels[i]) j = static_cast<int>(rng.below(n));
        state.swap(i, j);
      }
    }
    result.proposals_evaluated +=
        greedy_search(state, rng, stall_limit, config.triple_proportion);
    if (state.log_likelihood() > incumbent_ll + kImprovementTol) {
      incumbent = state.snapshot();
      incumbent_ll = state.log_likelihood();
      tracked = incumbent_ll;
    }
    result.perturb_history.push_back(incumbent_ll);
  }

  result.best = bin_heights(g, incumbent);
  result.tracked_log_likelihood = tracked;
  return result;
}

int64_t assignment_space_size(int n, int h) {
  const Bandwidth bw = Bandwidth::make(n, h);
  const int interchangeable = bw.r == 0 ? bw.k : bw.k - 1;
  long double log_count = std::lgamma(static_cast<long double>(n) + 1);
  for (int a = 0; a < bw.k; ++a) {
    log_count -= std::lgamma(static_cast<long double>(bw.group_size(a)) + 1);
  }
  log_count -= std::lgamma(static_cast<long double>(interchangeable) + 1);
  if (log_count > std::log(static_cast<long double>(std::numeric_limits<int64_t>::max()))) {
    return std::numeric_limits<int64_t>::max();
  }
  return static_cast<int64_t>(std::llround(std::exp(log_count)));
}

namespace {

class Enumerator {
 public:
  Enumerator(const Graph& g, Bandwidth bw)
      : g_(g),
        bw_(bw),
        k_(bw.k),
        interchangeable_(bw.r == 0 ? bw.k : bw.k - 1),
        labels_(bw.n, -1),
        counts_(bw.k, 0),
        edges_(static_cast<size_t>(bw.k) * bw.k, 0) {}

  void run() { place(0, 0); }
  const std::vector<int>& best() const { return best_; }

 private:
  void place(int node, int opened) {
    if (node == bw_.n) {
      double ll = 0.0;
      for (int a = 0; a < k_; ++a) {
        for (int b = a; b < k_; ++b) {
          ll += bin_log_likelihood(edges_[a * k_ + b], bw_.pair_count(a, b));
        }
      }
      if (best_.empty() || ll > best_ll_) {
        best_ll_ = ll;
        best_ = labels_;
      }
      return;
    }
    for (int a = 0; a < k_; ++a) {
      if (counts_[a] >= bw_.group_size(a)) continue;
      const bool swappable = a < interchangeable_;
      // Interchangeable groups are opened in index order.
      if (swappable && a > opened) continue;
      assign(node, a, +1);
      place(node + 1, swappable && a == opened ? opened + 1 : opened);
      assign(node, a, -1);
    }
  }

  void assign(int node, int a, int sign) {
    labels_[node] = sign > 0 ? a : -1;
    counts_[a] += sign;
    for (int v : g_.neighbors(node)) {
      if (v >= node) break;  // neighbors are sorted; only earlier nodes are placed
      const int b = labels_[v];
      edges_[a * k_ + b] += sign;
      if (a != b) edges_[b * k_ + a] += sign;
    }
  }

  const Graph& g_;
  Bandwidth bw_;
  int k_;
  int interchangeable_;
  std::vector<int> labels_;
  std::vector<int> counts_;
  std::vector<int64_t> edges_;
  std::vector<int> best_;
  double best_ll_ = 0.0;
};

}  // namespace

Assignment brute_force_fit(const Graph& g, int h, int64_t max_space) {
  const int n = g.num_nodes();
  if (h < 2 || h > n) {
    throw ConfigError("bandwidth h=" + std::to_string(h) + " outside [2, n]");
  }
  const int64_t space = assignment_space_size(n, h);
  if (space > max_space) {
    throw NumericalError("assignment space of " + std::to_string(space) +
                         " partitions is too large to enumerate");
  }
  const Bandwidth bw = Bandwidth::make(n, h);
  Enumerator e(g, bw);
  e.run();
  return Assignment(bw, e.best());
}

}  // namespace nethist

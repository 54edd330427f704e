#include <cmath>

#include "doctest.h"
#include "helpers.h"
#include "nethist/bandwidth.h"
#include "nethist/error.h"
#include "nethist/graphon.h"

using namespace nethist;
using nlohmann::json;

namespace {

Graph regular_ring(int n, int half_degree) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < n; ++i)
    for (int s = 1; s <= half_degree; ++s) e.emplace_back(i, (i + s) % n);
  return Graph(n, e);
}

Graph sample(const std::string& family, const json& params, double rho, int n, uint64_t seed) {
  return sample_graph(builtin_graphon(family, params), SparsitySchedule::constant(rho), n, seed).graph;
}

}  // namespace

TEST_CASE("slope fit on exact data") {
  SUBCASE("regular graph") {
    const SlopeFit fit = degree_slope_fit(regular_ring(100, 3), 4.0);
    CHECK(fit.m_hat == 0.0);
    CHECK(fit.b_hat == 6.0);
    CHECK(fit.half_width == 40);
    CHECK(fit.center == 50);
  }
  SUBCASE("linear degrees") {
    for (int n : {100, 101, 400}) {
      std::vector<double> d(n);
      for (int i = 1; i <= n; ++i) d[n - i] = 2.0 * i;  // unsorted on purpose
      const SlopeFit fit = degree_slope_fit(d, 3.0);
      CHECK(fit.m_hat == doctest::Approx(2.0).epsilon(1e-12));
      CHECK(fit.b_hat == doctest::Approx(2.0 * (n / 2)).epsilon(1e-12));
    }
  }
  SUBCASE("window errors") {
    std::vector<double> d(100, 1.0);
    CHECK_THROWS_AS(degree_slope_fit(d, 6.0), ConfigError);   // 60 > 50
    CHECK_THROWS_AS(degree_slope_fit(d, 0.05), ConfigError);  // floor(0.5) = 0
    CHECK_THROWS_AS(degree_slope_fit(d, -1.0), ConfigError);
  }
}

TEST_CASE("rank-one coefficient") {
  CHECK(rank_one_coefficient(Graph(5, std::vector<std::pair<int, int>>{})) == 0.0);
  CHECK(rank_one_coefficient(testing_support::complete_graph(3)) == doctest::Approx(1.0 / 6.0));
  CHECK(degree_quadratic_form(testing_support::complete_graph(3)) == 24.0);
}

TEST_CASE("rank-one fit of a flat graphon recovers the constant") {
  const Graph g = sample("constant", json::object(), 0.5, 2000, 1);
  const double s = rank_one_coefficient(g);
  double sum = 0.0, sum_sq = 0.0;
  int count = 0;
  for (int i = 0; i < g.num_nodes(); i += 7) {
    for (int j = 0; j < g.num_nodes(); j += 11) {
      const double dev = s * g.degree(i) * g.degree(j) - 1.0;
      sum += dev;
      sum_sq += dev * dev;
      ++count;
    }
  }
  // The fit approximates A / rho_hat, i.e. f = 1, up to degree noise of
  // about 2% per factor.
  CHECK(std::abs(sum / count) < 0.01);
  CHECK(std::sqrt(sum_sq / count) < 0.05);
}

TEST_CASE("M2 estimates") {
  CHECK(estimate_M2(regular_ring(200, 4), 4.0) == 0.0);
  CHECK_THROWS_AS(select_bandwidth(regular_ring(200, 4), 4.0), NumericalError);
  CHECK(estimate_M2(sample("constant", json::object(), 0.5, 2000, 2), 4.0) < 0.05);
}

TEST_CASE("oracle bandwidth formula") {
  CHECK(oracle_h_star(0.5, 100, 1.0) == doctest::Approx(10.0).epsilon(1e-14));
  // Sparser graphs need wider bins; rougher graphons narrower ones.
  CHECK(oracle_h_star(1.0, 500, 0.05) > oracle_h_star(1.0, 500, 0.2));
  CHECK(oracle_h_star(2.0, 500, 0.1) < oracle_h_star(1.0, 500, 0.1));
}

TEST_CASE("both forms of the bandwidth agree") {
  for (const auto& [rho, seed] : std::vector<std::pair<double, uint64_t>>{{0.05, 1}, {0.2, 1}, {0.1, 7}}) {
    const Graph g = sample("exp", json{{"beta", 1.0}}, rho, 600, seed);
    const BandwidthSelection sel = select_bandwidth(g, 4.0);
    CHECK(sel.M2_hat > 0.0);
    CHECK(sel.h_star_alt == doctest::Approx(sel.h_star_raw).epsilon(1e-9));
    CHECK(sel.h_star_raw ==
          doctest::Approx(std::pow(2 * sel.M2_hat * sel.rho_hat, -0.25) * std::sqrt(600.0)).epsilon(1e-12));
    CHECK(sel.h >= 2);
    CHECK(sel.h <= 300);
    CHECK(sel.n == sel.h * sel.k + sel.r);
  }
}

TEST_CASE("bandwidth is invariant under node relabeling") {
  const Graph g = sample("exp", json{{"beta", 2.0}}, 0.1, 400, 3);
  Rng rng(8);
  const Graph p = g.permuted(testing_support::random_permutation(400, rng));
  CHECK(select_bandwidth(p, 4.0).h_star_raw == doctest::Approx(select_bandwidth(g, 4.0).h_star_raw).epsilon(1e-12));
}

TEST_CASE("rounding picks a divisor-friendly bandwidth") {
  CHECK(round_bandwidth(72.4, 1224) == 72);
  CHECK(round_bandwidth(73.9, 1224) == 72);
  CHECK(round_bandwidth(74.6, 1224) == 72);
  CHECK(round_bandwidth(69.3, 1122) == 66);
  CHECK(round_bandwidth(70.0, 1122) == 66);
  CHECK(round_bandwidth(10.0, 100) == 10);
  bool clamped = false;
  CHECK(round_bandwidth(80.0, 100, &clamped) == 50);
  CHECK(clamped);
  CHECK(round_bandwidth(0.4, 100, &clamped) == 2);
  CHECK(clamped);
  CHECK(round_bandwidth(9.5, 100, &clamped) == 10);
  CHECK_FALSE(clamped);
}

TEST_CASE("error bound plug-ins") {
  // Political blogs: n = 1224, rho = 0.022332, M2 in 1.1-1.25, h = 72.
  for (double m2 : {1.1, 1.17, 1.25}) {
    const double b = theorem_bound(m2, 1224, 0.022332, 72);
    CHECK(b >= 1.8e-2 * 0.85);
    CHECK(b <= 1.8e-2 * 1.15);
  }
  // Adolescent health: n = 1122, rho = 0.008027, M2 about 3.35, h = 66.
  const double ah = theorem_bound(3.35, 1122, 0.008027, 66);
  CHECK(ah >= 5.6e-2 * 0.85);
  CHECK(ah <= 5.6e-2 * 1.15);
}

TEST_CASE("bound at the optimal bandwidth matches the optimized form") {
  for (const auto& [m2, n, rho] : std::vector<std::tuple<double, int, double>>{
           {1.17, 1224, 0.022332}, {0.5, 100, 1.0}, {3.35, 1122, 0.008027}, {0.02, 400, 0.9}}) {
    const double h = oracle_h_star(m2, n, rho);
    const double at_h = theorem_bound(m2, n, rho, h);
    const double half_n_sq = 0.5 * n * static_cast<double>(n);
    const double closed = m2 * (2.0 / std::sqrt(m2) / std::sqrt(half_n_sq * rho) + 1.0 / n);
    CHECK(at_h == doctest::Approx(closed).epsilon(1e-9));
    // The optimized form counts (n choose 2) pairs rather than n²/2.
    CHECK(std::abs(optimized_bound(m2, n, rho) / at_h - 1.0) <= 1.0 / n);
  }
}

TEST_CASE("error bound is convex in h and minimized at h*") {
  const double m2 = 1.17, rho = 0.022332;
  const int n = 1224;
  const double h_star = oracle_h_star(m2, n, rho);
  double best_h = 0.0, best = INFINITY;
  double prev2 = theorem_bound(m2, n, rho, 0.5), prev1 = theorem_bound(m2, n, rho, 0.55);
  for (double h = 0.6; h <= 600.0; h += 0.05) {
    const double v = theorem_bound(m2, n, rho, h);
    CHECK(v - 2 * prev1 + prev2 > 0.0);
    if (v < best) {
      best = v;
      best_h = h;
    }
    prev2 = prev1;
    prev1 = v;
  }
  CHECK(std::abs(best_h - h_star) <= 0.5);
}

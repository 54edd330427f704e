#include <cmath>
#include <numeric>

#include "doctest.h"
#include "nethist/error.h"
#include "nethist/graphon.h"
#include "nethist/random.h"

using namespace nethist;
using nlohmann::json;

namespace {

// Closed-form integral of exp(-s x) over [x0, x1].
double exp_segment(double s, double x0, double x1) {
  return (std::exp(-s * x0) - std::exp(-s * x1)) / s;
}

}  // namespace

TEST_CASE("constant family") {
  const Graphon f = builtin_graphon("constant");
  CHECK(f(0.3, 0.7) == 1.0);
  CHECK(f.M == 0.0);
  CHECK(f.normalized);
}

TEST_CASE("exp family normalization") {
  const Graphon f = builtin_graphon("exp", json{{"beta", 1.0}});
  const double c = 1.0 / std::pow(1.0 - std::exp(-1.0), 2.0);
  CHECK(f(0.0, 0.0) == doctest::Approx(c).epsilon(1e-14));
  CHECK(f.sup == doctest::Approx(c).epsilon(1e-14));
  CHECK(graphon_integral(f) == doctest::Approx(1.0).epsilon(1e-10));
  const Graphon g = builtin_graphon("exp", json{{"beta", 0.1}});
  CHECK(graphon_integral(g) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("beta family with a = b = 1 reduces to xy + (1-x)(1-y)") {
  const Graphon f = builtin_graphon("beta", json{{"a", 1.0}, {"b", 1.0}});
  Rng rng(3);
  for (int t = 0; t < 100; ++t) {
    const double x = rng.uniform(), y = rng.uniform();
    CHECK(f(x, y) == doctest::Approx(2.0 * (x * y + (1 - x) * (1 - y))).epsilon(1e-9));
  }
  CHECK(graphon_integral(f) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("invalid families and parameters") {
  CHECK_THROWS_AS(builtin_graphon("nope"), ConfigError);
  CHECK_THROWS_AS(builtin_graphon("exp", json{{"beta", -1.0}}), ConfigError);
  CHECK_THROWS_AS(builtin_graphon("beta", json{{"a", 2.0}}), ConfigError);
  CHECK_THROWS_AS(builtin_graphon("block", json{{"values", {{1.0, 0.2}, {0.3, 1.0}}}}),
                  ConfigError);
  CHECK_THROWS_AS(graphon_from_json(json{{"family", "exp"}, {"alpha", 1.5}}), ConfigError);
}

TEST_CASE("built-in families are symmetric, normalized and Hölder") {
  const std::vector<std::pair<std::string, json>> families{
      {"constant", json::object()},
      {"exp", json{{"beta", 1.0}}},
      {"exp", json{{"beta", 3.0}}},
      {"linear", json::object()},
      {"beta", json{{"a", 0.5}, {"b", 0.5}}},
      {"beta", json{{"a", 0.7}, {"b", 0.9}}},
  };
  Rng rng(11);
  for (const auto& [name, params] : families) {
    CAPTURE(name);
    CAPTURE(params.dump());
    const Graphon f = builtin_graphon(name, params);
    CHECK(graphon_integral(f) == doctest::Approx(1.0).epsilon(1e-4));
    for (int t = 0; t < 500; ++t) {
      const double x = rng.uniform(), y = rng.uniform();
      const double x2 = rng.uniform(), y2 = rng.uniform();
      CHECK(f(x, y) == f(y, x));
      CHECK(f(x, y) >= 0.0);
      CHECK(f(x, y) <= f.sup * (1 + 1e-12));
      const double dist = std::hypot(x - x2, y - y2);
      CHECK(std::abs(f(x, y) - f(x2, y2)) <= f.M * std::pow(dist, f.alpha) + 1e-12);
    }
  }
}

TEST_CASE("block family is flagged non-Hölder and integrates exactly") {
  const Graphon f = builtin_graphon(
      "block", json{{"values", {{0.8, 0.2}, {0.2, 0.8}}}, {"normalize", true}});
  CHECK_FALSE(f.holder);
  CHECK(graphon_integral(f) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f(0.1, 0.2) == doctest::Approx(1.6));
  CHECK(f(0.1, 0.9) == doctest::Approx(0.4));
}

TEST_CASE("sampling the constant graphon at rho = 1 gives the complete graph") {
  const SampledGraph s = sample_graph(builtin_graphon("constant"), SparsitySchedule::constant(1.0), 40, 1);
  CHECK(s.graph.num_edges() == 40 * 39 / 2);
  CHECK(s.latent.xi.size() == 40);
}

TEST_CASE("sampling is deterministic, symmetric and loop-free") {
  const Graphon f = builtin_graphon("exp", json{{"beta", 2.0}});
  const auto schedule = SparsitySchedule::constant(0.15);
  const SampledGraph a = sample_graph(f, schedule, 200, 99);
  const SampledGraph b = sample_graph(f, schedule, 200, 99);
  CHECK(a.graph == b.graph);
  CHECK(a.latent.xi == b.latent.xi);
  const SampledGraph c = sample_graph(f, schedule, 200, 100);
  CHECK_FALSE(a.graph == c.graph);
  for (int i = 0; i < 200; ++i) {
    CHECK_FALSE(a.graph.has_edge(i, i));
    CHECK(a.latent.xi[i] > 0.0);
    CHECK(a.latent.xi[i] < 1.0);
    for (int j : a.graph.neighbors(i)) CHECK(a.graph.has_edge(j, i));
  }
}

TEST_CASE("sampling preconditions") {
  const Graphon f = builtin_graphon("exp", json{{"beta", 1.0}});
  CHECK_THROWS_AS(sample_graph(f, SparsitySchedule::constant(0.5), 10, 1), ConfigError);
  CHECK_THROWS_AS(sample_graph(builtin_graphon("constant"), SparsitySchedule::constant(0.5), 1, 1),
                  ConfigError);
  CHECK_THROWS_AS(SparsitySchedule::constant(0.0), ConfigError);
}

TEST_CASE("mean density over replicates matches rho") {
  const int n = 500, reps = 200;
  const double rho = 0.3;
  const double pairs = n * (n - 1) / 2.0;
  double sum = 0.0;
  for (int r = 0; r < reps; ++r) {
    const SampledGraph s = sample_graph(builtin_graphon("constant"), SparsitySchedule::constant(rho), n,
                                        derive_seed(2024, r));
    sum += estimate_density(s.graph);
  }
  const double se = std::sqrt(rho * (1 - rho) / pairs / reps);
  CHECK(std::abs(sum / reps - rho) <= 3.0 * se);
}

TEST_CASE("density consistency for a non-constant graphon") {
  // Conditional on xi the density varies, so the s.e. is estimated.
  const Graphon f = builtin_graphon("exp", json{{"beta", 1.0}});
  const double rho = 0.3;
  std::vector<double> values;
  for (int r = 0; r < 100; ++r) {
    values.push_back(estimate_density(
        sample_graph(f, SparsitySchedule::constant(rho), 300, derive_seed(77, r)).graph));
  }
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / values.size();
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double se = std::sqrt(ss / (values.size() - 1) / values.size());
  CHECK(std::abs(mean - rho) <= 3.0 * se);
}

TEST_CASE("two-block graphon within-block density") {
  const Graphon f = builtin_graphon("block", json{{"values", {{0.8, 0.2}, {0.2, 0.8}}}});
  const SampledGraph s = sample_graph(f, SparsitySchedule::constant(1.0), 1000, 5);
  int64_t within_edges = 0, within_pairs = 0;
  for (int i = 0; i < 1000; ++i) {
    for (int j = i + 1; j < 1000; ++j) {
      if ((s.latent.xi[i] < 0.5) == (s.latent.xi[j] < 0.5)) {
        ++within_pairs;
        within_edges += s.graph.has_edge(i, j);
      }
    }
  }
  const double p = static_cast<double>(within_edges) / within_pairs;
  CHECK(std::abs(p - 0.8) <= 3.0 * std::sqrt(0.8 * 0.2 / within_pairs));
}

TEST_CASE("sparsity schedules") {
  const auto s = SparsitySchedule::power_law(0.5, 100, 0.3);
  CHECK(s.rho(50) == 0.5);
  CHECK(s.rho(1000) == doctest::Approx(0.5 * std::pow(10.0, -0.3)));
  CHECK(s.rho(2000) < s.rho(1000));
  CHECK(s.satisfies_growth(100, 5000));
  CHECK(SparsitySchedule::constant(0.1).satisfies_growth(10, 5000));
}

TEST_CASE("block averages") {
  SUBCASE("constant") {
    const Graphon f = builtin_graphon("constant");
    for (int a = 1; a <= 3; ++a) {
      for (int b = 1; b <= 3; ++b) {
        const BlockAverage avg = block_average(f, a, b, 3, 10);
        CHECK(avg.mean == doctest::Approx(1.0));
        CHECK(avg.mean_sq == doctest::Approx(1.0));
      }
    }
    CHECK(block_average(f, 3, 3, 3, 10).area == doctest::Approx(0.4 * 0.4));
  }
  SUBCASE("4xy on the lower-left quarter") {
    Graphon f;
    f.eval = [](double x, double y) { return 4 * x * y; };
    CHECK(block_average(f, 1, 1, 2, 4).mean == doctest::Approx(0.25).epsilon(1e-12));
  }
  SUBCASE("exp family against closed form") {
    const double beta = 1.7;
    const Graphon f = builtin_graphon("exp", json{{"beta", beta}});
    const double c = f(0.0, 0.0);
    const int n = 23, h = 5;
    for (int a = 1; a <= 4; ++a) {
      for (int b = 1; b <= 4; ++b) {
        const Rect r = block_region(n, h, a, b);
        const double mean =
            c * exp_segment(beta, r.x0, r.x1) * exp_segment(beta, r.y0, r.y1) / r.area();
        const double mean_sq = c * c * exp_segment(2 * beta, r.x0, r.x1) *
                               exp_segment(2 * beta, r.y0, r.y1) / r.area();
        const BlockAverage avg = block_average(f, a, b, h, n);
        CHECK(avg.mean == doctest::Approx(mean).epsilon(1e-8));
        CHECK(avg.mean_sq == doctest::Approx(mean_sq).epsilon(1e-8));
      }
    }
  }
  SUBCASE("indices out of range") {
    CHECK_THROWS_AS(block_average(builtin_graphon("constant"), 0, 1, 2, 4), ConfigError);
    CHECK_THROWS_AS(block_average(builtin_graphon("constant"), 1, 3, 2, 4), ConfigError);
  }
}

TEST_CASE("block averages tile the unit square") {
  for (const auto& [name, params] : std::vector<std::pair<std::string, json>>{
           {"exp", json{{"beta", 2.0}}}, {"linear", json::object()}, {"beta", json{{"a", 0.5}, {"b", 0.8}}}}) {
    const Graphon f = builtin_graphon(name, params);
    const int n = 50, h = 7;
    double total = 0.0;
    for (int a = 1; a <= n / h; ++a) {
      for (int b = 1; b <= n / h; ++b) {
        const BlockAverage avg = block_average(f, a, b, h, n);
        total += avg.mean * avg.area;
      }
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-4));
  }
}

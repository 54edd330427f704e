#include "nethist/graphon.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>

#include <boost/math/distributions/beta.hpp>

#include "nethist/error.h"
#include "nethist/random.h"

namespace nethist {

namespace {

constexpr uint64_t kTagLatent = 0x78695F6C6174656EULL;
constexpr uint64_t kTagEdge = 0x656467655F647261ULL;

double param(const nlohmann::json& params, const char* key, double fallback) {
  if (!params.contains(key)) return fallback;
  if (!params[key].is_number()) {
    throw ConfigError(std::string("graphon parameter '") + key + "' must be a number");
  }
  return params[key].get<double>();
}

Graphon make_constant() {
  Graphon g;
  g.family = "constant";
  g.eval = [](double, double) { return 1.0; };
  g.terms = {{1.0, [](double) { return 1.0; }, [](double) { return 1.0; }}};
  g.M = 0.0;
  g.sup = 1.0;
  return g;
}

Graphon make_exp(double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw ConfigError("exp graphon needs beta > 0");
  }
  const double one_minus = -std::expm1(-beta);
  const double c = beta * beta / (one_minus * one_minus);
  Graphon g;
  g.family = "exp";
  g.eval = [c, beta](double x, double y) { return c * std::exp(-beta * (x + y)); };
  auto decay = [beta](double t) { return std::exp(-beta * t); };
  g.terms = {{c, decay, decay}};
  // |grad f| = sqrt(2)·beta·f, largest at the origin.
  g.M = std::numbers::sqrt2 * beta * c;
  g.sup = c;
  return g;
}

Graphon make_linear() {
  Graphon g;
  g.family = "linear";
  g.eval = [](double x, double y) { return x + y; };
  auto one = [](double) { return 1.0; };
  auto id = [](double t) { return t; };
  g.terms = {{1.0, id, one}, {1.0, one, id}};
  g.M = std::numbers::sqrt2;
  g.sup = 2.0;
  return g;
}

Graphon make_block(const nlohmann::json& params) {
  if (!params.contains("values") || !params["values"].is_array()) {
    throw ConfigError("block graphon needs a 'values' matrix");
  }
  const auto& rows = params["values"];
  const size_t k = rows.size();
  if (k == 0) throw ConfigError("block graphon needs at least one block");
  auto values = std::make_shared<std::vector<double>>(k * k);
  for (size_t a = 0; a < k; ++a) {
    if (!rows[a].is_array() || rows[a].size() != k) {
      throw ConfigError("block graphon 'values' must be square");
    }
    for (size_t b = 0; b < k; ++b) {
      const double v = rows[a][b].get<double>();
      if (v < 0.0) throw ConfigError("block graphon values must be non-negative");
      (*values)[a * k + b] = v;
    }
  }
  for (size_t a = 0; a < k; ++a) {
    for (size_t b = 0; b < a; ++b) {
      if ((*values)[a * k + b] != (*values)[b * k + a]) {
        throw ConfigError("block graphon 'values' must be symmetric");
      }
    }
  }
  std::vector<double> sizes(k, 1.0 / static_cast<double>(k));
  if (params.contains("sizes")) {
    const auto& s = params["sizes"];
    if (!s.is_array() || s.size() != k) {
      throw ConfigError("block graphon 'sizes' must have one entry per block");
    }
    double total = 0.0;
    for (size_t a = 0; a < k; ++a) {
      sizes[a] = s[a].get<double>();
      if (!(sizes[a] > 0.0)) throw ConfigError("block sizes must be positive");
      total += sizes[a];
    }
    if (std::abs(total - 1.0) > 1e-9) throw ConfigError("block sizes must sum to 1");
  }
  auto bounds = std::make_shared<std::vector<double>>();
  double acc = 0.0;
  for (size_t a = 0; a + 1 < k; ++a) {
    acc += sizes[a];
    bounds->push_back(acc);
  }

  double integral = 0.0, sup = 0.0;
  for (size_t a = 0; a < k; ++a) {
    for (size_t b = 0; b < k; ++b) {
      integral += (*values)[a * k + b] * sizes[a] * sizes[b];
      sup = std::max(sup, (*values)[a * k + b]);
    }
  }
  const bool normalize = params.value("normalize", false);
  double scale = 1.0;
  if (normalize) {
    if (!(integral > 0.0)) throw ConfigError("cannot normalize an all-zero block graphon");
    scale = 1.0 / integral;
  }

  Graphon g;
  g.family = "block";
  g.eval = [values, bounds, k, scale](double x, double y) {
    auto index = [&](double t) {
      return static_cast<size_t>(std::upper_bound(bounds->begin(), bounds->end(), t) -
                                 bounds->begin());
    };
    return scale * (*values)[index(x) * k + index(y)];
  };
  g.holder = false;
  g.M = std::numeric_limits<double>::infinity();
  g.sup = sup * scale;
  g.normalized = normalize || std::abs(integral - 1.0) < 1e-12;
  g.cuts = *bounds;
  return g;
}

Graphon make_beta(double a, double b) {
  if (!(a > 0.0 && a <= 1.0 && b > 0.0 && b <= 1.0)) {
    throw ConfigError("beta graphon needs a, b in (0, 1]");
  }
  auto dist = std::make_shared<boost::math::beta_distribution<double>>(a, b);
  const double mu = a / (a + b);
  const double norm = 1.0 / (2.0 * mu * mu);
  auto q = [dist](double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    return boost::math::quantile(*dist, t);
  };
  // For a, b <= 1 the density is bounded below, so Q is Lipschitz with
  // constant 1 / min pdf, and each partial derivative of f is bounded by
  // norm / min pdf.
  double t_min = (a + b < 2.0) ? (1.0 - a) / (2.0 - a - b) : 0.5;
  t_min = std::clamp(t_min, 0.0, 1.0);
  double min_pdf = 1.0;
  if (a < 1.0 || b < 1.0) {
    min_pdf = std::exp((a - 1.0) * std::log(std::max(t_min, 1e-300)) +
                       (b - 1.0) * std::log(std::max(1.0 - t_min, 1e-300)) -
                       std::log(boost::math::beta(a, b)));
  }
  Graphon g;
  g.family = "beta";
  g.eval = [q, norm](double x, double y) {
    return norm * (q(x) * q(y) + q(1.0 - x) * q(1.0 - y));
  };
  auto q_flip = [q](double t) { return q(1.0 - t); };
  g.terms = {{norm, q, q}, {norm, q_flip, q_flip}};
  g.M = std::numbers::sqrt2 * norm / min_pdf;
  // Largest value on a grid that includes the corners; exact for a = b.
  double peak = 0.0;
  constexpr int kGrid = 200;
  std::vector<double> qs(kGrid + 1);
  for (int i = 0; i <= kGrid; ++i) qs[i] = q(static_cast<double>(i) / kGrid);
  for (int i = 0; i <= kGrid; ++i) {
    for (int j = 0; j <= kGrid; ++j) {
      peak = std::max(peak, qs[i] * qs[j] + qs[kGrid - i] * qs[kGrid - j]);
    }
  }
  g.sup = norm * peak;
  return g;
}

}  // namespace

Graphon builtin_graphon(const std::string& family, const nlohmann::json& params) {
  if (!params.is_object()) throw ConfigError("graphon params must be an object");
  if (family == "constant") return make_constant();
  if (family == "exp") return make_exp(param(params, "beta", 1.0));
  if (family == "linear") return make_linear();
  if (family == "block") return make_block(params);
  if (family == "beta") return make_beta(param(params, "a", 1.0), param(params, "b", 1.0));
  throw ConfigError("unknown graphon family: " + family);
}

Graphon graphon_from_json(const nlohmann::json& config) {
  if (!config.is_object() || !config.contains("family") || !config["family"].is_string()) {
    throw ConfigError("graphon config needs a 'family' string");
  }
  Graphon g = builtin_graphon(config["family"].get<std::string>(),
                              config.value("params", nlohmann::json::object()));
  if (config.contains("alpha")) g.alpha = config["alpha"].get<double>();
  if (config.contains("M")) g.M = config["M"].get<double>();
  if (!(g.alpha > 0.0 && g.alpha <= 1.0)) throw ConfigError("alpha must lie in (0, 1]");
  return g;
}

SparsitySchedule SparsitySchedule::constant(double rho) {
  if (!(rho > 0.0 && rho <= 1.0)) throw ConfigError("rho must lie in (0, 1]");
  SparsitySchedule s;
  s.rho0_ = rho;
  return s;
}

SparsitySchedule SparsitySchedule::power_law(double rho0, int n0, double gamma) {
  if (!(rho0 > 0.0 && rho0 <= 1.0)) throw ConfigError("rho0 must lie in (0, 1]");
  if (n0 < 1) throw ConfigError("n0 must be positive");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in [0, 1)");
  SparsitySchedule s;
  s.rho0_ = rho0;
  s.n0_ = n0;
  s.gamma_ = gamma;
  return s;
}

double SparsitySchedule::rho(int n) const {
  if (n <= n0_ || gamma_ == 0.0) return rho0_;
  return rho0_ * std::pow(static_cast<double>(n) / n0_, -gamma_);
}

bool SparsitySchedule::satisfies_growth(int n_min, int n_max) const {
  double prev_rho = rho(n_min);
  double prev_ratio = -1.0;
  for (int n = std::max(n_min, 3); n <= n_max; ++n) {
    const double r = rho(n);
    if (r > prev_rho) return false;
    const double l = std::log(static_cast<double>(n));
    const double ratio = n * r / (l * l * l);
    // The ratio dips for small n where log^3 n grows quickly; only require
    // that it is increasing from the first n where log^3 n < n.
    if (l * l * l < n && prev_ratio > 0.0 && ratio < prev_ratio) return false;
    if (l * l * l < n) prev_ratio = ratio;
    prev_rho = r;
  }
  return true;
}

SampledGraph sample_graph(const Graphon& f, const SparsitySchedule& schedule,
                          int n, uint64_t seed) {
  if (n < 2) throw ConfigError("sample_graph needs n >= 2");
  const double rho = schedule.rho(n);
  if (rho * f.sup > 1.0 + 1e-12) {
    throw ConfigError("rho_n * sup f exceeds 1; edge probabilities overflow");
  }
  SampledGraph out;
  out.rho = rho;
  out.latent.seed = seed;
  out.latent.xi.resize(n);
  for (int i = 0; i < n; ++i) {
    out.latent.xi[i] = keyed_uniform(seed, kTagLatent, static_cast<uint64_t>(i), 0);
  }
  std::vector<std::pair<int, int>> edges;
  const auto& xi = out.latent.xi;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double p = rho * f(xi[i], xi[j]);
      if (keyed_uniform(seed, kTagEdge, static_cast<uint64_t>(i),
                        static_cast<uint64_t>(j)) < p) {
        edges.emplace_back(i, j);
      }
    }
  }
  out.graph = Graph(n, edges);
  return out;
}

Rect block_region(int n, int h, int a, int b) {
  if (n < 1 || h < 1 || h > n) throw ConfigError("invalid bandwidth for block region");
  const int k = n / h;
  if (a < 1 || b < 1 || a > k || b > k) {
    throw ConfigError("block index out of range");
  }
  auto span = [&](int idx, double& lo, double& hi) {
    lo = static_cast<double>(idx - 1) * h / n;
    hi = idx == k ? 1.0 : static_cast<double>(idx) * h / n;
  };
  Rect r{};
  span(a, r.x0, r.x1);
  span(b, r.y0, r.y1);
  return r;
}

BlockAverage block_average(const Graphon& f, int a, int b, int h, int n,
                           const QuadratureOptions& options) {
  const Rect r = block_region(n, h, a, b);
  BlockAverage out;
  out.area = r.area();
  if (!f.terms.empty()) {
    auto integral = [&](auto&& fn, double lo, double hi) {
      return integrate_interval(fn, lo, hi, options);
    };
    double mean = 0.0, mean_sq = 0.0;
    const size_t t = f.terms.size();
    for (size_t i = 0; i < t; ++i) {
      const SeparableTerm& p = f.terms[i];
      mean += p.weight * integral(p.u, r.x0, r.x1) * integral(p.v, r.y0, r.y1);
      for (size_t j = i; j < t; ++j) {
        const SeparableTerm& q = f.terms[j];
        const double w = p.weight * q.weight * (i == j ? 1.0 : 2.0);
        const double ix = integral([&](double x) { return p.u(x) * q.u(x); }, r.x0, r.x1);
        const double iy = integral([&](double y) { return p.v(y) * q.v(y); }, r.y0, r.y1);
        mean_sq += w * ix * iy;
      }
    }
    out.mean = mean / out.area;
    out.mean_sq = mean_sq / out.area;
    return out;
  }
  out.mean = integrate_rect_piecewise(f.eval, r, f.cuts, options) / out.area;
  auto sq = [&f](double x, double y) {
    const double v = f(x, y);
    return v * v;
  };
  out.mean_sq = integrate_rect_piecewise(sq, r, f.cuts, options) / out.area;
  return out;
}

double graphon_integral(const Graphon& f, const QuadratureOptions& options) {
  if (!f.terms.empty()) return block_average(f, 1, 1, 1, 1, options).mean;
  return integrate_rect_piecewise(f.eval, {0.0, 1.0, 0.0, 1.0}, f.cuts, options);
}

}  // namespace nethist

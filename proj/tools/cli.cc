#include "cli.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "nethist/bandwidth.h"
#include "nethist/error.h"
#include "nethist/format.h"
#include "nethist/graph.h"
#include "nethist/graphon.h"
#include "nethist/histogram.h"
#include "nethist/optimizer.h"
#include "nethist/oracle.h"

namespace nethist::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

json num(double v) {
  if (!std::isfinite(v)) return nullptr;
  return round_sig(v);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("failed writing " + path.string());
}

fs::path prepare_dir(const std::string& dir) {
  if (dir.empty()) throw ConfigError("--out is required");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
  return fs::path(dir);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const std::string& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError("invalid JSON in " + path + ": " + e.what());
  }
}

// Flag values take precedence over the JSON config, which takes precedence
// over defaults.
class Settings {
 public:
  Settings(const CLI::App* app, json config) : app_(app), config_(std::move(config)) {
    if (!config_.is_object()) throw ConfigError("config file must hold a JSON object");
  }

  bool has(const std::string& key) const { return from_flag(key) || config_.contains(key); }

  template <typename T>
  T get(const std::string& key, const T& fallback) const {
    if (const CLI::Option* opt = from_flag(key)) return opt->as<T>();
    if (config_.contains(key)) {
      try {
        return config_.at(key).get<T>();
      } catch (const json::exception& e) {
        throw ConfigError("config key '" + key + "' has the wrong type");
      }
    }
    return fallback;
  }

  const json& config() const { return config_; }

 private:
  const CLI::Option* from_flag(const std::string& key) const {
    const CLI::Option* opt = app_->get_option_no_throw("--" + key);
    return opt != nullptr && opt->count() > 0 ? opt : nullptr;
  }

  const CLI::App* app_;
  json config_;
};

struct InputGraph {
  Graph graph;  // after filtering
  LoadReport load;
  FilteredGraph filtered;
  CovariateTable attributes;  // restricted to kept nodes; may have no columns
  int input_nodes = 0;
};

std::vector<CovariateColumn> schema_for(const std::vector<std::string>& columns) {
  std::vector<CovariateColumn> schema;
  for (const auto& c : columns) schema.push_back({c, std::nullopt, std::nullopt});
  return schema;
}

InputGraph load_input(const Settings& s) {
  const std::string path = s.get<std::string>("input", "");
  if (path.empty()) throw ConfigError("--input is required");
  InputGraph in;
  Graph raw;
  CovariateTable attributes;
  if (fs::path(path).extension() == ".gml") {
    LoadedGml gml = load_gml(path);
    raw = std::move(gml.graph);
    in.load = gml.report;
    attributes = std::move(gml.attributes);
  } else {
    LoadedGraph loaded = load_edge_list(path, s.get<bool>("directed", false));
    raw = std::move(loaded.graph);
    in.load = loaded.report;
  }
  in.input_nodes = raw.num_nodes();
  const std::string cov_path = s.get<std::string>("covariates", "");
  if (!cov_path.empty()) {
    const auto columns = s.get<std::vector<std::string>>("column", {});
    attributes = load_covariates(cov_path, raw, schema_for(columns));
    in.filtered = filter_nodes(raw, &attributes, s.get<int>("max-missing", 1));
  } else {
    in.filtered = filter_nodes(raw);
  }
  in.graph = in.filtered.graph;
  if (!attributes.columns().empty()) {
    std::vector<bool> keep(raw.num_nodes(), false);
    for (int id : in.filtered.kept) keep[id] = true;
    in.attributes = attributes.subset(keep);
  }
  if (in.graph.num_nodes() < 2) {
    throw NumericalError("fewer than two linked nodes remain after filtering");
  }
  return in;
}

json bandwidth_json(const BandwidthSelection& sel) {
  json j;
  j["c"] = num(sel.c);
  j["n"] = sel.n;
  j["rho_hat"] = num(sel.rho_hat);
  j["m_hat"] = num(sel.m_hat);
  j["b_hat"] = num(sel.b_hat);
  j["rank_one_coeff"] = num(sel.rank_one_coeff);
  j["M2_hat"] = num(sel.M2_hat);
  j["h_star_raw"] = num(sel.h_star_raw);
  j["h"] = sel.h;
  j["k"] = sel.k;
  j["r"] = sel.r;
  j["oracle_bound_at_h"] = num(theorem_bound(sel.M2_hat, sel.n, sel.rho_hat, sel.h));
  j["clamped"] = sel.clamped;
  if (!sel.warning.empty()) j["warning"] = sel.warning;
  return j;
}

SearchConfig search_config(const Settings& s) {
  SearchConfig cfg;
  cfg.restarts = s.get<int>("restarts", cfg.restarts);
  cfg.seed = s.get<uint64_t>("seed", cfg.seed);
  cfg.threads = s.get<int>("threads", cfg.threads);
  cfg.stall_limit = s.get<int64_t>("stall_limit", cfg.stall_limit);
  cfg.perturb_rounds = s.get<int>("perturb_rounds", cfg.perturb_rounds);
  cfg.perturb_pairs_max = s.get<int>("perturb_pairs_max", cfg.perturb_pairs_max);
  cfg.triple_proportion = s.get<double>("triple_proportion", cfg.triple_proportion);
  cfg.top_fraction_inspected =
      s.get<double>("top_fraction_inspected", cfg.top_fraction_inspected);
  cfg.validate();
  return cfg;
}

std::string covariate_csv(const Graph& g, const CovariateTable& table) {
  std::ostringstream out;
  out << "node";
  for (const auto& c : table.columns()) out << ',' << c;
  out << '\n';
  for (int i = 0; i < g.num_nodes(); ++i) {
    out << g.label(i);
    for (int c = 0; c < static_cast<int>(table.columns().size()); ++c) {
      out << ',';
      if (auto v = table.value(i, c)) out << *v;
    }
    out << '\n';
  }
  return out.str();
}

int cmd_fit(const Settings& s, std::ostream& out) {
  const InputGraph in = load_input(s);
  const Graph& g = in.graph;
  const int n = g.num_nodes();
  const double c = s.get<double>("c", kDefaultWindowConstant);
  const SearchConfig cfg = search_config(s);
  const fs::path dir = prepare_dir(s.get<std::string>("out", ""));

  std::optional<BandwidthSelection> sel;
  int h = 0;
  std::string source;
  if (s.has("h")) {
    h = s.get<int>("h", 0);
    if (h < 2 || h > n) {
      throw ConfigError("--h must lie in [2, " + std::to_string(n) + "]");
    }
    source = "manual";
    try {
      sel = select_bandwidth(g, c);
    } catch (const Error&) {
      // Reported as null; the manual h does not depend on it.
    }
  } else {
    sel = select_bandwidth(g, c);
    h = sel->h;
    source = "automatic";
  }

  const FitResult result = fit(g, h, cfg);
  const NetworkHistogram& hist = result.best;
  const int k = hist.k();

  json hist_json = histogram_to_json(hist);
  write_file(dir / "histogram.json", dump(hist_json));
  write_file(dir / "bins.csv", matrix_csv(hist.bin_heights, k, false));
  write_file(dir / "bins_sqrt.csv", matrix_csv(hist.bin_heights, k, true));

  std::ostringstream assignment;
  assignment << "node,group\n";
  for (int i = 0; i < n; ++i) assignment << g.label(i) << ',' << hist.assignment[i] + 1 << '\n';
  write_file(dir / "assignment.csv", assignment.str());

  std::ostringstream history;
  history << "restart,log_likelihood\n";
  for (size_t r = 0; r < result.history.size(); ++r) {
    history << r + 1 << ',' << format_number(result.history[r]) << '\n';
  }
  write_file(dir / "history.csv", history.str());

  json filter;
  filter["input_nodes"] = in.input_nodes;
  filter["kept_nodes"] = n;
  filter["removed_zero_degree"] = in.filtered.report.removed_zero_degree;
  filter["removed_missing_covariates"] = in.filtered.report.removed_missing_covariates;
  filter["lines_read"] = in.load.lines_read;
  filter["comment_lines"] = in.load.comment_lines;
  filter["self_loops_dropped"] = in.load.self_loops_dropped;
  filter["duplicates_dropped"] = in.load.duplicates_dropped;
  filter["reciprocal_merged"] = in.load.reciprocal_merged;
  write_file(dir / "filter_report.json", dump(filter));

  if (!in.attributes.columns().empty()) {
    write_file(dir / "node_attributes.csv", covariate_csv(g, in.attributes));
  }

  json summary;
  summary["n"] = n;
  summary["edges"] = g.num_edges();
  summary["rho_hat"] = num(hist.rho_hat);
  summary["c"] = num(c);
  summary["M2_hat"] = sel ? num(sel->M2_hat) : json(nullptr);
  summary["h_star_raw"] = sel ? num(sel->h_star_raw) : json(nullptr);
  summary["bandwidth_source"] = source;
  summary["h"] = h;
  summary["k"] = k;
  summary["r"] = hist.bandwidth.r;
  summary["log_likelihood"] = num(hist.log_likelihood);
  summary["normalized_log_likelihood"] = hist_json["normalized_log_likelihood"];
  summary["effective_dof_offdiag"] = num(static_cast<double>(h) * h * hist.rho_hat);
  summary["restarts"] = cfg.restarts;
  summary["seed"] = cfg.seed;
  if (sel && !sel->warning.empty()) summary["warning"] = sel->warning;
  write_file(dir / "summary.json", dump(summary));
  out << dump(summary);
  return 0;
}

int cmd_bandwidth(const Settings& s, std::ostream& out) {
  const InputGraph in = load_input(s);
  const BandwidthSelection sel =
      select_bandwidth(in.graph, s.get<double>("c", kDefaultWindowConstant));
  const json j = bandwidth_json(sel);
  const std::string dir = s.get<std::string>("out", "");
  if (!dir.empty()) write_file(prepare_dir(dir) / "bandwidth.json", dump(j));
  out << dump(j);
  return 0;
}

Graphon graphon_from_settings(const Settings& s) {
  json spec;
  spec["family"] = s.get<std::string>("family", "");
  if (spec["family"].get<std::string>().empty()) throw ConfigError("family is required");
  spec["params"] = s.config().value("params", json::object());
  if (s.config().contains("alpha")) spec["alpha"] = s.config()["alpha"];
  if (s.config().contains("M")) spec["M"] = s.config()["M"];
  return graphon_from_json(spec);
}

SparsitySchedule schedule_from_settings(const Settings& s) {
  if (s.config().contains("schedule")) {
    const json& sch = s.config()["schedule"];
    try {
      return SparsitySchedule::power_law(sch.at("rho0").get<double>(), sch.at("n0").get<int>(),
                                         sch.at("gamma").get<double>());
    } catch (const json::exception&) {
      throw ConfigError("schedule needs numeric rho0, n0 and gamma");
    }
  }
  if (!s.has("rho")) throw ConfigError("rho is required");
  return SparsitySchedule::constant(s.get<double>("rho", 0.0));
}

int cmd_simulate(const Settings& s, std::ostream& out) {
  const Graphon f = graphon_from_settings(s);
  const SparsitySchedule schedule = schedule_from_settings(s);
  const int n = s.get<int>("n", 0);
  const uint64_t seed = s.get<uint64_t>("seed", 0);
  const fs::path dir = prepare_dir(s.get<std::string>("out", ""));
  const SampledGraph sg = sample_graph(f, schedule, n, seed);

  std::ostringstream edges;
  for (const auto& [i, j] : sg.graph.edges()) edges << i << ' ' << j << '\n';
  write_file(dir / "edges.txt", edges.str());

  std::ostringstream latent;
  latent << "node,xi\n";
  for (int i = 0; i < n; ++i) latent << i << ',' << format_number(sg.latent.xi[i]) << '\n';
  write_file(dir / "latent.csv", latent.str());

  json j;
  j["family"] = f.family;
  j["n"] = n;
  j["rho"] = num(sg.rho);
  j["seed"] = seed;
  j["edges"] = sg.graph.num_edges();
  j["rho_hat"] = num(estimate_density(sg.graph));
  write_file(dir / "simulate.json", dump(j));
  out << dump(j);
  return 0;
}

int cmd_evaluate(const Settings& s, std::ostream& out) {
  const Graphon f = graphon_from_settings(s);
  const int n = s.get<int>("n", 0);
  if (n < 2) throw ConfigError("n must be at least 2");
  const SparsitySchedule schedule = schedule_from_settings(s);
  const double rho = schedule.rho(n);
  const double M2 = f.M * f.M;
  const double h_star = f.holder && f.M > 0.0 ? oracle_h_star(M2, n, rho) : NAN;

  int h = 0;
  json h_value = s.config().contains("h") ? s.config()["h"] : json(nullptr);
  if (s.has("h") && s.config().value("h", json()).is_string() == false) {
    h_value = s.get<std::string>("h", "");
  }
  std::string h_text = h_value.is_string() ? h_value.get<std::string>()
                       : h_value.is_number() ? std::to_string(h_value.get<int>())
                                             : "";
  if (h_text.empty()) throw ConfigError("h is required (an integer or \"hstar\")");
  if (h_text == "hstar") {
    if (!std::isfinite(h_star)) {
      throw ConfigError("h* is undefined for a graphon without a positive Hölder constant");
    }
    h = static_cast<int>(std::lround(h_star));
  } else {
    try {
      size_t used = 0;
      h = std::stoi(h_text, &used);
      if (used != h_text.size()) throw std::invalid_argument(h_text);
    } catch (const std::exception&) {
      throw ConfigError("h must be an integer or \"hstar\", got '" + h_text + "'");
    }
  }
  h = std::clamp(h, 1, n);

  MiseOptions options;
  options.estimator = parse_estimator(s.get<std::string>("estimator", "oracle"));
  options.threads = s.get<int>("threads", 0);
  if (options.estimator == EstimatorKind::kFitted) {
    options.search.restarts = s.get<int>("restarts", 10);
  }
  const int replicates = s.get<int>("replicates", 0);
  const uint64_t seed = s.get<uint64_t>("seed", 0);
  const MiseResult mise = mise_monte_carlo(f, schedule, n, h, replicates, seed, options);
  const double bound = f.holder ? theorem_bound(M2, n, rho, h) : INFINITY;

  json j;
  j["family"] = f.family;
  j["n"] = n;
  j["rho"] = num(rho);
  j["h"] = h;
  j["h_star"] = num(h_star);
  j["M2"] = num(M2);
  j["replicates"] = replicates;
  j["estimator"] = to_string(options.estimator);
  j["seed"] = seed;
  j["mise_hat"] = num(mise.mise_hat);
  j["std_err"] = num(mise.std_err);
  j["theorem_bound"] = num(bound);
  j["bound_satisfied"] = mise.mise_hat <= bound;
  j["alignment_method"] = to_string(mise.method);
  // Block-permutation alignment can only overstate the error.
  j["mise_is_upper_bound"] = true;
  const std::string dir = s.get<std::string>("out", "");
  if (!dir.empty()) write_file(prepare_dir(dir) / "evaluate.json", dump(j));
  out << dump(j);
  return 0;
}

struct FitArtifacts {
  std::vector<std::string> labels;
  std::vector<int> groups;  // 0-based
  Bandwidth bandwidth;
  std::vector<double> bin_heights;
};

FitArtifacts read_fit(const fs::path& dir) {
  FitArtifacts fa;
  const json hist = read_json((dir / "histogram.json").string());
  int h = 0;
  try {
    h = hist.at("h").get<int>();
    for (const auto& row : hist.at("bin_heights")) {
      for (const auto& v : row) fa.bin_heights.push_back(v.get<double>());
    }
  } catch (const json::exception&) {
    throw ConfigError("malformed histogram.json in " + dir.string());
  }
  std::istringstream in(read_file((dir / "assignment.csv").string()));
  std::string line;
  std::getline(in, line);
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto comma = line.rfind(',');
    if (comma == std::string::npos) {
      throw ConfigError("assignment.csv:" + std::to_string(line_no) + ": expected node,group");
    }
    fa.labels.push_back(line.substr(0, comma));
    try {
      fa.groups.push_back(std::stoi(line.substr(comma + 1)) - 1);
    } catch (const std::exception&) {
      throw ConfigError("assignment.csv:" + std::to_string(line_no) + ": bad group");
    }
  }
  fa.bandwidth = Bandwidth::make(static_cast<int>(fa.labels.size()), h);
  Assignment(fa.bandwidth, fa.groups);  // validates group sizes
  const size_t k = fa.bandwidth.k;
  if (fa.bin_heights.size() != k * k) throw ConfigError("histogram.json does not match assignment");
  return fa;
}

int cmd_covariates(const Settings& s, std::ostream& out) {
  std::string fit_dir = s.get<std::string>("fit", "");
  if (fit_dir.empty()) throw ConfigError("--fit (directory of fit outputs) is required");
  const std::string cov_path = s.get<std::string>("covariates", "");
  if (cov_path.empty()) throw ConfigError("--covariates is required");
  const FitArtifacts fa = read_fit(fit_dir);
  const Graph labels_only(static_cast<int>(fa.labels.size()), {}, fa.labels);
  const auto columns = s.get<std::vector<std::string>>("column", {});
  const CovariateTable table = load_covariates(cov_path, labels_only, schema_for(columns));
  const fs::path dir = prepare_dir(s.get<std::string>("out", fit_dir));
  const int k = fa.bandwidth.k;

  json report;
  report["fit"] = fit_dir;
  report["k"] = k;
  json cols = json::object();
  for (int c = 0; c < static_cast<int>(table.columns().size()); ++c) {
    const std::string& name = table.columns()[c];
    std::vector<double> sum(k, 0.0);
    std::vector<int> present(k, 0), missing(k, 0);
    std::vector<std::map<int, int>> counts(k);
    for (int i = 0; i < table.num_nodes(); ++i) {
      const int g = fa.groups[i];
      if (auto v = table.value(i, c)) {
        sum[g] += *v;
        ++present[g];
        ++counts[g][*v];
      } else {
        ++missing[g];
      }
    }
    std::vector<int> order(k);
    for (int a = 0; a < k; ++a) order[a] = a;
    auto mean = [&](int a) { return present[a] > 0 ? sum[a] / present[a] : INFINITY; };
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return mean(a) < mean(b); });

    json bins = json::array();
    for (int a = 0; a < k; ++a) {
      json b;
      b["bin"] = a + 1;
      b["size"] = fa.bandwidth.group_size(a);
      b["mean"] = present[a] > 0 ? num(mean(a)) : json(nullptr);
      b["missing"] = missing[a];
      json cnt = json::object();
      for (const auto& [code, count] : counts[a]) cnt[std::to_string(code)] = count;
      b["counts"] = cnt;
      bins.push_back(b);
    }
    json order_json = json::array();
    for (int a : order) order_json.push_back(a + 1);
    cols[name] = {{"order", order_json}, {"bins", bins}};
    write_file(dir / ("bins_sqrt_" + name + ".csv"), matrix_csv(fa.bin_heights, k, true, order));
  }
  report["columns"] = cols;
  write_file(dir / "covariates.json", dump(report));
  out << dump(report);
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Network histogram fitting, bandwidth selection and oracle evaluation"};
  app.set_help_flag("--help", "Print help");
  app.require_subcommand(1, 1);
  std::string config_path;
  app.add_option("--config", config_path, "JSON file supplying any flag; flags win");

  auto input_flags = [](CLI::App* sub) {
    sub->add_option("--input", "Edge list or .gml file");
    sub->add_flag("--directed", "Input lists directed arcs; reciprocal pairs are merged");
    sub->add_option("--covariates", "Covariate CSV keyed by node label");
    sub->add_option("--column", "Covariate column(s)");
    sub->add_option("--max-missing", "Drop nodes with at least this many missing covariates");
  };
  CLI::App* fit_cmd = app.add_subcommand("fit", "Fit a network histogram");
  input_flags(fit_cmd);
  fit_cmd->add_option("--c", "Degree window constant (default 4)");
  fit_cmd->add_option("--h", "Bandwidth override");
  fit_cmd->add_option("--restarts", "Random restarts (default 300)");
  fit_cmd->add_option("--seed", "Random seed");
  fit_cmd->add_option("--threads", "Worker threads (0 = all cores)");
  fit_cmd->add_option("--out", "Output directory");

  CLI::App* bw_cmd = app.add_subcommand("bandwidth", "Automatic bandwidth selection");
  input_flags(bw_cmd);
  bw_cmd->add_option("--c", "Degree window constant (default 4)");
  bw_cmd->add_option("--out", "Optional output directory");

  CLI::App* sim_cmd = app.add_subcommand("simulate", "Sample a graph from a graphon");
  sim_cmd->add_option("--family", "Graphon family");
  sim_cmd->add_option("--n", "Number of nodes");
  sim_cmd->add_option("--rho", "Density scale");
  sim_cmd->add_option("--seed", "Random seed");
  sim_cmd->add_option("--out", "Output directory");

  CLI::App* eval_cmd = app.add_subcommand("evaluate", "Monte Carlo MISE against the bound");
  eval_cmd->add_option("--family", "Graphon family");
  eval_cmd->add_option("--n", "Number of nodes");
  eval_cmd->add_option("--rho", "Density scale");
  eval_cmd->add_option("--h", "Bandwidth or \"hstar\"");
  eval_cmd->add_option("--replicates", "Monte Carlo replicates (at least 10)");
  eval_cmd->add_option("--estimator", "oracle or fitted");
  eval_cmd->add_option("--restarts", "Restarts per fit for the fitted estimator");
  eval_cmd->add_option("--seed", "Random seed");
  eval_cmd->add_option("--threads", "Worker threads (0 = all cores)");
  eval_cmd->add_option("--out", "Optional output directory");

  CLI::App* cov_cmd = app.add_subcommand("covariates", "Summarize covariates per fitted bin");
  cov_cmd->add_option("--fit", "Directory holding fit outputs");
  cov_cmd->add_option("--covariates", "Covariate CSV keyed by node label");
  cov_cmd->add_option("--column", "Covariate column(s); all when omitted");
  cov_cmd->add_option("--out", "Output directory (default: the fit directory)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::kConfig);
  }

  try {
    json config = config_path.empty() ? json::object() : read_json(config_path);
    if (fit_cmd->parsed()) return cmd_fit(Settings(fit_cmd, config), out);
    if (bw_cmd->parsed()) return cmd_bandwidth(Settings(bw_cmd, config), out);
    if (sim_cmd->parsed()) return cmd_simulate(Settings(sim_cmd, config), out);
    if (eval_cmd->parsed()) return cmd_evaluate(Settings(eval_cmd, config), out);
    return cmd_covariates(Settings(cov_cmd, config), out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const CLI::ConversionError& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::kConfig);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::kNumerical);
  }
}

}  // namespace nethist::cli

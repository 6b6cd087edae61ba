// Command-line front end. Exit codes: 0 fail-to-reject, 1 reject, 2 error.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "permtest/permtest.hpp"

namespace {

using permtest::Json;

constexpr int kExitReject = 1;
constexpr int kExitError = 2;
constexpr double kNullSumTolerance = 1e-6;

struct CountsTable {
  std::vector<std::string> categories;
  std::vector<std::vector<std::int64_t>> columns;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  std::string out = s.substr(b, e - b + 1);
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
  return out;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, sep)) out.push_back(trim(cell));
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::int64_t parse_count(const std::string& s) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (s.empty() || used != s.size() || v < 0) throw permtest::Error("counts must be nonnegative integers, got '" + s + "'");
  return v;
}

CountsTable read_counts(const std::string& path, const std::vector<std::string>& header) {
  std::ifstream in(path);
  if (!in) throw permtest::Error("cannot open counts file " + path);
  std::string line;
  if (!std::getline(in, line)) throw permtest::Error("counts file is empty");
  if (split(line, ',') != header) {
    std::string want;
    for (const auto& h : header) want += (want.empty() ? "" : ",") + h;
    throw permtest::Error("counts file header must be '" + want + "'");
  }
  CountsTable t;
  t.columns.resize(header.size() - 1);
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != header.size()) throw permtest::Error("malformed counts row: " + line);
    t.categories.push_back(cells[0]);
    for (std::size_t c = 1; c < cells.size(); ++c) t.columns[c - 1].push_back(parse_count(cells[c]));
  }
  if (t.categories.size() < 2) throw permtest::Error("need at least 2 categories");
  return t;
}

std::vector<double> parse_list(const std::string& s, const char* what) {
  std::vector<double> out;
  for (const auto& cell : split(s, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(cell, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (cell.empty() || used != cell.size() || !std::isfinite(v))
      throw permtest::Error(std::string("malformed number in ") + what + ": '" + cell + "'");
    out.push_back(v);
  }
  if (out.empty()) throw permtest::Error(std::string("empty list for ") + what);
  return out;
}

int emit(const permtest::TestReport& r) {
  std::cout << permtest::to_json(r).dump(2) << '\n';
  return r.reject ? kExitReject : 0;
}

int cmd_test_cat(const std::string& counts_path, const std::string& null_list, double alpha,
                 const std::string& degenerate) {
  const auto table = read_counts(counts_path, {"category", "count"});
  auto q = parse_list(null_list, "--null");
  if (q.size() != table.categories.size())
    throw permtest::LengthMismatch("--null has " + std::to_string(q.size()) + " entries but the counts file has " +
                                   std::to_string(table.categories.size()) + " categories");
  double sum = 0.0;
  for (double v : q) sum += v;
  std::vector<std::string> notes;
  if (!(sum > 0.0)) throw permtest::NotAProbabilityVector("--null must have a positive sum");
  if (std::abs(sum - 1.0) > kNullSumTolerance)
    notes.push_back("null probabilities summed to " + std::to_string(sum) + "; renormalized");
  for (auto& v : q) v /= sum;

  const auto null = permtest::NullHypothesis::categorical(q);
  const permtest::CategoricalSample sample{table.columns[0]};
  permtest::TestReport r;
  if (degenerate == "force-flat") r = permtest::cat_test(sample, null, alpha);
  else r = permtest::run_cat(sample, null, alpha);
  r.categories = table.categories;
  r.diagnostics.warnings.insert(r.diagnostics.warnings.begin(), notes.begin(), notes.end());
  return emit(r);
}

int cmd_test_gauss(const std::string& x_list, const std::string& null_list, double n, double alpha) {
  if (!(n >= 1.0)) throw permtest::Error("--n must be at least 1");
  const auto x = parse_list(x_list, "--x");
  const auto null = permtest::NullHypothesis::gaussian(parse_list(null_list, "--null"));
  if (x.size() != null.k()) throw permtest::LengthMismatch("--x and --null differ in length");
  return emit(permtest::run_gauss(permtest::GaussianSample{x, n}, null, alpha));
}

int cmd_test_two_sample(const std::string& counts_path, double alpha, const std::string& lambda) {
  const auto table = read_counts(counts_path, {"category", "count_x", "count_y"});
  permtest::TwoSampleOptions opt;
  opt.lambda = permtest::LambdaRule::parse(lambda);
  auto r = permtest::two_sample_test(permtest::CategoricalSample{table.columns[0]},
                                     permtest::CategoricalSample{table.columns[1]}, alpha, opt);
  r.categories = table.categories;
  return emit(r);
}

int cmd_threshold(const std::string& kind, int k, double delta, double tau_sq, double alpha) {
  Json j;
  if (kind == "noncentral") {
    j["kind"] = kind;
    j["k"] = k;
    j["tau_sq"] = tau_sq;
    j["alpha"] = alpha;
    j["threshold"] = permtest::noncentral_null_threshold(k, tau_sq, alpha);
  } else {
    const auto spec = kind == "gauss" ? permtest::optimal_threshold_gauss(k, delta) : permtest::optimal_threshold_cat(k, delta);
    j["kind"] = kind;
    j["k"] = k;
    j["delta"] = delta;
    j["t_star"] = spec.t_star;
    j["total_error"] = spec.total_error;
  }
  j["version"] = permtest::kVersion;
  std::cout << j.dump(2) << '\n';
  return 0;
}

struct SimulateArgs {
  int scenario = 0;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> reps;
  std::string out;
  std::string manifest;
  std::string mode = "power";
};

int cmd_simulate(const SimulateArgs& a) {
  permtest::ScenarioConfig c =
      a.config.empty() ? permtest::scenario_preset(a.scenario) : permtest::load_config(a.config);
  if (a.seed) c.seed = *a.seed;
  if (a.reps) c.replications = *a.reps;
  c.validate();
  std::ofstream out(a.out);
  if (!out) throw permtest::ConfigError("cannot write " + a.out);
  if (a.mode == "power") permtest::write_power_csv(out, permtest::run_power_curve(c));
  else permtest::write_calibration_csv(out, permtest::run_null_calibration(c), c.scenario_id);
  out.close();
  if (!out) throw permtest::Error("failed writing " + a.out);
  const auto manifest = permtest::run_manifest(c, a.mode);
  if (!a.manifest.empty()) {
    std::ofstream m(a.manifest);
    if (!m) throw permtest::ConfigError("cannot write " + a.manifest);
    m << manifest.dump(2) << '\n';
  }
  Json summary{{"out", a.out}, {"mode", a.mode}, {"seed", c.seed}, {"version", permtest::kVersion}};
  std::cout << summary.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Goodness-of-fit tests for nulls known up to a relabeling"};
  app.require_subcommand(1);

  std::string counts, null_list, x_list, degenerate = "auto", lambda = "log", kind;
  double alpha = 0.05, n = 0.0, delta = 0.0, tau_sq = 0.0;
  int k = 0;

  auto* cat = app.add_subcommand("test-cat", "one-sample categorical test");
  cat->add_option("--counts", counts, "CSV with header category,count")->required();
  cat->add_option("--null", null_list, "null probabilities q1,...,qk")->required();
  cat->add_option("--alpha", alpha, "level")->capture_default_str();
  cat->add_option("--degenerate", degenerate, "auto or force-flat")
      ->check(CLI::IsMember({"auto", "force-flat"}))
      ->capture_default_str();

  auto* gauss = app.add_subcommand("test-gauss", "one-sample Gaussian mean test");
  gauss->add_option("--x", x_list, "observed vector x1,...,xk")->required();
  gauss->add_option("--null", null_list, "null means mu1,...,muk")->required();
  gauss->add_option("--n", n, "sample size (X has covariance I/n)")->required();
  gauss->add_option("--alpha", alpha, "level")->capture_default_str();

  auto* two = app.add_subcommand("test-two-sample", "two-sample categorical test");
  two->add_option("--counts", counts, "CSV with header category,count_x,count_y")->required();
  two->add_option("--alpha", alpha, "level")->capture_default_str();
  two->add_option("--lambda", lambda, "clustering threshold: log, sqrt2log or a number")->capture_default_str();

  auto* thr = app.add_subcommand("threshold", "optimal or noncentral thresholds");
  thr->add_option("--kind", kind, "gauss, cat or noncentral")
      ->required()
      ->check(CLI::IsMember({"gauss", "cat", "noncentral"}));
  thr->add_option("--k", k, "dimension (degrees of freedom for noncentral)")->required();
  thr->add_option("--delta", delta, "alternative scale");
  thr->add_option("--tau-sq", tau_sq, "noncentrality for --kind noncentral")->capture_default_str();
  thr->add_option("--alpha", alpha, "level for --kind noncentral")->capture_default_str();

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "power curves or null calibration");
  auto* scen = simulate->add_option("--scenario", sim.scenario, "preset 1..5")->check(CLI::Range(1, 5));
  auto* conf = simulate->add_option("--config", sim.config, "JSON configuration file");
  scen->excludes(conf);
  simulate->add_option("--seed", sim.seed, "run seed (defaults to the configuration seed)");
  simulate->add_option("--reps", sim.reps, "replications per point");
  simulate->add_option("--out", sim.out, "CSV output path")->required();
  simulate->add_option("--manifest", sim.manifest, "JSON manifest output path");
  simulate->add_option("--mode", sim.mode, "power or null")->check(CLI::IsMember({"power", "null"}))->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitError;
  }

  try {
    if (*cat) return cmd_test_cat(counts, null_list, alpha, degenerate);
    if (*gauss) return cmd_test_gauss(x_list, null_list, n, alpha);
    if (*two) return cmd_test_two_sample(counts, alpha, lambda);
    if (*thr) {
      if (kind != "noncentral" && thr->count("--delta") == 0) throw permtest::Error("--delta is required");
      return cmd_threshold(kind, k, delta, tau_sq, alpha);
    }
    if (*simulate) {
      if (scen->count() == 0 && conf->count() == 0) throw permtest::ConfigError("give --scenario or --config");
      return cmd_simulate(sim);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}

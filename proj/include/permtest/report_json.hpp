#pragma once

// JSON form of TestReport. Parsing the emitted document reproduces the report.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "permtest/errors.hpp"
#include "permtest/gof.hpp"
#include "permtest/model.hpp"
#include "permtest/partition.hpp"

namespace permtest {

using Json = nlohmann::ordered_json;

namespace detail {

inline Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

inline std::optional<double> read_optional(const Json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

}  // namespace detail

inline Json to_json(const NullHypothesis& h) {
  Json j;
  j["kind"] = to_string(h.kind);
  j["reference"] = h.reference;
  j["clusters"] = h.partition.clusters;
  j["centers"] = h.partition.centers;
  return j;
}

inline NullHypothesis null_from_json(const Json& j) {
  NullHypothesis h;
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "gaussian") h.kind = NullKind::Gaussian;
  else if (kind == "categorical") h.kind = NullKind::Categorical;
  else throw Error("unknown null kind: " + kind);
  h.reference = j.at("reference").get<std::vector<double>>();
  h.partition.k = h.reference.size();
  h.partition.clusters = j.at("clusters").get<std::vector<std::vector<std::size_t>>>();
  h.partition.centers = j.at("centers").get<std::vector<double>>();
  return h;
}

inline Json to_json(const ConditionDiagnostics& d) {
  Json j;
  j["eta_max"] = detail::optional_number(d.eta_max);
  j["zeta_max"] = detail::optional_number(d.zeta_max);
  j["min_nq"] = detail::optional_number(d.min_nq);
  j["tau_sq"] = detail::optional_number(d.tau_sq);
  if (d.eta_bar_max) j["eta_bar_max"] = *d.eta_bar_max;
  if (d.zeta_bar_max) j["zeta_bar_max"] = *d.zeta_bar_max;
  if (d.delta1_sq) j["delta1_sq"] = *d.delta1_sq;
  if (d.delta2_sq) j["delta2_sq"] = *d.delta2_sq;
  j["warnings"] = d.warnings;
  return j;
}

inline ConditionDiagnostics diagnostics_from_json(const Json& j) {
  ConditionDiagnostics d;
  d.eta_max = detail::read_optional(j, "eta_max");
  d.eta_bar_max = detail::read_optional(j, "eta_bar_max");
  d.zeta_max = detail::read_optional(j, "zeta_max");
  d.zeta_bar_max = detail::read_optional(j, "zeta_bar_max");
  d.min_nq = detail::read_optional(j, "min_nq");
  d.tau_sq = detail::read_optional(j, "tau_sq");
  d.delta1_sq = detail::read_optional(j, "delta1_sq");
  d.delta2_sq = detail::read_optional(j, "delta2_sq");
  d.warnings = j.at("warnings").get<std::vector<std::string>>();
  return d;
}

inline Json to_json(const TestReport& r) {
  Json j;
  j["test_kind"] = to_string(r.kind);
  j["k"] = r.k;
  j["d"] = r.d;
  j["n"] = r.n;
  if (r.m) j["m"] = *r.m;
  if (!r.categories.empty()) j["categories"] = r.categories;
  Json stats = Json::object(), thresholds = Json::object(), p_values = Json::object(), dof = Json::object();
  for (const auto& s : r.statistics) {
    stats[s.name] = s.value;
    thresholds[s.name] = s.threshold;
    p_values[s.name] = detail::optional_number(s.p_value);
    if (s.dof.size() == 1) dof[s.name] = s.dof.front();
  }
  j["statistics"] = stats;
  // Two-sample statistics share the mixture dof triple.
  if (r.kind == TestKind::TwoSample && !r.statistics.empty()) j["dof"] = r.statistics.front().dof;
  else j["dof"] = dof;
  j["thresholds"] = thresholds;
  j["p_values"] = p_values;
  j["reject"] = r.reject;
  j["alpha"] = r.alpha;
  if (r.null_spec) j["null_spec"] = to_json(*r.null_spec);
  if (r.two_sample) {
    const auto& t = *r.two_sample;
    j["two_sample"] = {{"d_lower", t.d_lower},           {"d_upper", t.d_upper},   {"beta", t.beta},
                       {"critical_value", t.critical_value}, {"lambda_rule", t.lambda_rule},
                       {"lambda_x", t.lambda_x},         {"lambda_y", t.lambda_y}};
  }
  j["diagnostics"] = to_json(r.diagnostics);
  if (r.seed) j["seed"] = *r.seed;
  j["version"] = r.version;
  return j;
}

inline TestReport report_from_json(const Json& j) {
  try {
    TestReport r;
    r.kind = parse_test_kind(j.at("test_kind").get<std::string>());
    r.k = j.at("k").get<std::size_t>();
    r.d = j.at("d").get<std::size_t>();
    r.n = j.at("n").get<double>();
    r.m = detail::read_optional(j, "m");
    if (j.contains("categories")) r.categories = j.at("categories").get<std::vector<std::string>>();
    const auto& dof = j.at("dof");
    for (const auto& [name, value] : j.at("statistics").items()) {
      StatisticResult s;
      s.name = name;
      s.value = value.get<double>();
      s.threshold = j.at("thresholds").at(name).get<double>();
      s.p_value = detail::read_optional(j.at("p_values"), name.c_str());
      s.dof = dof.is_array() ? dof.get<std::vector<int>>() : std::vector<int>{dof.at(name).get<int>()};
      r.statistics.push_back(std::move(s));
    }
    r.reject = j.at("reject").get<bool>();
    r.alpha = j.at("alpha").get<double>();
    if (j.contains("null_spec")) r.null_spec = null_from_json(j.at("null_spec"));
    if (j.contains("two_sample")) {
      const auto& t = j.at("two_sample");
      r.two_sample = TwoSampleDetails{t.at("d_lower").get<std::size_t>(),   t.at("d_upper").get<std::size_t>(),
                                      t.at("beta").get<double>(),           t.at("critical_value").get<double>(),
                                      t.at("lambda_rule").get<std::string>(), t.at("lambda_x").get<double>(),
                                      t.at("lambda_y").get<double>()};
    }
    r.diagnostics = diagnostics_from_json(j.at("diagnostics"));
    if (j.contains("seed")) r.seed = j.at("seed").get<std::uint64_t>();
    r.version = j.at("version").get<std::string>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed report: ") + e.what());
  }
}

inline bool operator==(const TestReport& a, const TestReport& b) {
  return a.kind == b.kind && a.k == b.k && a.d == b.d && a.n == b.n && a.m == b.m && a.categories == b.categories &&
         a.statistics == b.statistics && a.null_spec == b.null_spec && a.reject == b.reject && a.alpha == b.alpha &&
         a.diagnostics == b.diagnostics && a.two_sample == b.two_sample && a.seed == b.seed && a.version == b.version;
}

}  // namespace permtest

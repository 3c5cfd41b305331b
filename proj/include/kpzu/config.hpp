#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "kpzu/errors.hpp"
#include "kpzu/noise.hpp"
#include "kpzu/renorm.hpp"
#include "kpzu/rule.hpp"
#include "kpzu/stats.hpp"

namespace kpzu {

using json = nlohmann::json;

struct RuleSpec {
  std::string name;
  std::optional<double> beta;
  std::string expr;
  friend bool operator==(const RuleSpec&, const RuleSpec&) = default;
};

struct LawSpec {
  std::string family = "rademacher";
  double halfwidth = 1.0;  // uniform
  double sigma = 1.0;      // gaussian-truncated
  double cutoff = 8.0;
  double a = 1.0;  // two-point
  double p = 0.5;
  friend bool operator==(const LawSpec&, const LawSpec&) = default;
};

inline const std::set<std::string>& known_commands() {
  static const std::set<std::string> c{"constants", "gf-check",    "simulate",
                                       "couple",    "renorm-check", "invariance"};
  return c;
}

/// Fully resolved experiment description; every field has a value after
/// parse_config.
struct ExperimentConfig {
  std::string command;
  std::vector<RuleSpec> rules;  // first entry is "the" rule
  std::vector<LawSpec> laws;
  std::vector<long> N_grid;     // first entry is "the" N
  double a = 1.0;
  double b = 1.0;
  double epsilon = 0.008;
  std::size_t replicas = 100;
  std::uint64_t seed0 = 1;
  long horizon = 10000;
  std::string matching;  // paper | reduced; command-dependent default
  std::string drift = "none";
  std::vector<Probe> probes = ProbeSpec{}.points;
  std::string observable = "ftilde";
  std::optional<double> phi_radius;
  double alpha = 0.01;
  bool csv = false;
  std::string output;
  unsigned threads = 0;

  long N() const { return N_grid.front(); }
  bool operator==(const ExperimentConfig& o) const {
    auto probes_eq = [&] {
      if (probes.size() != o.probes.size()) return false;
      for (std::size_t i = 0; i < probes.size(); ++i) {
        if (probes[i].x != o.probes[i].x || probes[i].t != o.probes[i].t) return false;
      }
      return true;
    };
    return command == o.command && rules == o.rules && laws == o.laws && N_grid == o.N_grid &&
           a == o.a && b == o.b && epsilon == o.epsilon && replicas == o.replicas &&
           seed0 == o.seed0 && horizon == o.horizon && matching == o.matching &&
           drift == o.drift && probes_eq() && observable == o.observable &&
           phi_radius == o.phi_radius && alpha == o.alpha && csv == o.csv &&
           output == o.output && threads == o.threads;
  }
};

/// Validation failure listing every problem found.
class ConfigError : public ParseError {
 public:
  explicit ConfigError(std::vector<std::string> problems)
      : ParseError(join(problems)), problems_(std::move(problems)) {}
  const std::vector<std::string>& problems() const noexcept { return problems_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string s = "invalid config:";
    for (const auto& p : v) s += "\n  - " + p;
    return s;
  }
  std::vector<std::string> problems_;
};

inline NoiseLaw make_law(const LawSpec& s) {
  if (s.family == "rademacher") return NoiseLaw::rademacher();
  if (s.family == "uniform") return NoiseLaw::uniform(s.halfwidth);
  if (s.family == "gaussian-truncated") return NoiseLaw::gaussian_truncated(s.sigma, s.cutoff);
  if (s.family == "two-point") return NoiseLaw::two_point(s.a, s.p);
  if (s.family == "zero") return NoiseLaw::zero();
  throw DomainError("unknown noise law '" + s.family + "'");
}

inline GrowthRule make_rule(const RuleSpec& s) { return make_rule(s.name, s.beta, s.expr); }

inline json to_json(const RuleSpec& r) {
  json j{{"name", r.name}};
  if (r.beta) j["beta"] = *r.beta;
  if (!r.expr.empty()) j["expr"] = r.expr;
  return j;
}

inline json to_json(const LawSpec& l) {
  json j{{"family", l.family}};
  if (l.family == "uniform") j["halfwidth"] = l.halfwidth;
  if (l.family == "gaussian-truncated") {
    j["sigma"] = l.sigma;
    j["cutoff"] = l.cutoff;
  }
  if (l.family == "two-point") {
    j["a"] = l.a;
    j["p"] = l.p;
  }
  return j;
}

inline json to_json(const ExperimentConfig& c) {
  json rules = json::array(), laws = json::array(), probes = json::array();
  for (const auto& r : c.rules) rules.push_back(to_json(r));
  for (const auto& l : c.laws) laws.push_back(to_json(l));
  for (const auto& p : c.probes) probes.push_back({p.x, p.t});
  json j{{"command", c.command}, {"rules", rules},         {"laws", laws},
         {"N", c.N_grid},        {"a", c.a},               {"b", c.b},
         {"epsilon", c.epsilon}, {"replicas", c.replicas}, {"seed", c.seed0},
         {"horizon", c.horizon}, {"matching", c.matching}, {"drift", c.drift},
         {"probes", probes},     {"observable", c.observable},
         {"alpha", c.alpha},     {"csv", c.csv},           {"output", c.output},
         {"threads", c.threads}};
  if (c.phi_radius) j["phi_radius"] = *c.phi_radius;
  return j;
}

namespace detail {

struct Collector {
  std::vector<std::string> problems;
  void add(std::string s) { problems.push_back(std::move(s)); }
};

inline std::optional<double> get_number(const json& j, const std::string& key, Collector& err,
                                        const std::string& where) {
  if (!j.contains(key)) return std::nullopt;
  if (!j[key].is_number()) {
    err.add(where + key + ": expected a number");
    return std::nullopt;
  }
  return j[key].get<double>();
}

inline void parse_rule(const json& j, const std::string& where, std::vector<RuleSpec>& out,
                       Collector& err) {
  RuleSpec r;
  if (j.is_string()) {
    r.name = j.get<std::string>();
  } else if (j.is_object()) {
    if (!j.contains("name") || !j["name"].is_string()) {
      err.add(where + "name: required string");
      return;
    }
    r.name = j["name"].get<std::string>();
    r.beta = get_number(j, "beta", err, where);
    if (j.contains("expr")) {
      if (j["expr"].is_string()) r.expr = j["expr"].get<std::string>();
      else err.add(where + "expr: expected a string");
    }
  } else {
    err.add(where + ": expected a rule name or object");
    return;
  }
  static const std::set<std::string> names{"linear",  "kpz-quadratic", "kpz-sqrt",
                                           "polymer", "quadratic",     "custom"};
  if (!names.count(r.name)) {
    err.add(where + "name: unknown rule '" + r.name +
            "' (expected linear, kpz-quadratic, kpz-sqrt, polymer, quadratic or custom)");
    return;
  }
  if ((r.name == "polymer" || r.name == "quadratic") && !r.beta) {
    err.add(where + "beta: required for rule '" + r.name + "'");
  }
  if (r.name == "polymer" && r.beta && *r.beta == 0.0) err.add(where + "beta: must be nonzero");
  if (r.name == "custom" && r.expr.empty()) err.add(where + "expr: required for custom rules");
  if (r.name != "custom" && !r.expr.empty()) err.add(where + "expr: only valid for custom rules");
  out.push_back(r);
}

inline void parse_law(const json& j, const std::string& where, std::vector<LawSpec>& out,
                      Collector& err) {
  LawSpec l;
  if (j.is_string()) {
    l.family = j.get<std::string>();
  } else if (j.is_object()) {
    if (!j.contains("family") || !j["family"].is_string()) {
      err.add(where + "family: required string");
      return;
    }
    l.family = j["family"].get<std::string>();
    if (auto v = get_number(j, "halfwidth", err, where)) l.halfwidth = *v;
    if (auto v = get_number(j, "sigma", err, where)) l.sigma = *v;
    if (auto v = get_number(j, "cutoff", err, where)) l.cutoff = *v;
    if (auto v = get_number(j, "a", err, where)) l.a = *v;
    if (auto v = get_number(j, "p", err, where)) l.p = *v;
  } else {
    err.add(where + ": expected a law name or object");
    return;
  }
  if (l.family == "uniform" && j.is_string()) l.halfwidth = std::sqrt(3.0);
  try {
    make_law(l);
  } catch (const Error& e) {
    err.add(where + "family: " + e.what());
    return;
  }
  out.push_back(l);
}

}  // namespace detail

/// Parses and validates a JSON config. `command` (if given) overrides the
/// document's own "command" field. Throws ConfigError listing every problem.
inline ExperimentConfig parse_config(const std::string& text, const std::string& command = {}) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError({std::string("not valid JSON: ") + e.what()});
  }
  if (!j.is_object()) throw ConfigError({"top level must be an object"});

  detail::Collector err;
  ExperimentConfig c;
  static const std::set<std::string> keys{
      "command", "rule",    "rules",  "law",        "laws",       "N",     "a",
      "b",       "epsilon", "replicas", "seed",     "horizon",    "matching", "drift",
      "probes",  "observable", "phi_radius", "alpha", "csv",       "output", "threads"};
  for (const auto& [k, v] : j.items()) {
    if (!keys.count(k)) err.add(k + ": unknown field");
  }

  c.command = command;
  if (c.command.empty() && j.contains("command")) {
    if (j["command"].is_string()) c.command = j["command"].get<std::string>();
    else err.add("command: expected a string");
  }
  if (c.command.empty()) err.add("command: required");
  else if (!known_commands().count(c.command)) err.add("command: unknown '" + c.command + "'");
  const bool needs_model = c.command != "gf-check" && c.command != "constants";

  // rule / rules
  if (j.contains("rule") && j.contains("rules")) err.add("rule, rules: give one, not both");
  if (j.contains("rule")) {
    detail::parse_rule(j["rule"], "rule.", c.rules, err);
  } else if (j.contains("rules")) {
    if (!j["rules"].is_array() || j["rules"].empty()) err.add("rules: expected a nonempty array");
    else
      for (std::size_t i = 0; i < j["rules"].size(); ++i)
        detail::parse_rule(j["rules"][i], "rules[" + std::to_string(i) + "].", c.rules, err);
  } else if (needs_model) {
    err.add("rule: required");
  }

  if (j.contains("law") && j.contains("laws")) err.add("law, laws: give one, not both");
  if (j.contains("law")) {
    detail::parse_law(j["law"], "law.", c.laws, err);
  } else if (j.contains("laws")) {
    if (!j["laws"].is_array() || j["laws"].empty()) err.add("laws: expected a nonempty array");
    else
      for (std::size_t i = 0; i < j["laws"].size(); ++i)
        detail::parse_law(j["laws"][i], "laws[" + std::to_string(i) + "].", c.laws, err);
  } else if (needs_model) {
    err.add("law: required");
  }

  auto positive_int = [&](const json& v, const std::string& where) -> std::optional<long> {
    if (v.is_number_integer() && v.get<long>() >= 1) return v.get<long>();
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (d >= 1 && d == std::floor(d) && d < 1e15) return static_cast<long>(d);
    }
    err.add(where + ": N must be a positive integer");
    return std::nullopt;
  };
  if (j.contains("N")) {
    if (j["N"].is_array()) {
      if (j["N"].empty()) err.add("N: empty grid");
      for (std::size_t i = 0; i < j["N"].size(); ++i)
        if (auto n = positive_int(j["N"][i], "N[" + std::to_string(i) + "]")) c.N_grid.push_back(*n);
    } else if (auto n = positive_int(j["N"], "N")) {
      c.N_grid.push_back(*n);
    }
  } else if (needs_model) {
    err.add("N: required");
  }

  auto number = [&](const char* key, double& dst) {
    if (auto v = detail::get_number(j, key, err, "")) dst = *v;
  };
  number("a", c.a);
  number("b", c.b);
  number("epsilon", c.epsilon);
  number("alpha", c.alpha);
  if (!(c.a > 0)) err.add("a: must be > 0");
  if (!(c.b > 0)) err.add("b: must be > 0");
  if (!(c.epsilon > 0.0 && c.epsilon <= 0.3)) {
    err.add("epsilon: must lie in (0, 0.3], got " + std::to_string(c.epsilon));
  }
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) err.add("alpha: must lie in (0, 1)");
  if (j.contains("phi_radius")) {
    c.phi_radius = detail::get_number(j, "phi_radius", err, "");
    if (c.phi_radius && !(*c.phi_radius > 0)) err.add("phi_radius: must be > 0");
  }

  auto unsigned_int = [&](const char* key, auto& dst, long min) {
    if (!j.contains(key)) return;
    const auto& v = j[key];
    if (!v.is_number_integer() || v.get<long long>() < min) {
      err.add(std::string(key) + ": expected an integer >= " + std::to_string(min));
      return;
    }
    dst = static_cast<std::remove_reference_t<decltype(dst)>>(v.get<long long>());
  };
  unsigned_int("replicas", c.replicas, 2);
  unsigned_int("horizon", c.horizon, 1000);
  unsigned_int("threads", c.threads, 0);
  if (j.contains("seed")) {
    if (j["seed"].is_number_unsigned()) c.seed0 = j["seed"].get<std::uint64_t>();
    else if (j["seed"].is_number_integer() && j["seed"].get<long long>() >= 0)
      c.seed0 = static_cast<std::uint64_t>(j["seed"].get<long long>());
    else err.add("seed: expected a non-negative integer");
  }

  auto choice = [&](const char* key, std::string& dst, std::set<std::string> allowed) {
    if (!j.contains(key)) return;
    if (!j[key].is_string() || !allowed.count(j[key].get<std::string>())) {
      std::string opts;
      for (const auto& a : allowed) opts += (opts.empty() ? "" : ", ") + a;
      err.add(std::string(key) + ": expected one of " + opts);
      return;
    }
    dst = j[key].get<std::string>();
  };
  choice("matching", c.matching, {"paper", "reduced"});
  choice("drift", c.drift, {"none", "cumulant", "logmgf"});
  choice("observable", c.observable, {"ftilde", "exp-beta-ftilde"});
  if (c.matching.empty()) c.matching = c.command == "constants" ? "paper" : "reduced";

  if (j.contains("probes")) {
    c.probes.clear();
    if (!j["probes"].is_array() || j["probes"].empty()) {
      err.add("probes: expected a nonempty array of [x, t] pairs");
    } else {
      for (std::size_t i = 0; i < j["probes"].size(); ++i) {
        const auto& p = j["probes"][i];
        if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number() ||
            p[1].get<double>() < 0) {
          err.add("probes[" + std::to_string(i) + "]: expected [x, t] with t >= 0");
          continue;
        }
        c.probes.push_back({p[0].get<double>(), p[1].get<double>()});
      }
    }
  }
  if (j.contains("csv")) {
    if (j["csv"].is_boolean()) c.csv = j["csv"].get<bool>();
    else err.add("csv: expected true or false");
  }
  if (j.contains("output")) {
    if (j["output"].is_string() && !j["output"].get<std::string>().empty())
      c.output = j["output"].get<std::string>();
    else err.add("output: expected a nonempty string");
  }
  if (c.output.empty()) c.output = (c.command.empty() ? "kpzu" : c.command) + ".json";

  // Building the rules catches inadmissible custom expressions early.
  for (std::size_t i = 0; i < c.rules.size(); ++i) {
    try {
      make_rule(c.rules[i]);
    } catch (const Error& e) {
      err.add("rules[" + std::to_string(i) + "]: " + e.what());
    }
  }
  if (!err.problems.empty()) throw ConfigError(err.problems);
  if (c.laws.empty()) c.laws.push_back(LawSpec{});
  return c;
}

}  // namespace kpzu

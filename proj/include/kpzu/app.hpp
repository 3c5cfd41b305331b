#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "kpzu/config.hpp"
#include "kpzu/gf_check.hpp"
#include "kpzu/parallel.hpp"
#include "kpzu/polymer.hpp"
#include "kpzu/renorm.hpp"
#include "kpzu/scaling.hpp"
#include "kpzu/stats.hpp"
#include "kpzu/surface.hpp"
#include "kpzu/walk_kernel.hpp"

#ifndef KPZU_VERSION
#define KPZU_VERSION "0.0.0"
#endif

namespace kpzu {

inline constexpr const char* version() { return KPZU_VERSION; }

/// Result of one subcommand: the JSON document, an optional CSV side table,
/// and the exit status the CLI should return.
struct RunResult {
  json doc;
  std::string csv;
  int status = 0;
};

inline Matching matching_of(const ExperimentConfig& c) {
  return c.matching == "paper" ? Matching::Paper : Matching::Reduced;
}

inline DriftMode drift_of(const std::string& s) {
  if (s == "cumulant") return DriftMode::Cumulant;
  if (s == "logmgf") return DriftMode::LogMgf;
  return DriftMode::None;
}

/// JSON has no infinities; non-finite values become null.
inline json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json digest_json(const Digest& d) {
  return {{"count", d.count},       {"mean", num(d.mean)},     {"variance", num(d.variance)},
          {"skewness", num(d.skewness)}, {"q1", num(d.q1)},    {"median", num(d.median)},
          {"q3", num(d.q3)},        {"stderr_mean", num(d.stderr_mean())}};
}

inline json kernel_json(const KernelConstants& k) {
  return {{"horizon", k.horizon},
          {"C1", k.C1},
          {"C2", k.C2},
          {"sum_sq", k.sum_sq},
          {"decay_constant", k.decay_constant},
          {"sum_sq_tail_bound", k.sum_sq_tail_bound},
          {"C1_tail_bound", k.C1_tail_bound},
          {"C2_interval", {k.C2 - k.C2_tail_lower, k.C2 + k.C2_tail_upper}}};
}

inline json constants_json(const RenormConstants& k) {
  json j{{"matching", to_string(k.matching)},
         {"beta", k.beta},
         {"b", k.b},
         {"c", k.c},
         {"c_eff", k.c_eff},
         {"psi00", k.psi00},
         {"mu2", k.mu2},
         {"mu3", k.mu3},
         {"mu4", k.mu4},
         {"V", k.V},
         {"V_alt", k.V_alt},
         {"N", k.N},
         {"drift_cumulant_per_t", k.drift_cumulant_per_t}};
  j["drift_logmgf_per_t"] = k.has_logmgf ? json(k.drift_logmgf_per_t) : json(nullptr);
  return j;
}

// ---------------------------------------------------------------------------

inline RunResult run_constants(const ExperimentConfig& c) {
  RunResult r;
  r.doc["kernel"] = kernel_json(cached_kernel_constants(c.horizon));
  if (!c.rules.empty() && !c.N_grid.empty()) {
    const auto rule = make_rule(c.rules.front());
    const auto law = make_law(c.laws.front());
    json per_n = json::array();
    for (long N : c.N_grid) {
      per_n.push_back(constants_json(compute_constants(rule, law, N, c.horizon, matching_of(c))));
    }
    r.doc["constants"] = per_n;
  }
  return r;
}

/// Coefficient identities of the walk generating functions.
inline RunResult run_gf_check(const ExperimentConfig&) {
  RunResult r;
  json checks = json::array();
  bool all = true;
  for (const auto& c : gf_identity_suite(20)) {
    checks.push_back({{"name", c.name}, {"max_error", c.max_error}, {"tolerance", c.tolerance},
                      {"pass", c.pass}});
    all = all && c.pass;
  }
  r.doc["checks"] = checks;
  r.doc["all_pass"] = all;
  return r;
}

/// One replica on [-aN, aN] x [0, bN].
inline RunResult run_simulate(const ExperimentConfig& c) {
  RunResult r;
  const auto rule = make_rule(c.rules.front());
  const auto law = make_law(c.laws.front());
  auto rr = rule;
  if (c.phi_radius) rr.set_phi_radius(*c.phi_radius);
  const long N = c.N();
  const Domain dom = coupling_window(N, c.a, c.b);
  const auto sheet = sample_sheet(law, c.seed0, dom);
  const DriftMode mode = drift_of(c.drift);
  const auto k = compute_constants(rule, law, N, c.horizon, matching_of(c));
  GrowOptions opt{mode, std::nullopt, 0.0};
  if (mode != DriftMode::None) opt.drift_beta = k.b;
  const auto s = grow(rr, sheet, N, opt);

  json rows = json::array();
  std::ostringstream csv;
  csv << "x,t,height\n";
  csv.precision(17);
  for (long t = 0; t <= dom.horizon; ++t) {
    json vals = json::array();
    for (long x = -dom.half_width; x <= dom.half_width; ++x) {
      if (!dom.on_parity(x, t)) continue;
      const double h = s.heights(x, t);
      vals.push_back(num(h));
      csv << x << ',' << t << ',' << h << '\n';
    }
    const long x0 = dom.on_parity(-dom.half_width, t) ? -dom.half_width : -dom.half_width + 1;
    rows.push_back({{"t", t}, {"x0", x0}, {"heights", vals}});
  }
  r.doc["surface"] = {{"N", N},
                      {"seed", c.seed0},
                      {"drift", to_string(mode)},
                      {"drift_per_step", s.drift_per_step},
                      {"psi00", s.psi00},
                      {"rows", rows}};
  r.doc["constants"] = constants_json(k);
  if (c.csv) r.csv = csv.str();
  return r;
}

inline RunResult run_couple(const ExperimentConfig& c) {
  RunResult r;
  const auto rule = make_rule(c.rules.front());
  const auto law = make_law(c.laws.front());
  CouplingOptions opt{c.a, c.b, c.epsilon, matching_of(c)};
  json levels = json::array();
  std::ostringstream csv;
  csv.precision(17);
  csv << "N,replica,seed,sup_delta,sup_r_minus_k,y_sup_diff,y_sup_dev,blow_up\n";
  std::vector<double> medians;
  bool any_blow = false;
  for (std::size_t g = 0; g < c.N_grid.size(); ++g) {
    const long N = c.N_grid[g];
    const std::uint64_t base = derive_seed(c.seed0, 1000 + g);
    std::vector<double> sup(c.replicas), rk(c.replicas), ydiff(c.replicas), ydev(c.replicas);
    std::vector<std::string> blow(c.replicas);
    parallel_for(c.replicas, c.threads, [&](std::size_t i) {
      try {
        const auto cf = coupling_delta(rule, law, N, derive_seed(base, i), opt);
        sup[i] = cf.sup_delta;
        rk[i] = cf.sup_r_minus_k;
        ydiff[i] = cf.flatness.sup_diff;
        ydev[i] = cf.flatness.sup_dev_max;
      } catch (const BlowUpError& e) {
        sup[i] = std::numeric_limits<double>::infinity();
        rk[i] = ydiff[i] = ydev[i] = std::nan("");
        blow[i] = e.what();
      }
    });
    std::size_t n_blow = 0;
    std::string first_blow;
    for (std::size_t i = 0; i < c.replicas; ++i) {
      if (!blow[i].empty()) {
        if (n_blow++ == 0) first_blow = blow[i];
      }
      csv << N << ',' << i << ',' << derive_seed(base, i) << ',' << sup[i] << ',' << rk[i] << ','
          << ydiff[i] << ',' << ydev[i] << ',' << (blow[i].empty() ? 0 : 1) << '\n';
    }
    any_blow = any_blow || n_blow > 0;
    const double med = median(sup);
    medians.push_back(med);
    json lvl{{"N", N},
             {"lag", window_lag(N, c.epsilon)},
             {"median_sup_delta", num(med)},
             {"sup_delta", digest_json(digest(sup))},
             {"blow_ups", n_blow},
             {"median_sup_r_minus_k", num(median(rk))},
             {"median_y_sup_diff", num(median(ydiff))},
             {"median_y_sup_dev", num(median(ydev))}};
    if (n_blow) lvl["first_blow_up"] = first_blow;
    levels.push_back(lvl);
  }
  bool decreasing = true;
  for (std::size_t g = 1; g < medians.size(); ++g) {
    if (!(medians[g] < medians[g - 1])) decreasing = false;
  }
  r.doc["levels"] = levels;
  r.doc["strictly_decreasing"] = decreasing && std::isfinite(medians.front());
  r.doc["polymer_beta"] = polymer_beta(rule, opt.matching);
  if (c.csv) r.csv = csv.str();
  r.status = any_blow ? 3 : 0;
  return r;
}

/// Y and K diagnostics for the polymer matched to the rule.
inline RunResult run_renorm_check(const ExperimentConfig& c) {
  RunResult r;
  const auto rule = make_rule(c.rules.front());
  const auto law = make_law(c.laws.front());
  const Matching m = matching_of(c);
  const double bp = polymer_beta(rule, m);
  const double pref = y_prefactor(effective_c(rule, m), bp);
  json levels = json::array();
  for (std::size_t g = 0; g < c.N_grid.size(); ++g) {
    const long N = c.N_grid[g];
    const auto k = compute_constants(rule, law, N, c.horizon, m);
    const long lag = window_lag(N, c.epsilon);
    const WalkKernel kernel(lag);
    const Domain dom{4, N, 0};
    const std::uint64_t base = derive_seed(c.seed0, 2000 + g);
    std::vector<double> y(c.replicas), k4(c.replicas), dev(c.replicas), diff(c.replicas);
    parallel_for(c.replicas, c.threads, [&](std::size_t i) {
      const auto sheet = sample_sheet(law, derive_seed(base, i), dom);
      KField kf;
      if (bp != 0.0) {
        kf = k_field(xi_field(sheet, bp, N), kernel, c.epsilon);
      } else {
        kf = k_field_linear(sheet, N, kernel, c.epsilon);
      }
      const auto yf = y_field(kf, pref);
      y[i] = yf(1, N);
      const double kv = kf(1, N);
      k4[i] = kv * kv * kv * kv;
      const auto fl = y_flatness_report(yf, 1, N);
      dev[i] = fl.sup_dev_max;
      diff[i] = fl.sup_diff;
    });
    const auto ws = window_sums(kernel, lag, N);
    double e2 = 0.0, e4 = 0.0;
    if (bp != 0.0) {
      std::tie(e2, e4) = xi_moments(law, tilt(bp, N));
    } else {
      const double s = std::pow(double(N), -0.25);
      e2 = law.moment(2) * s * s;
      e4 = law.moment(4) * s * s * s * s;
    }
    const auto yd = digest(y), kd = digest(k4);
    levels.push_back({{"N", N},
                      {"lag", lag},
                      {"V", k.V},
                      {"mean_Y_1_N", yd.mean},
                      {"stderr_Y_1_N", yd.stderr_mean()},
                      {"mean_K4_1_N", kd.mean},
                      {"stderr_K4_1_N", kd.stderr_mean()},
                      {"K4_formula_printed", k4_formula_printed(ws, e2, e4)},
                      {"K4_formula_exact", k4_formula_exact(ws, e2, e4)},
                      {"median_y_sup_dev", median(dev)},
                      {"median_y_sup_diff", median(diff)}});
  }
  r.doc["polymer_beta"] = bp;
  r.doc["y_prefactor"] = pref;
  r.doc["levels"] = levels;
  return r;
}

inline RunResult run_invariance(const ExperimentConfig& c) {
  RunResult r;
  std::vector<EnsembleConfig> cfgs;
  for (const auto& rs : c.rules) {
    for (const auto& ls : c.laws) {
      EnsembleConfig e;
      e.rule = make_rule(rs);
      if (c.phi_radius) e.rule.set_phi_radius(*c.phi_radius);
      e.law = make_law(ls);
      e.matching = matching_of(c);
      e.kernel_horizon = c.horizon;
      cfgs.push_back(e);
    }
  }
  ProbeSpec probes;
  probes.points = c.probes;
  probes.observable = c.observable == "exp-beta-ftilde" ? Observable::ExpBetaFTilde
                                                        : Observable::FTilde;
  const auto v = invariance_suite(cfgs, c.N_grid, probes, c.replicas, c.seed0, c.threads, c.alpha);

  json levels = json::array();
  std::ostringstream csv;
  csv.precision(17);
  csv << "N,config,probe_x,probe_t,replica,value\n";
  for (const auto& lvl : v.levels) {
    json ens = json::array();
    for (std::size_t e = 0; e < lvl.ensembles.size(); ++e) {
      const auto& s = lvl.ensembles[e];
      json dg = json::array();
      for (std::size_t p = 0; p < s.digests.size(); ++p) {
        dg.push_back({{"x", s.probes[p].x}, {"t", s.probes[p].t}, {"digest", digest_json(s.digests[p])}});
        for (std::size_t i = 0; i < s.samples[p].size(); ++i) {
          csv << lvl.N << ',' << e << ',' << s.probes[p].x << ',' << s.probes[p].t << ',' << i
              << ',' << s.samples[p][i] << '\n';
        }
      }
      ens.push_back({{"label", s.label}, {"seed", s.seed0}, {"drift_per_t", s.drift_per_t},
                     {"probes", dg}});
    }
    json pairs = json::array();
    for (const auto& p : lvl.pairs) {
      pairs.push_back({{"a", p.a}, {"b", p.b}, {"probe", p.probe}, {"D", p.D}, {"p", p.p},
                       {"p_holm", p.p_holm}});
    }
    json l{{"N", lvl.N}, {"ensembles", ens}, {"pairs", pairs}, {"median_D", num(lvl.median_D)},
           {"min_p_holm", lvl.min_p_holm}};
    if (!lvl.failure.empty()) l["failure"] = lvl.failure;
    levels.push_back(l);
  }
  r.doc["levels"] = levels;
  r.doc["verdict"] = {{"ks_pass", v.ks_pass}, {"trend_pass", v.trend_pass}, {"pass", v.pass},
                      {"alpha", v.alpha}};
  if (c.csv) r.csv = csv.str();
  return r;
}

inline RunResult run(const ExperimentConfig& c) {
  RunResult r;
  if (c.command == "constants") r = run_constants(c);
  else if (c.command == "gf-check") r = run_gf_check(c);
  else if (c.command == "simulate") r = run_simulate(c);
  else if (c.command == "couple") r = run_couple(c);
  else if (c.command == "renorm-check") r = run_renorm_check(c);
  else if (c.command == "invariance") r = run_invariance(c);
  else throw ParseError("unknown command '" + c.command + "'");
  r.doc["command"] = c.command;
  r.doc["config"] = to_json(c);
  r.doc["version"] = version();
  return r;
}

/// Exit status for an error escaping a run.
inline int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const BlowUpError*>(&e)) return 3;
  if (dynamic_cast<const CapacityError*>(&e)) return 4;
  if (dynamic_cast<const ParseError*>(&e) || dynamic_cast<const DesignError*>(&e) ||
      dynamic_cast<const InadmissibleRuleError*>(&e) ||
      dynamic_cast<const DerivativeExtractionError*>(&e) ||
      dynamic_cast<const DomainError*>(&e) || dynamic_cast<const ModeError*>(&e) ||
      dynamic_cast<const SizeError*>(&e) || dynamic_cast<const UnsupportedMomentError*>(&e)) {
    return 2;
  }
  return 1;
}

}  // namespace kpzu

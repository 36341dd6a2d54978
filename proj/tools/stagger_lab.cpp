// Copyright (c) 2026 StaggerLab contributors
// SPDX-License-Identifier: MIT
//
// stagger_lab: command-line front door.
//
// Subcommands: diagnose, estimate, sensitivity, calibrate, simulate,
// frontier. Configuration is a single JSON document (--config); --seed,
// --threads, and --out override it, and STAGGER_LAB_THREADS is the thread
// fallback when neither flag nor config sets a count. Every successful run
// writes its artifacts plus a manifest.json carrying SHA-256 checksums.
// Failures print one machine-readable JSON object on stdout -- {"error":
// {"code": ..., "message": ...}} -- and exit nonzero. Reruns with identical
// config and seed are byte-identical regardless of thread count.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "stagger/csv.hpp"
#include "stagger/diagnostics.hpp"
#include "stagger/errors.hpp"
#include "stagger/group_time.hpp"
#include "stagger/montecarlo.hpp"
#include "stagger/panel.hpp"
#include "stagger/report.hpp"
#include "stagger/sensitivity.hpp"
#include "stagger/sha256.hpp"
#include "stagger/twfe.hpp"

using json = nlohmann::json;
using namespace stagger;

namespace {

// ---------------------------------------------------------------------------
// Artifact sink: serialize in memory, write through write_text_file, and
// record path + checksum for the manifest.
// ---------------------------------------------------------------------------
struct Artifacts {
  std::filesystem::path dir;
  json outputs = json::array();
  std::vector<std::string> warnings;

  void add(const std::string& name, const std::string& contents) {
    write_text_file((dir / name).string(), contents);
    outputs.push_back({{"path", name},
                       {"sha256", sha256_hex(contents)},
                       {"bytes", contents.size()}});
  }
  void finish(const std::string& command, std::uint64_t seed) {
    json m;
    m["command"] = command;
    m["version"] = kVersion;
    m["seed"] = seed;
    m["outputs"] = outputs;
    m["warnings"] = warnings;
    write_text_file((dir / "manifest.json").string(), m.dump(2) + "\n");
  }
};

std::string render(const std::function<void(std::ostream&)>& fn) {
  std::ostringstream os;
  fn(os);
  return os.str();
}

// ---------------------------------------------------------------------------
// Config plumbing.
// ---------------------------------------------------------------------------
json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream is(path);
  if (!is) fail(Errc::IoError, "cannot open config file: " + path);
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    fail(Errc::BadConfig, std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) fail(Errc::BadConfig, "config root must be a JSON object");
  return j;
}

// Named numeric profiles ("presets"). A config selecting {"preset": NAME}
// starts from the profile with its own keys layered on top.
json preset_profile(const std::string& name) {
  if (name == "mc81-paper")
    return json{{"design", {{"name", "mc81"}, {"dgp", 1}, {"n", 5000}, {"T", 12}}},
                {"R", 2000},
                {"DeltaR_grid", {0.0, 0.25, 0.50, 1.00}},
                {"B_grid", {0.0, 0.05, 0.10, 0.20}},
                {"Gamma_grid", {0.0, 0.005, 0.010, 0.020}}};
  if (name == "mc81-quick")
    return json{{"design", {{"name", "mc81"}, {"n", 1000}}},
                {"R", 100},
                {"DeltaR_grid", {0.0}},
                {"B_grid", {0.0}},
                {"Gamma_grid", {0.0}}};
  if (name == "mc84-paper")
    return json{{"design", {{"name", "mc84"}, {"n", 2000}, {"T", 8}, {"t0", 5}, {"tau", 1.0}}},
                {"R", 2000},
                {"DeltaR_grid", {0.0, 0.25, 0.50}},
                {"B_grid", {0.0, 0.50, 1.00, 1.50}},
                {"Gamma_grid", {0.0, 0.05, 0.10, 0.15}},
                {"threshold", 0.10}};
  if (name == "mc84-quick")
    return json{{"design", {{"name", "mc84"}}},
                {"R", 200},
                {"DeltaR_grid", {0.0, 0.25, 0.50}},
                {"B_grid", {0.0}},
                {"Gamma_grid", {0.0, 0.05, 0.10, 0.15}},
                {"threshold", 0.10}};
  if (name == "mc85-default") return json{{"design", {{"name", "mc85"}}}};
  fail(Errc::BadConfig, "unknown preset \"" + name + "\"");
}

json apply_preset(json cfg) {
  if (!cfg.contains("preset")) return cfg;
  if (!cfg.at("preset").is_string())
    fail(Errc::BadConfig, "preset must be a string");
  json base = preset_profile(cfg.at("preset").get<std::string>());
  if (cfg.contains("design") && base.contains("design") && cfg["design"].is_object()) {
    json d = base["design"];
    d.update(cfg["design"]);
    cfg["design"] = d;
  }
  base.update(cfg);
  return base;
}

double jnum(const json& j, const char* key, double dflt) {
  if (!j.contains(key)) return dflt;
  if (!j.at(key).is_number())
    fail(Errc::BadConfig, std::string(key) + " must be a number");
  return j.at(key).get<double>();
}

int jint(const json& j, const char* key, int dflt) {
  if (!j.contains(key)) return dflt;
  if (!j.at(key).is_number_integer())
    fail(Errc::BadConfig, std::string(key) + " must be an integer");
  return j.at(key).get<int>();
}

bool jbool(const json& j, const char* key, bool dflt) {
  if (!j.contains(key)) return dflt;
  if (!j.at(key).is_boolean())
    fail(Errc::BadConfig, std::string(key) + " must be a boolean");
  return j.at(key).get<bool>();
}

std::vector<double> jgrid(const json& j, const char* key,
                          std::vector<double> dflt) {
  if (!j.contains(key)) return dflt;
  const json& a = j.at(key);
  if (!a.is_array() || a.empty())
    fail(Errc::BadConfig, std::string(key) + " must be a nonempty array of numbers");
  std::vector<double> out;
  for (const auto& v : a) {
    if (!v.is_number())
      fail(Errc::BadConfig, std::string(key) + " must contain only numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Design and panel construction.
// ---------------------------------------------------------------------------
Mc81Spec mc81_from(const json& d) {
  Mc81Spec s;
  s.dgp = jint(d, "dgp", s.dgp);
  s.n = jint(d, "n", s.n);
  s.T = jint(d, "T", s.T);
  s.DeltaR = jnum(d, "DeltaR", 0.0);
  s.B = jnum(d, "B", 0.0);
  s.Gamma = jnum(d, "Gamma", 0.0);
  s.noiseless = jbool(d, "noiseless", false);
  return s;
}

Mc84Spec mc84_from(const json& d) {
  Mc84Spec s;
  s.n = jint(d, "n", s.n);
  s.T = jint(d, "T", s.T);
  s.t0 = jint(d, "t0", s.t0);
  s.tau = jnum(d, "tau", s.tau);
  s.DeltaR = jnum(d, "DeltaR", 0.0);
  s.B = jnum(d, "B", 0.0);
  s.Gamma = jnum(d, "Gamma", 0.0);
  return s;
}

Mc85Spec mc85_from(const json& d) {
  Mc85Spec s = mc85_default();
  s.n = jint(d, "n", s.n);
  return s;
}

Panel config_panel(const json& cfg, std::uint64_t seed) {
  const bool has_path = cfg.contains("panel");
  const bool has_design = cfg.contains("design");
  if (has_path == has_design)
    fail(Errc::BadConfig,
         "config must provide exactly one of \"panel\" (CSV path) or \"design\"");
  if (has_path) {
    if (!cfg.at("panel").is_string())
      fail(Errc::BadConfig, "panel must be a CSV file path");
    const std::string path = cfg.at("panel").get<std::string>();
    if (!std::filesystem::exists(path))
      fail(Errc::IoError, "input panel not found: " + path);
    return build_panel(read_panel_csv_file(path));
  }
  const json& d = cfg.at("design");
  if (!d.is_object()) fail(Errc::BadConfig, "design must be an object");
  const std::string name = d.value("name", "mc81");
  if (name == "mc81") return simulate_mc81(mc81_from(d), seed);
  if (name == "mc84") return simulate_mc84(mc84_from(d), seed);
  if (name == "mc85") return simulate_mc85(mc85_from(d), seed);
  fail(Errc::BadConfig, "design.name must be one of mc81, mc84, mc85");
}

ControlKind control_from(const json& cfg) {
  const std::string s = cfg.value("control", "never-treated");
  if (s == "never-treated") return ControlKind::NeverTreated;
  if (s == "not-yet-treated") return ControlKind::NotYetTreated;
  fail(Errc::BadConfig, "control must be never-treated or not-yet-treated");
}

Scheme scheme_from(const json& cfg) {
  Scheme s;
  const std::string k = cfg.value("scheme", "sample-share");
  if (k == "sample-share")
    s.kind = Scheme::SampleShare;
  else if (k == "population-share")
    s.kind = Scheme::PopulationShare;
  else if (k == "exposure")
    s.kind = Scheme::Exposure;
  else
    fail(Errc::BadConfig, "scheme must be sample-share, population-share or exposure");
  if (cfg.contains("population_shares")) {
    const json& ps = cfg.at("population_shares");
    if (!ps.is_object())
      fail(Errc::BadConfig, "population_shares must map cohort -> share");
    for (auto it = ps.begin(); it != ps.end(); ++it) {
      try {
        s.population_shares[std::stoll(it.key())] = it.value().get<double>();
      } catch (const std::exception&) {
        fail(Errc::BadConfig, "population_shares keys must be integer cohorts");
      }
    }
  }
  return s;
}

EventWindow window_from(const json& cfg, const Panel& p) {
  if (!cfg.contains("window")) return default_window(p);
  const json& w = cfg.at("window");
  if (!w.is_object() || !w.contains("k_min") || !w.contains("k_max"))
    fail(Errc::BadConfig, "window must be an object with k_min and k_max");
  EventWindow ew;
  ew.k_min = jint(w, "k_min", 0);
  ew.k_max = jint(w, "k_max", 0);
  ew.k0 = jint(w, "k0", -1);
  return ew;
}

std::vector<EstimatorKind> estimators_from(const json& cfg) {
  std::vector<std::string> names = {"group-time", "dr-crossfit", "twfe", "imputation"};
  if (cfg.contains("estimators")) {
    const json& a = cfg.at("estimators");
    if (!a.is_array() || a.empty())
      fail(Errc::BadConfig, "estimators must be a nonempty array of names");
    names.clear();
    for (const auto& v : a) {
      if (!v.is_string()) fail(Errc::BadConfig, "estimator names must be strings");
      names.push_back(v.get<std::string>());
    }
  }
  std::vector<EstimatorKind> out;
  for (const std::string& s : names) {
    if (s == "group-time")
      out.push_back(EstimatorKind::GroupTime);
    else if (s == "dr-crossfit")
      out.push_back(EstimatorKind::DrCrossfit);
    else if (s == "twfe")
      out.push_back(EstimatorKind::Twfe);
    else if (s == "imputation")
      out.push_back(EstimatorKind::Imputation);
    else
      fail(Errc::BadConfig, "unknown estimator \"" + s + "\"");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Commands.
// ---------------------------------------------------------------------------
void cmd_diagnose(const json& cfg, std::uint64_t seed, Artifacts& art) {
  const Panel p = config_panel(cfg, seed);
  const EventWindow w = window_from(cfg, p);
  const TwfeWeights tw = implicit_weights(p, w);
  const DiagnosticsReport rep = weight_diagnostics(tw);
  art.add("weights.csv",
          render([&](std::ostream& os) { write_weights_csv(tw, os); }));
  art.add("diagnostics.csv",
          render([&](std::ostream& os) { write_diagnostics_csv(rep, os); }));
}

void cmd_estimate(const json& cfg, std::uint64_t seed, Artifacts& art) {
  const Panel p = config_panel(cfg, seed);
  const ControlKind ck = control_from(cfg);
  const bool prop = jbool(cfg, "propensity", false);
  const GattTable tab = gatt_table(p, ck, prop);
  if (tab.cells.empty())
    fail(Errc::MissingCell,
         "no cohort is estimable at any horizon 0.." + std::to_string(p.T() - 2) +
             "; the panel has no treated cohorts with usable base periods");
  for (const std::string& w : tab.warnings) art.warnings.push_back(w);
  const AggregateResult agg = aggregate_event(tab.cells, p, scheme_from(cfg));
  for (const std::string& w : agg.warnings) art.warnings.push_back(w);
  art.add("gatt.csv", render([&](std::ostream& os) { write_gatt_csv(tab, os); }));
  art.add("aggregate.csv",
          render([&](std::ostream& os) { write_aggregate_csv(agg, os); }));
  try {
    const std::vector<CumulativeRow> cum = cumulative_effects(agg, p.n());
    art.add("cumulative.csv",
            render([&](std::ostream& os) { write_cumulative_csv(cum, os); }));
  } catch (const Error& e) {
    art.warnings.push_back(std::string("cumulative.csv skipped: ") + e.what());
  }
  const ImputationResult imp = imputation_event_study(p);
  art.add("imputation.csv",
          render([&](std::ostream& os) { write_imputation_csv(imp, os); }));
  std::vector<PlotPoint> pts;
  for (const AggregateRow& r : agg.rows)
    pts.push_back({static_cast<double>(r.k), r.estimate, "event-study"});
  for (const ImputationRow& r : imp.rows)
    pts.push_back({static_cast<double>(r.k), r.estimate, "imputation"});
  art.add("plots.csv", render([&](std::ostream& os) { write_plot_csv(pts, os); }));
}

void cmd_sensitivity(const json& cfg, std::uint64_t seed, Artifacts& art) {
  double theta = 0, se = 0;
  int t0 = 2;
  if (cfg.contains("theta_hat")) {
    theta = jnum(cfg, "theta_hat", 0.0);
    se = jnum(cfg, "se", 0.0);
    t0 = jint(cfg, "t0", 2);
  } else {
    const Panel p = config_panel(cfg, seed);
    const GattTable tab = gatt_table(p, control_from(cfg), jbool(cfg, "propensity", false));
    const AggregateResult agg = aggregate_event(tab.cells, p, scheme_from(cfg));
    const int k = jint(cfg, "horizon", 0);
    const AggregateRow* row = nullptr;
    for (const AggregateRow& r : agg.rows)
      if (r.k == k) row = &r;
    if (!row)
      fail(Errc::MissingCell, "no aggregate estimate at horizon " + std::to_string(k));
    theta = row->estimate;
    se = row->se;
    const std::vector<std::int64_t> ads = p.adoption_times();
    t0 = jint(cfg, "t0", ads.empty() ? 2 : static_cast<int>(ads.front()));
  }
  const double z = jnum(cfg, "z", 1.96);
  const std::vector<double> Bg = jgrid(cfg, "B_grid", default_kappaB_grid());
  const std::vector<double> Gg = jgrid(cfg, "Gamma_grid", default_gamma_grid(false));
  const std::vector<double> Dg = jgrid(cfg, "DeltaR_grid", default_cR_grid());
  std::vector<RegionCellInput> cells;
  for (double dr : Dg)
    for (double b : Bg)
      for (double g : Gg) {
        RestrictionClass rc;
        rc.B = b;
        rc.Gamma = g;
        rc.DeltaR = dr;
        const Interval iv = robust_interval(theta, se, rc, t0, z);
        RegionCellInput ci;
        ci.B = b;
        ci.Gamma = g;
        ci.DeltaR = dr;
        ci.coverage = jnum(cfg, "coverage_default", 1.0);
        ci.length = iv.length();
        ci.interval = iv;
        cells.push_back(ci);
      }
  const RegionResult reg = sensitivity_region(cells, jnum(cfg, "cov_min", 0.90),
                                              jnum(cfg, "len_factor", 2.5));
  if (!reg.note.empty()) art.warnings.push_back(reg.note);
  art.add("region.csv", render([&](std::ostream& os) { write_region_csv(reg, os); }));
  std::vector<PlotPoint> pts;
  for (const RegionCellInput& ci : cells) {
    const std::string tag =
        " B=" + fmt_double(ci.B) + " DeltaR=" + fmt_double(ci.DeltaR);
    pts.push_back({ci.Gamma, ci.interval.lo, "robust-lo" + tag});
    pts.push_back({ci.Gamma, ci.interval.hi, "robust-hi" + tag});
  }
  art.add("plots.csv", render([&](std::ostream& os) { write_plot_csv(pts, os); }));
}

void cmd_calibrate(const json& cfg, std::uint64_t seed, Artifacts& art) {
  const Panel p = config_panel(cfg, seed);
  const ControlKind ck = control_from(cfg);
  const bool prop = jbool(cfg, "propensity", false);
  const Scheme sch = scheme_from(cfg);
  const int max_lead = jint(cfg, "max_lead", 3);
  const std::vector<GattCell> pl = placebo_cells(p, ck, max_lead, prop);
  const AggregateResult pre = aggregate_event(pl, p, sch);
  std::map<int, std::pair<double, double>> pre_coefs;
  for (const AggregateRow& r : pre.rows)
    if (r.k <= -2) pre_coefs[r.k] = {r.estimate, r.se};
  double tau_ref = 0;
  if (cfg.contains("tau_ref")) {
    tau_ref = jnum(cfg, "tau_ref", 0.0);
  } else {
    const GattTable tab = gatt_table(p, ck, prop);
    const AggregateResult agg = aggregate_event(tab.cells, p, sch);
    bool found = false;
    for (const AggregateRow& r : agg.rows)
      if (r.k == 0) {
        tau_ref = r.estimate;
        found = true;
      }
    if (!found)
      fail(Errc::MissingCell,
           "no horizon-0 aggregate to anchor tau_ref; supply tau_ref in config");
  }
  const Calibration cal =
      calibrate(pre_coefs, tau_ref, jnum(cfg, "kappa_B", 1.0),
                jnum(cfg, "c_R", 0.5), jnum(cfg, "eps_tau", 1e-6));
  json out;
  out["A_pre"] = cal.A_pre;
  out["M_pre"] = cal.M_pre;
  out["D_hat"] = cal.D_hat;
  out["B_hat"] = cal.B_hat;
  out["DeltaR_hat"] = cal.DeltaR_hat;
  out["Gamma_hat"] = cal.Gamma_hat;
  out["tau_ref"] = tau_ref;
  out["kappa_B"] = jnum(cfg, "kappa_B", 1.0);
  out["c_R"] = jnum(cfg, "c_R", 0.5);
  out["note"] = cal.note;
  art.add("calibration.json", out.dump(2) + "\n");
}

// Appends a rendered CSV to an accumulator, keeping the header only once.
void append_rows(std::string& acc, const std::string& csv, bool keep_header) {
  if (keep_header) {
    acc += csv;
    return;
  }
  const std::size_t pos = csv.find('\n');
  if (pos != std::string::npos) acc += csv.substr(pos + 1);
}

void cmd_simulate(const json& cfg, std::uint64_t seed, int threads, Artifacts& art) {
  if (!cfg.contains("design"))
    fail(Errc::BadConfig, "simulate needs a \"design\" (mc81, mc84 or mc85)");
  const json& d = cfg.at("design");
  if (!d.is_object()) fail(Errc::BadConfig, "design must be an object");
  const std::string name = d.value("name", "mc81");

  if (name == "mc85") {
    const Panel p = simulate_mc85(mc85_from(d), seed);
    art.add("panel.csv", render([&](std::ostream& os) { write_panel_csv(p, os); }));
    return;
  }

  const std::vector<double> Dg = jgrid(cfg, "DeltaR_grid", {0.0});
  const std::vector<double> Bg = jgrid(cfg, "B_grid", {0.0});
  const std::vector<double> Gg = jgrid(cfg, "Gamma_grid", {0.0});
  const int R = jint(cfg, "R", 200);

  if (name == "mc84") {
    const Mc84Spec base = mc84_from(d);
    std::vector<Mc84Row> rows;
    for (double dr : Dg)
      for (double b : Bg)
        for (double g : Gg) {
          Mc84Spec s = base;
          s.DeltaR = dr;
          s.B = b;
          s.Gamma = g;
          rows.push_back({dr, b, g, mc84_run(s, R, seed, threads)});
        }
    art.add("placebo.csv",
            render([&](std::ostream& os) { write_mc84_csv(rows, os); }));
    const double threshold = jnum(cfg, "threshold", 0.10);
    std::vector<FrontierRow> fr;
    for (double b : Bg)
      for (double dr : Dg) {
        std::vector<std::pair<double, double>> curve;
        for (const Mc84Row& r : rows)
          if (r.B == b && r.DeltaR == dr) curve.emplace_back(r.Gamma, r.cell.rej05);
        const Frontier f = frontier_crossing(curve, threshold);
        fr.push_back({b, dr, f.gamma_star, f.capped});
      }
    art.add("frontier.csv",
            render([&](std::ostream& os) { write_frontier_csv(fr, os); }));
    std::vector<PlotPoint> pts;
    for (const Mc84Row& r : rows)
      pts.push_back({r.Gamma, r.cell.rej05,
                     "rej05 B=" + fmt_double(r.B) + " DeltaR=" + fmt_double(r.DeltaR)});
    art.add("plots.csv", render([&](std::ostream& os) { write_plot_csv(pts, os); }));
    if (jbool(cfg, "emit_panel", false)) {
      const Panel p = simulate_mc84(base, seed);
      art.add("panel.csv", render([&](std::ostream& os) { write_panel_csv(p, os); }));
    }
    return;
  }
  if (name != "mc81")
    fail(Errc::BadConfig, "design.name must be one of mc81, mc84, mc85");

  const Mc81Spec base = mc81_from(d);
  const std::vector<EstimatorKind> est = estimators_from(cfg);
  RunCellOptions opt;
  opt.threads = threads;
  opt.crossfit_folds = jint(cfg, "crossfit_folds", 5);
  opt.diagnostics = jbool(cfg, "diagnostics", true);
  opt.len0_robust = jnum(cfg, "len0_robust", opt.len0_robust);
  const bool single_cell = Dg.size() * Bg.size() * Gg.size() == 1;
  std::string metrics, components, diagcsv;
  bool first = true;
  for (double dr : Dg)
    for (double b : Bg)
      for (double g : Gg) {
        Mc81Spec s = base;
        s.DeltaR = dr;
        s.B = b;
        s.Gamma = g;
        const CellResult r = run_cell(s, est, R, seed, opt);
        append_rows(metrics,
                    render([&](std::ostream& os) { write_cell_metrics_csv(r, os); }),
                    first);
        if (single_cell) {
          components = render(
              [&](std::ostream& os) { write_cell_components_csv(r, os); });
          if (opt.diagnostics)
            diagcsv = render(
                [&](std::ostream& os) { write_cell_diagnostics_csv(r, os); });
        }
        first = false;
      }
  art.add("cells.csv", metrics);
  if (single_cell) {
    art.add("components.csv", components);
    if (opt.diagnostics) art.add("cell_diagnostics.csv", diagcsv);
  } else {
    art.warnings.push_back(
        "components.csv and cell_diagnostics.csv are emitted only for "
        "single-cell runs; the per-cell columns do not carry a cell id");
  }
  if (jbool(cfg, "emit_panel", false)) {
    const Panel p = simulate_mc81(base, seed);
    art.add("panel.csv", render([&](std::ostream& os) { write_panel_csv(p, os); }));
  }
}

void cmd_frontier(const json& cfg, Artifacts& art) {
  if (cfg.contains("curve")) {
    const json& cj = cfg.at("curve");
    if (!cj.is_array() || cj.size() < 2)
      fail(Errc::BadConfig, "curve must be an array of at least two [gamma, value] pairs");
    std::vector<std::pair<double, double>> curve;
    for (const auto& e : cj) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
        fail(Errc::BadConfig, "curve entries must be [gamma, value] number pairs");
      curve.emplace_back(e[0].get<double>(), e[1].get<double>());
    }
    const Frontier f = frontier_crossing(curve, jnum(cfg, "threshold", 0.10));
    const std::vector<FrontierRow> rows{
        {jnum(cfg, "B", 0.0), jnum(cfg, "DeltaR", 0.0), f.gamma_star, f.capped}};
    art.add("frontier.csv",
            render([&](std::ostream& os) { write_frontier_csv(rows, os); }));
    std::vector<PlotPoint> pts;
    for (const auto& [x, y] : curve) pts.push_back({x, y, "monitored"});
    art.add("plots.csv", render([&](std::ostream& os) { write_plot_csv(pts, os); }));
    return;
  }
  if (!cfg.contains("theta_hat"))
    fail(Errc::BadConfig,
         "frontier needs either a monitored \"curve\" or \"theta_hat\"/\"se\"");
  const double theta = jnum(cfg, "theta_hat", 0.0);
  const double se = jnum(cfg, "se", 0.0);
  const int t0 = jint(cfg, "t0", 2);
  const double z = jnum(cfg, "z", 1.96);
  const double B = jnum(cfg, "B", 0.0);
  const double dr = jnum(cfg, "DeltaR", 0.0);
  const std::vector<double> grid = jgrid(cfg, "Gamma_grid", default_gamma_grid(false));
  const auto at = [&](double g) {
    RestrictionClass rc;
    rc.B = B;
    rc.Gamma = g;
    rc.DeltaR = dr;
    return robust_interval(theta, se, rc, t0, z);
  };
  const Frontier f = breakdown_frontier(grid, at);
  const std::vector<FrontierRow> rows{{B, dr, f.gamma_star, f.capped}};
  art.add("frontier.csv",
          render([&](std::ostream& os) { write_frontier_csv(rows, os); }));
  std::vector<PlotPoint> pts;
  for (double g : grid) {
    const Interval iv = at(g);
    pts.push_back({g, iv.lo, "robust-lo"});
    pts.push_back({g, iv.hi, "robust-hi"});
  }
  art.add("plots.csv", render([&](std::ostream& os) { write_plot_csv(pts, os); }));
}

// ---------------------------------------------------------------------------
// Flag/env resolution.
// ---------------------------------------------------------------------------
std::uint64_t resolve_seed(const json& cfg, std::int64_t flag) {
  if (flag >= 0) return static_cast<std::uint64_t>(flag);
  if (cfg.contains("seed")) {
    if (!cfg.at("seed").is_number_integer() || cfg.at("seed").get<std::int64_t>() < 0)
      fail(Errc::BadConfig, "seed must be a nonnegative integer");
    return cfg.at("seed").get<std::uint64_t>();
  }
  return 1;
}

int resolve_threads(const json& cfg, int flag) {
  if (flag >= 0) return flag;
  if (cfg.contains("threads")) {
    const int t = jint(cfg, "threads", 0);
    if (t < 0) fail(Errc::BadConfig, "threads must be >= 0");
    return t;
  }
  if (const char* env = std::getenv("STAGGER_LAB_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 0)
      fail(Errc::BadConfig, "STAGGER_LAB_THREADS must be a nonnegative integer");
    return static_cast<int>(v);
  }
  return 0;  // hardware concurrency
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"StaggerLab: design-first event studies under staggered adoption"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::int64_t seed_flag = -1;
  int threads_flag = -1;
  std::string design_flag, grid_flag;
  bool paper_scale = false;
  int R_flag = 0, n_flag = 0;

  CLI::App* diagnose = app.add_subcommand(
      "diagnose", "TWFE implicit weights and contamination diagnostics");
  CLI::App* estimate = app.add_subcommand(
      "estimate", "group-time effects, aggregation, and comparators");
  CLI::App* sensitivity = app.add_subcommand(
      "sensitivity", "robust intervals over a restriction grid and region map");
  CLI::App* calibrate = app.add_subcommand(
      "calibrate", "restriction-class calibration from pre-period coefficients");
  CLI::App* simulate =
      app.add_subcommand("simulate", "Monte Carlo replication grids");
  CLI::App* frontier = app.add_subcommand("frontier", "breakdown frontier");
  for (CLI::App* s : {diagnose, estimate, sensitivity, calibrate, simulate, frontier}) {
    s->add_option("--config", config_path, "JSON config file");
    s->add_option("--seed", seed_flag, "RNG base seed (overrides config)");
    s->add_option("--threads", threads_flag,
                  "worker threads, 0 = auto (overrides config and "
                  "STAGGER_LAB_THREADS)");
    s->add_option("--out", out_dir, "output directory (default: out)");
  }
  simulate->add_option("--design", design_flag, "design name: mc81, mc84, mc85");
  simulate->add_option("--grid", grid_flag, "grid profile: paper or quick")
      ->check(CLI::IsMember({"paper", "quick"}));
  simulate->add_flag("--paper-scale", paper_scale,
                     "full replication profile: R = 2000 at full n and the "
                     "complete violation grid");
  simulate->add_option("--R", R_flag, "replications per grid cell (overrides config)");
  simulate->add_option("--n", n_flag, "units per replication (overrides config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    const json err{{"error", {{"code", "BadConfig"}, {"message", e.what()}}}};
    std::printf("%s\n", err.dump().c_str());
    return 1;
  }

  try {
    json cfg = apply_preset(load_config(config_path));
    const std::uint64_t seed = resolve_seed(cfg, seed_flag);
    const int threads = resolve_threads(cfg, threads_flag);

    Artifacts art;
    art.dir = out_dir;
    std::error_code ec;
    std::filesystem::create_directories(art.dir, ec);
    if (ec) fail(Errc::IoError, "cannot create output directory " + art.dir.string());

    std::string command;
    if (diagnose->parsed()) {
      command = "diagnose";
      cmd_diagnose(cfg, seed, art);
    } else if (estimate->parsed()) {
      command = "estimate";
      cmd_estimate(cfg, seed, art);
    } else if (sensitivity->parsed()) {
      command = "sensitivity";
      cmd_sensitivity(cfg, seed, art);
    } else if (calibrate->parsed()) {
      command = "calibrate";
      cmd_calibrate(cfg, seed, art);
    } else if (frontier->parsed()) {
      command = "frontier";
      cmd_frontier(cfg, art);
    } else {
      command = "simulate";
      json scfg = cfg;
      std::string dname = design_flag;
      if (dname.empty() && scfg.contains("design") && scfg["design"].is_object())
        dname = scfg["design"].value("name", "mc81");
      if (dname.empty()) dname = "mc81";
      if (dname != "mc81" && dname != "mc84" && dname != "mc85")
        fail(Errc::BadConfig, "design must be one of mc81, mc84, mc85");
      if (dname == "mc85") {
        if (!grid_flag.empty() || paper_scale)
          art.warnings.push_back("mc85 has no grid profile; --grid/--paper-scale ignored");
      } else {
        const auto apply_profile = [&](const std::string& key, bool force_design) {
          const json prof = preset_profile(key);
          for (const char* k : {"R", "DeltaR_grid", "B_grid", "Gamma_grid", "threshold"})
            if (prof.contains(k)) scfg[k] = prof.at(k);
          json d = scfg.value("design", json::object());
          if (force_design) {
            d.update(prof.at("design"));
          } else {
            json pd = prof.at("design");
            pd.update(d);
            d = pd;
          }
          scfg["design"] = d;
        };
        if (!grid_flag.empty()) apply_profile(dname + "-" + grid_flag, false);
        if (paper_scale) apply_profile(dname + "-paper", true);
      }
      if (!scfg.contains("design")) scfg["design"] = json::object();
      scfg["design"]["name"] = dname;
      if (R_flag > 0) scfg["R"] = R_flag;
      if (n_flag > 0) scfg["design"]["n"] = n_flag;
      cmd_simulate(scfg, seed, threads, art);
    }
    art.finish(command, seed);
    std::printf("wrote %zu artifact(s) + manifest.json to %s\n",
                static_cast<std::size_t>(art.outputs.size()),
                art.dir.string().c_str());
    return 0;
  } catch (const Error& e) {
    const json err{{"error", {{"code", errc_name(e.code())}, {"message", e.message()}}}};
    std::printf("%s\n", err.dump().c_str());
    return 1;
  } catch (const json::exception& e) {
    const json err{{"error", {{"code", "BadConfig"}, {"message", e.what()}}}};
    std::printf("%s\n", err.dump().c_str());
    return 1;
  } catch (const std::exception& e) {
    const json err{{"error", {{"code", "Internal"}, {"message", e.what()}}}};
    std::printf("%s\n", err.dump().c_str());
    return 1;
  }
}

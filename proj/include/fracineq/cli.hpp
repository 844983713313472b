// Batch commands behind the fracineq executable. Each command reads a
// ConfigDocument and returns a report of the form
//   {command, configDigest, seed, results[], violations[], timings}
// plus an optional CSV table.
#pragma once

#include <chrono>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fracineq/config.hpp"
#include "fracineq/convex_geometry.hpp"
#include "fracineq/epi_checker.hpp"
#include "fracineq/gaussian_measure.hpp"
#include "fracineq/random_sets.hpp"
#include "fracineq/serialization.hpp"
#include "fracineq/sharpness.hpp"
#include "fracineq/young_checker.hpp"

namespace fracineq::cli {

inline const std::vector<std::string> kCommands{"young-check", "bm-check", "gaussian-bm", "lln",
                                                "epi-check",   "sharpness", "partitions"};

/// Command-line settings that override or stand in for config fields.
struct RunOptions {
  std::string command;
  std::optional<std::uint64_t> seed;
  std::optional<double> tolerance;
  unsigned jobs = 1;
  // lln
  std::optional<std::string> model;
  std::optional<int> m_max;
  std::optional<std::size_t> replicates;
  // sharpness
  bool scan = false;
};

struct RunResult {
  json report;
  std::optional<std::string> csv;

  int exit_code() const { return report.at("violations").empty() ? 0 : 2; }
};

inline constexpr const char* kLlnCsvHeader = "M,mean,stderr";

namespace detail {

inline std::string csv_number(double x) {
  // Same shortest round-trip form as the JSON output.
  return json(x).dump();
}

/// Hypergraph at `ptr`, validated edge by edge so that errors name the edge.
inline Hypergraph load_hypergraph(const ConfigDocument& doc, const std::string& ptr) {
  const json& j = doc.at(ptr);
  const std::string edges_ptr = j.is_array() ? ptr : ptr + "/edges";
  const json& edges = doc.at(edges_ptr);
  if (!edges.is_array() || edges.empty()) doc.fail(edges_ptr, "hypergraph needs a nonempty list of edges");
  int largest = 0;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const std::string ep = edges_ptr + "/" + std::to_string(k);
    if (!edges[k].is_array() || edges[k].empty()) doc.fail(ep, "edge " + std::to_string(k) + " must be a nonempty list");
    for (std::size_t v = 0; v < edges[k].size(); ++v)
      if (!edges[k][v].is_number_integer())
        doc.fail(ep + "/" + std::to_string(v), "edge " + std::to_string(k) + " has a non-integer vertex");
    for (const auto& v : edges[k]) largest = std::max(largest, v.get<int>());
  }
  const int m = j.is_object() && j.contains("M") ? doc.get<int>(ptr + "/M") : largest;
  for (std::size_t k = 0; k < edges.size(); ++k)
    for (std::size_t v = 0; v < edges[k].size(); ++v) {
      const int x = edges[k][v].get<int>();
      if (x < 1 || x > m)
        doc.fail(edges_ptr + "/" + std::to_string(k) + "/" + std::to_string(v),
                 "edge " + std::to_string(k) + " has vertex " + std::to_string(x) + " outside [1," +
                     std::to_string(m) + "] (vertices are 1-based)");
    }
  return doc.guard(ptr, [&] { return hypergraph_from_json(j); });
}

/// "degree" (default), "extreme", or an explicit weight list.
inline std::vector<FractionalPartition> load_partitions(const ConfigDocument& doc, const std::string& ptr,
                                                        const Hypergraph& h) {
  if (!doc.has(ptr)) return {doc.guard(ptr, [&] { return degree_partition(h); })};
  const json& j = doc.at(ptr);
  if (j.is_string()) {
    const auto kind = j.get<std::string>();
    if (kind == "degree") return {doc.guard(ptr, [&] { return degree_partition(h); })};
    if (kind == "extreme") return doc.guard(ptr, [&] { return enumerate_extreme_partitions(h); });
    doc.fail(ptr, "partition must be \"degree\", \"extreme\" or a list of weights");
  }
  const auto w = doc.get<std::vector<double>>(ptr);
  return {doc.guard(ptr, [&] { return FractionalPartition(h, w); })};
}

inline std::vector<Density> load_densities(const ConfigDocument& doc, const std::string& ptr) {
  const json& list = doc.at(ptr);
  if (!list.is_array() || list.empty()) doc.fail(ptr, "densities must be a nonempty list");
  const auto base = std::filesystem::path(doc.source()).parent_path();
  std::vector<Density> out;
  for (std::size_t k = 0; k < list.size(); ++k) {
    const std::string p = ptr + "/" + std::to_string(k);
    out.push_back(doc.guard(p, [&] { return density_from_json(list[k], base); }));
  }
  return out;
}

inline std::vector<Polytope> load_bodies(const ConfigDocument& doc, const std::string& ptr) {
  const json& list = doc.at(ptr);
  if (!list.is_array() || list.empty()) doc.fail(ptr, "bodies must be a nonempty list");
  std::vector<Polytope> out;
  for (std::size_t k = 0; k < list.size(); ++k) {
    const std::string p = ptr + "/" + std::to_string(k);
    out.push_back(doc.guard(p, [&] { return polytope_from_json(list[k]); }));
  }
  return out;
}

/// A list of numbers, or {"from": a, "to": b, "count": k} for k equispaced values.
inline std::vector<double> load_range(const ConfigDocument& doc, const std::string& ptr) {
  const json& j = doc.at(ptr);
  if (j.is_array()) return doc.get<std::vector<double>>(ptr);
  const double a = doc.get<double>(ptr + "/from"), b = doc.get<double>(ptr + "/to");
  const int k = doc.get<int>(ptr + "/count");
  if (k < 1) doc.fail(ptr + "/count", "count must be positive");
  std::vector<double> out;
  for (int i = 0; i < k; ++i) out.push_back(k == 1 ? a : a + (b - a) * i / (k - 1));
  return out;
}

inline std::uint64_t require_seed(const ConfigDocument& doc) {
  if (!doc.has("/seed")) doc.fail("", "seed is required for this command (config 'seed' or --seed)");
  return doc.get<std::uint64_t>("/seed");
}

inline std::optional<double> tolerance(const ConfigDocument& doc) {
  if (!doc.has("/tolerance")) return std::nullopt;
  const double t = doc.get<double>("/tolerance");
  if (!(t >= 0.0)) doc.fail("/tolerance", "tolerance must be nonnegative");
  return t;
}

struct Outcome {
  json results = json::array();
  json violations = json::array();
  std::optional<std::string> csv;

  void add(const InequalityReport& rep) {
    json j = rep;
    if (!rep.holds()) violations.push_back(j);
    results.push_back(std::move(j));
  }
};

// ---------------------------------------------------------------------------

inline Outcome run_young(const ConfigDocument& doc, unsigned jobs) {
  Outcome out;
  const auto tol = tolerance(doc);
  const Hypergraph h = load_hypergraph(doc, "/hypergraph");
  const auto p = doc.get<std::vector<double>>("/p");
  const double r = doc.get<double>("/r");
  // The fractional form has its own exponent constraint.
  std::optional<ExponentSystem> es;
  if (!doc.has("/partition")) es = doc.guard("/p", [&] { return ExponentSystem::build(h, p, r); });

  if (doc.has("/densities")) {
    YoungInstance inst{load_densities(doc, "/densities"), h, p, r, std::nullopt};
    if (inst.densities.size() != static_cast<std::size_t>(h.ground_size()))
      doc.fail("/densities", "need one density per vertex (" + std::to_string(h.ground_size()) + ")");
    if (doc.has("/partition")) inst.partition = load_partitions(doc, "/partition", h).front();
    auto rep = doc.guard("/densities", [&] {
      return inst.partition ? check_fractional_form(inst, tol) : check_conjecture(inst, tol);
    });
    rep.details["p"] = p;
    rep.details["r"] = r;
    rep.details["rPrime"] = dual_exponent(r);
    if (es) {
      rep.details["L_r"] = es->L_r();
      rep.details["kappa"] = es->kappa();
      rep.details["lambda"] = es->lambda();
    }
    if (!rep.holds()) rep.details["instance"] = instance_to_json(inst);
    out.add(rep);
  }

  if (doc.has("/search")) {
    const auto seed = require_seed(doc);
    const auto trials = doc.get<std::size_t>("/search/trials");
    const auto gen = doc.get_or<std::string>("/search/generator", "gaussian");
    InstanceGenerator g;
    if (gen == "gaussian") {
      g = generators::gaussian(h, p, r, doc.get_or<int>("/search/dimension", 1),
                               doc.get_or<double>("/search/condition", 1.0));
    } else if (gen == "grid-mixtures") {
      g = generators::grid_mixtures(h, p, r, doc.get_or<double>("/search/step", 0.02));
    } else {
      doc.fail("/search/generator", "unknown generator '" + gen + "' (known: gaussian, grid-mixtures)");
    }
    const auto res = doc.guard("/search", [&] { return search_violations(g, trials, seed, jobs, tol); });
    out.results.push_back(json{{"kind", "violation-search"},
                               {"generator", gen},
                               {"trials", res.trials},
                               {"violations", res.violations.size()},
                               {"precisionFlags", res.precision_flags},
                               {"worstMargin", std::isfinite(res.worst_margin) ? json(res.worst_margin) : json()}});
    for (const auto& v : res.violations) out.violations.push_back(json(v));
  }
  if (!doc.has("/densities") && !doc.has("/search")) doc.fail("", "young-check needs 'densities' or 'search'");
  return out;
}

inline Outcome run_bm(const ConfigDocument& doc) {
  Outcome out;
  const auto bodies = load_bodies(doc, "/bodies");
  const Hypergraph h = load_hypergraph(doc, "/hypergraph");
  const double tol = tolerance(doc).value_or(kBrunnMinkowskiTolerance);
  for (const auto& fp : load_partitions(doc, "/partition", h)) {
    auto rep = doc.guard("/bodies", [&] { return check_fractional_bm(bodies, fp, tol); });
    if (!rep.holds()) {
      json inst = json::array();
      for (const auto& k : bodies) inst.push_back(polytope_to_json(k));
      rep.details["instance"] = json{{"bodies", inst}, {"hypergraph", hypergraph_to_json(h)}};
    }
    out.add(rep);
  }
  return out;
}

inline Outcome run_gaussian_bm(const ConfigDocument& doc, unsigned jobs) {
  Outcome out;
  MonteCarloOptions opt;
  opt.seed = require_seed(doc);
  opt.jobs = jobs;
  opt.samples = doc.get_or<std::size_t>("/samples", opt.samples);
  opt.max_std_error = doc.get_or<double>("/maxStdError", opt.max_std_error);
  const auto bodies = load_bodies(doc, "/bodies");
  if (doc.has("/hypergraph")) {
    const Hypergraph h = load_hypergraph(doc, "/hypergraph");
    const auto lambdas = doc.get<std::vector<double>>("/lambdas");
    for (const auto& fp : load_partitions(doc, "/partition", h)) {
      const GaussianBodyInstance inst{bodies, lambdas, fp};
      out.add(doc.guard("/bodies", [&] { return check_fractional_gaussian(inst, opt); }));
    }
  }
  if (doc.has("/ehrhard")) {
    const json& pairs = doc.at("/ehrhard");
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      const std::string p = "/ehrhard/" + std::to_string(k);
      const auto a = doc.get<std::size_t>(p + "/a"), b = doc.get<std::size_t>(p + "/b");
      if (a >= bodies.size() || b >= bodies.size()) doc.fail(p, "body index out of range (0-based)");
      const double lam = doc.get<double>(p + "/lambda");
      out.add(doc.guard(p, [&] { return check_ehrhard(bodies[a], bodies[b], lam, opt); }));
    }
  }
  if (!doc.has("/hypergraph") && !doc.has("/ehrhard")) doc.fail("", "gaussian-bm needs 'hypergraph' or 'ehrhard'");
  return out;
}

inline Outcome run_lln(const ConfigDocument& doc, unsigned jobs) {
  Outcome out;
  const auto seed = require_seed(doc);
  const auto name = doc.get_or<std::string>("/model", "rotated-segment");
  const auto model = doc.guard("/model", [&] { return model_by_name(name); });
  const int m_max = doc.get_or<int>("/Mmax", 12);
  const auto reps = doc.get_or<std::size_t>("/replicates", 10000);
  const auto aumann = doc.get_or<std::size_t>("/aumannSamples", 20000);
  const auto res = doc.guard("", [&] { return lln_monotonicity(model, m_max, reps, seed, jobs, aumann); });
  json j = to_json_value(res);
  j["kind"] = "lln";
  out.results.push_back(j);
  if (!res.monotone) out.violations.push_back(j);
  std::ostringstream csv;
  csv << kLlnCsvHeader << "\n";
  for (std::size_t i = 0; i < res.means.size(); ++i)
    csv << res.M_values[i] << "," << csv_number(res.means[i]) << "," << csv_number(res.std_errors[i]) << "\n";
  out.csv = csv.str();
  if (doc.get_or<bool>("/vitale", false)) out.add(check_vitale(model, reps, seed, jobs));
  return out;
}

inline Outcome run_epi(const ConfigDocument& doc) {
  Outcome out;
  const json& list = doc.at("/covariances");
  if (!list.is_array() || list.empty()) doc.fail("/covariances", "covariances must be a nonempty list");
  GaussianEnsemble ens;
  for (std::size_t k = 0; k < list.size(); ++k) {
    const std::string p = "/covariances/" + std::to_string(k);
    int n = doc.get_or<int>("/dimension", 0);
    if (n == 0) {
      const json& c = list[k];
      if (c.is_number()) {
        n = 1;
      } else {
        std::size_t count = 0;
        for (const auto& row : c) count += row.is_array() ? row.size() : 1;
        n = static_cast<int>(std::llround(std::sqrt(static_cast<double>(count))));
      }
    }
    ens.covariances.push_back(doc.guard(p, [&] {
      auto m = matrix_from_json(list[k], n);
      validate_pd(m);
      return m;
    }));
  }
  const Hypergraph h = load_hypergraph(doc, "/hypergraph");
  for (const auto& fp : load_partitions(doc, "/partition", h)) out.add(doc.guard("/covariances", [&] {
    return check_epi(ens, fp);
  }));
  if (regular_degree(h)) out.add(doc.guard("/covariances", [&] { return check_determinant_inequality(ens.covariances, h); }));
  return out;
}

/// p in [0.5, 4] at step 0.1.
inline std::vector<double> load_range_default() {
  std::vector<double> ps;
  for (int k = 0; k <= 35; ++k) ps.push_back(0.5 + 0.1 * k);
  return ps;
}

inline json scan_row_json(const ScanRow& row) {
  return json{{"p", row.e.p},       {"q", row.e.q},     {"t", row.e.t},         {"r", row.e.r},
              {"sup", row.sup.sup}, {"rhs", row.sup.bound}, {"sharp", row.sup.sharp}, {"tight", row.tight.tight}};
}

inline Outcome run_sharpness(const ConfigDocument& doc, bool scan) {
  Outcome out;
  const double sharp_tol = tolerance(doc).value_or(1e-9);
  if (doc.has("/triples")) {
    const json& list = doc.at("/triples");
    for (std::size_t k = 0; k < list.size(); ++k) {
      const std::string p = "/triples/" + std::to_string(k);
      const TripleExponents e{doc.get<double>(p + "/p"), doc.get<double>(p + "/q"), doc.get<double>(p + "/t"),
                              doc.get<double>(p + "/r")};
      const auto sup = doc.guard(p, [&] { return gaussian_young_sup(e, sharp_tol); });
      const auto tight = tightness_condition(e);
      auto rep = make_report("gaussian-young", sup.sup, sup.bound, sup.bound - sup.sup, sharp_tol * sup.bound);
      rep.details["p"] = e.p;
      rep.details["q"] = e.q;
      rep.details["t"] = e.t;
      rep.details["r"] = e.r;
      rep.details["argmax"] = {sup.x, sup.y};
      rep.details["interior"] = sup.interior;
      rep.details["sharp"] = sup.sharp;
      rep.details["tight"] = tight.tight;
      rep.details["boundary"] = tight.boundary;
      out.add(rep);
    }
  }
  if (scan || doc.has("/scan")) {
    std::vector<double> rs{1.25, 1.5, 2.0, 3.0, 5.0}, as, bs;
    for (int k = 1; k < 20; ++k) as.push_back(0.05 * k);
    bs = as;
    if (doc.has("/scan/r")) rs = load_range(doc, "/scan/r");
    if (doc.has("/scan/invP")) as = load_range(doc, "/scan/invP");
    if (doc.has("/scan/invQ")) bs = load_range(doc, "/scan/invQ");
    const auto rows = doc.guard("/scan", [&] { return sharpness_scan(rs, as, bs); });
    std::ostringstream csv;
    csv << kScanCsvHeader << "\n";
    std::size_t sharp = 0, mismatched = 0;
    for (const auto& row : rows) {
      csv << csv_number(row.e.p) << "," << csv_number(row.e.q) << "," << csv_number(row.e.t) << ","
          << csv_number(row.e.r) << "," << csv_number(row.sup.sup) << "," << csv_number(row.sup.bound) << ","
          << (row.sup.sharp ? 1 : 0) << "," << (row.tight.tight ? 1 : 0) << "\n";
      sharp += row.sup.sharp;
      if (row.sup.sup > row.sup.bound * (1.0 + sharp_tol)) out.violations.push_back(scan_row_json(row));
      if (row.sup.sharp != (row.tight.tight || row.tight.boundary)) ++mismatched;
    }
    out.results.push_back(
        json{{"kind", "sharpness-scan"}, {"rows", rows.size()}, {"sharp", sharp}, {"flagMismatches", mismatched}});
    if (scan) out.csv = csv.str();
  }
  if (doc.has("/stationary")) {
    const auto fs = load_densities(doc, "/stationary/densities");
    const Hypergraph h = load_hypergraph(doc, "/stationary/hypergraph");
    const double r = doc.get<double>("/stationary/r");
    if (fs.size() != static_cast<std::size_t>(h.ground_size()))
      doc.fail("/stationary/densities", "need one density per vertex");
    const auto sol = doc.guard("/stationary", [&] { return solve_stationary_for(fs, h, r); });
    json j = to_json_value(sol);
    j["kind"] = "stationary";
    std::vector<double> inv;
    for (double p : sol.p) inv.push_back(1.0 / p);
    j["inverseP"] = inv;
    out.results.push_back(j);
  }
  if (doc.has("/logMoment")) {
    const auto fs = load_densities(doc, "/logMoment/densities");
    const auto ps = doc.has("/logMoment/p") ? load_range(doc, "/logMoment/p") : load_range_default();
    for (std::size_t k = 0; k < fs.size(); ++k) {
      const auto res =
          doc.guard("/logMoment/densities/" + std::to_string(k), [&] { return check_lemma61(fs[k], ps); });
      json j{{"kind", "log-moment"},
             {"density", k},
             {"convex", res.convex},
             {"legendreNonincreasing", res.legendre_nonincreasing},
             {"worstSecondDifference", res.worst_second_difference},
             {"worstFirstDifference", res.worst_first_difference},
             {"p", res.p},
             {"phi", res.phi},
             {"legendre", res.legendre}};
      if (!res.holds()) out.violations.push_back(j);
      out.results.push_back(std::move(j));
    }
  }
  if (out.results.empty()) doc.fail("", "sharpness needs 'triples', 'scan', 'stationary' or 'logMoment' (or --scan)");
  return out;
}

inline Outcome run_partitions(const ConfigDocument& doc) {
  Outcome out;
  const Hypergraph h = load_hypergraph(doc, "/hypergraph");
  const auto d = regular_degree(h);
  json j{{"kind", "partitions"}, {"hypergraph", hypergraph_to_json(h)}, {"regular", d.has_value()}};
  j["degree"] = d ? json(*d) : json();
  if (d) j["degreePartition"] = partition_to_json(degree_partition(h));
  json ext = json::array();
  for (const auto& fp : doc.guard("/hypergraph", [&] { return enumerate_extreme_partitions(h); }))
    ext.push_back(partition_to_json(fp));
  j["extreme"] = ext;
  out.results.push_back(j);
  return out;
}

}  // namespace detail

/// Folds command-line overrides into the document.
inline void apply_overrides(ConfigDocument& doc, const RunOptions& opt) {
  json& root = doc.root();
  if (!root.contains("schemaVersion")) root["schemaVersion"] = kSchemaVersion;
  if (root.contains("command") && root["command"] != opt.command)
    doc.fail("/command", "config is for '" + root["command"].dump() + "' but the subcommand is '" + opt.command + "'");
  root["command"] = opt.command;
  if (opt.seed) root["seed"] = *opt.seed;
  if (opt.tolerance) root["tolerance"] = *opt.tolerance;
  if (opt.model) root["model"] = *opt.model;
  if (opt.m_max) root["Mmax"] = *opt.m_max;
  if (opt.replicates) root["replicates"] = *opt.replicates;
}

/// Runs one command; throws ConfigError on bad input and PrecisionError
/// when a requested accuracy cannot be met.
inline RunResult run(ConfigDocument doc, const RunOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  if (std::find(kCommands.begin(), kCommands.end(), opt.command) == kCommands.end())
    throw ConfigError("", 0, "unknown command '" + opt.command + "'");
  apply_overrides(doc, opt);
  doc.require_schema();

  detail::Outcome out;
  if (opt.command == "young-check") out = detail::run_young(doc, opt.jobs);
  else if (opt.command == "bm-check") out = detail::run_bm(doc);
  else if (opt.command == "gaussian-bm") out = detail::run_gaussian_bm(doc, opt.jobs);
  else if (opt.command == "lln") out = detail::run_lln(doc, opt.jobs);
  else if (opt.command == "epi-check") out = detail::run_epi(doc);
  else if (opt.command == "sharpness") out = detail::run_sharpness(doc, opt.scan);
  else out = detail::run_partitions(doc);

  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  RunResult res;
  res.report = json::object();
  res.report["command"] = opt.command;
  res.report["configDigest"] = config_digest(doc.root());
  res.report["seed"] = doc.root().contains("seed") ? doc.root()["seed"] : json();
  res.report["results"] = std::move(out.results);
  res.report["violations"] = std::move(out.violations);
  res.report["timings"] = json{{"totalSeconds", seconds}, {"jobs", opt.jobs}};
  res.csv = std::move(out.csv);
  return res;
}

/// Pretty JSON with a trailing newline.
inline std::string emit_report(const json& report) { return report.dump(2) + "\n"; }

/// The report without its timings block, for reproducibility comparisons.
inline std::string reproducible_part(json report) {
  report.erase("timings");
  return report.dump();
}

}  // namespace fracineq::cli

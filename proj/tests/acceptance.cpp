// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "fracineq/cli.hpp"
#include "fracineq/epi_checker.hpp"
#include "fracineq/fourier.hpp"
#include "fracineq/sharpness.hpp"
#include "oracles.hpp"

using namespace fracineq;

namespace {

struct Outcome {
  bool ok = true;
  std::ostringstream detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) detail << "first failure: " << what << "; ";
    ok = ok && cond;
  }
};

using Criterion = std::function<void(Outcome&)>;

const std::string kConfigs = std::string(FRACINEQ_SOURCE_DIR) + "/configs/";
constexpr double kTwoPiE = 2.0 * std::numbers::pi * std::numbers::e;

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

Point pt(std::initializer_list<double> xs) {
  Point p(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index k = 0;
  for (double x : xs) p(k++) = x;
  return p;
}

Hypergraph pairwise3() { return {3, {{1, 2}, {1, 3}, {2, 3}}}; }

double log_v(const Density& f, double p) { return -2.0 * dual_exponent(p) / dimension(f) * log_lp_norm(f, p); }

MonteCarloOptions mc(std::size_t samples, std::uint64_t seed) {
  MonteCarloOptions o;
  o.samples = samples;
  o.seed = seed;
  return o;
}

// Reciprocal exponents with a fixed sum and each strictly on one side of 1.
std::optional<std::vector<double>> random_reciprocals(StreamRng& rng, std::size_t k, double total, Regime regime) {
  std::vector<double> w(k);
  double sum = 0;
  for (double& x : w) sum += (x = 0.2 + rng.uniform());
  for (double& x : w) {
    x *= total / sum;
    if (regime == Regime::direct ? !(x > 0.02 && x < 0.98) : !(x > 1.02)) return std::nullopt;
  }
  return w;
}

void sharp_constants(Outcome& o) {
  o.require(sharp_constant(2.0) == 1.0, "C_2 != 1");
  double worst = 0;
  for (int k = 1; k <= 50; ++k) {
    const double r = 1.0 + 49.0 * k / 50.0;
    worst = std::max(worst, std::abs(sharp_constant(dual_exponent(r)) * sharp_constant(r) - 1.0));
  }
  o.require(worst <= 1e-12, "C_r' C_r deviates by " + num(worst));
  const double c = sharp_constant(1.5);
  o.require(std::abs(c - 0.953185) <= 1e-6, "C_3/2 = " + num(c));
  o.detail << "C_2=" << sharp_constant(2.0) << " max|C_r'C_r-1|=" << num(worst) << " C_3/2=" << num(c);
}

void classical_young(Outcome& o) {
  double worst = 0;
  for (double p : {4.0 / 3.0, 1.5, 1.8})
    for (int n : {1, 2})
      for (double var : {0.3, 1.0, 4.0}) {
        const double r = 1.0 / (2.0 / p - 1.0);
        const Density g(GaussianDensity(Eigen::VectorXd::Zero(n), var * Eigen::MatrixXd::Identity(n, n)));
        const YoungInstance inst{{g, g}, Hypergraph::singletons(2), {p, p}, r, std::nullopt};
        const auto rep = check_conjecture(inst);
        const double constant = std::pow(sharp_constant(p) * sharp_constant(p) / sharp_constant(r), n);
        const double direct = constant * lp_norm(g, p) * lp_norm(g, p);
        worst = std::max({worst, std::abs(rep.margin), std::abs(rep.lhs - direct)});
      }
  o.require(worst < 1e-9, "margin " + num(worst));
  o.detail << "max |lhs-rhs|=" << num(worst) << " over 18 Gaussian pairs";
}

void babenko_beckner(Outcome& o) {
  double worst_eq = 0;
  for (double p : {4.0 / 3.0, 1.5, 2.0})
    for (double var : {0.2, 1.0, 3.0}) {
      const Density f = GaussianDensity::scalar(0.7, var);
      const double lhs = FourierTransform(f).lp_norm(dual_exponent(p));
      worst_eq = std::max(worst_eq, std::abs(lhs - sharp_constant(p) * lp_norm(f, p)));
    }
  o.require(worst_eq < 1e-9, "Gaussian equality off by " + num(worst_eq));
  StreamRng rng(2718);
  double worst_excess = -1e300;
  for (int t = 0; t < 50; ++t) {
    const Density f = t % 5 == 0 ? Density(uniform_grid(0, 0.01 * (50 + static_cast<int>(100 * rng.uniform())), 0.01))
                                 : Density(generators::random_mixture(rng, 0.04));
    const double p = 1.05 + 0.95 * rng.uniform();
    const double excess = FourierTransform(f).lp_norm(dual_exponent(p)) - sharp_constant(p) * lp_norm(f, p);
    worst_excess = std::max(worst_excess, excess);
  }
  o.require(worst_excess <= 1e-6, "grid excess " + num(worst_excess));
  o.detail << "Gaussian max err=" << num(worst_eq) << " grid max(lhs-rhs)=" << num(worst_excess);
}

void grid_triples(Outcome& o) {
  const auto res = search_violations(generators::grid_mixtures(pairwise3(), {1.5, 1.5, 1.5}, 2.0), 100, 2026, 1, 1e-4);
  o.require(res.violations.empty(), std::to_string(res.violations.size()) + " violations");
  o.require(res.precision_flags == 0, std::to_string(res.precision_flags) + " precision flags");
  o.detail << "trials=" << res.trials << " violations=" << res.violations.size()
           << " worst margin=" << num(res.worst_margin);
}

void prelimit_identity(Outcome& o) {
  StreamRng rng(33);
  const std::vector<Hypergraph> hs{pairwise3(), leave_one_out(3), leave_one_out(4)};
  double worst = 0;
  int done = 0, reverse = 0;
  while (done < 100) {
    const Hypergraph& h = hs[static_cast<std::size_t>(done) % hs.size()];
    const bool direct = rng.uniform() < 0.7;
    const double r = direct ? 1.1 + 4.0 * rng.uniform() : 0.3 + 0.6 * rng.uniform();
    const double total = static_cast<double>(h.size()) - *regular_degree(h) / dual_exponent(r);
    const auto inv = random_reciprocals(rng, h.size(), total, regime_of(r));
    if (!inv) continue;
    std::vector<double> p;
    for (double a : *inv) p.push_back(1.0 / a);
    const int n = 1 + done % 3;
    YoungInstance inst{{}, h, p, r, std::nullopt};
    for (int j = 0; j < h.ground_size(); ++j) inst.densities.emplace_back(generators::random_gaussian(rng, n));
    const auto es = ExponentSystem::build(h, p, r);
    const auto rep = check_conjecture(inst);
    std::vector<double> lv;
    for (std::size_t s = 0; s < h.size(); ++s) {
      std::vector<Density> members;
      for (int i : h[s]) members.push_back(inst.densities[i - 1]);
      lv.push_back(log_v(convolve_all(members), p[s]));
    }
    const double log_v_full = log_v(convolve_all(inst.densities), r);
    const double log_ratio = rep.details["logLhs"].get<double>() - rep.details["logRhs"].get<double>();
    const double assembled = -n / (2 * es.r_dual()) * (log_v_full - prelimit_rhs(es, lv).value);
    worst = std::max(worst, std::abs(log_ratio - assembled));
    reverse += !direct;
    ++done;
  }
  o.require(worst <= 1e-9, "identity off by " + num(worst));
  o.detail << "systems=" << done << " (reverse " << reverse << ") max diff=" << num(worst);
}

void fractional_bm(Outcome& o) {
  StreamRng rng(64);
  const std::vector<Hypergraph> hs{pairwise3(), leave_one_out(4), Hypergraph(3, {{1}, {2}, {3}, {1, 2}, {2, 3}, {1, 3}})};
  std::vector<std::vector<FractionalPartition>> extreme;
  for (const auto& h : hs) extreme.push_back(enumerate_extreme_partitions(h));
  double worst = std::numeric_limits<double>::infinity();
  for (int n = 1; n <= 3; ++n)
    for (int t = 0; t < 1000; ++t) {
      const std::size_t which = static_cast<std::size_t>(t) % hs.size();
      std::vector<Polytope> ks;
      for (int j = 0; j < hs[which].ground_size(); ++j) ks.push_back(generators::random_polytope(rng, n));
      const auto& parts = extreme[which];
      const auto& fp = parts[static_cast<std::size_t>(rng.uniform() * parts.size())];
      worst = std::min(worst, check_fractional_bm(ks, fp).margin);
    }
  o.require(worst >= -1e-9, "margin " + num(worst));
  double worst_eq = 0;
  bool flagged = true;
  for (int n = 1; n <= 3; ++n)
    for (int t = 0; t < 20; ++t) {
      const auto base = generators::random_polytope(rng, n);
      std::vector<Polytope> ks;
      for (int j = 0; j < 4; ++j) ks.push_back(generators::random_homothet(rng, base));
      const auto rep = check_fractional_bm(ks, degree_partition(leave_one_out(4)));
      worst_eq = std::max(worst_eq, std::abs(rep.margin) / std::max(1.0, rep.lhs));
      flagged = flagged && rep.equality;
    }
  o.require(worst_eq <= 1e-9 && flagged, "homothetic margin " + num(worst_eq));
  const std::vector<Polytope> seg{Polytope::segment(pt({0, 0}), pt({1, 0})), Polytope::segment(pt({0, 0}), pt({0, 1})),
                                  Polytope::cube(2)};
  const auto rep = check_fractional_bm(seg, degree_partition(pairwise3()));
  o.require(std::abs(rep.lhs - 2.0) < 1e-12 && std::abs(rep.rhs - (0.5 + std::sqrt(2.0))) < 1e-12,
            "segments/square " + num(rep.lhs) + " vs " + num(rep.rhs));
  o.detail << "3000 instances min margin=" << num(worst) << " homothetic max=" << num(worst_eq)
           << " segments/square " << num(rep.lhs) << " vs " << num(rep.rhs);
}

void gaussian_measure_checks(Outcome& o) {
  const double radius = std::sqrt(std::numbers::pi / (32.0 * std::sin(std::numbers::pi / 32.0)));
  const auto disk = gaussian_measure(Polytope::regular_polygon(64, radius), mc(1'000'000, 11));
  const double expected = 1.0 - std::exp(-0.5);
  o.require(disk.std_error <= 5e-4, "stderr " + num(disk.std_error));
  o.require(std::abs(disk.value - expected) <= 3.0 * disk.std_error, "disk " + num(disk.value));
  StreamRng rng(77);
  double worst_ehr = 1e300, worst_frac = 1e300;
  const auto fp = degree_partition(leave_one_out(3));
  for (int t = 0; t < 50; ++t) {
    const Polytope a = generators::random_polytope(rng, 2), b = generators::random_polytope(rng, 2);
    const auto ehr = check_ehrhard(a, b, rng.uniform(), mc(1'000'000, 1000 + t));
    worst_ehr = std::min(worst_ehr, ehr.margin / std::max(*ehr.std_error, 1e-300));
    o.require(ehr.margin >= -3.0 * *ehr.std_error, "Ehrhard trial " + std::to_string(t));
    std::vector<Polytope> bodies;
    std::vector<double> lam;
    double total = 0;
    for (int j = 0; j < 3; ++j) {
      bodies.push_back(generators::random_polytope(rng, 2));
      lam.push_back(0.05 + rng.uniform());
      total += lam.back();
    }
    for (double& l : lam) l /= total;
    const auto frac = check_fractional_gaussian({bodies, lam, fp}, mc(1'000'000, 2000 + t));
    worst_frac = std::min(worst_frac, frac.margin / std::max(*frac.std_error, 1e-300));
    o.require(frac.margin >= -3.0 * *frac.std_error, "fractional trial " + std::to_string(t));
  }
  o.detail << "disk=" << num(disk.value) << "+-" << num(disk.std_error) << " (exact " << num(expected)
           << ") min margin/se: Ehrhard=" << num(worst_ehr) << " fractional=" << num(worst_frac);
}

void random_sets(Outcome& o) {
  for (const auto& m : builtin_models()) {
    const auto rep = check_vitale(m, 10'000, 17);
    o.require(rep.margin >= -3.0 * rep.std_error.value_or(0.0) - rep.tol, "Vitale on " + m.name);
  }
  const auto res = lln_monotonicity(RandomSetModel::rotated_segment(), 12, 10'000, 7);
  const double limit = 1.0 / std::sqrt(std::numbers::pi);
  o.require(res.means[0] == 0.0, "M=1 mean " + num(res.means[0]));
  o.require(res.monotone && res.monotonicity_breaks.empty(), "monotone rule");
  // Approach from below: no mean exceeds the limit by more than 3 stderr.
  for (std::size_t k = 0; k < res.means.size(); ++k)
    o.require(res.means[k] <= limit + 3.0 * res.std_errors[k], "M=" + std::to_string(k + 1) + " above the limit");
  o.detail << "Vitale ok on " << builtin_models().size() << " models; mean(12)=" << num(res.means.back()) << "+-"
           << num(res.std_errors.back()) << " limit=" << num(limit) << " gap=" << num(limit - res.means.back());
}

void epi_determinant(Outcome& o) {
  StreamRng rng(91);
  double worst = 0;
  for (int t = 0; t < 200; ++t) {
    const int m = 3 + t % 3, n = 1 + t % 3;
    GaussianEnsemble ens;
    for (int j = 0; j < m; ++j) ens.covariances.push_back(generators::random_covariance(rng, n, 1.0, 5.0));
    const auto h = leave_one_out(m);
    const auto epi = check_epi(ens, degree_partition(h));
    const auto det = check_determinant_inequality(ens.covariances, h);
    worst = std::max(worst, std::abs(epi.margin - kTwoPiE * det.margin));
  }
  o.require(worst <= 1e-12, "EPI vs determinant " + num(worst));
  double worst_prop = 0;
  for (int t = 0; t < 50; ++t) {
    const Eigen::MatrixXd k = generators::random_covariance(rng, 2, 1.0);
    GaussianEnsemble ens;
    for (int j = 0; j < 4; ++j) ens.covariances.push_back((0.1 + 2 * rng.uniform()) * k);
    for (const auto& fp : enumerate_extreme_partitions(leave_one_out(4))) {
      const auto rep = check_epi(ens, fp);
      worst_prop = std::max(worst_prop, std::abs(rep.margin) / std::max(1.0, rep.lhs));
      o.require(rep.equality, "proportional equality flag");
    }
  }
  o.require(worst_prop <= 1e-12, "proportional margin " + num(worst_prop));
  o.detail << "max |epi - 2pi e det|=" << num(worst) << " proportional max=" << num(worst_prop);
}

void sharpness(Outcome& o) {
  StreamRng rng(123);
  int done = 0, sharp = 0;
  double worst_sup = 0;
  while (done < 100) {
    const double r = 1.05 + 5.0 * rng.uniform();
    const double a = 0.05 + 0.9 * rng.uniform(), b = 0.05 + 0.9 * rng.uniform();
    const double c = 3.0 - 2.0 / dual_exponent(r) - a - b;
    if (!(c > 0.05 && c < 0.95)) continue;
    const TripleExponents e{1.0 / a, 1.0 / b, 1.0 / c, r};
    const auto sup = gaussian_young_sup(e);
    const bool expected = dual_exponent(r) < std::min({dual_exponent(e.p), dual_exponent(e.q), dual_exponent(e.t)});
    o.require(sup.sharp == expected, "sharp flag at point " + std::to_string(done));
    const double oracle = oracle::grid_max(
                              [&](double x, double y) {
                                if (x + y < 1.0) return -std::numeric_limits<double>::infinity();
                                return gaussian_young_lhs(e, x, y);
                              },
                              0.0, 1.0, 0.0, 1.0, 400)
                              .first;
    worst_sup = std::max(worst_sup, std::abs(sup.sup - oracle));
    sharp += sup.sharp;
    ++done;
  }
  o.require(worst_sup <= 1e-6, "sup vs grid " + num(worst_sup));
  double worst_sym = 0;
  for (double r : {1.2, 2.0, 5.0}) {
    const double a = (3.0 - 2.0 / dual_exponent(r)) / 3.0;
    worst_sym = std::max(worst_sym, std::abs(gaussian_young_margin({1 / a, 1 / a, 1 / a, r}, 2.0 / 3.0, 2.0 / 3.0)));
  }
  o.require(worst_sym <= 1e-9, "symmetric margin " + num(worst_sym));
  const std::vector<Density> fs{GaussianDensity::scalar(0, 1), GaussianDensity::scalar(0, 2),
                                GaussianDensity::scalar(0, 3)};
  const auto sol = solve_stationary_for(fs, leave_one_out(3), 0.5);
  const double expected_inv[] = {11.0 / 6.0, 5.0 / 3.0, 1.5};
  double worst_stat = 0;
  for (std::size_t s = 0; s < 3; ++s) worst_stat = std::max(worst_stat, std::abs(1.0 / sol.p[s] - expected_inv[s]));
  o.require(worst_stat <= 1e-9, "stationary off by " + num(worst_stat));
  o.detail << "points=" << done << " sharp=" << sharp << " max|sup-grid|=" << num(worst_sup)
           << " symmetric=" << num(worst_sym) << " stationary=" << num(worst_stat);
}

void log_moment(Outcome& o) {
  std::vector<double> ps;
  for (int k = 0; k < 36; ++k) ps.push_back(0.5 + 0.1 * k);
  std::vector<std::pair<std::string, Density>> fs{{"gaussian", GaussianDensity::scalar(0, 0.7)},
                                                  {"uniform", Density(uniform_grid(-1.0, 2.0, 0.01))}};
  StreamRng rng(5);
  for (int t = 0; t < 5; ++t)
    fs.emplace_back("mixture" + std::to_string(t), Density(generators::random_mixture(rng, 0.01)));
  for (const auto& [name, f] : fs) {
    const auto res = check_lemma61(f, ps);
    o.require(res.convex, name + " convexity");
    o.require(res.legendre_nonincreasing, name + " Legendre monotonicity");
  }
  o.detail << fs.size() << " densities over p in [0.5, 4]";
}

void reproducibility(Outcome& o) {
  const std::vector<std::pair<std::string, std::string>> runs{
      {"gaussian_bm.json", "gaussian-bm"}, {"young_search.json", "young-check"}, {"epi.json", "epi-check"},
      {"three_squares.json", "bm-check"},  {"sharpness.json", "sharpness"}};
  for (const auto& [file, command] : runs) {
    std::string dumps[2];
    for (int k = 0; k < 2; ++k) {
      cli::RunOptions opt;
      opt.command = command;
      opt.jobs = k == 0 ? 1 : 8;
      dumps[k] = cli::emit_report(cli::reproducible_part(cli::run(ConfigDocument::load(kConfigs + file), opt).report));
    }
    o.require(dumps[0] == dumps[1], command + " differs across jobs");
  }
  cli::RunOptions opt;
  opt.command = "lln";
  opt.seed = 7;
  opt.m_max = 12;
  opt.replicates = 10'000;
  std::string lln[2];
  for (int k = 0; k < 2; ++k) {
    opt.jobs = k == 0 ? 1 : 8;
    const auto res = cli::run(ConfigDocument{}, opt);
    lln[k] = cli::emit_report(cli::reproducible_part(res.report)) + res.csv.value_or("");
  }
  o.require(lln[0] == lln[1], "lln differs across jobs");
  o.detail << runs.size() + 1 << " configurations byte-identical at jobs 1 and 8";
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, Criterion>> criteria{
      {"sharp-constant identities", sharp_constants},
      {"classical sharp Young equality at Gaussians", classical_young},
      {"Babenko-Beckner on Gaussians and grids", babenko_beckner},
      {"grid-density triples, pairwise, r=2", grid_triples},
      {"prelimit identity on Gaussian systems", prelimit_identity},
      {"fractional Brunn-Minkowski", fractional_bm},
      {"Gaussian-measure checks", gaussian_measure_checks},
      {"Vitale and LLN monotonicity", random_sets},
      {"EPI and determinant inequality", epi_determinant},
      {"Gaussian Young sharpness and stationary exponents", sharpness},
      {"log-moment convexity and Legendre monotonicity", log_moment},
      {"reproducibility across jobs", reproducibility},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      criteria[k].second(o);
    } catch (const std::exception& e) {
      o.ok = false;
      o.detail << "exception: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += !o.ok;
    std::printf("%s %2zu %s [%.1f s]: %s\n", o.ok ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(), secs,
                o.detail.str().c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}

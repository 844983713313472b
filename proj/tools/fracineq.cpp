// fracineq: batch checks of fractional convolution, Brunn-Minkowski,
// Gaussian-measure, random-set and entropy power inequalities.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "fracineq/cli.hpp"

namespace {

const std::map<std::string, std::string> kDescriptions{
    {"young-check", "fractional Young inequality on given densities or a random search"},
    {"bm-check", "fractional Brunn-Minkowski inequality for convex bodies"},
    {"gaussian-bm", "Ehrhard and fractional Gaussian-measure inequalities"},
    {"lln", "monotone law of large numbers for random convex sets"},
    {"epi-check", "fractional entropy power inequality for Gaussians"},
    {"sharpness", "Gaussian Young sharpness, exponent scans and stationary exponents"},
    {"partitions", "extreme fractional partitions of a hypergraph"},
};

namespace fs = std::filesystem;
using namespace fracineq;

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<double> tolerance;
  std::optional<unsigned> jobs;
  std::string out;
  std::string csv;
  std::optional<std::string> model;
  std::optional<int> m_max;
  std::optional<std::size_t> replicates;
  bool scan = false;
};

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
  f << text;
}

int execute(const std::string& command, const Flags& flags) {
  ConfigDocument doc;
  std::string source = "<command line>";
  try {
    if (!flags.config.empty()) {
      doc = ConfigDocument::load(flags.config);
      source = flags.config;
    } else if (command != "lln" && !(command == "sharpness" && flags.scan)) {
      std::cerr << "fracineq " << command << ": --config is required\n";
      return 1;
    }
    cli::RunOptions opt;
    opt.command = command;
    opt.seed = flags.seed;
    opt.tolerance = flags.tolerance;
    opt.jobs = resolve_jobs(flags.jobs);
    opt.model = flags.model;
    opt.m_max = flags.m_max;
    opt.replicates = flags.replicates;
    opt.scan = flags.scan;
    const auto res = cli::run(std::move(doc), opt);

    const std::string text = cli::emit_report(res.report);
    if (flags.out.empty())
      std::cout << text;
    else
      write_file(flags.out, text);
    if (res.csv) {
      fs::path csv = flags.csv;
      if (csv.empty() && !flags.out.empty()) csv = fs::path(flags.out).replace_extension(".csv");
      if (csv.empty())
        std::cerr << *res.csv;
      else
        write_file(csv, *res.csv);
    }
    const auto violations = res.report.at("violations").size();
    if (violations > 0) std::cerr << "fracineq " << command << ": " << violations << " violation(s)\n";
    return res.exit_code();
  } catch (const ConfigError& e) {
    std::cerr << "fracineq " << command << ": " << format_config_error(e, source) << "\n";
  } catch (const PrecisionError& e) {
    std::cerr << "fracineq " << command << ": precision: " << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "fracineq " << command << ": " << e.what() << "\n";
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical checks for fractional convolution and Brunn-Minkowski type inequalities"};
  app.require_subcommand(1);
  Flags flags;
  std::string chosen;

  for (const auto& name : fracineq::cli::kCommands) {
    auto* sub = app.add_subcommand(name, kDescriptions.at(name));
    sub->add_option("--config", flags.config, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", flags.seed, "64-bit seed (overrides the config)");
    sub->add_option("--tolerance", flags.tolerance, "tolerance override");
    sub->add_option("--jobs", flags.jobs, "worker threads (default FRACINEQ_JOBS or 1)")->check(CLI::PositiveNumber);
    sub->add_option("--out", flags.out, "report path (default: stdout)");
    sub->add_option("--csv", flags.csv, "CSV table path (default: next to --out)");
    if (name == "lln") {
      sub->add_option("--model", flags.model, "random set model");
      sub->add_option("--Mmax", flags.m_max, "largest M")->check(CLI::Range(2, 1000));
      sub->add_option("--replicates", flags.replicates, "replicates per M");
    }
    if (name == "sharpness") sub->add_flag("--scan", flags.scan, "emit the exponent sweep as CSV");
    sub->callback([&chosen, name] { chosen = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  return execute(chosen, flags);
}

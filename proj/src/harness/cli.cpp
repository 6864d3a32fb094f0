#include "wprox/harness/cli.hpp"

#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "wprox/harness/experiments.hpp"
#include "wprox/harness/format.hpp"
#include "wprox/transport_flow.hpp"

namespace wprox::harness {
namespace {

struct Options {
  std::string config;
  std::string out;
  std::vector<std::string> settings;
  std::string particles;
  int threads = 0;
};

std::string synopsis() {
  std::ostringstream os;
  os << "usage: wprox <subcommand> [--config FILE] [--out DIR] [--set KEY=VALUE]... "
        "[--threads N]\n"
        "       wprox sweep [--particles M1,M2,...] ...\n"
        "subcommands:\n"
        "  gaussian    closed-form proximal steps on Gaussians (KL to N(0,1))\n"
        "  reference   small-step noisy GD reference cloud (cached)\n"
        "  mfld-prox   particle proximal training of the mean-field network\n"
        "  mfld-gd     noisy gradient descent on the same problem\n"
        "  compare     both algorithms from shared initializations\n"
        "  sweep       final W2 to the reference over particle counts\n";
  return os.str();
}

ExperimentConfig build_config(ExperimentKind kind, const Options& opt) {
  ExperimentConfig cfg = opt.config.empty() ? default_config(kind) : parse_config(kind, opt.config);
  for (const std::string& s : opt.settings) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("", "--set expects KEY=VALUE, got '" + s + "'");
    apply_setting(cfg, std::string(trim(s.substr(0, eq))), std::string(trim(s.substr(eq + 1))));
  }
  if (!opt.particles.empty()) {
    if (kind != ExperimentKind::kSweep)
      throw ConfigError("particles", "--particles only applies to sweep");
    apply_setting(cfg, "sweep_particles", opt.particles);
  }
  if (!opt.out.empty()) cfg.output_dir = opt.out;
  validate(cfg);
  return cfg;
}

void report(const ExperimentConfig& cfg, std::ostream& out) {
  switch (cfg.kind) {
    case ExperimentKind::kGaussian: {
      const Trace trace = run_gaussian(cfg).trace;
      out << "gaussian: " << trace.size() - 1 << " steps, KL " << format_double(*trace.front().kl)
          << " -> " << format_double(*trace.back().kl) << "\n";
      break;
    }
    case ExperimentKind::kReference: {
      const ReferenceResult ref = run_reference(cfg);
      out << "reference: " << ref.steps << " steps, "
          << (ref.plateau_reached ? "risk plateau reached" : "step budget exhausted")
          << ", last window change " << format_double(ref.final_window_change)
          << (ref.from_cache ? " (cached)" : "") << "\n";
      break;
    }
    case ExperimentKind::kMfldProx:
    case ExperimentKind::kMfldGd:
    case ExperimentKind::kCompare: {
      const auto runs = run_mfld(cfg);
      for (const RunOutcome& r : runs) {
        const TraceRecord& last = r.trace.back();
        out << r.algorithm << " rep " << r.repetition << ": F "
            << (last.total_objective ? format_double(*last.total_objective) : "-") << ", risk "
            << format_double(last.risk.value_or(0.0));
        if (last.w2_to_reference) out << ", W2 " << format_double(*last.w2_to_reference);
        out << "\n";
      }
      break;
    }
    case ExperimentKind::kSweep: {
      for (const SweepPoint& p : run_sweep(cfg))
        out << p.algorithm << " m=" << p.particles << " rep " << p.repetition << ": W2 "
            << format_double(p.final_w2) << "\n";
      break;
    }
  }
  out << "outputs in " << cfg.output_dir << "\n";
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  if (argc < 2) {
    err << synopsis();
    return 2;
  }
  const std::string name = argv[1];
  if (name == "-h" || name == "--help") {
    out << synopsis();
    return 0;
  }
  ExperimentKind kind;
  try {
    kind = parse_kind(name);
  } catch (const std::exception&) {
    err << "wprox: unknown subcommand '" << name << "'\n" << synopsis();
    return 2;
  }

  Options opt;
  CLI::App app("wprox " + name, "wprox " + name);
  app.add_option("--config", opt.config, "key = value config file");
  app.add_option("--out", opt.out, "output directory (overrides output_dir)");
  app.add_option("--set", opt.settings, "override one config key, KEY=VALUE")->allow_extra_args(false);
  if (kind == ExperimentKind::kSweep)
    app.add_option("--particles", opt.particles, "comma-separated particle counts");
  app.add_option("--threads", opt.threads, "worker threads (default: WPROX_THREADS or all cores)")
      ->check(CLI::PositiveNumber);

  std::vector<std::string> args;
  for (int i = argc - 1; i >= 2; --i) args.emplace_back(argv[i]);
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "wprox " << name << ": " << e.what() << "\n" << synopsis();
    return 2;
  }

  try {
    if (opt.threads > 0) set_worker_count(opt.threads);
    const ExperimentConfig cfg = build_config(kind, opt);
    report(cfg, out);
  } catch (const ConfigError& e) {
    err << "wprox " << name << ": config error: " << e.what() << "\n";
    return 1;
  } catch (const DivergenceError& e) {
    err << "wprox " << name << ": diverged: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "wprox " << name << ": " << e.what() << "\n";
    return 1;
  }
  return 0;
}

int cli_main(int argc, const char* const* argv) { return cli_main(argc, argv, std::cout, std::cerr); }

}  // namespace wprox::harness

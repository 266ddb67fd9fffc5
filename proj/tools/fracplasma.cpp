#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "fracplasma/experiment.hpp"

using namespace fracplasma;

namespace {

void print_checks(const RunReport& rep) {
  for (const CheckResult& c : rep.checks) {
    std::printf("%s  %-24s measured=%-12.4g tol=%-10.3g %7.2f s  %s\n",
                c.status == CheckStatus::Pass ? "PASS" : c.status == CheckStatus::Fail ? "FAIL" : "SKIP", c.name.c_str(),
                c.measured, c.tolerance, c.seconds, c.detail.c_str());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fractional plasma problem: solver, extension and free-boundary analysis"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int refine = 1;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory (overrides the config)");
    sub->add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t& v) { seed = v; seed_given = true; },
                                            "random seed (overrides the config)");
    sub->add_option("--refine", refine, "grid refinement factor")->check(CLI::PositiveNumber);
  };
  CLI::App* solve = app.add_subcommand("solve", "solve the plasma problem and write u, coefficients, extension");
  CLI::App* freq = app.add_subcommand("frequency", "frequency profiles at the configured centers");
  CLI::App* blow = app.add_subcommand("blowup", "blow-up of the solution at the configured center");
  CLI::App* sym = app.add_subcommand("symmetrize", "Steiner symmetrization of the solution and random fields");
  CLI::App* verify = app.add_subcommand("verify", "run every verification check");
  for (CLI::App* sub : {solve, freq, blow, sym, verify}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    ExperimentConfig cfg = load_config(config_path);
    if (!out_dir.empty()) cfg.output = out_dir;
    if (seed_given) cfg.seed = seed;
    if (refine != 1) cfg = refine_config(cfg, refine);

    RunReport rep;
    if (*solve) {
      rep = run_solve(cfg);
      std::cout << "status " << rep.outcome.value("status", std::string("error")) << ", residual "
                << format_double(rep.outcome.value("residual", 0.0)) << ", lambda "
                << format_double(rep.outcome.value("lambda", 0.0)) << '\n';
    } else if (*freq) {
      rep = run_frequency(cfg);
      for (const auto& e : rep.outcome["centers"]) {
        std::cout << "center " << e["index"] << ": "
                  << (e["skipped"].get<bool>() ? "skipped (" + e["warning"].get<std::string>() + ")"
                                               : e["classification"].get<std::string>() + ", N(0+) " + e["n0"].dump())
                  << '\n';
      }
    } else if (*blow) {
      rep = run_blowup(cfg);
      std::cout << "N(1, u_r) " << format_double(rep.outcome["unit_frequency"].get<double>()) << ", N(r, u) "
                << format_double(rep.outcome["source_frequency"].get<double>()) << '\n';
    } else if (*sym) {
      rep = run_symmetrize(cfg);
      std::cout << "energy " << format_double(rep.outcome["energy_before"].get<double>()) << " -> "
                << format_double(rep.outcome["energy_after"].get<double>()) << '\n';
    } else {
      rep = run_verify(cfg);
      print_checks(rep);
    }
    return rep.exit_code;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

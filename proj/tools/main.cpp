#include "mesoc/commands.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <string>

namespace {

int log_level_from_env() {
  const char* env = std::getenv("MESOC_LOG");
  if (!env) return 0;
  const std::string level = env;
  if (level == "debug" || level == "2") return 2;
  if (level == "info" || level == "1") return 1;
  return 0;
}

int emit(const mesoc::cli::CommandResult& result, bool human) {
  if (!result.log.empty()) std::cerr << result.log;
  if (human) {
    std::cout << result.human;
  } else {
    std::cout << result.report.dump(2) << "\n";
  }
  if (result.exit_code == mesoc::cli::kExitInput && !human) {
    std::cerr << "error: " << result.report.value("error", std::string{"invalid input"}) << "\n";
  }
  return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Complementarity solver over the monotone extended second-order cone"};
  app.require_subcommand(1);
  app.fallthrough();
  bool human = false;
  app.add_flag("--human", human, "Print a prose summary instead of JSON");

  mesoc::cli::SolveFlags solve_flags;
  solve_flags.log_level = log_level_from_env();
  std::string solve_path;
  auto* solve = app.add_subcommand("solve", "Solve an instance with multi-start semismooth Newton");
  solve->add_option("instance", solve_path, "Instance JSON file")->required();
  solve->add_option("--tol", solve_flags.tol, "Residual tolerance on ||Phi||_inf");
  solve->add_option("--max-iter", solve_flags.max_iter, "Newton iterations per start");
  solve->add_option("--starts", solve_flags.starts, "Number of starting points");
  solve->add_option("--seed", solve_flags.seed, "Seed for the starting points");
  solve->add_flag("--parallel", solve_flags.parallel, "Run starts concurrently");

  std::string cert_instance, cert_candidate;
  double cert_tol = 1e-8;
  auto* certify = app.add_subcommand("certify", "Check a candidate solution");
  certify->add_option("instance", cert_instance, "Instance JSON file")->required();
  certify->add_option("candidate", cert_candidate, "Candidate JSON with x and u")->required();
  certify->add_option("--tol", cert_tol, "Certification tolerance");

  int gen_p = 3, gen_q = 2;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  auto* generate = app.add_subcommand("generate", "Write a random instance with a planted solution");
  generate->add_option("--p", gen_p, "Length of the monotone block")->required();
  generate->add_option("--q", gen_q, "Length of the norm block")->required();
  generate->add_option("--seed", gen_seed, "Random seed");
  generate->add_option("--out", gen_out, "Output instance path")->required();

  mesoc::cli::PortfolioFlags pf;
  std::string csv_path;
  auto* portfolio = app.add_subcommand("portfolio", "Closed-form mean-absolute-deviation portfolio");
  portfolio->add_option("returns", csv_path, "Returns CSV with a header row")->required();
  portfolio->add_option("--c0", pf.c0, "Scale of the deviation weights");
  portfolio->add_option("--f", pf.f_spec, "Period weights: const:X, list:a,b,... or a,b,...");
  portfolio->add_option("--jstar", pf.jstar, "fixed:K, given-w or fixed-point");
  portfolio->add_option("--mean", pf.mean, "Mean returns as a comma list");
  portfolio->add_option("--w", pf.w, "Weights for given-w as a comma list");
  portfolio->add_option("--tol", pf.tol, "KKT acceptance tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : mesoc::cli::kExitInput;
  }

  if (*solve) return emit(mesoc::cli::cmd_solve(solve_path, solve_flags), human);
  if (*certify) return emit(mesoc::cli::cmd_certify(cert_instance, cert_candidate, cert_tol), human);
  if (*generate) return emit(mesoc::cli::cmd_generate(gen_p, gen_q, gen_seed, gen_out), human);
  return emit(mesoc::cli::cmd_portfolio(csv_path, pf), human);
}

#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace mesoc::cli {

/// Exit codes: 0 solved / passed, 1 input error, 2 no solution or no convergence.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitNoSolution = 2;

struct CommandResult {
  int exit_code = kExitOk;
  nlohmann::json report;  // machine-readable
  std::string human;      // prose summary
  std::string log;        // diagnostics for stderr, by verbosity
};

struct SolveFlags {
  double tol = 1e-10;
  int max_iter = 200;
  int starts = 20;
  std::uint64_t seed = 0;
  bool parallel = false;
  int log_level = 0;  // 0 silent, 1 per-run summary, 2 iteration trace of the best run
};

CommandResult cmd_solve(const std::filesystem::path& instance, const SolveFlags& flags);

CommandResult cmd_certify(const std::filesystem::path& instance, const std::filesystem::path& candidate,
                          double tol = 1e-8);

/// Writes the instance to `out` and the planted pair to sidecar_path(out).
CommandResult cmd_generate(int p, int q, std::uint64_t seed, const std::filesystem::path& out);
std::filesystem::path sidecar_path(const std::filesystem::path& out);

struct PortfolioFlags {
  double c0 = 1.0;
  std::string f_spec = "const:1";    // const:X | list:a,b,... | a,b,...
  std::string jstar = "fixed:1";     // fixed:K (1-based) | given-w | fixed-point
  std::optional<std::string> mean;   // comma list; computed from the panel when absent
  std::optional<std::string> w;      // comma list for given-w; equal weights when absent
  double tol = 1e-8;
};

CommandResult cmd_portfolio(const std::filesystem::path& csv, const PortfolioFlags& flags);

}  // namespace mesoc::cli

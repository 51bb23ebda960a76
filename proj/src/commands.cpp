#include "mesoc/commands.hpp"

#include "mesoc/generate.hpp"
#include "mesoc/io.hpp"
#include "mesoc/portfolio.hpp"
#include "mesoc/semismooth.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

namespace mesoc::cli {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

json certificate_to_json(const ComplementarityCertificate& cert) {
  json j;
  j["case_tag"] = to_string(cert.case_tag);
  j["in_set"] = cert.in_set;
  j["lambda"] = cert.lambda ? json(*cert.lambda) : json(nullptr);
  j["lambda_near_zero"] = cert.lambda_near_zero;
  j["failed_checks"] = cert.failed_checks;
  j["residuals"] = cert.residuals;
  return j;
}

CommandResult input_error(json report, const std::string& message) {
  CommandResult out;
  out.exit_code = kExitInput;
  report["status"] = "input_error";
  report["error"] = message;
  out.report = std::move(report);
  out.human = "error: " + message + "\n";
  return out;
}

std::string format_vec(const Vec& v) {
  std::ostringstream s;
  s.precision(10);
  s << '(';
  for (Eigen::Index i = 0; i < v.size(); ++i) s << (i ? ", " : "") << v[i];
  s << ')';
  return s.str();
}

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::istringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(cell, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || !std::isfinite(v)) throw io::InputError(what + ": cannot parse '" + cell + "'");
    out.push_back(v);
  }
  if (out.empty()) throw io::InputError(what + ": empty list");
  return out;
}

Vec to_vec(const std::vector<double>& v) { return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())); }

}  // namespace

// ---------------------------------------------------------------------------

CommandResult cmd_solve(const std::filesystem::path& instance, const SolveFlags& flags) {
  const auto start = Clock::now();
  json report;
  {
    std::ostringstream echo;
    echo << "solve " << instance.string() << " --tol " << flags.tol << " --max-iter " << flags.max_iter
         << " --starts " << flags.starts << " --seed " << flags.seed;
    report["command"] = echo.str();
  }

  std::string text;
  std::optional<LcpInstance> inst;
  try {
    text = io::read_file(instance);
    inst = io::parse_instance(json::parse(text));
  } catch (const json::exception& e) {
    return input_error(std::move(report), instance.string() + ": " + e.what());
  } catch (const std::exception& e) {
    return input_error(std::move(report), e.what());
  }
  report["instance_digest"] = io::digest(text);

  NewtonConfig config;
  config.tol_residual = flags.tol;
  config.max_iter = flags.max_iter;
  MultiStartOptions options;
  options.starts = flags.starts;
  options.seed = flags.seed;
  options.parallel = flags.parallel;

  MultiStartResult ms;
  try {
    config.validate();
    if (flags.starts < 1) throw std::invalid_argument("--starts must be at least 1");
    ms = solve_multistart(*inst, options, config);
  } catch (const std::exception& e) {
    return input_error(std::move(report), e.what());
  }
  const LcpSolveResult& best = ms.best;

  CommandResult out;
  const bool solved = best.status == SolveStatus::Solved;
  out.exit_code = solved ? kExitOk : kExitNoSolution;

  report["status"] = to_string(best.status);
  report[solved ? "solution" : "candidate"] = io::point_to_json(best.z);
  report["reformulated"] = {{"w_hat", io::vec_to_json(best.point.w_hat)},
                            {"u", io::vec_to_json(best.point.u)},
                            {"t", best.point.t}};
  report["zero_snapped"] = best.zero_snapped;
  report["phi_inf"] = best.residual;
  if (best.certificate) {
    report["certificate"] = certificate_to_json(*best.certificate);
    report["residuals"] = best.certificate->residuals;
  }

  int solved_runs = 0;
  for (const auto& r : ms.runs) solved_runs += r.status == SolveStatus::Solved;
  int fallbacks = 0;
  for (const auto& rec : best.trace) fallbacks += rec.fallback;
  report["trace_summary"] = {{"start_index", best.start_index},
                             {"iterations", best.iterations},
                             {"fallback_steps", fallbacks},
                             {"final_merit", 0.5 * best.residual * best.residual},
                             {"runs", ms.runs.size()},
                             {"runs_solved", solved_runs}};
  report["wall_time_s"] = seconds_since(start);

  std::ostringstream human;
  human << "status: " << to_string(best.status) << " (start " << best.start_index << ", "
        << best.iterations << " iterations, ||Phi||_inf = " << best.residual << ")\n";
  human << "x = " << format_vec(best.z.x) << "\nu = " << format_vec(best.z.u) << "\n";
  if (best.certificate) {
    human << "case: " << to_string(best.certificate->case_tag)
          << ", <z, Tz+r> = " << best.certificate->residuals.at("orthogonality") << "\n";
  }
  human << solved_runs << " of " << ms.runs.size() << " starts certified\n";
  out.human = human.str();

  if (flags.log_level >= 1) {
    std::ostringstream log;
    for (const auto& r : ms.runs) {
      log << "start " << r.start_index << ": " << to_string(r.status) << " iter=" << r.iterations
          << " phi_inf=" << r.residual << "\n";
    }
    if (flags.log_level >= 2) log << "# iter merit residual step fallback cond\n" << format_trace(best.trace);
    out.log = log.str();
  }
  out.report = std::move(report);
  return out;
}

// ---------------------------------------------------------------------------

CommandResult cmd_certify(const std::filesystem::path& instance, const std::filesystem::path& candidate,
                          double tol) {
  const auto start = Clock::now();
  json report;
  report["command"] = "certify " + instance.string() + " " + candidate.string();

  std::optional<LcpInstance> inst;
  ConePoint z;
  try {
    const std::string text = io::read_file(instance);
    report["instance_digest"] = io::digest(text);
    inst = io::parse_instance(json::parse(text));
    z = io::load_candidate(candidate);
    if (z.dims() != inst->dims()) throw io::InputError("candidate dimensions do not match the instance");
  } catch (const json::exception& e) {
    return input_error(std::move(report), instance.string() + ": " + e.what());
  } catch (const std::exception& e) {
    return input_error(std::move(report), e.what());
  }

  const ConePoint s = affine_image(*inst, z);
  const auto cert = classify_pair(z, s, tol);
  const auto ab = alpha_beta_certificate(*inst, z);

  CommandResult out;
  out.exit_code = cert.in_set ? kExitOk : kExitNoSolution;
  report["status"] = cert.in_set ? "pass" : "fail";
  report["tolerance"] = tol;
  report["candidate"] = io::point_to_json(z);
  report["image"] = io::point_to_json(s);
  report["certificate"] = certificate_to_json(cert);
  report["residuals"] = cert.residuals;
  report["alpha"] = io::vec_to_json(ab.alpha);
  report["beta"] = io::vec_to_json(ab.beta);
  report["alpha_dot_beta"] = ab.alpha.dot(ab.beta);
  report["wall_time_s"] = seconds_since(start);

  std::ostringstream human;
  human << (cert.in_set ? "PASS" : "FAIL") << " (case " << to_string(cert.case_tag) << ", tol " << tol << ")\n";
  for (const auto& [k, v] : cert.residuals) human << "  " << k << " = " << v << "\n";
  human << "  <alpha, beta> = " << ab.alpha.dot(ab.beta) << "\n";
  for (const auto& f : cert.failed_checks) human << "  failed: " << f << "\n";
  out.human = human.str();
  out.report = std::move(report);
  return out;
}

// ---------------------------------------------------------------------------

std::filesystem::path sidecar_path(const std::filesystem::path& out) {
  std::filesystem::path side = out;
  side.replace_extension(".planted.json");
  return side;
}

CommandResult cmd_generate(int p, int q, std::uint64_t seed, const std::filesystem::path& out_path) {
  json report;
  report["command"] = "generate --p " + std::to_string(p) + " --q " + std::to_string(q) + " --seed " +
                      std::to_string(seed) + " --out " + out_path.string();
  try {
    const auto planted = generate_planted(ConeDims(p, q), seed);
    const std::string instance_text = io::instance_to_json(planted.instance).dump(2) + "\n";
    json side;
    side["seed"] = seed;
    side["x"] = io::vec_to_json(planted.z_star.x);
    side["u"] = io::vec_to_json(planted.z_star.u);
    side["s_y"] = io::vec_to_json(planted.s_star.x);
    side["s_v"] = io::vec_to_json(planted.s_star.u);
    side["lambda"] = planted.lambda;
    io::write_file(out_path, instance_text);
    io::write_file(sidecar_path(out_path), side.dump(2) + "\n");

    report["status"] = "ok";
    report["instance"] = out_path.string();
    report["sidecar"] = sidecar_path(out_path).string();
    report["instance_digest"] = io::digest(instance_text);
  } catch (const std::exception& e) {
    return input_error(std::move(report), e.what());
  }
  CommandResult out;
  out.human = "wrote " + out_path.string() + " and " + sidecar_path(out_path).string() + "\n";
  out.report = std::move(report);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

Vec parse_f_spec(const std::string& spec, int periods) {
  if (spec.rfind("const:", 0) == 0) {
    const auto v = parse_list(spec.substr(6), "--f");
    if (v.size() != 1) throw io::InputError("--f const: takes a single value");
    return Vec::Constant(periods, v[0]);
  }
  const std::string body = spec.rfind("list:", 0) == 0 ? spec.substr(5) : spec;
  Vec f = to_vec(parse_list(body, "--f"));
  if (f.size() != periods) {
    throw io::InputError("--f needs " + std::to_string(periods) + " values, got " + std::to_string(f.size()));
  }
  return f;
}

portfolio::JstarRequest parse_jstar(const std::string& spec) {
  portfolio::JstarRequest req;
  if (spec.rfind("fixed:", 0) == 0) {
    const auto v = parse_list(spec.substr(6), "--jstar");
    if (v.size() != 1 || v[0] != std::floor(v[0]) || v[0] < 1) {
      throw io::InputError("--jstar fixed:K needs a positive integer K");
    }
    req.mode = portfolio::JstarMode::Fixed;
    req.fixed_index = static_cast<int>(v[0]) - 1;
  } else if (spec == "given-w") {
    req.mode = portfolio::JstarMode::GivenW;
  } else if (spec == "fixed-point") {
    req.mode = portfolio::JstarMode::FixedPoint;
  } else {
    throw io::InputError("--jstar must be fixed:K, given-w or fixed-point");
  }
  return req;
}

json solution_to_json(const portfolio::Candidate& c, const std::vector<std::string>& labels) {
  json j;
  j["root"] = c.root;
  j["case_tag"] = portfolio::to_string(c.solution.case_tag);
  j["beta"] = c.solution.beta;
  j["w"] = io::vec_to_json(c.solution.w);
  if (!labels.empty()) {
    json named;
    for (std::size_t i = 0; i < labels.size(); ++i) named[labels[i]] = c.solution.w[static_cast<Eigen::Index>(i)];
    j["weights"] = named;
  }
  j["u"] = io::vec_to_json(c.solution.u);
  j["lambda"] = c.solution.lambda ? json(*c.solution.lambda) : json(nullptr);
  j["lambda_flagged"] = c.solution.lambda_flagged;
  j["accepted"] = c.kkt.accepted;
  j["kkt_residuals"] = c.kkt.residuals;
  j["certificate"] = certificate_to_json(c.kkt.certificate);
  return j;
}

}  // namespace

CommandResult cmd_portfolio(const std::filesystem::path& csv, const PortfolioFlags& flags) {
  const auto start = Clock::now();
  json report;
  {
    std::ostringstream echo;
    echo << "portfolio " << csv.string() << " --c0 " << flags.c0 << " --f " << flags.f_spec << " --jstar "
         << flags.jstar;
    report["command"] = echo.str();
  }

  std::optional<portfolio::ReturnsPanel> panel;
  Vec f;
  portfolio::JstarSelection selection;
  portfolio::PortfolioRun run;
  try {
    if (!(flags.c0 > 0)) throw io::InputError("--c0 must be positive");
    std::optional<Vec> mean;
    if (flags.mean) mean = to_vec(parse_list(*flags.mean, "--mean"));
    const std::string text = io::read_file(csv);
    report["panel_digest"] = io::digest(text);
    panel = io::parse_returns_csv(text, mean);
    f = parse_f_spec(flags.f_spec, panel->periods());

    auto req = parse_jstar(flags.jstar);
    req.c0 = flags.c0;
    req.f = f;
    if (flags.w) req.w = to_vec(parse_list(*flags.w, "--w"));
    if (req.mode == portfolio::JstarMode::GivenW && req.w.size() == 0) {
      req.w = Vec::Constant(panel->assets(), 1.0 / panel->assets());
    }
    if (req.w.size() && req.w.size() != panel->assets()) throw io::InputError("--w has the wrong number of assets");
    if (req.mode == portfolio::JstarMode::Fixed && req.fixed_index >= panel->periods()) {
      throw io::InputError("--jstar index exceeds the number of periods");
    }
    selection = portfolio::select_jstar(*panel, req, flags.tol);
    run = portfolio::solve_portfolio(*panel, flags.c0, f, selection.index, flags.tol);
  } catch (const std::exception& e) {
    return input_error(std::move(report), e.what());
  }

  CommandResult out;
  out.exit_code = run.chosen ? kExitOk : kExitNoSolution;
  report["status"] = run.chosen ? "solved" : "no_candidate";
  report["mean_source"] = panel->mean_supplied ? "supplied" : "computed";
  report["jstar"] = {{"index", selection.index + 1}, {"converged", selection.converged}, {"rounds", selection.rounds}};
  report["norm_Ujstar"] = run.model.norm_Ujstar;
  report["theta"] = io::vec_to_json(run.model.theta());
  if (run.roots) {
    report["beta_roots"] = {{"plus", run.roots->plus}, {"minus", run.roots->minus}};
  } else {
    report["beta_roots"] = nullptr;
  }
  json cands = json::array();
  for (const auto& c : run.candidates) cands.push_back(solution_to_json(c, panel->labels));
  report["candidates"] = cands;
  if (run.chosen) report["chosen"] = solution_to_json(run.candidates[*run.chosen], panel->labels);
  report["wall_time_s"] = seconds_since(start);

  std::ostringstream human;
  human << "j* = " << selection.index + 1 << ", ||U_j*|| = " << run.model.norm_Ujstar << "\n";
  if (!run.roots) human << "no real beta root (negative discriminant)\n";
  for (const auto& c : run.candidates) {
    human << c.root << ": beta = " << c.solution.beta << ", w = " << format_vec(c.solution.w)
          << (c.kkt.accepted ? "  [accepted]" : "  [rejected]") << "\n";
  }
  if (run.chosen) human << "chosen: " << run.candidates[*run.chosen].root << "\n";
  out.human = human.str();
  out.report = std::move(report);
  return out;
}

}  // namespace mesoc::cli

#include "mesoc/commands.hpp"
#include "mesoc/generate.hpp"
#include "mesoc/io.hpp"
#include "mesoc/portfolio.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <sys/wait.h>

using namespace mesoc;
using nlohmann::json;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "mesoc_cli_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::filesystem::path write(const std::string& name, const std::string& text) {
  const auto path = scratch(name);
  io::write_file(path, text);
  return path;
}

json example_json() { return json::parse(io::read_file(testing::data_dir() / "example_paper.json")); }

int run_cli(const std::string& args) {
  const std::string cmd = std::string(MESOC_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("instance parsing") {
  const auto inst = io::parse_instance(example_json());
  CHECK(inst.dims() == ConeDims(3, 2));
  CHECK(inst.T().A(1, 1) == 6.0);
  CHECK(inst.v()[1] == 5.0);

  const auto back = io::parse_instance(io::instance_to_json(inst));
  CHECK(back.T().full() == inst.T().full());
  CHECK(back.r().stacked() == inst.r().stacked());

  json missing = example_json();
  missing.erase("D");
  CHECK_THROWS_AS(io::parse_instance(missing), io::InputError);

  json shape = example_json();
  shape["B"][0] = json::array({1, 2, 3});
  CHECK_THROWS_AS(io::parse_instance(shape), io::InputError);

  json small = example_json();
  small["p"] = 1;
  CHECK_THROWS_AS(io::parse_instance(small), io::InputError);

  json text = example_json();
  text["y"][0] = "two";
  CHECK_THROWS_AS(io::parse_instance(text), io::InputError);

  CHECK_THROWS_AS(io::parse_instance(json::array()), io::InputError);
  CHECK_THROWS_AS(io::load_instance(scratch("does_not_exist.json")), io::InputError);
  CHECK_THROWS_AS(io::load_instance(write("broken.json", "{\"p\": 3,")), io::InputError);
}

TEST_CASE("non-finite values are rejected") {
  const auto path = write("overflow.json", R"({"p":2,"q":1,"A":[[1e999,0],[0,1]],"B":[[0],[0]],"C":[[0,0]],"D":[[1]],"y":[1,1],"v":[0]})");
  CHECK_THROWS_AS(io::load_instance(path), io::InputError);
}

TEST_CASE("candidate parsing") {
  const auto plain = io::parse_candidate(json{{"x", {1, 2}}, {"u", {3}}});
  CHECK(plain.x.size() == 2);
  const auto nested = io::parse_candidate(json{{"status", "solved"}, {"solution", {{"x", {1, 2}}, {"u", {3}}}}});
  CHECK(nested.u[0] == 3.0);
  CHECK_THROWS_AS(io::parse_candidate(json{{"x", {1, 2}}}), io::InputError);
}

TEST_CASE("returns CSV parsing") {
  const auto panel = io::parse_returns_csv("a, b\n0.1,0.2\n\n0.3,0.0\n");
  CHECK(panel.labels == std::vector<std::string>{"a", "b"});
  CHECK(panel.R.rows() == 2);
  CHECK(panel.r[0] == doctest::Approx(0.2));
  CHECK_FALSE(panel.mean_supplied);

  Vec mean(2);
  mean << 0.0, 0.1;
  const auto supplied = io::parse_returns_csv("a,b\n0.1,0.2\n", mean);
  CHECK(supplied.mean_supplied);
  CHECK(supplied.r[1] == 0.1);

  CHECK_THROWS_AS(io::parse_returns_csv("a,b\n0.1\n"), io::InputError);
  CHECK_THROWS_AS(io::parse_returns_csv("a,b\n0.1,x\n"), io::InputError);
  CHECK_THROWS_AS(io::parse_returns_csv("a,b\n"), io::InputError);
  CHECK_THROWS_AS(io::parse_returns_csv("a,b\n0.1,0.2abc\n"), io::InputError);
  CHECK_THROWS_AS(io::parse_returns_csv("a,b\n0.1,0.2\n", Vec::Zero(3)), io::InputError);
}

TEST_CASE("digest") {
  CHECK(io::digest("abc") == io::digest("abc"));
  CHECK(io::digest("abc") != io::digest("abd"));
  CHECK(io::digest("").size() == 16);
}

TEST_CASE("solve the bundled example") {
  const auto res = cli::cmd_solve(testing::data_dir() / "example_paper.json", {});
  CHECK(res.exit_code == cli::kExitOk);
  CHECK(res.report["status"] == "solved");
  CHECK(std::abs(res.report["residuals"]["orthogonality"].get<double>()) <= 1e-8);
  CHECK(res.report["certificate"]["case_tag"] == "generic");
  for (const char* key : {"command", "instance_digest", "solution", "trace_summary", "wall_time_s"}) {
    CHECK(res.report.contains(key));
  }
  CHECK_FALSE(res.human.empty());

  // The reported solution re-certifies at the same tolerance.
  const auto report_path = write("example_report.json", res.report.dump());
  const auto cert = cli::cmd_certify(testing::data_dir() / "example_paper.json", report_path, 1e-8);
  CHECK(cert.exit_code == cli::kExitOk);
  CHECK(cert.report["status"] == "pass");
}

TEST_CASE("solve reports are deterministic apart from timing") {
  cli::SolveFlags flags;
  flags.seed = 3;
  auto a = cli::cmd_solve(testing::data_dir() / "example_paper.json", flags).report;
  auto b = cli::cmd_solve(testing::data_dir() / "example_paper.json", flags).report;
  a.erase("wall_time_s");
  b.erase("wall_time_s");
  CHECK(a == b);
}

TEST_CASE("solve exit codes") {
  CHECK(cli::cmd_solve(scratch("missing.json"), {}).exit_code == cli::kExitInput);
  CHECK(cli::cmd_solve(write("garbage.json", "not json"), {}).exit_code == cli::kExitInput);
  json bad = example_json();
  bad["v"] = json::array({1});
  CHECK(cli::cmd_solve(write("bad_dims.json", bad.dump()), {}).exit_code == cli::kExitInput);

  cli::SolveFlags flags;
  flags.starts = 0;
  CHECK(cli::cmd_solve(testing::data_dir() / "example_paper.json", flags).exit_code == cli::kExitInput);

  // T = 0 and r outside the dual cone: Tz + r = r is never in the dual cone.
  const json none = {{"p", 2}, {"q", 1}, {"A", {{0, 0}, {0, 0}}}, {"B", {{0}, {0}}}, {"C", {{0, 0}}},
                     {"D", {{0}}}, {"y", {-1, 0}}, {"v", {0}}};
  flags = {};
  flags.starts = 4;
  const auto res = cli::cmd_solve(write("no_solution.json", none.dump()), flags);
  CHECK(res.exit_code == cli::kExitNoSolution);
  CHECK(res.report["status"] != "solved");
}

TEST_CASE("identity instance with r in the dual cone") {
  const json ident = {{"p", 3}, {"q", 1}, {"A", {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}, {"B", {{0}, {0}, {0}}},
                      {"C", {{0, 0, 0}}}, {"D", {{1}}}, {"y", {1, 0, 1}}, {"v", {1.5}}};
  const auto path = write("identity.json", ident.dump());
  const auto res = cli::cmd_solve(path, {});
  REQUIRE(res.exit_code == cli::kExitOk);
  const ConePoint z = io::parse_candidate(res.report);
  CHECK(z.norm() < 1e-8);

  const auto zero = write("zero_candidate.json", R"({"x":[0,0,0],"u":[0]})");
  CHECK(cli::cmd_certify(path, zero).exit_code == cli::kExitOk);
}

TEST_CASE("certify the claimed worked-example point") {
  const auto res = cli::cmd_certify(testing::data_dir() / "example_paper.json",
                                    testing::data_dir() / "paper_claimed_solution.json");
  CHECK(res.exit_code == cli::kExitNoSolution);
  CHECK(res.report["residuals"]["orthogonality"].get<double>() == doctest::Approx(0.339).epsilon(1e-2));
  CHECK(res.report["alpha_dot_beta"].get<double>() == doctest::Approx(0.339).epsilon(1e-2));
  const auto failed = res.report["certificate"]["failed_checks"];
  CHECK(std::find(failed.begin(), failed.end(), "orthogonality") != failed.end());

  const auto wrong = write("wrong_dims.json", R"({"x":[1,1],"u":[0]})");
  CHECK(cli::cmd_certify(testing::data_dir() / "example_paper.json", wrong).exit_code == cli::kExitInput);
}

TEST_CASE("generate writes deterministic planted instances") {
  const auto a = scratch("gen_a.json");
  const auto b = scratch("gen_b.json");
  REQUIRE(cli::cmd_generate(4, 3, 42, a).exit_code == cli::kExitOk);
  REQUIRE(cli::cmd_generate(4, 3, 42, b).exit_code == cli::kExitOk);
  CHECK(io::read_file(a) == io::read_file(b));
  CHECK(io::read_file(cli::sidecar_path(a)) == io::read_file(cli::sidecar_path(b)));
  CHECK(cli::sidecar_path(a).filename() == "gen_a.planted.json");

  const auto c = scratch("gen_c.json");
  REQUIRE(cli::cmd_generate(4, 3, 43, c).exit_code == cli::kExitOk);
  CHECK(io::read_file(a) != io::read_file(c));

  CHECK(cli::cmd_generate(1, 3, 1, scratch("gen_bad.json")).exit_code == cli::kExitInput);
}

TEST_CASE("planted pairs satisfy the generic certificate conditions") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto path = scratch("planted.json");
    const int p = 2 + static_cast<int>(seed % 4), q = 1 + static_cast<int>(seed % 5);
    REQUIRE(cli::cmd_generate(p, q, seed, path).exit_code == cli::kExitOk);
    const auto inst = io::load_instance(path);
    const auto side = json::parse(io::read_file(cli::sidecar_path(path)));
    const ConePoint z = io::parse_candidate(side);
    Vec sy(p), sv(q);
    for (int i = 0; i < p; ++i) sy[i] = side["s_y"][i].get<double>();
    for (int i = 0; i < q; ++i) sv[i] = side["s_v"][i].get<double>();
    const double lambda = side["lambda"].get<double>();

    CHECK(std::abs(z.x[p - 1] - z.u.norm()) <= 1e-12 * (1.0 + z.u.norm()));
    CHECK(std::abs(sy.sum() - sv.norm()) <= 1e-12 * (1.0 + sv.norm()));
    CHECK((sv + lambda * z.u).norm() <= 1e-12 * (1.0 + sv.norm()));
    CHECK(lambda > 0);
    const auto cert = classify_pair(z, {sy, sv}, 1e-12);
    CHECK(cert.in_set);
    CHECK(cert.case_tag == CaseTag::Generic);
    // The file stores r = s* - T z*, so T z* + r reproduces s* up to rounding.
    CHECK((affine_image(inst, z).stacked() - ConePoint(sy, sv).stacked()).norm() <= 1e-12 * (1.0 + sv.norm()));
  }
}

TEST_CASE("smallest generated case") {
  const auto path = scratch("tiny.json");
  REQUIRE(cli::cmd_generate(2, 1, 7, path).exit_code == cli::kExitOk);
  const auto inst = io::load_instance(path);
  CHECK(inst.dims() == ConeDims(2, 1));
}

TEST_CASE("solve recovers a generated plant") {
  const auto path = scratch("recover.json");
  REQUIRE(cli::cmd_generate(5, 4, 11, path).exit_code == cli::kExitOk);
  const ConePoint plant = io::load_candidate(cli::sidecar_path(path));
  const auto res = cli::cmd_solve(path, {});
  REQUIRE(res.exit_code == cli::kExitOk);
  const ConePoint z = io::parse_candidate(res.report);
  CHECK((z.stacked() - plant.stacked()).norm() <= 1e-8 * (1.0 + plant.norm()));
}

TEST_CASE("portfolio command") {
  cli::PortfolioFlags flags;
  flags.mean = "0.1,0.2";
  flags.c0 = 0.5;
  flags.f_spec = "list:2,1";
  const auto res = cli::cmd_portfolio(testing::data_dir() / "two_assets.csv", flags);
  REQUIRE(res.exit_code == cli::kExitOk);
  CHECK(res.report["beta_roots"]["plus"].get<double>() == doctest::Approx(0.5));
  CHECK(res.report["beta_roots"]["minus"].get<double>() == doctest::Approx(-0.2));
  const auto w = res.report["chosen"]["w"];
  CHECK(w[0].get<double>() == doctest::Approx(3.0 / 7));
  CHECK(w[1].get<double>() == doctest::Approx(4.0 / 7));

  // Same numbers as the library call.
  const auto panel = io::load_returns_csv(testing::data_dir() / "two_assets.csv", Vec((Vec(2) << 0.1, 0.2).finished()));
  const auto model = portfolio::MadModel::make(panel, 0.5, (Vec(2) << 2, 1).finished(), 0);
  const auto direct = portfolio::weights_closed_form(model, panel, -0.2);
  CHECK(w[0].get<double>() == doctest::Approx(direct.w[0]).epsilon(1e-14));
}

TEST_CASE("portfolio command on a symmetric panel") {
  const auto path = write("symmetric.csv", "a,b,c\n0.1,0.1,0.1\n-0.05,-0.05,-0.05\n0.02,0.02,0.02\n");
  cli::PortfolioFlags flags;
  flags.f_spec = "2,1,1";
  const auto res = cli::cmd_portfolio(path, flags);
  REQUIRE(res.exit_code == cli::kExitOk);
  for (const auto& wi : res.report["chosen"]["w"]) CHECK(wi.get<double>() == doctest::Approx(1.0 / 3));
  CHECK(res.report["chosen"]["weights"].contains("b"));
}

TEST_CASE("portfolio command exit codes") {
  const auto csv = testing::data_dir() / "returns_example.csv";
  cli::PortfolioFlags flags;
  flags.c0 = 0.01;
  const auto none = cli::cmd_portfolio(csv, flags);
  CHECK(none.exit_code == cli::kExitNoSolution);
  CHECK(none.report["beta_roots"].is_null());

  flags = {};
  flags.c0 = -1;
  CHECK(cli::cmd_portfolio(csv, flags).exit_code == cli::kExitInput);
  flags = {};
  flags.f_spec = "list:1,2";
  CHECK(cli::cmd_portfolio(csv, flags).exit_code == cli::kExitInput);
  flags = {};
  flags.jstar = "fixed:0";
  CHECK(cli::cmd_portfolio(csv, flags).exit_code == cli::kExitInput);
  flags.jstar = "fixed:13";
  CHECK(cli::cmd_portfolio(csv, flags).exit_code == cli::kExitInput);
  flags.jstar = "sometimes";
  CHECK(cli::cmd_portfolio(csv, flags).exit_code == cli::kExitInput);
  flags = {};
  flags.mean = "0.1";
  CHECK(cli::cmd_portfolio(csv, flags).exit_code == cli::kExitInput);
  CHECK(cli::cmd_portfolio(scratch("nope.csv"), {}).exit_code == cli::kExitInput);
}

TEST_CASE("portfolio j* modes through the command") {
  const auto csv = testing::data_dir() / "returns_example.csv";
  cli::PortfolioFlags flags;
  flags.f_spec = "list:1,1,1,1,1,1,1,1,1,1,1,0.5";
  for (const char* mode : {"fixed:4", "given-w", "fixed-point"}) {
    flags.jstar = mode;
    const auto res = cli::cmd_portfolio(csv, flags);
    CHECK(res.exit_code == cli::kExitOk);
    CHECK(res.report["jstar"]["index"].get<int>() >= 1);
  }
  flags.jstar = "fixed:4";
  CHECK(cli::cmd_portfolio(csv, flags).report["jstar"]["index"] == 4);
  flags.jstar = "given-w";
  flags.w = "1,0,0,0";
  const auto panel = io::load_returns_csv(csv);
  const int expected = portfolio::argmin_exposure(panel, (Vec(4) << 1, 0, 0, 0).finished()) + 1;
  CHECK(cli::cmd_portfolio(csv, flags).report["jstar"]["index"] == expected);
}

TEST_CASE("command-line executable") {
  const std::string data = testing::data_dir().string();
  CHECK(run_cli("solve " + data + "/example_paper.json") == 0);
  CHECK(run_cli("solve " + data + "/example_paper.json --human --starts 5 --seed 2") == 0);
  CHECK(run_cli("certify " + data + "/example_paper.json " + data + "/paper_claimed_solution.json") == 2);
  CHECK(run_cli("solve " + data + "/missing.json") == 1);
  CHECK(run_cli("solve") == 1);
  CHECK(run_cli("frobnicate") == 1);
  CHECK(run_cli("generate --p 3 --q 2 --seed 1 --out " + scratch("exe_gen.json").string()) == 0);
  CHECK(run_cli("solve " + scratch("exe_gen.json").string() + " --parallel") == 0);
  CHECK(run_cli("portfolio " + data + "/two_assets.csv --mean 0.1,0.2 --c0 0.5 --f list:2,1") == 0);
  CHECK(run_cli("portfolio " + data + "/returns_example.csv --c0 0.01") == 2);
}

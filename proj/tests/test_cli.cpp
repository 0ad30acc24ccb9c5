#include "rsw/cli.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result run(std::initializer_list<const char*> args) {
  std::vector<const char*> argv{"rsw"};
  argv.insert(argv.end(), args.begin(), args.end());
  std::ostringstream out, err;
  Result r;
  r.code = rsw::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("rsw_cli_test_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("exit codes") {
  CHECK(run({"residual", "--family", "drop"}).code == rsw::cli::ok);
  CHECK(run({"residual", "--family", "drop", "--corrupt-depth", "1.01"}).code == rsw::cli::verification_failure);
  CHECK(run({"residual", "--family", "no-such-family"}).code == rsw::cli::bad_arguments);
  CHECK(run({"field", "--family", "pulsating-cylinder"}).code == rsw::cli::bad_arguments);
  CHECK(run({"field", "--family", "pulsating-cylinder", "--alpha", "0"}).code == rsw::cli::bad_arguments);
  CHECK(run({"field", "--family", "drop", "--alpha", "2", "--t", "0", "--r", "3:4:2"}).code ==
        rsw::cli::window_violation);
  CHECK(run({}).code == rsw::cli::bad_arguments);
}

TEST_CASE("residual report in both derivative modes") {
  Result a = run({"residual", "--family", "ring", "--format", "json"});
  REQUIRE(a.code == 0);
  auto j = nlohmann::json::parse(a.out);
  CHECK(j["schema"] == 1);
  CHECK(j["mode"] == "analytic");
  CHECK(j["max_residual"].get<double>() < 1e-6);
  CHECK(j["pass"] == true);

  Result d = run({"residual", "--family", "ring", "--format", "json", "--mode", "fd", "--fd-step", "1e-5"});
  REQUIRE(d.code == 0);
  j = nlohmann::json::parse(d.out);
  CHECK(j["mode"] == "fd");
  CHECK(j["fd_step"].get<double>() == 1e-5);
  CHECK(j["threshold"].get<double>() == 1e-4);
}

TEST_CASE("field sample of the cylinder at t = 0") {
  Result r = run({"field", "--family", "pulsating-cylinder", "--alpha", "2", "--t", "0", "--r", "0.5:1:2"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("\r\n") != std::string::npos);
  auto first = r.out.substr(0, r.out.find("\r\n"));
  CHECK(first.find("h") != std::string::npos);
  // h = alpha h0 everywhere at t = 0.
  CHECK(r.out.find(",2\r\n") != std::string::npos);
}

TEST_CASE("a single value is a one-node axis") {
  Result r = run({"field", "--family", "drop", "--alpha", "2", "--t", "0:1:3", "--r", "0.1:1:4", "--theta", "0.5"});
  REQUIRE(r.code == 0);
  int lines = 0;
  for (std::size_t p = 0; (p = r.out.find("\r\n", p)) != std::string::npos; p += 2) ++lines;
  CHECK(lines == 1 + 3 * 4);
}

TEST_CASE("drop trajectories report their closure class") {
  Result r = run({"trajectory", "--family", "drop", "--alpha", "2", "--r0", "0.57735026918962573",
                  "--periods", "3"});
  REQUIRE(r.code == 0);
  CHECK(r.err.find("closed m=1 M=3") != std::string::npos);
  Result j = run({"trajectory", "--family", "drop", "--alpha", "2", "--r0", "0.57735026918962573",
                  "--periods", "3", "--format", "json"});
  auto doc = nlohmann::json::parse(j.out);
  CHECK(doc["particles"][0]["closure"]["M"] == 3);
  CHECK(doc["particles"][0]["formula_max_error"].get<double>() < 1e-6);
}

TEST_CASE("commutator tables") {
  for (const char* basis : {"Y", "Z"}) {
    Result r = run({"commutators", "--family", basis, "--format", "json"});
    REQUIRE(r.code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["matches_paper_table"] == true);
    CHECK(j["table"].size() == 9);
  }
  Result a = run({"commutators", "--family", "Y", "--format", "json"});
  Result b = run({"commutators", "--family", "Y", "--f", "0.37", "--format", "json"});
  CHECK(nlohmann::json::parse(a.out)["table"] == nlohmann::json::parse(b.out)["table"]);
  Result z = run({"commutators", "--family", "Z", "--format", "json"});
  CHECK(nlohmann::json::parse(z.out)["table"][6][8] == "2Z7");
}

TEST_CASE("map outputs") {
  Result r = run({"map", "--family", "rest", "--direction", "rsw2sw", "--format", "json"});
  REQUIRE(r.code == 0);
  CHECK(nlohmann::json::parse(r.out)["schema"] == 1);
  CHECK(run({"map", "--family", "rest", "--transport", "--alpha", "2"}).code == 0);
  CHECK(run({"map", "--family", "rest", "--transport"}).code == rsw::cli::bad_arguments);
  CHECK(run({"map", "--family", "rest", "--transport", "--alpha", "2", "--direction", "rsw2sw"}).code ==
        rsw::cli::bad_arguments);
}

TEST_CASE("file output is written atomically") {
  const auto path = scratch("res.json");
  Result r = run({"residual", "--family", "rest", "--format", "json", "--out", path.c_str()});
  REQUIRE(r.code == 0);
  CHECK(r.out.empty());
  CHECK(nlohmann::json::parse(slurp(path))["pass"] == true);
  for (const auto& e : std::filesystem::directory_iterator(path.parent_path())) {
    CHECK(e.path().string().find(".tmp") == std::string::npos);
  }
  std::filesystem::remove_all(path.parent_path());
}

TEST_CASE("separate processes produce identical bytes") {
  const auto a = scratch("a.csv");
  const auto b = scratch("b.csv");
  for (const auto& p : {a, b}) {
    const std::string cmd = std::string(RSW_CLI_PATH) +
                            " trajectory --family drop --alpha 2 --r0 0.3,0.8 --periods 2 --out " +
                            p.string() + " 2>/dev/null";
    REQUIRE(std::system(cmd.c_str()) == 0);
  }
  const std::string sa = slurp(a);
  CHECK(!sa.empty());
  CHECK(sa == slurp(b));
  std::filesystem::remove_all(a.parent_path());
}

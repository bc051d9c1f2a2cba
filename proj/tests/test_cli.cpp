#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "api_fixtures.hpp"

using api_fixtures::fresh_dir;
using api_fixtures::slurp;
using api_fixtures::tiny_config_json;
using Json = nlohmann::json;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
};

// Runs the CLI with `args`, capturing stdout; stderr is discarded.
Outcome cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " '" NLSDAMP_CLI_PATH "' " + args + " 2>/dev/null";
  Outcome o;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), pipe) != nullptr) o.out += buf.data();
  const int status = ::pclose(pipe);
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return o;
}

std::string write_config(const std::filesystem::path& dir, const std::string& name, const std::string& text) {
  const auto p = dir / name;
  std::ofstream(p) << text;
  return p.string();
}

std::string trim(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("presets and show") {
    const Outcome p = cli("presets");
    CHECK(p.code == 0);
    CHECK(p.out.find("fig8") != std::string::npos);
    const Outcome s = cli("show fig2");
    CHECK(s.code == 0);
    const Json j = Json::parse(s.out);
    CHECK(j.at("id") == "fig2");
    CHECK(j.at("runs").size() == 4);
    CHECK(cli("--version").code == 0);
  }

  TEST_CASE("usage and validation errors exit with 2") {
    CHECK(cli("").code == 2);
    CHECK(cli("frobnicate").code == 2);
    CHECK(cli("run").code == 2);
    CHECK(cli("show not_a_preset").code == 2);
    CHECK(cli("run not_a_preset").code == 2);

    const auto dir = fresh_dir("cli_validation");
    Json j = Json::parse(tiny_config_json("cli_missing"));
    j["runs"][0]["solver"].erase("dt0");
    const std::string missing = write_config(dir, "missing.json", j.dump());
    CHECK(cli("run " + missing + " --output-root " + dir.string()).code == 2);
    CHECK(cli("show " + write_config(dir, "broken.json", "{")).code == 2);
    CHECK(cli("verify " + (dir / "nothing" / "manifest.json").string()).code == 2);
    CHECK(cli("export ground_state --params '{\"d\": 1}' -o " + (dir / "x.csv").string()).code == 2);
    CHECK(cli("sweep fig1 --param delta --values 1e-3 --parallel 0").code == 2);
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("numerical failure exits with 3") {
    const auto dir = fresh_dir("cli_numerical");
    const std::string cfg = write_config(dir, "budget.json", tiny_config_json("cli_budget", 1));
    CHECK(cli("run " + cfg + " --output-root " + dir.string()).code == 3);
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("run, verify and analyze a config file") {
    const auto dir = fresh_dir("cli_run");
    const std::string cfg = write_config(dir, "tiny.json", tiny_config_json("cli_tiny"));
    const Outcome r = cli("run " + cfg + " --output-root " + (dir / "out").string());
    REQUIRE(r.code == 0);
    const std::string manifest = trim(r.out);
    CHECK(manifest == (dir / "out" / "cli_tiny" / "manifest.json").string());
    const Outcome v = cli("verify " + manifest);
    CHECK(v.code == 0);
    CHECK(trim(v.out) == "ok");
    const Outcome a = cli("analyze " + manifest);
    CHECK(a.code == 0);
    CHECK(Json::parse(a.out).at("verified") == true);

    std::ofstream(dir / "out" / "cli_tiny" / "summary.csv", std::ios::app) << "tampered\n";
    CHECK(cli("verify " + manifest).code == 2);
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("output root from the environment") {
    const auto dir = fresh_dir("cli_env");
    const std::string cfg = write_config(dir, "tiny.json", tiny_config_json("cli_env_tiny"));
    const Outcome r = cli("run " + cfg, "NLSDAMP_OUTPUT_ROOT='" + (dir / "envroot").string() + "'");
    CHECK(r.code == 0);
    CHECK(std::filesystem::exists(dir / "envroot" / "cli_env_tiny" / "manifest.json"));
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("sweep prints one line per value and reports the first failure") {
    const auto dir = fresh_dir("cli_sweep");
    const std::string cfg = write_config(dir, "tiny.json", tiny_config_json("cli_sweep_tiny"));
    const Outcome ok = cli("sweep " + cfg + " --param delta --values 0.001,0.002 --parallel 2 --output-root " +
                           dir.string());
    CHECK(ok.code == 0);
    CHECK(ok.out.find("0.001\tok\t") == 0);
    CHECK(ok.out.find("\n0.002\tok\t") != std::string::npos);

    const Outcome bad = cli("sweep " + cfg + " --param delta --values 0.001,-1 --output-root " + dir.string());
    CHECK(bad.code == 2);
    CHECK(bad.out.find("-1\tvalidation error\t") != std::string::npos);
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("export writes the requested artifact") {
    const auto dir = fresh_dir("cli_export");
    const std::string out = (dir / "q.csv").string();
    const Outcome e = cli("export q_profile --params '{\"p\": 7}' -o " + out);
    CHECK(e.code == 0);
    CHECK(slurp(out).find("rho") != std::string::npos);
    std::filesystem::remove_all(dir);
  }
}

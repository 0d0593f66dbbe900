#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>
#include <string>

#include <json.hpp>

#include "commands.hpp"
#include "run_config.hpp"

using namespace shearless;
using namespace shearless::cli;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct ScratchDir {
  fs::path path;
  explicit ScratchDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~ScratchDir() { fs::remove_all(path); }
};

json shear_config() {
  return json::parse(R"({
    "system": {"name": "shear-canonical"},
    "time": {"t0": 0, "t1": 1},
    "window": [-1.0, 1.0, -0.9, 0.9],
    "resolution": [41, 37],
    "solver": {"method": "rk4", "step": 0.01}
  })");
}

std::string field_of(const json& doc) {
  try {
    parse_run_config(doc, fs::current_path());
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int run_command(const std::string& command, const fs::path& config, const fs::path& out) {
  Invocation inv;
  inv.command = command;
  inv.config_path = config;
  inv.out = out;
  inv.log_level = LogLevel::Error;
  return run(inv);
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("bundled configs parse") {
  const fs::path dir = fs::path(SHEARLESS_SOURCE_DIR) / "configs";
  std::set<std::string> names;
  for (const auto& entry : fs::directory_iterator(dir)) {
    CAPTURE(entry.path().string());
    const auto cfg = load_run_config(entry.path());
    CHECK(cfg.system.has_value());
    names.insert(entry.path().stem().string());
  }
  for (const char* required : {"sntm-integrable", "sntm-chaotic", "sntm-meanfield", "bickley-quasiperiodic",
                               "bickley-chaotic", "ftle-counterexample", "shear-canonical"})
    CHECK(names.count(required) == 1);
}

TEST_CASE("config errors name the offending field") {
  auto doc = shear_config();
  doc.erase("resolution");
  CHECK(field_of(doc) == "resolution");

  doc = shear_config();
  doc["resolution"] = json::array({1, 37});
  CHECK(field_of(doc).rfind("resolution", 0) == 0);

  doc = shear_config();
  doc["solver"]["abs_tol"] = -1.0;
  CHECK(field_of(doc) == "solver.abs_tol");

  doc = shear_config();
  doc["tensorlines"] = {{"stepp", 0.1}};
  CHECK(field_of(doc).rfind("tensorlines", 0) == 0);

  doc = shear_config();
  doc["system"]["name"] = "no-such-system";
  CHECK(field_of(doc).rfind("system", 0) == 0);

  doc = shear_config();
  doc["time"].erase("t1");
  CHECK(field_of(doc) == "time.t1");

  CHECK(field_of(shear_config()).empty());
}

TEST_CASE("missing resolution exits with code 2") {
  ScratchDir dir("shearless_cli_missing");
  auto doc = shear_config();
  doc.erase("resolution");
  std::ofstream(dir.path / "bad.json") << doc.dump(2);
  CHECK(run_command("field", dir.path / "bad.json", dir.path / "out") == kConfigError);
  CHECK(run_command("field", dir.path / "absent.json", dir.path / "out") == kConfigError);
  std::ofstream(dir.path / "syntax.json") << "{ \"system\": ";
  CHECK(run_command("field", dir.path / "syntax.json", dir.path / "out") == kConfigError);
  CHECK(run_command("no-such-command", dir.path / "bad.json", dir.path / "out") == kConfigError);
}

TEST_CASE("rerunning from the manifest reproduces outputs byte for byte") {
  ScratchDir dir("shearless_cli_roundtrip");
  std::ofstream(dir.path / "shear.json") << shear_config().dump(2);
  REQUIRE(run_command("tensorlines", dir.path / "shear.json", dir.path / "first") == kOk);
  REQUIRE(fs::exists(dir.path / "first" / "run_manifest.json"));
  const auto manifest = json::parse(slurp(dir.path / "first" / "run_manifest.json"));
  CHECK(manifest.at("command") == "tensorlines");
  CHECK(manifest.at("exit_code") == 0);
  CHECK(manifest.at("config").at("resolution") == json::array({41, 37}));

  REQUIRE(run_command("tensorlines", dir.path / "first" / "run_manifest.json", dir.path / "second") == kOk);
  std::size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(dir.path / "first")) {
    const auto name = entry.path().filename();
    if (name == "run_manifest.json") continue;
    CAPTURE(name.string());
    REQUIRE(fs::exists(dir.path / "second" / name));
    CHECK(slurp(entry.path()) == slurp(dir.path / "second" / name));
    ++compared;
  }
  CHECK(compared >= 3);

  // Nothing lands next to the config.
  std::set<std::string> top;
  for (const auto& entry : fs::directory_iterator(dir.path)) top.insert(entry.path().filename().string());
  CHECK(top == std::set<std::string>{"first", "second", "shear.json"});
}

TEST_CASE("validate reports failures through the exit code") {
  ScratchDir dir("shearless_cli_validate");
  auto doc = shear_config();
  doc["validate"] = {{"chains", 1}};
  std::ofstream(dir.path / "expect_chain.json") << doc.dump(2);
  CHECK(run_command("validate", dir.path / "expect_chain.json", dir.path / "out") == kValidationFailed);
  CHECK(fs::exists(dir.path / "out" / "metrics.txt"));
  doc["validate"] = {{"chains", 0}};
  std::ofstream(dir.path / "expect_none.json") << doc.dump(2);
  CHECK(run_command("validate", dir.path / "expect_none.json", dir.path / "out2") == kOk);
}

}  // TEST_SUITE

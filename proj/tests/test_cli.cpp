// End-to-end checks of the eth-lab binary: exit codes, artifact layout,
// manifest, cache refusal, determinism of emitted files.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

#ifndef ETH_LAB_CLI_PATH
#error "ETH_LAB_CLI_PATH must be defined by the build"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(ETH_LAB_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

struct Workspace {
  fs::path root;
  Workspace() {
    root = fs::temp_directory_path() / "ethlab_cli_test";
    fs::remove_all(root);
    fs::create_directories(root);
    std::ofstream spec(root / "model.json");
    spec << R"({
      "model_family": "transverse_ising",
      "sys_sites": 1,
      "bath_sites": 5,
      "couplings": {"J": 1.0, "delta_z": 1.0, "h": 0.9055, "h_S": 0.5, "g": 0.4},
      "disorder": {"seed": 12345, "amplitude": 0.001}
    })";
  }
  ~Workspace() { fs::remove_all(root); }
  std::string path(const std::string& rel) const { return (root / rel).string(); }
};

fs::path find_cache(const fs::path& cache_root) {
  for (const auto& entry : fs::directory_iterator(cache_root)) {
    if (entry.is_directory()) return entry.path();
  }
  return {};
}

}  // namespace

TEST_CASE("cli: build, diag, eth, thermo round trip with manifests") {
  Workspace ws;
  REQUIRE(run("build --spec " + ws.path("model.json") + " --out " + ws.path("b")) == 0);
  CHECK(fs::exists(ws.root / "b" / "split_report.json"));
  CHECK(fs::exists(ws.root / "b" / "manifest.json"));

  REQUIRE(run("diag --spec " + ws.path("model.json") + " --out " + ws.path("cache")) == 0);
  const fs::path cache = find_cache(ws.root / "cache");
  REQUIRE(!cache.empty());
  CHECK(fs::exists(cache / "meta.json"));
  CHECK(fs::exists(cache / "energies.f64"));
  CHECK(fs::exists(cache / "eigvecs.c128"));
  CHECK(fs::exists(cache / "manifest.json"));

  const json meta = json::parse(slurp(cache / "meta.json"));
  CHECK(meta.at("d_total") == 64);
  CHECK(meta.at("format_version") == 1);
  CHECK(cache.filename().string() ==
        meta.at("model_hash").get<std::string>().substr(0, 16));

  REQUIRE(run("eth --cache " + cache.string() +
              " --emin -2 --emax 2 --delta 0.1 --out " + ws.path("eth")) == 0);
  const json rep = json::parse(slurp(ws.root / "eth" / "eth_report.json"));
  CHECK(rep.contains("eps_measured"));
  CHECK(fs::exists(ws.root / "eth" / "eth_report.csv"));

  const json manifest = json::parse(slurp(ws.root / "eth" / "manifest.json"));
  CHECK(manifest.at("kind") == "run_manifest");
  CHECK(manifest.at("command") == "eth");
  CHECK(manifest.at("timings_ms").contains("total"));
  CHECK(manifest.at("outputs").size() == 2);

  REQUIRE(run("thermo --cache " + cache.string() + " --out " + ws.path("thermo")) == 0);
  const std::string csv = slurp(ws.root / "thermo" / "thermo_profile.csv");
  CHECK(csv.rfind("E,dos,S,beta,C,in_valid_range\n", 0) == 0);

  REQUIRE(run("plot --in " + ws.path("thermo/thermo_profile.json") +
              " --kind thermo --out " + ws.path("plots")) == 0);
  const std::string svg = slurp(ws.root / "plots" / "thermo.svg");
  CHECK(svg.find("<svg") != std::string::npos);
}

TEST_CASE("cli: eth sweep over several deltas renders a curve") {
  Workspace ws;
  REQUIRE(run("diag --spec " + ws.path("model.json") + " --out " + ws.path("cache")) == 0);
  const fs::path cache = find_cache(ws.root / "cache");
  REQUIRE(run("eth --cache " + cache.string() +
              " --emin -2 --emax 2 --delta 0.05 --delta 0.1 --delta 0.2" +
              " --formats json,csv,svg --out " + ws.path("sweep")) == 0);
  const json rep = json::parse(slurp(ws.root / "sweep" / "eth_report.json"));
  CHECK(rep.at("kind") == "eth_sweep");
  CHECK(rep.at("points").size() == 3);
  // monotone in delta
  CHECK(rep.at("points")[0].at("eps_measured").get<double>() <=
        rep.at("points")[2].at("eps_measured").get<double>() + 1e-12);
  CHECK(fs::exists(ws.root / "sweep" / "eth_report.svg"));
}

TEST_CASE("cli: exit codes and stale-cache refusal") {
  Workspace ws;
  CHECK(run("eth --cache /nonexistent --emin 0 --emax 1 --delta 0.1 --out " +
            ws.path("x")) == 2);
  CHECK(run("build --spec /nonexistent.json --out " + ws.path("x")) == 2);

  REQUIRE(run("diag --spec " + ws.path("model.json") + " --out " + ws.path("cache")) == 0);
  const fs::path cache = find_cache(ws.root / "cache");

  // region with fewer than two eigenstates -> precondition error (exit 2)
  CHECK(run("eth --cache " + cache.string() +
            " --emin 1e8 --emax 1e9 --delta 0.1 --out " + ws.path("y")) == 2);
  // failed runs leave no partial artifacts behind
  CHECK(!fs::exists(ws.root / "y" / "eth_report.json"));

  // tamper with the stored model -> hash mismatch -> refuse
  {
    json model = json::parse(slurp(cache / "model.json"));
    model["couplings"]["g"] = 0.999;
    std::ofstream out(cache / "model.json", std::ios::trunc);
    out << model.dump(2) << "\n";
  }
  CHECK(run("eth --cache " + cache.string() +
            " --emin -2 --emax 2 --delta 0.1 --out " + ws.path("z")) == 2);
}

TEST_CASE("cli: repeated runs with identical seeds are byte-identical") {
  Workspace ws;
  REQUIRE(run("diag --spec " + ws.path("model.json") + " --out " + ws.path("cache")) == 0);
  const fs::path cache = find_cache(ws.root / "cache");

  const std::string args = "therm --cache " + cache.string() +
                           " --E 0.0 --delta-b 2.0 --seed 99 --random-product 32 "
                           "--random-entangled 32 --climb-iters 20 --out ";
  REQUIRE(run(args + ws.path("t1")) == 0);
  REQUIRE(run(args + ws.path("t2")) == 0);
  CHECK(slurp(ws.root / "t1" / "therm_report.json") ==
        slurp(ws.root / "t2" / "therm_report.json"));
}

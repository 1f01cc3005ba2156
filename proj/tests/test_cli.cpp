#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

namespace fs = std::filesystem;

namespace {

const std::string kCli = GFOBF_CLI_PATH;

struct RunResult {
  int exit_code = -1;
  std::string output;
};

RunResult run(const std::string& args) {
  const fs::path log = fs::temp_directory_path() / "gfobf_cli_out.txt";
  const std::string cmd = kCli + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WEXITSTATUS(status);
  std::ifstream in(log);
  r.output.assign(std::istreambuf_iterator<char>(in),
                  std::istreambuf_iterator<char>());
  return r;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("gfobf_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

std::size_t count_lines(const std::string& s) {
  std::size_t n = 0;
  for (char c : s)
    if (c == '\n') ++n;
  return n;
}

const char* kPairConfig = R"({
  "m": 4,
  "true_poly": "x^4+x^3+1",
  "obfuscation_polys": ["x^4+x+1"],
  "optimize": true,
  "seed": 7
})";

}  // namespace

TEST_CASE("polys lists the small-degree tables") {
  const auto r4 = run("polys 4");
  CHECK(r4.exit_code == 0);
  CHECK(count_lines(r4.output) == 3);
  CHECK(r4.output.find("x^4+x+1") != std::string::npos);

  const auto r3 = run("polys 3");
  CHECK(r3.exit_code == 0);
  CHECK(count_lines(r3.output) == 2);

  CHECK(run("polys 1").exit_code == 2);
  CHECK(run("polys 4 --filter nist").output == "x^4+x+1\n");
  CHECK(run("polys 64 --limit 1").output == "x^64+x^4+x^3+x+1\n");
  CHECK(run("polys 64").exit_code == 2);  // no full scan without a limit
}

TEST_CASE("build writes a deterministic bundle") {
  const fs::path dir = scratch_dir("build");
  write(dir / "config.json", kPairConfig);

  const auto r1 = run("build --config " + (dir / "config.json").string() +
                      " --out " + (dir / "out1").string());
  REQUIRE(r1.exit_code == 0);
  for (const char* name : {"design.locked.v", "design.resolved.v",
                           "keyspec.json", "cost.json", "report.json"})
    CHECK(fs::exists(dir / "out1" / name));

  const auto r2 = run("build --config " + (dir / "config.json").string() +
                      " --out " + (dir / "out2").string());
  REQUIRE(r2.exit_code == 0);
  for (const char* name : {"design.locked.v", "design.resolved.v",
                           "keyspec.json", "cost.json", "report.json"})
    CHECK(slurp(dir / "out1" / name) == slurp(dir / "out2" / name));

  CHECK(slurp(dir / "out1" / "design.resolved.v").find(" P") ==
        std::string::npos);
  CHECK(slurp(dir / "out1" / "keyspec.json").find("\"classes\"") !=
        std::string::npos);
}

TEST_CASE("building a plain design writes no key artifacts") {
  const fs::path dir = scratch_dir("plain");
  write(dir / "config.json",
        R"({"m": 4, "true_poly": "x^4+x^3+1", "obfuscation_polys": []})");
  const auto r = run("build --config " + (dir / "config.json").string() +
                     " --out " + (dir / "out").string());
  REQUIRE(r.exit_code == 0);
  CHECK(fs::exists(dir / "out" / "design.resolved.v"));
  CHECK_FALSE(fs::exists(dir / "out" / "design.locked.v"));
  CHECK_FALSE(fs::exists(dir / "out" / "keyspec.json"));
  CHECK(run("verify --bundle " + (dir / "out").string() +
            " --plan exhaustive")
            .exit_code == 0);
}

TEST_CASE("config validation failures exit with usage status") {
  const fs::path dir = scratch_dir("badcfg");
  write(dir / "dup.json",
        R"({"m": 4, "true_poly": "x^4+x+1", "obfuscation_polys": ["x^4+x+1"]})");
  CHECK(run("build --config " + (dir / "dup.json").string() + " --out " +
            (dir / "o").string())
            .exit_code == 2);
  write(dir / "mismatch.json", R"({"m": 5, "true_poly": "x^4+x+1"})");
  CHECK(run("build --config " + (dir / "mismatch.json").string() + " --out " +
            (dir / "o").string())
            .exit_code == 2);
  write(dir / "unknown.json",
        R"({"m": 4, "true_poly": "x^4+x+1", "bogus": 1})");
  CHECK(run("build --config " + (dir / "unknown.json").string() + " --out " +
            (dir / "o").string())
            .exit_code == 2);
  write(dir / "reducible.json", R"({"m": 4, "true_poly": "x^4+x^2+1"})");
  CHECK(run("build --config " + (dir / "reducible.json").string() +
            " --out " + (dir / "o").string())
            .exit_code == 2);
}

TEST_CASE("verify passes a sound bundle and rejects a tampered key") {
  const fs::path dir = scratch_dir("verify");
  write(dir / "config.json", kPairConfig);
  REQUIRE(run("build --config " + (dir / "config.json").string() + " --out " +
              (dir / "out").string())
              .exit_code == 0);

  const auto ok =
      run("verify --bundle " + (dir / "out").string() + " --plan exhaustive");
  CHECK(ok.exit_code == 0);
  CHECK(ok.output.find("\"verdict\": \"pass\"") != std::string::npos);

  // flip the stored true key to the wrong class
  const fs::path keyspec = dir / "out" / "keyspec.json";
  std::string text = slurp(keyspec);
  const auto pos = text.find("\"true_key\": [\n    1\n  ]");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, std::string("\"true_key\": [\n    1\n  ]").size(),
               "\"true_key\": [\n    0\n  ]");
  write(keyspec, text);

  const auto bad =
      run("verify --bundle " + (dir / "out").string() + " --plan exhaustive");
  CHECK(bad.exit_code == 1);
  CHECK(bad.output.find("\"verdict\": \"fail\"") != std::string::npos);
}

TEST_CASE("verify supports seeded random plans") {
  const fs::path dir = scratch_dir("verify_rand");
  write(dir / "config.json", kPairConfig);
  REQUIRE(run("build --config " + (dir / "config.json").string() + " --out " +
              (dir / "out").string())
              .exit_code == 0);
  const auto r = run("verify --bundle " + (dir / "out").string() +
                     " --plan random --count 500 --seed 3");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("\"checked\": 500") != std::string::npos);
}

TEST_CASE("attack solves a self-built bundle") {
  const fs::path dir = scratch_dir("attack");
  write(dir / "config.json", R"({
    "m": 8,
    "true_poly": "0x11b",
    "obfuscation_polys": ["0x11d", "0x12b", "0x12d"],
    "seed": 5
  })");
  REQUIRE(run("build --config " + (dir / "config.json").string() + " --out " +
              (dir / "out").string())
              .exit_code == 0);
  const auto r = run("attack --bundle " + (dir / "out").string() + " --out " +
                     (dir / "attack.json").string());
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("\"verdict\": \"solved\"") != std::string::npos);
  CHECK(r.output.find("x^8+x^4+x^3+x+1") != std::string::npos);
  CHECK(fs::exists(dir / "attack.json"));

  // the same bundle verifies exhaustively under its stored key
  CHECK(run("verify --bundle " + (dir / "out").string() +
            " --plan exhaustive")
            .exit_code == 0);

  const auto starved = run("attack --bundle " + (dir / "out").string() +
                           " --budget 0");
  CHECK(starved.exit_code == 1);
  CHECK(starved.output.find("\"verdict\": \"exhausted\"") !=
        std::string::npos);
}

TEST_CASE("attack drives an external oracle over the line protocol") {
  const fs::path dir = scratch_dir("attack_ext");
  write(dir / "config.json", kPairConfig);
  REQUIRE(run("build --config " + (dir / "config.json").string() + " --out " +
              (dir / "out").string())
              .exit_code == 0);
  const std::string oracle_cmd = kCli + " oracle --m 4 --poly 0x19";
  const auto r = run("attack --verilog " +
                     (dir / "out" / "design.locked.v").string() +
                     " --oracle-cmd \"" + oracle_cmd + "\" --m 4");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("\"verdict\": \"solved\"") != std::string::npos);
  CHECK(r.output.find("x^4+x^3+1") != std::string::npos);

  const auto hyp = run("attack --mode hypothesis --oracle-cmd \"" +
                       oracle_cmd + "\" --m 4");
  CHECK(hyp.exit_code == 0);
  CHECK(hyp.output.find("x^4+x^3+1") != std::string::npos);
}

TEST_CASE("sweep emits overhead rows relative to the plain design") {
  const auto r = run("sweep --m 4,8 --k 1,2,3");
  REQUIRE(r.exit_code == 0);
  CHECK(count_lines(r.output) == 7);  // header + 6 rows
  CHECK(r.output.find("4,1,") != std::string::npos);
  CHECK(r.output.find(",0.0000,0.0000,0") != std::string::npos);  // k=1 row
}

TEST_CASE("orders exploration is reproducible") {
  const fs::path dir = scratch_dir("orders");
  write(dir / "config.json", R"({
    "m": 4,
    "true_poly": "x^4+x^3+1",
    "obfuscation_polys": ["x^4+x+1", "x^4+x^3+x^2+x+1"],
    "seed": 11
  })");
  const std::string base = "orders --config " +
                           (dir / "config.json").string() +
                           " --mode exhaustive --check-vectors 64";
  const auto r1 = run(base + " --out " + (dir / "o1").string());
  REQUIRE(r1.exit_code == 0);
  const auto r2 = run(base + " --out " + (dir / "o2").string());
  REQUIRE(r2.exit_code == 0);
  CHECK(slurp(dir / "o1" / "orders.csv") == slurp(dir / "o2" / "orders.csv"));
  CHECK(count_lines(slurp(dir / "o1" / "orders.csv")) == 3);  // header + 2!
  CHECK(r1.output.find("\"designs\": 2") != std::string::npos);

  const auto sampled = run("orders --config " + (dir / "config.json").string() +
                           " --mode sample --samples 5");
  CHECK(sampled.exit_code == 0);
  CHECK(sampled.output.find("\"designs\": 5") != std::string::npos);
}

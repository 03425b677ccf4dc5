#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "vgrowth/cli.hpp"
#include "vgrowth/imageio.hpp"

using namespace vgrowth;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "vgrowth_test_cli";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

int lines(const std::string& s) { return static_cast<int>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("usage errors") {
  CHECK(run({}).code == cli::kUsage);
  CHECK(run({"frobnicate"}).code == cli::kUsage);
  const Run unknown = run({"phantom", "--clean", "a", "--noisy", "b", "--bogus"});
  CHECK(unknown.code == cli::kUsage);
  CHECK(lines(unknown.err) == 1);
  CHECK(run({"phantom", "--kind", "star", "--clean", "a", "--noisy", "b"}).code == cli::kUsage);
  CHECK(run({"verify-density", "--report", "r.json", "--mu", "0.5"}).code == cli::kUsage);
  CHECK(run({"verify-density", "--report", "r.json", "--range", "1,2"}).code == cli::kUsage);
  CHECK(run({"denoise", "--input", "x.pgm", "--output", "y.pgm", "--delta-factor", "2"}).code == cli::kUsage);
  CHECK(run({"phantom", "--size", "0x4", "--clean", "a", "--noisy", "b"}).code == cli::kUsage);
}

TEST_CASE("help lists every flag with defaults") {
  for (const char* sub : {"denoise", "inpaint", "verify-density", "profile-density", "study-continuation", "phantom"}) {
    const Run r = run({sub, "--help"});
    CHECK(r.code == 0);
    CAPTURE(sub);
    CHECK(r.out.find("--") != std::string::npos);
  }
  const Run d = run({"denoise", "--help"});
  for (const char* flag : {"--density", "--mu", "--p", "--eps", "--fidelity", "--lambda", "--delta0", "--delta-steps",
                           "--delta-factor", "--tol", "--history", "--input", "--output"})
    CHECK_MESSAGE(d.out.find(flag) != std::string::npos, flag);
  CHECK(d.out.find("1.8") != std::string::npos);
  CHECK(d.out.find("0.01") != std::string::npos);
  const Run p = run({"phantom", "--help"});
  CHECK(p.out.find("64x64") != std::string::npos);
}

TEST_CASE("phantom is deterministic") {
  const std::vector<std::string> base{"phantom", "--kind", "disk", "--size", "64x64", "--noise", "gaussian:0.1:7"};
  auto a = base;
  a.insert(a.end(), {"--clean", scratch("c1.pgm").string(), "--noisy", scratch("n1.pgm").string()});
  auto b = base;
  b.insert(b.end(), {"--clean", scratch("c2.pgm").string(), "--noisy", scratch("n2.pgm").string()});
  REQUIRE(run(a).code == 0);
  REQUIRE(run(b).code == 0);
  CHECK(slurp(scratch("n1.pgm")) == slurp(scratch("n2.pgm")));
  CHECK(slurp(scratch("c1.pgm")) == slurp(scratch("c2.pgm")));
  CHECK(read_pgm(scratch("n1.pgm")).width() == 64);
}

TEST_CASE("verify-density") {
  const fs::path report = scratch("varexp.json");
  const Run r = run({"verify-density", "--density", "varexp", "--mu", "1.4", "--p", "1.2", "--strict", "--report",
                     report.string(), "--curves", scratch("curve_").string()});
  CHECK(r.code == 0);
  const auto doc = nlohmann::json::parse(slurp(report));
  for (const auto& rep : doc["reports"]) CHECK(rep["verdict"] == "holds");
  CHECK(fs::exists(scratch("curve_balance.csv")));

  const Run spike = run({"verify-density", "--density", "spike", "--mu", "2", "--p", "2", "--strict", "--report",
                         scratch("spike.json").string()});
  CHECK(spike.code == cli::kConditionViolated);
  CHECK(spike.out.find("balance: unbounded-trend") != std::string::npos);
  CHECK(run({"verify-density", "--density", "spike", "--mu", "2", "--p", "2", "--report",
             scratch("spike.json").string()}).code == 0);

  CHECK(run({"verify-density", "--report", "/nonexistent-dir/r.json"}).code == cli::kIo);
}

TEST_CASE("profile-density") {
  const fs::path out = scratch("profile.csv");
  REQUIRE(run({"profile-density", "--density", "blend", "--mu", "2", "--p", "1.5", "--eta", "logistic:3:1",
               "--range", "0,10,32", "--spacing", "linear", "--out", out.string()}).code == 0);
  const std::string text = slurp(out);
  CHECK(text.rfind("t,g,g1,g2,lower_env,upper_env\n", 0) == 0);
  CHECK(lines(text) == 33);
  CHECK(run({"profile-density", "--density", "blend", "--eta", "cubic:1", "--out", out.string()}).code ==
        cli::kUsage);
}

TEST_CASE("denoise, inpaint and study-continuation") {
  const fs::path flat = scratch("flat.pgm");
  write_pgm(GridImage(8, 6, 100.0 / 255.0), flat);
  const fs::path restored = scratch("flat_out.pgm");
  const Run d = run({"denoise", "--input", flat.string(), "--output", restored.string()});
  REQUIRE(d.code == 0);
  CHECK(slurp(flat) == slurp(restored));

  const fs::path clean = scratch("sq_clean.pgm");
  const fs::path noisy = scratch("sq_noisy.pgm");
  REQUIRE(run({"phantom", "--kind", "squares", "--size", "16x16", "--noise", "gaussian:0.1:2", "--clean",
               clean.string(), "--noisy", noisy.string()}).code == 0);
  const fs::path mask = scratch("mask.pgm");
  std::vector<std::uint8_t> flags(256, 0);
  for (int i = 0; i < 40; ++i) flags[100 + i] = 1;
  write_mask(InpaintMask(16, 16, flags), mask);

  const fs::path out1 = scratch("inpaint1.pgm");
  const fs::path out2 = scratch("inpaint2.pgm");
  const fs::path hist = scratch("hist.csv");
  const std::vector<std::string> common{"--input", noisy.string(), "--mask", mask.string(), "--delta-steps", "3"};
  auto a = common;
  a.insert(a.begin(), "inpaint");
  a.insert(a.end(), {"--output", out1.string(), "--history", hist.string()});
  auto b = common;
  b.insert(b.begin(), "inpaint");
  b.insert(b.end(), {"--output", out2.string()});
  REQUIRE(run(a).code == 0);
  REQUIRE(run(b).code == 0);
  CHECK(slurp(out1) == slurp(out2));
  CHECK(lines(slurp(hist)) == 4);

  const fs::path study = scratch("study.csv");
  const Run s = run({"study-continuation", "--input", noisy.string(), "--history", study.string(), "--fidelity", "rho",
                     "--delta-steps", "2"});
  CHECK(s.code == 0);
  CHECK(slurp(study).rfind("delta,energy,sup_change\n", 0) == 0);

  const Run nc = run({"denoise", "--input", noisy.string(), "--output", scratch("nc.pgm").string(), "--max-iters", "2"});
  CHECK(nc.code == cli::kNonConvergence);
  CHECK(nc.err.find("stage 0") != std::string::npos);

  const Run warn = run({"denoise", "--input", flat.string(), "--output", restored.string(), "--mu", "2.5"});
  CHECK(warn.code == 0);
  CHECK(warn.err.rfind("warning: ", 0) == 0);

  CHECK(run({"denoise", "--input", scratch("nope.pgm").string(), "--output", restored.string()}).code == cli::kIo);
  CHECK(run({"inpaint", "--input", noisy.string(), "--output", restored.string(), "--mask", flat.string()}).code ==
        cli::kUsage);
}

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dbnbeat/cli.hpp"
#include "dbnbeat/io.hpp"

using namespace dbnbeat;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome cli(std::vector<std::string> args) {
  args.insert(args.begin(), "dbnbeat");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

struct Scratch {
  fs::path dir;
  explicit Scratch(const std::string& name) : dir(fs::temp_directory_path() / name) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string file(const std::string& name, const std::string& content = "") const {
    const auto p = dir / name;
    if (!content.empty()) std::ofstream(p) << content;
    return p.string();
  }
};

std::string value_of(const std::string& out, const std::string& key) {
  std::istringstream in(out);
  for (std::string line; std::getline(in, line);)
    if (line.rfind(key + "=", 0) == 0) return line.substr(key.size() + 1);
  return {};
}

}  // namespace

TEST_CASE("synth writes record and truth") {
  Scratch s("dbnbeat_cli_synth");
  const auto spec = s.file("spec.txt", "duration_s=20\nseed=3\n");
  const auto r = cli({"synth", "--spec", spec, "--out", s.file("rec.txt"), "--truth", s.file("truth.txt")});
  REQUIRE(r.code == 0);
  CHECK(value_of(r.out, "beats") == "20");
  CHECK(read_record(s.file("rec.txt")).length() == 5000);
  CHECK(read_annotations(s.file("truth.txt"), 250).size() == 20);

  const auto again = cli({"synth", "--spec", spec, "--out", s.file("rec2.txt"), "--truth", s.file("truth2.txt")});
  REQUIRE(again.code == 0);
  CHECK(read_text(s.file("rec.txt")) == read_text(s.file("rec2.txt")));
  CHECK(read_text(s.file("truth.txt")) == read_text(s.file("truth2.txt")));
}

TEST_CASE("synth with a bad interval writes nothing") {
  Scratch s("dbnbeat_cli_badspec");
  const auto spec = s.file("spec.txt", "duration_s=20\necg_dropouts=15:5\n");
  const auto r = cli({"synth", "--spec", spec, "--out", s.file("rec.txt"), "--truth", s.file("truth.txt")});
  CHECK(r.code != 0);
  CHECK(r.err.find("error:") != std::string::npos);
  CHECK_FALSE(fs::exists(s.file("rec.txt")));
  CHECK_FALSE(fs::exists(s.file("truth.txt")));
  CHECK(std::distance(fs::directory_iterator(s.dir), fs::directory_iterator{}) == 1);
}

TEST_CASE("run on clean and dropout records") {
  Scratch s("dbnbeat_cli_run");
  const auto cfg = s.file("cfg.txt", "n_particles=1000\nthreads=2\n");

  SUBCASE("clean") {
    const auto spec = s.file("spec.txt", "duration_s=60\n");
    REQUIRE(cli({"synth", "--spec", spec, "--out", s.file("rec.txt"), "--truth", s.file("truth.txt")}).code == 0);
    const auto r = cli({"run", "--record", s.file("rec.txt"), "--config", cfg, "--out", s.file("beats.txt"),
                        "--trace", s.file("trace.csv")});
    REQUIRE(r.code == 0);
    CHECK(value_of(r.out, "windows") == "2500");
    CHECK(value_of(r.out, "degenerate_steps") == "0");
    const auto sc = cli({"score", "--ref", s.file("truth.txt"), "--test", s.file("beats.txt"), "--fs", "250"});
    REQUIRE(sc.code == 0);
    CHECK(std::stod(value_of(sc.out, "sensitivity")) >= 0.99);
    CHECK(fs::exists(s.file("trace.csv")));
  }

  SUBCASE("ECG dropout") {
    const auto spec = s.file("spec.txt", "duration_s=60\necg_dropouts=20:40\n");
    REQUIRE(cli({"synth", "--spec", spec, "--out", s.file("rec.txt"), "--truth", s.file("truth.txt")}).code == 0);
    REQUIRE(cli({"run", "--record", s.file("rec.txt"), "--config", cfg, "--out", s.file("beats.txt")}).code == 0);
    const auto beats = read_annotations(s.file("beats.txt"), 250);
    const auto inside = std::count_if(beats.sample_indices.begin(), beats.sample_indices.end(),
                                      [](auto i) { return i >= 20 * 250 && i < 40 * 250; });
    CHECK(inside >= 15);
  }

  SUBCASE("external annotations") {
    const auto spec = s.file("spec.txt", "duration_s=30\n");
    REQUIRE(cli({"synth", "--spec", spec, "--out", s.file("rec.txt"), "--truth", s.file("truth.txt")}).code == 0);
    REQUIRE(cli({"detect", "--record", s.file("rec.txt"), "--ecg-ann", s.file("e.txt"), "--abp-ann", s.file("a.txt")})
                .code == 0);
    const auto r = cli({"run", "--record", s.file("rec.txt"), "--config", cfg, "--out", s.file("beats.txt"),
                        "--ecg-ann", s.file("e.txt"), "--abp-ann", s.file("a.txt")});
    CHECK(r.code == 0);
  }
}

TEST_CASE("run reports the offending config key") {
  Scratch s("dbnbeat_cli_cfg");
  const auto rec = s.file("rec.txt", "fs=250\nECG,ABP\n0,80\n0,80\n");
  const auto r = cli({"run", "--record", rec, "--config", s.file("cfg.txt", "seed=\n"), "--out", s.file("b.txt")});
  CHECK(r.code != 0);
  CHECK(r.err.find("seed") != std::string::npos);
  CHECK_FALSE(fs::exists(s.file("b.txt")));

  CHECK(cli({"run", "--record", s.file("nope.txt"), "--out", s.file("b.txt")}).code != 0);
  CHECK(cli({"frobnicate"}).code != 0);
}

TEST_CASE("score") {
  Scratch s("dbnbeat_cli_score");
  const auto a = s.file("a.txt", "100\n200\n300\n");
  const auto b = s.file("b.txt", "100\n205\n400\n");
  const auto empty = s.file("empty.txt", "format=1\n");

  auto r = cli({"score", "--ref", a, "--test", a, "--fs", "250"});
  REQUIRE(r.code == 0);
  CHECK(value_of(r.out, "sensitivity") == "1");
  CHECK(value_of(r.out, "positive_predictivity") == "1");

  r = cli({"score", "--ref", a, "--test", empty, "--fs", "250"});
  CHECK(value_of(r.out, "sensitivity") == "0");
  CHECK(value_of(r.out, "positive_predictivity") == "1");

  r = cli({"score", "--ref", a, "--test", b, "--fs", "250", "--tol-ms", "150"});
  CHECK(value_of(r.out, "tp") == "2");
  CHECK(value_of(r.out, "fp") == "1");
  CHECK(value_of(r.out, "fn") == "1");

  r = cli({"score", "--ref", a, "--test", a, "--ref", a, "--test", empty, "--fs", "250"});
  REQUIRE(r.code == 0);
  CHECK(value_of(r.out, "records") == "2");
  CHECK(value_of(r.out, "mean_sensitivity") == "0.5");
  CHECK(value_of(r.out, "mean_positive_predictivity") == "1");

  CHECK(cli({"score", "--ref", a, "--test", s.file("bad.txt", "3\n2\n"), "--fs", "250"}).code != 0);
  CHECK(cli({"score", "--ref", a, "--ref", a, "--test", a, "--fs", "250"}).code != 0);
}

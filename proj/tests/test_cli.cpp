#include <cstdlib>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "rda/cli.hpp"
#include "rda/error.hpp"
#include "rda/image_io.hpp"
#include "rda/metrics.hpp"
#include "support.hpp"

using namespace rda;
namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args, const fs::path& log) {
  const char* exe = std::getenv("RDA_CLI");
  REQUIRE(exe != nullptr);
  const std::string command = std::string(exe) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("band parsing") {
  auto band = cli::parse_band("0.25:0.5");
  CHECK(band.lo == 0.25);
  CHECK(band.hi == 0.5);
  CHECK_THROWS_AS(cli::parse_band("0.5"), UsageError);
  CHECK_THROWS_AS(cli::parse_band("a:b"), UsageError);
  CHECK_THROWS_AS(cli::parse_band("0.6:0.2"), UsageError);
}

TEST_CASE("usage errors exit with code 2") {
  test::TempDir dir("cli_usage");
  CHECK(run_cli("", dir.path / "log") == cli::kExitUsage);
  CHECK(run_cli("frobnicate", dir.path / "log") == cli::kExitUsage);
  CHECK(run_cli("train --mode nope --data x --out y", dir.path / "log") == cli::kExitUsage);
  CHECK(run_cli("gen-data --out " + (dir.path / "d").string() + " --src-band 0.1:0.5",
                dir.path / "log") == cli::kExitUsage);
  CHECK(run_cli("attack --in a --ref b --out c", dir.path / "log") == cli::kExitUsage);
  CHECK(run_cli("--help", dir.path / "log") == cli::kExitOk);
}

TEST_CASE("runtime errors exit with code 1") {
  test::TempDir dir("cli_fail");
  CHECK(run_cli("decompose --in " + (dir.path / "missing.pgm").string() + " --out " +
                    (dir.path / "o").string(),
                dir.path / "log") == cli::kExitFailure);
  CHECK(slurp(dir.path / "log").find("error") != std::string::npos);
}

TEST_CASE("end-to-end pipeline") {
  test::TempDir dir("cli_e2e");
  const auto data = (dir.path / "data").string();
  REQUIRE(run_cli("gen-data --seed 3 --size 16 --per-class 4 --train-per-class 3 --out " + data,
                  dir.path / "log") == 0);
  CHECK(fs::exists(dir.path / "data" / "source_train" / "index.txt"));
  CHECK(slurp(dir.path / "log").find("wrote 56 images") != std::string::npos);

  SUBCASE("decompose reports an exact recomposition") {
    const auto image = (dir.path / "data" / "source_test" / "00000.fimg").string();
    REQUIRE(run_cli("decompose --in " + image + " --bands 4 --out " + (dir.path / "dec").string(),
                    dir.path / "log") == 0);
    auto report = slurp(dir.path / "dec" / "report.txt");
    CHECK(report.find("spectral_recomposition_exact yes") != std::string::npos);
    CHECK(fs::exists(dir.path / "dec" / "band_004.pgm"));
    CHECK(fs::exists(dir.path / "dec" / "band_001.fimg"));
  }

  SUBCASE("attack with a gate file") {
    const auto x = (dir.path / "data" / "source_test" / "00000.fimg").string();
    const auto ref = (dir.path / "data" / "target_test" / "00000.fimg").string();
    std::ofstream(dir.path / "gate.txt") << "1 0\n2 0\n3 0\n4 0\n";
    REQUIRE(run_cli("attack --in " + x + " --ref " + ref + " --bands 4 --gate-file " +
                        (dir.path / "gate.txt").string() + " --out " + (dir.path / "att").string(),
                    dir.path / "log") == 0);
    CHECK(io::read_fimg(dir.path / "att" / "x_faa_raw.fimg") == io::read_fimg(x));
    CHECK(slurp(dir.path / "att" / "gate.txt") == "1 0\n2 0\n3 0\n4 0\n");
    std::ofstream(dir.path / "bad.txt") << "0 1\n";
    CHECK(run_cli("attack --in " + x + " --ref " + ref + " --bands 4 --gate-file " +
                      (dir.path / "bad.txt").string() + " --out " + (dir.path / "att2").string(),
                  dir.path / "log") == cli::kExitFailure);
  }

  SUBCASE("random gates are seeded") {
    const auto x = (dir.path / "data" / "source_test" / "00001.fimg").string();
    const auto ref = (dir.path / "data" / "target_test" / "00002.fimg").string();
    for (const char* name : {"r1", "r2"}) {
      REQUIRE(run_cli("attack --in " + x + " --ref " + ref + " --bands 8 --gate-random 0.5 --seed 4 --out " +
                          (dir.path / name).string(),
                      dir.path / "log") == 0);
    }
    CHECK(slurp(dir.path / "r1" / "gate.txt") == slurp(dir.path / "r2" / "gate.txt"));
    CHECK(slurp(dir.path / "r1" / "x_faa_raw.fimg") == slurp(dir.path / "r2" / "x_faa_raw.fimg"));
  }

  SUBCASE("train is deterministic and curves plot every run") {
    const std::string common = " --data " + data +
                               " --hidden 8 --iters 40 --batch 4 --bands 4 --log-interval 10 "
                               "--pseudo-warmup 5 --seed 1 --out ";
    for (const char* name : {"faa", "faa_again"}) {
      REQUIRE(run_cli("train --mode faa" + common + (dir.path / name).string(), dir.path / "log") == 0);
    }
    REQUIRE(run_cli("train --mode baseline" + common + (dir.path / "baseline").string(),
                    dir.path / "log") == 0);
    CHECK(slurp(dir.path / "faa" / "metrics.csv") == slurp(dir.path / "faa_again" / "metrics.csv"));
    CHECK(slurp(dir.path / "faa" / "model.ckpt") == slurp(dir.path / "faa_again" / "model.ckpt"));
    CHECK(fs::exists(dir.path / "faa" / "gate.ckpt"));
    CHECK_FALSE(fs::exists(dir.path / "baseline" / "gate.ckpt"));
    CHECK(RunMetrics::load(dir.path / "faa" / "metrics.csv").rows().size() == 4);

    const auto svg_path = dir.path / "curves.svg";
    REQUIRE(run_cli("curves --metrics " + (dir.path / "baseline" / "metrics.csv").string() + " " +
                        (dir.path / "faa" / "metrics.csv").string() + " --out " + svg_path.string(),
                    dir.path / "log") == 0);
    auto svg = slurp(svg_path);
    std::size_t lines = 0;
    for (auto pos = svg.find("<polyline"); pos != std::string::npos; pos = svg.find("<polyline", pos + 1)) ++lines;
    CHECK(lines == 4);
    CHECK(svg.find(">baseline") != std::string::npos);
    CHECK(svg.find(">faa") != std::string::npos);
    CHECK(run_cli("curves --metrics " + (dir.path / "missing.csv").string() + " --out " + svg_path.string(),
                  dir.path / "log") == cli::kExitUsage);
  }
}

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "experiments.hpp"

using namespace qrec::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / ("qrec_cli_test_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int shell(const std::string& cmd) {
  const int status = std::system((cmd + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

int tool(const std::string& args) { return shell(std::string(QREC_TOOL_PATH) + " " + args); }

}  // namespace

TEST_CASE("registry exposes every subcommand") {
  std::vector<std::string> ids;
  for (const auto& e : experiments()) ids.push_back(e.id());
  const std::vector<std::string> want{"expsum.scan",      "poly.complexity", "orbit.build",   "orbit.certify",
                                      "system.increment", "system.sarkozy",  "system.bog",    "scan.quadform",
                                      "scan.bog",         "scan.bohr"};
  CHECK(ids == want);
  CHECK_THROWS_AS(find_experiment("scan.nothing"), UsageError);
}

TEST_CASE("config values are typed and unknown keys are rejected") {
  ExperimentConfig c = find_experiment("scan.quadform").config();
  c.set("L", "2000");
  c.set("density", "0.3");
  c.set("form", "xy-z2");
  c.set("seed", "7");
  CHECK(c.get_int("L") == 2000);
  CHECK(c.get_real("density") == doctest::Approx(0.3));
  CHECK(c.get_string("form") == "xy-z2");
  CHECK(c.seed() == 7);
  CHECK_THROWS_AS(c.set("bogus", "1"), UsageError);
  CHECK_THROWS_AS(c.set("L", "\"abc\""), UsageError);
  CHECK_THROWS_AS(c.set("density", "[1,2]"), UsageError);
}

TEST_CASE("config text round trips") {
  ExperimentConfig c = find_experiment("system.increment").config();
  c.set("moduli", "[12]");
  c.set("set", "[0, 2, 4, 6]");
  c.set("q", "2");
  c.set("delta", "0.5");
  ExperimentConfig back = find_experiment("system.increment").config();
  back.load_text(c.serialize());
  CHECK(back == c);
  CHECK(back.serialize() == c.serialize());
  ExperimentConfig wrong = find_experiment("scan.bohr").config();
  CHECK_THROWS_AS(wrong.load_text(c.serialize()), UsageError);
  ExperimentConfig commented = find_experiment("scan.bohr").config();
  commented.load_text("# control run\nL = 500\ntheta = golden  # default\n");
  CHECK(commented.get_int("L") == 500);
  CHECK(commented.get_string("theta") == "golden");
}

TEST_CASE("seeds are mandatory for randomized runs") {
  ExperimentConfig c = find_experiment("expsum.scan").config();
  c.set("qmax", "5");
  CHECK_THROWS_AS(run(c), UsageError);
  c.set("seed", "3");
  CHECK(run(c).verified);
}

TEST_CASE("identical config and seed give identical output") {
  ExperimentConfig c = find_experiment("scan.quadform").config();
  c.set("L", "300");
  c.set("seed", "11");
  for (Format f : {Format::Json, Format::Csv}) {
    std::ostringstream a, b;
    emit(run(c), f, a);
    emit(run(c), f, b);
    CHECK(a.str() == b.str());
    CHECK_FALSE(a.str().empty());
  }
}

TEST_CASE("csv layout") {
  ExperimentConfig c = find_experiment("expsum.scan").config();
  c.set("qmax", "4");
  c.set("seed", "1");
  std::ostringstream out;
  emit(run(c), Format::Csv, out);
  CHECK(out.str().rfind("q,worst_magnitude,q_prime\n", 0) == 0);
  ExperimentConfig cert = find_experiment("orbit.certify").config();
  std::ostringstream js;
  emit(run(cert), Format::Json, js);
  CHECK(js.str().find("\"invariantFactors\"") != std::string::npos);
  std::ostringstream bad;
  CHECK_THROWS_AS(emit(run(cert), Format::Csv, bad), UsageError);
}

TEST_CASE("exit codes") {
  const fs::path dir = scratch_dir();
  CHECK(tool("orbit certify --d 2 --depth 4") == 0);
  CHECK(tool("system sarkozy --moduli [12] --set [0,1,2,3] --family linear") == 0);
  CHECK(tool("scan quadform --L 100") == 1);
  CHECK(tool("scan quadform --L 100 --seed 1 --bogus 3") == 1);
  CHECK(tool("nothing") == 1);
  CHECK(tool("orbit certify --d 3 --depth 2") == 2);
  CHECK(tool("system sarkozy --moduli [12] --set [0,1,2,3] --family linear --k0 12") == 2);
  const fs::path cfg = dir / "linear.cfg";
  std::ofstream(cfg) << "experiment = \"system.sarkozy\"\nmoduli = [12]\nset = [0, 1, 2, 3]\nfamily = linear\n";
  CHECK(tool("system sarkozy --config " + cfg.string()) == 0);
  std::ofstream(dir / "bad.cfg") << "moduli = [12]\nunknown = 4\n";
  CHECK(tool("system sarkozy --config " + (dir / "bad.cfg").string()) == 1);
  fs::remove_all(dir);
}

TEST_CASE("output files are byte identical across runs and thread counts") {
  const fs::path dir = scratch_dir();
  const std::string args = "scan quadform --L 400 --density 0.3 --seed 7 --out ";
  CHECK(shell("TOOLKIT_THREADS=4 " + std::string(QREC_TOOL_PATH) + " " + args + (dir / "a.json").string()) == 0);
  CHECK(shell("TOOLKIT_THREADS=1 " + std::string(QREC_TOOL_PATH) + " " + args + (dir / "b.json").string()) == 0);
  CHECK(slurp(dir / "a.json") == slurp(dir / "b.json"));
  CHECK_FALSE(slurp(dir / "a.json").empty());
  fs::remove_all(dir);
}

#include <catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "topokit/io.hpp"
#include "topokit/pointcloud.hpp"

namespace fs = std::filesystem;
using namespace topokit;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() / ("topokit_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

// Runs the CLI in dir; stdout goes to dir/stdout.txt.
int run(const TempDir& dir, const std::string& args) {
  const std::string cmd = "cd '" + dir.path.string() + "' && '" TOPOKIT_CLI "' " + args + " > stdout.txt 2> stderr.txt";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

void write_square(const TempDir& d) { write_file(d / "square.csv", "0,0\n1,0\n1,1\n0,1\n"); }

}  // namespace

TEST_CASE("help and usage errors") {
  TempDir d;
  CHECK(run(d, "--help") == 0);
  CHECK(run(d, "persist --bogus") == 1);
  CHECK(run(d, "persist --generate circle --max-dim notanumber") == 1);
  CHECK(run(d, "distance --a x.json") == 1);
  CHECK(run(d, "gen --kind torus") == 1);
}

TEST_CASE("persist on the unit square") {
  TempDir d;
  write_square(d);
  REQUIRE(run(d, "persist --input square.csv --out-dir out") == 0);
  const json h1 = read_json_file(d / "out/diagram_dim1.json");
  CHECK(h1.at("dim") == 1);
  REQUIRE(h1.at("points").size() == 1);
  CHECK(h1.at("points")[0][0].get<double>() == 1.0);
  CHECK(h1.at("points")[0][1].get<double>() == Catch::Approx(std::sqrt(2.0)));
  CHECK(h1.at("config").at("input") == "square.csv");
  CHECK(h1.at("config").at("command") == "persist");
  const json h0 = read_json_file(d / "out/diagram_dim0.json");
  CHECK(h0.at("points").size() == 3);
  CHECK(fs::exists(d / "out/lifetimes.csv"));
  CHECK_FALSE(fs::exists(d / "out/diagram_dim2.json"));

  REQUIRE(run(d, "persist --input square.csv --essential --out-dir ess") == 0);
  const json e0 = read_json_file(d / "ess/diagram_dim0.json");
  CHECK(e0.at("points").size() == 4);
  CHECK(e0.at("points")[3][1] == "inf");
}

TEST_CASE("missing input is an I/O error and writes nothing") {
  TempDir d;
  CHECK(run(d, "persist --input nope.csv --out-dir out") == 2);
  CHECK_FALSE(fs::exists(d / "out/diagram_dim0.json"));
  CHECK_FALSE(fs::exists(d / "out/lifetimes.csv"));
  CHECK(run(d, "ingest --images nope.idx") == 2);
  CHECK(run(d, "distance --a nope.json --b nope.json") == 2);
  CHECK_FALSE(fs::exists(d / "distance.json"));
}

TEST_CASE("malformed inputs") {
  TempDir d;
  write_file(d / "ragged.csv", "0,0\n1\n");
  CHECK(run(d, "persist --input ragged.csv") == 2);
  write_file(d / "bad.idx", "xyz");
  CHECK(run(d, "ingest --images bad.idx") == 2);
  write_square(d);
  CHECK(run(d, "persist --input square.csv --max-dim 7") == 1);
  CHECK(run(d, "persist --input square.csv --max-radius -1") == 1);
}

TEST_CASE("distance subcommand") {
  TempDir d;
  write_file(d / "a.json", R"({"dim": 1, "points": [[0, 2]]})");
  write_file(d / "b.json", R"({"dim": 1, "points": [[0, 3]]})");
  write_file(d / "e.json", R"({"dim": 1, "points": []})");
  write_file(d / "h0.json", R"({"dim": 0, "points": [[0, 1]]})");

  REQUIRE(run(d, "distance --a a.json --b b.json") == 0);
  json out = json::parse(slurp(d / "stdout.txt"));
  CHECK(out.at("distance").get<double>() == Catch::Approx(1.0));
  CHECK(out.at("method") == "exact");
  CHECK(out.at("dim") == 1);
  const json file = read_json_file(d / "distance.json");
  CHECK(file.at("distance") == out.at("distance"));
  CHECK(file.at("config").at("method") == "exact");

  REQUIRE(run(d, "distance --a a.json --b e.json --method bottleneck") == 0);
  CHECK(json::parse(slurp(d / "stdout.txt")).at("distance").get<double>() == Catch::Approx(1.0));

  REQUIRE(run(d, "distance --a a.json --b b.json --method sinkhorn --alpha 0.005") == 0);
  out = json::parse(slurp(d / "stdout.txt"));
  CHECK(out.at("converged") == true);
  CHECK(std::abs(out.at("distance").get<double>() - 1.0) <= 0.05);

  CHECK(run(d, "distance --a a.json --b h0.json") == 1);
  CHECK(run(d, "distance --a a.json --b b.json --method magic") == 1);
}

TEST_CASE("config file values are used and flags override them") {
  TempDir d;
  write_square(d);
  write_file(d / "run.ini", "input=square.csv\nmax-dim=3\nbins=5\nout-dir=cfg\n");
  REQUIRE(run(d, "persist --config run.ini") == 0);
  CHECK(fs::exists(d / "cfg/diagram_dim2.json"));
  const json h1 = read_json_file(d / "cfg/diagram_dim1.json");
  CHECK(h1.at("config").at("max-dim") == "3");
  CHECK(h1.at("config").at("bins") == "5");

  REQUIRE(run(d, "persist --config run.ini --max-dim 2") == 0);
  CHECK(read_json_file(d / "cfg/diagram_dim1.json").at("config").at("max-dim") == "2");

  CHECK(run(d, "persist --config missing.ini") == 2);
}

TEST_CASE("generators and ingest") {
  TempDir d;
  REQUIRE(run(d, "gen --kind circle --n 20 --noise-sd 0.05 --seed 3") == 0);
  const auto c = read_cloud_csv(d / "cloud.csv");
  CHECK(c.size() == 20);
  CHECK(c.dim() == 2);
  CHECK(slurp(d / "cloud.csv").rfind("# config:", 0) == 0);

  REQUIRE(run(d, "gen --kind blob --n 15 --dim 4 --out blob.csv") == 0);
  CHECK(read_cloud_csv(d / "blob.csv").dim() == 4);

  REQUIRE(run(d, "gen --kind images --n 30 --out imgs.idx") == 0);
  REQUIRE(run(d, "ingest --images imgs.idx --n 25 --crop 10 --region corner --out corner.csv") == 0);
  const auto cc = read_cloud_csv(d / "corner.csv");
  CHECK(cc.size() == 25);
  CHECK(cc.dim() == 100);
  CHECK(run(d, "ingest --images imgs.idx --n 31") == 1);
  CHECK(run(d, "ingest --images imgs.idx --crop 29") == 1);
}

TEST_CASE("lifetimes subcommand") {
  TempDir d;
  write_file(d / "a.json", R"({"dim": 1, "points": [[0, 2], [1, 1.5], [0, "inf"]]})");
  REQUIRE(run(d, "lifetimes --input a.json --bins 4 --bin-width 0.5") == 0);
  const std::string csv = slurp(d / "lifetimes.csv");
  CHECK(csv.find("\n1,2,1,1.25,2,0.5,0;1;0;1\n") != std::string::npos);
  CHECK(slurp(d / "lifetimes_0_a.svg").find("<!-- config: {") != std::string::npos);
}

TEST_CASE("optimize writes a trajectory") {
  TempDir d;
  REQUIRE(run(d,
              "optimize --generate circle --n 20 --noise-sd 0.05 --functional total-persistence --direction maximize "
              "--hom-dim 1 --steps 10 --record-every 5 --snapshot-dir snaps") == 0);
  const std::string traj = slurp(d / "trajectory.csv");
  CHECK(traj.find("step,value\n0,") != std::string::npos);
  CHECK(traj.find("\n10,") != std::string::npos);
  CHECK(fs::exists(d / "final_cloud.csv"));
  CHECK(fs::exists(d / "value.svg"));
  CHECK(fs::exists(d / "snaps/step_000005.csv"));
  CHECK(run(d, "optimize --generate circle --functional wasserstein --hom-dim 1") == 1);
}

TEST_CASE("diverging optimization exits 3 and keeps the partial trajectory") {
  TempDir d;
  REQUIRE(run(d, "gen --kind circle --n 30 --out target.csv") == 0);
  REQUIRE(run(d, "persist --input target.csv --out-dir t") == 0);
  CHECK(run(d,
            "optimize --generate blob --n 30 --seed 2 --functional wasserstein --target t/diagram_dim1.json "
            "--hom-dim 1 --lr 1000 --steps 20") == 3);
  CHECK(slurp(d / "trajectory.csv").find("step,value\n0,") != std::string::npos);
}

TEST_CASE("identical invocations give identical bytes") {
  TempDir a, b;
  for (const TempDir* d : {&a, &b}) {
    REQUIRE(run(*d, "persist --generate disk-holes --n 80 --seed 4 --holes 0,0,0.4") == 0);
    REQUIRE(run(*d, "exp2 --n 20 --repeats 2 --synthetic-count 60 --seed 9") == 0);
  }
  for (const char* f : {"diagram_dim0.json", "diagram_dim1.json", "lifetimes.csv", "exp2_report.json", "exp2_summary.csv"}) {
    INFO(f);
    CHECK(slurp(a / f) == slurp(b / f));
  }
}

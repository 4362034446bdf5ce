#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("psskit_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(const std::string& args) const {
    const std::string cmd = std::string(PSSKIT_BIN) + " " + args + " --out " + dir_.string() + " >" +
                            (dir_ / "stdout.txt").string() + " 2>" + (dir_ / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }
  json report(const std::string& command) const {
    std::ifstream in(dir_ / (command + ".json"));
    return json::parse(in);
  }
  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(dir_ / name) << text;
    return dir_ / name;
  }
  std::string slurp(const std::string& name) const {
    std::ifstream in(dir_ / name);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, VerifyNamedFamilies) {
  for (const char* f : {"t22-default", "t23-default-minus", "t24-default", "t25i-default", "t25ii-default-minus", "sg-default"}) {
    ASSERT_EQ(run(std::string("verify --family ") + f), 0) << f << slurp("stderr.txt");
    const json r = report("verify");
    EXPECT_TRUE(r["pass"].get<bool>());
    EXPECT_EQ(r["command"], "verify");
    EXPECT_TRUE(r.contains("timestamp"));
  }
}

TEST_F(Cli, LemmaAndMatcher) {
  EXPECT_EQ(run("lemma21 --family t24-default --delta 1"), 0);
  EXPECT_EQ(run("match-ch"), 0) << slurp("stderr.txt");
  EXPECT_TRUE(report("match-ch")["result"]["verify_pss"].get<bool>());
  EXPECT_EQ(run("match-ch --ansatz t23"), 2);
}

TEST_F(Cli, ImmerseWritesTheTable) {
  ASSERT_EQ(run("immerse --case P35i"), 0) << slurp("stderr.txt");
  EXPECT_EQ(slurp("sff.csv").rfind("xi,a,b,c,gauss_residual\n", 0), 0u);
  ASSERT_EQ(run("immerse --case P35ii --mu2 1"), 0) << slurp("stderr.txt");
  EXPECT_LE(report("immerse")["result"]["max_relation_residual"].get<double>(), 1e-8);
}

TEST_F(Cli, CertifySweep) {
  for (const char* k : {"t23", "t25i", "t25ii"}) {
    ASSERT_EQ(run(std::string("certify --kind ") + k + " --sweep 100"), 0) << k << slurp("stderr.txt");
  }
}

TEST_F(Cli, ReconstructExportsMeshes) {
  ASSERT_EQ(run("reconstruct --nx 11 --nt 11"), 0) << slurp("stderr.txt");
  EXPECT_TRUE(fs::exists(dir_ / "mesh.obj"));
  EXPECT_TRUE(fs::exists(dir_ / "mesh.csv"));
  // a constant form violating Gauss is a run failure, not a usage error
  EXPECT_EQ(run("reconstruct --nx 3 --nt 3 --sff constant --sff_a 1 --sff_b 0 --sff_c 1"), 1);
}

TEST_F(Cli, ConfigFilesAndPrecedence) {
  const fs::path toml = write("cfg.toml", "family = \"t22-default\"\nseed = 7\n");
  ASSERT_EQ(run("verify --config " + toml.string()), 0) << slurp("stderr.txt");
  EXPECT_EQ(report("verify")["seed"], 7);
  ASSERT_EQ(run("verify --config " + toml.string() + " --seed 9"), 0);
  EXPECT_EQ(report("verify")["seed"], 9);
  const fs::path js = write("cfg.json", R"({"family": "t24-default"})");
  EXPECT_EQ(run("verify --config " + js.string()), 0);
}

TEST_F(Cli, ReportReproducesTheRun) {
  ASSERT_EQ(run("immerse --case P37ii --C1 0.5"), 0);
  const json first = report("immerse");
  fs::copy_file(dir_ / "immerse.json", dir_ / "first.json");
  ASSERT_EQ(run("immerse --config " + (dir_ / "first.json").string()), 0) << slurp("stderr.txt");
  json second = report("immerse");
  json a = first, b = second;
  a.erase("timestamp");
  b.erase("timestamp");
  EXPECT_EQ(a, b);
}

TEST_F(Cli, ExitCodes) {
  // an unknown family name is read as a path
  EXPECT_EQ(run("verify --family nope"), 3);
  EXPECT_EQ(run("verify --family " + write("bad_family.json", R"({"kind": "T26"})").string()), 2);
  EXPECT_EQ(run("verify --bogus 1"), 2);
  EXPECT_EQ(run("verify --config " + write("bad.toml", "family = [").string()), 2);
  EXPECT_EQ(run("verify --config " + write("extra.toml", "colour = 1\n").string()), 2);
  EXPECT_EQ(run("verify --config /nonexistent/cfg.toml"), 3);
  EXPECT_EQ(run("immerse --case P35i --alpha 1 --beta 1"), 2);
}

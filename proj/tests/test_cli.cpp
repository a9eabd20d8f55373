#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

const fs::path& workdir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("ehcp_cli_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run(const std::string& args, const std::string& log = "log.txt") {
  const std::string cmd = std::string(EHCP_CLI_PATH) + " " + args + " > " + (workdir() / log).string() + " 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string w(const std::string& name) { return (workdir() / name).string(); }

}  // namespace

TEST(Cli, PipelineIsDeterministic) {
  ASSERT_EQ(run("synth --out " + w("raw") + " --games 2 --plays 12 --seed 3"), 0) << slurp(workdir() / "log.txt");
  ASSERT_EQ(run("ingest --tracking " + w("raw/tracking.csv") + " --plays " + w("raw/plays.csv") + " --out " + w("data")), 0)
      << slurp(workdir() / "log.txt");
  for (const char* out : {"m1.json", "m2.json"}) {
    ASSERT_EQ(run("train --data " + w("data") + " --trees 10 --draws 30 --burnin 30 --out " + w(out)), 0)
        << slurp(workdir() / "log.txt");
  }
  EXPECT_EQ(slurp(workdir() / "m1.json"), slurp(workdir() / "m2.json"));

  const auto plays = slurp(workdir() / "data/plays.csv");
  std::istringstream in(plays);
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  const auto c1 = first.find(','), c2 = first.find(',', c1 + 1);
  const std::string sel = " --game " + first.substr(0, c1) + " --play " + first.substr(c1 + 1, c2 - c1 - 1);
  for (const char* out : {"p1.json", "p2.json"}) {
    ASSERT_EQ(run("play --model " + w("m1.json") + " --data " + w("data") + sel + " --imputations 20 --json " + w(out)), 0)
        << slurp(workdir() / "log.txt");
  }
  const auto p1 = slurp(workdir() / "p1.json");
  EXPECT_EQ(p1, slurp(workdir() / "p2.json"));
  const auto j = nlohmann::json::parse(p1);
  EXPECT_FALSE(j["receivers"].empty());
  EXPECT_EQ(j["imputations"], 20);
}

TEST(Cli, ErrorsExitNonZeroWithAMessage) {
  EXPECT_NE(run("train --data " + w("does-not-exist") + " --out " + w("x.json"), "err.txt"), 0);
  EXPECT_NE(slurp(workdir() / "err.txt").find("error"), std::string::npos);
  EXPECT_NE(run("frobnicate", "err2.txt"), 0);
}

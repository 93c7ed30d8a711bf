// Copyright the phred authors.
// SPDX-License-Identifier: Apache-2.0

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <gtest/gtest.h>
#include <sys/wait.h>
#include "phred/io.hpp"

namespace phred
{
namespace
{

namespace fs = std::filesystem;

class CliTest : public ::testing::Test
{
protected:
  void SetUp() override
  {
    dir_ = fs::temp_directory_path() /
           ("phred_cli_" +
            std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int Run(const std::string &args)
  {
    const std::string cmd = std::string(PHRED_CLI) + " --quiet " + args + " >" +
                            (dir_ / "stdout").string() + " 2>" + (dir_ / "stderr").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  static std::string ReadText(const fs::path &path)
  {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  std::string P(const std::string &rel) const { return (dir_ / rel).string(); }

  fs::path dir_;
};

TEST_F(CliTest, GenerateBenchmarkAndRegenerateIdentically)
{
  ASSERT_EQ(Run("generate --masses 50 --inputs 2 --out " + P("a")), 0);
  ASSERT_EQ(Run("generate --masses 50 --inputs 2 --out " + P("b")), 0);
  const PHSystem sys = io::ReadSystem(dir_ / "a");
  EXPECT_EQ(sys.n(), 100);
  EXPECT_EQ(sys.m(), 2);
  for (const char *f : {"J.mtx", "R.mtx", "Q.mtx", "B.mtx", "system.meta"})
  {
    EXPECT_EQ(ReadText(dir_ / "a" / f), ReadText(dir_ / "b" / f));
  }
}

TEST_F(CliTest, OddOrderIsUsageError)
{
  ASSERT_EQ(Run("generate --masses 3 --inputs 1 --out " + P("sys")), 0);
  EXPECT_EQ(Run("reduce --system " + P("sys") + " --r 3 --out " + P("run")), 1);
  EXPECT_NE(ReadText(dir_ / "stderr").find("even"), std::string::npos);
}

TEST_F(CliTest, UnknownFlagAndMissingSystem)
{
  EXPECT_EQ(Run("reduce --bogus"), 1);
  EXPECT_EQ(Run("reduce --system " + P("nope") + " --out " + P("run")), 1);
  EXPECT_NE(ReadText(dir_ / "stderr").find("nope"), std::string::npos);
}

TEST_F(CliTest, ReduceWritesArtifacts)
{
  ASSERT_EQ(Run("generate --masses 6 --inputs 2 --out " + P("sys")), 0);
  ASSERT_EQ(Run("reduce --system " + P("sys") + " --r 4 --n-grid 300 --out " + P("run")), 0);
  for (const char *f : {"report.json", "report.csv", "samples.csv", "response.csv",
                        "fom_response.csv", "rom_response.csv", "rom/system.meta"})
  {
    EXPECT_TRUE(fs::exists(dir_ / "run" / f)) << f;
  }
  EXPECT_EQ(io::ReadSystem(dir_ / "run" / "rom").n(), 4);
  EXPECT_TRUE(fs::exists(dir_ / "run" / "levels" / "level_00_error.csv"));
}

TEST_F(CliTest, FixedSamplesVariant)
{
  ASSERT_EQ(Run("generate --masses 6 --inputs 2 --out " + P("sys")), 0);
  ASSERT_EQ(Run("reduce --system " + P("sys") +
                " --r 2 --fixed-samples 50 --n-grid 200 --max-bisect 3 --out " + P("run")),
            0);
  EXPECT_EQ(io::ReadSamplesCsv(dir_ / "run" / "samples.csv").size(), 50u);
}

TEST_F(CliTest, GrowthCapExitCode)
{
  ASSERT_EQ(Run("generate --masses 6 --inputs 2 --out " + P("sys")), 0);
  EXPECT_EQ(Run("reduce --system " + P("sys") +
                " --r 2 --gamma-max 0.005 --max-samples 20 --n-grid 200 --out " + P("run")),
            2);
  EXPECT_TRUE(fs::exists(dir_ / "run" / "report.json"));
}

TEST_F(CliTest, ConfigFileOverriddenByFlags)
{
  ASSERT_EQ(Run("generate --masses 6 --inputs 2 --out " + P("sys")), 0);
  std::ofstream(dir_ / "cfg.ini") << "[reduce]\nmax-bisect=1\nr=4\n";
  ASSERT_EQ(Run("--config " + P("cfg.ini") + " reduce --system " + P("sys") +
                " --r 2 --n-grid 200 --out " + P("run")),
            0);
  EXPECT_EQ(io::ReadSystem(dir_ / "run" / "rom").n(), 2);
  EXPECT_EQ(io::ReadCsvHeader(dir_ / "run" / "report.csv").size(), 5u);
  std::ifstream csv(dir_ / "run" / "report.csv");
  std::string line;
  int rows = -1;
  while (std::getline(csv, line))
  {
    rows++;
  }
  EXPECT_EQ(rows, 1);
}

TEST_F(CliTest, CompareSingleOrderAndDeterminism)
{
  const std::string args = "compare --masses 6 --inputs 2 --r 2 --repeats 1 --n-verify 2000 "
                           "--n-grid 200 --fixed-samples 100 --out ";
  ASSERT_EQ(Run(args + P("c1")), 0);
  ASSERT_EQ(Run(args + P("c2")), 0);
  auto non_timing = [](const std::string &text) {
    // Keep r, n_samples_final, hinf_adaptive, hinf_fixed.
    std::stringstream in(text), out;
    std::string line;
    while (std::getline(in, line))
    {
      std::stringstream ls(line);
      std::string col;
      for (int k = 0; std::getline(ls, col, ','); k++)
      {
        if (k == 0 || k >= 4)
        {
          out << col << ',';
        }
      }
      out << '\n';
    }
    return out.str();
  };
  const std::string a = ReadText(dir_ / "c1" / "comparison.csv");
  EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 2);
  EXPECT_EQ(non_timing(a), non_timing(ReadText(dir_ / "c2" / "comparison.csv")));
  EXPECT_TRUE(fs::exists(dir_ / "c1" / "runs" / "2" / "adaptive" / "report.json"));
  EXPECT_TRUE(fs::exists(dir_ / "c1" / "runs" / "2" / "fixed" / "samples.csv"));
}

TEST_F(CliTest, EvalDumpsResponse)
{
  ASSERT_EQ(Run("generate --masses 4 --inputs 1 --out " + P("sys")), 0);
  ASSERT_EQ(Run("eval --system " + P("sys") + " --n-grid 50 --entries --out " + P("h.csv")), 0);
  EXPECT_EQ(io::ReadCsvHeader(dir_ / "h.csv"),
            (std::vector<std::string>{"omega", "sigma_max", "re_11", "im_11"}));
  ASSERT_EQ(Run("eval --system " + P("sys") + " --against " + P("sys") + " --n-grid 50 --out " +
                P("e.csv")),
            0);
  std::ifstream in(dir_ / "e.csv");
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line))
  {
    EXPECT_EQ(line.substr(line.find(',') + 1), "0");
  }
}

}  // namespace
}  // namespace phred

// Copyright 2026 The dpn-toolkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// End-to-end runs of the command-line tool.

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "dpn/report_io.hpp"

namespace dpn {
namespace {

namespace fs = std::filesystem;

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("dpn_cli_test_" + std::string(::testing::UnitTest::GetInstance()
                                               ->current_test_info()
                                               ->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    write_text_file(dir_ / "small.cfg",
                    "epochs = 4\ncycle_length = 2\neta0 = 0.005\nbatch_size = 32\n"
                    "hidden_width = 16\n");
  }
  void TearDown() override { fs::remove_all(dir_); }

  // Runs the tool with arguments (paths relative to the test directory) and
  // returns its exit status; output is captured in log.txt.
  int run(const std::string& args) {
    const std::string cmd = "cd '" + dir_.string() + "' && '" DPN_CLI_PATH "' " + args +
                            " > log.txt 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }
  std::string log() const { return read_text_file(dir_ / "log.txt"); }
  RunManifest manifest(const std::string& out) const {
    return RunManifest::from_json(read_text_file(dir_ / out / "manifest.json"));
  }

  fs::path dir_;
};

TEST_F(Cli, EndToEndPipeline) {
  ASSERT_EQ(run("gen-data --seed 3 --out data"), 0) << log();
  ASSERT_EQ(run("train --data data --config small.cfg --model pn-rkl --out model"), 0) << log();
  ASSERT_EQ(run("attack --checkpoint model/model.ckpt --data data --attack mim --eps 0.3 "
                "--steps 5 --out attack"),
            0)
      << log();
  ASSERT_EQ(run("evaluate --checkpoint model/model.ckpt --data data --attacks attack "
                "--measure mutual_information --measure alpha0 --out report"),
            0)
      << log();
  const auto m = manifest("report");
  EXPECT_EQ(m.command, "evaluate");
  EXPECT_EQ(m.artifacts.at("report.csv"), sha256_file(dir_ / "report" / "report.csv"));
  const std::string csv = read_text_file(dir_ / "report" / "report.csv");
  EXPECT_NE(csv.find("mutual_information,all,600,600,"), std::string::npos) << csv;
  EXPECT_NE(csv.find("alpha0,all,"), std::string::npos) << csv;
}

TEST_F(Cli, EveryAttackAndModelKind) {
  ASSERT_EQ(run("gen-data --seed 4 --out data"), 0) << log();
  for (const std::string model : {"dnn", "pn-kl"}) {
    ASSERT_EQ(run("train --data data --config small.cfg --model " + model + " --out " + model), 0)
        << log();
  }
  for (const std::string attack : {"fgsm", "fgm --norm 2", "bim", "soft --soft-c 0.5"}) {
    fs::remove_all(dir_ / "a");
    EXPECT_EQ(run("attack --checkpoint dnn/model.ckpt --data data --split valid --attack " +
                  attack + " --eps 0.1 --out a"),
              0)
        << attack << ": " << log();
  }
  EXPECT_EQ(run("attack --checkpoint pn-kl/model.ckpt --data data --attack mim --loss rkl "
                "--out rkl"),
            0)
      << log();
}

TEST_F(Cli, UnknownConfigKeyIsAUsageError) {
  ASSERT_EQ(run("gen-data --out data"), 0) << log();
  write_text_file(dir_ / "bad.cfg", "eta0 = 1e-3\nlearning_rate = 3\n");
  EXPECT_EQ(run("train --data data --config bad.cfg --model dnn --out model"), 2);
  EXPECT_NE(log().find("learning_rate"), std::string::npos) << log();
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run("gen-data --out data --bogus 1"), 2);
  EXPECT_EQ(run("train --data . --model svm --out m"), 2);
  EXPECT_EQ(run("train --data missing --model dnn --out m"), 2);
}

TEST_F(Cli, RuntimeErrorsExitOne) {
  fs::create_directories(dir_ / "empty");
  EXPECT_EQ(run("train --data empty --model dnn --out m"), 1);
  EXPECT_FALSE(log().empty());
}

TEST_F(Cli, TrainingIsReproducible) {
  ASSERT_EQ(run("gen-data --out data"), 0) << log();
  ASSERT_EQ(run("train --data data --config small.cfg --model pn-rkl --seed 7 --out a"), 0)
      << log();
  ASSERT_EQ(run("train --data data --config small.cfg --model pn-rkl --seed 7 --out b"), 0)
      << log();
  EXPECT_EQ(sha256_file(dir_ / "a" / "model.ckpt"), sha256_file(dir_ / "b" / "model.ckpt"));
  EXPECT_EQ(manifest("a").artifacts, manifest("b").artifacts);
  ASSERT_EQ(run("train --data data --config small.cfg --model pn-rkl --seed 8 --out c"), 0);
  EXPECT_NE(sha256_file(dir_ / "a" / "model.ckpt"), sha256_file(dir_ / "c" / "model.ckpt"));
}

TEST_F(Cli, ReplayReproducesEveryDigest) {
  ASSERT_EQ(run("gen-data --seed 5 --out data"), 0) << log();
  ASSERT_EQ(run("train --data data --config small.cfg --model dnn --out m1"), 0) << log();
  ASSERT_EQ(run("attack --checkpoint m1/model.ckpt --data data --attack bim --eps 0.2 --out a1"),
            0)
      << log();
  ASSERT_EQ(run("gen-data --replay data/manifest.json --out data2"), 0) << log();
  ASSERT_EQ(run("train --replay m1/manifest.json --out m2"), 0) << log();
  ASSERT_EQ(run("attack --replay a1/manifest.json --out a2"), 0) << log();
  EXPECT_EQ(manifest("data").artifacts, manifest("data2").artifacts);
  EXPECT_EQ(manifest("m1").artifacts, manifest("m2").artifacts);
  EXPECT_EQ(manifest("a1").artifacts, manifest("a2").artifacts);
  EXPECT_EQ(run("train --replay a1/manifest.json --out m3"), 2);
}

TEST_F(Cli, OutputDirectoryLock) {
  ASSERT_EQ(run("gen-data --out data"), 0) << log();
  DirectoryLock held(dir_ / "busy");
  EXPECT_EQ(run("gen-data --out busy"), 1);
  EXPECT_NE(log().find("in use"), std::string::npos) << log();
}

}  // namespace
}  // namespace dpn

// Copyright 2026 The pbsmt Authors
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

#include <sys/wait.h>

#include <cstdlib>
#include <string>

#include "doctest.h"
#include "pbsmt/config.hpp"
#include "pbsmt/synthetic.hpp"
#include "test_util.hpp"

using pbsmt::testing::read_file;
using pbsmt::testing::TempDir;
using pbsmt::testing::write_file;

namespace {

const std::filesystem::path kData = PBSMT_TEST_DATA_DIR;

struct RunResult {
  int code;
  std::string out;
  std::string err;
};

std::string quote(const std::string& s) { return "'" + s + "'"; }

RunResult run(const TempDir& dir, const std::string& args) {
  const auto out = dir / "stdout.txt";
  const auto err = dir / "stderr.txt";
  const std::string cmd = quote(PBSMT_CLI_PATH) + " " + args + " >" + quote(out.string()) +
                          " 2>" + quote(err.string());
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, read_file(out), read_file(err)};
}

std::string path_arg(const std::filesystem::path& p) { return quote(p.string()); }

}  // namespace

TEST_CASE("cli bleu of a file against itself") {
  TempDir dir;
  write_file(dir / "h.txt", "the cat sat on the mat\na b c d\n");
  const auto r = run(dir, "bleu --hyp " + path_arg(dir / "h.txt") + " --ref " +
                              path_arg(dir / "h.txt"));
  CHECK(r.code == 0);
  CHECK(r.out == "100.00\n");
}

TEST_CASE("cli analyze-lengths on the example pairs") {
  TempDir dir;
  const auto r = run(dir, "analyze-lengths --src " + path_arg(kData / "example_pairs.fa") +
                              " --tgt " + path_arg(kData / "example_pairs.hi"));
  CHECK(r.code == 0);
  CHECK(r.out ==
        "category,count,percent\n0,1,16.67\n1-3,3,50.00\n4-5,2,33.33\n>=6,0,0.00\n<3,4,66.67\n");
}

TEST_CASE("cli exit codes") {
  TempDir dir;
  auto r = run(dir, "bleu --hyp " + path_arg(dir / "missing.txt") + " --ref " +
                        path_arg(dir / "missing.txt"));
  CHECK(r.code == 2);
  CHECK(r.err.rfind("pbsmt: error: io: ", 0) == 0);

  write_file(dir / "a.txt", "a b\n");
  write_file(dir / "b.txt", "a b\nc d\n");
  r = run(dir, "bleu --hyp " + path_arg(dir / "a.txt") + " --ref " + path_arg(dir / "b.txt"));
  CHECK(r.code == 3);
  CHECK(r.err.rfind("pbsmt: error: validation: ", 0) == 0);

  r = run(dir, "bleu --ref " + path_arg(dir / "b.txt"));
  CHECK(r.code == 3);
  CHECK(r.err.find("missing required setting --hyp") != std::string::npos);

  r = run(dir, "crossval --variant all --src " + path_arg(dir / "a.txt") + " --tgt " +
                   path_arg(dir / "a.txt"));
  CHECK(r.code == 3);

  write_file(dir / "bad.conf", "[lm]\ncolour = 1\n");
  r = run(dir, "bleu --config " + path_arg(dir / "bad.conf"));
  CHECK(r.code == 3);
  CHECK(r.err.find("line 2") != std::string::npos);

  r = run(dir, "frobnicate");
  CHECK(r.code == 3);
  r = run(dir, "bleu --no-such-flag 1");
  CHECK(r.code == 3);
}

TEST_CASE("cli help lists every setting") {
  TempDir dir;
  const auto r = run(dir, "--help");
  CHECK(r.code == 0);
  for (const auto& spec : pbsmt::option_specs()) {
    CHECK_MESSAGE(r.out.find("--" + spec.flag()) != std::string::npos, spec.flag());
  }
  CHECK(r.out.find("experiment") != std::string::npos);
}

TEST_CASE("cli config file with flag override") {
  TempDir dir;
  write_file(dir / "h.txt", "a b c d\n");
  write_file(dir / "r.txt", "a b c e\n");
  write_file(dir / "run.conf", "hyp = " + (dir / "r.txt").string() + "\nref = " +
                                   (dir / "r.txt").string() + "\n");
  auto r = run(dir, "bleu --config " + path_arg(dir / "run.conf"));
  CHECK(r.out == "100.00\n");
  r = run(dir, "bleu --config " + path_arg(dir / "run.conf") + " --hyp " + path_arg(dir / "h.txt"));
  CHECK(r.out == "59.46\n");
}

TEST_CASE("cli pipeline end to end is reproducible") {
  TempDir dir;
  pbsmt::ToyOptions opts;
  opts.vocab_size = 25;
  opts.minimal_pairs = 3;
  const auto lang = pbsmt::ToyLanguage::generate(opts);
  pbsmt::write_parallel(lang.corpus(200, 1), dir / "train.src", dir / "train.tgt");
  pbsmt::write_parallel(lang.corpus(20, 2), dir / "test.src", dir / "test.tgt");

  const std::string train = " --src " + path_arg(dir / "train.src") + " --tgt " +
                            path_arg(dir / "train.tgt");
  REQUIRE(run(dir, "align" + train + " --alignment " + path_arg(dir / "a.txt") + " --ttable " +
                       path_arg(dir / "t.txt") + " --rttable " + path_arg(dir / "rt.txt"))
              .code == 0);
  REQUIRE(run(dir, "extract-phrases" + train + " --alignment " + path_arg(dir / "a.txt") +
                       " --ttable " + path_arg(dir / "t.txt") + " --rttable " +
                       path_arg(dir / "rt.txt") + " --phrase-table " + path_arg(dir / "pt.txt"))
              .code == 0);
  REQUIRE(run(dir, "train-lm --lm-order 3 --lm-text " + path_arg(dir / "train.tgt") + " --lm " +
                       path_arg(dir / "lm.arpa"))
              .code == 0);
  const std::string translate = "translate --phrase-table " + path_arg(dir / "pt.txt") +
                                " --lm " + path_arg(dir / "lm.arpa") + " --input " +
                                path_arg(dir / "test.src");
  REQUIRE(run(dir, translate + " --output " + path_arg(dir / "out1.txt")).code == 0);
  REQUIRE(run(dir, translate + " --output " + path_arg(dir / "out2.txt") + " --nbest " +
                       path_arg(dir / "nbest.txt") + " --nbest-size 3")
              .code == 0);
  CHECK(read_file(dir / "out1.txt") == read_file(dir / "out2.txt"));
  CHECK_FALSE(read_file(dir / "nbest.txt").empty());
  const auto r = run(dir, "bleu --hyp " + path_arg(dir / "out1.txt") + " --ref " +
                              path_arg(dir / "test.tgt"));
  CHECK(r.code == 0);
  CHECK(std::stod(r.out) > 50.0);

  const auto pt = read_file(dir / "pt.txt");
  REQUIRE(run(dir, "extract-phrases" + train + " --alignment " + path_arg(dir / "a.txt") +
                       " --ttable " + path_arg(dir / "t.txt") + " --rttable " +
                       path_arg(dir / "rt.txt") + " --phrase-table " + path_arg(dir / "pt.txt"))
              .code == 0);
  CHECK(read_file(dir / "pt.txt") == pt);
}

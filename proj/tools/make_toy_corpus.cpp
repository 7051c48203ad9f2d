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

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "pbsmt/corpus.hpp"
#include "pbsmt/error.hpp"
#include "pbsmt/synthetic.hpp"
#include "pbsmt/text.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Writes a synthetic dictionary-substitution language pair", "make_toy_corpus"};
  pbsmt::ToyOptions options;
  std::size_t train = 5000;
  std::size_t test = 500;
  std::filesystem::path out_dir = ".";
  app.add_option("--vocab", options.vocab_size, "Words per side")->capture_default_str();
  app.add_option("--minimal-pairs", options.minimal_pairs,
                 "Source word pairs merged by the lossy romanization")
      ->capture_default_str();
  app.add_option("--min-length", options.min_length)->capture_default_str();
  app.add_option("--max-length", options.max_length)->capture_default_str();
  app.add_option("--train", train, "Training sentences")->capture_default_str();
  app.add_option("--test", test, "Test sentences")->capture_default_str();
  app.add_option("--seed", options.seed)->capture_default_str();
  app.add_option("--out-dir", out_dir)->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  try {
    const auto lang = pbsmt::ToyLanguage::generate(options);
    std::filesystem::create_directories(out_dir);
    pbsmt::write_parallel(lang.corpus(train, options.seed + 1), out_dir / "train.src",
                          out_dir / "train.tgt");
    pbsmt::write_parallel(lang.corpus(test, options.seed + 2), out_dir / "test.src",
                          out_dir / "test.tgt");
    std::ofstream translit = pbsmt::open_output(out_dir / "translit.tsv");
    const auto romanization = pbsmt::ToyLanguage::lossy_romanization();
    for (const auto& [g, r] : romanization.entries()) {
      translit << g << '\t' << r << '\n';
    }
  } catch (const pbsmt::Error& e) {
    std::cerr << "make_toy_corpus: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

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

#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pbsmt/alignment.hpp"
#include "pbsmt/bleu.hpp"
#include "pbsmt/bpe.hpp"
#include "pbsmt/config.hpp"
#include "pbsmt/corpus.hpp"
#include "pbsmt/decoder.hpp"
#include "pbsmt/error.hpp"
#include "pbsmt/experiment.hpp"
#include "pbsmt/ngram_lm.hpp"
#include "pbsmt/phrase_table.hpp"
#include "pbsmt/tuning.hpp"

namespace {

using pbsmt::PipelineConfig;

void log(const std::string& message) { std::cerr << "pbsmt: " << message << '\n'; }

pbsmt::Corpus read_corpus(const PipelineConfig& cfg) {
  return pbsmt::read_parallel(cfg.input_path("general.src"), cfg.input_path("general.tgt"));
}

void write_corpus(const pbsmt::Corpus& corpus, const PipelineConfig& cfg) {
  pbsmt::write_parallel(corpus, cfg.output_path("general.out-src"),
                        cfg.output_path("general.out-tgt"));
}

void write_scores(const pbsmt::Corpus& corpus, const std::filesystem::path& path) {
  std::vector<std::string> lines;
  for (const auto& p : corpus.pairs) lines.push_back(pbsmt::format_double(p.similarity.value_or(0.0)));
  pbsmt::write_lines(path, lines);
}

// Runs `fn` with stdout or the named file as destination.
void with_output(const PipelineConfig& cfg, const char* key,
                 const std::function<void(std::ostream&)>& fn) {
  if (const auto path = cfg.get(key)) {
    std::ofstream out = pbsmt::open_output(*path);
    fn(out);
  } else {
    fn(std::cout);
  }
}

int run_preprocess(const PipelineConfig& cfg) {
  const auto src = pbsmt::read_lines(cfg.input_path("general.src"));
  const auto tgt = pbsmt::read_lines(cfg.input_path("general.tgt"));
  if (src.size() != tgt.size()) {
    throw pbsmt::SizeError("source has " + std::to_string(src.size()) + " lines, target has " +
                           std::to_string(tgt.size()));
  }
  std::vector<double> scores;
  if (const auto path = cfg.optional_input_path("general.scores")) {
    scores = pbsmt::read_scores(*path);
    if (scores.size() != src.size()) {
      throw pbsmt::SizeError("scores file has " + std::to_string(scores.size()) +
                             " lines, corpus has " + std::to_string(src.size()));
    }
  }
  const auto rules = cfg.has("general.cleaning-rules")
                         ? pbsmt::CleaningRules::load(cfg.input_path("general.cleaning-rules"))
                         : pbsmt::CleaningRules::defaults();
  pbsmt::Corpus cleaned;
  for (std::size_t i = 0; i < src.size(); ++i) {
    auto pair = pbsmt::clean_pair(src[i], tgt[i], rules, i + 1);
    if (!pair) continue;
    if (!scores.empty()) pair->similarity = scores[i];
    cleaned.pairs.push_back(std::move(*pair));
  }
  const auto result = pbsmt::dedup(cleaned);
  write_corpus(result, cfg);
  if (!scores.empty() && cfg.has("general.out-scores")) {
    write_scores(result, cfg.output_path("general.out-scores"));
  }
  log("preprocess: kept " + std::to_string(result.size()) + " of " + std::to_string(src.size()) +
      " pairs (" + std::to_string(src.size() - cleaned.size()) + " empty, " +
      std::to_string(cleaned.size() - result.size()) + " duplicate)");
  return 0;
}

int run_filter(const PipelineConfig& cfg) {
  const auto corpus = read_corpus(cfg);
  const auto scores = pbsmt::read_scores(cfg.input_path("general.scores"));
  const double threshold = cfg.filter_threshold();
  const auto kept = pbsmt::similarity_filter(corpus, scores, threshold);
  write_corpus(kept, cfg);
  if (cfg.has("general.out-scores")) write_scores(kept, cfg.output_path("general.out-scores"));
  log("filter: kept " + std::to_string(kept.size()) + " of " + std::to_string(corpus.size()) +
      " pairs at threshold " + pbsmt::format_double(threshold));
  return 0;
}

int run_analyze_lengths(const PipelineConfig& cfg) {
  const auto hist = pbsmt::length_diff_histogram(read_corpus(cfg));
  with_output(cfg, "general.report", [&](std::ostream& out) { hist.write_csv(out); });
  log("analyze-lengths: " + std::to_string(hist.total) + " pairs, " +
      pbsmt::format_fixed(hist.below_three_percent(), 2) +
      "% differ by fewer than 3 tokens");
  return 0;
}

int run_romanize(const PipelineConfig& cfg) {
  const auto table = pbsmt::TransliterationTable::load(cfg.input_path("general.translit"));
  const auto corpus = read_corpus(cfg);
  pbsmt::Corpus out;
  for (const auto& p : corpus.pairs) out.pairs.push_back(pbsmt::romanize(p, table));
  write_corpus(out, cfg);
  return 0;
}

int run_invert(const PipelineConfig& cfg) {
  const auto corpus = read_corpus(cfg);
  pbsmt::Corpus out;
  for (const auto& p : corpus.pairs) out.pairs.push_back(pbsmt::invert_source(p));
  write_corpus(out, cfg);
  return 0;
}

int run_bpe_train(const PipelineConfig& cfg) {
  const auto sentences = pbsmt::read_tokenized(cfg.input_path("general.input"));
  const auto model = pbsmt::bpe_train(sentences, cfg.bpe_merges());
  model.save(cfg.output_path("general.bpe-model"));
  log("bpe-train: learned " + std::to_string(model.merge_count()) + " merges");
  return 0;
}

int run_bpe_apply(const PipelineConfig& cfg) {
  const auto model = pbsmt::BpeModel::load(cfg.input_path("general.bpe-model"));
  const auto sentences = pbsmt::read_tokenized(cfg.input_path("general.input"));
  std::vector<pbsmt::Tokens> encoded;
  encoded.reserve(sentences.size());
  for (const auto& s : sentences) encoded.push_back(model.encode(s));
  pbsmt::write_tokenized(cfg.output_path("general.output"), encoded);
  return 0;
}

int run_align(const PipelineConfig& cfg) {
  const auto corpus = read_corpus(cfg);
  const auto system = cfg.system();
  const auto aligned = pbsmt::align_corpus(corpus, system);
  pbsmt::write_pharaoh(cfg.output_path("general.alignment"), aligned.alignments);
  if (cfg.has("general.ttable")) aligned.forward.save(cfg.output_path("general.ttable"));
  if (cfg.has("general.rttable")) aligned.reverse.save(cfg.output_path("general.rttable"));
  return 0;
}

int run_extract_phrases(const PipelineConfig& cfg) {
  const auto corpus = read_corpus(cfg);
  const auto alignments = pbsmt::read_pharaoh(cfg.input_path("general.alignment"), corpus);
  const auto forward = pbsmt::TranslationTable::load(cfg.input_path("general.ttable"));
  const auto reverse = pbsmt::TranslationTable::load(cfg.input_path("general.rttable"));
  const auto system = cfg.system();
  std::vector<pbsmt::PhrasePair> extractions;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    for (auto& p : pbsmt::extract_phrases(corpus.pairs[i], alignments[i], system.max_phrase_length)) {
      extractions.push_back(std::move(p));
    }
  }
  const auto table = pbsmt::score_phrase_table(extractions, forward, reverse);
  table.save(cfg.output_path("general.phrase-table"));
  log("extract-phrases: " + std::to_string(table.size()) + " phrase pairs");
  return 0;
}

int run_train_lm(const PipelineConfig& cfg) {
  const auto sentences = pbsmt::read_tokenized(cfg.input_path("general.lm-text"));
  const auto system = cfg.system();
  const auto model =
      pbsmt::estimate_kn(pbsmt::count_ngrams(sentences, system.lm_order), system.discount);
  model.save_arpa(cfg.output_path("general.lm"));
  return 0;
}

int run_translate(const PipelineConfig& cfg) {
  const auto table = pbsmt::PhraseTable::load(cfg.input_path("general.phrase-table"));
  const auto lm = pbsmt::NGramModel::load_arpa(cfg.input_path("general.lm"));
  const auto system = cfg.system();
  const pbsmt::Decoder decoder(table, lm, system.weights, system.decoder);
  const auto input = pbsmt::read_tokenized(cfg.input_path("general.input"));

  std::vector<pbsmt::Tokens> output;
  if (cfg.has("general.nbest")) {
    const std::size_t n = cfg.nbest_size();
    std::ofstream nbest = pbsmt::open_output(cfg.output_path("general.nbest"));
    for (std::size_t i = 0; i < input.size(); ++i) {
      std::vector<pbsmt::Translation> list;
      try {
        list = decoder.nbest(input[i], n);
      } catch (const pbsmt::DecodeError& e) {
        throw pbsmt::DecodeError("sentence " + std::to_string(i + 1) + ": " + e.what());
      }
      pbsmt::write_nbest(nbest, i, list);
      output.push_back(list.front().tokens);
    }
  } else {
    for (auto& t : pbsmt::decode_all(decoder, input, system.threads)) {
      output.push_back(std::move(t.tokens));
    }
  }
  if (cfg.has("general.output")) {
    pbsmt::write_tokenized(cfg.output_path("general.output"), output);
  } else {
    for (const auto& t : output) std::cout << pbsmt::join(t) << '\n';
  }
  return 0;
}

int run_tune(const PipelineConfig& cfg) {
  const auto table = pbsmt::PhraseTable::load(cfg.input_path("general.phrase-table"));
  const auto lm = pbsmt::NGramModel::load_arpa(cfg.input_path("general.lm"));
  const auto corpus = read_corpus(cfg);
  const auto system = cfg.system();
  const auto result = pbsmt::tune_weights(corpus.sources(), corpus.targets(), table, lm,
                                          system.decoder, system.weights, system.tuning);
  with_output(cfg, "general.output", [&](std::ostream& out) { result.weights.write(out); });
  log("tune: BLEU " + pbsmt::format_fixed(result.initial_bleu, 2) + " -> " +
      pbsmt::format_fixed(result.final_bleu, 2) + " on " + std::to_string(result.pool_size) +
      " merged candidates after " + std::to_string(result.iterations) + " rounds");
  return 0;
}

int run_bleu(const PipelineConfig& cfg) {
  const auto hyp = pbsmt::read_tokenized(cfg.input_path("general.hyp"));
  const auto ref = pbsmt::read_tokenized(cfg.input_path("general.ref"));
  const auto report = pbsmt::bleu(hyp, ref);
  std::cout << pbsmt::format_fixed(report.score, 2) << '\n';
  log(report.summary());
  return 0;
}

std::vector<pbsmt::Variant> requested_variants(const PipelineConfig& cfg, bool allow_all) {
  const auto name = cfg.get("general.variant").value_or(allow_all ? "all" : "baseline");
  if (name == "all") {
    if (!allow_all) throw pbsmt::ValidationError("crossval runs one variant; use experiment for all");
    return {pbsmt::Variant::kBaseline, pbsmt::Variant::kRomanized, pbsmt::Variant::kInverted};
  }
  return {pbsmt::parse_variant(name)};
}

int run_variants(const PipelineConfig& cfg, bool allow_all) {
  const auto variants = requested_variants(cfg, allow_all);
  const auto corpus = read_corpus(cfg);
  std::vector<pbsmt::Tokens> lm_text;
  if (const auto path = cfg.optional_input_path("general.lm-text")) {
    lm_text = pbsmt::read_tokenized(*path);
  }
  std::optional<pbsmt::TransliterationTable> table;
  if (const auto path = cfg.optional_input_path("general.translit")) {
    table = pbsmt::TransliterationTable::load(*path);
  }

  pbsmt::ExperimentConfig ec;
  ec.folds = cfg.folds();
  ec.seed = cfg.seed();
  ec.system = cfg.system();
  std::vector<pbsmt::ExperimentResult> results;
  for (const auto v : variants) {
    ec.variant = v;
    log("variant " + std::string(pbsmt::to_string(v)) + ": " + pbsmt::describe(ec));
    results.push_back(pbsmt::run_experiment(corpus, lm_text, table ? &*table : nullptr, ec));
  }
  with_output(cfg, "general.output",
              [&](std::ostream& out) { pbsmt::write_results_csv(out, results); });
  if (cfg.has("general.report")) {
    std::ofstream out = pbsmt::open_output(cfg.output_path("general.report"));
    pbsmt::write_results_table(out, results);
  } else {
    pbsmt::write_results_table(std::cerr, results);
  }
  return 0;
}

struct Command {
  const char* name;
  const char* help;
  int (*run)(const PipelineConfig&);
};

int run_crossval(const PipelineConfig& cfg) { return run_variants(cfg, false); }
int run_experiment(const PipelineConfig& cfg) { return run_variants(cfg, true); }

const std::vector<Command>& commands() {
  static const std::vector<Command> list = {
      {"preprocess", "Clean (punctuation, emoji, empty lines) and deduplicate a parallel corpus",
       run_preprocess},
      {"filter", "Keep pairs whose similarity score reaches the threshold", run_filter},
      {"analyze-lengths", "Histogram of token-length differences as CSV", run_analyze_lengths},
      {"romanize", "Transliterate both sides with a table", run_romanize},
      {"invert", "Reverse source token order", run_invert},
      {"bpe-train", "Learn BPE merges", run_bpe_train},
      {"bpe-apply", "Segment text with learned BPE merges", run_bpe_apply},
      {"align", "Train lexical tables and write symmetrized word alignments", run_align},
      {"extract-phrases", "Extract and score a phrase table", run_extract_phrases},
      {"train-lm", "Estimate an interpolated Kneser-Ney LM in ARPA format", run_train_lm},
      {"translate", "Decode input sentences", run_translate},
      {"tune", "Tune feature weights on a tune set", run_tune},
      {"bleu", "Corpus BLEU of hypotheses against references", run_bleu},
      {"crossval", "k-fold cross-validation of one variant", run_crossval},
      {"experiment", "Cross-validate the baseline, romanized and inverted variants",
       run_experiment},
  };
  return list;
}

std::string one_line(std::string s) {
  for (auto& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

int fail(const char* kind, const std::string& message, int code) {
  std::cerr << "pbsmt: error: " << kind << ": " << one_line(message) << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phrase-based statistical machine translation toolkit", "pbsmt"};
  app.fallthrough();
  app.require_subcommand(1);

  std::map<std::string, std::string> flag_values;
  for (const auto& spec : pbsmt::option_specs()) {
    app.add_option("--" + spec.flag(), flag_values[spec.qualified_key()], spec.help);
  }
  for (const auto& c : commands()) app.add_subcommand(c.name, c.help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), 3);
  }

  try {
    std::map<std::string, std::string> values;
    if (const auto* opt = app.get_option("--config"); opt->count() > 0) {
      values = pbsmt::load_config(flag_values["general.config"]);
    }
    for (const auto& spec : pbsmt::option_specs()) {
      if (spec.qualified_key() == "general.config") continue;
      if (app.get_option("--" + spec.flag())->count() > 0) {
        values[spec.qualified_key()] = flag_values[spec.qualified_key()];
      }
    }
    const PipelineConfig cfg(std::move(values));
    for (const auto& c : commands()) {
      if (app.got_subcommand(c.name)) return c.run(cfg);
    }
    return fail("usage", "no subcommand", 3);
  } catch (const pbsmt::IoError& e) {
    return fail("io", e.what(), 2);
  } catch (const pbsmt::ValidationError& e) {
    return fail("validation", e.what(), 3);
  } catch (const pbsmt::ParseError& e) {
    return fail("parse", e.what(), 3);
  } catch (const pbsmt::DecodeError& e) {
    return fail("decode", e.what(), 4);
  } catch (const pbsmt::TuningError& e) {
    return fail("tuning", e.what(), 4);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), 1);
  }
}

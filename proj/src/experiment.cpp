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

#include "pbsmt/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>

#include "pbsmt/error.hpp"
#include "pbsmt/parallel.hpp"
#include "pbsmt/rng.hpp"

namespace pbsmt {
namespace {

template <typename Fn>
auto annotated(const std::string& where, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const SizeError& e) {
    throw SizeError(where + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(where + ": " + e.what());
  } catch (const EncodingError& e) {
    throw EncodingError(where + ": " + e.what(), 0);
  } catch (const ParseError& e) {
    throw ParseError(where + ": " + e.what(), 0);
  } catch (const IoError& e) {
    throw IoError(where + ": " + e.what());
  } catch (const DecodeError& e) {
    throw DecodeError(where + ": " + e.what());
  } catch (const TuningError& e) {
    throw TuningError(where + ": " + e.what());
  } catch (const Error& e) {
    throw Error(where + ": " + e.what());
  }
}

Corpus subset(const Corpus& corpus, std::span<const std::size_t> indices) {
  Corpus out;
  out.source_lang = corpus.source_lang;
  out.target_lang = corpus.target_lang;
  out.pairs.reserve(indices.size());
  for (const auto i : indices) out.pairs.push_back(corpus.pairs[i]);
  return out;
}

Tokens transliterate_tokens(const Tokens& tokens, const TransliterationTable& table) {
  Tokens out;
  for (const auto& t : tokens) {
    auto r = table.apply(t);
    if (!r.empty()) out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

std::vector<Fold> kfold(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw ValidationError("k-fold needs k >= 2");
  if (n < k) {
    throw ValidationError("k-fold needs at least k=" + std::to_string(k) + " items, got " +
                          std::to_string(n));
  }
  Rng rng(seed);
  const auto perm = rng.permutation(n);
  std::vector<Fold> folds(k);
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = n / k + (f < n % k ? 1 : 0);
    folds[f].test.assign(perm.begin() + static_cast<std::ptrdiff_t>(pos),
                         perm.begin() + static_cast<std::ptrdiff_t>(pos + size));
    std::sort(folds[f].test.begin(), folds[f].test.end());
    pos += size;
  }
  for (std::size_t f = 0; f < k; ++f) {
    for (std::size_t g = 0; g < k; ++g) {
      if (g != f) folds[f].train.insert(folds[f].train.end(), folds[g].test.begin(), folds[g].test.end());
    }
    std::sort(folds[f].train.begin(), folds[f].train.end());
  }
  return folds;
}

double mean(std::span<const double> values) {
  if (values.empty()) throw ValidationError("mean of no values");
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

AlignedCorpus align_corpus(const Corpus& corpus, const SystemConfig& config) {
  AlignedCorpus out;
  const Corpus swapped = swap_sides(corpus);
  auto forward = train_ibm1(corpus, config.ibm1_iterations, config.use_null);
  auto reverse = train_ibm1(swapped, config.ibm1_iterations, config.use_null);
  std::optional<DistortionTable> fwd_dist;
  std::optional<DistortionTable> rev_dist;
  if (config.ibm2_iterations > 0) {
    auto f2 = train_ibm2(corpus, forward.table, config.ibm2_iterations, config.use_null);
    auto r2 = train_ibm2(swapped, reverse.table, config.ibm2_iterations, config.use_null);
    forward.table = std::move(f2.table);
    reverse.table = std::move(r2.table);
    fwd_dist = std::move(f2.distortion);
    rev_dist = std::move(r2.distortion);
  }
  out.forward = std::move(forward.table);
  out.reverse = std::move(reverse.table);
  out.alignments.resize(corpus.size());
  parallel_for(corpus.size(), config.threads, [&](std::size_t i) {
    const auto& pair = corpus.pairs[i];
    const auto f = viterbi_align(pair, out.forward, Direction::kSourceToTarget,
                                 fwd_dist ? &*fwd_dist : nullptr);
    const auto r = viterbi_align(pair, out.reverse, Direction::kTargetToSource,
                                 rev_dist ? &*rev_dist : nullptr);
    out.alignments[i] = symmetrize(f, r, config.heuristic);
  });
  return out;
}

TrainedSystem train_system(const Corpus& train, std::span<const Tokens> lm_text,
                           const SystemConfig& config) {
  if (train.empty()) throw ValidationError("training corpus is empty");
  const AlignedCorpus aligned = align_corpus(train, config);
  std::vector<PhrasePair> extractions;
  for (std::size_t i = 0; i < train.size(); ++i) {
    auto pairs = extract_phrases(train.pairs[i], aligned.alignments[i], config.max_phrase_length);
    for (auto& p : pairs) extractions.push_back(std::move(p));
  }
  TrainedSystem system;
  system.table = score_phrase_table(extractions, aligned.forward, aligned.reverse);

  std::vector<Tokens> lm_sentences = train.targets();
  lm_sentences.insert(lm_sentences.end(), lm_text.begin(), lm_text.end());
  system.lm = estimate_kn(count_ngrams(lm_sentences, config.lm_order), config.discount);
  return system;
}

Variant parse_variant(std::string_view name) {
  if (name == "baseline") return Variant::kBaseline;
  if (name == "romanized") return Variant::kRomanized;
  if (name == "inverted") return Variant::kInverted;
  throw ValidationError("unknown variant '" + std::string(name) +
                        "' (expected baseline, romanized or inverted)");
}

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::kBaseline:
      return "baseline";
    case Variant::kRomanized:
      return "romanized";
    case Variant::kInverted:
      return "inverted";
  }
  return "baseline";
}

Corpus apply_variant(const Corpus& corpus, Variant variant, const TransliterationTable* table) {
  Corpus out;
  out.source_lang = corpus.source_lang;
  out.target_lang = corpus.target_lang;
  switch (variant) {
    case Variant::kBaseline:
      return corpus;
    case Variant::kRomanized:
      if (table == nullptr || table->empty()) {
        throw ValidationError("the romanized variant needs a transliteration table");
      }
      for (const auto& p : corpus.pairs) out.pairs.push_back(romanize(p, *table));
      return out;
    case Variant::kInverted:
      for (const auto& p : corpus.pairs) out.pairs.push_back(invert_source(p));
      return out;
  }
  return out;
}

std::string describe(const ExperimentConfig& c) {
  const auto& s = c.system;
  const auto& d = s.decoder;
  std::string out;
  const auto add = [&](std::string_view key, const std::string& value) {
    if (!out.empty()) out += ' ';
    out += key;
    out += '=';
    out += value;
  };
  add("variant", std::string(to_string(c.variant)));
  add("folds", std::to_string(c.folds));
  add("seed", std::to_string(c.seed));
  add("ibm1_iterations", std::to_string(s.ibm1_iterations));
  add("ibm2_iterations", std::to_string(s.ibm2_iterations));
  add("null", s.use_null ? "true" : "false");
  add("heuristic", std::string(to_string(s.heuristic)));
  add("max_phrase_length", std::to_string(s.max_phrase_length));
  add("lm_order", std::to_string(s.lm_order));
  add("discount", s.discount.policy == DiscountOptions::Policy::kFixed
                      ? format_double(s.discount.fixed)
                      : std::string("count-of-counts"));
  add("stack_size", std::to_string(d.stack_size));
  add("beam_threshold", format_double(d.beam_threshold));
  add("distortion_limit", std::to_string(d.distortion_limit));
  add("max_options", std::to_string(d.max_options));
  add("oov_penalty", format_double(d.oov_penalty));
  for (std::size_t f = 0; f < kNumFeatures; ++f) {
    add("w_" + std::string(feature_name(f)), format_double(s.weights[f]));
  }
  add("tune", s.tune ? "true" : "false");
  return out;
}

ExperimentResult run_experiment(const Corpus& corpus, std::span<const Tokens> lm_text,
                                const TransliterationTable* table, const ExperimentConfig& config) {
  const std::string where = "variant " + std::string(to_string(config.variant));
  ExperimentResult result;
  result.variant = config.variant;
  result.config = describe(config);

  const Corpus data = annotated(where, [&] { return apply_variant(corpus, config.variant, table); });
  std::vector<Tokens> extra_lm(lm_text.begin(), lm_text.end());
  if (config.variant == Variant::kRomanized) {
    for (auto& s : extra_lm) s = transliterate_tokens(s, *table);
  }
  const auto folds = annotated(where, [&] { return kfold(data.size(), config.folds, config.seed); });

  for (std::size_t f = 0; f < folds.size(); ++f) {
    const std::string fold_where = where + " fold " + std::to_string(f + 1);
    const BleuReport report = annotated(fold_where, [&] {
      Corpus train = subset(data, folds[f].train);
      const Corpus test = subset(data, folds[f].test);
      Corpus tune;
      if (config.system.tune) {
        const auto held = static_cast<std::size_t>(
            std::ceil(config.tune_fraction * static_cast<double>(train.size())));
        if (held == 0 || held >= train.size()) {
          throw ValidationError("tune fraction leaves no tune or train data");
        }
        Rng rng(config.seed + 1000003ULL * (f + 1));
        const auto perm = rng.permutation(train.size());
        std::vector<bool> is_tune(train.size(), false);
        for (std::size_t i = 0; i < held; ++i) is_tune[perm[i]] = true;
        Corpus rest;
        for (std::size_t i = 0; i < train.size(); ++i) {
          (is_tune[i] ? tune : rest).pairs.push_back(train.pairs[i]);
        }
        train = std::move(rest);
      }
      const TrainedSystem system = train_system(train, extra_lm, config.system);
      FeatureWeights weights = config.system.weights;
      if (config.system.tune) {
        TuneOptions opts = config.system.tuning;
        opts.threads = config.system.threads;
        weights = tune_weights(tune.sources(), tune.targets(), system.table, system.lm,
                               config.system.decoder, weights, opts)
                      .weights;
      }
      const Decoder decoder(system.table, system.lm, weights, config.system.decoder);
      const auto sources = test.sources();
      const auto translations = decode_all(decoder, sources, config.system.threads);
      std::vector<Tokens> hyps;
      hyps.reserve(translations.size());
      for (const auto& t : translations) hyps.push_back(t.tokens);
      const auto refs = test.targets();
      return bleu(hyps, refs);
    });
    result.fold_reports.push_back(report);
    result.fold_bleu.push_back(report.score);
  }
  result.mean_bleu = mean(result.fold_bleu);
  return result;
}

void write_results_csv(std::ostream& out, std::span<const ExperimentResult> results) {
  out << "variant,fold,bleu\n";
  for (const auto& r : results) {
    for (std::size_t f = 0; f < r.fold_bleu.size(); ++f) {
      out << to_string(r.variant) << ',' << (f + 1) << ',' << format_fixed(r.fold_bleu[f], 2)
          << '\n';
    }
  }
  for (const auto& r : results) {
    out << to_string(r.variant) << ",mean," << format_fixed(r.mean_bleu, 2) << '\n';
  }
}

void write_results_table(std::ostream& out, std::span<const ExperimentResult> results) {
  std::size_t folds = 0;
  for (const auto& r : results) folds = std::max(folds, r.fold_bleu.size());
  char buf[64];
  std::snprintf(buf, sizeof buf, "%-18s", "Model");
  out << buf;
  for (std::size_t f = 0; f < folds; ++f) {
    std::snprintf(buf, sizeof buf, "%9s", ("Fold " + std::to_string(f + 1)).c_str());
    out << buf;
  }
  out << "  Average\n";
  for (const auto& r : results) {
    std::snprintf(buf, sizeof buf, "%-18s", ("SMT " + std::string(to_string(r.variant))).c_str());
    out << buf;
    for (std::size_t f = 0; f < folds; ++f) {
      const std::string cell = f < r.fold_bleu.size() ? format_fixed(r.fold_bleu[f], 2) : "-";
      std::snprintf(buf, sizeof buf, "%9s", cell.c_str());
      out << buf;
    }
    std::snprintf(buf, sizeof buf, "%9s", format_fixed(r.mean_bleu, 2).c_str());
    out << buf << '\n';
  }
}

}  // namespace pbsmt

// Apache License, Version 2.0, refer to LICENSE.txt

#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hashseg/eval_harness.hpp"
#include "hashseg/feature_ranker.hpp"
#include "hashseg/io_util.hpp"
#include "hashseg/text_util.hpp"

namespace {

using namespace hashseg;

struct ModelPaths {
  std::string unigrams, bigrams, prior, kb_pages, kb_mentions, kb_inlinks, taxonomy, stopwords;
};

struct LoadedModels {
  UnigramModel unigrams;
  BigramModel bigrams;
  WordLenPrior prior;
  Kb kb;
  Taxonomy taxonomy;
  ContentLexicon lexicon;

  static LoadedModels load(const ModelPaths& p) {
    return LoadedModels{UnigramModel::load(p.unigrams),
                        BigramModel::load(p.bigrams),
                        WordLenPrior::load(p.prior),
                        Kb::load(p.kb_pages, p.kb_mentions, p.kb_inlinks),
                        Taxonomy::load(p.taxonomy),
                        ContentLexicon::load(p.stopwords)};
  }

  ModelSet set(const SeederConfig& seeder, double threshold) const {
    ModelSet m;
    m.unigrams = &unigrams;
    m.bigrams = &bigrams;
    m.prior = &prior;
    m.kb = &kb;
    m.taxonomy = &taxonomy;
    m.lexicon = &lexicon;
    m.seeder = seeder;
    m.link_threshold = threshold;
    return m;
  }
};

// Lowercased chunks rendered with the hashtag's original casing.
std::string display_segmentation(std::string_view raw_hashtag,
                                 const std::vector<std::string>& chunks) {
  std::string_view body = strip_sigil(raw_hashtag);
  std::string out;
  size_t offset = 0;
  for (size_t i = 0; i < chunks.size(); ++i) {
    if (i) out.push_back(' ');
    if (offset + chunks[i].size() <= body.size())
      out += std::string(body.substr(offset, chunks[i].size()));
    else
      out += chunks[i];
    offset += chunks[i].size();
  }
  return out;
}

std::string render_links(const std::vector<EntityLink>& links) {
  if (links.empty()) return "-";
  std::string out;
  for (size_t i = 0; i < links.size(); ++i) {
    if (i) out.push_back(';');
    out += links[i].surface + ":" + std::to_string(links[i].page_id) + ":" +
           format_fixed(links[i].score, 6);
  }
  return out;
}

enum class OutputFormat { kText, kTsv, kJsonl };

void print_annotation(std::ostream& out, OutputFormat format, const std::string& hashtag,
                      const AnnotationResult& result) {
  const auto& cands = result.candidates;
  const std::vector<EntityLink>* top_links = cands.empty() ? nullptr : &cands.front().links;
  switch (format) {
    case OutputFormat::kText: {
      out << "hashtag: " << hashtag << "\n";
      for (size_t i = 0; i < cands.size(); ++i) {
        out << "  " << (i + 1) << ". " << display_segmentation(hashtag, cands[i].seg.chunks)
            << " [score=" << format_fixed(cands[i].score, 6) << "]\n";
      }
      out << "links: " << (top_links ? render_links(*top_links) : "-") << "\n\n";
      break;
    }
    case OutputFormat::kTsv: {
      for (size_t i = 0; i < cands.size(); ++i) {
        out << hashtag << '\t' << (i + 1) << '\t'
            << display_segmentation(hashtag, cands[i].seg.chunks) << '\t'
            << format_fixed(cands[i].score, 6) << '\t' << render_links(cands[i].links) << "\n";
      }
      break;
    }
    case OutputFormat::kJsonl: {
      nlohmann::ordered_json rec;
      rec["hashtag"] = hashtag;
      rec["candidates"] = nlohmann::ordered_json::array();
      for (size_t i = 0; i < cands.size(); ++i) {
        nlohmann::ordered_json c;
        c["rank"] = i + 1;
        c["segmentation"] = display_segmentation(hashtag, cands[i].seg.chunks);
        c["chunks"] = cands[i].seg.chunks;
        c["score"] = cands[i].score;
        rec["candidates"].push_back(std::move(c));
      }
      rec["links"] = nlohmann::ordered_json::array();
      if (top_links) {
        for (const auto& link : *top_links) {
          nlohmann::ordered_json l;
          l["surface"] = link.surface;
          l["page_id"] = link.page_id;
          l["score"] = link.score;
          rec["links"].push_back(std::move(l));
        }
      }
      out << rec.dump() << "\n";
      break;
    }
  }
}

struct CommonOptions {
  ModelPaths paths;
  SeederConfig seeder;
  double rel_threshold = Kb::kDefaultLinkThreshold;
  uint32_t seed = 1;
  size_t folds = 5;
  std::string format = "text";
};

void add_model_options(CLI::App* cmd, CommonOptions& opt) {
  cmd->add_option("--unigrams", opt.paths.unigrams, "unigram count file")->required();
  cmd->add_option("--bigrams", opt.paths.bigrams, "bigram count file")->required();
  cmd->add_option("--prior", opt.paths.prior, "word-length prior file")->required();
  cmd->add_option("--kb-pages", opt.paths.kb_pages, "KB pages file")->required();
  cmd->add_option("--kb-mentions", opt.paths.kb_mentions, "KB mention priors file")->required();
  cmd->add_option("--kb-inlinks", opt.paths.kb_inlinks, "KB inlinks file")->required();
  cmd->add_option("--taxonomy", opt.paths.taxonomy, "hypernym taxonomy file")->required();
  cmd->add_option("--stopwords", opt.paths.stopwords, "stopword list")->required();
  cmd->add_option("--min-len", opt.seeder.min_len, "minimum sliding-window length");
  cmd->add_option("--max-len", opt.seeder.max_len, "maximum sliding-window length");
  cmd->add_option("--top-k", opt.seeder.top_k, "candidates kept per hashtag");
  cmd->add_option("--window-constant", opt.seeder.window_constant, "window score constant");
  cmd->add_option("--rel-threshold", opt.rel_threshold, "entity link pruning threshold");
}

OutputFormat parse_format(const std::string& name) {
  if (name == "text") return OutputFormat::kText;
  if (name == "tsv") return OutputFormat::kTsv;
  if (name == "jsonl") return OutputFormat::kJsonl;
  throw std::invalid_argument("unknown format '" + name + "' (expected text, tsv, or jsonl)");
}

int run_annotate(const CommonOptions& opt, const std::string& model_path, bool unweighted,
                 const std::string& input_path) {
  OutputFormat format = parse_format(opt.format);
  LoadedModels loaded = LoadedModels::load(opt.paths);
  ModelSet models = loaded.set(opt.seeder, opt.rel_threshold);
  ElasticNetModel model =
      unweighted ? ElasticNetModel::equal_weights() : ElasticNetModel::load(model_path);

  std::ifstream file;
  std::istream* in = &std::cin;
  if (!input_path.empty() && input_path != "-") {
    file.open(input_path);
    if (!file) throw LoadError(input_path, 0, "cannot open file");
    in = &file;
  }

  size_t skipped = 0;
  std::string line;
  while (std::getline(*in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    size_t tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      ++skipped;
      continue;
    }
    std::string hashtag = line.substr(0, tab);
    std::string tweet = line.substr(tab + 1);
    if (strip_sigil(hashtag).empty()) {
      ++skipped;
      continue;
    }
    AnnotationResult result = annotate(models, model, hashtag, tweet);
    print_annotation(std::cout, format, hashtag, result);
  }
  if (skipped > 0)
    std::cerr << "warning: skipped " << skipped << " malformed input line(s)\n";
  return 0;
}

int run_train(const CommonOptions& opt, const std::string& model_path,
              std::vector<double> alpha_grid, std::vector<double> rho_grid,
              const std::string& dataset_path) {
  LoadedModels loaded = LoadedModels::load(opt.paths);
  ModelSet models = loaded.set(opt.seeder, opt.rel_threshold);

  std::vector<AnnotatedTweet> tweets = load_annotated_tweets(dataset_path);
  SynthesisResult synth = synthesize_dataset(tweets, opt.seed);
  if (synth.skipped_short > 0)
    std::cerr << "warning: skipped " << synth.skipped_short << " tweet(s) under two tokens\n";

  std::vector<FeatureVector> rows;
  std::vector<double> labels;
  std::array<bool, FeatureVector::kCount> full_mask{{true, true, true, true, true}};
  for (const auto& inst : synth.instances) {
    InstanceData data = prepare_instance(inst, models, full_mask);
    for (size_t c = 0; c < data.candidates.size(); ++c) {
      rows.push_back(data.candidates[c].features);
      labels.push_back(data.labels[c]);
    }
  }
  if (rows.size() < 5) {
    std::cerr << "error: dataset too small to train (" << rows.size() << " candidate rows)\n";
    return 3;
  }

  if (alpha_grid.empty()) alpha_grid = {1e-4, 1e-3, 1e-2};
  if (rho_grid.empty()) rho_grid = {0.2, 0.5, 0.8};
  double alpha = alpha_grid.front();
  double rho = rho_grid.front();
  if (alpha_grid.size() * rho_grid.size() > 1) {
    if (rows.size() < opt.folds) {
      std::cerr << "error: dataset too small for " << opt.folds << "-fold selection\n";
      return 3;
    }
    std::tie(alpha, rho) =
        cross_validate(rows, labels, alpha_grid, rho_grid, opt.folds, opt.seed);
  }

  TrainDiagnostics diag;
  ElasticNetModel model = train_elastic_net(rows, labels, alpha, rho, TrainOptions{}, &diag);
  model.save(model_path);
  std::cout << "alpha=" << format_exact(alpha) << "\n";
  std::cout << "rho=" << format_exact(rho) << "\n";
  std::cout << "objective="
            << format_exact(diag.objective_history.empty() ? 0.0
                                                           : diag.objective_history.back())
            << "\n";
  return 0;
}

int run_evaluate(const CommonOptions& opt, const std::string& dataset_path) {
  LoadedModels loaded = LoadedModels::load(opt.paths);
  ModelSet models = loaded.set(opt.seeder, opt.rel_threshold);

  std::vector<AnnotatedTweet> tweets = load_annotated_tweets(dataset_path);
  SynthesisResult synth = synthesize_dataset(tweets, opt.seed);
  if (synth.skipped_short > 0)
    std::cerr << "warning: skipped " << synth.skipped_short << " tweet(s) under two tokens\n";

  EvalConfig cfg;
  cfg.folds = opt.folds;
  cfg.seed = opt.seed;
  if (synth.instances.size() < cfg.folds) {
    std::cerr << "error: dataset has " << synth.instances.size() << " instance(s), fewer than "
              << cfg.folds << " folds\n";
    return 3;
  }
  EvalReport report = kfold_evaluate(synth.instances, models, cfg);
  std::cout << render_report(report);
  return 0;
}

int run_build_prior(const std::string& corpus_path, const std::string& output_path) {
  LineReader r(corpus_path);
  std::vector<size_t> lengths;
  std::string line;
  while (r.next(line)) {
    for (const auto& tok : alpha_tokens(line)) lengths.push_back(tok.size());
  }
  if (lengths.empty()) throw LoadError(corpus_path, 0, "corpus contains no alphabetic tokens");
  WordLenPrior prior = WordLenPrior::from_lengths(lengths);
  prior.save(output_path);
  std::cerr << "tokens=" << lengths.size() << " max_len=" << prior.max_len() << "\n";
  return 0;
}

template <typename F>
int guarded(F&& f) {
  try {
    return f();
  } catch (const LoadError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"context-aware hashtag segmentation and entity linking"};
  app.require_subcommand(1);
  int exit_code = 0;

  CommonOptions annotate_opt;
  std::string annotate_model, annotate_input;
  bool unweighted = false;
  auto* annotate_cmd =
      app.add_subcommand("annotate", "segment and link hashtags from TAB-separated lines");
  add_model_options(annotate_cmd, annotate_opt);
  annotate_cmd->add_option("--model", annotate_model, "trained model file");
  annotate_cmd->add_flag("--unweighted", unweighted, "score with equal feature weights");
  annotate_cmd->add_option("--format", annotate_opt.format, "text, tsv, or jsonl");
  annotate_cmd->add_option("input", annotate_input, "input file ('-' or absent for stdin)");
  annotate_cmd->callback([&]() {
    if (annotate_model.empty() && !unweighted)
      throw CLI::ValidationError("annotate", "either --model or --unweighted is required");
    exit_code = guarded([&]() {
      return run_annotate(annotate_opt, annotate_model, unweighted, annotate_input);
    });
  });

  CommonOptions train_opt;
  std::string train_model, train_dataset;
  std::vector<double> alpha_grid, rho_grid;
  auto* train_cmd = app.add_subcommand("train", "train the ranking model on annotated tweets");
  add_model_options(train_cmd, train_opt);
  train_cmd->add_option("--model", train_model, "output model file")->required();
  train_cmd->add_option("--seed", train_opt.seed, "dataset synthesis / fold seed");
  train_cmd->add_option("--folds", train_opt.folds, "folds for parameter selection");
  train_cmd->add_option("--alpha", alpha_grid, "alpha grid value (repeatable)");
  train_cmd->add_option("--rho", rho_grid, "rho grid value (repeatable)");
  train_cmd->add_option("dataset", train_dataset, "annotated tweets file")->required();
  train_cmd->callback([&]() {
    exit_code = guarded(
        [&]() { return run_train(train_opt, train_model, alpha_grid, rho_grid, train_dataset); });
  });

  CommonOptions eval_opt;
  std::string eval_dataset;
  auto* eval_cmd = app.add_subcommand("evaluate", "k-fold evaluation on annotated tweets");
  add_model_options(eval_cmd, eval_opt);
  eval_cmd->add_option("--seed", eval_opt.seed, "dataset synthesis / fold seed");
  eval_cmd->add_option("--folds", eval_opt.folds, "number of folds");
  eval_cmd->add_option("dataset", eval_dataset, "annotated tweets file")->required();
  eval_cmd->callback(
      [&]() { exit_code = guarded([&]() { return run_evaluate(eval_opt, eval_dataset); }); });

  std::string corpus_path, prior_out;
  auto* prior_cmd = app.add_subcommand("build-prior", "build a word-length prior from a corpus");
  prior_cmd->add_option("corpus", corpus_path, "plain-text corpus")->required();
  prior_cmd->add_option("--output", prior_out, "output prior file")->required();
  prior_cmd->callback(
      [&]() { exit_code = guarded([&]() { return run_build_prior(corpus_path, prior_out); }); });

  CLI11_PARSE(app, argc, argv);
  return exit_code;
}

// Apache License, Version 2.0, refer to LICENSE.txt

#include "hashseg/eval_harness.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

#include "hashseg/io_util.hpp"
#include "hashseg/random_util.hpp"
#include "hashseg/text_util.hpp"

namespace hashseg {

std::vector<AnnotatedTweet> load_annotated_tweets(const std::string& path) {
  std::vector<AnnotatedTweet> out;
  LineReader r(path);
  std::string line;
  while (r.next(line)) {
    size_t tab = line.find('\t');
    if (tab == std::string::npos || tab == 0)
      r.fail("expected 'text<TAB>spans' (use '-' for no entities)");
    AnnotatedTweet tweet;
    tweet.text = line.substr(0, tab);
    size_t token_count = split_whitespace(tweet.text).size();
    std::string_view spans = std::string_view(line).substr(tab + 1);
    if (spans.empty()) r.fail("empty span field (use '-' for no entities)");
    if (spans != "-") {
      while (!spans.empty()) {
        size_t comma = spans.find(',');
        std::string_view item = spans.substr(0, comma);
        size_t c1 = item.find(':');
        size_t c2 = c1 == std::string_view::npos ? std::string_view::npos
                                                 : item.find(':', c1 + 1);
        if (c1 == std::string_view::npos || c2 == std::string_view::npos)
          r.fail("expected span 'start:end:page_id'");
        uint64_t start, end;
        int64_t page_id;
        if (!parse_u64(item.substr(0, c1), start) ||
            !parse_u64(item.substr(c1 + 1, c2 - c1 - 1), end) ||
            !parse_i64(item.substr(c2 + 1), page_id))
          r.fail("bad span '" + std::string(item) + "'");
        if (start >= end) r.fail("span start must precede end");
        if (end > token_count) r.fail("span exceeds token count");
        tweet.entities.push_back(EntitySpan{static_cast<size_t>(start),
                                            static_cast<size_t>(end), page_id});
        if (comma == std::string_view::npos) break;
        spans.remove_prefix(comma + 1);
        if (spans.empty()) r.fail("trailing comma in span list");
      }
      std::vector<EntitySpan> sorted = tweet.entities;
      std::sort(sorted.begin(), sorted.end(),
                [](const EntitySpan& a, const EntitySpan& b) { return a.start < b.start; });
      for (size_t i = 1; i < sorted.size(); ++i) {
        if (sorted[i].start < sorted[i - 1].end) r.fail("overlapping entity spans");
      }
    }
    out.push_back(std::move(tweet));
  }
  return out;
}

namespace {

std::string concat_tokens(const std::vector<std::string>& tokens, size_t begin, size_t end) {
  std::string s;
  for (size_t i = begin; i < end; ++i) s += tokens[i];
  return s;
}

std::string join_outside(const std::vector<std::string>& tokens, size_t begin, size_t end) {
  std::string s;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i >= begin && i < end) continue;
    if (!s.empty()) s.push_back(' ');
    s += tokens[i];
  }
  return s;
}

}  // namespace

SynthesisResult synthesize_dataset(const std::vector<AnnotatedTweet>& tweets, uint32_t seed) {
  SynthesisResult result;
  DetRng rng(seed);
  for (const AnnotatedTweet& tweet : tweets) {
    std::vector<std::string> tokens = split_whitespace(tweet.text);
    if (tokens.size() < 2) {
      ++result.skipped_short;
      continue;
    }
    if (tweet.entities.empty()) {
      size_t width = std::min<size_t>(rng.uniform(2, 4), tokens.size());
      size_t start = static_cast<size_t>(rng.uniform(0, tokens.size() - width));
      LabeledInstance inst;
      inst.hashtag = concat_tokens(tokens, start, start + width);
      inst.gold_chunks.assign(tokens.begin() + start, tokens.begin() + start + width);
      inst.tweet_context = join_outside(tokens, start, start + width);
      result.instances.push_back(std::move(inst));
      continue;
    }
    for (const EntitySpan& ent : tweet.entities) {
      size_t extra = static_cast<size_t>(rng.uniform(0, 3));
      size_t s = ent.start, e = ent.end;
      for (size_t i = 0; i < extra; ++i) {
        if (e < tokens.size()) ++e;
        else if (s > 0) --s;
        else break;
      }
      LabeledInstance inst;
      inst.hashtag = concat_tokens(tokens, s, e);
      inst.gold_chunks.assign(tokens.begin() + s, tokens.begin() + e);
      inst.tweet_context = join_outside(tokens, s, e);
      for (const EntitySpan& other : tweet.entities) {
        if (other.start >= s && other.end <= e) {
          inst.gold_links.push_back(GoldLink{
              join(std::vector<std::string>(tokens.begin() + other.start,
                                            tokens.begin() + other.end),
                   " "),
              other.page_id});
        }
      }
      result.instances.push_back(std::move(inst));
    }
  }
  return result;
}

namespace {

std::vector<std::string> lower_all(const std::vector<std::string>& words) {
  std::vector<std::string> out;
  out.reserve(words.size());
  for (const auto& w : words) out.push_back(to_lower(w));
  return out;
}

}  // namespace

bool hit_at_n(const std::vector<std::vector<std::string>>& ranked_chunks,
              const std::vector<std::vector<std::string>>& golds, size_t n) {
  if (n < 1) throw std::invalid_argument("n must be at least 1");
  std::vector<std::vector<std::string>> golds_lower;
  golds_lower.reserve(golds.size());
  for (const auto& g : golds) golds_lower.push_back(lower_all(g));
  size_t limit = std::min(n, ranked_chunks.size());
  for (size_t i = 0; i < limit; ++i) {
    std::vector<std::string> cand = lower_all(ranked_chunks[i]);
    for (const auto& g : golds_lower)
      if (cand == g) return true;
  }
  return false;
}

PrfScores linking_prf(const std::vector<GoldLink>& predicted,
                      const std::vector<GoldLink>& gold) {
  std::unordered_set<int64_t> gold_pages, predicted_pages;
  for (const auto& g : gold) gold_pages.insert(g.page_id);
  for (const auto& p : predicted) predicted_pages.insert(p.page_id);

  PrfScores scores;
  if (predicted.empty()) {
    scores.precision = 1.0;
  } else {
    size_t correct = 0;
    for (const auto& p : predicted)
      if (gold_pages.count(p.page_id)) ++correct;
    scores.precision = static_cast<double>(correct) / static_cast<double>(predicted.size());
  }
  if (gold.empty()) {
    scores.recall = 1.0;
  } else {
    size_t covered = 0;
    for (const auto& g : gold)
      if (predicted_pages.count(g.page_id)) ++covered;
    scores.recall = static_cast<double>(covered) / static_cast<double>(gold.size());
  }
  double denom = scores.precision + scores.recall;
  scores.f1 = denom > 0.0 ? 2.0 * scores.precision * scores.recall / denom : 0.0;
  return scores;
}

InstanceData prepare_instance(const LabeledInstance& instance, const ModelSet& models,
                              const std::array<bool, FeatureVector::kCount>& feature_mask) {
  InstanceData data;
  data.golds_lower.push_back(lower_all(instance.gold_chunks));

  std::vector<SeededCandidate> seeds =
      seed_segmentations(*models.unigrams, *models.prior, instance.hashtag, models.seeder);
  TweetContext ctx = make_tweet_context(*models.kb, instance.tweet_context);
  for (auto& s : seeds) {
    RankedCandidate c;
    c.features =
        mask_features(extract_features(models, s.seg, instance.hashtag, ctx, &c.links),
                      feature_mask);
    c.seg = std::move(s.seg);
    double label = 0.0;
    for (const auto& g : data.golds_lower)
      if (c.seg.chunks == g) label = 1.0;
    data.candidates.push_back(std::move(c));
    data.labels.push_back(label);
  }
  return data;
}

namespace {

FoldStats pool_stats(const std::vector<size_t>& hits_by_n_index, size_t instances,
                     double p_sum, double r_sum, double f_sum) {
  FoldStats stats;
  stats.instances = instances;
  double n_inst = static_cast<double>(instances);
  for (size_t k = 0; k < kPrecisionAtNs.size(); ++k)
    stats.p_at_n[kPrecisionAtNs[k]] =
        instances == 0 ? 0.0 : static_cast<double>(hits_by_n_index[k]) / n_inst;
  stats.link_precision = instances == 0 ? 0.0 : p_sum / n_inst;
  stats.link_recall = instances == 0 ? 0.0 : r_sum / n_inst;
  stats.link_f1 = instances == 0 ? 0.0 : f_sum / n_inst;
  return stats;
}

}  // namespace

EvalReport kfold_evaluate(const std::vector<LabeledInstance>& dataset, const ModelSet& models,
                          const EvalConfig& cfg) {
  const size_t n = dataset.size();
  if (cfg.folds < 2) throw std::invalid_argument("evaluation requires at least 2 folds");
  if (n < cfg.folds) throw std::invalid_argument("fewer instances than folds");
  if (cfg.alpha_grid.empty() || cfg.rho_grid.empty())
    throw std::invalid_argument("parameter grids must be non-empty");

  std::vector<InstanceData> prepared;
  prepared.reserve(n);
  for (const auto& inst : dataset)
    prepared.push_back(prepare_instance(inst, models, cfg.feature_mask));

  std::vector<size_t> fold_of(n);
  {
    DetRng rng(cfg.seed);
    std::vector<size_t> perm = rng.permutation(n);
    for (size_t i = 0; i < n; ++i) fold_of[perm[i]] = i % cfg.folds;
  }

  EvalReport report;
  report.instances = n;
  report.folds = cfg.folds;

  std::vector<size_t> total_hits(kPrecisionAtNs.size(), 0);
  double total_p = 0.0, total_r = 0.0, total_f = 0.0;

  for (size_t f = 0; f < cfg.folds; ++f) {
    std::vector<FeatureVector> train_x;
    std::vector<double> train_y;
    for (size_t i = 0; i < n; ++i) {
      if (fold_of[i] == f) continue;
      for (size_t c = 0; c < prepared[i].candidates.size(); ++c) {
        train_x.push_back(prepared[i].candidates[c].features);
        train_y.push_back(prepared[i].labels[c]);
      }
    }

    double alpha = cfg.alpha_grid.front();
    double rho = cfg.rho_grid.front();
    if (cfg.alpha_grid.size() * cfg.rho_grid.size() > 1 && train_x.size() >= cfg.folds &&
        cfg.folds >= 2) {
      std::tie(alpha, rho) =
          cross_validate(train_x, train_y, cfg.alpha_grid, cfg.rho_grid, cfg.folds, cfg.seed);
    }
    ElasticNetModel model = train_elastic_net(train_x, train_y, alpha, rho);

    std::vector<size_t> fold_hits(kPrecisionAtNs.size(), 0);
    size_t fold_instances = 0;
    double fold_p = 0.0, fold_r = 0.0, fold_f = 0.0;
    for (size_t i = 0; i < n; ++i) {
      if (fold_of[i] != f) continue;
      ++fold_instances;
      AnnotationResult ranked = rank(model, prepared[i].candidates);
      std::vector<std::vector<std::string>> ranked_chunks;
      ranked_chunks.reserve(ranked.candidates.size());
      for (const auto& c : ranked.candidates) ranked_chunks.push_back(c.seg.chunks);
      for (size_t k = 0; k < kPrecisionAtNs.size(); ++k) {
        if (hit_at_n(ranked_chunks, prepared[i].golds_lower, kPrecisionAtNs[k])) {
          ++fold_hits[k];
          ++total_hits[k];
        }
      }
      std::vector<GoldLink> predicted;
      if (!ranked.candidates.empty()) {
        for (const auto& link : ranked.candidates.front().links)
          predicted.push_back(GoldLink{link.surface, link.page_id});
      }
      PrfScores prf = linking_prf(predicted, dataset[i].gold_links);
      fold_p += prf.precision;
      fold_r += prf.recall;
      fold_f += prf.f1;
      total_p += prf.precision;
      total_r += prf.recall;
      total_f += prf.f1;
    }
    report.fold_stats.push_back(pool_stats(fold_hits, fold_instances, fold_p, fold_r, fold_f));
  }

  FoldStats overall = pool_stats(total_hits, n, total_p, total_r, total_f);
  report.p_at_n = overall.p_at_n;
  report.link_precision = overall.link_precision;
  report.link_recall = overall.link_recall;
  report.link_f1 = overall.link_f1;
  return report;
}

std::string render_report(const EvalReport& report) {
  std::string out;
  out += "instances=" + std::to_string(report.instances) + "\n";
  out += "folds=" + std::to_string(report.folds) + "\n";
  for (const auto& [n, p] : report.p_at_n)
    out += "p_at_" + std::to_string(n) + "=" + format_fixed(p, 6) + "\n";
  out += "link_precision=" + format_fixed(report.link_precision, 6) + "\n";
  out += "link_recall=" + format_fixed(report.link_recall, 6) + "\n";
  out += "link_f1=" + format_fixed(report.link_f1, 6) + "\n";
  for (size_t f = 0; f < report.fold_stats.size(); ++f) {
    const FoldStats& fs = report.fold_stats[f];
    std::string prefix = "fold_" + std::to_string(f) + ".";
    out += prefix + "instances=" + std::to_string(fs.instances) + "\n";
    for (const auto& [n, p] : fs.p_at_n)
      out += prefix + "p_at_" + std::to_string(n) + "=" + format_fixed(p, 6) + "\n";
    out += prefix + "link_precision=" + format_fixed(fs.link_precision, 6) + "\n";
    out += prefix + "link_recall=" + format_fixed(fs.link_recall, 6) + "\n";
    out += prefix + "link_f1=" + format_fixed(fs.link_f1, 6) + "\n";
  }
  return out;
}

}  // namespace hashseg

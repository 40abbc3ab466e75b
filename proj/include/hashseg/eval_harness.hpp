// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef HASHSEG_EVAL_HARNESS_HPP
#define HASHSEG_EVAL_HARNESS_HPP

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hashseg/feature_ranker.hpp"

namespace hashseg {

struct EntitySpan {
  size_t start = 0;  // token index
  size_t end = 0;    // exclusive
  int64_t page_id = 0;
};

struct AnnotatedTweet {
  std::string text;
  std::vector<EntitySpan> entities;  // non-overlapping, within token bounds
};

// `text<TAB>start:end:page_id[,...]` per line, `-` for no entities.
std::vector<AnnotatedTweet> load_annotated_tweets(const std::string& path);

struct GoldLink {
  std::string surface;
  int64_t page_id = 0;
};

// One synthetic hashtag built from a tweet. gold_chunks concatenate to the
// hashtag (case-insensitively) and keep the original token casing.
struct LabeledInstance {
  std::string hashtag;
  std::vector<std::string> gold_chunks;
  std::vector<GoldLink> gold_links;
  std::string tweet_context;
};

struct SynthesisResult {
  std::vector<LabeledInstance> instances;
  size_t skipped_short = 0;  // tweets under two tokens
};

// One instance per entity (the entity window grows by 0–3 neighboring words,
// preferring the right side), or one window of 2–4 consecutive words for
// entity-free tweets. Deterministic for a given seed.
SynthesisResult synthesize_dataset(const std::vector<AnnotatedTweet>& tweets, uint32_t seed);

// True iff any of the first n ranked chunk sequences equals a gold sequence,
// compared case-insensitively.
bool hit_at_n(const std::vector<std::vector<std::string>>& ranked_chunks,
              const std::vector<std::vector<std::string>>& golds, size_t n);

struct PrfScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Page-id level match. Nothing predicted is vacuously precise; an empty gold
// set is vacuously recalled.
PrfScores linking_prf(const std::vector<GoldLink>& predicted, const std::vector<GoldLink>& gold);

inline constexpr std::array<size_t, 6> kPrecisionAtNs{1, 2, 3, 5, 10, 20};

struct EvalConfig {
  size_t folds = 5;
  uint32_t seed = 1;
  std::vector<double> alpha_grid{1e-4, 1e-3, 1e-2};
  std::vector<double> rho_grid{0.5};
  std::array<bool, FeatureVector::kCount> feature_mask{{true, true, true, true, true}};
};

struct FoldStats {
  size_t instances = 0;
  std::map<size_t, double> p_at_n;
  double link_precision = 0.0;
  double link_recall = 0.0;
  double link_f1 = 0.0;
};

struct EvalReport {
  size_t instances = 0;
  size_t folds = 0;
  std::map<size_t, double> p_at_n;  // pooled over all instances
  double link_precision = 0.0;
  double link_recall = 0.0;
  double link_f1 = 0.0;
  std::vector<FoldStats> fold_stats;
};

// Stable key=value lines (`p_at_1`, `link_f1`, `fold_0.p_at_1`, ...).
std::string render_report(const EvalReport& report);

// Candidates and features are computed once per instance; each fold trains
// an elastic net on the other folds' rows (gold candidates labeled 1) and
// ranks the held-out instances.
EvalReport kfold_evaluate(const std::vector<LabeledInstance>& dataset, const ModelSet& models,
                          const EvalConfig& cfg);

// Per-instance candidate/feature/label rows; shared by kfold_evaluate and
// the training command.
struct InstanceData {
  std::vector<RankedCandidate> candidates;
  std::vector<double> labels;
  std::vector<std::vector<std::string>> golds_lower;
};

InstanceData prepare_instance(const LabeledInstance& instance, const ModelSet& models,
                              const std::array<bool, FeatureVector::kCount>& feature_mask);

}  // namespace hashseg

#endif

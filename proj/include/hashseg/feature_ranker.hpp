// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef HASHSEG_FEATURE_RANKER_HPP
#define HASHSEG_FEATURE_RANKER_HPP

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "hashseg/context_similarity.hpp"
#include "hashseg/knowledge_base.hpp"
#include "hashseg/ngram_lm.hpp"
#include "hashseg/segmentation.hpp"

namespace hashseg {

// Maximal run of >=2 capitals, or a single capital with its trailing
// lowercase extension. Offsets index the sigil-stripped hashtag body.
struct CapCluster {
  size_t start = 0;
  size_t end = 0;  // exclusive
  std::string text;
};

// All-lowercase and all-uppercase bodies carry no casing signal and yield
// no clusters.
std::vector<CapCluster> capitalization_clusters(std::string_view raw_hashtag);

// Number of clusters whose span is not contained in a single chunk. Merging
// several clusters into one chunk is intact; splitting one is a violation.
size_t capitalization_score(std::string_view raw_hashtag, const std::vector<std::string>& chunks);

// The five per-candidate features. unigram/bigram are log10 scores; the
// other three live in [0,1].
struct FeatureVector {
  double unigram = 0.0;
  double bigram = 0.0;
  double context = 0.0;
  double capitalization = 0.0;
  double relatedness = 0.0;

  static constexpr size_t kCount = 5;
  std::array<double, kCount> to_array() const {
    return {unigram, bigram, context, capitalization, relatedness};
  }
  static FeatureVector from_array(const std::array<double, kCount>& a) {
    return FeatureVector{a[0], a[1], a[2], a[3], a[4]};
  }
};

// Zeroes the features whose mask entry is false; used for ablations.
FeatureVector mask_features(const FeatureVector& f, const std::array<bool, FeatureVector::kCount>& keep);

// Everything feature extraction needs. Pointers are borrowed and must
// outlive the ModelSet.
struct ModelSet {
  const UnigramModel* unigrams = nullptr;
  const BigramModel* bigrams = nullptr;
  const WordLenPrior* prior = nullptr;
  const Kb* kb = nullptr;
  const Taxonomy* taxonomy = nullptr;
  const ContentLexicon* lexicon = nullptr;
  SeederConfig seeder;
  double link_threshold = Kb::kDefaultLinkThreshold;
};

// Tweet-side context shared by every candidate of one hashtag: word tokens
// with '#'-prefixed tokens dropped, plus the mention surfaces found in them.
struct TweetContext {
  std::vector<std::string> tokens;
  std::vector<std::string> mention_surfaces;
};

TweetContext make_tweet_context(const Kb& kb, std::string_view tweet_text);

// Feature vector for one candidate segmentation; optionally also reports the
// entity links resolved for it.
FeatureVector extract_features(const ModelSet& models, const Segmentation& candidate,
                               std::string_view raw_hashtag, const TweetContext& ctx,
                               std::vector<EntityLink>* links_out = nullptr);
FeatureVector extract_features(const ModelSet& models, const Segmentation& candidate,
                               std::string_view raw_hashtag, std::string_view tweet_text,
                               std::vector<EntityLink>* links_out = nullptr);

// Linear model over standardized features. Prediction is
// w · ((f − mean) / std); standardization parameters come from training.
struct ElasticNetModel {
  static constexpr std::string_view kFormatVersion = "hashseg.model.v1";

  std::array<double, FeatureVector::kCount> weights{};
  std::array<double, FeatureVector::kCount> means{};
  std::array<double, FeatureVector::kCount> stds{{1, 1, 1, 1, 1}};
  double alpha = 0.0;
  double rho = 0.0;

  double predict(const FeatureVector& f) const;

  // Unit weights with identity standardization; scores candidates by the
  // plain sum of their features.
  static ElasticNetModel equal_weights();

  // Plain-text persistence: version line, then weights, means, stds, alpha,
  // rho, one value per line at 17 significant digits.
  void save(const std::string& path) const;
  static ElasticNetModel load(const std::string& path);
};

struct TrainOptions {
  double tol = 1e-6;
  size_t max_iter = 10000;
  bool standardize = true;
};

struct TrainDiagnostics {
  std::vector<double> objective_history;  // one entry per completed sweep
  size_t sweeps = 0;
  bool converged = false;
};

// Cyclic coordinate descent with soft-thresholding on
//   1/(2n)||Xw − y||² + αρ||w||₁ + α(1−ρ)/2 ||w||₂².
// Columns are used as given (no standardization); rows must be rectangular.
std::vector<double> elastic_net_coordinate_descent(const std::vector<std::vector<double>>& rows,
                                                   const std::vector<double>& y, double alpha,
                                                   double rho, const TrainOptions& opt = {},
                                                   TrainDiagnostics* diag = nullptr);

// Standardizes the feature matrix (unless opt.standardize is off), fits by
// coordinate descent, and packages the model. Labels must be 0 or 1 and at
// least 5 samples are required.
ElasticNetModel train_elastic_net(const std::vector<FeatureVector>& features,
                                  const std::vector<double>& labels, double alpha, double rho,
                                  const TrainOptions& opt = {}, TrainDiagnostics* diag = nullptr);

// Grid search minimizing mean validation MSE over seeded deterministic
// folds. Ties prefer the larger alpha, then the larger rho.
std::pair<double, double> cross_validate(const std::vector<FeatureVector>& features,
                                         const std::vector<double>& labels,
                                         const std::vector<double>& alpha_grid,
                                         const std::vector<double>& rho_grid, size_t folds,
                                         uint32_t seed);

struct RankedCandidate {
  Segmentation seg;
  FeatureVector features;
  double score = 0.0;
  std::vector<EntityLink> links;
};

struct AnnotationResult {
  std::vector<RankedCandidate> candidates;  // score descending
};

// Scores and sorts candidates; ties go to fewer chunks, then lexicographic
// chunk order.
AnnotationResult rank(const ElasticNetModel& model, std::vector<RankedCandidate> candidates);

// Full pipeline for one hashtag: seed, featurize, rank.
AnnotationResult annotate(const ModelSet& models, const ElasticNetModel& model,
                          std::string_view raw_hashtag, std::string_view tweet_text);

}  // namespace hashseg

#endif

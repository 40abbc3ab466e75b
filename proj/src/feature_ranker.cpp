// Apache License, Version 2.0, refer to LICENSE.txt

#include "hashseg/feature_ranker.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "hashseg/io_util.hpp"
#include "hashseg/random_util.hpp"
#include "hashseg/text_util.hpp"

namespace hashseg {

std::vector<CapCluster> capitalization_clusters(std::string_view raw_hashtag) {
  std::string_view body = strip_sigil(raw_hashtag);
  size_t upper = 0, lower = 0;
  for (char c : body) {
    if (is_ascii_upper(c)) ++upper;
    else if (is_ascii_lower(c)) ++lower;
  }
  if (upper == 0 || lower == 0) return {};

  std::vector<CapCluster> out;
  size_t i = 0;
  while (i < body.size()) {
    if (!is_ascii_upper(body[i])) {
      ++i;
      continue;
    }
    size_t run_end = i;
    while (run_end < body.size() && is_ascii_upper(body[run_end])) ++run_end;
    size_t end = run_end;
    if (run_end - i == 1) {
      // lone capital: the cluster runs to the character before the next one
      while (end < body.size() && !is_ascii_upper(body[end])) ++end;
    }
    out.push_back(CapCluster{i, end, std::string(body.substr(i, end - i))});
    i = run_end == end ? run_end : end;
  }
  return out;
}

size_t capitalization_score(std::string_view raw_hashtag,
                            const std::vector<std::string>& chunks) {
  std::string_view body = strip_sigil(raw_hashtag);
  std::string joined;
  for (const auto& c : chunks) joined += c;
  if (to_lower(joined) != to_lower(body))
    throw std::invalid_argument("chunks do not reconstruct the hashtag body");

  std::vector<CapCluster> clusters = capitalization_clusters(raw_hashtag);
  if (clusters.empty()) return 0;

  size_t violations = 0;
  for (const CapCluster& cl : clusters) {
    bool intact = false;
    size_t offset = 0;
    for (const auto& chunk : chunks) {
      size_t chunk_end = offset + chunk.size();
      if (cl.start >= offset && cl.end <= chunk_end) {
        intact = true;
        break;
      }
      offset = chunk_end;
    }
    if (!intact) ++violations;
  }
  return violations;
}

FeatureVector mask_features(const FeatureVector& f,
                            const std::array<bool, FeatureVector::kCount>& keep) {
  auto a = f.to_array();
  for (size_t i = 0; i < a.size(); ++i)
    if (!keep[i]) a[i] = 0.0;
  return FeatureVector::from_array(a);
}

TweetContext make_tweet_context(const Kb& kb, std::string_view tweet_text) {
  TweetContext ctx;
  for (const auto& raw : split_whitespace(tweet_text)) {
    if (!raw.empty() && raw[0] == '#') continue;  // hashtags are not context
    for (auto& tok : alnum_tokens(raw)) ctx.tokens.push_back(std::move(tok));
  }
  for (auto& span : kb.extract_mentions(ctx.tokens))
    ctx.mention_surfaces.push_back(std::move(span.surface));
  return ctx;
}

FeatureVector extract_features(const ModelSet& models, const Segmentation& candidate,
                               std::string_view raw_hashtag, const TweetContext& ctx,
                               std::vector<EntityLink>* links_out) {
  FeatureVector f;
  f.unigram = candidate.viterbi_score;
  f.bigram = models.bigrams->sequence_log_prob(*models.unigrams, candidate.chunks);
  f.context = context_score(*models.taxonomy, *models.lexicon, candidate.chunks,
                            join(ctx.tokens, " "));
  f.capitalization =
      1.0 / (1.0 + static_cast<double>(capitalization_score(raw_hashtag, candidate.chunks)));
  LinkResult linked =
      models.kb->link_hashtag_entities(candidate.chunks, ctx.mention_surfaces,
                                       models.link_threshold);
  f.relatedness = linked.relatedness_feature;
  if (links_out) *links_out = std::move(linked.links);
  return f;
}

FeatureVector extract_features(const ModelSet& models, const Segmentation& candidate,
                               std::string_view raw_hashtag, std::string_view tweet_text,
                               std::vector<EntityLink>* links_out) {
  TweetContext ctx = make_tweet_context(*models.kb, tweet_text);
  return extract_features(models, candidate, raw_hashtag, ctx, links_out);
}

double ElasticNetModel::predict(const FeatureVector& f) const {
  auto a = f.to_array();
  double score = 0.0;
  for (size_t i = 0; i < a.size(); ++i) score += weights[i] * (a[i] - means[i]) / stds[i];
  return score;
}

ElasticNetModel ElasticNetModel::equal_weights() {
  ElasticNetModel m;
  m.weights.fill(1.0);
  return m;
}

void ElasticNetModel::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw LoadError(path, 0, "cannot open file for writing");
  out << kFormatVersion << '\n';
  for (double w : weights) out << format_exact(w) << '\n';
  for (double m : means) out << format_exact(m) << '\n';
  for (double s : stds) out << format_exact(s) << '\n';
  out << format_exact(alpha) << '\n' << format_exact(rho) << '\n';
  if (!out) throw LoadError(path, 0, "write failed");
}

ElasticNetModel ElasticNetModel::load(const std::string& path) {
  LineReader r(path);
  std::string line;
  if (!r.next(line) || line != kFormatVersion)
    throw LoadError(path, r.line_no(), "unrecognized model version line");
  auto next_value = [&r, &line](const char* what) {
    if (!r.next(line)) r.fail(std::string("missing ") + what);
    double v;
    if (!parse_double(line, v)) r.fail(std::string("bad ") + what + " '" + line + "'");
    return v;
  };
  ElasticNetModel m;
  for (auto& w : m.weights) w = next_value("weight");
  for (auto& mean : m.means) mean = next_value("mean");
  for (auto& s : m.stds) {
    s = next_value("std");
    if (!(s > 0.0)) r.fail("std must be positive");
  }
  m.alpha = next_value("alpha");
  if (m.alpha < 0.0) r.fail("alpha must be non-negative");
  m.rho = next_value("rho");
  if (m.rho < 0.0 || m.rho > 1.0) r.fail("rho must be in [0,1]");
  if (r.next(line)) r.fail("trailing content after model");
  return m;
}

namespace {

double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

double elastic_net_objective(const std::vector<double>& residual, double alpha, double rho,
                             const std::vector<double>& w) {
  double sq = 0.0;
  for (double r : residual) sq += r * r;
  double l1 = 0.0, l2 = 0.0;
  for (double wi : w) {
    l1 += std::fabs(wi);
    l2 += wi * wi;
  }
  double n = static_cast<double>(residual.size());
  return sq / (2.0 * n) + alpha * rho * l1 + alpha * (1.0 - rho) / 2.0 * l2;
}

}  // namespace

std::vector<double> elastic_net_coordinate_descent(const std::vector<std::vector<double>>& rows,
                                                   const std::vector<double>& y, double alpha,
                                                   double rho, const TrainOptions& opt,
                                                   TrainDiagnostics* diag) {
  const size_t n = rows.size();
  if (n == 0) throw std::invalid_argument("training requires at least one sample");
  const size_t p = rows[0].size();
  for (const auto& row : rows)
    if (row.size() != p) throw std::invalid_argument("ragged feature matrix");
  if (y.size() != n) throw std::invalid_argument("label count does not match sample count");
  if (alpha < 0.0) throw std::invalid_argument("alpha must be non-negative");
  if (rho < 0.0 || rho > 1.0) throw std::invalid_argument("rho must be in [0,1]");

  // column-major copy; coordinate updates touch one column at a time
  std::vector<std::vector<double>> cols(p, std::vector<double>(n));
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < p; ++j) cols[j][i] = rows[i][j];

  std::vector<double> col_sq(p, 0.0);
  for (size_t j = 0; j < p; ++j) {
    double s = 0.0;
    for (double v : cols[j]) s += v * v;
    col_sq[j] = s / static_cast<double>(n);
  }

  std::vector<double> w(p, 0.0);
  std::vector<double> residual = y;  // r = y − Xw, and w starts at 0
  const double l1_pen = alpha * rho;
  const double l2_pen = alpha * (1.0 - rho);

  if (diag) *diag = TrainDiagnostics{};
  bool converged = false;
  size_t sweep = 0;
  for (; sweep < opt.max_iter && !converged; ++sweep) {
    double max_delta = 0.0;
    for (size_t j = 0; j < p; ++j) {
      double dot = 0.0;
      for (size_t i = 0; i < n; ++i) dot += cols[j][i] * residual[i];
      double z = dot / static_cast<double>(n) + col_sq[j] * w[j];
      double denom = col_sq[j] + l2_pen;
      double w_new = denom > 0.0 ? soft_threshold(z, l1_pen) / denom : 0.0;
      double delta = w_new - w[j];
      if (delta != 0.0) {
        for (size_t i = 0; i < n; ++i) residual[i] -= cols[j][i] * delta;
        w[j] = w_new;
      }
      max_delta = std::max(max_delta, std::fabs(delta));
    }
    if (diag)
      diag->objective_history.push_back(elastic_net_objective(residual, alpha, rho, w));
    converged = max_delta < opt.tol;
  }
  if (diag) {
    diag->sweeps = sweep;
    diag->converged = converged;
  }
  return w;
}

namespace {

// shared by train_elastic_net and cross_validate; the public entry point
// additionally enforces the 5-sample floor
ElasticNetModel fit_standardized(const std::vector<FeatureVector>& features,
                                 const std::vector<double>& labels, double alpha, double rho,
                                 const TrainOptions& opt, TrainDiagnostics* diag) {
  const size_t n = features.size();
  constexpr size_t p = FeatureVector::kCount;
  if (labels.size() != n) throw std::invalid_argument("label count does not match sample count");
  for (double y : labels)
    if (y != 0.0 && y != 1.0) throw std::invalid_argument("labels must be 0 or 1");

  ElasticNetModel model;
  model.alpha = alpha;
  model.rho = rho;
  if (opt.standardize) {
    std::array<double, p> mean{}, var{};
    for (const auto& f : features) {
      auto a = f.to_array();
      for (size_t j = 0; j < p; ++j) mean[j] += a[j];
    }
    for (size_t j = 0; j < p; ++j) mean[j] /= static_cast<double>(n);
    for (const auto& f : features) {
      auto a = f.to_array();
      for (size_t j = 0; j < p; ++j) var[j] += (a[j] - mean[j]) * (a[j] - mean[j]);
    }
    for (size_t j = 0; j < p; ++j) {
      // population variance; a constant column keeps std 1 and lets the
      // regularizer (or the zero-column guard) drive its weight to 0
      double v = var[j] / static_cast<double>(n);
      model.means[j] = mean[j];
      model.stds[j] = v > 0.0 ? std::sqrt(v) : 1.0;
    }
  }

  std::vector<std::vector<double>> rows(n, std::vector<double>(p));
  for (size_t i = 0; i < n; ++i) {
    auto a = features[i].to_array();
    for (size_t j = 0; j < p; ++j) rows[i][j] = (a[j] - model.means[j]) / model.stds[j];
  }
  std::vector<double> w = elastic_net_coordinate_descent(rows, labels, alpha, rho, opt, diag);
  std::copy(w.begin(), w.end(), model.weights.begin());
  return model;
}

}  // namespace

ElasticNetModel train_elastic_net(const std::vector<FeatureVector>& features,
                                  const std::vector<double>& labels, double alpha, double rho,
                                  const TrainOptions& opt, TrainDiagnostics* diag) {
  if (features.size() < 5) throw std::invalid_argument("training requires at least 5 samples");
  return fit_standardized(features, labels, alpha, rho, opt, diag);
}

std::pair<double, double> cross_validate(const std::vector<FeatureVector>& features,
                                         const std::vector<double>& labels,
                                         const std::vector<double>& alpha_grid,
                                         const std::vector<double>& rho_grid, size_t folds,
                                         uint32_t seed) {
  const size_t n = features.size();
  if (alpha_grid.empty() || rho_grid.empty())
    throw std::invalid_argument("parameter grids must be non-empty");
  if (folds < 2) throw std::invalid_argument("cross validation requires at least 2 folds");
  if (n < folds) throw std::invalid_argument("fewer samples than folds");
  if (labels.size() != n) throw std::invalid_argument("label count does not match sample count");

  // shuffled round-robin assignment: stable for a given seed
  std::vector<size_t> fold_of(n);
  {
    DetRng rng(seed);
    std::vector<size_t> perm = rng.permutation(n);
    for (size_t i = 0; i < n; ++i) fold_of[perm[i]] = i % folds;
  }

  double best_alpha = 0.0, best_rho = 0.0, best_mse = 0.0;
  bool have_best = false;
  for (double alpha : alpha_grid) {
    for (double rho : rho_grid) {
      double mse_sum = 0.0;
      for (size_t f = 0; f < folds; ++f) {
        std::vector<FeatureVector> train_x;
        std::vector<double> train_y;
        std::vector<size_t> val_idx;
        for (size_t i = 0; i < n; ++i) {
          if (fold_of[i] == f) val_idx.push_back(i);
          else {
            train_x.push_back(features[i]);
            train_y.push_back(labels[i]);
          }
        }
        ElasticNetModel m = fit_standardized(train_x, train_y, alpha, rho, TrainOptions{}, nullptr);
        double se = 0.0;
        for (size_t i : val_idx) {
          double d = m.predict(features[i]) - labels[i];
          se += d * d;
        }
        mse_sum += val_idx.empty() ? 0.0 : se / static_cast<double>(val_idx.size());
      }
      double mean_mse = mse_sum / static_cast<double>(folds);
      bool take = !have_best || mean_mse < best_mse ||
                  (mean_mse == best_mse &&
                   (alpha > best_alpha || (alpha == best_alpha && rho > best_rho)));
      if (take) {
        best_mse = mean_mse;
        best_alpha = alpha;
        best_rho = rho;
        have_best = true;
      }
    }
  }
  return {best_alpha, best_rho};
}

AnnotationResult rank(const ElasticNetModel& model, std::vector<RankedCandidate> candidates) {
  for (auto& c : candidates) c.score = model.predict(c.features);
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const RankedCandidate& a, const RankedCandidate& b) {
                     if (a.score != b.score) return a.score > b.score;
                     return chunks_less(a.seg.chunks, b.seg.chunks);
                   });
  return AnnotationResult{std::move(candidates)};
}

AnnotationResult annotate(const ModelSet& models, const ElasticNetModel& model,
                          std::string_view raw_hashtag, std::string_view tweet_text) {
  std::vector<SeededCandidate> seeds =
      seed_segmentations(*models.unigrams, *models.prior, raw_hashtag, models.seeder);
  TweetContext ctx = make_tweet_context(*models.kb, tweet_text);
  std::vector<RankedCandidate> candidates;
  candidates.reserve(seeds.size());
  for (auto& s : seeds) {
    RankedCandidate c;
    c.features = extract_features(models, s.seg, raw_hashtag, ctx, &c.links);
    c.seg = std::move(s.seg);
    candidates.push_back(std::move(c));
  }
  return rank(model, std::move(candidates));
}

}  // namespace hashseg

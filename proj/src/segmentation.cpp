// Apache License, Version 2.0, refer to LICENSE.txt

#include "hashseg/segmentation.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

#include "hashseg/text_util.hpp"

namespace hashseg {

void SeederConfig::validate() const {
  if (min_len < 1 || min_len > max_len)
    throw std::invalid_argument("seeder requires 1 <= min_len <= max_len");
  if (top_k < 1) throw std::invalid_argument("seeder requires top_k >= 1");
}

bool chunks_less(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

std::string_view strip_sigil(std::string_view hashtag) {
  if (!hashtag.empty() && hashtag.front() == '#') hashtag.remove_prefix(1);
  return hashtag;
}

namespace {

// Candidate ordering shared by the DP and the exhaustive oracle: higher score
// wins, then fewer chunks, then the lexicographically smaller sequence.
bool better_than(double score_a, const std::vector<std::string>& a, double score_b,
                 const std::vector<std::string>& b) {
  if (score_a != score_b) return score_a > score_b;
  return chunks_less(a, b);
}

}  // namespace

Segmentation viterbi_word_seg(const UnigramModel& lm, std::string_view text) {
  std::string s = to_lower(strip_sigil(text));
  if (s.empty()) throw std::invalid_argument("cannot segment an empty string");
  const size_t n = s.size();

  // prefix log-probabilities of single chunks, indexed [i][j) via flat lookup
  // on demand; strings are short so recomputing substrings is fine.
  std::vector<double> best_score(n + 1, 0.0);
  std::vector<std::vector<std::string>> best_chunks(n + 1);
  for (size_t j = 1; j <= n; ++j) {
    bool have = false;
    double score = 0.0;
    std::vector<std::string> chunks;
    for (size_t i = 0; i < j; ++i) {
      std::string chunk = s.substr(i, j - i);
      double cand_score = best_score[i] + lm.log_prob(chunk);
      // materialize the candidate sequence only when it can win
      if (!have || cand_score >= score) {
        std::vector<std::string> cand_chunks = best_chunks[i];
        cand_chunks.push_back(std::move(chunk));
        if (!have || better_than(cand_score, cand_chunks, score, chunks)) {
          score = cand_score;
          chunks = std::move(cand_chunks);
          have = true;
        }
      }
    }
    best_score[j] = score;
    best_chunks[j] = std::move(chunks);
  }
  return Segmentation{std::move(best_chunks[n]), best_score[n]};
}

Segmentation brute_force_best_seg(const UnigramModel& lm, std::string_view text) {
  std::string s = to_lower(strip_sigil(text));
  if (s.empty()) throw std::invalid_argument("cannot segment an empty string");
  if (s.size() > 20) throw std::invalid_argument("brute force segmentation capped at length 20");
  const size_t n = s.size();

  bool have = false;
  double best = 0.0;
  std::vector<std::string> best_chunks;
  // bit i of mask set = split after character i
  for (uint64_t mask = 0; mask < (uint64_t{1} << (n - 1)); ++mask) {
    std::vector<std::string> chunks;
    double score = 0.0;
    size_t start = 0;
    for (size_t i = 0; i + 1 < n; ++i) {
      if (mask & (uint64_t{1} << i)) {
        chunks.push_back(s.substr(start, i + 1 - start));
        score += lm.log_prob(chunks.back());
        start = i + 1;
      }
    }
    chunks.push_back(s.substr(start));
    score += lm.log_prob(chunks.back());
    if (!have || better_than(score, chunks, best, best_chunks)) {
      best = score;
      best_chunks = std::move(chunks);
      have = true;
    }
  }
  return Segmentation{std::move(best_chunks), best};
}

double viterbi_score_or_zero(const UnigramModel& lm, std::string_view text) {
  if (text.empty()) return 0.0;
  return viterbi_word_seg(lm, text).viterbi_score;
}

std::vector<WindowTriplet> enumerate_windows(std::string_view body, const SeederConfig& cfg) {
  cfg.validate();
  if (body.empty()) throw std::invalid_argument("cannot enumerate windows of an empty body");
  std::vector<WindowTriplet> out;
  const size_t n = body.size();
  const size_t hi = std::min(cfg.max_len, n);
  for (size_t len = cfg.min_len; len <= hi; ++len) {
    for (size_t start = 0; start + len <= n; ++start) {
      out.push_back(WindowTriplet{std::string(body.substr(0, start)),
                                  std::string(body.substr(start, len)),
                                  std::string(body.substr(start + len))});
    }
  }
  return out;
}

double sliding_window_score(const UnigramModel& lm, const WordLenPrior& prior,
                            const WindowTriplet& triplet, const SeederConfig& cfg) {
  double middle = cfg.window_constant * lm.log_prob(triplet.window) *
                  prior.prob(triplet.window.size());
  return viterbi_score_or_zero(lm, triplet.left) + middle +
         viterbi_score_or_zero(lm, triplet.right);
}

namespace {

std::string chunk_join_key(const std::vector<std::string>& chunks) {
  std::string key;
  for (const auto& c : chunks) {
    key += c;
    key.push_back('\x1f');
  }
  return key;
}

double viterbi_sum(const UnigramModel& lm, const std::vector<std::string>& chunks) {
  double sum = 0.0;
  for (const auto& c : chunks) sum += lm.log_prob(c);
  return sum;
}

}  // namespace

std::vector<SeededCandidate> seed_segmentations(const UnigramModel& lm,
                                                const WordLenPrior& prior,
                                                std::string_view hashtag,
                                                const SeederConfig& cfg) {
  cfg.validate();
  std::string body = to_lower(strip_sigil(hashtag));
  if (body.empty()) throw std::invalid_argument("cannot seed an empty hashtag body");

  std::vector<SeededCandidate> pool;
  std::unordered_map<std::string, size_t> dedup;
  auto add = [&](Segmentation seg, double seed_score) {
    std::string key = chunk_join_key(seg.chunks);
    auto [it, inserted] = dedup.emplace(std::move(key), pool.size());
    if (inserted) {
      pool.push_back(SeededCandidate{std::move(seg), seed_score});
    } else if (seed_score > pool[it->second].seed_score) {
      pool[it->second].seed_score = seed_score;
    }
  };

  for (const WindowTriplet& t : enumerate_windows(body, cfg)) {
    double score = sliding_window_score(lm, prior, t, cfg);
    std::vector<std::string> chunks;
    if (!t.left.empty()) chunks = viterbi_word_seg(lm, t.left).chunks;
    chunks.push_back(t.window);
    if (!t.right.empty()) {
      for (auto& c : viterbi_word_seg(lm, t.right).chunks) chunks.push_back(std::move(c));
    }
    double viterbi = viterbi_sum(lm, chunks);
    add(Segmentation{std::move(chunks), viterbi}, score);
  }

  Segmentation viterbi_best = viterbi_word_seg(lm, body);
  std::string viterbi_key = chunk_join_key(viterbi_best.chunks);
  add(Segmentation{viterbi_best.chunks, viterbi_best.viterbi_score}, viterbi_best.viterbi_score);

  std::sort(pool.begin(), pool.end(), [](const SeededCandidate& a, const SeededCandidate& b) {
    if (a.seed_score != b.seed_score) return a.seed_score > b.seed_score;
    return chunks_less(a.seg.chunks, b.seg.chunks);
  });

  if (pool.size() > cfg.top_k) {
    // The Viterbi segmentation must survive truncation; it replaces the last
    // kept slot when it would otherwise fall below the cut.
    size_t viterbi_pos = pool.size();
    for (size_t i = 0; i < pool.size(); ++i) {
      if (chunk_join_key(pool[i].seg.chunks) == viterbi_key) {
        viterbi_pos = i;
        break;
      }
    }
    if (viterbi_pos >= cfg.top_k) {
      pool[cfg.top_k - 1] = std::move(pool[viterbi_pos]);
    }
    pool.resize(cfg.top_k);
  }
  return pool;
}

}  // namespace hashseg

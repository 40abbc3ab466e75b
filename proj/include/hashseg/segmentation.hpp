// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef HASHSEG_SEGMENTATION_HPP
#define HASHSEG_SEGMENTATION_HPP

#include <string>
#include <string_view>
#include <vector>

#include "hashseg/ngram_lm.hpp"

namespace hashseg {

// One split of an unspaced string into chunks. Chunks are lowercased and
// concatenate back to the lowercased input. viterbi_score is the sum of
// unigram log10 probabilities over the chunks.
struct Segmentation {
  std::vector<std::string> chunks;
  double viterbi_score = 0.0;

  bool operator==(const Segmentation& other) const { return chunks == other.chunks; }
};

// (left, window, right) split of a hashtag body; left and right may be empty,
// the window length is bounded by SeederConfig.
struct WindowTriplet {
  std::string left;
  std::string window;
  std::string right;
};

struct SeederConfig {
  size_t min_len = 2;
  size_t max_len = 6;
  double window_constant = 1.0;
  size_t top_k = 20;

  void validate() const;
};

// A seeded candidate: the segmentation plus the score it was seeded with
// (sliding-window score, or the Viterbi score for the injected candidate).
struct SeededCandidate {
  Segmentation seg;
  double seed_score = 0.0;
};

// Deterministic tie order for equal scores: fewer chunks first, then the
// lexicographically smaller chunk sequence.
bool chunks_less(const std::vector<std::string>& a, const std::vector<std::string>& b);

// Removes a single leading '#' if present.
std::string_view strip_sigil(std::string_view hashtag);

// Best segmentation by dynamic programming over split positions, maximizing
// the sum of unigram log10 probabilities. Input is lowercased internally.
Segmentation viterbi_word_seg(const UnigramModel& lm, std::string_view text);

// Exhaustive scorer over all 2^(n-1) splits; same tie order as the DP.
// Guarded to length <= 20.
Segmentation brute_force_best_seg(const UnigramModel& lm, std::string_view text);

// Viterbi score of a possibly-empty string; empty scores 0. Used by the
// sliding-window score where the window touches an edge.
double viterbi_score_or_zero(const UnigramModel& lm, std::string_view text);

// All (start, len) window placements with len in [min_len, min(max_len, n)].
std::vector<WindowTriplet> enumerate_windows(std::string_view body, const SeederConfig& cfg);

// ViterbiScore(A) + constant * log10(P(X)) * P(len(X)) + ViterbiScore(B).
double sliding_window_score(const UnigramModel& lm, const WordLenPrior& prior,
                            const WindowTriplet& triplet, const SeederConfig& cfg);

// Top-k candidate segmentations for a hashtag: one candidate per window
// triplet (BestSeg(A) ++ [X] ++ BestSeg(B)), deduplicated by chunk sequence
// keeping the best score, with the plain Viterbi segmentation always present
// in the output. Sorted by seed score, descending.
std::vector<SeededCandidate> seed_segmentations(const UnigramModel& lm,
                                                const WordLenPrior& prior,
                                                std::string_view hashtag,
                                                const SeederConfig& cfg);

}  // namespace hashseg

#endif

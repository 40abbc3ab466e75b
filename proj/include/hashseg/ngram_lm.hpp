// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef HASHSEG_NGRAM_LM_HPP
#define HASHSEG_NGRAM_LM_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace hashseg {

// Unigram counts over a lowercased vocabulary. Unseen words back off to
// 1 / (total_tokens * 10^len(word)), so longer gibberish pays a steeper
// penalty. All probabilities are log10.
//
// Immutable after construction; queries are safe from concurrent threads.
class UnigramModel {
 public:
  // Loads `word<TAB>count` lines. Words are lowercased, duplicates are
  // summed. '#' comment lines and blank lines are skipped.
  static UnigramModel load(const std::string& path);
  static UnigramModel from_counts(const std::vector<std::pair<std::string, uint64_t>>& counts);

  // log10 P(word). Uppercase input is folded before lookup.
  double log_prob(std::string_view word) const;

  bool contains(std::string_view word) const;
  uint64_t count(std::string_view word) const;
  uint64_t total_tokens() const { return total_; }
  size_t vocab_size() const { return counts_.size(); }

 private:
  std::unordered_map<std::string, uint64_t> counts_;
  uint64_t total_ = 0;
};

// Bigram counts with sentence boundary markers. Unobserved pairs fall back
// to the unigram probability of the second word plus a fixed log10 penalty,
// keeping observed pairs strictly preferred.
class BigramModel {
 public:
  static constexpr std::string_view kSentenceStart = "<s>";
  static constexpr std::string_view kSentenceEnd = "</s>";
  static constexpr double kDefaultBackoffPenalty = -1.0;

  // Loads `word1<SPACE>word2<TAB>count` lines. The end marker may not occur
  // first in a pair, the start marker may not occur second.
  static BigramModel load(const std::string& path);
  static BigramModel from_counts(
      const std::vector<std::pair<std::pair<std::string, std::string>, uint64_t>>& counts);

  // log10 P(w2 | w1).
  double log_prob(const UnigramModel& fallback, std::string_view w1, std::string_view w2) const;

  // log10 P(<s> c0 c1 ... cn </s>) as the sum over the transition chain.
  double sequence_log_prob(const UnigramModel& fallback,
                           const std::vector<std::string>& chunks) const;

  uint64_t pair_count(std::string_view w1, std::string_view w2) const;
  uint64_t context_total(std::string_view w1) const;
  size_t pair_vocab_size() const { return pairs_.size(); }

  double backoff_penalty() const { return backoff_penalty_; }
  void set_backoff_penalty(double p) { backoff_penalty_ = p; }

 private:
  // Pairs keyed "w1 w2"; words never contain spaces.
  std::unordered_map<std::string, uint64_t> pairs_;
  std::unordered_map<std::string, uint64_t> context_totals_;
  double backoff_penalty_ = kDefaultBackoffPenalty;
};

// P(word length) table for lengths 1..max_len with a single tail value for
// anything longer.
class WordLenPrior {
 public:
  // Loads `length<TAB>probability` lines; an optional `*<TAB>probability`
  // line sets the tail value (default 1e-9).
  static WordLenPrior load(const std::string& path);
  static WordLenPrior from_table(std::map<size_t, double> probs, double tail_prob);
  // Builds the table from observed token lengths, reserving one pseudo-count
  // of mass for the tail: P(len) = count/(n+1), tail = 1/(n+1).
  static WordLenPrior from_lengths(const std::vector<size_t>& lengths);

  double prob(size_t len) const;
  double tail_prob() const { return tail_prob_; }
  size_t max_len() const { return probs_.empty() ? 0 : probs_.rbegin()->first; }
  const std::map<size_t, double>& table() const { return probs_; }

  void save(const std::string& path) const;

 private:
  std::map<size_t, double> probs_;
  double tail_prob_ = 1e-9;
};

}  // namespace hashseg

#endif

// Apache License, Version 2.0, refer to LICENSE.txt

#include "hashseg/ngram_lm.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "hashseg/io_util.hpp"
#include "hashseg/text_util.hpp"

namespace hashseg {

namespace {

bool has_whitespace(std::string_view w) {
  return w.find_first_of(" \t\r\n") != std::string_view::npos;
}

std::string fold_if_needed(std::string_view word) {
  for (char c : word) {
    if (is_ascii_upper(c)) return to_lower(word);
  }
  return std::string(word);
}

}  // namespace

UnigramModel UnigramModel::load(const std::string& path) {
  LineReader reader(path);
  UnigramModel model;
  std::string line;
  size_t rows = 0;
  while (reader.next(line)) {
    size_t tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) reader.fail("expected word<TAB>count");
    std::string word = to_lower(std::string_view(line).substr(0, tab));
    if (has_whitespace(word)) reader.fail("word contains whitespace");
    uint64_t count = 0;
    if (!parse_u64(std::string_view(line).substr(tab + 1), count) || count == 0)
      reader.fail("count must be a positive integer");
    model.counts_[word] += count;
    model.total_ += count;
    ++rows;
  }
  if (rows == 0) throw LoadError(path, 0, "no unigram entries");
  return model;
}

UnigramModel UnigramModel::from_counts(
    const std::vector<std::pair<std::string, uint64_t>>& counts) {
  UnigramModel model;
  for (const auto& [word, count] : counts) {
    if (word.empty() || has_whitespace(word))
      throw std::invalid_argument("unigram word must be non-empty without whitespace");
    if (count == 0) throw std::invalid_argument("unigram count must be >= 1");
    model.counts_[to_lower(word)] += count;
    model.total_ += count;
  }
  if (model.counts_.empty()) throw std::invalid_argument("empty unigram model");
  return model;
}

double UnigramModel::log_prob(std::string_view word) const {
  if (word.empty()) throw std::invalid_argument("unigram lookup on empty word");
  std::string folded = fold_if_needed(word);
  auto it = counts_.find(folded);
  if (it != counts_.end()) {
    return std::log10(static_cast<double>(it->second) / static_cast<double>(total_));
  }
  // log10(1 / (total * 10^len)) = -log10(total) - len
  return -std::log10(static_cast<double>(total_)) - static_cast<double>(folded.size());
}

bool UnigramModel::contains(std::string_view word) const {
  return counts_.find(fold_if_needed(word)) != counts_.end();
}

uint64_t UnigramModel::count(std::string_view word) const {
  auto it = counts_.find(fold_if_needed(word));
  return it == counts_.end() ? 0 : it->second;
}

namespace {

std::string pair_key(std::string_view w1, std::string_view w2) {
  std::string key;
  key.reserve(w1.size() + 1 + w2.size());
  key.append(w1);
  key.push_back(' ');
  key.append(w2);
  return key;
}

}  // namespace

BigramModel BigramModel::load(const std::string& path) {
  LineReader reader(path);
  BigramModel model;
  std::string line;
  while (reader.next(line)) {
    size_t tab = line.find('\t');
    if (tab == std::string::npos) reader.fail("expected word1 word2<TAB>count");
    std::string_view head = std::string_view(line).substr(0, tab);
    size_t space = head.find(' ');
    if (space == std::string::npos || space == 0 || space + 1 >= head.size())
      reader.fail("expected two space-separated words before the tab");
    std::string w1 = to_lower(head.substr(0, space));
    std::string w2 = to_lower(head.substr(space + 1));
    if (has_whitespace(w2)) reader.fail("bigram takes exactly two words");
    if (w1 == kSentenceEnd) reader.fail("end marker cannot start a bigram");
    if (w2 == kSentenceStart) reader.fail("start marker cannot end a bigram");
    uint64_t count = 0;
    if (!parse_u64(std::string_view(line).substr(tab + 1), count) || count == 0)
      reader.fail("count must be a positive integer");
    model.pairs_[pair_key(w1, w2)] += count;
    model.context_totals_[w1] += count;
  }
  return model;
}

BigramModel BigramModel::from_counts(
    const std::vector<std::pair<std::pair<std::string, std::string>, uint64_t>>& counts) {
  BigramModel model;
  for (const auto& [pair, count] : counts) {
    const auto& [w1, w2] = pair;
    if (w1.empty() || w2.empty()) throw std::invalid_argument("bigram words must be non-empty");
    if (w1 == kSentenceEnd || w2 == kSentenceStart)
      throw std::invalid_argument("bigram violates sentence boundary rules");
    if (count == 0) throw std::invalid_argument("bigram count must be >= 1");
    model.pairs_[pair_key(to_lower(w1), to_lower(w2))] += count;
    model.context_totals_[to_lower(w1)] += count;
  }
  return model;
}

double BigramModel::log_prob(const UnigramModel& fallback, std::string_view w1,
                             std::string_view w2) const {
  if (w1.empty() || w2.empty()) throw std::invalid_argument("bigram lookup on empty word");
  std::string f1 = fold_if_needed(w1);
  std::string f2 = fold_if_needed(w2);
  auto it = pairs_.find(pair_key(f1, f2));
  if (it != pairs_.end()) {
    uint64_t context = context_totals_.at(f1);
    return std::log10(static_cast<double>(it->second) / static_cast<double>(context));
  }
  return fallback.log_prob(f2) + backoff_penalty_;
}

double BigramModel::sequence_log_prob(const UnigramModel& fallback,
                                      const std::vector<std::string>& chunks) const {
  if (chunks.empty()) throw std::invalid_argument("sequence score of empty chunk list");
  double sum = log_prob(fallback, kSentenceStart, chunks.front());
  for (size_t i = 1; i < chunks.size(); ++i) sum += log_prob(fallback, chunks[i - 1], chunks[i]);
  sum += log_prob(fallback, chunks.back(), kSentenceEnd);
  return sum;
}

uint64_t BigramModel::pair_count(std::string_view w1, std::string_view w2) const {
  auto it = pairs_.find(pair_key(fold_if_needed(w1), fold_if_needed(w2)));
  return it == pairs_.end() ? 0 : it->second;
}

uint64_t BigramModel::context_total(std::string_view w1) const {
  auto it = context_totals_.find(fold_if_needed(w1));
  return it == context_totals_.end() ? 0 : it->second;
}

namespace {

void validate_prior(const std::map<size_t, double>& probs, double tail) {
  double sum = tail;
  for (const auto& [len, p] : probs) {
    if (len == 0) throw std::invalid_argument("word length prior for length 0");
    if (!(p > 0.0) || p > 1.0) throw std::invalid_argument("length probability outside (0, 1]");
    sum += p;
  }
  if (!(tail > 0.0) || tail > 1.0) throw std::invalid_argument("tail probability outside (0, 1]");
  if (sum > 1.0 + 1e-9) throw std::invalid_argument("length probabilities sum above 1");
}

}  // namespace

WordLenPrior WordLenPrior::load(const std::string& path) {
  LineReader reader(path);
  WordLenPrior prior;
  std::string line;
  bool saw_tail = false;
  while (reader.next(line)) {
    size_t tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) reader.fail("expected length<TAB>probability");
    std::string_view key = std::string_view(line).substr(0, tab);
    double p = 0.0;
    if (!parse_double(std::string_view(line).substr(tab + 1), p))
      reader.fail("probability does not parse");
    if (key == "*") {
      if (saw_tail) reader.fail("duplicate tail line");
      prior.tail_prob_ = p;
      saw_tail = true;
      continue;
    }
    uint64_t len = 0;
    if (!parse_u64(key, len) || len == 0) reader.fail("length must be a positive integer");
    if (!prior.probs_.emplace(static_cast<size_t>(len), p).second)
      reader.fail("duplicate length entry");
  }
  if (prior.probs_.empty()) throw LoadError(path, 0, "no length entries");
  try {
    validate_prior(prior.probs_, prior.tail_prob_);
  } catch (const std::invalid_argument& e) {
    throw LoadError(path, 0, e.what());
  }
  return prior;
}

WordLenPrior WordLenPrior::from_table(std::map<size_t, double> probs, double tail_prob) {
  validate_prior(probs, tail_prob);
  WordLenPrior prior;
  prior.probs_ = std::move(probs);
  prior.tail_prob_ = tail_prob;
  return prior;
}

WordLenPrior WordLenPrior::from_lengths(const std::vector<size_t>& lengths) {
  if (lengths.empty()) throw std::invalid_argument("no token lengths");
  std::map<size_t, uint64_t> counts;
  for (size_t len : lengths) {
    if (len == 0) throw std::invalid_argument("zero token length");
    ++counts[len];
  }
  double denom = static_cast<double>(lengths.size()) + 1.0;
  WordLenPrior prior;
  for (const auto& [len, c] : counts) prior.probs_[len] = static_cast<double>(c) / denom;
  prior.tail_prob_ = 1.0 / denom;
  return prior;
}

double WordLenPrior::prob(size_t len) const {
  if (len == 0) throw std::invalid_argument("word length must be >= 1");
  auto it = probs_.find(len);
  return it == probs_.end() ? tail_prob_ : it->second;
}

void WordLenPrior::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw LoadError(path, 0, "cannot open file for writing");
  for (const auto& [len, p] : probs_)
    out << len << '\t' << format_exact(p) << '\n';
  out << "*\t" << format_exact(tail_prob_) << '\n';
  if (!out) throw LoadError(path, 0, "write failed");
}

}  // namespace hashseg

// Apache License, Version 2.0, refer to LICENSE.txt

#include "hashseg/knowledge_base.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hashseg/io_util.hpp"
#include "hashseg/text_util.hpp"

namespace hashseg {

namespace {

constexpr double kPriorSumTolerance = 1e-9;

void sort_candidates(std::vector<CandidatePage>& v) {
  std::sort(v.begin(), v.end(), [](const CandidatePage& a, const CandidatePage& b) {
    if (a.prior != b.prior) return a.prior > b.prior;
    return a.page_id < b.page_id;
  });
}

}  // namespace

Kb::Builder& Kb::Builder::page(int64_t id, std::string title) {
  pages_.push_back(KbPage{id, std::move(title), {}});
  return *this;
}

Kb::Builder& Kb::Builder::mention(std::string surface, int64_t page_id, double prior) {
  mentions_.emplace_back(std::move(surface), CandidatePage{page_id, prior});
  return *this;
}

Kb::Builder& Kb::Builder::inlinks(int64_t page_id, std::vector<int64_t> sources) {
  inlinks_.emplace_back(page_id, std::move(sources));
  return *this;
}

Kb::Builder& Kb::Builder::total_pages(uint64_t w) {
  override_w_ = w;
  return *this;
}

Kb Kb::Builder::build() {
  Kb kb;
  for (auto& p : pages_) {
    int64_t id = p.id;
    if (!kb.pages_.emplace(id, std::move(p)).second)
      throw std::invalid_argument("duplicate page id " + std::to_string(id));
  }
  for (auto& [page_id, sources] : inlinks_) {
    auto it = kb.pages_.find(page_id);
    if (it == kb.pages_.end())
      throw std::invalid_argument("inlinks for unknown page " + std::to_string(page_id));
    std::sort(sources.begin(), sources.end());
    sources.erase(std::unique(sources.begin(), sources.end()), sources.end());
    it->second.inlinks = std::move(sources);
  }
  for (auto& [surface, cand] : mentions_) {
    if (!kb.pages_.count(cand.page_id))
      throw std::invalid_argument("mention '" + surface + "' references unknown page " +
                                  std::to_string(cand.page_id));
    if (!(cand.prior > 0.0) || cand.prior > 1.0)
      throw std::invalid_argument("mention '" + surface + "' has prior outside (0,1]");
    std::string key = to_lower(surface);
    auto& list = kb.mentions_[key];
    for (const auto& existing : list) {
      if (existing.page_id == cand.page_id)
        throw std::invalid_argument("duplicate candidate page " + std::to_string(cand.page_id) +
                                    " for mention '" + key + "'");
    }
    list.push_back(cand);
  }
  for (auto& [surface, list] : kb.mentions_) {
    double sum = 0.0;
    for (const auto& c : list) sum += c.prior;
    if (sum > 1.0 + kPriorSumTolerance)
      throw std::invalid_argument("priors for mention '" + surface + "' sum to " +
                                  std::to_string(sum));
    sort_candidates(list);
  }
  uint64_t stored = kb.pages_.size();
  if (override_w_ != 0 && override_w_ < stored)
    throw std::invalid_argument("total pages override below stored page count");
  kb.total_pages_ = override_w_ != 0 ? override_w_ : stored;
  return kb;
}

Kb Kb::load(const std::string& pages_path, const std::string& mentions_path,
            const std::string& inlinks_path, uint64_t total_pages_override) {
  Builder b;
  {
    LineReader r(pages_path);
    std::string line;
    while (r.next(line)) {
      size_t tab = line.find('\t');
      if (tab == std::string::npos || tab == 0 || tab + 1 >= line.size())
        r.fail("expected 'page_id<TAB>title'");
      int64_t id;
      if (!parse_i64(std::string_view(line).substr(0, tab), id))
        r.fail("bad page id '" + line.substr(0, tab) + "'");
      b.page(id, line.substr(tab + 1));
    }
  }
  {
    LineReader r(mentions_path);
    std::string line;
    while (r.next(line)) {
      size_t t1 = line.find('\t');
      size_t t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
      if (t1 == std::string::npos || t2 == std::string::npos || t1 == 0 || t2 + 1 >= line.size())
        r.fail("expected 'surface<TAB>page_id<TAB>prior'");
      std::string_view view(line);
      int64_t page_id;
      if (!parse_i64(view.substr(t1 + 1, t2 - t1 - 1), page_id)) r.fail("bad page id");
      double prior;
      if (!parse_double(view.substr(t2 + 1), prior)) r.fail("bad prior");
      b.mention(line.substr(0, t1), page_id, prior);
    }
  }
  {
    LineReader r(inlinks_path);
    std::string line;
    std::vector<int64_t> seen_targets;
    while (r.next(line)) {
      size_t tab = line.find('\t');
      if (tab == std::string::npos || tab == 0)
        r.fail("expected 'page_id<TAB>source,source,...'");
      std::string_view view(line);
      int64_t page_id;
      if (!parse_i64(view.substr(0, tab), page_id)) r.fail("bad page id");
      if (std::find(seen_targets.begin(), seen_targets.end(), page_id) != seen_targets.end())
        r.fail("duplicate inlinks line for page " + std::to_string(page_id));
      seen_targets.push_back(page_id);
      std::vector<int64_t> sources;
      std::string_view rest = view.substr(tab + 1);
      while (!rest.empty()) {
        size_t comma = rest.find(',');
        std::string_view item = rest.substr(0, comma);
        if (item.empty()) r.fail("empty source id");
        int64_t src;
        if (!parse_i64(item, src)) r.fail("bad source id '" + std::string(item) + "'");
        sources.push_back(src);
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
        if (rest.empty()) r.fail("trailing comma in source list");
      }
      b.inlinks(page_id, std::move(sources));
    }
  }
  b.total_pages(total_pages_override);
  try {
    return b.build();
  } catch (const std::invalid_argument& e) {
    throw LoadError(pages_path, 0, e.what());
  }
}

const KbPage& Kb::page(int64_t id) const {
  auto it = pages_.find(id);
  if (it == pages_.end())
    throw std::invalid_argument("unknown page id " + std::to_string(id));
  return it->second;
}

const std::vector<CandidatePage>& Kb::candidate_pages(std::string_view surface) const {
  static const std::vector<CandidatePage> kEmpty;
  auto it = mentions_.find(to_lower(surface));
  return it == mentions_.end() ? kEmpty : it->second;
}

double Kb::relatedness_uncached(int64_t pa, int64_t pb) const {
  const KbPage& a = page(pa);
  const KbPage& b = page(pb);
  if (pa == pb) return a.inlinks.empty() ? 0.0 : 1.0;
  if (a.inlinks.empty() || b.inlinks.empty()) return 0.0;

  size_t inter = 0;
  for (size_t i = 0, j = 0; i < a.inlinks.size() && j < b.inlinks.size();) {
    if (a.inlinks[i] < b.inlinks[j]) ++i;
    else if (a.inlinks[i] > b.inlinks[j]) ++j;
    else { ++inter; ++i; ++j; }
  }
  if (inter == 0) return 0.0;

  double hi = static_cast<double>(std::max(a.inlinks.size(), b.inlinks.size()));
  double lo = static_cast<double>(std::min(a.inlinks.size(), b.inlinks.size()));
  double num = std::log(hi) - std::log(static_cast<double>(inter));
  double den = std::log(static_cast<double>(total_pages_)) - std::log(lo);
  // A set at least as large as W makes the normalizer non-positive; the
  // measure is only informative when the intersection covers the larger set.
  if (den <= 0.0) return num <= 0.0 ? 1.0 : 0.0;
  double rel = 1.0 - num / den;
  return std::min(1.0, std::max(0.0, rel));
}

double Kb::relatedness(int64_t pa, int64_t pb) const {
  std::pair<int64_t, int64_t> key = std::minmax(pa, pb);
  {
    std::lock_guard<std::mutex> lock(memo_->mutex);
    auto it = memo_->cache.find(key);
    if (it != memo_->cache.end()) return it->second;
  }
  double rel = relatedness_uncached(pa, pb);
  std::lock_guard<std::mutex> lock(memo_->mutex);
  memo_->cache.emplace(key, rel);
  return rel;
}

double Kb::vote(std::string_view voter_surface, int64_t pa) const {
  const auto& candidates = candidate_pages(voter_surface);
  if (candidates.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& c : candidates) sum += relatedness(c.page_id, pa) * c.prior;
  return sum / static_cast<double>(candidates.size());
}

double Kb::total_relatedness(int64_t pa,
                             const std::vector<std::string>& context_mentions) const {
  double sum = 0.0;
  for (const auto& surface : context_mentions) sum += vote(surface, pa);
  return sum;
}

std::vector<MentionSpan> Kb::extract_mentions(const std::vector<std::string>& tokens) const {
  constexpr size_t kMaxMentionTokens = 4;
  std::vector<MentionSpan> out;
  size_t i = 0;
  while (i < tokens.size()) {
    size_t best_len = 0;
    std::string best_surface;
    std::string surface;
    size_t limit = std::min(kMaxMentionTokens, tokens.size() - i);
    for (size_t len = 1; len <= limit; ++len) {
      if (len > 1) surface.push_back(' ');
      surface += to_lower(tokens[i + len - 1]);
      if (mentions_.count(surface)) {
        best_len = len;
        best_surface = surface;
      }
    }
    if (best_len > 0) {
      out.push_back(MentionSpan{i, i + best_len, std::move(best_surface)});
      i += best_len;
    } else {
      ++i;
    }
  }
  return out;
}

LinkResult Kb::link_hashtag_entities(const std::vector<std::string>& seg_chunks,
                                     const std::vector<std::string>& tweet_mentions,
                                     double threshold) const {
  LinkResult result;
  std::vector<MentionSpan> spans = extract_mentions(seg_chunks);
  if (spans.empty()) return result;

  double feature_sum = 0.0;
  for (const MentionSpan& span : spans) {
    const auto& candidates = candidate_pages(span.surface);
    // spans come from the dictionary, so candidates is never empty
    double best_rel = 0.0;
    const CandidatePage* best = nullptr;
    for (const auto& c : candidates) {
      double rel = total_relatedness(c.page_id, tweet_mentions);
      // candidates are ordered prior-then-id, so strict improvement keeps
      // the higher-prior, lower-id page on ties
      if (best == nullptr || rel > best_rel) {
        best_rel = rel;
        best = &c;
      }
    }
    feature_sum += best_rel * best->prior;
    if (best_rel >= threshold) {
      result.links.push_back(
          EntityLink{span.surface, span.token_start, span.token_end, best->page_id, best_rel});
    }
  }
  result.relatedness_feature = feature_sum / static_cast<double>(spans.size());
  return result;
}

}  // namespace hashseg

// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef HASHSEG_KNOWLEDGE_BASE_HPP
#define HASHSEG_KNOWLEDGE_BASE_HPP

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace hashseg {

struct KbPage {
  int64_t id = 0;
  std::string title;
  std::vector<int64_t> inlinks;  // sorted, unique; ids may lie outside the stored pages
};

// One candidate page for a surface form with its commonness prior.
struct CandidatePage {
  int64_t page_id = 0;
  double prior = 0.0;
};

// Token span matched against the mention dictionary.
struct MentionSpan {
  size_t token_start = 0;
  size_t token_end = 0;  // exclusive
  std::string surface;   // lowercased tokens joined by single spaces
};

// A resolved mention inside a hashtag segmentation. score is the total
// relatedness of the detected page against the tweet context; the voting sum
// is not normalized, so it can exceed 1 with many context mentions.
struct EntityLink {
  std::string surface;
  size_t chunk_start = 0;
  size_t chunk_end = 0;  // exclusive
  int64_t page_id = 0;
  double score = 0.0;
};

struct LinkResult {
  std::vector<EntityLink> links;
  double relatedness_feature = 0.0;
};

// Pages, inlink sets, and mention→candidate priors. Immutable after load;
// queries are read-only (the relatedness memo is internally synchronized).
class Kb {
 public:
  static constexpr double kDefaultLinkThreshold = 0.1;

  // total_pages_override, when nonzero, replaces the stored page count as W;
  // it allows a subset KB to use the full source encyclopedia size.
  static Kb load(const std::string& pages_path, const std::string& mentions_path,
                 const std::string& inlinks_path, uint64_t total_pages_override = 0);

  struct Builder {
    Builder& page(int64_t id, std::string title);
    Builder& mention(std::string surface, int64_t page_id, double prior);
    Builder& inlinks(int64_t page_id, std::vector<int64_t> sources);
    Builder& total_pages(uint64_t w);
    Kb build();

   private:
    friend class Kb;
    std::vector<KbPage> pages_;
    std::vector<std::pair<std::string, CandidatePage>> mentions_;
    std::vector<std::pair<int64_t, std::vector<int64_t>>> inlinks_;
    uint64_t override_w_ = 0;
  };

  uint64_t total_pages() const { return total_pages_; }
  size_t stored_pages() const { return pages_.size(); }
  bool has_page(int64_t id) const { return pages_.count(id) != 0; }
  const KbPage& page(int64_t id) const;

  // Case-insensitive exact lookup; sorted by prior descending, page id
  // ascending on ties. Empty when the surface is unknown.
  const std::vector<CandidatePage>& candidate_pages(std::string_view surface) const;

  // Milne–Witten relatedness in [0,1]. Same page: 1 when it has inlinks,
  // else 0. Empty intersection or an empty inlink set gives 0.
  double relatedness(int64_t pa, int64_t pb) const;

  // Weighted mean of relatedness over the voter's candidates; 0 when the
  // voter surface has none.
  double vote(std::string_view voter_surface, int64_t pa) const;

  // Sum of votes over the given context mention surfaces.
  double total_relatedness(int64_t pa, const std::vector<std::string>& context_mentions) const;

  // Greedy longest-match scan over token n-grams (up to 4 tokens),
  // non-overlapping, left to right. Tokens are case-folded before lookup.
  std::vector<MentionSpan> extract_mentions(const std::vector<std::string>& tokens) const;

  // Resolves each mention in seg_chunks against the tweet context and
  // computes the relatedness feature. Links scoring below the threshold are
  // pruned from the output, but the feature uses all detected pages.
  LinkResult link_hashtag_entities(const std::vector<std::string>& seg_chunks,
                                   const std::vector<std::string>& tweet_mentions,
                                   double threshold = kDefaultLinkThreshold) const;

 private:
  std::map<int64_t, KbPage> pages_;
  std::unordered_map<std::string, std::vector<CandidatePage>> mentions_;
  uint64_t total_pages_ = 0;

  struct RelMemo {
    std::mutex mutex;
    std::map<std::pair<int64_t, int64_t>, double> cache;
  };
  mutable std::unique_ptr<RelMemo> memo_ = std::make_unique<RelMemo>();

  double relatedness_uncached(int64_t pa, int64_t pb) const;
};

}  // namespace hashseg

#endif

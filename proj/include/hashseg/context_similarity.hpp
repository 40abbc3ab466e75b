// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef HASHSEG_CONTEXT_SIMILARITY_HPP
#define HASHSEG_CONTEXT_SIMILARITY_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace hashseg {

// Hypernym taxonomy with word→sense links. Depth of the unique root is 1;
// a node's depth is the shortest path from the root plus one. Immutable
// after build; queries are read-only.
class Taxonomy {
 public:
  struct Builder {
    // child == parent declares the root (exactly one such edge required).
    Builder& edge(std::string child, std::string parent);
    Builder& sense(std::string word, std::string synset);
    Taxonomy build();

   private:
    friend class Taxonomy;
    std::vector<std::pair<std::string, std::string>> edges_;
    std::vector<std::pair<std::string, std::string>> senses_;
  };

  // Lines are either `synset_id<TAB>parent_synset_id` edges or
  // `w:word<TAB>synset_id` sense links.
  static Taxonomy load(const std::string& path);

  bool has_synset(std::string_view id) const;
  bool has_word(std::string_view word) const;
  size_t depth(std::string_view synset_id) const;
  size_t synset_count() const { return nodes_.size(); }

  // Max over sense pairs of 2·depth(LCS) / (depth(s1)+depth(s2)); 0 when
  // either word is unknown or the pair shares no ancestor.
  double wu_palmer(std::string_view w1, std::string_view w2) const;

 private:
  struct Node {
    size_t depth = 0;
    std::vector<uint32_t> ancestors;  // sorted indices, includes self
  };

  std::unordered_map<std::string, uint32_t> index_;
  std::vector<Node> nodes_;
  std::unordered_map<std::string, std::vector<uint32_t>> word_senses_;

  const std::vector<uint32_t>* senses(std::string_view word) const;
};

// Word filter standing in for POS selection: a word is content when it is
// neither a stopword nor a function word. Membership is case-insensitive.
struct ContentLexicon {
  std::unordered_set<std::string> stopwords;
  std::unordered_set<std::string> function_words;

  // One word per line into stopwords.
  static ContentLexicon load(const std::string& path);

  bool is_content(std::string_view word) const;
};

// Lowercased alphabetic tokens minus stop/function words and single letters;
// order preserved, duplicates kept.
std::vector<std::string> content_words(const ContentLexicon& lex, std::string_view text);

// Mean over segmentation content words of the best Wu-Palmer match among
// tweet content words; 0 when either side is empty.
double context_score(const Taxonomy& tax, const ContentLexicon& lex,
                     const std::vector<std::string>& seg_chunks, std::string_view tweet_text);

}  // namespace hashseg

#endif

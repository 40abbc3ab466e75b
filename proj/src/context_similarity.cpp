// Apache License, Version 2.0, refer to LICENSE.txt

#include "hashseg/context_similarity.hpp"

#include <algorithm>
#include <deque>
#include <optional>
#include <stdexcept>

#include "hashseg/io_util.hpp"
#include "hashseg/text_util.hpp"

namespace hashseg {

Taxonomy::Builder& Taxonomy::Builder::edge(std::string child, std::string parent) {
  edges_.emplace_back(std::move(child), std::move(parent));
  return *this;
}

Taxonomy::Builder& Taxonomy::Builder::sense(std::string word, std::string synset) {
  senses_.emplace_back(to_lower(word), std::move(synset));
  return *this;
}

Taxonomy Taxonomy::Builder::build() {
  Taxonomy tax;
  auto intern = [&tax](const std::string& id) -> uint32_t {
    auto [it, inserted] = tax.index_.emplace(id, static_cast<uint32_t>(tax.nodes_.size()));
    if (inserted) tax.nodes_.emplace_back();
    return it->second;
  };

  std::vector<std::vector<uint32_t>> parents;
  std::optional<uint32_t> root;
  for (const auto& [child, parent] : edges_) {
    uint32_t c = intern(child);
    uint32_t p = intern(parent);
    parents.resize(tax.nodes_.size());
    if (c == p) {
      if (root && *root != c) throw std::invalid_argument("taxonomy has two roots");
      root = c;
    } else {
      parents[c].push_back(p);
    }
  }
  parents.resize(tax.nodes_.size());
  if (!root) throw std::invalid_argument("taxonomy has no root (self-loop line missing)");

  // children adjacency for the depth BFS
  std::vector<std::vector<uint32_t>> children(tax.nodes_.size());
  for (uint32_t c = 0; c < parents.size(); ++c)
    for (uint32_t p : parents[c]) children[p].push_back(c);

  std::vector<size_t> depth(tax.nodes_.size(), 0);
  std::deque<uint32_t> queue{*root};
  depth[*root] = 1;
  while (!queue.empty()) {
    uint32_t u = queue.front();
    queue.pop_front();
    for (uint32_t v : children[u]) {
      if (depth[v] == 0) {
        depth[v] = depth[u] + 1;
        queue.push_back(v);
      }
    }
  }
  for (const auto& [id, idx] : tax.index_) {
    if (depth[idx] == 0)
      throw std::invalid_argument("synset '" + id + "' is not reachable from the root");
  }

  // cycle check over the parent graph (root self-loop excluded)
  {
    std::vector<int> color(tax.nodes_.size(), 0);
    std::vector<std::pair<uint32_t, size_t>> stack;
    for (uint32_t start = 0; start < tax.nodes_.size(); ++start) {
      if (color[start] != 0) continue;
      stack.emplace_back(start, 0);
      color[start] = 1;
      while (!stack.empty()) {
        auto& [u, next] = stack.back();
        if (next < parents[u].size()) {
          uint32_t p = parents[u][next++];
          if (color[p] == 1) throw std::invalid_argument("taxonomy parent graph has a cycle");
          if (color[p] == 0) {
            color[p] = 1;
            stack.emplace_back(p, 0);
          }
        } else {
          color[u] = 2;
          stack.pop_back();
        }
      }
    }
  }

  // transitive ancestor closure, self included
  std::vector<std::vector<uint32_t>> closure(tax.nodes_.size());
  // process by ascending depth so parents are closed before children; with
  // an acyclic graph every parent of a node has smaller finite depth only
  // for tree-like cases, so fall back to memoized recursion instead
  std::vector<char> closed(tax.nodes_.size(), 0);
  std::vector<uint32_t> work;
  for (uint32_t n = 0; n < tax.nodes_.size(); ++n) {
    if (closed[n]) continue;
    work.push_back(n);
    while (!work.empty()) {
      uint32_t u = work.back();
      bool ready = true;
      for (uint32_t p : parents[u]) {
        if (!closed[p]) {
          work.push_back(p);
          ready = false;
        }
      }
      if (!ready) continue;
      work.pop_back();
      if (closed[u]) continue;
      std::vector<uint32_t> acc{u};
      for (uint32_t p : parents[u])
        acc.insert(acc.end(), closure[p].begin(), closure[p].end());
      std::sort(acc.begin(), acc.end());
      acc.erase(std::unique(acc.begin(), acc.end()), acc.end());
      closure[u] = std::move(acc);
      closed[u] = 1;
    }
  }

  for (uint32_t n = 0; n < tax.nodes_.size(); ++n) {
    tax.nodes_[n].depth = depth[n];
    tax.nodes_[n].ancestors = std::move(closure[n]);
  }

  for (const auto& [word, synset] : senses_) {
    auto it = tax.index_.find(synset);
    if (it == tax.index_.end())
      throw std::invalid_argument("sense for '" + word + "' names unknown synset '" + synset +
                                  "'");
    tax.word_senses_[word].push_back(it->second);
  }
  return tax;
}

Taxonomy Taxonomy::load(const std::string& path) {
  Builder b;
  LineReader r(path);
  std::string line;
  while (r.next(line)) {
    size_t tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 >= line.size())
      r.fail("expected two tab-separated fields");
    std::string left = line.substr(0, tab);
    std::string right = line.substr(tab + 1);
    if (left.rfind("w:", 0) == 0) {
      std::string word = left.substr(2);
      if (word.empty()) r.fail("empty word in sense line");
      b.sense(std::move(word), std::move(right));
    } else {
      b.edge(std::move(left), std::move(right));
    }
  }
  try {
    return b.build();
  } catch (const std::invalid_argument& e) {
    throw LoadError(path, 0, e.what());
  }
}

bool Taxonomy::has_synset(std::string_view id) const {
  return index_.count(std::string(id)) != 0;
}

bool Taxonomy::has_word(std::string_view word) const {
  return word_senses_.count(to_lower(word)) != 0;
}

size_t Taxonomy::depth(std::string_view synset_id) const {
  auto it = index_.find(std::string(synset_id));
  if (it == index_.end())
    throw std::invalid_argument("unknown synset '" + std::string(synset_id) + "'");
  return nodes_[it->second].depth;
}

const std::vector<uint32_t>* Taxonomy::senses(std::string_view word) const {
  auto it = word_senses_.find(to_lower(word));
  return it == word_senses_.end() ? nullptr : &it->second;
}

double Taxonomy::wu_palmer(std::string_view w1, std::string_view w2) const {
  const auto* s1 = senses(w1);
  const auto* s2 = senses(w2);
  if (!s1 || !s2) return 0.0;
  double best = 0.0;
  for (uint32_t a : *s1) {
    for (uint32_t b : *s2) {
      const auto& anc_a = nodes_[a].ancestors;
      const auto& anc_b = nodes_[b].ancestors;
      size_t lcs_depth = 0;
      for (size_t i = 0, j = 0; i < anc_a.size() && j < anc_b.size();) {
        if (anc_a[i] < anc_b[j]) ++i;
        else if (anc_a[i] > anc_b[j]) ++j;
        else {
          lcs_depth = std::max(lcs_depth, nodes_[anc_a[i]].depth);
          ++i;
          ++j;
        }
      }
      if (lcs_depth == 0) continue;
      double score = 2.0 * static_cast<double>(lcs_depth) /
                     static_cast<double>(nodes_[a].depth + nodes_[b].depth);
      best = std::max(best, score);
    }
  }
  return best;
}

ContentLexicon ContentLexicon::load(const std::string& path) {
  ContentLexicon lex;
  LineReader r(path);
  std::string line;
  while (r.next(line)) {
    auto words = split_whitespace(line);
    if (words.size() != 1) r.fail("expected one word per line");
    lex.stopwords.insert(to_lower(words[0]));
  }
  return lex;
}

bool ContentLexicon::is_content(std::string_view word) const {
  std::string w = to_lower(word);
  return !stopwords.count(w) && !function_words.count(w);
}

std::vector<std::string> content_words(const ContentLexicon& lex, std::string_view text) {
  std::vector<std::string> out;
  for (auto& tok : alpha_tokens(text)) {
    if (tok.size() <= 1) continue;
    if (!lex.is_content(tok)) continue;
    out.push_back(std::move(tok));
  }
  return out;
}

double context_score(const Taxonomy& tax, const ContentLexicon& lex,
                     const std::vector<std::string>& seg_chunks, std::string_view tweet_text) {
  std::vector<std::string> h = content_words(lex, join(seg_chunks, " "));
  std::vector<std::string> t = content_words(lex, tweet_text);
  if (h.empty() || t.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& hw : h) {
    double best = 0.0;
    for (const auto& tw : t) best = std::max(best, tax.wu_palmer(hw, tw));
    sum += best;
  }
  return sum / static_cast<double>(h.size());
}

}  // namespace hashseg

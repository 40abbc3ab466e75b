// Apache License, Version 2.0, refer to LICENSE.txt

#include "hashseg/knowledge_base.hpp"

#include <algorithm>
#include <cmath>
#include <doctest.h>
#include <set>

#include "hashseg/io_util.hpp"
#include "hashseg/random_util.hpp"
#include "test_util.hpp"

using namespace hashseg;
using hashseg_test::TempDir;

namespace {

// Two identical-inlink pages (fully related), one disjoint page, and an
// ambiguous mention whose better-connected candidate has the lower prior.
Kb vote_fixture() {
  return Kb::Builder()
      .page(1, "Target")
      .page(2, "Twin")
      .page(3, "Stranger")
      .page(4, "Popular")
      .page(5, "Connected")
      .inlinks(1, {5, 6})
      .inlinks(2, {5, 6})
      .inlinks(3, {7, 8})
      .inlinks(5, {5, 6})
      .mention("target", 1, 1.0)
      .mention("m", 2, 0.6)
      .mention("m", 3, 0.4)
      .mention("amb", 4, 0.7)
      .mention("amb", 5, 0.3)
      .mention("idtie", 7, 0.5)
      .mention("idtie", 6, 0.5)
      .page(6, "Low")
      .page(7, "High")
      .total_pages(50)
      .build();
}

}  // namespace

TEST_CASE("builder basics and candidate ordering") {
  Kb kb = Kb::Builder()
              .page(1, "NSA")
              .page(2, "Edward Snowden")
              .page(3, "PRISM")
              .mention("NSA", 1, 0.85)
              .mention("nsa", 3, 0.15)
              .mention("snowden", 2, 1.0)
              .build();
  CHECK(kb.total_pages() == 3);
  CHECK(kb.stored_pages() == 3);
  CHECK(kb.has_page(2));
  CHECK_FALSE(kb.has_page(99));
  CHECK(kb.page(2).title == "Edward Snowden");
  CHECK_THROWS_AS(kb.page(99), std::invalid_argument);

  const auto& cands = kb.candidate_pages("nsa");
  REQUIRE(cands.size() == 2);
  CHECK(cands[0].page_id == 1);
  CHECK(cands[0].prior == doctest::Approx(0.85));
  CHECK(cands[1].page_id == 3);
  CHECK(kb.candidate_pages("NsA").size() == 2);  // case-insensitive
  CHECK(kb.candidate_pages("unknown").empty());

  // Equal priors fall back to ascending page id.
  Kb tie = Kb::Builder()
               .page(6, "Low")
               .page(7, "High")
               .mention("t", 7, 0.5)
               .mention("t", 6, 0.5)
               .build();
  const auto& tied = tie.candidate_pages("t");
  REQUIRE(tied.size() == 2);
  CHECK(tied[0].page_id == 6);
}

TEST_CASE("builder validation") {
  CHECK_THROWS_AS(Kb::Builder().page(1, "A").page(1, "B").build(), std::invalid_argument);
  CHECK_THROWS_AS(Kb::Builder().page(1, "A").inlinks(2, {1}).build(), std::invalid_argument);
  CHECK_THROWS_AS(Kb::Builder().page(1, "A").mention("x", 9, 0.5).build(), std::invalid_argument);
  CHECK_THROWS_AS(Kb::Builder().page(1, "A").mention("x", 1, 0.0).build(), std::invalid_argument);
  CHECK_THROWS_AS(Kb::Builder().page(1, "A").mention("x", 1, 1.5).build(), std::invalid_argument);
  CHECK_THROWS_AS(
      Kb::Builder().page(1, "A").mention("x", 1, 0.5).mention("x", 1, 0.4).build(),
      std::invalid_argument);
  CHECK_THROWS_AS(
      Kb::Builder().page(1, "A").page(2, "B").mention("x", 1, 0.7).mention("x", 2, 0.7).build(),
      std::invalid_argument);
  CHECK_THROWS_AS(Kb::Builder().page(1, "A").page(2, "B").total_pages(1).build(),
                  std::invalid_argument);
  CHECK(Kb::Builder().page(1, "A").total_pages(1000000).build().total_pages() == 1000000);
}

TEST_CASE("kb file loading") {
  TempDir tmp;
  auto pages = tmp.write("pages.tsv", "1\tAlpha\n2\tBeta\n3\tGamma\n");
  auto mentions = tmp.write("mentions.tsv", "alpha\t1\t0.85\nalpha\t3\t0.15\nbeta\t2\t1.0\n");
  auto inlinks = tmp.write("inlinks.tsv", "1\t10,11,12,13\n2\t20,10,11,11\n");

  Kb kb = Kb::load(pages, mentions, inlinks);
  CHECK(kb.total_pages() == 3);
  CHECK(kb.page(1).inlinks == std::vector<int64_t>{10, 11, 12, 13});
  // Sources are sorted and deduplicated; they may name pages outside the KB.
  CHECK(kb.page(2).inlinks == std::vector<int64_t>{10, 11, 20});
  CHECK(kb.page(3).inlinks.empty());
  CHECK(kb.candidate_pages("alpha").size() == 2);

  Kb wide = Kb::load(pages, mentions, inlinks, 1000000);
  CHECK(wide.total_pages() == 1000000);

  CHECK_THROWS_AS(Kb::load(pages, mentions, inlinks, 2), LoadError);
  auto bad_mentions = tmp.write("bad_mentions.tsv", "alpha\t99\t0.85\n");
  CHECK_THROWS_AS(Kb::load(pages, bad_mentions, inlinks), LoadError);
  auto dup_inlinks = tmp.write("dup_inlinks.tsv", "1\t10\n1\t11\n");
  CHECK_THROWS_AS(Kb::load(pages, mentions, dup_inlinks), LoadError);
  auto trailing = tmp.write("trail.tsv", "1\t10,\n");
  CHECK_THROWS_AS(Kb::load(pages, mentions, trailing), LoadError);
  CHECK_THROWS_AS(Kb::load(tmp.file("nope.tsv"), mentions, inlinks), LoadError);
}

TEST_CASE("relatedness worked example") {
  TempDir tmp;
  auto pages = tmp.write("pages.tsv", "1\tAlpha\n2\tBeta\n");
  auto mentions = tmp.write("mentions.tsv", "alpha\t1\t1.0\n");
  auto inlinks = tmp.write("inlinks.tsv", "1\t10,11,12,13\n2\t10,11,20\n");
  Kb kb = Kb::load(pages, mentions, inlinks, 100);

  // |in(a)|=4, |in(b)|=3, intersection 2, W=100:
  // 1 - (ln 4 - ln 2) / (ln 100 - ln 3)
  double expect = 1.0 - (std::log(4.0) - std::log(2.0)) / (std::log(100.0) - std::log(3.0));
  CHECK(kb.relatedness(1, 2) == doctest::Approx(expect).epsilon(1e-12));
  CHECK(kb.relatedness(1, 2) == doctest::Approx(0.802).epsilon(1e-3));
  CHECK(kb.relatedness(2, 1) == doctest::Approx(kb.relatedness(1, 2)));
}

TEST_CASE("relatedness edge cases") {
  Kb kb = Kb::Builder()
              .page(1, "A")
              .page(2, "B")
              .page(3, "C")
              .page(4, "Empty")
              .inlinks(1, {5, 6})
              .inlinks(2, {5, 6})
              .inlinks(3, {7, 8})
              .mention("a", 1, 1.0)
              .total_pages(50)
              .build();
  CHECK(kb.relatedness(1, 1) == doctest::Approx(1.0));  // same page, has inlinks
  CHECK(kb.relatedness(4, 4) == doctest::Approx(0.0));  // same page, no inlinks
  CHECK(kb.relatedness(1, 3) == doctest::Approx(0.0));  // disjoint
  CHECK(kb.relatedness(1, 4) == doctest::Approx(0.0));  // one side empty
  CHECK(kb.relatedness(1, 2) == doctest::Approx(1.0));  // identical inlink sets
  CHECK_THROWS_AS(kb.relatedness(1, 99), std::invalid_argument);
}

TEST_CASE("relatedness is symmetric and bounded on random graphs") {
  DetRng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    Kb::Builder b;
    size_t n = rng.uniform(3, 10);
    for (size_t i = 1; i <= n; ++i) {
      b.page(static_cast<int64_t>(i), "P" + std::to_string(i));
      std::vector<int64_t> in;
      for (int64_t src = 1; src <= 30; ++src)
        if (rng.uniform(0, 2) == 0) in.push_back(src);
      b.inlinks(static_cast<int64_t>(i), std::move(in));
    }
    b.mention("p1", 1, 1.0);
    b.total_pages(50);
    Kb kb = b.build();
    for (size_t i = 1; i <= n; ++i) {
      for (size_t j = 1; j <= n; ++j) {
        double rel = kb.relatedness(static_cast<int64_t>(i), static_cast<int64_t>(j));
        CHECK(rel >= 0.0);
        CHECK(rel <= 1.0);
        CHECK(rel == doctest::Approx(kb.relatedness(static_cast<int64_t>(j),
                                                    static_cast<int64_t>(i))).epsilon(1e-15));
      }
    }
  }
}

TEST_CASE("votes weight relatedness by prior over the candidate count") {
  Kb kb = vote_fixture();
  // rel(2,1)=1 (identical inlinks), rel(3,1)=0 (disjoint):
  // (1*0.6 + 0*0.4) / 2 = 0.3
  CHECK(kb.vote("m", 1) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(kb.vote("target", 1) == doctest::Approx(1.0).epsilon(1e-12));  // self vote, prior 1
  CHECK(kb.vote("unknown", 1) == doctest::Approx(0.0));

  CHECK(kb.total_relatedness(1, {}) == doctest::Approx(0.0));
  CHECK(kb.total_relatedness(1, {"m"}) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(kb.total_relatedness(1, {"m", "m", "unknown"}) == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(kb.total_relatedness(1, {"m", "target"}) == doctest::Approx(1.3).epsilon(1e-12));
}

TEST_CASE("mention extraction is greedy longest-match") {
  Kb kb = Kb::Builder()
              .page(1, "NSA")
              .page(2, "Edward Snowden")
              .page(3, "NSA vs")
              .mention("nsa", 1, 1.0)
              .mention("snowden", 2, 1.0)
              .mention("nsa vs", 3, 1.0)
              .build();

  auto spans = kb.extract_mentions({"nsa", "vs", "snowden"});
  REQUIRE(spans.size() == 2);
  CHECK(spans[0].surface == "nsa vs");  // longest match wins over "nsa"
  CHECK(spans[0].token_start == 0);
  CHECK(spans[0].token_end == 2);
  CHECK(spans[1].surface == "snowden");
  CHECK(spans[1].token_start == 2);
  CHECK(spans[1].token_end == 3);

  auto folded = kb.extract_mentions({"NSA", "Vs"});
  REQUIRE(folded.size() == 1);
  CHECK(folded[0].surface == "nsa vs");

  CHECK(kb.extract_mentions({"not", "a", "con"}).empty());
  CHECK(kb.extract_mentions({}).empty());
}

TEST_CASE("mention extraction caps phrases at four tokens") {
  Kb kb = Kb::Builder()
              .page(1, "Long")
              .page(2, "Quad")
              .mention("a b c d e", 1, 1.0)
              .mention("a b c d", 2, 1.0)
              .build();
  auto spans = kb.extract_mentions({"a", "b", "c", "d", "e"});
  REQUIRE(spans.size() == 1);
  CHECK(spans[0].surface == "a b c d");
  CHECK(spans[0].token_end == 4);
}

TEST_CASE("entity linking detects, scores, and prunes") {
  Kb kb = vote_fixture();

  // No dictionary hit in the chunks: nothing detected, feature 0.
  auto none = kb.link_hashtag_entities({"not", "a", "con"}, {"m"});
  CHECK(none.links.empty());
  CHECK(none.relatedness_feature == doctest::Approx(0.0));

  auto res = kb.link_hashtag_entities({"target"}, {"m"});
  REQUIRE(res.links.size() == 1);
  CHECK(res.links[0].surface == "target");
  CHECK(res.links[0].page_id == 1);
  CHECK(res.links[0].chunk_start == 0);
  CHECK(res.links[0].chunk_end == 1);
  CHECK(res.links[0].score == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(res.relatedness_feature == doctest::Approx(0.3).epsilon(1e-12));  // 0.3 * prior 1.0

  // A prohibitive threshold empties the links but leaves the feature alone.
  auto pruned = kb.link_hashtag_entities({"target"}, {"m"}, 1.1);
  CHECK(pruned.links.empty());
  CHECK(pruned.relatedness_feature == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("context rescues the lower-prior candidate") {
  Kb kb = vote_fixture();
  // "amb": page 4 (prior 0.7, no inlinks) vs page 5 (prior 0.3, tied to the
  // context page 2). Context votes lift page 5.
  auto res = kb.link_hashtag_entities({"amb"}, {"m"});
  REQUIRE(res.links.size() == 1);
  CHECK(res.links[0].page_id == 5);
  CHECK(res.links[0].score == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(res.relatedness_feature == doctest::Approx(0.3 * 0.3).epsilon(1e-12));

  // Without context every candidate ties at 0: highest prior wins, and a
  // zero threshold lets the unrelated detection through for inspection.
  auto bare = kb.link_hashtag_entities({"amb"}, {}, 0.0);
  REQUIRE(bare.links.size() == 1);
  CHECK(bare.links[0].page_id == 4);
  CHECK(bare.links[0].score == doctest::Approx(0.0));
  CHECK(bare.relatedness_feature == doctest::Approx(0.0));

  // Prior tie resolves to the lower page id.
  auto idtie = kb.link_hashtag_entities({"idtie"}, {}, 0.0);
  REQUIRE(idtie.links.size() == 1);
  CHECK(idtie.links[0].page_id == 6);

  // Default threshold prunes the zero-scored detection.
  CHECK(kb.link_hashtag_entities({"amb"}, {}).links.empty());
}

namespace {

double bf_relatedness(const Kb& kb, int64_t pa, int64_t pb) {
  const auto& a = kb.page(pa).inlinks;
  const auto& b = kb.page(pb).inlinks;
  if (pa == pb) return a.empty() ? 0.0 : 1.0;
  if (a.empty() || b.empty()) return 0.0;
  std::set<int64_t> sa(a.begin(), a.end());
  size_t inter = 0;
  for (int64_t x : b) inter += sa.count(x);
  if (inter == 0) return 0.0;
  double hi = static_cast<double>(std::max(a.size(), b.size()));
  double lo = static_cast<double>(std::min(a.size(), b.size()));
  double den = std::log(static_cast<double>(kb.total_pages())) - std::log(lo);
  double num = std::log(hi) - std::log(static_cast<double>(inter));
  if (den <= 0.0) return num <= 0.0 ? 1.0 : 0.0;
  return std::min(1.0, std::max(0.0, 1.0 - num / den));
}

double bf_total(const Kb& kb, int64_t pa, const std::vector<std::string>& context) {
  double total = 0.0;
  for (const auto& surface : context) {
    const auto& cands = kb.candidate_pages(surface);
    if (cands.empty()) continue;
    double vote = 0.0;
    for (const auto& c : cands) vote += bf_relatedness(kb, c.page_id, pa) * c.prior;
    total += vote / static_cast<double>(cands.size());
  }
  return total;
}

LinkResult bf_link(const Kb& kb, const std::vector<std::string>& chunks,
                   const std::vector<std::string>& context, double threshold) {
  LinkResult out;
  auto spans = kb.extract_mentions(chunks);
  if (spans.empty()) return out;
  double sum = 0.0;
  for (const auto& span : spans) {
    auto cands = kb.candidate_pages(span.surface);
    std::sort(cands.begin(), cands.end(), [](const CandidatePage& a, const CandidatePage& b) {
      if (a.prior != b.prior) return a.prior > b.prior;
      return a.page_id < b.page_id;
    });
    double best_rel = bf_total(kb, cands[0].page_id, context);
    CandidatePage best = cands[0];
    for (size_t i = 1; i < cands.size(); ++i) {
      double rel = bf_total(kb, cands[i].page_id, context);
      if (rel > best_rel) {
        best_rel = rel;
        best = cands[i];
      }
    }
    sum += best_rel * best.prior;
    if (best_rel >= threshold)
      out.links.push_back(EntityLink{span.surface, span.token_start, span.token_end,
                                     best.page_id, best_rel});
  }
  out.relatedness_feature = sum / static_cast<double>(spans.size());
  return out;
}

}  // namespace

TEST_CASE("linking matches a from-scratch reimplementation on random KBs") {
  DetRng rng(99);
  for (int trial = 0; trial < 25; ++trial) {
    Kb::Builder b;
    size_t n = rng.uniform(5, 20);
    std::vector<std::string> surfaces;
    for (size_t i = 1; i <= n; ++i) {
      b.page(static_cast<int64_t>(i), "P" + std::to_string(i));
      std::vector<int64_t> in;
      for (int64_t src = 1; src <= 25; ++src)
        if (rng.uniform(0, 2) == 0) in.push_back(src);
      b.inlinks(static_cast<int64_t>(i), std::move(in));
    }
    size_t n_surfaces = rng.uniform(3, 6);
    for (size_t s = 0; s < n_surfaces; ++s) {
      std::string surface = "m" + std::to_string(s);
      surfaces.push_back(surface);
      size_t n_cands = rng.uniform(1, 3);
      std::set<int64_t> used;
      double raw_total = 0.0;
      std::vector<std::pair<int64_t, double>> raw;
      for (size_t c = 0; c < n_cands; ++c) {
        int64_t pid = static_cast<int64_t>(rng.uniform(1, n));
        if (!used.insert(pid).second) continue;
        double w = static_cast<double>(rng.uniform(1, 10));
        raw.emplace_back(pid, w);
        raw_total += w;
      }
      for (const auto& [pid, w] : raw) b.mention(surface, pid, w / (raw_total + 1.0));
    }
    b.total_pages(60);
    Kb kb = b.build();

    std::vector<std::string> chunks;
    size_t len = rng.uniform(1, 5);
    for (size_t i = 0; i < len; ++i) {
      if (rng.uniform(0, 1) == 0)
        chunks.push_back(surfaces[rng.uniform(0, surfaces.size() - 1)]);
      else
        chunks.push_back("junk" + std::to_string(rng.uniform(0, 9)));
    }
    std::vector<std::string> context;
    size_t ctx_len = rng.uniform(0, 3);
    for (size_t i = 0; i < ctx_len; ++i)
      context.push_back(surfaces[rng.uniform(0, surfaces.size() - 1)]);

    double threshold = rng.uniform(0, 1) == 0 ? 0.0 : 0.1;
    auto got = kb.link_hashtag_entities(chunks, context, threshold);
    auto want = bf_link(kb, chunks, context, threshold);
    REQUIRE(got.links.size() == want.links.size());
    for (size_t i = 0; i < got.links.size(); ++i) {
      CHECK(got.links[i].surface == want.links[i].surface);
      CHECK(got.links[i].page_id == want.links[i].page_id);
      CHECK(got.links[i].chunk_start == want.links[i].chunk_start);
      CHECK(got.links[i].chunk_end == want.links[i].chunk_end);
      CHECK(got.links[i].score == doctest::Approx(want.links[i].score).epsilon(1e-12));
    }
    CHECK(got.relatedness_feature ==
          doctest::Approx(want.relatedness_feature).epsilon(1e-12));
  }
}

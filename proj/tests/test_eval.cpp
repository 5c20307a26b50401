#include <doctest.h>

#include <random>
#include <set>

#include "nat/corpus.hpp"
#include "nat/eval.hpp"

using namespace nat;

namespace {

Segment make_segment(const std::vector<std::pair<std::string, std::string>>& toks) {
  Segment seg;
  for (const auto& [text, label] : toks) seg.tokens.push_back({text, Label::parse(label)});
  return seg;
}

Corpus single_doc(std::vector<Segment> segments) {
  Corpus c;
  c.documents.push_back({kDefaultDocumentId, std::move(segments), {}});
  return c;
}

// Independent span-set-matching oracle used by the acceptance suite as well.
struct OracleCounts {
  std::uint64_t tp = 0, fp = 0, fn = 0;
};

OracleCounts oracle_counts(const Corpus& gold, const Corpus& pred) {
  OracleCounts out;
  Corpus g = repair_bio(gold);
  Corpus p = repair_bio(pred);
  for (std::size_t d = 0; d < g.documents.size(); ++d) {
    for (std::size_t s = 0; s < g.documents[d].segments.size(); ++s) {
      std::multiset<std::tuple<std::string, std::size_t, std::size_t>> gs, ps;
      for (const auto& sp : spans_from_bio(g.documents[d].segments[s]))
        gs.insert({sp.entity_type, sp.start, sp.end});
      for (const auto& sp : spans_from_bio(p.documents[d].segments[s]))
        ps.insert({sp.entity_type, sp.start, sp.end});
      for (const auto& key : ps) {
        if (gs.count(key))
          ++out.tp;
        else
          ++out.fp;
      }
      for (const auto& key : gs)
        if (!ps.count(key)) ++out.fn;
    }
  }
  return out;
}

std::vector<std::string> kLabels = {"O",         "B-SKILL",   "I-SKILL", "B-SUBJECT",
                                    "I-SUBJECT", "B-ACTIVITY", "I-ACTIVITY"};

Corpus random_labeled(std::mt19937_64& rng, std::size_t max_segments = 10) {
  Corpus c;
  Document doc;
  doc.id = kDefaultDocumentId;
  std::size_t nsegs = 1 + rng() % max_segments;
  for (std::size_t s = 0; s < nsegs; ++s) {
    Segment seg;
    std::size_t ntoks = 1 + rng() % 20;
    for (std::size_t t = 0; t < ntoks; ++t)
      seg.tokens.push_back({"w" + std::to_string(t),
                            Label::parse(kLabels[rng() % kLabels.size()])});
    doc.segments.push_back(std::move(seg));
  }
  c.documents.push_back(std::move(doc));
  return c;
}

Corpus relabel(const Corpus& base, std::mt19937_64& rng) {
  Corpus out = base;
  for (auto& doc : out.documents)
    for (auto& seg : doc.segments)
      for (auto& tok : seg.tokens)
        tok.label = Label::parse(kLabels[rng() % kLabels.size()]);
  return out;
}

}  // namespace

TEST_CASE("identical corpora score perfectly") {
  Corpus c = single_doc({make_segment({{"a", "B-SKILL"}, {"b", "I-SKILL"}, {"c", "O"}})});
  EvalReport r = entity_prf(c, c);
  CHECK(r.precision == doctest::Approx(1.0));
  CHECK(r.recall == doctest::Approx(1.0));
  CHECK(r.f1 == doctest::Approx(1.0));
}

TEST_CASE("tp=2 fp=1 fn=1 gives 2/3 across the board") {
  Corpus gold = single_doc({make_segment({{"a", "B-SKILL"},
                                          {"b", "B-SKILL"},
                                          {"c", "B-SUBJECT"},
                                          {"d", "O"}})});
  Corpus pred = single_doc({make_segment({{"a", "B-SKILL"},
                                          {"b", "B-SKILL"},
                                          {"c", "O"},
                                          {"d", "B-ACTIVITY"}})});
  EvalReport r = entity_prf(gold, pred);
  CHECK(r.tp == 2);
  CHECK(r.fp == 1);
  CHECK(r.fn == 1);
  CHECK(r.precision == doctest::Approx(2.0 / 3).epsilon(1e-12));
  CHECK(r.recall == doctest::Approx(2.0 / 3).epsilon(1e-12));
  CHECK(r.f1 == doctest::Approx(2.0 / 3).epsilon(1e-12));
}

TEST_CASE("strict matching: boundary or type mismatch is both fp and fn") {
  Corpus gold = single_doc({make_segment({{"a", "B-SKILL"}, {"b", "I-SKILL"}})});
  Corpus shifted = single_doc({make_segment({{"a", "B-SKILL"}, {"b", "O"}})});
  EvalReport r = entity_prf(gold, shifted);
  CHECK(r.tp == 0);
  CHECK(r.fp == 1);
  CHECK(r.fn == 1);
}

TEST_CASE("random corpora match the brute-force oracle") {
  std::mt19937_64 rng(61);
  for (int i = 0; i < 300; ++i) {
    Corpus gold = random_labeled(rng);
    Corpus pred = relabel(gold, rng);
    EvalReport r = entity_prf(gold, pred);
    OracleCounts oracle = oracle_counts(gold, pred);
    CHECK(r.tp == oracle.tp);
    CHECK(r.fp == oracle.fp);
    CHECK(r.fn == oracle.fn);
    // metric identities
    if (r.precision + r.recall > 0)
      CHECK(r.f1 == doctest::Approx(2 * r.precision * r.recall /
                                    (r.precision + r.recall)).epsilon(1e-12));
    std::uint64_t per_tp = 0, per_fp = 0, per_fn = 0;
    for (const auto& [t, s] : r.per_entity) {
      per_tp += s.tp;
      per_fp += s.fp;
      per_fn += s.fn;
    }
    CHECK(per_tp == r.tp);
    CHECK(per_fp == r.fp);
    CHECK(per_fn == r.fn);
  }
}

TEST_CASE("swapping gold and pred swaps precision and recall") {
  std::mt19937_64 rng(67);
  for (int i = 0; i < 50; ++i) {
    Corpus gold = random_labeled(rng);
    Corpus pred = relabel(gold, rng);
    EvalReport a = entity_prf(gold, pred);
    EvalReport b = entity_prf(pred, gold);
    CHECK(a.precision == doctest::Approx(b.recall).epsilon(1e-12));
    CHECK(a.recall == doctest::Approx(b.precision).epsilon(1e-12));
    CHECK(a.f1 == doctest::Approx(b.f1).epsilon(1e-12));
    CHECK(a.fp == b.fn);
    CHECK(a.fn == b.fp);
  }
}

TEST_CASE("zero-division convention yields 0, never NaN") {
  Corpus gold = single_doc({make_segment({{"a", "O"}})});
  EvalReport r = entity_prf(gold, gold);
  CHECK(r.precision == 0.0);
  CHECK(r.recall == 0.0);
  CHECK(r.f1 == 0.0);
}

TEST_CASE("structure mismatch rejected") {
  Corpus a = single_doc({make_segment({{"a", "O"}})});
  Corpus b = single_doc({make_segment({{"a", "O"}, {"b", "O"}})});
  CHECK_THROWS_AS(entity_prf(a, b), corpus_error);
}

TEST_CASE("token confusion: diagonal on perfect, off-diagonal on swap") {
  Corpus gold = single_doc({make_segment({{"a", "B-SKILL"}, {"b", "B-SKILL"}})});
  ConfusionMatrix perfect = token_confusion(gold, gold);
  REQUIRE(perfect.types == std::vector<EntityType>{"SKILL"});
  CHECK(perfect.at(0, 0) == 2);
  CHECK(perfect.missed == 0);
  CHECK(perfect.spurious == 0);

  Corpus pred = single_doc({make_segment({{"a", "B-ACTIVITY"}, {"b", "B-ACTIVITY"}})});
  ConfusionMatrix m = token_confusion(gold, pred);
  REQUIRE(m.types == std::vector<EntityType>{"ACTIVITY", "SKILL"});
  CHECK(m.at(1, 0) == 2);  // gold SKILL predicted ACTIVITY
  CHECK(m.at(0, 0) == 0);
}

TEST_CASE("confusion cells + missed + spurious partition the non-O pairs") {
  std::mt19937_64 rng(71);
  for (int i = 0; i < 50; ++i) {
    Corpus gold = random_labeled(rng);
    Corpus pred = relabel(gold, rng);
    ConfusionMatrix m = token_confusion(gold, pred);
    std::uint64_t cells = 0;
    for (auto c : m.counts) cells += c;
    std::uint64_t involved = 0;
    for (std::size_t d = 0; d < gold.documents.size(); ++d)
      for (std::size_t s = 0; s < gold.documents[d].segments.size(); ++s)
        for (std::size_t t = 0; t < gold.documents[d].segments[s].tokens.size(); ++t) {
          bool g = !gold.documents[d].segments[s].tokens[t].label.is_outside();
          bool p = !pred.documents[d].segments[s].tokens[t].label.is_outside();
          if (g || p) ++involved;
        }
    CHECK(cells + m.missed + m.spurious == involved);
  }
}

TEST_CASE("epoch curve CSV") {
  std::vector<EpochRecord> records = {{1, 2.0, 0.5, 0.6, 0.545455}};
  CHECK(epoch_curve_csv(records) ==
        "epoch,train_loss,precision,recall,f1\n1,2.000000,0.500000,0.600000,0.545455\n");
  CHECK_THROWS_AS(epoch_curve_csv({}), corpus_error);
  std::vector<EpochRecord> bad = {{2, 0, 0, 0, 0}, {1, 0, 0, 0, 0}};
  CHECK_THROWS_AS(epoch_curve_csv(bad), corpus_error);
}

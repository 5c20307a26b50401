#include <doctest.h>

#include <random>

#include "nat/corpus.hpp"

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

Corpus random_corpus(std::mt19937_64& rng) {
  static const std::vector<std::string> words = {"Facharbeiter", "und", "Werkstoffe",
                                                 "prüfen", "Metall", "der", "Chemie"};
  static const std::vector<std::string> types = {"JOB_TITLE", "SKILL", "SUBJECT",
                                                 "ACTIVITY", "JOB_TITLE_GROUP"};
  Corpus c;
  std::size_t ndocs = 1 + rng() % 3;
  for (std::size_t d = 0; d < ndocs; ++d) {
    Document doc;
    doc.id = "d" + std::to_string(d);
    std::size_t nsegs = 1 + rng() % 4;
    for (std::size_t s = 0; s < nsegs; ++s) {
      Segment seg;
      std::size_t ntoks = 1 + rng() % 8;
      bool in_entity = false;
      std::string cur;
      for (std::size_t t = 0; t < ntoks; ++t) {
        Label lab = Label::outside();
        int r = static_cast<int>(rng() % 4);
        if (in_entity && r == 0) {
          lab = Label::inside(cur);
        } else if (r <= 1) {
          cur = types[rng() % types.size()];
          lab = Label::begin(cur);
          in_entity = true;
        } else {
          in_entity = false;
        }
        seg.tokens.push_back({words[rng() % words.size()], lab});
      }
      doc.segments.push_back(std::move(seg));
    }
    c.documents.push_back(std::move(doc));
  }
  return c;
}

}  // namespace

TEST_CASE("parse single token line") {
  Corpus c = parse_conll("Facharbeiter\tB-JOB_TITLE\n");
  REQUIRE(c.documents.size() == 1);
  REQUIRE(c.documents[0].segments.size() == 1);
  REQUIRE(c.documents[0].segments[0].tokens.size() == 1);
  CHECK(c.documents[0].segments[0].tokens[0].text == "Facharbeiter");
  CHECK(c.documents[0].segments[0].tokens[0].label == Label::begin("JOB_TITLE"));
}

TEST_CASE("parse empty input") {
  Corpus c = parse_conll("");
  CHECK(c.documents.empty());
}

TEST_CASE("blank line separates segments") {
  Corpus c = parse_conll("a\tO\n\nb\tO\n");
  REQUIRE(c.documents.size() == 1);
  CHECK(c.documents[0].segments.size() == 2);
}

TEST_CASE("missing final newline tolerated") {
  Corpus c = parse_conll("a\tO\nb\tO");
  REQUIRE(c.documents.size() == 1);
  CHECK(c.documents[0].segments[0].tokens.size() == 2);
}

TEST_CASE("document markers") {
  Corpus c = parse_conll("-DOCSTART- d1\na\tO\n\n-DOCSTART- d2\nb\tO\n");
  REQUIRE(c.documents.size() == 2);
  CHECK(c.documents[0].id == "d1");
  CHECK(c.documents[1].id == "d2");
}

TEST_CASE("parse errors carry line numbers") {
  CHECK_THROWS_AS(parse_conll("a\n"), corpus_error);          // wrong column count
  CHECK_THROWS_AS(parse_conll("a\tB_SKILL\n"), corpus_error); // bad label syntax
  CHECK_THROWS_AS(parse_conll("a\tO\n\n\nb\tO\n"), corpus_error);  // empty segment
  try {
    parse_conll("a\tO\nb\n");
  } catch (const corpus_error& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("write single token") {
  Corpus c = single_doc({make_segment({{"Werkstoffe", "O"}})});
  CHECK(write_conll(c) == "Werkstoffe\tO\n");
}

TEST_CASE("write two segments has exactly one separating blank line") {
  Corpus c = single_doc({make_segment({{"a", "O"}}), make_segment({{"b", "O"}})});
  CHECK(write_conll(c) == "a\tO\n\nb\tO\n");
}

TEST_CASE("parse/write round-trip on random corpora") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    Corpus c = random_corpus(rng);
    Corpus back = parse_conll(write_conll(c));
    CHECK(back == c);
  }
}

TEST_CASE("validate_bio reports both violation kinds") {
  auto v1 = validate_bio(make_segment({{"a", "O"}, {"b", "I-SKILL"}}));
  REQUIRE(v1.size() == 1);
  CHECK(v1[0].index == 1);
  CHECK(v1[0].reason == Violation::Reason::IWithoutB);

  CHECK(validate_bio(make_segment({{"a", "B-SKILL"}, {"b", "I-SKILL"}})).empty());

  auto v2 = validate_bio(make_segment({{"a", "B-SKILL"}, {"b", "I-SUBJECT"}}));
  REQUIRE(v2.size() == 1);
  CHECK(v2[0].index == 1);
  CHECK(v2[0].reason == Violation::Reason::ITypeMismatch);
}

TEST_CASE("repair_bio turns violating I into B") {
  Segment s = repair_bio(make_segment({{"a", "O"}, {"b", "I-SKILL"}}));
  CHECK(s.tokens[1].label == Label::begin("SKILL"));

  Segment valid = make_segment({{"a", "B-SKILL"}, {"b", "I-SKILL"}});
  CHECK(repair_bio(valid) == valid);

  Segment s2 = repair_bio(make_segment({{"a", "I-SKILL"}, {"b", "I-SKILL"}}));
  CHECK(s2.tokens[0].label == Label::begin("SKILL"));
  CHECK(s2.tokens[1].label == Label::inside("SKILL"));
}

TEST_CASE("repair_bio idempotent and always yields valid BIO") {
  std::mt19937_64 rng(11);
  static const std::vector<std::string> labels = {"O",       "B-SKILL", "I-SKILL",
                                                  "B-SUBJECT", "I-SUBJECT"};
  for (int i = 0; i < 500; ++i) {
    Segment s;
    std::size_t n = 1 + rng() % 6;
    for (std::size_t t = 0; t < n; ++t)
      s.tokens.push_back({"w", Label::parse(labels[rng() % labels.size()])});
    Segment r = repair_bio(s);
    CHECK(validate_bio(r).empty());
    CHECK(repair_bio(r) == r);
  }
}

TEST_CASE("spans_from_bio basics") {
  auto spans = spans_from_bio(
      make_segment({{"a", "B-SKILL"}, {"b", "I-SKILL"}, {"c", "O"}}));
  REQUIRE(spans.size() == 1);
  CHECK(spans[0].entity_type == "SKILL");
  CHECK(spans[0].start == 0);
  CHECK(spans[0].end == 2);
  CHECK(spans[0].surface == "a b");

  CHECK(spans_from_bio(make_segment({{"a", "O"}, {"b", "O"}})).empty());

  auto adjacent = spans_from_bio(make_segment({{"a", "B-SKILL"}, {"b", "B-SUBJECT"}}));
  REQUIRE(adjacent.size() == 2);
  CHECK(adjacent[0].end == 1);
  CHECK(adjacent[1].start == 1);

  CHECK_THROWS_AS(spans_from_bio(make_segment({{"a", "I-SKILL"}})), corpus_error);
}

TEST_CASE("bio_from_spans inverse of spans_from_bio") {
  std::vector<EntitySpan> spans = {{"SKILL", 0, 2, ""}};
  Segment seg = bio_from_spans({"a", "b", "c"}, spans);
  CHECK(seg.tokens[0].label == Label::begin("SKILL"));
  CHECK(seg.tokens[1].label == Label::inside("SKILL"));
  CHECK(seg.tokens[2].label == Label::outside());

  Segment all_o = bio_from_spans({"a", "b"}, {});
  CHECK(all_o.tokens[0].label.is_outside());

  CHECK_THROWS_AS(bio_from_spans({"a", "b", "c"},
                                 {{"SKILL", 0, 2, ""}, {"SKILL", 1, 3, ""}}),
                  corpus_error);
  CHECK_THROWS_AS(bio_from_spans({"a"}, {{"SKILL", 0, 2, ""}}), corpus_error);

  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    Corpus c = random_corpus(rng);
    for (const auto& doc : c.documents) {
      for (const auto& seg2 : doc.segments) {
        auto spans2 = spans_from_bio(seg2);
        std::vector<std::string> texts;
        for (const auto& t : seg2.tokens) texts.push_back(t.text);
        auto round = spans_from_bio(bio_from_spans(texts, spans2));
        CHECK(round == spans2);
      }
    }
  }
}

TEST_CASE("entity_counts") {
  Corpus empty;
  CHECK(entity_counts(empty).empty());

  Corpus c = single_doc(
      {make_segment({{"a", "B-SKILL"}, {"b", "I-SKILL"}, {"c", "B-SKILL"}})});
  auto counts = entity_counts(c);
  CHECK(counts["SKILL"] == 2);

  std::string csv = entity_counts_csv(c);
  CHECK(csv == "entity,count\nSKILL,2\nTOTAL,2\n");
}

TEST_CASE("entity_counts equals concatenated span extraction") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    Corpus c = random_corpus(rng);
    std::size_t spans = 0;
    for (const auto& doc : c.documents)
      for (const auto& seg : doc.segments) spans += spans_from_bio(seg).size();
    std::size_t counted = 0;
    for (const auto& [t, n] : entity_counts(c)) counted += n;
    CHECK(counted == spans);
  }
}

TEST_CASE("stratified_split sizes follow largest remainder") {
  std::vector<Segment> segs;
  for (int i = 0; i < 10; ++i)
    segs.push_back(make_segment({{"a", "B-SKILL"}}));
  Corpus c = single_doc(segs);
  auto [train, test, val] = stratified_split(c, {0.7, 0.2, 0.1}, 42);
  CHECK(train.segment_count() == 7);
  CHECK(test.segment_count() == 2);
  CHECK(val.segment_count() == 1);
}

TEST_CASE("stratified_split deterministic and partitioning") {
  std::mt19937_64 rng(13);
  Corpus c;
  Document doc;
  doc.id = "d";
  for (int i = 0; i < 40; ++i) {
    doc.segments.push_back(i % 2 == 0 ? make_segment({{"a", "B-SKILL"}, {"b", "O"}})
                                      : make_segment({{"a", "O"}, {"b", "O"}}));
  }
  c.documents.push_back(doc);

  auto [t1, s1, v1] = stratified_split(c, {0.7, 0.2, 0.1}, 99);
  auto [t2, s2, v2] = stratified_split(c, {0.7, 0.2, 0.1}, 99);
  CHECK(t1 == t2);
  CHECK(s1 == s2);
  CHECK(v1 == v2);
  CHECK(t1.segment_count() + s1.segment_count() + v1.segment_count() == 40);

  // Union of parts covers the corpus (multiset of segments).
  auto collect = [](const Corpus& cc) {
    std::vector<Segment> out;
    for (const auto& d : cc.documents)
      for (const auto& s : d.segments) out.push_back(s);
    return out;
  };
  auto all = collect(t1);
  auto s1v = collect(s1);
  auto v1v = collect(v1);
  all.insert(all.end(), s1v.begin(), s1v.end());
  all.insert(all.end(), v1v.begin(), v1v.end());
  CHECK(all.size() == 40);
}

TEST_CASE("stratified_split keeps per-type shares near global") {
  // 100 segments, 50 with a SKILL entity: each part should hold roughly 50%.
  Corpus c;
  Document doc;
  doc.id = "d";
  for (int i = 0; i < 100; ++i) {
    doc.segments.push_back(i < 50 ? make_segment({{"x", "B-SKILL"}, {"y", "O"}})
                                  : make_segment({{"x", "O"}, {"y", "O"}}));
  }
  c.documents.push_back(doc);
  auto [train, test, val] = stratified_split(c, {0.7, 0.2, 0.1}, 7);
  auto share = [](const Corpus& part) {
    auto counts = entity_counts(part);
    return static_cast<double>(counts["SKILL"]) /
           static_cast<double>(part.segment_count());
  };
  CHECK(share(train) == doctest::Approx(0.5).epsilon(0.2));
  CHECK(share(test) == doctest::Approx(0.5).epsilon(0.2));
  CHECK(share(val) == doctest::Approx(0.5).epsilon(0.2));
}

TEST_CASE("stratified_split rejects bad inputs") {
  Corpus c = single_doc({make_segment({{"a", "O"}}), make_segment({{"b", "O"}})});
  CHECK_THROWS_AS(stratified_split(c, {0.7, 0.2, 0.1}, 1), corpus_error);  // < 3 segs
  Corpus c3 = single_doc({make_segment({{"a", "O"}}), make_segment({{"b", "O"}}),
                          make_segment({{"c", "O"}})});
  CHECK_THROWS_AS(stratified_split(c3, {0.7, 0.2, 0.2}, 1), corpus_error);
  CHECK_THROWS_AS(stratified_split(c3, {1.1, -0.05, -0.05}, 1), corpus_error);
}

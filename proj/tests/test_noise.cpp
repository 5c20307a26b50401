#include <doctest.h>

#include <random>

#include "nat/corpus.hpp"
#include "nat/noise.hpp"
#include "nat/utf8.hpp"

using namespace nat;

namespace {

// Plain DP distance, kept separate from align_chars as an oracle.
std::size_t dp_distance(const std::string& a, const std::string& b) {
  auto ca = utf8::decode(a);
  auto cb = utf8::decode(b);
  std::vector<std::vector<std::size_t>> d(ca.size() + 1,
                                          std::vector<std::size_t>(cb.size() + 1));
  for (std::size_t i = 0; i <= ca.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= cb.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= ca.size(); ++i)
    for (std::size_t j = 1; j <= cb.size(); ++j)
      d[i][j] = std::min({d[i - 1][j - 1] + (ca[i - 1] == cb[j - 1] ? 0u : 1u),
                          d[i - 1][j] + 1, d[i][j - 1] + 1});
  return d[ca.size()][cb.size()];
}

std::string random_word(std::mt19937_64& rng, std::size_t max_len = 8) {
  static const std::string alphabet = "abcdl0.,";
  std::size_t n = 1 + rng() % max_len;
  std::string out;
  for (std::size_t i = 0; i < n; ++i) out += alphabet[rng() % alphabet.size()];
  return out;
}

Corpus word_corpus(const std::vector<std::string>& words36, const std::string& label = "O") {
  Corpus c;
  Document doc;
  doc.id = kDefaultDocumentId;
  Segment seg;
  for (const auto& w : words36) seg.tokens.push_back({w, Label::parse(label)});
  doc.segments.push_back(seg);
  c.documents.push_back(doc);
  return c;
}

}  // namespace

TEST_CASE("error table round-trip and merge") {
  std::string csv =
      "recognized;correct;type;frequency\n"
      "i;l;substitution;12\n";
  ErrorTable t = load_error_table(csv);
  REQUIRE(t.entries.size() == 1);
  CHECK(t.entries[0].recognized == "i");
  CHECK(t.entries[0].correct == "l");
  CHECK(t.entries[0].edit_type == EditType::Substitution);
  CHECK(t.entries[0].frequency == 12);
  CHECK(save_error_table(t) == csv);

  ErrorTable empty = load_error_table("recognized;correct;type;frequency\n");
  CHECK(empty.total == 0);

  ErrorTable merged = load_error_table(
      "recognized;correct;type;frequency\ni;l;substitution;3\ni;l;substitution;4\n");
  REQUIRE(merged.entries.size() == 1);
  CHECK(merged.entries[0].frequency == 7);
  CHECK(merged.total == 7);
}

TEST_CASE("error table quoting of literal semicolons") {
  ErrorTable t;
  t.add({";", ":", EditType::Substitution, 2});
  std::string csv = save_error_table(t);
  ErrorTable back = load_error_table(csv);
  REQUIRE(back.entries.size() == 1);
  CHECK(back.entries[0].recognized == ";");
}

TEST_CASE("error table rejects malformed rows") {
  CHECK_THROWS_AS(load_error_table("recognized;correct;type;frequency\ni;l;swap;1\n"),
                  corpus_error);
  CHECK_THROWS_AS(load_error_table("recognized;correct;type;frequency\ni;l;substitution;-2\n"),
                  corpus_error);
  CHECK_THROWS_AS(load_error_table("recognized;correct;type;frequency\ni;l;substitution\n"),
                  corpus_error);
  CHECK_THROWS_AS(load_error_table("bogus header\n"), corpus_error);
}

TEST_CASE("align_chars single substitution (OCR misread)") {
  EditScript script = align_chars("Damennaßschneider", "Damenmaßschneider");
  REQUIRE(script.size() == 1);
  CHECK(script[0].position == 5);
  CHECK(script[0].edit_type == EditType::Substitution);
  CHECK(script[0].recognized == "n");
  CHECK(script[0].correct == "m");
}

TEST_CASE("align_chars identity and dropped punctuation") {
  CHECK(align_chars("abc", "abc").empty());

  EditScript script = align_chars("Werkstoffe", "Werkstoffe,");
  REQUIRE(script.size() == 1);
  CHECK(script[0].position == 10);
  CHECK(script[0].edit_type == EditType::Deletion);
  CHECK(script[0].correct == ",");
}

TEST_CASE("align_chars script replays noisy from clean, cost is Levenshtein") {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 2000; ++i) {
    std::string clean = random_word(rng);
    std::string noisy = random_word(rng);
    EditScript script = align_chars(noisy, clean);
    CHECK(apply_edit_script(clean, script) == noisy);
    CHECK(script.size() == dp_distance(noisy, clean));
    CHECK(levenshtein(noisy, clean) == dp_distance(noisy, clean));
  }
}

TEST_CASE("analyze_errors") {
  Corpus clean = word_corpus({"Metall", "und", "Werkstoffe"});
  Corpus same = clean;
  CHECK(analyze_errors(same, clean).total == 0);

  Corpus noisy = word_corpus({"Metali", "und", "Werkstoffe"});
  ErrorTable t = analyze_errors(noisy, clean);
  REQUIRE(t.entries.size() == 1);
  CHECK(t.entries[0].recognized == "i");
  CHECK(t.entries[0].correct == "l");
  CHECK(t.entries[0].edit_type == EditType::Substitution);
  CHECK(t.entries[0].frequency == 1);

  Corpus mismatched = word_corpus({"Metall", "und"});
  CHECK_THROWS_AS(analyze_errors(mismatched, clean), corpus_error);
}

TEST_CASE("perturb_word with single-entry table and lambda 1") {
  ErrorTable t;
  t.add({"i", "l", EditType::Substitution, 1});
  std::mt19937_64 rng(1);
  for (int i = 0; i < 200; ++i) {
    std::string out = perturb_word("Metall", t, rng, 1.0);
    bool ok = out == "Metail" || out == "Metali";
    CHECK(ok);
  }
}

TEST_CASE("perturb_word fallback deletion can yield 'b' from 'ab'") {
  ErrorTable empty;
  bool found = false;
  for (std::uint64_t seed = 0; seed < 200 && !found; ++seed) {
    std::mt19937_64 rng(seed);
    if (perturb_word("ab", empty, rng, 0.0) == "b") found = true;
  }
  CHECK(found);
}

TEST_CASE("perturb_word output is always edit distance 1") {
  ErrorTable t = default_error_table();
  std::mt19937_64 rng(23);
  for (int i = 0; i < 3000; ++i) {
    std::string w = random_word(rng);
    if (!is_perturbable(w)) continue;
    std::string out = perturb_word(w, t, rng, 0.5);
    CHECK(levenshtein(w, out) == 1);
  }
}

TEST_CASE("perturb_word rejects non-perturbable words") {
  ErrorTable t = default_error_table();
  std::mt19937_64 rng(1);
  CHECK_THROWS_AS(perturb_word("a", t, rng, 0.5), corpus_error);
  CHECK_THROWS_AS(perturb_word(",.", t, rng, 0.5), corpus_error);
  CHECK_FALSE(is_perturbable("a"));
  CHECK_FALSE(is_perturbable(",."));
  CHECK(is_perturbable("ab"));
  CHECK(is_perturbable("a,"));
}

TEST_CASE("inject_noise preserves structure and labels") {
  Corpus punct = word_corpus({",", ".", "-"});
  ErrorTable t = default_error_table();
  CHECK(inject_noise(punct, t, 1, 0.8) == punct);

  Corpus clean = word_corpus({"Metall", "Facharbeiter", "prüfen"}, "B-SKILL");
  Corpus noised = inject_noise(clean, t, 1, 0.8);
  CHECK(noised.segment_count() == clean.segment_count());
  CHECK(noised.token_count() == clean.token_count());
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(noised.documents[0].segments[0].tokens[i].label ==
          clean.documents[0].segments[0].tokens[i].label);
    CHECK(noised.documents[0].segments[0].tokens[i].text !=
          clean.documents[0].segments[0].tokens[i].text);
  }

  CHECK(inject_noise(clean, t, 1, 0.8) == noised);               // determinism
  CHECK(write_conll(inject_noise(clean, t, 1, 0.8)) == write_conll(noised));
}

TEST_CASE("make_artificial doubles segments and entities") {
  Corpus clean;
  Document doc;
  doc.id = kDefaultDocumentId;
  for (int i = 0; i < 34; ++i) {
    Segment seg;
    seg.tokens.push_back({"Facharbeiter", Label::begin("JOB_TITLE")});
    seg.tokens.push_back({"gesucht", Label::outside()});
    doc.segments.push_back(seg);
  }
  clean.documents.push_back(doc);
  ErrorTable t = default_error_table();
  Corpus doubled = make_artificial(clean, t, 5, 0.8);
  CHECK(doubled.segment_count() == 68);
  auto before = entity_counts(clean);
  auto after = entity_counts(doubled);
  for (const auto& [type, n] : before) CHECK(after[type] == 2 * n);
  // Clean half first, noised half second.
  CHECK(doubled.documents[0].segments[0] == clean.documents[0].segments[0]);
  CHECK(doubled.documents[0].segments[34].tokens[0].text != "Facharbeiter");
}

TEST_CASE("inject-then-analyze recovers the table support") {
  ErrorTable src;
  src.add({"i", "l", EditType::Substitution, 6});
  src.add({"", ",", EditType::Deletion, 3});
  src.add({"'", "", EditType::Insertion, 1});

  Corpus clean;
  Document doc;
  doc.id = kDefaultDocumentId;
  std::mt19937_64 rng(31);
  for (int s = 0; s < 1000; ++s) {
    Segment seg;
    for (int t = 0; t < 10; ++t) seg.tokens.push_back({"kal,mel", Label::outside()});
    doc.segments.push_back(seg);
  }
  clean.documents.push_back(doc);

  Corpus noisy = inject_noise(clean, src, 77, 0.8);
  ErrorTable recovered = analyze_errors(noisy, clean);
  for (const auto& e : src.entries) {
    bool present = false;
    for (const auto& r : recovered.entries) {
      if (r.recognized == e.recognized && r.correct == e.correct &&
          r.edit_type == e.edit_type)
        present = true;
    }
    CHECK(present);
  }
}

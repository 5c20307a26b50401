#include "nat/synth.hpp"

#include <random>
#include <sstream>

namespace nat {

namespace {

const std::vector<std::string> kJobTitles = {
    "Facharbeiter", "Metallbauer", "Elektriker", "Werkzeugmacher", "Chemielaborant",
    "Industriekaufmann", "Zerspanungsmechaniker", "Damenmaßschneider", "Tischler",
    "Schlosser", "Feinmechaniker", "Galvaniseur", "Dreher", "Former",
    "Gießereimechaniker", "Textillaborant", "Maschinenschlosser", "Betriebsschlosser",
    "Werkstoffprüfer", "Technischer Zeichner", "Pharmazeutisch-technischer Assistent",
    "Landwirtschaftlicher Gehilfe", "Krankenpflegehelfer", "Bürokaufmann"};

const std::vector<std::string> kJobTitleGroups = {
    "Metallberufe", "Elektroberufe", "Bauberufe",        "Textilberufe",
    "Chemieberufe", "Holzberufe",    "Agrarberufe",      "Pflegeberufe",
    "Verwaltungsberufe", "Drucktechnische Berufe"};

const std::vector<std::string> kSkills = {
    "Aufmerksamkeit", "Sorgfalt", "Handgeschick", "Teamfähigkeit", "Belastbarkeit",
    "Zuverlässigkeit", "Genauigkeit", "Ausdauer", "Konzentration",
    "Räumliches Vorstellungsvermögen", "Technisches Verständnis",
    "Rechnerisches Denken"};

const std::vector<std::string> kSubjects = {
    "Mathematik", "Chemie", "Physik", "Werkstoffkunde", "Fachzeichnen",
    "Elektrotechnik", "Maschinenkunde", "Buchführung", "Deutsch", "Technologie"};

const std::vector<std::string> kActivities = {
    "Schweißen", "Drehen", "Fräsen", "Löten", "Montieren", "Prüfen von Werkstoffen",
    "Bedienen von Maschinen", "Messen", "Schleifen", "Bohren", "Warten von Anlagen",
    "Lackieren"};

const std::vector<std::string> kFillers = {
    "der",        "die",       "das",       "und",       "mit",       "für",
    "sowie",      "wird",      "werden",    "gesucht",   "verlangt",  "gefordert",
    "erforderlich", "wichtig", "ist",       "sind",      "im",        "Bereich",
    "nach",       "vor",       "allem",     "außerdem",  "zudem",     "ferner",
    "auch",       "unter",     "anderem",   "besonders", "gute",      "solide",
    "Kenntnisse", "Erfahrung", "Ausbildung", "Lehre",    "Berufsschule", "Betrieb",
    "Werkstatt",  "täglich",   "regelmäßig"};

std::vector<std::string> split_words(const std::string& phrase) {
  std::istringstream in(phrase);
  std::vector<std::string> out;
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

}  // namespace

std::vector<Gazetteer> demo_gazetteers() {
  return {{"JOB_TITLE", kJobTitles},
          {"JOB_TITLE_GROUP", kJobTitleGroups},
          {"SKILL", kSkills},
          {"SUBJECT", kSubjects},
          {"ACTIVITY", kActivities}};
}

Corpus synth_corpus(std::size_t segments, std::uint64_t seed) {
  auto gazetteers = demo_gazetteers();
  std::mt19937_64 rng(seed);
  auto pick = [&rng](const std::vector<std::string>& v) -> const std::string& {
    return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
  };

  Corpus corpus;
  Document doc;
  doc.id = kDefaultDocumentId;
  for (std::size_t s = 0; s < segments; ++s) {
    Segment seg;
    auto add_fillers = [&](std::size_t n) {
      for (std::size_t i = 0; i < n; ++i)
        seg.tokens.push_back({pick(kFillers), Label::outside()});
    };
    auto add_entity = [&]() {
      const Gazetteer& gaz =
          gazetteers[std::uniform_int_distribution<std::size_t>(0, gazetteers.size() - 1)(rng)];
      auto words = split_words(pick(gaz.phrases));
      for (std::size_t i = 0; i < words.size(); ++i) {
        Label lab = i == 0 ? Label::begin(gaz.entity_type)
                           : Label::inside(gaz.entity_type);
        seg.tokens.push_back({words[i], lab});
      }
    };
    add_fillers(1 + rng() % 3);
    add_entity();
    add_fillers(1 + rng() % 2);
    if (rng() % 3 == 0) {
      add_entity();
      add_fillers(1);
    }
    doc.segments.push_back(std::move(seg));
  }
  corpus.documents.push_back(std::move(doc));
  return corpus;
}

}  // namespace nat

#include "nat/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace nat {

bool is_valid_entity_type(const std::string& name) {
  if (name.empty()) return false;
  for (char c : name)
    if (!((c >= 'A' && c <= 'Z') || c == '_')) return false;
  return true;
}

std::string Label::str() const {
  switch (kind) {
    case Kind::Outside: return "O";
    case Kind::Begin: return "B-" + type;
    case Kind::Inside: return "I-" + type;
  }
  return "O";
}

Label Label::parse(const std::string& text) {
  if (text == "O") return outside();
  if (text.size() >= 3 && text[1] == '-' && (text[0] == 'B' || text[0] == 'I')) {
    std::string type = text.substr(2);
    if (is_valid_entity_type(type))
      return text[0] == 'B' ? begin(std::move(type)) : inside(std::move(type));
  }
  throw corpus_error("unknown label syntax: '" + text + "'");
}

std::size_t Corpus::segment_count() const {
  std::size_t n = 0;
  for (const auto& d : documents) n += d.segments.size();
  return n;
}

std::size_t Corpus::token_count() const {
  std::size_t n = 0;
  for (const auto& d : documents)
    for (const auto& s : d.segments) n += s.tokens.size();
  return n;
}

namespace {

constexpr const char* kDocStart = "-DOCSTART-";

bool has_whitespace(const std::string& s) {
  return s.find_first_of(" \t\r\n\v\f") != std::string::npos;
}

}  // namespace

Corpus parse_conll(const std::string& text) {
  Corpus corpus;
  Document current_doc;
  current_doc.id = kDefaultDocumentId;
  Segment current_seg;
  bool doc_started = false;        // saw any content for current_doc
  bool last_line_blank = false;

  auto close_segment = [&](std::size_t line_no) {
    if (current_seg.tokens.empty()) {
      throw corpus_error("empty segment between two blank lines", line_no);
    }
    current_doc.segments.push_back(std::move(current_seg));
    current_seg = Segment{};
  };
  auto close_document = [&]() {
    if (!current_seg.tokens.empty()) {
      current_doc.segments.push_back(std::move(current_seg));
      current_seg = Segment{};
    }
    if (!current_doc.segments.empty()) corpus.documents.push_back(std::move(current_doc));
    current_doc = Document{};
  };

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    if (pos == text.size()) {
      if (line_no == 0 || text.back() == '\n') break;  // no dangling line
    }
    std::size_t eol = text.find('\n', pos);
    std::string line = text.substr(pos, eol == std::string::npos ? std::string::npos
                                                                 : eol - pos);
    pos = eol == std::string::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();

    if (line.empty()) {
      if (last_line_blank || (!doc_started && current_doc.segments.empty() &&
                              current_seg.tokens.empty())) {
        throw corpus_error("empty segment between two blank lines", line_no);
      }
      close_segment(line_no);
      last_line_blank = true;
      continue;
    }
    last_line_blank = false;

    if (line.rfind(kDocStart, 0) == 0) {
      close_document();
      std::string id = line.substr(std::string(kDocStart).size());
      if (!id.empty() && id[0] == ' ') id = id.substr(1);
      if (id.empty()) throw corpus_error("document marker missing id", line_no);
      current_doc.id = id;
      doc_started = true;
      continue;
    }

    std::size_t tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
      throw corpus_error("malformed line (expected <token>\\t<label>): '" + line + "'",
                         line_no);
    }
    std::string tok_text = line.substr(0, tab);
    std::string lab_text = line.substr(tab + 1);
    if (tok_text.empty() || has_whitespace(tok_text)) {
      throw corpus_error("token text empty or contains whitespace", line_no);
    }
    Label label;
    try {
      label = Label::parse(lab_text);
    } catch (const corpus_error& e) {
      throw corpus_error(e.what(), line_no);
    }
    current_seg.tokens.push_back(Token{std::move(tok_text), std::move(label)});
    doc_started = true;
  }
  close_document();

  // All-default single-document corpora keep the default id; documents created
  // by explicit markers already carry theirs.
  return corpus;
}

std::string write_conll(const Corpus& corpus) {
  std::string out;
  bool emit_markers = corpus.documents.size() > 1 ||
                      (corpus.documents.size() == 1 &&
                       corpus.documents[0].id != kDefaultDocumentId);
  for (const auto& doc : corpus.documents) {
    if (emit_markers) {
      if (!out.empty()) out += '\n';
      out += kDocStart;
      out += ' ';
      out += doc.id;
      out += '\n';
    }
    for (std::size_t j = 0; j < doc.segments.size(); ++j) {
      if (j > 0 || (!emit_markers && !out.empty())) out += '\n';
      for (const auto& tok : doc.segments[j].tokens) {
        out += tok.text;
        out += '\t';
        out += tok.label.str();
        out += '\n';
      }
    }
  }
  return out;
}

std::vector<Violation> validate_bio(const Segment& segment) {
  std::vector<Violation> out;
  const Label* prev = nullptr;
  for (std::size_t i = 0; i < segment.tokens.size(); ++i) {
    const Label& lab = segment.tokens[i].label;
    if (lab.kind == Label::Kind::Inside) {
      if (!prev || prev->kind == Label::Kind::Outside) {
        out.push_back({i, Violation::Reason::IWithoutB});
      } else if (prev->type != lab.type) {
        out.push_back({i, Violation::Reason::ITypeMismatch});
      }
    }
    prev = &lab;
  }
  return out;
}

Segment repair_bio(const Segment& segment) {
  Segment out = segment;
  const Label* prev = nullptr;
  for (auto& tok : out.tokens) {
    if (tok.label.kind == Label::Kind::Inside) {
      bool ok = prev && prev->kind != Label::Kind::Outside && prev->type == tok.label.type;
      if (!ok) tok.label.kind = Label::Kind::Begin;
    }
    prev = &tok.label;
  }
  return out;
}

Corpus repair_bio(const Corpus& corpus) {
  Corpus out = corpus;
  for (auto& doc : out.documents)
    for (auto& seg : doc.segments) seg = repair_bio(seg);
  return out;
}

std::vector<EntitySpan> spans_from_bio(const Segment& segment) {
  auto violations = validate_bio(segment);
  if (!violations.empty()) {
    throw corpus_error("invalid BIO sequence at token index " +
                       std::to_string(violations.front().index));
  }
  std::vector<EntitySpan> spans;
  for (std::size_t i = 0; i < segment.tokens.size(); ++i) {
    const Label& lab = segment.tokens[i].label;
    if (lab.kind == Label::Kind::Begin) {
      spans.push_back({lab.type, i, i + 1, segment.tokens[i].text});
    } else if (lab.kind == Label::Kind::Inside) {
      spans.back().end = i + 1;
      spans.back().surface += " " + segment.tokens[i].text;
    }
  }
  return spans;
}

Segment bio_from_spans(const std::vector<std::string>& tokens,
                       const std::vector<EntitySpan>& spans) {
  Segment seg;
  seg.tokens.reserve(tokens.size());
  for (const auto& t : tokens) seg.tokens.push_back({t, Label::outside()});

  std::vector<EntitySpan> sorted = spans;
  std::sort(sorted.begin(), sorted.end(),
            [](const EntitySpan& a, const EntitySpan& b) { return a.start < b.start; });
  std::size_t prev_end = 0;
  for (const auto& sp : sorted) {
    if (sp.start >= sp.end || sp.end > tokens.size())
      throw corpus_error("span out of range [" + std::to_string(sp.start) + "," +
                         std::to_string(sp.end) + ")");
    if (sp.start < prev_end) throw corpus_error("overlapping spans");
    prev_end = sp.end;
    seg.tokens[sp.start].label = Label::begin(sp.entity_type);
    for (std::size_t i = sp.start + 1; i < sp.end; ++i)
      seg.tokens[i].label = Label::inside(sp.entity_type);
  }
  return seg;
}

std::map<EntityType, std::size_t> entity_counts(const Corpus& corpus) {
  std::map<EntityType, std::size_t> counts;
  for (const auto& doc : corpus.documents)
    for (const auto& seg : doc.segments)
      for (const auto& sp : spans_from_bio(seg)) ++counts[sp.entity_type];
  return counts;
}

std::string entity_counts_csv(const Corpus& corpus) {
  auto counts = entity_counts(corpus);
  std::string out = "entity,count\n";
  std::size_t total = 0;
  for (const auto& [type, n] : counts) {
    out += type + "," + std::to_string(n) + "\n";
    total += n;
  }
  out += "TOTAL," + std::to_string(total) + "\n";
  return out;
}

namespace {

// Largest-remainder apportionment of n items over the given ratios.
std::vector<std::size_t> apportion(const std::vector<double>& ratios, std::size_t n) {
  std::vector<std::size_t> sizes(ratios.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    double exact = ratios[i] * static_cast<double>(n);
    sizes[i] = static_cast<std::size_t>(std::floor(exact));
    assigned += sizes[i];
    remainders.push_back({exact - std::floor(exact), i});
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < n; ++k, ++assigned) {
    ++sizes[remainders[k % remainders.size()].second];
  }
  return sizes;
}

}  // namespace

std::tuple<Corpus, Corpus, Corpus> stratified_split(const Corpus& corpus,
                                                    SplitRatios ratios,
                                                    std::uint64_t seed) {
  std::vector<double> r = {ratios.train, ratios.test, ratios.val};
  double sum = r[0] + r[1] + r[2];
  if (r[0] <= 0 || r[1] <= 0 || r[2] <= 0 || std::abs(sum - 1.0) > 1e-9)
    throw corpus_error("split ratios must be positive and sum to 1");
  std::size_t n = corpus.segment_count();
  if (n < 3) throw corpus_error("corpus has fewer segments than parts");

  struct SegRef {
    std::size_t doc, seg;
    std::map<EntityType, std::size_t> counts;
    std::size_t total = 0;
  };
  std::vector<SegRef> refs;
  std::map<EntityType, double> global;
  for (std::size_t d = 0; d < corpus.documents.size(); ++d) {
    for (std::size_t s = 0; s < corpus.documents[d].segments.size(); ++s) {
      SegRef ref{d, s, {}, 0};
      for (const auto& sp : spans_from_bio(corpus.documents[d].segments[s])) {
        ++ref.counts[sp.entity_type];
        ++ref.total;
        global[sp.entity_type] += 1.0;
      }
      refs.push_back(std::move(ref));
    }
  }

  // Seeded shuffle breaks ties, then entity-rich segments are placed first so
  // the greedy quota chase sees the hard cases while all parts are open.
  std::mt19937_64 rng(seed);
  std::shuffle(refs.begin(), refs.end(), rng);
  std::stable_sort(refs.begin(), refs.end(),
                   [](const SegRef& a, const SegRef& b) { return a.total > b.total; });

  std::vector<std::size_t> sizes = apportion(r, n);
  std::vector<std::size_t> filled(3, 0);
  std::vector<std::map<EntityType, double>> have(3);
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> assignment(3);

  for (const auto& ref : refs) {
    int best = -1;
    double best_score = 0.0;
    double best_room = -1.0;
    for (int p = 0; p < 3; ++p) {
      if (filled[p] >= sizes[p]) continue;
      double share = static_cast<double>(sizes[p]) / static_cast<double>(n);
      double score = 0.0;
      for (const auto& [type, cnt] : ref.counts) {
        double quota = share * global[type];
        double deficit = quota - have[p][type];
        score += static_cast<double>(cnt) * deficit / std::max(1.0, global[type]);
      }
      double room = static_cast<double>(sizes[p] - filled[p]) /
                    static_cast<double>(sizes[p]);
      if (best < 0 || score > best_score + 1e-12 ||
          (std::abs(score - best_score) <= 1e-12 && room > best_room + 1e-12)) {
        best = p;
        best_score = score;
        best_room = room;
      }
    }
    ++filled[best];
    for (const auto& [type, cnt] : ref.counts)
      have[best][type] += static_cast<double>(cnt);
    assignment[best].push_back({ref.doc, ref.seg});
  }

  auto build = [&corpus](std::vector<std::pair<std::size_t, std::size_t>> picks) {
    std::sort(picks.begin(), picks.end());
    Corpus out;
    std::size_t last_doc = static_cast<std::size_t>(-1);
    for (const auto& [d, s] : picks) {
      if (d != last_doc) {
        Document doc;
        doc.id = corpus.documents[d].id;
        doc.metadata = corpus.documents[d].metadata;
        out.documents.push_back(std::move(doc));
        last_doc = d;
      }
      out.documents.back().segments.push_back(corpus.documents[d].segments[s]);
    }
    return out;
  };
  return {build(assignment[0]), build(assignment[1]), build(assignment[2])};
}

}  // namespace nat

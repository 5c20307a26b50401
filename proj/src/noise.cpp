#include "nat/noise.hpp"

#include <algorithm>
#include <cctype>

#include "nat/utf8.hpp"

namespace nat {

std::string to_string(EditType t) {
  switch (t) {
    case EditType::Substitution: return "substitution";
    case EditType::Deletion: return "deletion";
    case EditType::Insertion: return "insertion";
  }
  return "substitution";
}

EditType edit_type_from_string(const std::string& s) {
  if (s == "substitution") return EditType::Substitution;
  if (s == "deletion") return EditType::Deletion;
  if (s == "insertion") return EditType::Insertion;
  throw corpus_error("unknown edit type: '" + s + "'");
}

void ErrorTable::add(ErrorEntry entry) {
  switch (entry.edit_type) {
    case EditType::Substitution:
      if (entry.recognized.empty() || entry.correct.empty() ||
          entry.recognized == entry.correct)
        throw corpus_error("substitution entry needs two distinct non-empty sides");
      break;
    case EditType::Deletion:
      if (!entry.recognized.empty() || entry.correct.empty())
        throw corpus_error("deletion entry needs empty recognized, non-empty correct");
      break;
    case EditType::Insertion:
      if (entry.recognized.empty() || !entry.correct.empty())
        throw corpus_error("insertion entry needs non-empty recognized, empty correct");
      break;
  }
  if (entry.frequency < 1) throw corpus_error("entry frequency must be >= 1");
  total += entry.frequency;
  for (auto& e : entries) {
    if (e.recognized == entry.recognized && e.correct == entry.correct &&
        e.edit_type == entry.edit_type) {
      e.frequency += entry.frequency;
      return;
    }
  }
  entries.push_back(std::move(entry));
}

void ErrorTable::sort_by_frequency() {
  std::stable_sort(entries.begin(), entries.end(),
                   [](const ErrorEntry& a, const ErrorEntry& b) {
                     if (a.frequency != b.frequency) return a.frequency > b.frequency;
                     if (a.correct != b.correct) return a.correct < b.correct;
                     if (a.recognized != b.recognized) return a.recognized < b.recognized;
                     return static_cast<int>(a.edit_type) < static_cast<int>(b.edit_type);
                   });
}

namespace {

std::vector<std::string> split_csv_row(const std::string& line, std::size_t row_no) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"' && field.empty()) {
      quoted = true;
    } else if (c == ';') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field += c;
    }
  }
  if (quoted) throw corpus_error("unterminated quote", row_no);
  fields.push_back(std::move(field));
  return fields;
}

std::string csv_quote(const std::string& s) {
  if (s.find(';') == std::string::npos && s.find('"') == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

constexpr const char* kTableHeader = "recognized;correct;type;frequency";

}  // namespace

ErrorTable load_error_table(const std::string& csv) {
  ErrorTable table;
  std::size_t row_no = 0;
  std::size_t pos = 0;
  bool saw_header = false;
  while (pos < csv.size()) {
    std::size_t eol = csv.find('\n', pos);
    std::string line =
        csv.substr(pos, eol == std::string::npos ? std::string::npos : eol - pos);
    pos = eol == std::string::npos ? csv.size() : eol + 1;
    ++row_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!saw_header) {
      if (line != kTableHeader)
        throw corpus_error("expected header '" + std::string(kTableHeader) + "'", row_no);
      saw_header = true;
      continue;
    }
    auto fields = split_csv_row(line, row_no);
    if (fields.size() != 4)
      throw corpus_error("expected 4 fields, got " + std::to_string(fields.size()),
                         row_no);
    ErrorEntry entry;
    entry.recognized = fields[0];
    entry.correct = fields[1];
    try {
      entry.edit_type = edit_type_from_string(fields[2]);
      long long freq = std::stoll(fields[3]);
      if (freq < 1) throw corpus_error("frequency must be positive");
      entry.frequency = static_cast<std::uint64_t>(freq);
      table.add(std::move(entry));
    } catch (const corpus_error& e) {
      throw corpus_error(e.what(), row_no);
    } catch (const std::exception&) {
      throw corpus_error("malformed frequency '" + fields[3] + "'", row_no);
    }
  }
  if (!saw_header && !csv.empty())
    throw corpus_error("expected header '" + std::string(kTableHeader) + "'", 1);
  return table;
}

std::string save_error_table(const ErrorTable& table) {
  std::string out = kTableHeader;
  out += '\n';
  for (const auto& e : table.entries) {
    out += csv_quote(e.recognized) + ";" + csv_quote(e.correct) + ";" +
           to_string(e.edit_type) + ";" + std::to_string(e.frequency) + "\n";
  }
  return out;
}

ErrorTable default_error_table() {
  ErrorTable t;
  t.add({"", ",", EditType::Deletion, 300});
  t.add({"", ".", EditType::Deletion, 180});
  t.add({"i", "l", EditType::Substitution, 120});
  t.add({"o", "0", EditType::Substitution, 70});
  t.add({",", ".", EditType::Substitution, 50});
  t.add({".", ",", EditType::Substitution, 40});
  t.add({",", "", EditType::Insertion, 25});
  t.add({"'", "", EditType::Insertion, 15});
  return t;
}

EditScript align_chars(const std::string& noisy, const std::string& clean) {
  auto a = utf8::decode(noisy);  // rows
  auto b = utf8::decode(clean);  // cols
  std::size_t n = a.size(), m = b.size();
  std::vector<std::vector<std::uint32_t>> dp(n + 1, std::vector<std::uint32_t>(m + 1));
  for (std::size_t i = 0; i <= n; ++i) dp[i][0] = static_cast<std::uint32_t>(i);
  for (std::size_t j = 0; j <= m; ++j) dp[0][j] = static_cast<std::uint32_t>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      std::uint32_t best = dp[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      best = std::min(best, dp[i][j - 1] + 1);  // clean char dropped by OCR
      best = std::min(best, dp[i - 1][j] + 1);  // spurious char in OCR output
      dp[i][j] = best;
    }
  }

  // Traceback preference: match > substitution > deletion > insertion.
  EditScript script;
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && a[i - 1] == b[j - 1] && dp[i][j] == dp[i - 1][j - 1]) {
      --i;
      --j;
    } else if (i > 0 && j > 0 && dp[i][j] == dp[i - 1][j - 1] + 1) {
      script.push_back({j - 1, EditType::Substitution, utf8::encode_one(a[i - 1]),
                        utf8::encode_one(b[j - 1])});
      --i;
      --j;
    } else if (j > 0 && dp[i][j] == dp[i][j - 1] + 1) {
      script.push_back({j - 1, EditType::Deletion, "", utf8::encode_one(b[j - 1])});
      --j;
    } else {
      script.push_back({j, EditType::Insertion, utf8::encode_one(a[i - 1]), ""});
      --i;
    }
  }
  std::reverse(script.begin(), script.end());
  return script;
}

std::string apply_edit_script(const std::string& clean, const EditScript& script) {
  auto cps = utf8::decode(clean);
  std::vector<char32_t> out;
  std::size_t pos = 0;
  for (const auto& op : script) {
    while (pos < op.position && pos < cps.size()) out.push_back(cps[pos++]);
    switch (op.edit_type) {
      case EditType::Substitution: {
        auto rec = utf8::decode(op.recognized);
        out.insert(out.end(), rec.begin(), rec.end());
        pos += utf8::length(op.correct);
        break;
      }
      case EditType::Deletion:
        pos += utf8::length(op.correct);
        break;
      case EditType::Insertion: {
        auto rec = utf8::decode(op.recognized);
        out.insert(out.end(), rec.begin(), rec.end());
        break;
      }
    }
  }
  while (pos < cps.size()) out.push_back(cps[pos++]);
  return utf8::encode(out);
}

std::size_t levenshtein(const std::string& sa, const std::string& sb) {
  auto a = utf8::decode(sa);
  auto b = utf8::decode(sb);
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = std::min({prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1), prev[j] + 1,
                         cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

ErrorTable analyze_errors(const Corpus& noisy, const Corpus& clean) {
  if (noisy.documents.size() != clean.documents.size())
    throw corpus_error("corpora differ in document count");
  ErrorTable table;
  for (std::size_t d = 0; d < noisy.documents.size(); ++d) {
    const auto& nd = noisy.documents[d];
    const auto& cd = clean.documents[d];
    if (nd.segments.size() != cd.segments.size())
      throw corpus_error("segment count mismatch in document '" + nd.id + "'");
    for (std::size_t s = 0; s < nd.segments.size(); ++s) {
      const auto& ns = nd.segments[s];
      const auto& cs = cd.segments[s];
      if (ns.tokens.size() != cs.tokens.size())
        throw corpus_error("token count mismatch in document '" + nd.id +
                           "', segment " + std::to_string(s));
      for (std::size_t t = 0; t < ns.tokens.size(); ++t) {
        if (ns.tokens[t].label != cs.tokens[t].label)
          throw corpus_error("label mismatch in document '" + nd.id + "', segment " +
                             std::to_string(s) + ", token " + std::to_string(t));
        if (ns.tokens[t].text == cs.tokens[t].text) continue;
        for (const auto& op : align_chars(ns.tokens[t].text, cs.tokens[t].text)) {
          table.add({op.recognized, op.correct, op.edit_type, 1});
        }
      }
    }
  }
  table.sort_by_frequency();
  return table;
}

bool is_perturbable(const std::string& word) {
  auto cps = utf8::decode(word);
  if (cps.size() < 2) return false;
  for (char32_t c : cps) {
    if ((c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
        c >= 0x80)
      return true;
  }
  return false;
}

namespace {

// Start positions of `needle` within `hay`.
std::vector<std::size_t> occurrences(const std::vector<char32_t>& hay,
                                     const std::vector<char32_t>& needle) {
  std::vector<std::size_t> out;
  if (needle.empty() || needle.size() > hay.size()) return out;
  for (std::size_t i = 0; i + needle.size() <= hay.size(); ++i) {
    if (std::equal(needle.begin(), needle.end(), hay.begin() + i)) out.push_back(i);
  }
  return out;
}

char32_t random_class_char(char32_t like, std::mt19937_64& rng) {
  const char* alphabet;
  std::size_t len;
  if (like >= '0' && like <= '9') {
    alphabet = "0123456789";
    len = 10;
  } else if (like >= 'A' && like <= 'Z') {
    alphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZ";
    len = 26;
  } else {
    alphabet = "abcdefghijklmnopqrstuvwxyz";
    len = 26;
  }
  while (true) {
    char32_t c = static_cast<char32_t>(
        alphabet[std::uniform_int_distribution<std::size_t>(0, len - 1)(rng)]);
    if (c != like) return c;
  }
}

}  // namespace

std::string perturb_word(const std::string& word, const ErrorTable& table,
                         std::mt19937_64& rng, double table_bias) {
  if (!is_perturbable(word))
    throw corpus_error("word '" + word + "' is not perturbable");
  auto cps = utf8::decode(word);

  bool use_table =
      std::uniform_real_distribution<double>(0.0, 1.0)(rng) < table_bias;
  if (use_table && !table.entries.empty()) {
    struct Candidate {
      const ErrorEntry* entry;
      std::vector<std::size_t> positions;
    };
    std::vector<Candidate> candidates;
    std::uint64_t weight_sum = 0;
    for (const auto& e : table.entries) {
      Candidate cand{&e, {}};
      if (e.edit_type == EditType::Insertion) {
        for (std::size_t p = 0; p <= cps.size(); ++p) cand.positions.push_back(p);
      } else {
        auto needle = utf8::decode(e.correct);
        cand.positions = occurrences(cps, needle);
        if (e.edit_type == EditType::Deletion && needle.size() >= cps.size())
          cand.positions.clear();  // deleting everything would empty the token
      }
      if (!cand.positions.empty()) {
        weight_sum += e.frequency;
        candidates.push_back(std::move(cand));
      }
    }
    if (!candidates.empty()) {
      std::uint64_t pick =
          std::uniform_int_distribution<std::uint64_t>(0, weight_sum - 1)(rng);
      const Candidate* chosen = &candidates.back();
      for (const auto& c : candidates) {
        if (pick < c.entry->frequency) {
          chosen = &c;
          break;
        }
        pick -= c.entry->frequency;
      }
      std::size_t pos = chosen->positions[std::uniform_int_distribution<std::size_t>(
          0, chosen->positions.size() - 1)(rng)];
      EditScript script = {{pos, chosen->entry->edit_type, chosen->entry->recognized,
                            chosen->entry->correct}};
      return apply_edit_script(word, script);
    }
  }

  // Uniform fallback: substitution, deletion, insertion equiprobable.
  int kind = std::uniform_int_distribution<int>(0, 2)(rng);
  if (kind == 0) {
    std::size_t pos = std::uniform_int_distribution<std::size_t>(0, cps.size() - 1)(rng);
    cps[pos] = random_class_char(cps[pos], rng);
  } else if (kind == 1) {
    std::size_t pos = std::uniform_int_distribution<std::size_t>(0, cps.size() - 1)(rng);
    cps.erase(cps.begin() + static_cast<std::ptrdiff_t>(pos));
  } else {
    std::size_t pos = std::uniform_int_distribution<std::size_t>(0, cps.size())(rng);
    char32_t like = cps[pos < cps.size() ? pos : cps.size() - 1];
    cps.insert(cps.begin() + static_cast<std::ptrdiff_t>(pos),
               random_class_char(like, rng));
  }
  return utf8::encode(cps);
}

std::uint64_t derive_stream_seed(std::uint64_t seed, const std::string& doc_id,
                                 std::size_t segment_index) {
  // FNV-1a over (seed, doc id, segment index), then splitmix64 finalization.
  std::uint64_t h = 14695981039346656037ull;
  auto mix_byte = [&h](unsigned char b) {
    h ^= b;
    h *= 1099511628211ull;
  };
  for (int k = 0; k < 8; ++k) mix_byte(static_cast<unsigned char>(seed >> (8 * k)));
  for (char c : doc_id) mix_byte(static_cast<unsigned char>(c));
  for (int k = 0; k < 8; ++k)
    mix_byte(static_cast<unsigned char>(static_cast<std::uint64_t>(segment_index) >>
                                        (8 * k)));
  h += 0x9e3779b97f4a7c15ull;
  h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ull;
  h = (h ^ (h >> 27)) * 0x94d049bb133111ebull;
  return h ^ (h >> 31);
}

Corpus inject_noise(const Corpus& corpus, const ErrorTable& table, std::uint64_t seed,
                    double table_bias) {
  Corpus out = corpus;
  for (auto& doc : out.documents) {
    for (std::size_t s = 0; s < doc.segments.size(); ++s) {
      std::mt19937_64 rng(derive_stream_seed(seed, doc.id, s));
      for (auto& tok : doc.segments[s].tokens) {
        if (is_perturbable(tok.text))
          tok.text = perturb_word(tok.text, table, rng, table_bias);
      }
    }
  }
  return out;
}

Corpus make_artificial(const Corpus& clean, const ErrorTable& table, std::uint64_t seed,
                       double table_bias) {
  Corpus noisy = inject_noise(clean, table, seed, table_bias);
  Corpus out = clean;
  for (std::size_t d = 0; d < out.documents.size(); ++d) {
    auto& segs = out.documents[d].segments;
    const auto& noised = noisy.documents[d].segments;
    segs.insert(segs.end(), noised.begin(), noised.end());
  }
  return out;
}

}  // namespace nat

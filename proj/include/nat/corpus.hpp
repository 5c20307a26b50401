#ifndef NAT_CORPUS_HPP
#define NAT_CORPUS_HPP

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace nat {

// Error raised by parsers and validators; carries a 1-based line number
// when the offending location is known (0 otherwise).
class corpus_error : public std::runtime_error {
 public:
  corpus_error(std::string msg, std::size_t line = 0)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + msg
                                : std::move(msg)),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

using EntityType = std::string;

bool is_valid_entity_type(const std::string& name);

struct Label {
  enum class Kind { Outside, Begin, Inside };
  Kind kind = Kind::Outside;
  EntityType type;  // empty iff Outside

  static Label outside() { return {}; }
  static Label begin(EntityType t) { return {Kind::Begin, std::move(t)}; }
  static Label inside(EntityType t) { return {Kind::Inside, std::move(t)}; }

  bool is_outside() const { return kind == Kind::Outside; }
  std::string str() const;
  static Label parse(const std::string& text);  // throws corpus_error

  bool operator==(const Label&) const = default;
  auto operator<=>(const Label&) const = default;
};

struct Token {
  std::string text;  // UTF-8, non-empty, no whitespace
  Label label;

  bool operator==(const Token&) const = default;
};

struct Segment {
  std::vector<Token> tokens;

  std::size_t size() const { return tokens.size(); }
  bool operator==(const Segment&) const = default;
};

struct Document {
  std::string id;
  std::vector<Segment> segments;
  std::map<std::string, std::string> metadata;

  bool operator==(const Document&) const = default;
};

struct Corpus {
  std::vector<Document> documents;

  std::size_t segment_count() const;
  std::size_t token_count() const;
  bool operator==(const Corpus&) const = default;
};

struct EntitySpan {
  EntityType entity_type;
  std::size_t start = 0;  // inclusive token index
  std::size_t end = 0;    // exclusive
  std::string surface;

  bool operator==(const EntitySpan&) const = default;
};

struct Violation {
  std::size_t index = 0;
  enum class Reason { IWithoutB, ITypeMismatch } reason = Reason::IWithoutB;
};

// Document id used when the input carries no -DOCSTART- marker.
inline constexpr const char* kDefaultDocumentId = "doc";

Corpus parse_conll(const std::string& text);
std::string write_conll(const Corpus& corpus);

std::vector<Violation> validate_bio(const Segment& segment);
Segment repair_bio(const Segment& segment);
Corpus repair_bio(const Corpus& corpus);

std::vector<EntitySpan> spans_from_bio(const Segment& segment);
Segment bio_from_spans(const std::vector<std::string>& tokens,
                       const std::vector<EntitySpan>& spans);

std::map<EntityType, std::size_t> entity_counts(const Corpus& corpus);
std::string entity_counts_csv(const Corpus& corpus);

struct SplitRatios {
  double train = 0.7;
  double test = 0.2;
  double val = 0.1;
};

std::tuple<Corpus, Corpus, Corpus> stratified_split(const Corpus& corpus,
                                                    SplitRatios ratios,
                                                    std::uint64_t seed);

}  // namespace nat

#endif  // NAT_CORPUS_HPP

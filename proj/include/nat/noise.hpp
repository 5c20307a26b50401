#ifndef NAT_NOISE_HPP
#define NAT_NOISE_HPP

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "nat/corpus.hpp"

namespace nat {

enum class EditType { Substitution, Deletion, Insertion };

std::string to_string(EditType t);
EditType edit_type_from_string(const std::string& s);  // throws corpus_error

struct ErrorEntry {
  std::string recognized;  // OCR output side, empty for Deletion
  std::string correct;     // ground-truth side, empty for Insertion
  EditType edit_type = EditType::Substitution;
  std::uint64_t frequency = 1;

  bool operator==(const ErrorEntry&) const = default;
};

struct ErrorTable {
  std::vector<ErrorEntry> entries;
  std::uint64_t total = 0;

  // Merges by (recognized, correct, edit_type), validates the entry shape.
  void add(ErrorEntry entry);
  void sort_by_frequency();
};

ErrorTable load_error_table(const std::string& csv);
std::string save_error_table(const ErrorTable& table);

// The error table bundled with the toolkit: the recurring OCR error classes
// in historical typewritten documents (dropped punctuation, l/i and 0/o
// confusions, stray commas and apostrophes, period/comma swaps).
ErrorTable default_error_table();

struct EditOp {
  std::size_t position = 0;  // code-point index in the clean string
  EditType edit_type = EditType::Substitution;
  std::string recognized;  // noisy-side fragment
  std::string correct;     // clean-side fragment

  bool operator==(const EditOp&) const = default;
};

using EditScript = std::vector<EditOp>;

EditScript align_chars(const std::string& noisy, const std::string& clean);
std::string apply_edit_script(const std::string& clean, const EditScript& script);
std::size_t levenshtein(const std::string& a, const std::string& b);

ErrorTable analyze_errors(const Corpus& noisy, const Corpus& clean);

bool is_perturbable(const std::string& word);

// Applies exactly one edit to `word`. With probability `table_bias` the edit
// is drawn frequency-proportionally from applicable table entries, otherwise
// a uniform fallback edit is used.
std::string perturb_word(const std::string& word, const ErrorTable& table,
                         std::mt19937_64& rng, double table_bias);

Corpus inject_noise(const Corpus& corpus, const ErrorTable& table,
                    std::uint64_t seed, double table_bias);

Corpus make_artificial(const Corpus& clean, const ErrorTable& table,
                       std::uint64_t seed, double table_bias);

// Per-segment rng stream; part of the injection contract so parallel and
// serial runs agree.
std::uint64_t derive_stream_seed(std::uint64_t seed, const std::string& doc_id,
                                 std::size_t segment_index);

}  // namespace nat

#endif  // NAT_NOISE_HPP

#ifndef NAT_CRF_HPP
#define NAT_CRF_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "nat/corpus.hpp"

namespace nat {

// Feature strings extracted at one chain position. Templates are pure
// functions of (segment, position): token lowercase, word shape, affixes of
// length 1-4, character trigrams, neighbor lowercase, boundary flags.
std::vector<std::string> extract_features(const Segment& segment, std::size_t position);

struct CrfModel {
  static constexpr std::uint32_t kFormatVersion = 1;

  std::vector<std::string> labels;  // "O" first, then B-/I- per entity type
  std::unordered_map<std::string, std::uint32_t> feature_vocab;
  std::vector<std::string> feature_names;      // id -> string
  std::vector<double> emission_weights;        // feature id * K + label
  std::vector<double> transition_weights;      // from * K + to
  std::vector<double> start_weights;           // K
  std::vector<double> end_weights;             // K

  std::size_t label_count() const { return labels.size(); }
  std::size_t label_index(const Label& label) const;  // throws if unknown

  double emission(std::uint32_t feature, std::size_t label) const {
    return emission_weights[feature * labels.size() + label];
  }

  // Registers `feature`, growing the weight table; existing ids are stable.
  std::uint32_t intern_feature(const std::string& feature);
  std::optional<std::uint32_t> lookup_feature(const std::string& feature) const;

  // Builds the label alphabet (O, then B-/I- pairs per sorted entity type)
  // and feature vocabulary from a corpus. Existing labels/features are kept.
  void absorb_labels(const Corpus& corpus);
  void absorb_features(const Corpus& corpus);
};

struct TrainConfig {
  double target_lr = 0.1;          // CRF-scale default; transformer-scale is 2e-5
  double warmup_fraction = 0.10;
  int max_epochs = 25;
  int patience = 5;
  double l2 = 1e-4;
  double clamp_min = 0.1;
  double clamp_max = 10.0;
  bool oversample = true;
  int oversample_factor = 3;
  bool unit_class_weights = false;
  std::uint64_t seed = 1;
  int batch_size = 8;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_precision = 0.0;
  double val_recall = 0.0;
  double val_f1 = 0.0;
};

struct Gradient {
  std::vector<double> emission;    // same shape as model.emission_weights
  std::vector<double> transition;
  std::vector<double> start;
  std::vector<double> end;

  void resize_like(const CrfModel& model);
  void clear();
};

// Weighted negative log conditional likelihood and its gradient. Gold-path
// emission contributions are scaled by class_weights[gold label]; the
// log-partition term stays unweighted; an l2/2 * ||w||^2 term is included.
double nll_and_gradient(const CrfModel& model, const Segment& segment,
                        const std::vector<double>& class_weights, double l2,
                        Gradient& grad);

// Log-partition of the chain (log-space forward algorithm).
double log_partition(const CrfModel& model, const Segment& segment);

// Unnormalized log-score of a specific label sequence.
double sequence_score(const CrfModel& model, const Segment& segment,
                      const std::vector<std::size_t>& label_indices);

std::vector<Label> viterbi(const CrfModel& model, const Segment& segment);

// Score of the argmax label sequence (before BIO repair).
double viterbi_score(const CrfModel& model, const Segment& segment);
Corpus decode_corpus(const CrfModel& model, const Corpus& corpus);

std::vector<double> class_weights(const Corpus& corpus, const CrfModel& model,
                                  double clamp_min, double clamp_max);

Corpus oversample(const Corpus& corpus, int factor);

double lr_at(std::size_t step, std::size_t total_steps, const TrainConfig& config);

struct TrainResult {
  CrfModel model;
  std::vector<EpochRecord> records;
};

TrainResult train(const Corpus& train_corpus, const Corpus& val_corpus,
                  const TrainConfig& config, const CrfModel* init = nullptr);

void save_model(const CrfModel& model, const std::string& path);
CrfModel load_model(const std::string& path);

}  // namespace nat

#endif  // NAT_CRF_HPP

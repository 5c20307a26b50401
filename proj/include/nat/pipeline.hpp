#ifndef NAT_PIPELINE_HPP
#define NAT_PIPELINE_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "nat/corpus.hpp"
#include "nat/crf.hpp"
#include "nat/eval.hpp"
#include "nat/noise.hpp"

namespace nat {

struct Gazetteer {
  EntityType entity_type;
  std::vector<std::string> phrases;  // deduplicated, case-sensitive
};

// Each phrase becomes one segment labeled B-TYPE I-TYPE...; the result
// carries no O labels. Blank lines are skipped and counted.
Corpus gazetteer_corpus(const std::vector<Gazetteer>& gazetteers,
                        std::size_t* skipped_blank = nullptr);

Gazetteer load_gazetteer_file(const EntityType& type, const std::string& path,
                              std::size_t* skipped_blank = nullptr);

Corpus load_gazetteers(const std::map<EntityType, std::string>& files,
                       std::size_t* skipped_blank = nullptr);

// Intermediate-stage training on O-free gazetteer data: oversampling off,
// unit class weights, validation slice capped at `val_token_cap` tokens.
CrfModel pretrain(const Corpus& gazetteer_corpus, TrainConfig config,
                  std::size_t val_token_cap = 10000);

enum class Variant { Noisy, Clean, Artificial };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);

TrainResult finetune_variant(Variant variant, const Corpus& clean_train,
                             const Corpus& noisy_train, const ErrorTable& table,
                             const Corpus& val, const CrfModel& init,
                             const TrainConfig& config, double table_bias);

struct ExperimentConfig {
  std::string clean_corpus_path;
  std::string error_table_path;                    // empty -> bundled table
  std::map<EntityType, std::string> gazetteer_paths;
  std::string noisy_corpus_path;                   // optional real parallel corpus
  SplitRatios ratios;
  std::uint64_t seed = 1;
  double table_bias = 0.8;
  TrainConfig train;
  std::size_t pretrain_val_cap = 10000;
  bool val_matches_variant = true;  // noisy/artificial validate on noisy val
};

ExperimentConfig parse_experiment_config(const std::string& text);
ExperimentConfig load_experiment_config(const std::string& path);

struct VariantResult {
  EvalReport report;                 // on the shared noisy test set
  std::vector<EpochRecord> curve;
  std::size_t train_entities = 0;
  std::size_t train_tokens = 0;
};

struct ExperimentReport {
  std::map<std::string, VariantResult> variants;  // keyed noisy/clean/artificial
  std::uint64_t seed = 0;
  double table_bias = 0.0;
};

ExperimentReport run_experiment(const ExperimentConfig& config);

// Writes report.json, accuracy.csv, accuracy_entities.csv, confusion.csv and
// data_amount.csv into `out_dir` (atomic per file).
void write_experiment_report(const ExperimentReport& report, const std::string& out_dir);

}  // namespace nat

#endif  // NAT_PIPELINE_HPP

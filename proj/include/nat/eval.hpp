#ifndef NAT_EVAL_HPP
#define NAT_EVAL_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "nat/crf.hpp"

namespace nat {

struct EntityScore {
  std::uint64_t tp = 0, fp = 0, fn = 0;
  double precision = 0.0, recall = 0.0, f1 = 0.0;
};

struct ConfusionMatrix {
  std::vector<EntityType> types;                  // sorted row/column labels
  std::vector<std::uint64_t> counts;              // gold * types.size() + pred
  std::uint64_t missed = 0;    // gold entity token, predicted O
  std::uint64_t spurious = 0;  // gold O token, predicted entity

  std::uint64_t at(std::size_t gold, std::size_t pred) const {
    return counts[gold * types.size() + pred];
  }
  std::string csv() const;
};

struct EvalReport {
  std::uint64_t tp = 0, fp = 0, fn = 0;
  double precision = 0.0, recall = 0.0, f1 = 0.0;
  std::map<EntityType, EntityScore> per_entity;
  ConfusionMatrix confusion;
};

// Strict entity-level scoring: a predicted span counts as a true positive iff
// gold contains the identical (type, start, end) span. Both sides are passed
// through repair_bio before span extraction.
EvalReport entity_prf(const Corpus& gold, const Corpus& pred);

ConfusionMatrix token_confusion(const Corpus& gold, const Corpus& pred);

std::string epoch_curve_csv(const std::vector<EpochRecord>& records);

}  // namespace nat

#endif  // NAT_EVAL_HPP

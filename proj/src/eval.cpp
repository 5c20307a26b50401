#include "nat/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

namespace nat {

namespace {

void check_parallel(const Corpus& gold, const Corpus& pred) {
  if (gold.documents.size() != pred.documents.size())
    throw corpus_error("corpora differ in document count");
  for (std::size_t d = 0; d < gold.documents.size(); ++d) {
    if (gold.documents[d].segments.size() != pred.documents[d].segments.size())
      throw corpus_error("segment count mismatch in document '" +
                         gold.documents[d].id + "'");
    for (std::size_t s = 0; s < gold.documents[d].segments.size(); ++s) {
      if (gold.documents[d].segments[s].tokens.size() !=
          pred.documents[d].segments[s].tokens.size())
        throw corpus_error("token count mismatch in document '" +
                           gold.documents[d].id + "', segment " + std::to_string(s));
    }
  }
}

void fill_prf(EntityScore& s) {
  s.precision = s.tp + s.fp ? static_cast<double>(s.tp) / static_cast<double>(s.tp + s.fp)
                            : 0.0;
  s.recall = s.tp + s.fn ? static_cast<double>(s.tp) / static_cast<double>(s.tp + s.fn)
                         : 0.0;
  s.f1 = s.precision + s.recall > 0
             ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
             : 0.0;
}

}  // namespace

EvalReport entity_prf(const Corpus& gold, const Corpus& pred) {
  check_parallel(gold, pred);
  Corpus g = repair_bio(gold);
  Corpus p = repair_bio(pred);

  EvalReport report;
  for (std::size_t d = 0; d < g.documents.size(); ++d) {
    for (std::size_t s = 0; s < g.documents[d].segments.size(); ++s) {
      auto gold_spans = spans_from_bio(g.documents[d].segments[s]);
      auto pred_spans = spans_from_bio(p.documents[d].segments[s]);
      std::set<std::tuple<EntityType, std::size_t, std::size_t>> gold_set;
      for (const auto& sp : gold_spans)
        gold_set.insert({sp.entity_type, sp.start, sp.end});
      std::set<std::tuple<EntityType, std::size_t, std::size_t>> matched;
      for (const auto& sp : pred_spans) {
        auto key = std::make_tuple(sp.entity_type, sp.start, sp.end);
        if (gold_set.count(key)) {
          ++report.per_entity[sp.entity_type].tp;
          matched.insert(key);
        } else {
          ++report.per_entity[sp.entity_type].fp;
        }
      }
      for (const auto& sp : gold_spans) {
        if (!matched.count({sp.entity_type, sp.start, sp.end}))
          ++report.per_entity[sp.entity_type].fn;
      }
    }
  }
  for (auto& [type, score] : report.per_entity) {
    fill_prf(score);
    report.tp += score.tp;
    report.fp += score.fp;
    report.fn += score.fn;
  }
  EntityScore micro{report.tp, report.fp, report.fn, 0, 0, 0};
  fill_prf(micro);
  report.precision = micro.precision;
  report.recall = micro.recall;
  report.f1 = micro.f1;
  report.confusion = token_confusion(gold, pred);
  return report;
}

ConfusionMatrix token_confusion(const Corpus& gold, const Corpus& pred) {
  check_parallel(gold, pred);
  std::set<EntityType> type_set;
  std::vector<std::pair<const Label*, const Label*>> pairs;
  for (std::size_t d = 0; d < gold.documents.size(); ++d) {
    for (std::size_t s = 0; s < gold.documents[d].segments.size(); ++s) {
      const auto& gs = gold.documents[d].segments[s];
      const auto& ps = pred.documents[d].segments[s];
      for (std::size_t t = 0; t < gs.tokens.size(); ++t) {
        const Label& gl = gs.tokens[t].label;
        const Label& pl = ps.tokens[t].label;
        if (!gl.is_outside()) type_set.insert(gl.type);
        if (!pl.is_outside()) type_set.insert(pl.type);
        pairs.push_back({&gl, &pl});
      }
    }
  }
  ConfusionMatrix m;
  m.types.assign(type_set.begin(), type_set.end());
  m.counts.assign(m.types.size() * m.types.size(), 0);
  auto index_of = [&m](const EntityType& t) {
    return static_cast<std::size_t>(
        std::lower_bound(m.types.begin(), m.types.end(), t) - m.types.begin());
  };
  for (const auto& [gl, pl] : pairs) {
    if (gl->is_outside() && pl->is_outside()) continue;
    if (gl->is_outside()) {
      ++m.spurious;
    } else if (pl->is_outside()) {
      ++m.missed;
    } else {
      ++m.counts[index_of(gl->type) * m.types.size() + index_of(pl->type)];
    }
  }
  return m;
}

std::string ConfusionMatrix::csv() const {
  std::string out = "gold\\pred";
  for (const auto& t : types) out += "," + t;
  out += "\n";
  for (std::size_t g = 0; g < types.size(); ++g) {
    out += types[g];
    for (std::size_t p = 0; p < types.size(); ++p)
      out += "," + std::to_string(at(g, p));
    out += "\n";
  }
  return out;
}

std::string epoch_curve_csv(const std::vector<EpochRecord>& records) {
  if (records.empty()) throw corpus_error("no epoch records");
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].epoch <= records[i - 1].epoch)
      throw corpus_error("epoch numbers must be strictly increasing");
  }
  std::string out = "epoch,train_loss,precision,recall,f1\n";
  char buf[160];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof(buf), "%d,%.6f,%.6f,%.6f,%.6f\n", r.epoch, r.train_loss,
                  r.val_precision, r.val_recall, r.val_f1);
    out += buf;
  }
  return out;
}

}  // namespace nat

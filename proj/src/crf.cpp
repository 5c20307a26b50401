#include "nat/crf.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <random>
#include <set>

#include "nat/eval.hpp"
#include "nat/utf8.hpp"

namespace nat {

namespace {

std::string lowercase(const std::string& s) {
  auto cps = utf8::decode(s);
  for (auto& c : cps)
    if (c >= 'A' && c <= 'Z') c += 32;
  return utf8::encode(cps);
}

std::string word_shape(const std::string& s) {
  auto cps = utf8::decode(s);
  std::string shape;
  for (char32_t c : cps) {
    if (c >= 'A' && c <= 'Z')
      shape += 'X';
    else if ((c >= 'a' && c <= 'z') || c >= 0x80)
      shape += 'x';
    else if (c >= '0' && c <= '9')
      shape += 'd';
    else
      shape += '-';
  }
  return shape;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t h = seed ^ (salt + 0x9e3779b97f4a7c15ull + (seed << 6) + (seed >> 2));
  h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ull;
  h = (h ^ (h >> 27)) * 0x94d049bb133111ebull;
  return h ^ (h >> 31);
}

double log_sum_exp(const std::vector<double>& v) {
  double m = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace

std::vector<std::string> extract_features(const Segment& segment,
                                          std::size_t position) {
  if (position >= segment.tokens.size())
    throw corpus_error("feature position out of range");
  const std::string& text = segment.tokens[position].text;
  auto cps = utf8::decode(text);
  std::vector<std::string> feats;
  feats.push_back("bias");
  feats.push_back("lower=" + lowercase(text));
  feats.push_back("shape=" + word_shape(text));
  for (std::size_t k = 1; k <= 4 && k <= cps.size(); ++k) {
    feats.push_back("pre" + std::to_string(k) + "=" +
                    utf8::encode({cps.begin(), cps.begin() + k}));
    feats.push_back("suf" + std::to_string(k) + "=" +
                    utf8::encode({cps.end() - k, cps.end()}));
  }
  for (std::size_t i = 0; i + 3 <= cps.size(); ++i)
    feats.push_back("tri=" + utf8::encode({cps.begin() + i, cps.begin() + i + 3}));
  if (position == 0)
    feats.push_back("BOS");
  else
    feats.push_back("prev=" + lowercase(segment.tokens[position - 1].text));
  if (position + 1 == segment.tokens.size())
    feats.push_back("EOS");
  else
    feats.push_back("next=" + lowercase(segment.tokens[position + 1].text));
  return feats;
}

std::size_t CrfModel::label_index(const Label& label) const {
  std::string s = label.str();
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == s) return i;
  throw corpus_error("label '" + s + "' not in model alphabet");
}

std::uint32_t CrfModel::intern_feature(const std::string& feature) {
  auto it = feature_vocab.find(feature);
  if (it != feature_vocab.end()) return it->second;
  std::uint32_t id = static_cast<std::uint32_t>(feature_names.size());
  feature_vocab.emplace(feature, id);
  feature_names.push_back(feature);
  emission_weights.resize(emission_weights.size() + labels.size(), 0.0);
  return id;
}

std::optional<std::uint32_t> CrfModel::lookup_feature(const std::string& feature) const {
  auto it = feature_vocab.find(feature);
  if (it == feature_vocab.end()) return std::nullopt;
  return it->second;
}

void CrfModel::absorb_labels(const Corpus& corpus) {
  std::set<EntityType> types;
  for (const auto& l : labels) {
    if (l.size() > 2 && (l[0] == 'B' || l[0] == 'I')) types.insert(l.substr(2));
  }
  for (const auto& doc : corpus.documents)
    for (const auto& seg : doc.segments)
      for (const auto& tok : seg.tokens)
        if (!tok.label.is_outside()) types.insert(tok.label.type);

  std::vector<std::string> wanted = {"O"};
  for (const auto& t : types) {
    wanted.push_back("B-" + t);
    wanted.push_back("I-" + t);
  }
  std::vector<std::string> next = labels;
  if (next.empty()) next.push_back("O");
  for (const auto& l : wanted)
    if (std::find(next.begin(), next.end(), l) == next.end()) next.push_back(l);
  if (next == labels) return;

  std::size_t old_k = labels.size(), new_k = next.size();
  std::vector<double> emission(feature_names.size() * new_k, 0.0);
  for (std::size_t f = 0; f < feature_names.size(); ++f)
    for (std::size_t y = 0; y < old_k; ++y)
      emission[f * new_k + y] = emission_weights[f * old_k + y];
  std::vector<double> transition(new_k * new_k, 0.0);
  for (std::size_t a = 0; a < old_k; ++a)
    for (std::size_t b = 0; b < old_k; ++b)
      transition[a * new_k + b] = transition_weights[a * old_k + b];
  labels = std::move(next);
  emission_weights = std::move(emission);
  transition_weights = std::move(transition);
  start_weights.resize(new_k, 0.0);
  end_weights.resize(new_k, 0.0);
}

void CrfModel::absorb_features(const Corpus& corpus) {
  for (const auto& doc : corpus.documents)
    for (const auto& seg : doc.segments)
      for (std::size_t t = 0; t < seg.tokens.size(); ++t)
        for (const auto& f : extract_features(seg, t)) intern_feature(f);
}

void Gradient::resize_like(const CrfModel& model) {
  emission.assign(model.emission_weights.size(), 0.0);
  transition.assign(model.transition_weights.size(), 0.0);
  start.assign(model.labels.size(), 0.0);
  end.assign(model.labels.size(), 0.0);
}

void Gradient::clear() {
  std::fill(emission.begin(), emission.end(), 0.0);
  std::fill(transition.begin(), transition.end(), 0.0);
  std::fill(start.begin(), start.end(), 0.0);
  std::fill(end.begin(), end.end(), 0.0);
}

namespace {

std::vector<std::vector<std::uint32_t>> feature_ids(const CrfModel& model,
                                                    const Segment& segment) {
  std::vector<std::vector<std::uint32_t>> ids(segment.tokens.size());
  for (std::size_t t = 0; t < segment.tokens.size(); ++t) {
    for (const auto& f : extract_features(segment, t)) {
      if (auto id = model.lookup_feature(f)) ids[t].push_back(*id);
    }
  }
  return ids;
}

// emit[t * K + y]
std::vector<double> emission_scores(const CrfModel& model,
                                    const std::vector<std::vector<std::uint32_t>>& ids) {
  std::size_t k = model.label_count();
  std::vector<double> emit(ids.size() * k, 0.0);
  for (std::size_t t = 0; t < ids.size(); ++t)
    for (std::uint32_t f : ids[t])
      for (std::size_t y = 0; y < k; ++y)
        emit[t * k + y] += model.emission_weights[f * k + y];
  return emit;
}

struct ForwardBackward {
  std::vector<double> alpha, beta;  // T*K, log space
  double log_z = 0.0;
};

ForwardBackward forward_backward(const CrfModel& model, const std::vector<double>& emit,
                                 std::size_t T) {
  std::size_t k = model.label_count();
  ForwardBackward fb;
  fb.alpha.assign(T * k, 0.0);
  fb.beta.assign(T * k, 0.0);
  std::vector<double> scratch(k);
  for (std::size_t y = 0; y < k; ++y)
    fb.alpha[y] = model.start_weights[y] + emit[y];
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t y = 0; y < k; ++y) {
      for (std::size_t p = 0; p < k; ++p)
        scratch[p] = fb.alpha[(t - 1) * k + p] + model.transition_weights[p * k + y];
      fb.alpha[t * k + y] = log_sum_exp(scratch) + emit[t * k + y];
    }
  }
  for (std::size_t y = 0; y < k; ++y)
    fb.beta[(T - 1) * k + y] = model.end_weights[y];
  for (std::size_t t = T - 1; t-- > 0;) {
    for (std::size_t y = 0; y < k; ++y) {
      for (std::size_t n = 0; n < k; ++n)
        scratch[n] = model.transition_weights[y * k + n] + emit[(t + 1) * k + n] +
                     fb.beta[(t + 1) * k + n];
      fb.beta[t * k + y] = log_sum_exp(scratch);
    }
  }
  std::vector<double> last(k);
  for (std::size_t y = 0; y < k; ++y)
    last[y] = fb.alpha[(T - 1) * k + y] + model.end_weights[y];
  fb.log_z = log_sum_exp(last);
  return fb;
}

double nll_core(const CrfModel& model, const std::vector<std::vector<std::uint32_t>>& ids,
                const std::vector<std::size_t>& gold,
                const std::vector<double>& class_weights, double l2, Gradient& grad) {
  std::size_t k = model.label_count();
  std::size_t T = gold.size();
  std::vector<double> emit = emission_scores(model, ids);
  ForwardBackward fb = forward_backward(model, emit, T);

  // Gold-path score, emission contributions weighted per class.
  double gold_score = model.start_weights[gold[0]] + model.end_weights[gold[T - 1]];
  for (std::size_t t = 0; t < T; ++t) {
    double w = class_weights[gold[t]];
    gold_score += w * emit[t * k + gold[t]];
    for (std::uint32_t f : ids[t]) grad.emission[f * k + gold[t]] -= w;
    if (t > 0) {
      gold_score += model.transition_weights[gold[t - 1] * k + gold[t]];
      grad.transition[gold[t - 1] * k + gold[t]] -= 1.0;
    }
  }
  grad.start[gold[0]] -= 1.0;
  grad.end[gold[T - 1]] -= 1.0;

  // Expected counts from posterior marginals.
  std::vector<double> node(k);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t y = 0; y < k; ++y)
      node[y] = std::exp(fb.alpha[t * k + y] + fb.beta[t * k + y] - fb.log_z);
    for (std::uint32_t f : ids[t])
      for (std::size_t y = 0; y < k; ++y) grad.emission[f * k + y] += node[y];
    if (t == 0)
      for (std::size_t y = 0; y < k; ++y) grad.start[y] += node[y];
    if (t == T - 1)
      for (std::size_t y = 0; y < k; ++y) grad.end[y] += node[y];
    if (t > 0) {
      for (std::size_t p = 0; p < k; ++p) {
        for (std::size_t y = 0; y < k; ++y) {
          double m = std::exp(fb.alpha[(t - 1) * k + p] +
                              model.transition_weights[p * k + y] + emit[t * k + y] +
                              fb.beta[t * k + y] - fb.log_z);
          grad.transition[p * k + y] += m;
        }
      }
    }
  }

  double loss = fb.log_z - gold_score;
  if (l2 > 0.0) {
    double sq = 0.0;
    auto accumulate = [&](const std::vector<double>& w, std::vector<double>& g) {
      for (std::size_t i = 0; i < w.size(); ++i) {
        sq += w[i] * w[i];
        g[i] += l2 * w[i];
      }
    };
    accumulate(model.emission_weights, grad.emission);
    accumulate(model.transition_weights, grad.transition);
    accumulate(model.start_weights, grad.start);
    accumulate(model.end_weights, grad.end);
    loss += 0.5 * l2 * sq;
  }
  if (!std::isfinite(loss)) throw corpus_error("non-finite loss (numeric defect)");
  return loss;
}

std::vector<std::size_t> gold_indices(const CrfModel& model, const Segment& segment) {
  std::vector<std::size_t> gold;
  gold.reserve(segment.tokens.size());
  for (const auto& tok : segment.tokens) gold.push_back(model.label_index(tok.label));
  return gold;
}

}  // namespace

double nll_and_gradient(const CrfModel& model, const Segment& segment,
                        const std::vector<double>& class_weights, double l2,
                        Gradient& grad) {
  if (segment.tokens.empty()) throw corpus_error("empty segment");
  if (!validate_bio(segment).empty()) throw corpus_error("segment is not BIO-valid");
  return nll_core(model, feature_ids(model, segment), gold_indices(model, segment),
                  class_weights, l2, grad);
}

double log_partition(const CrfModel& model, const Segment& segment) {
  auto ids = feature_ids(model, segment);
  auto emit = emission_scores(model, ids);
  return forward_backward(model, emit, segment.tokens.size()).log_z;
}

double sequence_score(const CrfModel& model, const Segment& segment,
                      const std::vector<std::size_t>& label_indices) {
  std::size_t k = model.label_count();
  auto ids = feature_ids(model, segment);
  auto emit = emission_scores(model, ids);
  std::size_t T = label_indices.size();
  double score = model.start_weights[label_indices[0]] +
                 model.end_weights[label_indices[T - 1]];
  for (std::size_t t = 0; t < T; ++t) {
    score += emit[t * k + label_indices[t]];
    if (t > 0)
      score += model.transition_weights[label_indices[t - 1] * k + label_indices[t]];
  }
  return score;
}

namespace {

struct ViterbiResult {
  std::vector<std::size_t> path;
  double score = 0.0;
};

ViterbiResult viterbi_raw(const CrfModel& model, const Segment& segment) {
  std::size_t k = model.label_count();
  std::size_t T = segment.tokens.size();
  auto ids = feature_ids(model, segment);
  auto emit = emission_scores(model, ids);

  std::vector<double> delta(T * k, 0.0);
  std::vector<std::size_t> back(T * k, 0);
  for (std::size_t y = 0; y < k; ++y) delta[y] = model.start_weights[y] + emit[y];
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t y = 0; y < k; ++y) {
      double best = -std::numeric_limits<double>::infinity();
      std::size_t arg = 0;
      for (std::size_t p = 0; p < k; ++p) {
        double s = delta[(t - 1) * k + p] + model.transition_weights[p * k + y];
        if (s > best) {  // strict: ties keep the lowest label index
          best = s;
          arg = p;
        }
      }
      delta[t * k + y] = best + emit[t * k + y];
      back[t * k + y] = arg;
    }
  }
  double best = -std::numeric_limits<double>::infinity();
  std::size_t arg = 0;
  for (std::size_t y = 0; y < k; ++y) {
    double s = delta[(T - 1) * k + y] + model.end_weights[y];
    if (s > best) {
      best = s;
      arg = y;
    }
  }
  ViterbiResult result;
  result.score = best;
  result.path.resize(T);
  result.path[T - 1] = arg;
  for (std::size_t t = T - 1; t-- > 0;)
    result.path[t] = back[(t + 1) * k + result.path[t + 1]];
  return result;
}

}  // namespace

std::vector<Label> viterbi(const CrfModel& model, const Segment& segment) {
  ViterbiResult raw = viterbi_raw(model, segment);
  Segment labeled = segment;
  for (std::size_t t = 0; t < segment.tokens.size(); ++t)
    labeled.tokens[t].label = Label::parse(model.labels[raw.path[t]]);
  labeled = repair_bio(labeled);
  std::vector<Label> out;
  out.reserve(labeled.tokens.size());
  for (const auto& tok : labeled.tokens) out.push_back(tok.label);
  return out;
}

double viterbi_score(const CrfModel& model, const Segment& segment) {
  return viterbi_raw(model, segment).score;
}

Corpus decode_corpus(const CrfModel& model, const Corpus& corpus) {
  Corpus out = corpus;
  for (auto& doc : out.documents) {
    for (auto& seg : doc.segments) {
      auto labels = viterbi(model, seg);
      for (std::size_t t = 0; t < seg.tokens.size(); ++t)
        seg.tokens[t].label = labels[t];
    }
  }
  return out;
}

std::vector<double> class_weights(const Corpus& corpus, const CrfModel& model,
                                  double clamp_min, double clamp_max) {
  if (corpus.token_count() == 0) throw corpus_error("empty corpus");
  std::size_t k = model.label_count();
  std::vector<double> counts(k, 0.0);
  double total = 0.0;
  for (const auto& doc : corpus.documents)
    for (const auto& seg : doc.segments)
      for (const auto& tok : seg.tokens) {
        counts[model.label_index(tok.label)] += 1.0;
        total += 1.0;
      }
  std::size_t present = 0;
  for (double c : counts)
    if (c > 0) ++present;

  std::vector<double> weights(k, clamp_max);
  double mean = 0.0;
  for (std::size_t y = 0; y < k; ++y) {
    if (counts[y] > 0) {
      weights[y] = total / (static_cast<double>(present) * counts[y]);
      mean += weights[y];
    }
  }
  mean /= static_cast<double>(present);
  for (std::size_t y = 0; y < k; ++y) {
    if (counts[y] > 0) weights[y] /= mean;
    weights[y] = std::clamp(weights[y], clamp_min, clamp_max);
  }
  return weights;
}

Corpus oversample(const Corpus& corpus, int factor) {
  if (factor < 1) throw corpus_error("oversample factor must be >= 1");
  Corpus out;
  for (const auto& doc : corpus.documents) {
    Document d;
    d.id = doc.id;
    d.metadata = doc.metadata;
    for (const auto& seg : doc.segments) {
      bool positive = std::any_of(seg.tokens.begin(), seg.tokens.end(),
                                  [](const Token& t) { return !t.label.is_outside(); });
      int copies = positive ? factor : 1;
      for (int i = 0; i < copies; ++i) d.segments.push_back(seg);
    }
    out.documents.push_back(std::move(d));
  }
  return out;
}

double lr_at(std::size_t step, std::size_t total_steps, const TrainConfig& config) {
  if (total_steps == 0) throw corpus_error("total_steps must be positive");
  std::size_t warmup = static_cast<std::size_t>(
      std::ceil(config.warmup_fraction * static_cast<double>(total_steps)));
  if (warmup == 0) warmup = 1;
  if (step < warmup) {
    return config.target_lr * static_cast<double>(step + 1) /
           static_cast<double>(warmup);
  }
  return config.target_lr * std::sqrt(static_cast<double>(warmup) /
                                      static_cast<double>(step + 1));
}

TrainResult train(const Corpus& train_corpus, const Corpus& val_corpus,
                  const TrainConfig& config, const CrfModel* init) {
  if (train_corpus.token_count() == 0) throw corpus_error("empty training corpus");
  {
    std::size_t val_entities = 0;
    for (const auto& [t, n] : entity_counts(val_corpus)) val_entities += n;
    if (val_entities == 0)
      throw corpus_error("validation corpus has no entities; F1 would be undefined");
  }
  if (config.warmup_fraction <= 0 || config.warmup_fraction >= 1)
    throw corpus_error("warmup_fraction must be in (0,1)");
  if (config.patience >= config.max_epochs)
    throw corpus_error("patience must be smaller than max_epochs");

  CrfModel model;
  if (init) model = *init;
  model.absorb_labels(train_corpus);
  model.absorb_labels(val_corpus);
  model.absorb_features(train_corpus);

  std::vector<double> weights =
      config.unit_class_weights
          ? std::vector<double>(model.label_count(), 1.0)
          : class_weights(train_corpus, model, config.clamp_min, config.clamp_max);

  Corpus data =
      config.oversample ? oversample(train_corpus, config.oversample_factor) : train_corpus;

  // Precompute feature ids and gold indices once; the vocabulary is frozen
  // for the rest of this run.
  std::vector<std::vector<std::vector<std::uint32_t>>> all_ids;
  std::vector<std::vector<std::size_t>> all_gold;
  for (const auto& doc : data.documents) {
    for (const auto& seg : doc.segments) {
      if (!validate_bio(seg).empty())
        throw corpus_error("training corpus is not BIO-valid");
      all_ids.push_back(feature_ids(model, seg));
      all_gold.push_back(gold_indices(model, seg));
    }
  }
  std::size_t n = all_ids.size();
  std::size_t batch = static_cast<std::size_t>(std::max(config.batch_size, 1));
  std::size_t batches_per_epoch = (n + batch - 1) / batch;
  std::size_t total_steps = batches_per_epoch * static_cast<std::size_t>(config.max_epochs);

  Gradient grad;
  grad.resize_like(model);

  TrainResult result;
  CrfModel best;
  double best_f1 = -1.0;
  int stagnant = 0;
  std::size_t step = 0;
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::mt19937_64 rng(mix_seed(config.seed, static_cast<std::uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), rng);

    double epoch_loss = 0.0;
    for (std::size_t b = 0; b < batches_per_epoch; ++b) {
      grad.clear();
      std::size_t lo = b * batch, hi = std::min(n, lo + batch);
      for (std::size_t i = lo; i < hi; ++i) {
        epoch_loss +=
            nll_core(model, all_ids[order[i]], all_gold[order[i]], weights, 0.0, grad);
      }
      double lr = lr_at(step, total_steps, config);
      double scale = lr / static_cast<double>(hi - lo);
      double decay = 1.0 - lr * config.l2;
      auto update = [&](std::vector<double>& w, const std::vector<double>& g) {
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = w[i] * decay - scale * g[i];
      };
      update(model.emission_weights, grad.emission);
      update(model.transition_weights, grad.transition);
      update(model.start_weights, grad.start);
      update(model.end_weights, grad.end);
      ++step;
    }

    EvalReport report = entity_prf(val_corpus, decode_corpus(model, val_corpus));
    EpochRecord record{epoch, epoch_loss / static_cast<double>(n), report.precision,
                       report.recall, report.f1};
    result.records.push_back(record);

    if (record.val_f1 > best_f1) {
      best_f1 = record.val_f1;
      best = model;
      stagnant = 0;
    } else {
      ++stagnant;
      if (stagnant >= config.patience) break;
    }
  }
  result.model = std::move(best);
  return result;
}

namespace {

constexpr char kMagic[6] = {'N', 'A', 'T', 'C', 'R', 'F'};

void put_u32(std::string& buf, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) buf += static_cast<char>((v >> (8 * k)) & 0xFF);
}
void put_u64(std::string& buf, std::uint64_t v) {
  for (int k = 0; k < 8; ++k) buf += static_cast<char>((v >> (8 * k)) & 0xFF);
}
void put_f64(std::string& buf, double d) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, 8);
  put_u64(buf, bits);
}
void put_str(std::string& buf, const std::string& s) {
  put_u32(buf, static_cast<std::uint32_t>(s.size()));
  buf += s;
}

class Reader {
 public:
  Reader(const std::string& buf) : buf_(buf) {}
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k)
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf_[pos_ + k])) << (8 * k);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int k = 0; k < 8; ++k)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf_[pos_ + k])) << (8 * k);
    pos_ += 8;
    return v;
  }
  double f64() {
    std::uint64_t bits = u64();
    double d;
    std::memcpy(&d, &bits, 8);
    return d;
  }
  std::string str() {
    std::uint32_t len = u32();
    need(len);
    std::string s = buf_.substr(pos_, len);
    pos_ += len;
    return s;
  }
  std::size_t pos() const { return pos_; }

 private:
  void need(std::size_t n) {
    if (pos_ + n > buf_.size()) throw corpus_error("corrupt model file: truncated");
  }
  const std::string& buf_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_model(const CrfModel& model, const std::string& path) {
  std::string buf(kMagic, sizeof(kMagic));
  put_u32(buf, CrfModel::kFormatVersion);
  put_u32(buf, static_cast<std::uint32_t>(model.labels.size()));
  for (const auto& l : model.labels) put_str(buf, l);
  put_u64(buf, model.feature_names.size());
  for (const auto& f : model.feature_names) put_str(buf, f);
  for (double w : model.emission_weights) put_f64(buf, w);
  for (double w : model.transition_weights) put_f64(buf, w);
  for (double w : model.start_weights) put_f64(buf, w);
  for (double w : model.end_weights) put_f64(buf, w);
  std::uint32_t crc = static_cast<std::uint32_t>(
      crc32(0, reinterpret_cast<const Bytef*>(buf.data()), static_cast<uInt>(buf.size())));
  put_u32(buf, crc);

  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw corpus_error("cannot write '" + tmp + "'");
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw corpus_error("write failed for '" + tmp + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw corpus_error("cannot rename '" + tmp + "' to '" + path + "'");
}

CrfModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw corpus_error("cannot open '" + path + "'");
  std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (buf.size() < sizeof(kMagic) + 8 ||
      std::memcmp(buf.data(), kMagic, sizeof(kMagic)) != 0)
    throw corpus_error("corrupt model file: bad magic");

  std::string payload = buf.substr(0, buf.size() - 4);
  std::uint32_t stored = 0;
  for (int k = 0; k < 4; ++k)
    stored |= static_cast<std::uint32_t>(
                  static_cast<unsigned char>(buf[buf.size() - 4 + static_cast<std::size_t>(k)]))
              << (8 * k);
  std::uint32_t actual = static_cast<std::uint32_t>(crc32(
      0, reinterpret_cast<const Bytef*>(payload.data()), static_cast<uInt>(payload.size())));
  if (stored != actual) throw corpus_error("corrupt model file: checksum mismatch");

  std::string rest = payload.substr(sizeof(kMagic));
  Reader rr(rest);
  std::uint32_t version = rr.u32();
  if (version != CrfModel::kFormatVersion)
    throw corpus_error("model format version mismatch: file has " +
                       std::to_string(version) + ", expected " +
                       std::to_string(CrfModel::kFormatVersion));
  CrfModel model;
  std::uint32_t k = rr.u32();
  for (std::uint32_t i = 0; i < k; ++i) model.labels.push_back(rr.str());
  std::uint64_t f = rr.u64();
  for (std::uint64_t i = 0; i < f; ++i) {
    std::string name = rr.str();
    model.feature_vocab.emplace(name, static_cast<std::uint32_t>(i));
    model.feature_names.push_back(std::move(name));
  }
  model.emission_weights.resize(f * k);
  for (auto& w : model.emission_weights) w = rr.f64();
  model.transition_weights.resize(static_cast<std::size_t>(k) * k);
  for (auto& w : model.transition_weights) w = rr.f64();
  model.start_weights.resize(k);
  for (auto& w : model.start_weights) w = rr.f64();
  model.end_weights.resize(k);
  for (auto& w : model.end_weights) w = rr.f64();
  if (rr.pos() != rest.size()) throw corpus_error("corrupt model file: trailing bytes");
  return model;
}

}  // namespace nat

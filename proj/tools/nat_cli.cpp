// Command-line front end: every pipeline stage as a subcommand.
// Exit codes: 0 success, 2 usage or input error, 1 internal defect.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "nat/corpus.hpp"
#include "nat/crf.hpp"
#include "nat/eval.hpp"
#include "nat/io_util.hpp"
#include "nat/noise.hpp"
#include "nat/pipeline.hpp"

namespace {

struct CommonTrainFlags {
  nat::TrainConfig config;

  void attach(CLI::App* cmd) {
    cmd->add_option("--target-lr", config.target_lr,
                    "peak learning rate (default 0.1)");
    cmd->add_option("--warmup", config.warmup_fraction,
                    "warmup fraction of total steps (default 0.10)");
    cmd->add_option("--max-epochs", config.max_epochs, "epoch limit (default 25)");
    cmd->add_option("--patience", config.patience,
                    "early-stopping patience in epochs (default 5)");
    cmd->add_option("--l2", config.l2, "L2 regularization strength (default 1e-4)");
    cmd->add_option("--clamp-min", config.clamp_min,
                    "class-weight lower clamp (default 0.1)");
    cmd->add_option("--clamp-max", config.clamp_max,
                    "class-weight upper clamp (default 10.0)");
    cmd->add_flag("--no-oversample",
                  [this](std::int64_t) { config.oversample = false; },
                  "disable replication of entity-bearing segments");
    cmd->add_option("--oversample-factor", config.oversample_factor,
                    "replication factor for entity-bearing segments (default 3)");
    cmd->add_option("--batch-size", config.batch_size, "mini-batch size (default 8)");
    cmd->add_option("--seed", config.seed, "rng seed (default 1)");
  }
};

nat::Corpus read_corpus(const std::string& path) {
  return nat::parse_conll(nat::read_file(path));
}

std::map<nat::EntityType, std::string> parse_gazetteer_args(
    const std::vector<std::string>& args) {
  std::map<nat::EntityType, std::string> files;
  for (const auto& a : args) {
    auto eq = a.find('=');
    if (eq == std::string::npos)
      throw nat::corpus_error("--gazetteer expects TYPE=path, got '" + a + "'");
    files[a.substr(0, eq)] = a.substr(eq + 1);
  }
  return files;
}

int run(int argc, char** argv) {
  CLI::App app{"Noise-aware sequence labeling toolkit"};
  app.require_subcommand(1);

  // analyze-errors
  std::string ae_noisy, ae_clean, ae_out;
  auto* analyze = app.add_subcommand(
      "analyze-errors", "Build an OCR error table from parallel noisy/clean corpora");
  analyze->add_option("noisy", ae_noisy, "noisy corpus (CoNLL)")
      ->required()
      ->check(CLI::ExistingFile);
  analyze->add_option("clean", ae_clean, "clean corpus (CoNLL)")
      ->required()
      ->check(CLI::ExistingFile);
  analyze->add_option("--out", ae_out, "output error-table CSV")->required();

  // inject
  std::string in_corpus, in_table, in_out;
  std::uint64_t in_seed = 1;
  double in_lambda = 0.8;
  bool in_double = false;
  auto* inject = app.add_subcommand("inject", "Inject one OCR-style error per word");
  inject->add_option("corpus", in_corpus, "clean corpus (CoNLL)")
      ->required()
      ->check(CLI::ExistingFile);
  inject->add_option("table", in_table, "error-table CSV")
      ->required()
      ->check(CLI::ExistingFile);
  inject->add_option("--seed", in_seed, "rng seed (default 1)");
  inject->add_option("--lambda", in_lambda,
                     "probability of a table-driven edit (default 0.8)");
  inject->add_flag("--double", in_double,
                   "append the noised copy to the clean corpus (doubles the data)");
  inject->add_option("--out", in_out, "output corpus path")->required();

  // split
  std::string sp_corpus, sp_out, sp_ratios = "0.7,0.2,0.1";
  std::uint64_t sp_seed = 1;
  auto* split = app.add_subcommand(
      "split", "Stratified train/test/val split at segment level (default 70:20:10)");
  split->add_option("corpus", sp_corpus, "corpus (CoNLL)")
      ->required()
      ->check(CLI::ExistingFile);
  split->add_option("--ratios", sp_ratios, "train,test,val (default 0.7,0.2,0.1)");
  split->add_option("--seed", sp_seed, "rng seed (default 1)");
  split->add_option("--out", sp_out, "output directory")->required();

  // pretrain
  std::vector<std::string> pt_gazetteers;
  std::string pt_out;
  std::size_t pt_val_cap = 10000;
  CommonTrainFlags pt_flags;
  auto* pretrain_cmd = app.add_subcommand(
      "pretrain", "Train the intermediate model on O-free gazetteer data");
  pretrain_cmd
      ->add_option("--gazetteer", pt_gazetteers,
                   "TYPE=path, one phrase per line (repeatable)")
      ->required();
  pretrain_cmd->add_option("--val-cap", pt_val_cap,
                           "validation slice token cap (default 10000)");
  pretrain_cmd->add_option("--out", pt_out, "output model path")->required();
  pt_flags.attach(pretrain_cmd);

  // train
  std::string tr_variant, tr_clean, tr_noisy, tr_table, tr_val, tr_init, tr_out,
      tr_curve;
  double tr_lambda = 0.8;
  CommonTrainFlags tr_flags;
  auto* train_cmd =
      app.add_subcommand("train", "Fine-tune one variant (noisy|clean|artificial)");
  train_cmd->add_option("--variant", tr_variant, "noisy|clean|artificial")->required();
  train_cmd->add_option("clean", tr_clean, "clean training corpus (CoNLL)")
      ->required()
      ->check(CLI::ExistingFile);
  train_cmd->add_option("noisy", tr_noisy, "parallel noisy training corpus (CoNLL)")
      ->required()
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--table", tr_table, "error-table CSV (artificial variant)")
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--val", tr_val, "validation corpus (CoNLL)")
      ->required()
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--init", tr_init, "warm-start model (from pretrain)")
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--lambda", tr_lambda,
                        "probability of a table-driven edit (default 0.8)");
  train_cmd->add_option("--out", tr_out, "output model path")->required();
  train_cmd->add_option("--curve", tr_curve, "epoch-curve CSV output path");
  tr_flags.attach(train_cmd);

  // evaluate
  std::string ev_gold, ev_pred, ev_out;
  auto* evaluate = app.add_subcommand(
      "evaluate", "Strict entity-level precision/recall/F1 of predictions vs gold");
  evaluate->add_option("gold", ev_gold, "gold corpus (CoNLL)")
      ->required()
      ->check(CLI::ExistingFile);
  evaluate->add_option("pred", ev_pred, "predicted corpus (CoNLL)")
      ->required()
      ->check(CLI::ExistingFile);
  evaluate->add_option("--out", ev_out, "optional confusion-matrix CSV path");

  // experiment
  std::string ex_config, ex_out;
  auto* experiment = app.add_subcommand(
      "experiment",
      "Full pipeline: split, noise, pretrain, three variants, shared noisy test");
  experiment->add_option("config", ex_config, "experiment config (key=value file)")
      ->required()
      ->check(CLI::ExistingFile);
  experiment->add_option("--out", ex_out, "output directory for the report bundle")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;  // usage errors exit 2, --help exits 0
  }

  if (analyze->parsed()) {
    nat::ErrorTable table =
        nat::analyze_errors(read_corpus(ae_noisy), read_corpus(ae_clean));
    nat::write_file_atomic(ae_out, nat::save_error_table(table));
    std::cout << "entries: " << table.entries.size() << ", total edits: " << table.total
              << "\n";
    return 0;
  }

  if (inject->parsed()) {
    nat::Corpus corpus = read_corpus(in_corpus);
    nat::ErrorTable table = nat::load_error_table(nat::read_file(in_table));
    nat::Corpus out = in_double
                          ? nat::make_artificial(corpus, table, in_seed, in_lambda)
                          : nat::inject_noise(corpus, table, in_seed, in_lambda);
    nat::write_file_atomic(in_out, nat::write_conll(out));
    std::cout << "segments: " << out.segment_count()
              << ", tokens: " << out.token_count() << "\n";
    return 0;
  }

  if (split->parsed()) {
    double a, b, c;
    char c1, c2;
    std::istringstream rs(sp_ratios);
    if (!(rs >> a >> c1 >> b >> c2 >> c) || c1 != ',' || c2 != ',')
      throw nat::corpus_error("--ratios expects three comma-separated numbers");
    nat::Corpus corpus = read_corpus(sp_corpus);
    auto [train_part, test_part, val_part] =
        nat::stratified_split(corpus, {a, b, c}, sp_seed);
    std::filesystem::create_directories(sp_out);
    nat::write_file_atomic(sp_out + "/train.conll", nat::write_conll(train_part));
    nat::write_file_atomic(sp_out + "/test.conll", nat::write_conll(test_part));
    nat::write_file_atomic(sp_out + "/val.conll", nat::write_conll(val_part));

    auto global = nat::entity_counts(corpus);
    const char* names[] = {"train", "test", "val"};
    const nat::Corpus* parts[] = {&train_part, &test_part, &val_part};
    for (int i = 0; i < 3; ++i) {
      auto counts = nat::entity_counts(*parts[i]);
      std::cout << names[i] << ": " << parts[i]->segment_count() << " segments";
      for (const auto& [type, total] : global) {
        double share = total ? 100.0 * static_cast<double>(counts[type]) /
                                   static_cast<double>(total)
                             : 0.0;
        std::printf(", %s %.1f%%", type.c_str(), share);
      }
      std::cout << "\n";
    }
    return 0;
  }

  if (pretrain_cmd->parsed()) {
    nat::Corpus gaz = nat::load_gazetteers(parse_gazetteer_args(pt_gazetteers));
    nat::CrfModel model = nat::pretrain(gaz, pt_flags.config, pt_val_cap);
    nat::save_model(model, pt_out);
    std::cout << "features: " << model.feature_names.size()
              << ", labels: " << model.labels.size() << "\n";
    return 0;
  }

  if (train_cmd->parsed()) {
    nat::Variant variant = nat::variant_from_string(tr_variant);
    nat::Corpus clean = read_corpus(tr_clean);
    nat::Corpus noisy = read_corpus(tr_noisy);
    nat::Corpus val = read_corpus(tr_val);
    nat::ErrorTable table = tr_table.empty()
                                ? nat::default_error_table()
                                : nat::load_error_table(nat::read_file(tr_table));
    nat::CrfModel init;
    if (!tr_init.empty()) init = nat::load_model(tr_init);
    nat::TrainResult result = nat::finetune_variant(
        variant, clean, noisy, table, val, init, tr_flags.config, tr_lambda);
    nat::save_model(result.model, tr_out);
    if (!tr_curve.empty())
      nat::write_file_atomic(tr_curve, nat::epoch_curve_csv(result.records));
    std::size_t train_tokens = variant == nat::Variant::Artificial
                                   ? 2 * clean.token_count()
                                   : clean.token_count();
    double best = 0.0;
    for (const auto& r : result.records) best = std::max(best, r.val_f1);
    std::cout << "variant " << tr_variant << ": training tokens " << train_tokens
              << ", epochs run " << result.records.size() << ", best val F1 ";
    std::printf("%.4f\n", best);
    return 0;
  }

  if (evaluate->parsed()) {
    nat::EvalReport report = nat::entity_prf(read_corpus(ev_gold), read_corpus(ev_pred));
    std::printf("precision %.4f recall %.4f f1 %.4f (tp %llu fp %llu fn %llu)\n",
                report.precision, report.recall, report.f1,
                static_cast<unsigned long long>(report.tp),
                static_cast<unsigned long long>(report.fp),
                static_cast<unsigned long long>(report.fn));
    for (const auto& [type, score] : report.per_entity)
      std::printf("  %s f1 %.4f\n", type.c_str(), score.f1);
    if (!ev_out.empty()) nat::write_file_atomic(ev_out, report.confusion.csv());
    return 0;
  }

  if (experiment->parsed()) {
    nat::ExperimentConfig config = nat::load_experiment_config(ex_config);
    std::filesystem::create_directories(ex_out);
    nat::ExperimentReport report = nat::run_experiment(config);
    nat::write_experiment_report(report, ex_out);
    for (const char* name : {"noisy", "clean", "artificial"})
      std::printf("%s: f1 %.4f\n", name, report.variants.at(name).report.f1);
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const nat::corpus_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}

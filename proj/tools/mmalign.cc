// Command-line entry point: generate, train, eval, weights.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "commands.h"
#include "mmalign/error.h"
#include "mmalign/trainer.h"

namespace {

using namespace mmalign;
using namespace mmalign::cli;

template <typename T>
void Override(T& field, const std::optional<T>& value) {
  if (value) field = *value;
}

// Paired --x / --no-x switches; unset when neither is given.
void AddSwitch(CLI::App* app, const std::string& name, std::optional<bool>& target,
               const std::string& help) {
  app->add_flag_callback("--" + name, [&target] { target = true; }, help);
  app->add_flag_callback("--no-" + name, [&target] { target = false; });
}

struct GenerateFlags {
  std::string out;
  std::string config;
  bool force = false;
  std::optional<uint64_t> seed;
  std::optional<int> entities, relations, attributes, visual_dim, surface_dim;
  std::optional<double> degree, attrs_per_entity, rewire, visual_noise, surface_noise,
      visual_missing, visual_uninformative;
};

struct TrainFlags {
  std::string config;
  std::string out;
  bool force = false;
  std::optional<std::string> profile, data, modalities, mode, reference, pool;
  std::optional<int> dim, ffn_dim, heads, relation_vocab, attribute_vocab, epochs,
      iterative_epochs, batch_size, propose_every, confirmations, dictionary_size, eval_every;
  std::optional<double> temperature, learning_rate, warmup_fraction, weight_decay, seed_ratio;
  std::optional<bool> ffn, licl, late, merp;
  std::optional<uint64_t> seed;
};

struct EvalFlags {
  std::string run;
  std::optional<std::string> data;
  std::string direction = "both";
  std::optional<std::string> json;
};

struct WeightsFlags {
  std::string run;
  std::optional<std::string> data;
  std::optional<std::string> out;
  std::optional<std::string> highlight;
};

// Profile defaults, then the config file, then flags.
RunConfig ResolveRunConfig(const TrainFlags& f) {
  nlohmann::json doc = f.config.empty() ? nlohmann::json::object() : ReadJsonFile(f.config);
  std::string profile = "desk";
  if (doc.is_object() && doc.contains("profile")) profile = doc.at("profile").get<std::string>();
  if (f.profile) profile = *f.profile;
  if (doc.is_object()) doc.erase("profile");
  RunConfig base = ProfileDefaults(profile);
  base.seed = DefaultSeed();
  RunConfig cfg = FromJson(doc, base);
  Override(cfg.data, f.data);
  Override(cfg.modalities, f.modalities);
  Override(cfg.mode, f.mode);
  Override(cfg.reference, f.reference);
  Override(cfg.pool, f.pool);
  Override(cfg.dim, f.dim);
  Override(cfg.ffn_dim, f.ffn_dim);
  Override(cfg.heads, f.heads);
  Override(cfg.relation_vocab, f.relation_vocab);
  Override(cfg.attribute_vocab, f.attribute_vocab);
  Override(cfg.epochs, f.epochs);
  Override(cfg.iterative_epochs, f.iterative_epochs);
  Override(cfg.batch_size, f.batch_size);
  Override(cfg.propose_every, f.propose_every);
  Override(cfg.confirmations, f.confirmations);
  Override(cfg.dictionary_size, f.dictionary_size);
  Override(cfg.eval_every, f.eval_every);
  Override(cfg.temperature, f.temperature);
  Override(cfg.learning_rate, f.learning_rate);
  Override(cfg.warmup_fraction, f.warmup_fraction);
  Override(cfg.weight_decay, f.weight_decay);
  Override(cfg.seed_ratio, f.seed_ratio);
  Override(cfg.ffn, f.ffn);
  Override(cfg.licl, f.licl);
  Override(cfg.late, f.late);
  Override(cfg.merp, f.merp);
  Override(cfg.seed, f.seed);
  return cfg;
}

GeneratorConfig ResolveGenerator(const GenerateFlags& f, uint64_t& seed) {
  GeneratorConfig g;
  seed = DefaultSeed();
  if (!f.config.empty()) {
    nlohmann::json doc = ReadJsonFile(f.config);
    if (doc.contains("seed")) {
      seed = doc.at("seed").get<uint64_t>();
      doc.erase("seed");
    }
    g = GeneratorFromJson(doc, g);
  }
  Override(seed, f.seed);
  Override(g.entities, f.entities);
  Override(g.relations, f.relations);
  Override(g.attributes, f.attributes);
  Override(g.visual_dim, f.visual_dim);
  Override(g.surface_dim, f.surface_dim);
  Override(g.degree, f.degree);
  Override(g.attrs_per_entity, f.attrs_per_entity);
  Override(g.rewire_rate, f.rewire);
  Override(g.visual_noise, f.visual_noise);
  Override(g.surface_noise, f.surface_noise);
  Override(g.visual_missing, f.visual_missing);
  Override(g.visual_uninformative, f.visual_uninformative);
  return g;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-modal entity alignment: synthetic data, training and evaluation"};
  app.require_subcommand(1);

  GenerateFlags gen;
  CLI::App* generate = app.add_subcommand("generate", "Write a synthetic graph pair");
  generate->add_option("--out", gen.out, "Output pair directory")->required();
  generate->add_option("--config", gen.config, "JSON generator config");
  generate->add_flag("--force", gen.force, "Replace an existing directory");
  generate->add_option("--seed", gen.seed, "Random seed (default: $MMALIGN_SEED or 0)");
  generate->add_option("--n", gen.entities, "Entities per graph");
  generate->add_option("--relations", gen.relations, "Relation vocabulary size");
  generate->add_option("--attributes", gen.attributes, "Attribute vocabulary size");
  generate->add_option("--degree", gen.degree, "Average degree");
  generate->add_option("--attrs-per-entity", gen.attrs_per_entity, "Mean attributes per entity");
  generate->add_option("--visual-dim", gen.visual_dim, "Visual width (0 disables)");
  generate->add_option("--surface-dim", gen.surface_dim, "Surface width (0 disables)");
  generate->add_option("--rewire", gen.rewire, "Fraction of KG2 triples rewired");
  generate->add_option("--visual-noise", gen.visual_noise, "Visual noise sd");
  generate->add_option("--surface-noise", gen.surface_noise, "Surface noise sd");
  generate->add_option("--visual-missing", gen.visual_missing, "Visual missing rate per graph");
  generate->add_option("--visual-uninformative", gen.visual_uninformative,
                       "Fraction of pairs with mean visual rows");

  TrainFlags tr;
  CLI::App* train = app.add_subcommand("train", "Train on a pair directory");
  train->add_option("--config", tr.config, "JSON run config");
  train->add_option("--out", tr.out, "Run directory")->required();
  train->add_flag("--force", tr.force, "Replace a non-empty run directory");
  train->add_option("--profile", tr.profile, "desk, paper-dbp or paper-fbdb");
  train->add_option("--data", tr.data, "Pair directory");
  train->add_option("--modalities", tr.modalities, "Modality tags, e.g. gravs");
  train->add_option("--mode", tr.mode, "supervised, iterative or unsupervised");
  train->add_option("--ref", tr.reference, "Reference modality for unsupervised seeding");
  train->add_option("--pool", tr.pool, "Evaluation candidates: test or all");
  train->add_option("--dim", tr.dim, "Hidden width d");
  train->add_option("--ffn-dim", tr.ffn_dim, "FFN inner width");
  train->add_option("--heads", tr.heads, "Cross-modal attention heads");
  train->add_option("--relation-vocab", tr.relation_vocab, "Relation vocabulary cap");
  train->add_option("--attribute-vocab", tr.attribute_vocab, "Attribute vocabulary cap");
  train->add_option("--epochs", tr.epochs, "Epochs (first phase)");
  train->add_option("--iterative-epochs", tr.iterative_epochs, "Epochs of the iterative phase");
  train->add_option("--batch-size", tr.batch_size, "Pairs per batch");
  train->add_option("--propose-every", tr.propose_every, "Epochs between proposal rounds");
  train->add_option("--confirmations", tr.confirmations, "Rounds a candidate must survive");
  train->add_option("--n-dic", tr.dictionary_size, "Pseudo-seed dictionary size");
  train->add_option("--eval-every", tr.eval_every, "Epochs between evaluations (0: last only)");
  train->add_option("--tau", tr.temperature, "Contrastive temperature");
  train->add_option("--lr", tr.learning_rate, "Peak learning rate");
  train->add_option("--warmup", tr.warmup_fraction, "Warm-up fraction of steps");
  train->add_option("--weight-decay", tr.weight_decay, "AdamW weight decay");
  train->add_option("--ratio", tr.seed_ratio, "Fraction of pairs used as seeds");
  train->add_option("--seed", tr.seed, "Random seed (default: $MMALIGN_SEED or 0)");
  AddSwitch(train, "ffn", tr.ffn, "Feed-forward block after attention");
  AddSwitch(train, "licl", tr.licl, "Post-attention intra-modal losses");
  AddSwitch(train, "late", tr.late, "Late-fusion loss term");
  AddSwitch(train, "merp", tr.merp, "Hard-negative replay (supervised mode)");

  EvalFlags ev;
  CLI::App* eval = app.add_subcommand("eval", "Evaluate a run directory's parameters");
  eval->add_option("--run", ev.run, "Run directory")->required();
  eval->add_option("--data", ev.data, "Pair directory (default: the run's)");
  eval->add_option("--direction", ev.direction, "both, fwd or bwd");
  eval->add_option("--json", ev.json, "Also write the report as JSON");

  WeightsFlags wf;
  CLI::App* weights = app.add_subcommand("weights", "Per-entity meta modality weights");
  weights->add_option("--run", wf.run, "Run directory")->required();
  weights->add_option("--data", wf.data, "Pair directory (default: the run's)");
  weights->add_option("--out", wf.out, "Output directory (default: <run>/weights)");
  weights->add_option("--highlight", wf.highlight, "KG1 ids to summarise separately");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*generate) {
      uint64_t seed = 0;
      const GeneratorConfig g = ResolveGenerator(gen, seed);
      Generate(g, seed, gen.out, gen.force, std::cerr);
    } else if (*train) {
      TrainRun(ResolveRunConfig(tr), tr.out, tr.force, std::cerr);
    } else if (*eval) {
      const Direction d = ParseDirection(ev.direction);
      std::optional<fs::path> data;
      if (ev.data) data = *ev.data;
      const MetricsReport report = EvalRun(ev.run, data);
      std::cout << FormatReport(report, d);
      if (ev.json) WriteTextFile(*ev.json, ReportJson(report, d) + "\n");
    } else if (*weights) {
      std::optional<fs::path> data, highlight;
      if (wf.data) data = *wf.data;
      if (wf.highlight) highlight = *wf.highlight;
      const fs::path out = wf.out ? fs::path(*wf.out) : fs::path(wf.run) / "weights";
      WeightsRun(wf.run, data, out, highlight, std::cout);
    }
  } catch (const TrainingAborted& e) {
    std::cerr << "error: training aborted at epoch " << e.epoch() << ": " << e.what() << '\n';
    return kExitNumerical;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return ExitCodeFor(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}

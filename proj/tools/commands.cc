#include "commands.h"

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>

#include "mmalign/features.h"
#include "mmalign/kg.h"
#include "mmalign/params.h"
#include "mmalign/trainer.h"

namespace mmalign::cli {

using nlohmann::json;

namespace {

constexpr char kConfigFile[] = "config.json";
constexpr char kParamsFile[] = "params.bin";
constexpr char kManifestFile[] = "manifest.json";
constexpr char kTrainPairsFile[] = "train_pairs.tsv";
constexpr char kTestPairsFile[] = "test_pairs.tsv";

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Refuses to clobber a non-empty directory unless forced.
void PrepareOutput(const fs::path& out, bool force) {
  if (fs::exists(out) && !fs::is_directory(out)) {
    throw UsageError(out.string() + " exists and is not a directory");
  }
  if (fs::exists(out) && !fs::is_empty(out)) {
    if (!force) throw UsageError(out.string() + " is not empty (use --force to replace it)");
    fs::remove_all(out);
  }
  fs::create_directories(out);
}

struct LoadedRun {
  RunConfig cfg;
  TrainConfig train;
  PairDataset data;
  PreparedData prepared;
  ParameterStore params;
  std::vector<EntityPair> test;
};

LoadedRun LoadRun(const fs::path& run, const std::optional<fs::path>& data) {
  LoadedRun r;
  r.cfg = FromJson(ReadJsonFile(run / kConfigFile), RunConfig{});
  if (data) r.cfg.data = data->string();
  r.cfg.Validate();
  r.train = r.cfg.ToTrainConfig();
  r.data = LoadPair(r.cfg.data);
  r.prepared = PrepareData(r.data, r.train.model, r.cfg.ToFeatureOptions(), r.cfg.seed);
  r.params = LoadParameters(run / kParamsFile, run / kManifestFile);
  r.test = LoadAlignmentFile(run / kTestPairsFile, r.data.kg1, r.data.kg2);
  return r;
}

json EpochJson(const EpochRecord& e) {
  json j = {{"phase", e.phase},
            {"epoch", e.epoch},
            {"loss", e.loss},
            {"fused", e.fused},
            {"intra", e.intra},
            {"late_intra", e.late_intra},
            {"late", e.late},
            {"learning_rate", e.learning_rate},
            {"seeds", e.seeds},
            {"promoted", e.promoted},
            {"clamped", e.clamped},
            {"wall_seconds", e.wall_seconds}};
  if (e.metrics) j["metrics"] = json::parse(ReportJson(*e.metrics));
  return j;
}

// One observation per row: epoch, phase, series, value.
std::string CurvesCsv(const std::vector<EpochRecord>& log) {
  std::ostringstream out;
  out << "epoch,phase,series,value\n";
  for (const EpochRecord& e : log) {
    auto row = [&](const std::string& series, double v) {
      out << e.epoch << ',' << e.phase << ',' << series << ',' << Num(v) << '\n';
    };
    row("loss", e.loss);
    row("fused", e.fused);
    row("intra", e.intra);
    row("late_intra", e.late_intra);
    row("late", e.late);
    row("learning_rate", e.learning_rate);
    row("seeds", e.seeds);
    if (!e.metrics) continue;
    for (Direction d : {Direction::kForward, Direction::kBackward, Direction::kBoth}) {
      const Metrics& m = e.metrics->Get(d);
      const std::string prefix = std::string(DirectionName(d)) + "_";
      for (const auto& [n, v] : m.hits) row(prefix + "hits@" + std::to_string(n), v);
      row(prefix + "mrr", m.mrr);
      row(prefix + "mr", m.mr);
    }
  }
  return out.str();
}

}  // namespace

int ExitCodeFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUsage: return kExitUsage;
    case ErrorKind::kNumerical: return kExitNumerical;
    case ErrorKind::kData:
    case ErrorKind::kShape: return kExitData;
  }
  return kExitData;
}

void Generate(const GeneratorConfig& cfg, uint64_t seed, const fs::path& out,
              bool force, std::ostream& log) {
  cfg.Validate();
  if (fs::exists(out) && !force) {
    throw UsageError(out.string() + " already exists (use --force to replace it)");
  }
  const SyntheticPair sp = GenerateSyntheticPair(cfg, seed);
  const fs::path parent = out.has_parent_path() ? out.parent_path() : fs::path(".");
  fs::create_directories(parent);
  const fs::path tmp =
      parent / ("." + out.filename().string() + ".tmp-" + std::to_string(::getpid()));
  fs::remove_all(tmp);
  try {
    WritePair(sp.data, tmp);
    json meta = ToJson(cfg);
    meta["seed"] = seed;
    WriteTextFile(tmp / "generator.json", meta.dump(2) + "\n");
    if (!sp.uninformative.empty()) {
      std::ostringstream ids;
      for (int i : sp.uninformative) ids << sp.data.kg1.entity_ids[i] << '\n';
      WriteTextFile(tmp / "uninformative.tsv", ids.str());
    }
    if (fs::exists(out)) fs::remove_all(out);
    fs::rename(tmp, out);
  } catch (...) {
    std::error_code ec;
    fs::remove_all(tmp, ec);
    throw;
  }
  log << "wrote " << out.string() << ": " << cfg.entities << " entities per graph, "
      << sp.data.kg1.triples.size() << " triples, " << sp.rewired.size() << " rewired\n";
}

void TrainRun(const RunConfig& input, const fs::path& out, bool force, std::ostream& log) {
  RunConfig cfg = input;
  if (cfg.data.empty()) throw UsageError("no dataset given (--data or \"data\" in the config)");
  cfg.data = fs::absolute(cfg.data).lexically_normal().string();
  cfg.Validate();
  const PairDataset data = LoadPair(cfg.data);
  if (cfg.mode == "unsupervised" && cfg.dictionary_size == 0) {
    cfg.dictionary_size = std::max(1, static_cast<int>(0.3 * data.kg1.num_entities() + 0.5));
  }
  TrainConfig train = cfg.ToTrainConfig();
  const PreparedData prepared = PrepareData(data, train.model, cfg.ToFeatureOptions(), cfg.seed);
  const AlignmentSplit split = SplitAlignments(data.alignments, cfg.seed_ratio, cfg.seed);

  PrepareOutput(out, force);
  WriteTextFile(out / kConfigFile, ToJson(cfg).dump(2) + "\n");
  WriteAlignmentFile(split.train, data.kg1, data.kg2, out / kTrainPairsFile);
  WriteAlignmentFile(split.test, data.kg1, data.kg2, out / kTestPairsFile);

  std::ofstream epoch_log(out / "log.jsonl");
  auto on_epoch = [&](const EpochRecord& e) {
    epoch_log << EpochJson(e).dump() << '\n';
    epoch_log.flush();
    log << "epoch " << e.epoch << " (phase " << e.phase << ") loss " << e.loss
        << " |S| " << e.seeds;
    if (e.metrics) log << " hits@1 " << e.metrics->average.hits.at(1);
    log << '\n';
  };

  TrainResult result;
  std::vector<EpochRecord> records;
  try {
    result = Train(train, prepared, split, data.alignments, [&](const EpochRecord& e) {
      records.push_back(e);
      on_epoch(e);
    });
  } catch (const TrainingAborted& e) {
    SaveParameters(e.snapshot(), out / "snapshot.bin", out / "snapshot_manifest.json");
    const json abort = {{"epoch", e.epoch()}, {"message", e.what()}};
    WriteTextFile(out / "abort.json", abort.dump(2) + "\n");
    WriteTextFile(out / "curves.csv", CurvesCsv(records));
    throw;
  }

  SaveParameters(result.params, out / kParamsFile, out / kManifestFile);
  json metrics = {{"report", json::parse(ReportJson(result.final_report))},
                  {"epochs", result.log.size()},
                  {"final_seeds", result.seeds.size()}};
  std::ostringstream report;
  report << "mode " << cfg.mode << ", " << result.log.size() << " epochs, "
         << split.train.size() << " seed pairs, " << split.test.size() << " test pairs\n";
  if (result.pseudo_seed_precision) {
    metrics["pseudo_seed"] = {{"size", result.pseudo_seed_size},
                              {"precision", *result.pseudo_seed_precision}};
    report << "pseudo-seed dictionary: " << result.pseudo_seed_size << " pairs, precision "
           << *result.pseudo_seed_precision << '\n';
  }
  report << FormatReport(result.final_report);
  WriteTextFile(out / "metrics.json", metrics.dump(2) + "\n");
  WriteTextFile(out / "report.txt", report.str());
  WriteTextFile(out / "curves.csv", CurvesCsv(result.log));
  log << report.str();
}

MetricsReport EvalRun(const fs::path& run, const std::optional<fs::path>& data) {
  const LoadedRun r = LoadRun(run, data);
  const Inference inf = Infer(r.train.model, r.params, r.prepared.inputs);
  return Evaluate(inf.early, r.prepared.inputs.num_kg1, r.test, r.train.hits_at, r.train.pool);
}

void WeightsRun(const fs::path& run, const std::optional<fs::path>& data, const fs::path& out,
                const std::optional<fs::path>& highlight, std::ostream& log) {
  const LoadedRun r = LoadRun(run, data);
  const Inference inf = Infer(r.train.model, r.params, r.prepared.inputs);
  const std::vector<Modality>& mods = r.train.model.modalities;
  const int num_mods = static_cast<int>(mods.size());
  const int n1 = r.prepared.inputs.num_kg1;
  const int rows = inf.weights.dim(0);

  std::set<int> marked;  // union rows
  if (highlight) {
    std::ifstream in(*highlight);
    if (!in) throw DataError("cannot open " + highlight->string());
    std::map<int, int> counterpart;
    for (const auto& [i, j] : r.data.alignments) counterpart[i] = j;
    std::string line;
    for (int lineno = 1; std::getline(in, line); ++lineno) {
      if (line.empty()) continue;
      int64_t id = 0;
      try {
        id = std::stoll(line);
      } catch (const std::exception&) {
        throw DataError(highlight->string() + ":" + std::to_string(lineno) + ": not an id");
      }
      const int i = r.data.kg1.IndexOf(id);
      if (i < 0) {
        throw DataError(highlight->string() + ":" + std::to_string(lineno) +
                        ": unknown KG1 entity " + line);
      }
      marked.insert(i);
      if (counterpart.count(i)) marked.insert(n1 + counterpart[i]);
    }
  }

  fs::create_directories(out);
  std::ostringstream table, tidy;
  table << "graph\tentity\tname";
  for (Modality m : mods) table << "\tw_" << ModalityTag(m);
  table << "\targmax\n";
  tidy << "graph,entity,modality,weight\n";
  std::vector<double> mean(num_mods, 0), marked_mean(num_mods, 0);
  std::vector<int> argmax_count(num_mods, 0);
  for (int row = 0; row < rows; ++row) {
    const bool first = row < n1;
    const Mmkg& kg = first ? r.data.kg1 : r.data.kg2;
    const int e = first ? row : row - n1;
    const char* graph = first ? "kg1" : "kg2";
    table << graph << '\t' << kg.entity_ids[e] << '\t' << kg.entity_names[e];
    int best = 0;
    for (int m = 0; m < num_mods; ++m) {
      const double w = inf.weights.at(row, m);
      table << '\t' << Num(w);
      tidy << graph << ',' << kg.entity_ids[e] << ',' << ModalityTag(mods[m]) << ',' << Num(w)
           << '\n';
      mean[m] += w / rows;
      if (marked.count(row)) marked_mean[m] += w / static_cast<double>(marked.size());
      if (w > inf.weights.at(row, best)) best = m;
    }
    ++argmax_count[best];
    table << '\t' << ModalityTag(mods[best]) << '\n';
  }
  WriteTextFile(out / "weights.tsv", table.str());
  WriteTextFile(out / "weights.csv", tidy.str());

  json summary = {{"entities", rows}};
  std::ostringstream text;
  text << "modality  mean_weight  argmax_count";
  if (!marked.empty()) text << "  highlighted_mean";
  text << '\n';
  for (int m = 0; m < num_mods; ++m) {
    const std::string tag(1, ModalityTag(mods[m]));
    summary["mean_weight"][tag] = mean[m];
    summary["argmax_histogram"][tag] = argmax_count[m];
    char line[96];
    std::snprintf(line, sizeof line, "%-8s  %11.4f  %12d", tag.c_str(), mean[m], argmax_count[m]);
    text << line;
    if (!marked.empty()) {
      summary["highlighted_mean_weight"][tag] = marked_mean[m];
      std::snprintf(line, sizeof line, "  %16.4f", marked_mean[m]);
      text << line;
    }
    text << '\n';
  }
  if (!marked.empty()) summary["highlighted_entities"] = marked.size();
  WriteTextFile(out / "summary.json", summary.dump(2) + "\n");
  WriteTextFile(out / "summary.txt", text.str());
  log << text.str();
}

}  // namespace mmalign::cli

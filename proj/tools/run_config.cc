#include "run_config.h"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "mmalign/error.h"

namespace mmalign::cli {

using nlohmann::json;

namespace {

// Field table shared by the reader and the writer.
template <typename F>
void VisitFields(RunConfig& c, F&& f) {
  f("profile", c.profile);
  f("data", c.data);
  f("dim", c.dim);
  f("ffn_dim", c.ffn_dim);
  f("heads", c.heads);
  f("ffn", c.ffn);
  f("modalities", c.modalities);
  f("relation_vocab", c.relation_vocab);
  f("attribute_vocab", c.attribute_vocab);
  f("temperature", c.temperature);
  f("licl", c.licl);
  f("late", c.late);
  f("merp", c.merp);
  f("mode", c.mode);
  f("epochs", c.epochs);
  f("iterative_epochs", c.iterative_epochs);
  f("batch_size", c.batch_size);
  f("learning_rate", c.learning_rate);
  f("warmup_fraction", c.warmup_fraction);
  f("weight_decay", c.weight_decay);
  f("propose_every", c.propose_every);
  f("confirmations", c.confirmations);
  f("reference", c.reference);
  f("dictionary_size", c.dictionary_size);
  f("seed_ratio", c.seed_ratio);
  f("eval_every", c.eval_every);
  f("pool", c.pool);
  f("seed", c.seed);
}

template <typename F>
void VisitFields(GeneratorConfig& c, F&& f) {
  f("entities", c.entities);
  f("relations", c.relations);
  f("attributes", c.attributes);
  f("degree", c.degree);
  f("attrs_per_entity", c.attrs_per_entity);
  f("visual_dim", c.visual_dim);
  f("surface_dim", c.surface_dim);
  f("rewire_rate", c.rewire_rate);
  f("visual_noise", c.visual_noise);
  f("surface_noise", c.surface_noise);
  f("visual_missing", c.visual_missing);
  f("visual_uninformative", c.visual_uninformative);
}

template <typename Config>
json Write(Config cfg) {
  json doc = json::object();
  VisitFields(cfg, [&](const char* key, const auto& value) { doc[key] = value; });
  return doc;
}

template <typename Config>
void Read(const json& doc, Config& cfg) {
  if (!doc.is_object()) throw UsageError("config: expected a JSON object");
  json seen = json::object();
  VisitFields(cfg, [&](const char* key, auto& value) {
    auto it = doc.find(key);
    if (it == doc.end()) return;
    seen[key] = true;
    try {
      it->get_to(value);
    } catch (const json::exception&) {
      throw UsageError(std::string("config: bad value for '") + key + "': " + it->dump());
    }
  });
  for (const auto& [key, value] : doc.items()) {
    if (!seen.contains(key)) throw UsageError("config: unknown key '" + key + "'");
  }
}

CandidatePool ParsePool(const std::string& name) {
  if (name == "test") return CandidatePool::kTestTargets;
  if (name == "all") return CandidatePool::kAllTargets;
  throw UsageError("unknown candidate pool '" + name + "' (expected test or all)");
}

}  // namespace

RunConfig ProfileDefaults(const std::string& profile) {
  RunConfig c;
  c.profile = profile;
  if (profile == "desk") return c;
  if (profile == "paper-dbp" || profile == "paper-fbdb") {
    c.dim = 300;
    c.epochs = 500;
    c.iterative_epochs = 500;
    c.eval_every = 50;
    if (profile == "paper-fbdb") {
      c.ffn = false;
      c.seed_ratio = 0.2;
    }
    return c;
  }
  throw UsageError("unknown profile '" + profile + "' (expected desk, paper-dbp or paper-fbdb)");
}

void RunConfig::Validate() const {
  ProfileDefaults(profile);
  if (seed_ratio <= 0 || seed_ratio >= 1) throw UsageError("seed_ratio must lie in (0, 1)");
  if (relation_vocab <= 0 || attribute_vocab <= 0) {
    throw UsageError("vocabulary sizes must be positive");
  }
  if (dictionary_size < 0) throw UsageError("dictionary_size must be non-negative");
  if (reference.size() != 1) throw UsageError("reference must be a single modality tag");
  ParsePool(pool);
  // Input widths and the automatic dictionary size come from the data; stand
  // in for them here.
  TrainConfig t = ToTrainConfig();
  if (t.dictionary_size == 0) t.dictionary_size = 1;
  for (Modality m : t.model.modalities) {
    if (m != Modality::kGraph) t.model.input_dims[m] = 1;
  }
  t.Validate();
}

TrainConfig RunConfig::ToTrainConfig() const {
  TrainConfig t;
  t.model.dim = dim;
  t.model.ffn_dim = ffn_dim;
  t.model.heads = heads;
  t.model.use_ffn = ffn;
  t.model.modalities = ParseModalities(modalities);
  t.loss.temperature = static_cast<Scalar>(temperature);
  t.loss.use_licl = licl;
  t.loss.use_late = late;
  t.loss.use_merp = merp;
  t.adamw.weight_decay = weight_decay;
  t.mode = ParseTrainMode(mode);
  t.epochs = epochs;
  t.iterative_epochs = iterative_epochs;
  t.batch_size = batch_size;
  t.learning_rate = learning_rate;
  t.warmup_fraction = warmup_fraction;
  t.propose_every = propose_every;
  t.confirmations = confirmations;
  if (reference.size() != 1) throw UsageError("reference must be a single modality tag");
  t.reference = ParseModality(reference[0]);
  t.dictionary_size = dictionary_size;
  t.eval_every = eval_every;
  t.pool = ParsePool(pool);
  t.seed = seed;
  return t;
}

FeatureOptions RunConfig::ToFeatureOptions() const {
  FeatureOptions o;
  o.relation_vocab = relation_vocab;
  o.attribute_vocab = attribute_vocab;
  return o;
}

json ToJson(const RunConfig& cfg) { return Write(cfg); }

RunConfig FromJson(const json& doc, const RunConfig& base) {
  RunConfig cfg = base;
  if (doc.is_object() && doc.contains("profile")) {
    cfg = ProfileDefaults(doc.at("profile").get<std::string>());
  }
  Read(doc, cfg);
  return cfg;
}

json ToJson(const GeneratorConfig& cfg) { return Write(cfg); }

GeneratorConfig GeneratorFromJson(const json& doc, const GeneratorConfig& base) {
  GeneratorConfig cfg = base;
  Read(doc, cfg);
  return cfg;
}

json ReadJsonFile(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw DataError("cannot open " + file.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError(file.string() + ": " + e.what());
  }
}

void WriteTextFile(const std::filesystem::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  out << text;
  if (!out) throw DataError("cannot write " + file.string());
}

uint64_t DefaultSeed() {
  const char* env = std::getenv("MMALIGN_SEED");
  if (env == nullptr || *env == '\0') return 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (*end != '\0') throw UsageError(std::string("MMALIGN_SEED is not an integer: ") + env);
  return v;
}

}  // namespace mmalign::cli

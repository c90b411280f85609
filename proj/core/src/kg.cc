#include "mmalign/kg.h"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "mmalign/error.h"

namespace mmalign {

namespace fs = std::filesystem;

char ModalityTag(Modality m) {
  switch (m) {
    case Modality::kGraph: return 'g';
    case Modality::kRelation: return 'r';
    case Modality::kAttribute: return 'a';
    case Modality::kVisual: return 'v';
    case Modality::kSurface: return 's';
  }
  return '?';
}

Modality ParseModality(char tag) {
  switch (tag) {
    case 'g': return Modality::kGraph;
    case 'r': return Modality::kRelation;
    case 'a': return Modality::kAttribute;
    case 'v': return Modality::kVisual;
    case 's': return Modality::kSurface;
  }
  throw UsageError(std::string("unknown modality tag '") + tag + "'");
}

std::vector<Modality> ParseModalities(const std::string& tags) {
  std::set<Modality> seen;
  for (char c : tags) {
    if (!seen.insert(ParseModality(c)).second) {
      throw UsageError(std::string("duplicate modality tag '") + c + "'");
    }
  }
  if (seen.empty()) throw UsageError("empty modality set");
  return {seen.begin(), seen.end()};
}

std::string ModalityTags(const std::vector<Modality>& modalities) {
  std::string out;
  for (Modality m : modalities) out += ModalityTag(m);
  return out;
}

int Mmkg::IndexOf(int64_t id) const {
  if (index_.size() != entity_ids.size()) {
    throw Error(ErrorKind::kUsage, "Mmkg: id index is stale, call Reindex()");
  }
  auto it = index_.find(id);
  return it == index_.end() ? -1 : it->second;
}

void Mmkg::Reindex() {
  index_.clear();
  for (int i = 0; i < num_entities(); ++i) index_[entity_ids[i]] = i;
}

int Mmkg::InternRelation(const std::string& label) {
  if (relation_index_.size() != relations.size()) {
    relation_index_.clear();
    for (int i = 0; i < static_cast<int>(relations.size()); ++i) {
      relation_index_[relations[i]] = i;
    }
  }
  auto [it, inserted] =
      relation_index_.emplace(label, static_cast<int>(relations.size()));
  if (inserted) relations.push_back(label);
  return it->second;
}

int Mmkg::InternAttribute(const std::string& label) {
  if (attribute_index_.size() != attributes.size()) {
    attribute_index_.clear();
    for (int i = 0; i < static_cast<int>(attributes.size()); ++i) {
      attribute_index_[attributes[i]] = i;
    }
  }
  auto [it, inserted] =
      attribute_index_.emplace(label, static_cast<int>(attributes.size()));
  if (inserted) attributes.push_back(label);
  return it->second;
}

bool Mmkg::operator==(const Mmkg& other) const {
  if (entity_ids != other.entity_ids || entity_names != other.entity_names ||
      triples.size() != other.triples.size() ||
      attrs.size() != other.attrs.size() || visual != other.visual ||
      surface != other.surface) {
    return false;
  }
  // Label tables may differ in unused entries; compare by label.
  for (size_t i = 0; i < triples.size(); ++i) {
    const RelTriple& a = triples[i];
    const RelTriple& b = other.triples[i];
    if (a.head != b.head || a.tail != b.tail ||
        relations[a.relation] != other.relations[b.relation]) {
      return false;
    }
  }
  for (size_t i = 0; i < attrs.size(); ++i) {
    if (attrs[i].entity != other.attrs[i].entity ||
        attributes[attrs[i].attribute] !=
            other.attributes[other.attrs[i].attribute]) {
      return false;
    }
  }
  return true;
}

namespace {

// Reads a tab-separated file line by line, normalizing CRLF endings.
class TsvReader {
 public:
  explicit TsvReader(const fs::path& path) : path_(path), in_(path) {
    if (!in_) throw DataError("cannot open " + path.string());
  }

  // Next non-empty line split on tabs; false at EOF.
  bool Next(std::vector<std::string>& fields) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      fields.clear();
      size_t start = 0;
      while (true) {
        size_t tab = line.find('\t', start);
        fields.push_back(line.substr(start, tab - start));
        if (tab == std::string::npos) break;
        start = tab + 1;
      }
      return true;
    }
    return false;
  }

  Error Fail(const std::string& what) const {
    return DataError(path_.string() + ":" + std::to_string(line_no_) + ": " +
                     what);
  }

  int64_t ParseId(const std::string& s) const {
    int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw Fail("malformed integer id '" + s + "'");
    }
    return v;
  }

  Scalar ParseScalar(const std::string& s) const {
    Scalar v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw Fail("malformed number '" + s + "'");
    }
    return v;
  }

  void ExpectFields(const std::vector<std::string>& fields, size_t n) const {
    if (fields.size() != n) {
      throw Fail("expected " + std::to_string(n) + " fields, got " +
                 std::to_string(fields.size()));
    }
  }

 private:
  fs::path path_;
  std::ifstream in_;
  int line_no_ = 0;
};

int ResolveEntity(const Mmkg& kg, const TsvReader& reader,
                  const std::string& field) {
  const int idx = kg.IndexOf(reader.ParseId(field));
  if (idx < 0) throw reader.Fail("undeclared entity id " + field);
  return idx;
}

void LoadDense(const fs::path& path, const Mmkg& kg, DenseFeatures& out) {
  out = DenseFeatures();
  if (!fs::exists(path)) return;
  TsvReader reader(path);
  std::vector<std::string> fields;
  while (reader.Next(fields)) {
    if (fields.size() < 2) reader.ExpectFields(fields, 2);
    const int e = ResolveEntity(kg, reader, fields[0]);
    const int dim = static_cast<int>(fields.size()) - 1;
    if (out.dim == 0) out.dim = dim;
    if (dim != out.dim) {
      throw reader.Fail("vector length " + std::to_string(dim) +
                        " differs from " + std::to_string(out.dim));
    }
    std::vector<Scalar> v(dim);
    for (int k = 0; k < dim; ++k) v[k] = reader.ParseScalar(fields[k + 1]);
    if (!out.rows.emplace(e, std::move(v)).second) {
      throw reader.Fail("duplicate feature row for entity " + fields[0]);
    }
  }
}

std::string FormatScalar(Scalar v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::ofstream OpenForWrite(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

void WriteDense(const Mmkg& kg, const DenseFeatures& features,
                const fs::path& path) {
  if (features.dim == 0 && features.rows.empty()) return;
  std::ofstream out = OpenForWrite(path);
  for (const auto& [e, v] : features.rows) {
    out << kg.entity_ids[e];
    for (Scalar x : v) out << '\t' << FormatScalar(x);
    out << '\n';
  }
}

}  // namespace

Mmkg LoadMmkg(const fs::path& dir) {
  Mmkg kg;
  std::vector<std::string> fields;
  {
    TsvReader reader(dir / "entities.tsv");
    std::set<int64_t> seen;
    while (reader.Next(fields)) {
      if (fields.size() == 1) fields.emplace_back();
      reader.ExpectFields(fields, 2);
      const int64_t id = reader.ParseId(fields[0]);
      if (!seen.insert(id).second) {
        throw reader.Fail("duplicate entity id " + fields[0]);
      }
      kg.entity_ids.push_back(id);
      kg.entity_names.push_back(fields[1]);
    }
    kg.Reindex();
  }
  {
    TsvReader reader(dir / "rel_triples.tsv");
    std::set<RelTriple> seen;
    while (reader.Next(fields)) {
      reader.ExpectFields(fields, 3);
      if (fields[1].empty()) throw reader.Fail("empty relation label");
      RelTriple t;
      t.head = ResolveEntity(kg, reader, fields[0]);
      t.relation = kg.InternRelation(fields[1]);
      t.tail = ResolveEntity(kg, reader, fields[2]);
      if (!seen.insert(t).second) throw reader.Fail("duplicate triple");
      kg.triples.push_back(t);
    }
  }
  {
    TsvReader reader(dir / "attr.tsv");
    while (reader.Next(fields)) {
      reader.ExpectFields(fields, 2);
      if (fields[1].empty()) throw reader.Fail("empty attribute label");
      AttrAssignment a;
      a.entity = ResolveEntity(kg, reader, fields[0]);
      a.attribute = kg.InternAttribute(fields[1]);
      kg.attrs.push_back(a);
    }
  }
  LoadDense(dir / "visual.tsv", kg, kg.visual);
  LoadDense(dir / "surface.tsv", kg, kg.surface);
  return kg;
}

void WriteMmkg(const Mmkg& kg, const fs::path& dir) {
  fs::create_directories(dir);
  {
    std::ofstream out = OpenForWrite(dir / "entities.tsv");
    for (int i = 0; i < kg.num_entities(); ++i) {
      out << kg.entity_ids[i] << '\t' << kg.entity_names[i] << '\n';
    }
  }
  {
    std::ofstream out = OpenForWrite(dir / "rel_triples.tsv");
    for (const RelTriple& t : kg.triples) {
      out << kg.entity_ids[t.head] << '\t' << kg.relations[t.relation] << '\t'
          << kg.entity_ids[t.tail] << '\n';
    }
  }
  {
    std::ofstream out = OpenForWrite(dir / "attr.tsv");
    for (const AttrAssignment& a : kg.attrs) {
      out << kg.entity_ids[a.entity] << '\t' << kg.attributes[a.attribute]
          << '\n';
    }
  }
  WriteDense(kg, kg.visual, dir / "visual.tsv");
  WriteDense(kg, kg.surface, dir / "surface.tsv");
}

std::vector<std::pair<int, int>> LoadAlignmentFile(const fs::path& file,
                                                   const Mmkg& kg1,
                                                   const Mmkg& kg2) {
  TsvReader reader(file);
  std::vector<std::string> fields;
  std::vector<std::pair<int, int>> pairs;
  std::set<int> left, right;
  while (reader.Next(fields)) {
    reader.ExpectFields(fields, 2);
    const int a = ResolveEntity(kg1, reader, fields[0]);
    const int b = ResolveEntity(kg2, reader, fields[1]);
    if (!left.insert(a).second || !right.insert(b).second) {
      throw reader.Fail("entity aligned twice (alignments must be 1-to-1)");
    }
    pairs.emplace_back(a, b);
  }
  return pairs;
}

void WriteAlignmentFile(const std::vector<std::pair<int, int>>& pairs,
                        const Mmkg& kg1, const Mmkg& kg2,
                        const fs::path& file) {
  std::ofstream out = OpenForWrite(file);
  for (const auto& [a, b] : pairs) {
    out << kg1.entity_ids[a] << '\t' << kg2.entity_ids[b] << '\n';
  }
}

PairDataset LoadPair(const fs::path& dir) {
  PairDataset data;
  data.kg1 = LoadMmkg(dir / "kg1");
  data.kg2 = LoadMmkg(dir / "kg2");
  data.alignments =
      LoadAlignmentFile(dir / "alignments.tsv", data.kg1, data.kg2);
  return data;
}

void WritePair(const PairDataset& data, const fs::path& dir) {
  WriteMmkg(data.kg1, dir / "kg1");
  WriteMmkg(data.kg2, dir / "kg2");
  WriteAlignmentFile(data.alignments, data.kg1, data.kg2,
                     dir / "alignments.tsv");
}

}  // namespace mmalign

#ifndef MMALIGN_KG_H_
#define MMALIGN_KG_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mmalign/tensor.h"

namespace mmalign {

// Information channels of an entity, in canonical fusion order.
enum class Modality { kGraph = 0, kRelation, kAttribute, kVisual, kSurface };

inline constexpr Modality kAllModalities[] = {
    Modality::kGraph, Modality::kRelation, Modality::kAttribute,
    Modality::kVisual, Modality::kSurface};

char ModalityTag(Modality m);
Modality ParseModality(char tag);
// Parses a tag string such as "graves" -> {g, r, a, v, s}; output sorted in
// canonical order, duplicates rejected.
std::vector<Modality> ParseModalities(const std::string& tags);
std::string ModalityTags(const std::vector<Modality>& modalities);

struct RelTriple {
  int head = 0;      // entity index
  int relation = 0;  // index into Mmkg::relations
  int tail = 0;      // entity index
  auto operator<=>(const RelTriple&) const = default;
};

struct AttrAssignment {
  int entity = 0;
  int attribute = 0;  // index into Mmkg::attributes
  auto operator<=>(const AttrAssignment&) const = default;
};

// Partial map from entity index to a dense vector of fixed length.
struct DenseFeatures {
  int dim = 0;
  std::map<int, std::vector<Scalar>> rows;
  bool operator==(const DenseFeatures&) const = default;
};

// One knowledge graph. Entities are addressed by their position in
// `entity_ids`; file ids are only used at the I/O boundary.
struct Mmkg {
  std::vector<int64_t> entity_ids;
  std::vector<std::string> entity_names;
  std::vector<std::string> relations;
  std::vector<std::string> attributes;
  std::vector<RelTriple> triples;
  std::vector<AttrAssignment> attrs;
  DenseFeatures visual;
  DenseFeatures surface;

  int num_entities() const { return static_cast<int>(entity_ids.size()); }

  // Entity index for a file id, or -1.
  int IndexOf(int64_t id) const;
  // Rebuilds the id lookup; call after editing entity_ids by hand.
  void Reindex();
  // Interns a label, returning its index.
  int InternRelation(const std::string& label);
  int InternAttribute(const std::string& label);

  bool operator==(const Mmkg& other) const;

 private:
  std::unordered_map<int64_t, int> index_;
  std::unordered_map<std::string, int> relation_index_;
  std::unordered_map<std::string, int> attribute_index_;
};

// Two graphs plus reference alignments, as (KG1 index, KG2 index).
struct PairDataset {
  Mmkg kg1;
  Mmkg kg2;
  std::vector<std::pair<int, int>> alignments;
};

// Directory I/O. Layout:
//   entities.tsv     id \t name
//   rel_triples.tsv  head-id \t relation \t tail-id
//   attr.tsv         entity-id \t attribute
//   visual.tsv       entity-id \t f1 \t ... \t fd   (optional)
//   surface.tsv      entity-id \t f1 \t ... \t fd   (optional)
// A pair directory holds kg1/, kg2/ and alignments.tsv (id1 \t id2).
Mmkg LoadMmkg(const std::filesystem::path& dir);
void WriteMmkg(const Mmkg& kg, const std::filesystem::path& dir);
PairDataset LoadPair(const std::filesystem::path& dir);
void WritePair(const PairDataset& data, const std::filesystem::path& dir);

// Loads "id1 \t id2" rows and maps them to entity indices.
std::vector<std::pair<int, int>> LoadAlignmentFile(
    const std::filesystem::path& file, const Mmkg& kg1, const Mmkg& kg2);
void WriteAlignmentFile(const std::vector<std::pair<int, int>>& pairs,
                        const Mmkg& kg1, const Mmkg& kg2,
                        const std::filesystem::path& file);

}  // namespace mmalign

#endif  // MMALIGN_KG_H_

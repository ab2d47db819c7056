#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "relex/embeddings.hpp"

namespace relex {

inline constexpr int kMaxDistance = 30;  // |signed distance| clip

struct Span {
  int start = 0;  // token index, inclusive
  int end = 0;    // token index, exclusive
};

struct SentenceInstance {
  std::vector<std::string> tokens;       // raw surface tokens (inspection output)
  std::vector<std::size_t> token_ids;    // filled by index_tokens()
  std::vector<Span> e1_spans, e2_spans;  // >= 1 each
  std::vector<int> dist_e1, dist_e2;     // signed, clipped to [-30, 30]
  std::uint64_t uid = 0;                 // dropout stream id, assigned at load

  std::string text() const;
};

struct Bag {
  std::string pair_id;  // "e1_id|e2_id"
  std::string e1_id, e2_id;
  std::vector<std::string> e1_surfaces, e2_surfaces;  // unique forms, first seen order
  std::vector<SentenceInstance> sentences;
  std::vector<std::uint8_t> labels;  // bitset over the relation inventory

  bool positive() const;
};

struct DirectExample {
  SentenceInstance sentence;
  int label = 0;  // {0, 1}
  // Original relation names when the source kept them; used only by the
  // direct-as-singleton-bags baseline.
  std::vector<std::string> relations;
};

class RelationInventory {
 public:
  RelationInventory() = default;
  explicit RelationInventory(std::vector<std::string> names);

  std::size_t size() const { return names_.size(); }
  const std::string& name(std::size_t i) const { return names_[i]; }
  const std::vector<std::string>& names() const { return names_; }
  // -1 when unknown.
  int index_of(const std::string& name) const;

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::size_t> index_;
};

// ---- distant-supervision alignment ----------------------------------------

struct KbTuple {
  std::string e1, rel, e2;
};

struct MentionAnnotation {
  std::string entity_id;
  std::string surface;
  Span span;
};

struct AnnotatedSentence {
  std::vector<std::string> tokens;
  std::vector<MentionAnnotation> mentions;
};

// Signed distance of each token to the closest mention of the entity:
// 0 inside a span, negative left of it, positive right of it, clipped to
// [-max_dist, max_dist]. Ties between mentions go to the earlier one.
std::vector<int> position_features(std::size_t n_tokens, const std::vector<Span>& spans,
                                   int max_dist = kMaxDistance);

// Groups sentences by co-mentioned entity pair. A pair is oriented by KB
// membership: (a,b) if the KB has (a,r,b) tuples, (b,a) if it has (b,r,a);
// both orders when the KB has both; lexicographic order for negative pairs.
// Throws when a KB relation is missing from the inventory.
std::vector<Bag> build_bags(const std::vector<KbTuple>& kb,
                            const std::vector<AnnotatedSentence>& corpus,
                            const RelationInventory& inventory);

// Deterministic stratified split by positive/negative status. Throws when
// fewer than 2 bags or fraction outside (0,1).
std::pair<std::vector<Bag>, std::vector<Bag>> split_train_val(const std::vector<Bag>& bags,
                                                              double fraction,
                                                              std::uint64_t seed);

// Assigns token_ids under the vocabulary and fresh uids; distance features
// are expected to be present already.
void index_tokens(std::vector<Bag>& bags, const Vocabulary& vocab);
void index_tokens(std::vector<DirectExample>& examples, const Vocabulary& vocab,
                  std::uint64_t uid_offset = 1'000'000'000ULL);

// All sentence tokens of bags/examples, for vocabulary construction.
std::vector<std::string> collect_tokens(const std::vector<Bag>& bags);
std::vector<std::string> collect_tokens(const std::vector<DirectExample>& examples);

// ---- synthetic data --------------------------------------------------------

// Planted-signal generator: each relation has trigger tokens; a positive
// pair's bag carries at least one trigger sentence unless the bag is
// noise-corrupted (probability noise_rate).
struct SyntheticSpec {
  std::size_t n_relations = 5;
  std::size_t n_pairs = 1000;
  double positive_fraction = 0.2;
  std::size_t vocab_size = 100;  // content tokens, triggers included
  std::size_t triggers_per_relation = 1;
  double noise_rate = 0.0;  // rho: P(positive bag has no trigger sentence)
  std::size_t sent_len_min = 6, sent_len_max = 12;
  std::size_t sents_per_bag_min = 1, sents_per_bag_max = 4;
  std::size_t n_direct = 0;  // direct examples, half label 1 / half label 0
  std::size_t pair_id_offset = 0;
  std::uint64_t seed = 0;
};

struct SyntheticData {
  std::vector<KbTuple> kb;
  std::vector<AnnotatedSentence> corpus;
  std::vector<DirectExample> direct;
  RelationInventory inventory;
};

SyntheticData generate_synthetic(const SyntheticSpec& spec);

// ---- file formats (JSON lines, versioned header) ---------------------------

void save_bags(const std::string& path, const std::vector<Bag>& bags,
               const RelationInventory& inventory, const std::string& manifest_json = "");
std::pair<std::vector<Bag>, RelationInventory> load_bags(const std::string& path);

void save_direct(const std::string& path, const std::vector<DirectExample>& examples,
                 const std::string& manifest_json = "");
std::vector<DirectExample> load_direct(const std::string& path);

std::vector<KbTuple> load_kb(const std::string& path);                      // TSV e1 rel e2
std::vector<AnnotatedSentence> load_annotated_corpus(const std::string& path);  // JSONL

}  // namespace relex

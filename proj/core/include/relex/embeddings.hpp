#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "relex/tensor.hpp"

namespace relex {

// Pretrained word vectors: whitespace-separated text lines "word v1 ... vD".
class PretrainedVectors {
 public:
  PretrainedVectors() = default;
  explicit PretrainedVectors(std::size_t dim) : dim_(dim) {}

  static PretrainedVectors load(const std::string& path);

  void add(const std::string& word, Vec vec);
  const Vec* find(const std::string& word) const;
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return vectors_.size(); }

 private:
  std::size_t dim_ = 0;
  std::unordered_map<std::string, Vec> vectors_;
};

// Corpus vocabulary: words whose frequency is strictly greater than the
// threshold get an index; everything else shares one OOV index.
class Vocabulary {
 public:
  static constexpr const char* kOovToken = "<oov>";

  // Counts frequencies over all streams (tokens are lowercased first) and
  // keeps words with count > min_freq. Throws on empty corpora.
  static Vocabulary build(const std::vector<std::vector<std::string>>& corpora,
                          std::size_t min_freq);

  // Rebuild from an ordered word list whose slot 0 is the OOV token
  // (checkpoint restore).
  static Vocabulary from_words(std::vector<std::string> words, std::size_t min_freq);

  // Index 0 is reserved for OOV.
  std::size_t index_of(const std::string& word) const;  // lowercases internally
  const std::string& word_at(std::size_t index) const { return words_[index]; }
  std::size_t size() const { return words_.size(); }  // includes the OOV slot
  std::size_t oov_index() const { return 0; }
  std::size_t min_freq() const { return min_freq_; }

  void save(const std::string& path, std::size_t d_w, std::uint64_t seed) const;
  static Vocabulary load(const std::string& path);

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t min_freq_ = 0;
};

std::string lowercase(const std::string& s);

// Frozen word-embedding table, one row per vocabulary index.
class WordEmbeddingTable {
 public:
  // Resolves each vocabulary word against the pretrained source:
  //   - present: its pretrained row;
  //   - hyphenated and absent: mean of the hyphen-split subcomponents
  //     (absent subcomponents use the OOV row);
  //   - otherwise: the shared OOV row.
  // The OOV row is drawn once from N(0, 0.05) with the run seed.
  static WordEmbeddingTable build(const Vocabulary& vocab,
                                  const PretrainedVectors& pretrained,
                                  std::size_t d_w, std::uint64_t seed);

  // Random frozen table (synthetic-data runs with no pretrained source).
  static WordEmbeddingTable random(const Vocabulary& vocab, std::size_t d_w,
                                   std::uint64_t seed);

  // Rebuild from explicit rows (checkpoint restore). rows[0] is the OOV row.
  static WordEmbeddingTable from_rows(Vocabulary vocab, std::vector<Vec> rows);

  const Vec& row(std::size_t index) const { return rows_[index]; }
  std::size_t dim() const { return d_w_; }
  std::size_t size() const { return rows_.size(); }
  const Vocabulary& vocab() const { return vocab_; }

  // Vector for an arbitrary surface word under the OOV rules above. Total:
  // never fails.
  Vec lookup_word(const std::string& word, const PretrainedVectors& pretrained) const;

  // Mean over mention vectors, each mention the mean of its words' vectors.
  // Throws on an empty mention list.
  Vec entity_embedding(const std::vector<std::string>& mentions,
                       const PretrainedVectors& pretrained) const;

 private:
  std::size_t d_w_ = 0;
  std::vector<Vec> rows_;
  Vec oov_row_;
  Vocabulary vocab_;
};

}  // namespace relex

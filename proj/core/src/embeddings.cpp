#include "relex/embeddings.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "relex/rng.hpp"

namespace relex {

std::string lowercase(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

PretrainedVectors PretrainedVectors::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open pretrained vectors: " + path);
  PretrainedVectors pv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string word;
    ss >> word;
    Vec vec;
    double x;
    while (ss >> x) vec.push_back(x);
    if (vec.empty())
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": no vector values");
    if (pv.dim_ == 0) pv.dim_ = vec.size();
    if (vec.size() != pv.dim_)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": dimension mismatch");
    pv.vectors_[lowercase(word)] = std::move(vec);
  }
  return pv;
}

void PretrainedVectors::add(const std::string& word, Vec vec) {
  if (dim_ == 0) dim_ = vec.size();
  vectors_[lowercase(word)] = std::move(vec);
}

const Vec* PretrainedVectors::find(const std::string& word) const {
  auto it = vectors_.find(lowercase(word));
  return it == vectors_.end() ? nullptr : &it->second;
}

Vocabulary Vocabulary::build(const std::vector<std::vector<std::string>>& corpora,
                             std::size_t min_freq) {
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& stream : corpora)
    for (const auto& tok : stream) ++counts[lowercase(tok)];
  if (counts.empty()) throw std::invalid_argument("cannot build a vocabulary from empty corpora");

  Vocabulary v;
  v.min_freq_ = min_freq;
  v.words_.push_back(kOovToken);
  std::vector<std::string> kept;
  for (const auto& [word, count] : counts)
    if (count > min_freq) kept.push_back(word);
  std::sort(kept.begin(), kept.end());  // deterministic indexing
  for (auto& word : kept) {
    v.index_[word] = v.words_.size();
    v.words_.push_back(std::move(word));
  }
  return v;
}

Vocabulary Vocabulary::from_words(std::vector<std::string> words, std::size_t min_freq) {
  if (words.empty() || words[0] != kOovToken)
    throw std::invalid_argument("word list must start with the OOV token");
  Vocabulary v;
  v.min_freq_ = min_freq;
  v.words_ = std::move(words);
  for (std::size_t i = 1; i < v.words_.size(); ++i) v.index_[v.words_[i]] = i;
  return v;
}

std::size_t Vocabulary::index_of(const std::string& word) const {
  auto it = index_.find(lowercase(word));
  return it == index_.end() ? oov_index() : it->second;
}

void Vocabulary::save(const std::string& path, std::size_t d_w, std::uint64_t seed) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write vocabulary: " + path);
  out << "relex-vocab\t1\td_w=" << d_w << "\tmin_freq=" << min_freq_ << "\tseed=" << seed << "\n";
  for (std::size_t i = 1; i < words_.size(); ++i) out << words_[i] << "\t" << i << "\n";
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open vocabulary: " + path);
  std::string header;
  if (!std::getline(in, header) || header.rfind("relex-vocab\t1", 0) != 0)
    throw std::runtime_error("bad vocabulary header in " + path);
  Vocabulary v;
  auto pos = header.find("min_freq=");
  if (pos != std::string::npos) v.min_freq_ = std::stoul(header.substr(pos + 9));
  v.words_.push_back(kOovToken);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw std::runtime_error("bad vocabulary line: " + line);
    std::string word = line.substr(0, tab);
    std::size_t idx = std::stoul(line.substr(tab + 1));
    if (idx != v.words_.size())
      throw std::runtime_error("non-contiguous vocabulary index for " + word);
    v.index_[word] = idx;
    v.words_.push_back(std::move(word));
  }
  return v;
}

namespace {
Vec draw_oov_row(std::size_t d_w, std::uint64_t seed) {
  std::mt19937_64 rng(derive_seed(seed, "oov-row"));
  std::normal_distribution<double> normal(0.0, 0.05);
  Vec row(d_w);
  for (double& x : row) x = normal(rng);
  return row;
}

std::vector<std::string> split_hyphens(const std::string& word) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : word) {
    if (c == '-') {
      if (!cur.empty()) parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) parts.push_back(cur);
  return parts;
}

Vec resolve(const std::string& word, const PretrainedVectors& pretrained,
            const Vec& oov_row, std::size_t d_w) {
  if (const Vec* v = pretrained.find(word)) return *v;
  const auto parts = split_hyphens(word);
  if (parts.size() > 1) {
    Vec mean(d_w, 0.0);
    for (const auto& part : parts) {
      const Vec* pv = pretrained.find(part);
      const Vec& contrib = pv ? *pv : oov_row;
      for (std::size_t d = 0; d < d_w; ++d) mean[d] += contrib[d];
    }
    for (double& x : mean) x /= static_cast<double>(parts.size());
    return mean;
  }
  return oov_row;
}
}  // namespace

WordEmbeddingTable WordEmbeddingTable::build(const Vocabulary& vocab,
                                             const PretrainedVectors& pretrained,
                                             std::size_t d_w, std::uint64_t seed) {
  WordEmbeddingTable t;
  t.d_w_ = d_w;
  t.vocab_ = vocab;
  t.oov_row_ = draw_oov_row(d_w, seed);
  t.rows_.resize(vocab.size());
  t.rows_[vocab.oov_index()] = t.oov_row_;
  for (std::size_t i = 1; i < vocab.size(); ++i)
    t.rows_[i] = resolve(vocab.word_at(i), pretrained, t.oov_row_, d_w);
  return t;
}

WordEmbeddingTable WordEmbeddingTable::random(const Vocabulary& vocab, std::size_t d_w,
                                              std::uint64_t seed) {
  WordEmbeddingTable t;
  t.d_w_ = d_w;
  t.vocab_ = vocab;
  t.oov_row_ = draw_oov_row(d_w, seed);
  t.rows_.resize(vocab.size());
  t.rows_[vocab.oov_index()] = t.oov_row_;
  std::mt19937_64 rng(derive_seed(seed, "word-table"));
  std::normal_distribution<double> normal(0.0, 0.5);
  for (std::size_t i = 1; i < vocab.size(); ++i) {
    t.rows_[i].resize(d_w);
    for (double& x : t.rows_[i]) x = normal(rng);
  }
  return t;
}

WordEmbeddingTable WordEmbeddingTable::from_rows(Vocabulary vocab, std::vector<Vec> rows) {
  if (rows.size() != vocab.size())
    throw std::invalid_argument("embedding rows do not match the vocabulary size");
  WordEmbeddingTable t;
  t.d_w_ = rows.empty() ? 0 : rows[0].size();
  t.vocab_ = std::move(vocab);
  t.rows_ = std::move(rows);
  t.oov_row_ = t.rows_[t.vocab_.oov_index()];
  return t;
}

Vec WordEmbeddingTable::lookup_word(const std::string& word,
                                    const PretrainedVectors& pretrained) const {
  const std::size_t idx = vocab_.index_of(word);
  if (idx != vocab_.oov_index()) return rows_[idx];
  return resolve(lowercase(word), pretrained, oov_row_, d_w_);
}

Vec WordEmbeddingTable::entity_embedding(const std::vector<std::string>& mentions,
                                         const PretrainedVectors& pretrained) const {
  if (mentions.empty()) throw std::invalid_argument("entity with no mentions");
  Vec entity(d_w_, 0.0);
  for (const auto& mention : mentions) {
    std::istringstream ss(mention);
    std::string word;
    Vec mvec(d_w_, 0.0);
    std::size_t n_words = 0;
    while (ss >> word) {
      const Vec wv = lookup_word(word, pretrained);
      for (std::size_t d = 0; d < d_w_; ++d) mvec[d] += wv[d];
      ++n_words;
    }
    if (n_words == 0) throw std::invalid_argument("empty mention string");
    for (std::size_t d = 0; d < d_w_; ++d) entity[d] += mvec[d] / static_cast<double>(n_words);
  }
  for (double& x : entity) x /= static_cast<double>(mentions.size());
  return entity;
}

}  // namespace relex

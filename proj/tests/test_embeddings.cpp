#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "relex/embeddings.hpp"
#include "relex/rng.hpp"

using namespace relex;

namespace {

std::vector<std::string> tokens(const std::string& text) {
  std::istringstream ss(text);
  std::vector<std::string> out;
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

}  // namespace

TEST_CASE("vocabulary frequency rule: count must exceed the threshold") {
  const Vocabulary v = Vocabulary::build({tokens("a a a b b c")}, 2);
  CHECK(v.index_of("a") != v.oov_index());  // 3 > 2
  CHECK(v.index_of("b") == v.oov_index());  // 2 is not > 2
  CHECK(v.index_of("c") == v.oov_index());
}

TEST_CASE("vocabulary boundary: min_freq=0 keeps singletons") {
  const Vocabulary v = Vocabulary::build({tokens("x")}, 0);
  CHECK(v.index_of("x") != v.oov_index());
}

TEST_CASE("vocabulary rejects empty corpora") {
  CHECK_THROWS_AS(Vocabulary::build({}, 2), std::invalid_argument);
  CHECK_THROWS_AS(Vocabulary::build({{}}, 2), std::invalid_argument);
}

TEST_CASE("vocabulary membership matches an independent frequency recount") {
  // pseudo-corpus across three streams, checked against a single-pass counter
  std::vector<std::vector<std::string>> corpora = {
      tokens("the cat sat on the mat the end"),
      tokens("a cat and a dog and a bird"),
      tokens("the dog sat still")};
  const std::size_t min_freq = 2;
  const Vocabulary v = Vocabulary::build(corpora, min_freq);

  std::map<std::string, std::size_t> counter;
  for (const auto& stream : corpora)
    for (const auto& tok : stream) ++counter[lowercase(tok)];
  for (const auto& [word, count] : counter) {
    if (count > min_freq)
      CHECK(v.index_of(word) != v.oov_index());
    else
      CHECK(v.index_of(word) == v.oov_index());
  }
  // bijection over non-OOV entries
  std::map<std::size_t, std::string> seen;
  for (const auto& [word, count] : counter) {
    const std::size_t idx = v.index_of(word);
    if (idx == v.oov_index()) continue;
    CHECK(seen.emplace(idx, word).second);
    CHECK(v.word_at(idx) == word);
  }
}

TEST_CASE("vocabulary text round-trip") {
  const Vocabulary v = Vocabulary::build({tokens("alpha alpha beta beta gamma")}, 1);
  const std::string path = "vocab_roundtrip.txt";
  v.save(path, 300, 42);
  const Vocabulary loaded = Vocabulary::load(path);
  CHECK(loaded.size() == v.size());
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(loaded.word_at(i) == v.word_at(i));
  CHECK(loaded.min_freq() == v.min_freq());
  std::remove(path.c_str());
}

TEST_CASE("lookup: hyphenated word falls back to subcomponent mean") {
  PretrainedVectors pv(3);
  pv.add("five", {1, 2, 3});
  pv.add("star", {3, 4, 5});
  const Vocabulary v = Vocabulary::build({tokens("filler filler")}, 0);
  const WordEmbeddingTable t = WordEmbeddingTable::build(v, pv, 3, 7);

  const Vec got = t.lookup_word("five-star", pv);
  CHECK(got == Vec{2, 3, 4});
}

TEST_CASE("lookup: partially known hyphen compound uses the OOV row for gaps") {
  PretrainedVectors pv(3);
  pv.add("b", {3, 6, 9});
  const Vocabulary v = Vocabulary::build({tokens("filler filler")}, 0);
  const WordEmbeddingTable t = WordEmbeddingTable::build(v, pv, 3, 7);
  const Vec oov = t.lookup_word("zzz-unknown-word", pv);  // all parts OOV -> OOV mean = OOV row
  const Vec got = t.lookup_word("a-b-c", pv);
  const Vec expected = {(oov[0] + 3 + oov[0]) / 3.0, (oov[1] + 6 + oov[1]) / 3.0,
                        (oov[2] + 9 + oov[2]) / 3.0};
  for (int i = 0; i < 3; ++i) CHECK(got[static_cast<std::size_t>(i)] ==
                                    doctest::Approx(expected[static_cast<std::size_t>(i)]));
}

TEST_CASE("lookup: distinct unknown words share one OOV vector, bitwise") {
  PretrainedVectors pv(4);
  const Vocabulary v = Vocabulary::build({tokens("filler")}, 0);
  const WordEmbeddingTable t = WordEmbeddingTable::build(v, pv, 4, 99);
  CHECK(t.lookup_word("qwzx", pv) == t.lookup_word("mblk", pv));
}

TEST_CASE("OOV row is deterministic in the seed") {
  PretrainedVectors pv(4);
  const Vocabulary v = Vocabulary::build({tokens("filler")}, 0);
  const WordEmbeddingTable a = WordEmbeddingTable::build(v, pv, 4, 1234);
  const WordEmbeddingTable b = WordEmbeddingTable::build(v, pv, 4, 1234);
  CHECK(a.lookup_word("unknown", pv) == b.lookup_word("unknown", pv));
}

TEST_CASE("entity embedding: single one-word mention is the word vector") {
  PretrainedVectors pv(2);
  pv.add("brooklyn", {0.5, -1.0});
  const Vocabulary v = Vocabulary::build({tokens("brooklyn brooklyn")}, 0);
  const WordEmbeddingTable t = WordEmbeddingTable::build(v, pv, 2, 1);
  CHECK(t.entity_embedding({"Brooklyn"}, pv) == Vec{0.5, -1.0});
}

TEST_CASE("entity embedding: multi-word mention averages its words") {
  PretrainedVectors pv(2);
  pv.add("steve", {1, 0});
  pv.add("jobs", {0, 1});
  const Vocabulary v = Vocabulary::build({tokens("steve jobs")}, 0);
  const WordEmbeddingTable t = WordEmbeddingTable::build(v, pv, 2, 1);
  CHECK(t.entity_embedding({"Steve Jobs"}, pv) == Vec{0.5, 0.5});
}

TEST_CASE("entity embedding: multiple surface forms average per mention") {
  PretrainedVectors pv(2);
  pv.add("ny", {2, 2});
  pv.add("new", {0, 4});
  pv.add("york", {4, 0});
  const Vocabulary v = Vocabulary::build({tokens("ny new york")}, 0);
  const WordEmbeddingTable t = WordEmbeddingTable::build(v, pv, 2, 1);
  // mean(vec(NY), mean(vec(New), vec(York))) = mean((2,2), (2,2)) = (2,2)
  CHECK(t.entity_embedding({"NY", "New York"}, pv) == Vec{2, 2});
}

TEST_CASE("entity embedding is permutation-invariant in mention order") {
  PretrainedVectors pv(2);
  pv.add("aa", {1, 3});
  pv.add("bb", {5, -1});
  const Vocabulary v = Vocabulary::build({tokens("aa bb")}, 0);
  const WordEmbeddingTable t = WordEmbeddingTable::build(v, pv, 2, 1);
  CHECK(t.entity_embedding({"aa", "bb"}, pv) == t.entity_embedding({"bb", "aa"}, pv));
  // single-word, single-mention entity equals plain lookup
  CHECK(t.entity_embedding({"aa"}, pv) == t.lookup_word("aa", pv));
}

TEST_CASE("entity embedding rejects an empty mention list") {
  PretrainedVectors pv(2);
  const Vocabulary v = Vocabulary::build({tokens("x")}, 0);
  const WordEmbeddingTable t = WordEmbeddingTable::build(v, pv, 2, 1);
  CHECK_THROWS_AS(t.entity_embedding({}, pv), std::invalid_argument);
}

TEST_CASE("pretrained loader parses the text format") {
  const std::string path = "tiny_vectors.txt";
  {
    std::ofstream out(path);
    out << "apple 1.0 2.0\nBanana -0.5 0.25\n";
  }
  const PretrainedVectors pv = PretrainedVectors::load(path);
  CHECK(pv.dim() == 2);
  CHECK(*pv.find("apple") == Vec{1.0, 2.0});
  CHECK(*pv.find("banana") == Vec{-0.5, 0.25});  // lowercased
  CHECK(pv.find("cherry") == nullptr);
  std::remove(path.c_str());
}

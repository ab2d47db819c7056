#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <random>
#include <set>

#include "relex/dataset.hpp"

using namespace relex;

TEST_CASE("position features: in-span tokens are 0, signs follow position") {
  // tokens 0..5, entity span [2,4)
  const std::vector<int> d = position_features(6, {{2, 4}});
  CHECK(d == std::vector<int>{-2, -1, 0, 0, 1, 2});
}

TEST_CASE("position features clip at +-30") {
  std::vector<Span> spans = {{0, 1}};
  const std::vector<int> d = position_features(46, spans);
  CHECK(d[45] == 30);  // 45 positions right of the mention
  const std::vector<int> far_left = position_features(50, {{49, 50}});
  CHECK(far_left[0] == -30);
}

TEST_CASE("position features pick the closest mention, tie to the earlier one") {
  // mentions at 2 and 10, token at 7: distances +5 and -3
  const std::vector<int> d = position_features(12, {{2, 3}, {10, 11}});
  CHECK(d[7] == -3);
  // token 6 is equidistant (+4 / -4): earlier mention wins
  CHECK(d[6] == 4);
}

TEST_CASE("position features are 0 exactly on in-span tokens") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 5 + rng() % 60;
    const int a = static_cast<int>(rng() % (n - 1));
    const int b = a + 1 + static_cast<int>(rng() % (n - static_cast<std::size_t>(a)));
    const std::vector<int> d = position_features(n, {{a, b}});
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(std::abs(d[i]) <= 30);
      const bool in_span = static_cast<int>(i) >= a && static_cast<int>(i) < b;
      CHECK((d[i] == 0) == in_span);
    }
  }
}

namespace {

AnnotatedSentence sent_with(const std::vector<std::string>& tokens,
                            const std::vector<MentionAnnotation>& mentions) {
  return {tokens, mentions};
}

}  // namespace

TEST_CASE("build_bags groups co-mentioned pairs and sets KB bits") {
  const RelationInventory inv({"founder_of", "ceo_of"});
  const std::vector<KbTuple> kb = {{"A", "founder_of", "B"}};
  const std::vector<AnnotatedSentence> corpus = {
      sent_with({"A", "made", "B"}, {{"A", "A", {0, 1}}, {"B", "B", {2, 3}}}),
      sent_with({"B", "by", "A"}, {{"A", "A", {2, 3}}, {"B", "B", {0, 1}}}),
  };
  const std::vector<Bag> bags = build_bags(kb, corpus, inv);
  REQUIRE(bags.size() == 1);
  CHECK(bags[0].e1_id == "A");
  CHECK(bags[0].e2_id == "B");
  CHECK(bags[0].sentences.size() == 2);
  CHECK(bags[0].labels == std::vector<std::uint8_t>{1, 0});
  CHECK(bags[0].positive());
}

TEST_CASE("build_bags: a pair with two KB relations gets two set bits") {
  const RelationInventory inv({"founder_of", "ceo_of"});
  const std::vector<KbTuple> kb = {{"A", "founder_of", "B"}, {"A", "ceo_of", "B"}};
  const std::vector<AnnotatedSentence> corpus = {
      sent_with({"A", "runs", "B"}, {{"A", "A", {0, 1}}, {"B", "B", {2, 3}}})};
  const std::vector<Bag> bags = build_bags(kb, corpus, inv);
  REQUIRE(bags.size() == 1);
  CHECK(bags[0].labels == std::vector<std::uint8_t>{1, 1});
}

TEST_CASE("build_bags: pairs absent from the KB become negative bags") {
  const RelationInventory inv({"r"});
  const std::vector<AnnotatedSentence> corpus = {
      sent_with({"X", "and", "Y"}, {{"X", "X", {0, 1}}, {"Y", "Y", {2, 3}}})};
  const std::vector<Bag> bags = build_bags({}, corpus, inv);
  REQUIRE(bags.size() == 1);
  CHECK_FALSE(bags[0].positive());
}

TEST_CASE("build_bags rejects a KB relation missing from the inventory") {
  const RelationInventory inv({"known"});
  CHECK_THROWS_WITH_AS(build_bags({{"A", "mystery", "B"}}, {}, inv),
                       doctest::Contains("mystery"), std::invalid_argument);
}

TEST_CASE("build_bags matches a brute-force pair enumeration oracle") {
  std::mt19937_64 rng(77);
  // random toy KB and corpus over 8 entities
  std::vector<std::string> entities;
  for (int i = 0; i < 8; ++i) entities.push_back("E" + std::to_string(i));
  const RelationInventory inv({"r0", "r1", "r2"});
  std::vector<KbTuple> kb;
  for (int i = 0; i < 6; ++i) {
    const auto a = entities[rng() % entities.size()];
    auto b = entities[rng() % entities.size()];
    if (a == b) continue;
    kb.push_back({a, "r" + std::to_string(rng() % 3), b});
  }
  std::vector<AnnotatedSentence> corpus;
  for (int s = 0; s < 40; ++s) {
    const auto a = entities[rng() % entities.size()];
    auto b = entities[rng() % entities.size()];
    if (a == b) continue;
    corpus.push_back(sent_with({a, "w", b, "w", "w"}, {{a, a, {0, 1}}, {b, b, {2, 3}}}));
  }

  const std::vector<Bag> bags = build_bags(kb, corpus, inv);

  // oracle: enumerate oriented pairs independently
  std::set<std::pair<std::string, std::string>> kb_pairs;
  for (const auto& t : kb) kb_pairs.insert({t.e1, t.e2});
  std::set<std::pair<std::string, std::string>> expected;
  std::map<std::pair<std::string, std::string>, std::size_t> expected_sents;
  for (const auto& sent : corpus) {
    std::set<std::string> ids;
    for (const auto& m : sent.mentions) ids.insert(m.entity_id);
    for (const auto& a : ids)
      for (const auto& b : ids) {
        if (a >= b) continue;
        std::vector<std::pair<std::string, std::string>> oriented;
        if (kb_pairs.count({a, b})) oriented.push_back({a, b});
        if (kb_pairs.count({b, a})) oriented.push_back({b, a});
        if (oriented.empty()) oriented.push_back({a, b});
        for (const auto& pr : oriented) {
          expected.insert(pr);
          ++expected_sents[pr];
        }
      }
  }
  CHECK(bags.size() == expected.size());
  for (const Bag& bag : bags) {
    const auto key = std::make_pair(bag.e1_id, bag.e2_id);
    CHECK(expected.count(key) == 1);
    CHECK(bag.sentences.size() == expected_sents[key]);
    // label bits correspond to KB tuples for this pair and nothing else
    for (std::size_t r = 0; r < inv.size(); ++r) {
      const bool in_kb = std::any_of(kb.begin(), kb.end(), [&](const KbTuple& t) {
        return t.e1 == bag.e1_id && t.e2 == bag.e2_id && inv.index_of(t.rel) == static_cast<int>(r);
      });
      CHECK(static_cast<bool>(bag.labels[r]) == in_kb);
    }
  }
}

TEST_CASE("build_bags is order-insensitive up to bag content") {
  const RelationInventory inv({"r"});
  const std::vector<KbTuple> kb = {{"A", "r", "B"}};
  std::vector<AnnotatedSentence> corpus = {
      sent_with({"A", "x", "B"}, {{"A", "A", {0, 1}}, {"B", "B", {2, 3}}}),
      sent_with({"C", "y", "D"}, {{"C", "C", {0, 1}}, {"D", "D", {2, 3}}}),
      sent_with({"B", "z", "A"}, {{"A", "A", {2, 3}}, {"B", "B", {0, 1}}}),
  };
  const std::vector<Bag> forward = build_bags(kb, corpus, inv);
  std::reverse(corpus.begin(), corpus.end());
  std::vector<Bag> reversed = build_bags(kb, corpus, inv);

  auto key = [](const Bag& b) { return b.pair_id; };
  std::map<std::string, const Bag*> by_id;
  for (const Bag& b : reversed) by_id[key(b)] = &b;
  CHECK(forward.size() == reversed.size());
  for (const Bag& b : forward) {
    REQUIRE(by_id.count(key(b)));
    const Bag& other = *by_id[key(b)];
    CHECK(b.labels == other.labels);
    std::multiset<std::string> lhs, rhs;
    for (const auto& s : b.sentences) lhs.insert(s.text());
    for (const auto& s : other.sentences) rhs.insert(s.text());
    CHECK(lhs == rhs);
  }
}

namespace {
std::vector<Bag> toy_bags(std::size_t n_pos, std::size_t n_neg) {
  std::vector<Bag> bags;
  for (std::size_t i = 0; i < n_pos + n_neg; ++i) {
    Bag b;
    b.pair_id = "p" + std::to_string(i);
    b.e1_id = "a";
    b.e2_id = "b";
    b.labels = {i < n_pos ? std::uint8_t{1} : std::uint8_t{0}};
    b.sentences.emplace_back();
    b.sentences.back().tokens = {"t"};
    bags.push_back(std::move(b));
  }
  return bags;
}
}  // namespace

TEST_CASE("split: 10 bags at 0.9 gives 9/1") {
  const auto [train, val] = split_train_val(toy_bags(5, 5), 0.9, 42);
  CHECK(train.size() == 9);
  CHECK(val.size() == 1);
}

TEST_CASE("split is deterministic and stratified") {
  const std::vector<Bag> bags = toy_bags(20, 180);
  const auto [t1, v1] = split_train_val(bags, 0.9, 7);
  const auto [t2, v2] = split_train_val(bags, 0.9, 7);
  REQUIRE(t1.size() == t2.size());
  for (std::size_t i = 0; i < t1.size(); ++i) CHECK(t1[i].pair_id == t2[i].pair_id);

  const auto count_pos = [](const std::vector<Bag>& bs) {
    return std::count_if(bs.begin(), bs.end(), [](const Bag& b) { return b.positive(); });
  };
  CHECK(count_pos(t1) == 18);  // ~90% of each stream
  CHECK(count_pos(v1) == 2);
  CHECK(t1.size() + v1.size() == bags.size());

  // disjoint partition
  std::set<std::string> train_ids;
  for (const Bag& b : t1) train_ids.insert(b.pair_id);
  for (const Bag& b : v1) CHECK(train_ids.count(b.pair_id) == 0);
}

TEST_CASE("split rejects degenerate inputs") {
  CHECK_THROWS_AS(split_train_val(toy_bags(1, 0), 0.9, 0), std::invalid_argument);
  CHECK_THROWS_AS(split_train_val(toy_bags(2, 2), 1.5, 0), std::invalid_argument);
}

TEST_CASE("synthetic: rho=0 plants a trigger in every positive bag") {
  SyntheticSpec spec;
  spec.n_pairs = 50;
  spec.noise_rate = 0.0;
  spec.seed = 5;
  const SyntheticData data = generate_synthetic(spec);
  const std::vector<Bag> bags = build_bags(data.kb, data.corpus, data.inventory);

  std::size_t positives = 0;
  for (const Bag& bag : bags) {
    if (!bag.positive()) continue;
    ++positives;
    bool has_trigger = false;
    for (const auto& s : bag.sentences)
      for (const auto& tok : s.tokens)
        if (tok.rfind("trig", 0) == 0) has_trigger = true;
    CHECK(has_trigger);
  }
  CHECK(positives == 10);  // 20% of 50
}

TEST_CASE("synthetic: rho=1 removes all triggers from positive bags") {
  SyntheticSpec spec;
  spec.n_pairs = 50;
  spec.noise_rate = 1.0;
  spec.seed = 5;
  const SyntheticData data = generate_synthetic(spec);
  for (const auto& sent : data.corpus)
    for (const auto& tok : sent.tokens) CHECK(tok.rfind("trig", 0) != 0);
}

TEST_CASE("synthetic: rho=0.5 corrupts about half the positive bags") {
  SyntheticSpec spec;
  spec.n_pairs = 1000;  // 200 positive
  spec.noise_rate = 0.5;
  spec.seed = 11;
  const SyntheticData data = generate_synthetic(spec);
  const std::vector<Bag> bags = build_bags(data.kb, data.corpus, data.inventory);
  std::size_t corrupted = 0, positives = 0;
  for (const Bag& bag : bags) {
    if (!bag.positive()) continue;
    ++positives;
    bool has_trigger = false;
    for (const auto& s : bag.sentences)
      for (const auto& tok : s.tokens)
        if (tok.rfind("trig", 0) == 0) has_trigger = true;
    if (!has_trigger) ++corrupted;
  }
  CHECK(positives == 200);
  CHECK(corrupted > 60);   // 100 +- binomial noise
  CHECK(corrupted < 140);
}

TEST_CASE("synthetic rejects inconsistent specs") {
  SyntheticSpec spec;
  spec.vocab_size = 4;
  spec.n_relations = 5;  // 5 triggers cannot fit
  CHECK_THROWS_AS(generate_synthetic(spec), std::invalid_argument);
  SyntheticSpec bad_rho;
  bad_rho.noise_rate = 1.5;
  CHECK_THROWS_AS(generate_synthetic(bad_rho), std::invalid_argument);
}

TEST_CASE("direct examples: counts and serialization round-trip") {
  SyntheticSpec spec;
  spec.n_pairs = 10;
  spec.n_direct = 10;
  spec.seed = 3;
  const SyntheticData data = generate_synthetic(spec);
  REQUIRE(data.direct.size() == 10);
  int ones = 0;
  for (const auto& ex : data.direct) ones += ex.label;
  CHECK(ones == 5);

  const std::string path = "direct_roundtrip.jsonl";
  save_direct(path, data.direct);
  const std::vector<DirectExample> loaded = load_direct(path);
  REQUIRE(loaded.size() == data.direct.size());
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    CHECK(loaded[i].label == data.direct[i].label);
    CHECK(loaded[i].sentence.tokens == data.direct[i].sentence.tokens);
    CHECK(loaded[i].sentence.dist_e1 == data.direct[i].sentence.dist_e1);
    CHECK(loaded[i].relations == data.direct[i].relations);
  }
  std::remove(path.c_str());
}

TEST_CASE("direct loader reports the failing line number") {
  const std::string path = "direct_bad.jsonl";
  {
    std::ofstream out(path);
    out << R"({"format":"relex-direct","version":1})" << "\n";
    out << R"({"tokens":["a","b"],"e1":[[0,1]],"e2":[[1,2]],"label":1})" << "\n";
    out << "not json\n";
  }
  CHECK_THROWS_WITH_AS(load_direct(path), doctest::Contains(":3"), std::runtime_error);
  std::remove(path.c_str());
}

TEST_CASE("bag file round-trip preserves content") {
  SyntheticSpec spec;
  spec.n_pairs = 20;
  spec.seed = 9;
  const SyntheticData data = generate_synthetic(spec);
  const std::vector<Bag> bags = build_bags(data.kb, data.corpus, data.inventory);

  const std::string path = "bags_roundtrip.jsonl";
  save_bags(path, bags, data.inventory);
  const auto [loaded, inv] = load_bags(path);
  REQUIRE(loaded.size() == bags.size());
  CHECK(inv.names() == data.inventory.names());
  for (std::size_t i = 0; i < bags.size(); ++i) {
    CHECK(loaded[i].pair_id == bags[i].pair_id);
    CHECK(loaded[i].labels == bags[i].labels);
    REQUIRE(loaded[i].sentences.size() == bags[i].sentences.size());
    for (std::size_t j = 0; j < bags[i].sentences.size(); ++j) {
      CHECK(loaded[i].sentences[j].tokens == bags[i].sentences[j].tokens);
      CHECK(loaded[i].sentences[j].dist_e1 == bags[i].sentences[j].dist_e1);
      CHECK(loaded[i].sentences[j].dist_e2 == bags[i].sentences[j].dist_e2);
    }
  }
  std::remove(path.c_str());
}

TEST_CASE("bag loader rejects a wrong schema version") {
  const std::string path = "bags_badver.jsonl";
  {
    std::ofstream out(path);
    out << R"({"format":"relex-bags","version":2,"relations":[]})" << "\n";
  }
  CHECK_THROWS_AS(load_bags(path), std::runtime_error);
  std::remove(path.c_str());
}

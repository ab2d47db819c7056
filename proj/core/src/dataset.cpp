#include "relex/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "relex/rng.hpp"

namespace relex {

using nlohmann::json;

std::string SentenceInstance::text() const {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

bool Bag::positive() const {
  return std::any_of(labels.begin(), labels.end(), [](std::uint8_t b) { return b != 0; });
}

RelationInventory::RelationInventory(std::vector<std::string> names) : names_(std::move(names)) {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (!index_.emplace(names_[i], i).second)
      throw std::invalid_argument("duplicate relation name: " + names_[i]);
  }
}

int RelationInventory::index_of(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? -1 : static_cast<int>(it->second);
}

std::vector<int> position_features(std::size_t n_tokens, const std::vector<Span>& spans,
                                   int max_dist) {
  if (spans.empty()) throw std::invalid_argument("entity with no spans");
  std::vector<int> out(n_tokens, 0);
  for (std::size_t i = 0; i < n_tokens; ++i) {
    const int ti = static_cast<int>(i);
    int best = 0;
    bool first = true;
    for (const Span& sp : spans) {
      int d;
      if (ti < sp.start)
        d = ti - sp.start;
      else if (ti >= sp.end)
        d = ti - (sp.end - 1);
      else
        d = 0;
      if (first || std::abs(d) < std::abs(best)) {  // tie keeps the earlier mention
        best = d;
        first = false;
      }
    }
    out[i] = std::clamp(best, -max_dist, max_dist);
  }
  return out;
}

namespace {

SentenceInstance make_instance(const AnnotatedSentence& sent, const std::vector<Span>& e1_spans,
                               const std::vector<Span>& e2_spans) {
  SentenceInstance inst;
  inst.tokens = sent.tokens;
  inst.e1_spans = e1_spans;
  inst.e2_spans = e2_spans;
  inst.dist_e1 = position_features(inst.tokens.size(), e1_spans);
  inst.dist_e2 = position_features(inst.tokens.size(), e2_spans);
  return inst;
}

void add_unique(std::vector<std::string>& list, const std::string& s) {
  if (std::find(list.begin(), list.end(), s) == list.end()) list.push_back(s);
}

}  // namespace

std::vector<Bag> build_bags(const std::vector<KbTuple>& kb,
                            const std::vector<AnnotatedSentence>& corpus,
                            const RelationInventory& inventory) {
  // pair key -> relation bits
  std::map<std::pair<std::string, std::string>, std::vector<std::uint8_t>> kb_index;
  for (const KbTuple& t : kb) {
    const int r = inventory.index_of(t.rel);
    if (r < 0) throw std::invalid_argument("KB relation not in inventory: " + t.rel);
    auto& bits = kb_index[{t.e1, t.e2}];
    bits.resize(inventory.size(), 0);
    bits[static_cast<std::size_t>(r)] = 1;
  }

  std::map<std::pair<std::string, std::string>, std::size_t> bag_index;
  std::vector<Bag> bags;

  auto bag_for = [&](const std::string& a, const std::string& b) -> Bag& {
    auto key = std::make_pair(a, b);
    auto it = bag_index.find(key);
    if (it == bag_index.end()) {
      it = bag_index.emplace(key, bags.size()).first;
      Bag bag;
      bag.e1_id = a;
      bag.e2_id = b;
      bag.pair_id = a + "|" + b;
      bag.labels.assign(inventory.size(), 0);
      if (auto kit = kb_index.find(key); kit != kb_index.end()) bag.labels = kit->second;
      bags.push_back(std::move(bag));
    }
    return bags[it->second];
  };

  for (const AnnotatedSentence& sent : corpus) {
    // entity id -> spans and surfaces within this sentence
    std::map<std::string, std::vector<Span>> spans;
    std::map<std::string, std::vector<std::string>> surfaces;
    for (const MentionAnnotation& m : sent.mentions) {
      if (m.span.start < 0 || m.span.end > static_cast<int>(sent.tokens.size()) ||
          m.span.start >= m.span.end)
        throw std::invalid_argument("mention span out of range for entity " + m.entity_id);
      spans[m.entity_id].push_back(m.span);
      surfaces[m.entity_id].push_back(m.surface);
    }
    for (auto ia = spans.begin(); ia != spans.end(); ++ia) {
      for (auto ib = std::next(ia); ib != spans.end(); ++ib) {
        const std::string& a = ia->first;
        const std::string& b = ib->first;
        const bool kb_ab = kb_index.count({a, b}) > 0;
        const bool kb_ba = kb_index.count({b, a}) > 0;
        std::vector<std::pair<std::string, std::string>> orientations;
        if (kb_ab) orientations.emplace_back(a, b);
        if (kb_ba) orientations.emplace_back(b, a);
        if (orientations.empty()) orientations.emplace_back(std::min(a, b), std::max(a, b));
        for (const auto& [e1, e2] : orientations) {
          Bag& bag = bag_for(e1, e2);
          bag.sentences.push_back(make_instance(sent, spans[e1], spans[e2]));
          for (const auto& s : surfaces[e1]) add_unique(bag.e1_surfaces, s);
          for (const auto& s : surfaces[e2]) add_unique(bag.e2_surfaces, s);
        }
      }
    }
  }
  return bags;
}

std::pair<std::vector<Bag>, std::vector<Bag>> split_train_val(const std::vector<Bag>& bags,
                                                              double fraction,
                                                              std::uint64_t seed) {
  if (bags.size() < 2) throw std::invalid_argument("need at least 2 bags to split");
  if (fraction <= 0.0 || fraction >= 1.0)
    throw std::invalid_argument("split fraction must be in (0,1)");

  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < bags.size(); ++i)
    (bags[i].positive() ? pos : neg).push_back(i);

  // Per-stratum counts that keep the overall train size at round(f * N).
  const auto total_train =
      static_cast<std::size_t>(std::llround(fraction * static_cast<double>(bags.size())));
  auto pos_train = std::min(
      pos.size(), static_cast<std::size_t>(std::llround(fraction * static_cast<double>(pos.size()))));
  if (total_train > pos_train + neg.size()) pos_train = total_train - neg.size();
  const std::size_t neg_train = std::min(neg.size(), total_train - pos_train);

  std::vector<std::size_t> train_idx, val_idx;
  auto split_stratum = [&](std::vector<std::size_t>& idx, std::size_t n_train, std::uint64_t tag) {
    std::mt19937_64 rng(derive_seed(seed, "split", tag));
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t i = 0; i < idx.size(); ++i)
      (i < n_train ? train_idx : val_idx).push_back(idx[i]);
  };
  split_stratum(pos, pos_train, 0);
  split_stratum(neg, neg_train, 1);
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(val_idx.begin(), val_idx.end());

  std::pair<std::vector<Bag>, std::vector<Bag>> out;
  for (std::size_t i : train_idx) out.first.push_back(bags[i]);
  for (std::size_t i : val_idx) out.second.push_back(bags[i]);
  return out;
}

void index_tokens(std::vector<Bag>& bags, const Vocabulary& vocab) {
  std::uint64_t uid = 1;
  for (Bag& bag : bags) {
    for (SentenceInstance& s : bag.sentences) {
      s.uid = uid++;
      s.token_ids.resize(s.tokens.size());
      for (std::size_t i = 0; i < s.tokens.size(); ++i)
        s.token_ids[i] = vocab.index_of(s.tokens[i]);
    }
  }
}

void index_tokens(std::vector<DirectExample>& examples, const Vocabulary& vocab,
                  std::uint64_t uid_offset) {
  std::uint64_t uid = uid_offset;
  for (DirectExample& ex : examples) {
    ex.sentence.uid = uid++;
    ex.sentence.token_ids.resize(ex.sentence.tokens.size());
    for (std::size_t i = 0; i < ex.sentence.tokens.size(); ++i)
      ex.sentence.token_ids[i] = vocab.index_of(ex.sentence.tokens[i]);
  }
}

std::vector<std::string> collect_tokens(const std::vector<Bag>& bags) {
  std::vector<std::string> out;
  for (const Bag& bag : bags)
    for (const SentenceInstance& s : bag.sentences)
      out.insert(out.end(), s.tokens.begin(), s.tokens.end());
  return out;
}

std::vector<std::string> collect_tokens(const std::vector<DirectExample>& examples) {
  std::vector<std::string> out;
  for (const DirectExample& ex : examples)
    out.insert(out.end(), ex.sentence.tokens.begin(), ex.sentence.tokens.end());
  return out;
}

// ---- synthetic data ---------------------------------------------------------

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  if (spec.noise_rate < 0.0 || spec.noise_rate > 1.0)
    throw std::invalid_argument("noise_rate must be in [0,1]");
  const std::size_t n_triggers = spec.n_relations * spec.triggers_per_relation;
  if (n_triggers >= spec.vocab_size)
    throw std::invalid_argument("trigger tokens exceed the vocabulary size");
  if (spec.sent_len_min < 3 || spec.sent_len_max < spec.sent_len_min)
    throw std::invalid_argument("bad sentence-length range (need min >= 3)");
  if (spec.n_relations == 0 || spec.n_pairs == 0)
    throw std::invalid_argument("need at least one relation and one pair");

  SyntheticData data;
  std::vector<std::string> rel_names;
  for (std::size_t r = 0; r < spec.n_relations; ++r)
    rel_names.push_back("rel_" + std::to_string(r));
  data.inventory = RelationInventory(rel_names);

  std::vector<std::vector<std::string>> triggers(spec.n_relations);
  for (std::size_t r = 0; r < spec.n_relations; ++r)
    for (std::size_t k = 0; k < spec.triggers_per_relation; ++k)
      triggers[r].push_back("trig" + std::to_string(r) +
                            (k ? "_" + std::to_string(k) : std::string()));
  std::vector<std::string> fillers;
  for (std::size_t j = 0; j < spec.vocab_size - n_triggers; ++j)
    fillers.push_back("w" + std::to_string(j));

  std::mt19937_64 rng(derive_seed(spec.seed, "synthetic", spec.pair_id_offset));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto rand_int = [&](std::size_t lo, std::size_t hi) {  // inclusive
    return lo + static_cast<std::size_t>(rng() % (hi - lo + 1));
  };

  auto make_sentence = [&](const std::string& ea, const std::string& eb,
                           const std::string* trigger) {
    AnnotatedSentence sent;
    const std::size_t len = rand_int(spec.sent_len_min, spec.sent_len_max);
    sent.tokens.resize(len);
    for (auto& tok : sent.tokens) tok = fillers[rng() % fillers.size()];
    std::size_t pa = rng() % len;
    std::size_t pb = rng() % len;
    while (pb == pa) pb = rng() % len;
    sent.tokens[pa] = ea;
    sent.tokens[pb] = eb;
    if (trigger) {
      std::size_t pt = rng() % len;
      while (pt == pa || pt == pb) pt = rng() % len;
      sent.tokens[pt] = *trigger;
    }
    sent.mentions.push_back({ea, ea, {static_cast<int>(pa), static_cast<int>(pa) + 1}});
    sent.mentions.push_back({eb, eb, {static_cast<int>(pb), static_cast<int>(pb) + 1}});
    return sent;
  };

  const auto n_pos = static_cast<std::size_t>(
      std::llround(spec.positive_fraction * static_cast<double>(spec.n_pairs)));
  for (std::size_t i = 0; i < spec.n_pairs; ++i) {
    const std::size_t gid = spec.pair_id_offset + i;
    const std::string ea = "entA" + std::to_string(gid);
    const std::string eb = "entB" + std::to_string(gid);
    const bool positive = i < n_pos;
    const std::size_t rel = i % spec.n_relations;
    if (positive) data.kb.push_back({ea, rel_names[rel], eb});
    const bool corrupted = positive && unif(rng) < spec.noise_rate;
    const std::size_t n_sents = rand_int(spec.sents_per_bag_min, spec.sents_per_bag_max);
    for (std::size_t j = 0; j < n_sents; ++j) {
      const std::string* trig = nullptr;
      if (positive && !corrupted && (j == 0 || unif(rng) < 0.5))
        trig = &triggers[rel][rng() % triggers[rel].size()];
      data.corpus.push_back(make_sentence(ea, eb, trig));
    }
  }

  for (std::size_t i = 0; i < spec.n_direct; ++i) {
    const std::size_t gid = spec.pair_id_offset + i;
    const std::string ea = "dirA" + std::to_string(gid);
    const std::string eb = "dirB" + std::to_string(gid);
    const int label = i % 2 == 0 ? 1 : 0;
    const std::size_t rel = rng() % spec.n_relations;
    const std::string* trig = label ? &triggers[rel][0] : nullptr;
    AnnotatedSentence sent = make_sentence(ea, eb, trig);
    DirectExample ex;
    ex.label = label;
    if (label) ex.relations.push_back(rel_names[rel]);
    ex.sentence = make_instance(sent, {sent.mentions[0].span}, {sent.mentions[1].span});
    data.direct.push_back(std::move(ex));
  }
  return data;
}

// ---- file formats ------------------------------------------------------------

namespace {

json span_list_json(const std::vector<Span>& spans) {
  json arr = json::array();
  for (const Span& s : spans) arr.push_back({s.start, s.end});
  return arr;
}

std::vector<Span> parse_spans(const json& arr) {
  std::vector<Span> out;
  for (const auto& s : arr) out.push_back({s.at(0).get<int>(), s.at(1).get<int>()});
  return out;
}

json header_with_manifest(json header, const std::string& manifest_json) {
  if (!manifest_json.empty()) header["manifest"] = json::parse(manifest_json);
  return header;
}

}  // namespace

void save_bags(const std::string& path, const std::vector<Bag>& bags,
               const RelationInventory& inventory, const std::string& manifest_json) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write bag file: " + path);
  json header = {{"format", "relex-bags"}, {"version", 1}, {"relations", inventory.names()}};
  out << header_with_manifest(header, manifest_json).dump() << "\n";
  for (const Bag& bag : bags) {
    json labels = json::array();
    for (std::size_t r = 0; r < bag.labels.size(); ++r)
      if (bag.labels[r]) labels.push_back(inventory.name(r));
    json sents = json::array();
    for (const SentenceInstance& s : bag.sentences)
      sents.push_back({{"tokens", s.tokens},
                       {"e1", span_list_json(s.e1_spans)},
                       {"e2", span_list_json(s.e2_spans)}});
    json rec = {{"pair", bag.pair_id},    {"e1", bag.e1_id},
                {"e2", bag.e2_id},        {"e1_surfaces", bag.e1_surfaces},
                {"e2_surfaces", bag.e2_surfaces}, {"labels", labels},
                {"sentences", sents}};
    out << rec.dump() << "\n";
  }
}

std::pair<std::vector<Bag>, RelationInventory> load_bags(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open bag file: " + path);
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& msg) -> std::runtime_error {
    return std::runtime_error(path + ":" + std::to_string(lineno) + ": " + msg);
  };
  if (!std::getline(in, line)) throw fail("empty bag file");
  ++lineno;
  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception& e) {
    throw fail(std::string("bad header: ") + e.what());
  }
  if (header.value("format", "") != "relex-bags" || header.value("version", 0) != 1)
    throw fail("unsupported bag file format/version");
  RelationInventory inventory(header.at("relations").get<std::vector<std::string>>());

  std::vector<Bag> bags;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      json rec = json::parse(line);
      Bag bag;
      bag.pair_id = rec.at("pair").get<std::string>();
      bag.e1_id = rec.at("e1").get<std::string>();
      bag.e2_id = rec.at("e2").get<std::string>();
      bag.e1_surfaces = rec.at("e1_surfaces").get<std::vector<std::string>>();
      bag.e2_surfaces = rec.at("e2_surfaces").get<std::vector<std::string>>();
      bag.labels.assign(inventory.size(), 0);
      for (const auto& name : rec.at("labels")) {
        const int r = inventory.index_of(name.get<std::string>());
        if (r < 0) throw std::runtime_error("unknown relation " + name.get<std::string>());
        bag.labels[static_cast<std::size_t>(r)] = 1;
      }
      for (const auto& sj : rec.at("sentences")) {
        SentenceInstance s;
        s.tokens = sj.at("tokens").get<std::vector<std::string>>();
        s.e1_spans = parse_spans(sj.at("e1"));
        s.e2_spans = parse_spans(sj.at("e2"));
        s.dist_e1 = position_features(s.tokens.size(), s.e1_spans);
        s.dist_e2 = position_features(s.tokens.size(), s.e2_spans);
        bag.sentences.push_back(std::move(s));
      }
      if (bag.sentences.empty()) throw std::runtime_error("bag with no sentences");
      bags.push_back(std::move(bag));
    } catch (const std::exception& e) {
      throw fail(e.what());
    }
  }
  return {std::move(bags), std::move(inventory)};
}

void save_direct(const std::string& path, const std::vector<DirectExample>& examples,
                 const std::string& manifest_json) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write direct file: " + path);
  json header = {{"format", "relex-direct"}, {"version", 1}};
  out << header_with_manifest(header, manifest_json).dump() << "\n";
  for (const DirectExample& ex : examples) {
    json rec = {{"tokens", ex.sentence.tokens},
                {"e1", span_list_json(ex.sentence.e1_spans)},
                {"e2", span_list_json(ex.sentence.e2_spans)},
                {"label", ex.label}};
    if (!ex.relations.empty()) rec["relations"] = ex.relations;
    out << rec.dump() << "\n";
  }
}

std::vector<DirectExample> load_direct(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open direct file: " + path);
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& msg) -> std::runtime_error {
    return std::runtime_error(path + ":" + std::to_string(lineno) + ": " + msg);
  };
  if (!std::getline(in, line)) throw fail("empty direct file");
  ++lineno;
  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception& e) {
    throw fail(std::string("bad header: ") + e.what());
  }
  if (header.value("format", "") != "relex-direct" || header.value("version", 0) != 1)
    throw fail("unsupported direct file format/version");

  std::vector<DirectExample> out;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      json rec = json::parse(line);
      DirectExample ex;
      ex.label = rec.at("label").get<int>();
      if (ex.label != 0 && ex.label != 1) throw std::runtime_error("label must be 0 or 1");
      ex.sentence.tokens = rec.at("tokens").get<std::vector<std::string>>();
      ex.sentence.e1_spans = parse_spans(rec.at("e1"));
      ex.sentence.e2_spans = parse_spans(rec.at("e2"));
      if (rec.contains("relations"))
        ex.relations = rec.at("relations").get<std::vector<std::string>>();
      ex.sentence.dist_e1 = position_features(ex.sentence.tokens.size(), ex.sentence.e1_spans);
      ex.sentence.dist_e2 = position_features(ex.sentence.tokens.size(), ex.sentence.e2_spans);
      out.push_back(std::move(ex));
    } catch (const std::exception& e) {
      throw fail(e.what());
    }
  }
  return out;
}

std::vector<KbTuple> load_kb(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open KB file: " + path);
  std::vector<KbTuple> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    KbTuple t;
    if (!(ss >> t.e1 >> t.rel >> t.e2))
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected 'e1 rel e2'");
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<AnnotatedSentence> load_annotated_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus file: " + path);
  std::vector<AnnotatedSentence> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      json rec = json::parse(line);
      AnnotatedSentence sent;
      sent.tokens = rec.at("tokens").get<std::vector<std::string>>();
      for (const auto& mj : rec.at("mentions")) {
        MentionAnnotation m;
        m.entity_id = mj.at("id").get<std::string>();
        m.surface = mj.value("surface", m.entity_id);
        m.span = {mj.at("start").get<int>(), mj.at("end").get<int>()};
        sent.mentions.push_back(std::move(m));
      }
      out.push_back(std::move(sent));
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace relex

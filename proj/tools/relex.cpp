// relex: command-line driver for the relation-extraction library.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 training divergence.
// Any partially written output file is removed when a command fails.
#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "relex/dataset.hpp"
#include "relex/embeddings.hpp"
#include "relex/evaluation.hpp"
#include "relex/experiments.hpp"
#include "relex/training.hpp"

using nlohmann::json;
using namespace relex;

namespace {

// ---- provenance ------------------------------------------------------------

std::uint64_t fnv1a64(const char* data, std::size_t n, std::uint64_t h = 1469598103934665603ULL) {
  for (std::size_t i = 0; i < n; ++i) {
    h ^= static_cast<unsigned char>(data[i]);
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for digest: " + path);
  std::uint64_t h = 1469598103934665603ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0)
    h = fnv1a64(buf, static_cast<std::size_t>(in.gcount()), h);
  return hex64(h);
}

// RunManifest: ties every artifact back to the exact configuration and the
// input files it was derived from.
json run_manifest(const std::string& command, const json& config,
                  const std::vector<std::string>& input_paths,
                  const std::vector<std::uint64_t>& seeds) {
  const std::string canon = config.dump();
  json inputs = json::object();
  for (const std::string& p : input_paths)
    if (!p.empty()) inputs[p] = file_digest(p);
  return {{"tool", "relex"},
          {"command", command},
          {"config", config},
          {"config_hash", hex64(fnv1a64(canon.data(), canon.size()))},
          {"inputs", inputs},
          {"seeds", seeds}};
}

// Removes declared outputs unless the command commits them.
struct OutputGuard {
  std::vector<std::string> paths;
  bool committed = false;

  void track(const std::string& p) {
    if (!p.empty()) paths.push_back(p);
  }
  void commit() { committed = true; }
  ~OutputGuard() {
    if (committed) return;
    for (const std::string& p : paths) std::remove(p.c_str());
  }
};

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write: " + path);
  out << j.dump(2) << '\n';
}

// ---- shared option bundles ---------------------------------------------------

struct ModelOpts {
  std::size_t d_w = 50, d_pos = 5, n_filters = 32, d_s = 32;
  std::size_t h_exist = 32, h_attn = 16, h_out = 32;
  double dropout = 0.1;

  void attach(CLI::App* cmd) {
    cmd->add_option("--embed-dim", d_w, "word-vector dimension for random tables (ignored with --vectors)");
    cmd->add_option("--pos-dim", d_pos, "distance-embedding dimension");
    cmd->add_option("--filters", n_filters, "convolution filters per width");
    cmd->add_option("--sentence-dim", d_s, "sentence encoding dimension");
    cmd->add_option("--hidden-exist", h_exist, "existence-head hidden width");
    cmd->add_option("--hidden-attn", h_attn, "attention-head hidden width");
    cmd->add_option("--hidden-out", h_out, "output-layer hidden width");
    cmd->add_option("--dropout", dropout, "input dropout probability");
  }

  ModelConfig to_config(std::size_t d_w_actual, std::size_t n_relations) const {
    ModelConfig cfg;
    cfg.d_w = d_w_actual;
    cfg.d_pos = d_pos;
    cfg.n_filters = n_filters;
    cfg.d_s = d_s;
    cfg.h_exist = h_exist;
    cfg.h_attn = h_attn;
    cfg.h_out = h_out;
    cfg.dropout = dropout;
    cfg.n_relations = n_relations;
    return cfg;
  }

  json to_json() const {
    return {{"pos_dim", d_pos},     {"filters", n_filters},    {"sentence_dim", d_s},
            {"hidden_exist", h_exist}, {"hidden_attn", h_attn}, {"hidden_out", h_out},
            {"dropout", dropout}};
  }
};

struct TrainOpts {
  std::string bags_path, direct_path, vectors_path;
  std::string mode = "distsup";
  std::string weights = "sigmoid", pooling = "max";
  double lambda = 1.0;
  std::vector<std::uint64_t> seeds = {0, 1, 2};
  std::size_t epochs = 50, patience = 3, batch = 32, min_freq = 0;
  double split = 0.9, lr = 1e-3, cutoff = 0.4, clip = 5.0;
  std::uint64_t embed_seed = 0, split_seed = 0;
  ModelOpts model;

  void attach(CLI::App* cmd, bool need_mode = true) {
    cmd->add_option("--bags", bags_path, "training bags (JSONL)")->required();
    cmd->add_option("--direct", direct_path, "sentence-level supervision (JSONL)");
    cmd->add_option("--vectors", vectors_path, "pretrained word vectors (text)");
    if (need_mode)
      cmd->add_option("--mode", mode, "distsup | distsup+direct | multitask");
    cmd->add_option("--weights", weights, "attention weights: uniform | softmax | sigmoid");
    cmd->add_option("--pooling", pooling, "bag pooling: average | max");
    cmd->add_option("--lambda", lambda, "direct-supervision weight (multitask)");
    cmd->add_option("--seeds", seeds, "training seeds")->delimiter(',');
    cmd->add_option("--epochs", epochs, "epoch cap");
    cmd->add_option("--patience", patience, "early-stopping patience");
    cmd->add_option("--batch", batch, "minibatch size");
    cmd->add_option("--split", split, "train fraction of the train/validation split");
    cmd->add_option("--split-seed", split_seed, "split shuffle seed");
    cmd->add_option("--lr", lr, "Adam learning rate");
    cmd->add_option("--clip", clip, "global gradient-norm clip (0 disables)");
    cmd->add_option("--cutoff", cutoff, "recall cutoff for the PR area");
    cmd->add_option("--min-freq", min_freq, "vocabulary frequency threshold");
    cmd->add_option("--embed-seed", embed_seed, "embedding-table seed");
    model.attach(cmd);
  }

  TrainConfig to_train_config() const {
    TrainConfig cfg;
    cfg.mode = parse_supervision_mode(mode);
    cfg.attention = {parse_weight_scheme(weights), parse_pooling(pooling)};
    cfg.lambda = lambda;
    cfg.batch_size = batch;
    cfg.max_epochs = epochs;
    cfg.patience = patience;
    cfg.split_fraction = split;
    cfg.grad_clip_norm = clip;
    cfg.auc_cutoff = cutoff;
    cfg.seeds = seeds;
    cfg.adam.lr = lr;
    return cfg;
  }

  json to_json() const {
    json j = {{"bags", bags_path},   {"direct", direct_path}, {"vectors", vectors_path},
              {"mode", mode},        {"weights", weights},    {"pooling", pooling},
              {"lambda", lambda},    {"epochs", epochs},      {"patience", patience},
              {"batch", batch},      {"split", split},        {"split_seed", split_seed},
              {"lr", lr},            {"clip", clip},          {"cutoff", cutoff},
              {"min_freq", min_freq}, {"embed_seed", embed_seed}, {"model", model.to_json()}};
    return j;
  }
};

// Loads everything a training-style command needs.
struct LoadedData {
  TrainData data;
  std::vector<Bag> all_bags;  // indexed, pre-split
  WordEmbeddingTable table;
  PretrainedVectors pretrained;
  ModelConfig model_cfg;
};

LoadedData load_for_training(const TrainOpts& opt) {
  auto [bags, inventory] = load_bags(opt.bags_path);
  if (bags.size() < 2) throw std::runtime_error(opt.bags_path + ": need at least 2 bags");
  std::vector<DirectExample> direct;
  if (!opt.direct_path.empty()) direct = load_direct(opt.direct_path);

  std::vector<std::vector<std::string>> streams = {collect_tokens(bags)};
  if (!direct.empty()) streams.push_back(collect_tokens(direct));
  const Vocabulary vocab = Vocabulary::build(streams, opt.min_freq);

  PretrainedVectors pretrained(opt.model.d_w);
  WordEmbeddingTable table = [&] {
    if (opt.vectors_path.empty())
      return WordEmbeddingTable::random(vocab, opt.model.d_w, opt.embed_seed);
    pretrained = PretrainedVectors::load(opt.vectors_path);
    return WordEmbeddingTable::build(vocab, pretrained, pretrained.dim(), opt.embed_seed);
  }();

  index_tokens(bags, vocab);
  index_tokens(direct, vocab);

  LoadedData out{TrainData{}, bags, std::move(table), std::move(pretrained), ModelConfig{}};
  auto [train, val] = split_train_val(bags, opt.split, opt.split_seed);
  out.data.train_bags = std::move(train);
  out.data.val_bags = std::move(val);
  out.data.direct = std::move(direct);
  out.data.inventory = inventory;
  out.model_cfg = opt.model.to_config(out.table.dim(), inventory.size());
  return out;
}

std::vector<Bag> load_test_bags(const std::string& path, const RelationInventory& expected) {
  auto [bags, inventory] = load_bags(path);
  if (inventory.names() != expected.names())
    throw std::runtime_error(path + ": relation inventory differs from the training data");
  return bags;
}

json epoch_log_json(const std::vector<EpochLog>& log) {
  json out = json::array();
  for (const EpochLog& e : log)
    out.push_back({{"epoch", e.epoch},
                   {"dist_loss", e.dist_loss},
                   {"direct_loss", e.direct_loss},
                   {"val_auc", e.val_auc},
                   {"seconds", e.wall_seconds}});
  return out;
}

// ---- subcommands -------------------------------------------------------------

int cmd_gen_synthetic(const SyntheticSpec& spec, const std::string& out_bags,
                      const std::string& out_direct) {
  OutputGuard guard;
  guard.track(out_bags);
  guard.track(out_direct);

  const SyntheticData syn = generate_synthetic(spec);
  const std::vector<Bag> bags = build_bags(syn.kb, syn.corpus, syn.inventory);

  const json config = {{"relations", spec.n_relations},
                       {"pairs", spec.n_pairs},
                       {"positive_fraction", spec.positive_fraction},
                       {"vocab", spec.vocab_size},
                       {"triggers", spec.triggers_per_relation},
                       {"noise", spec.noise_rate},
                       {"sent_len", {spec.sent_len_min, spec.sent_len_max}},
                       {"sents_per_bag", {spec.sents_per_bag_min, spec.sents_per_bag_max}},
                       {"direct", spec.n_direct},
                       {"pair_id_offset", spec.pair_id_offset},
                       {"seed", spec.seed}};
  const std::string manifest = run_manifest("gen-synthetic", config, {}, {spec.seed}).dump();
  save_bags(out_bags, bags, syn.inventory, manifest);
  std::size_t positives = 0;
  for (const Bag& b : bags) positives += b.positive();
  std::printf("wrote %zu bags (%zu positive) to %s\n", bags.size(), positives, out_bags.c_str());
  if (!out_direct.empty()) {
    save_direct(out_direct, syn.direct, manifest);
    std::printf("wrote %zu direct examples to %s\n", syn.direct.size(), out_direct.c_str());
  }
  guard.commit();
  return 0;
}

int cmd_build_data(const std::string& kb_path, const std::string& corpus_path,
                   const std::string& relations_path, const std::string& out_path) {
  OutputGuard guard;
  guard.track(out_path);

  const std::vector<KbTuple> kb = load_kb(kb_path);
  const std::vector<AnnotatedSentence> corpus = load_annotated_corpus(corpus_path);

  std::vector<std::string> names;
  if (!relations_path.empty()) {
    std::ifstream in(relations_path);
    if (!in) throw std::runtime_error("cannot open relations file: " + relations_path);
    std::string line;
    while (std::getline(in, line))
      if (!line.empty()) names.push_back(line);
  } else {
    std::set<std::string> distinct;
    for (const KbTuple& t : kb) distinct.insert(t.rel);
    names.assign(distinct.begin(), distinct.end());
  }
  const RelationInventory inventory(names);
  const std::vector<Bag> bags = build_bags(kb, corpus, inventory);

  const json config = {{"kb", kb_path}, {"corpus", corpus_path}, {"relations", relations_path}};
  const std::string manifest =
      run_manifest("build-data", config, {kb_path, corpus_path}, {}).dump();
  save_bags(out_path, bags, inventory, manifest);
  std::size_t positives = 0;
  for (const Bag& b : bags) positives += b.positive();
  std::printf("wrote %zu bags (%zu positive, %zu relations) to %s\n", bags.size(), positives,
              inventory.size(), out_path.c_str());
  guard.commit();
  return 0;
}

int cmd_train(const TrainOpts& opt, const std::string& out_prefix) {
  OutputGuard guard;
  const std::string run_path = out_prefix + ".run.json";
  guard.track(run_path);

  LoadedData loaded = load_for_training(opt);
  const TrainConfig cfg = opt.to_train_config();
  const MultiSeedResult result =
      train(cfg, loaded.model_cfg, loaded.data, loaded.table, loaded.pretrained);

  const json manifest = run_manifest("train", opt.to_json(),
                                     {opt.bags_path, opt.direct_path, opt.vectors_path}, opt.seeds);
  json runs = json::array();
  for (const TrainResult& run : result.runs) {
    const std::string ckpt_path = out_prefix + ".seed" + std::to_string(run.seed) + ".ckpt.json";
    guard.track(ckpt_path);
    save_checkpoint(ckpt_path, run.best);
    runs.push_back({{"seed", run.seed},
                    {"checkpoint", ckpt_path},
                    {"best_epoch", run.best_epoch},
                    {"best_val_auc", run.best_val_auc},
                    {"epochs", epoch_log_json(run.log)}});
    std::printf("seed %llu: best val AUC@%.2g %.4f at epoch %zu (%zu epochs run)\n",
                static_cast<unsigned long long>(run.seed), cfg.auc_cutoff, run.best_val_auc,
                run.best_epoch, run.log.size());
  }
  write_json(run_path, {{"manifest", manifest},
                        {"runs", runs},
                        {"best_seed", result.runs[result.best_index].seed}});
  std::printf("best seed %llu; run summary in %s\n",
              static_cast<unsigned long long>(result.runs[result.best_index].seed),
              run_path.c_str());
  guard.commit();
  return 0;
}

int cmd_eval(const std::string& ckpt_path, const std::string& bags_path,
             const std::string& vectors_path, double cutoff, const std::string& out_path) {
  OutputGuard guard;
  guard.track(out_path);

  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  auto [bags, inventory] = load_bags(bags_path);
  if (inventory.size() != ckpt.model_cfg.n_relations)
    throw std::runtime_error(bags_path + ": relation count differs from the checkpoint");
  const PretrainedVectors pretrained = vectors_path.empty()
                                           ? PretrainedVectors(ckpt.model_cfg.d_w)
                                           : PretrainedVectors::load(vectors_path);
  const double auc = test_auc(ckpt, bags, pretrained, cutoff);
  std::printf("AUC@%g = %.6f over %zu bags\n", cutoff, auc, bags.size());

  if (!out_path.empty()) {
    const json config = {{"checkpoint", ckpt_path}, {"bags", bags_path}, {"cutoff", cutoff}};
    write_json(out_path, {{"manifest", run_manifest("eval", config, {ckpt_path, bags_path},
                                                    {ckpt.seed})},
                          {"auc", auc},
                          {"cutoff", cutoff},
                          {"bags", bags.size()}});
  }
  guard.commit();
  return 0;
}

int cmd_ablate(const TrainOpts& opt, const std::string& test_path, const std::string& out_path) {
  OutputGuard guard;
  guard.track(out_path);

  LoadedData loaded = load_for_training(opt);
  const std::vector<Bag> test_bags = load_test_bags(test_path, loaded.data.inventory);
  const TrainConfig base = opt.to_train_config();
  const std::vector<GridCell> grid = ablation_grid(base, loaded.model_cfg, loaded.data, test_bags,
                                                   loaded.table, loaded.pretrained);

  json cells = json::array();
  for (const GridCell& cell : grid) {
    cells.push_back({{"mode", to_string(cell.mode)},
                     {"weights", to_string(cell.weights)},
                     {"pooling", to_string(cell.pooling)},
                     {"mean_auc", cell.mean_auc},
                     {"stddev_auc", cell.stddev_auc},
                     {"per_seed_auc", cell.per_seed_auc},
                     {"failed", cell.failed},
                     {"error", cell.error}});
    if (cell.failed)
      std::printf("%-15s %-8s %-8s FAILED: %s\n", to_string(cell.mode).c_str(),
                  to_string(cell.weights).c_str(), to_string(cell.pooling).c_str(),
                  cell.error.c_str());
    else
      std::printf("%-15s %-8s %-8s %.4f +- %.4f\n", to_string(cell.mode).c_str(),
                  to_string(cell.weights).c_str(), to_string(cell.pooling).c_str(), cell.mean_auc,
                  cell.stddev_auc);
  }
  write_json(out_path,
             {{"manifest", run_manifest("ablate", opt.to_json(),
                                        {opt.bags_path, opt.direct_path, test_path}, opt.seeds)},
              {"cells", cells}});
  std::printf("%zu cells written to %s\n", grid.size(), out_path.c_str());
  guard.commit();
  return 0;
}

int cmd_sweep_lambda(const TrainOpts& opt, const std::string& test_path,
                     std::vector<double> lambdas, const std::string& out_path) {
  OutputGuard guard;
  guard.track(out_path);

  LoadedData loaded = load_for_training(opt);
  const std::vector<Bag> test_bags = load_test_bags(test_path, loaded.data.inventory);
  TrainConfig base = opt.to_train_config();
  base.mode = SupervisionMode::kMultiTask;
  if (lambdas.empty()) lambdas = default_lambda_grid();
  const std::vector<SweepPoint> sweep = lambda_sweep(lambdas, base, loaded.model_cfg, loaded.data,
                                                     test_bags, loaded.table, loaded.pretrained);

  json points = json::array();
  for (const SweepPoint& pt : sweep) {
    points.push_back(
        {{"lambda", pt.lambda}, {"mean_auc", pt.mean_auc}, {"per_seed_auc", pt.per_seed_auc}});
    std::printf("lambda %-6g mean test AUC %.4f\n", pt.lambda, pt.mean_auc);
  }
  write_json(out_path,
             {{"manifest", run_manifest("sweep-lambda", opt.to_json(),
                                        {opt.bags_path, opt.direct_path, test_path}, opt.seeds)},
              {"points", points}});
  std::printf("%zu sweep points written to %s\n", sweep.size(), out_path.c_str());
  guard.commit();
  return 0;
}

int cmd_inspect(const std::string& ckpt_path, const std::string& bags_path,
                const std::string& pair_id, const std::string& vectors_path) {
  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  auto [bags, inventory] = load_bags(bags_path);
  const PretrainedVectors pretrained = vectors_path.empty()
                                           ? PretrainedVectors(ckpt.model_cfg.d_w)
                                           : PretrainedVectors::load(vectors_path);
  const Bag* target = nullptr;
  for (const Bag& b : bags)
    if (b.pair_id == pair_id) target = &b;
  if (!target) throw std::runtime_error(bags_path + ": no bag with pair id " + pair_id);

  const std::vector<SentenceInspection> rows = inspect_bag(*target, ckpt, pretrained);
  std::printf("bag %s (%zu sentences, %s/%s attention)\n", pair_id.c_str(), rows.size(),
              to_string(ckpt.attention.weights).c_str(), to_string(ckpt.attention.pooling).c_str());
  for (std::size_t i = 0; i < rows.size(); ++i)
    std::printf("  [%zu] p=%.4f u=%+.4f weight=%.4f  %s\n", i, rows[i].p, rows[i].u,
                rows[i].weight, rows[i].text.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-instance relation extraction"};
  app.require_subcommand(1);
  app.set_config("--config", "", "flat key=value config file ([section] per subcommand)");

  // gen-synthetic
  SyntheticSpec spec;
  std::string gen_out, gen_direct_out;
  CLI::App* gen = app.add_subcommand("gen-synthetic", "generate a planted-signal dataset");
  gen->add_option("--out", gen_out, "output bags (JSONL)")->required();
  gen->add_option("--direct-out", gen_direct_out, "output direct examples (JSONL)");
  gen->add_option("--relations", spec.n_relations, "relation count");
  gen->add_option("--pairs", spec.n_pairs, "entity-pair (bag) count");
  gen->add_option("--positive-fraction", spec.positive_fraction, "fraction of positive bags");
  gen->add_option("--vocab", spec.vocab_size, "content vocabulary size");
  gen->add_option("--triggers", spec.triggers_per_relation, "trigger tokens per relation");
  gen->add_option("--noise", spec.noise_rate, "P(positive bag carries no trigger)");
  gen->add_option("--sent-len-min", spec.sent_len_min, "minimum sentence length");
  gen->add_option("--sent-len-max", spec.sent_len_max, "maximum sentence length");
  gen->add_option("--sents-min", spec.sents_per_bag_min, "minimum sentences per bag");
  gen->add_option("--sents-max", spec.sents_per_bag_max, "maximum sentences per bag");
  gen->add_option("--direct", spec.n_direct, "direct example count");
  gen->add_option("--pair-id-offset", spec.pair_id_offset, "entity-id offset (disjoint splits)");
  gen->add_option("--seed", spec.seed, "generator seed");

  // build-data
  std::string bd_kb, bd_corpus, bd_relations, bd_out;
  CLI::App* bd = app.add_subcommand("build-data", "align a KB with an annotated corpus into bags");
  bd->add_option("--kb", bd_kb, "KB triples (TSV: e1 rel e2)")->required();
  bd->add_option("--corpus", bd_corpus, "annotated sentences (JSONL)")->required();
  bd->add_option("--relations", bd_relations, "relation inventory (one name per line)");
  bd->add_option("--out", bd_out, "output bags (JSONL)")->required();

  // train
  TrainOpts train_opt;
  std::string train_out;
  CLI::App* tr = app.add_subcommand("train", "train across seeds and write checkpoints");
  train_opt.attach(tr);
  tr->add_option("--out", train_out, "output prefix for checkpoints and the run summary")
      ->required();

  // eval
  std::string ev_ckpt, ev_bags, ev_vectors, ev_out;
  double ev_cutoff = 0.4;
  CLI::App* ev = app.add_subcommand("eval", "score a checkpoint on a bag file");
  ev->add_option("--checkpoint", ev_ckpt, "checkpoint JSON")->required();
  ev->add_option("--bags", ev_bags, "evaluation bags (JSONL)")->required();
  ev->add_option("--vectors", ev_vectors, "pretrained word vectors (text)");
  ev->add_option("--cutoff", ev_cutoff, "recall cutoff");
  ev->add_option("--out", ev_out, "metrics JSON output");

  // ablate
  TrainOpts ab_opt;
  std::string ab_test, ab_out;
  CLI::App* ab = app.add_subcommand("ablate",
                                    "full supervision x weighting x pooling grid (18 cells)");
  ab_opt.attach(ab, /*need_mode=*/false);
  ab->add_option("--test-bags", ab_test, "held-out bags (JSONL)")->required();
  ab->add_option("--out", ab_out, "grid JSON output")->required();

  // sweep-lambda
  TrainOpts sw_opt;
  std::string sw_test, sw_out;
  std::vector<double> sw_lambdas;
  CLI::App* sw = app.add_subcommand("sweep-lambda", "multitask sweep over the lambda grid");
  sw_opt.attach(sw, /*need_mode=*/false);
  sw->add_option("--test-bags", sw_test, "held-out bags (JSONL)")->required();
  sw->add_option("--lambdas", sw_lambdas, "lambda values (default: the 9-point grid)")
      ->delimiter(',');
  sw->add_option("--out", sw_out, "sweep JSON output")->required();

  // inspect
  std::string in_ckpt, in_bags, in_pair, in_vectors;
  CLI::App* insp = app.add_subcommand("inspect", "per-sentence attention report for one bag");
  insp->add_option("--checkpoint", in_ckpt, "checkpoint JSON")->required();
  insp->add_option("--bags", in_bags, "bags (JSONL)")->required();
  insp->add_option("--pair", in_pair, "pair id to inspect")->required();
  insp->add_option("--vectors", in_vectors, "pretrained word vectors (text)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed()) return cmd_gen_synthetic(spec, gen_out, gen_direct_out);
    if (bd->parsed()) return cmd_build_data(bd_kb, bd_corpus, bd_relations, bd_out);
    if (tr->parsed()) return cmd_train(train_opt, train_out);
    if (ev->parsed()) return cmd_eval(ev_ckpt, ev_bags, ev_vectors, ev_cutoff, ev_out);
    if (ab->parsed()) return cmd_ablate(ab_opt, ab_test, ab_out);
    if (sw->parsed()) return cmd_sweep_lambda(sw_opt, sw_test, sw_lambdas, sw_out);
    if (insp->parsed()) return cmd_inspect(in_ckpt, in_bags, in_pair, in_vectors);
  } catch (const DivergenceError& e) {
    std::fprintf(stderr, "error: training diverged: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}

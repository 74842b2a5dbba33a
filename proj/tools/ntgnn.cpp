// ntgnn: dataset generation, preprocessing, training, evaluation and
// analysis reports. Every run writes manifest.json next to its outputs.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ntgnn/ntgnn.hpp"

namespace fs = std::filesystem;
using namespace ntgnn;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitArgument = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

struct Common {
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::string out = "ntgnn-out";
};

struct GenArgs {
  std::string family;
  std::size_t n = 41;
  std::string skips = "2,3,4,5,6,9,11,12,13,16";
  std::size_t copies = 1;
  double p = 0.3;
  std::size_t count = 10;
  std::size_t labels = 1;
  bool connected = false;
  bool task = false;
};

struct PreprocessArgs {
  std::string input;
  std::string format = "json";
  std::string k = "0";
  std::uint32_t height = 1;
  std::string labeling = "mu";
  std::string features = "one-hot";
  bool final_only = false;
  bool self_links = false;
};

struct TrainArgs {
  std::string data;
  std::size_t layers = 0;  // 0 = DAG height
  std::size_t hidden = 32;
  std::size_t embed = 32;
  std::size_t classes = 0;  // 0 = max target + 1
  std::string readout = "combine";
  std::string pool = "mean";
  double lr = 0.01;
  std::size_t epochs = 100;
  std::size_t batch_size = 0;
  std::string optimizer = "momentum";
  double momentum = 0.9;
  double clip = 0.0;
};

struct EvalArgs {
  std::string data;
  std::string checkpoint;
};

struct AnalyzeArgs {
  std::string kind;
  std::string input;
  std::string format = "json";
  std::size_t graph = 0;
  std::string builtin = "fig1-graph";
  VertexId u = kFig1Red;
  VertexId v = kFig1Yellow;
  std::uint32_t k = 2;
  std::string method = "all";
  std::string heights = "0,1,2,3,4";
  std::string ks = "0,1,inf";
  std::uint32_t height = 3;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
std::vector<T> parse_uint_list(const std::string& s, const char* what) {
  std::vector<T> out;
  for (const auto& item : split_list(s)) {
    T value{};
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), value);
    if (ec != std::errc() || ptr != item.data() + item.size()) {
      throw ArgumentError(std::string("bad ") + what + " entry '" + item + "'");
    }
    out.push_back(value);
  }
  if (out.empty()) throw ArgumentError(std::string(what) + " must not be empty");
  return out;
}

fs::path prepare_out(const Common& c) {
  fs::path dir(c.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("write failed: " + path.string());
}

void write_manifest(const fs::path& dir, nlohmann::json manifest) {
  manifest["format"] = "ntgnn-run-manifest";
  manifest["version"] = 1;
  manifest["output_dir"] = dir.string();
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

GraphCollection load_collection(const std::string& path, const std::string& format) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return parse_graph_file(in, parse_graph_format(format));
}

int cmd_gen(const Common& c, const GenArgs& a) {
  std::mt19937_64 rng(c.seed);
  GraphCollection coll;
  nlohmann::json manifest{{"command", "gen"}, {"family", a.family}, {"seed", c.seed}};
  if (a.family == "csl") {
    const auto skips = parse_uint_list<std::size_t>(a.skips, "skips");
    if (a.copies == 0) throw ArgumentError("copies must be >= 1");
    for (std::size_t cls = 0; cls < skips.size(); ++cls) {
      const auto base = generate_csl(a.n, skips[cls], static_cast<std::int64_t>(cls));
      coll.graphs.push_back(base);
      for (std::size_t i = 1; i < a.copies; ++i) coll.graphs.push_back(permute_graph(base, random_permutation(a.n, rng)));
    }
    manifest["n"] = a.n;
    manifest["skips"] = skips;
    manifest["copies"] = a.copies;
  } else if (a.family == "counterexamples") {
    if (a.task) {
      // Hexagon (class 0) versus two triangles (class 1), replicated.
      if (a.copies == 0) throw ArgumentError("copies must be >= 1");
      for (std::size_t i = 0; i < a.copies; ++i) {
        for (auto which : {Counterexample::hexagon, Counterexample::two_triangles}) {
          const auto g = generate_counterexample(which);
          LabeledGraph labeled(g.num_vertices(), g.edges(), true, g.labels(), std::nullopt,
                               which == Counterexample::hexagon ? 0 : 1);
          coll.graphs.push_back(std::move(labeled));
        }
      }
      manifest["task"] = "hexagon-vs-triangles";
      manifest["copies"] = a.copies;
    } else {
      for (auto which : {Counterexample::hexagon, Counterexample::two_triangles, Counterexample::fig7_g1,
                         Counterexample::fig7_g2, Counterexample::fig1_graph}) {
        coll.graphs.push_back(generate_counterexample(which));
      }
    }
  } else if (a.family == "random") {
    if (a.labels == 0) throw ArgumentError("labels must be >= 1");
    for (std::size_t i = 0; i < a.count; ++i) {
      coll.graphs.push_back(a.connected ? generate_connected(a.n, a.p, rng, static_cast<int>(a.labels))
                                        : generate_gnp(a.n, a.p, rng, static_cast<int>(a.labels)));
    }
    manifest["n"] = a.n;
    manifest["p"] = a.p;
    manifest["count"] = a.count;
    manifest["labels"] = a.labels;
    manifest["connected"] = a.connected;
  } else {
    throw ArgumentError("unknown family '" + a.family + "'");
  }
  const auto dir = prepare_out(c);
  std::ostringstream text;
  write_json_collection(coll, text);
  write_text(dir / "dataset.json", text.str());
  manifest["outputs"] = {"dataset.json"};
  write_manifest(dir, manifest);
  std::cout << "wrote " << coll.graphs.size() << " graphs to " << (dir / "dataset.json").string() << "\n";
  return kExitOk;
}

int cmd_preprocess(const Common& c, const PreprocessArgs& a) {
  PreprocessOptions opt;
  opt.k = parse_redundancy(a.k);
  opt.height = a.height;
  opt.labeling = parse_labeling(a.labeling);
  opt.features = parse_feature_mode(a.features);
  opt.all_heights = !a.final_only;
  opt.self_links = a.self_links;
  opt.threads = c.threads;
  if (opt.self_links && opt.labeling != Labeling::phi) throw ArgumentError("--self-links needs --labeling phi");

  auto coll = load_collection(a.input, a.format);
  if (opt.features == FeatureMode::one_hot_label) reindex_labels(coll);
  const auto pre = preprocess(coll, opt);

  const auto dir = prepare_out(c);
  write_text(dir / "dag.json", merge_dag_to_json(pre.dag).dump() + "\n");
  write_matrices(pre.matrices, dir / "matrices");
  std::vector<std::optional<std::int64_t>> targets;
  for (const auto& g : coll.graphs) targets.push_back(g.graph_class());
  write_text(dir / "plan.json", plan_to_json(pre.plan, targets).dump() + "\n");
  write_manifest(dir, {{"command", "preprocess"},
                       {"input", a.input},
                       {"seed", c.seed},
                       {"k", redundancy_to_string(opt.k)},
                       {"height", opt.height},
                       {"labeling", to_string(opt.labeling)},
                       {"features", a.features},
                       {"all_heights", opt.all_heights},
                       {"self_links", opt.self_links},
                       {"outputs", {"dag.json", "matrices/", "plan.json"}}});
  std::cout << "graphs " << coll.graphs.size() << " dag_nodes " << pre.dag.num_nodes() << " dag_edges "
            << pre.dag.num_edges() << " height " << pre.matrices.height << "\n";
  return kExitOk;
}

TrainingData load_training_data(const std::string& data_dir) {
  const fs::path dir(data_dir);
  TrainingData data;
  data.matrices = read_matrices(dir / "matrices");
  auto plan = read_plan(dir / "plan.json");
  data.plan = std::move(plan.plan);
  for (std::size_t g = 0; g < plan.targets.size(); ++g) {
    if (!plan.targets[g]) throw DataError("graph " + std::to_string(g) + " has no class label");
    if (*plan.targets[g] < 0) throw DataError("class labels must be non-negative");
    data.targets.push_back(*plan.targets[g]);
  }
  return data;
}

int cmd_train(const Common& c, const TrainArgs& a) {
  const auto data = load_training_data(a.data);
  std::int64_t max_target = -1;
  for (auto t : data.targets) max_target = std::max(max_target, t);
  ModelShape shape;
  shape.input_dim = data.matrices.features.dim;
  shape.hidden_dim = a.hidden;
  shape.embed_dim = a.embed;
  shape.num_layers = a.layers ? a.layers : data.matrices.height;
  shape.num_classes = a.classes ? a.classes : static_cast<std::size_t>(max_target + 1);
  if (shape.num_classes < 2) throw ArgumentError("need at least two classes");
  if (static_cast<std::size_t>(max_target) >= shape.num_classes) throw DataError("class label exceeds --classes");
  if (shape.hidden_dim == 0 || shape.embed_dim == 0) throw ArgumentError("hidden and embed sizes must be >= 1");

  TrainConfig cfg;
  cfg.learning_rate = a.lr;
  cfg.epochs = a.epochs;
  cfg.batch_size = a.batch_size;
  cfg.seed = c.seed;
  cfg.optimizer = parse_optimizer(a.optimizer);
  cfg.momentum = a.momentum;
  cfg.clip_norm = a.clip;

  auto init = MlpStack<double>::init(shape, parse_readout(a.readout), parse_pool(a.pool), c.seed);
  Trainer<double> trainer(std::move(init), cfg);
  const auto history = train(trainer, data);

  const auto dir = prepare_out(c);
  write_text(dir / "checkpoint.json", checkpoint_to_json(trainer.params()).dump(1) + "\n");
  std::ostringstream csv;
  write_metrics_csv(history, csv);
  write_text(dir / "metrics.csv", csv.str());
  write_manifest(dir, {{"command", "train"},
                       {"input", a.data},
                       {"seed", c.seed},
                       {"layers", shape.num_layers},
                       {"hidden", shape.hidden_dim},
                       {"embed", shape.embed_dim},
                       {"classes", shape.num_classes},
                       {"readout", a.readout},
                       {"pool", a.pool},
                       {"training",
                        {{"learning_rate", cfg.learning_rate},
                         {"epochs", cfg.epochs},
                         {"batch_size", cfg.batch_size},
                         {"optimizer", to_string(cfg.optimizer)},
                         {"momentum", cfg.momentum},
                         {"clip_norm", cfg.clip_norm}}},
                       {"outputs", {"checkpoint.json", "metrics.csv"}}});
  if (!history.empty()) {
    std::printf("epochs %zu loss %.6f accuracy %.6f\n", history.size(), history.back().loss, history.back().accuracy);
  } else {
    std::printf("epochs 0\n");
  }
  return kExitOk;
}

int cmd_eval(const Common& c, const EvalArgs& a) {
  const auto data = load_training_data(a.data);
  std::ifstream in(a.checkpoint);
  if (!in) throw DataError("cannot open " + a.checkpoint);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(a.checkpoint + ": " + e.what());
  }
  const auto params = checkpoint_from_json<double>(j);
  const auto eval = evaluate<double>(data, params);
  if (!std::isfinite(eval.loss)) throw NumericError("non-finite evaluation loss");

  const auto dir = prepare_out(c);
  char line[128];
  std::snprintf(line, sizeof line, "%.9g,%.6f\n", eval.loss, eval.accuracy());
  write_text(dir / "eval.csv", std::string("loss,accuracy\n") + line);
  write_manifest(dir, {{"command", "eval"},
                       {"input", a.data},
                       {"checkpoint", a.checkpoint},
                       {"seed", c.seed},
                       {"outputs", {"eval.csv"}}});
  std::printf("accuracy %.6f loss %.6f\n", eval.accuracy(), eval.loss);
  return kExitOk;
}

LabeledGraph analysis_graph(const AnalyzeArgs& a) {
  if (a.input.empty()) return generate_counterexample(parse_counterexample(a.builtin));
  auto coll = load_collection(a.input, a.format);
  if (a.graph >= coll.graphs.size()) throw ArgumentError("--graph out of range");
  return coll.graphs[a.graph];
}

int cmd_analyze(const Common& c, const AnalyzeArgs& a) {
  nlohmann::json manifest{{"command", "analyze"}, {"kind", a.kind}, {"seed", c.seed}};
  if (!a.input.empty()) manifest["input"] = a.input;
  std::ostringstream csv;
  std::string file;
  if (a.kind == "influence") {
    const auto g = analysis_graph(a);
    std::vector<InfluenceMethod> methods;
    if (a.method == "all") {
      methods.assign(std::begin(kAllInfluenceMethods), std::end(kAllInfluenceMethods));
    } else {
      methods.push_back(parse_influence_method(a.method));
    }
    std::vector<InfluenceReport> reports;
    for (auto m : methods) reports.push_back(relative_influence(g, a.u, a.v, a.k, m));
    write_influence_csv(reports, csv);
    for (const auto& r : reports) std::cout << to_string(r.method) << ' ' << r.value() << '\n';
    file = "influence.csv";
    manifest["graph"] = a.input.empty() ? nlohmann::json(a.builtin) : nlohmann::json(a.graph);
    manifest["u"] = a.u;
    manifest["v"] = a.v;
    manifest["k"] = a.k;
    manifest["method"] = a.method;
  } else if (a.kind == "expressivity") {
    std::vector<std::pair<LabeledGraph, LabeledGraph>> pairs;
    if (a.input.empty()) {
      pairs.emplace_back(generate_counterexample(Counterexample::hexagon),
                         generate_counterexample(Counterexample::two_triangles));
      pairs.emplace_back(generate_counterexample(Counterexample::fig7_g1),
                         generate_counterexample(Counterexample::fig7_g2));
    } else {
      auto coll = load_collection(a.input, a.format);
      if (coll.graphs.size() % 2) throw DataError("expressivity input needs an even number of graphs");
      for (std::size_t i = 0; i < coll.graphs.size(); i += 2) pairs.emplace_back(coll.graphs[i], coll.graphs[i + 1]);
    }
    const auto heights = parse_uint_list<std::uint32_t>(a.heights, "heights");
    std::vector<Redundancy> ks;
    for (const auto& s : split_list(a.ks)) ks.push_back(parse_redundancy(s));
    if (ks.empty()) throw ArgumentError("ks must not be empty");
    const auto rows = expressivity_report(pairs, heights, ks);
    write_distinguishability_csv(rows, csv);
    std::size_t separated = 0;
    for (const auto& r : rows) separated += r.knt;
    std::cout << "rows " << rows.size() << " separated " << separated << '\n';
    file = "distinguishability.csv";
    manifest["heights"] = heights;
    manifest["ks"] = a.ks;
  } else if (a.kind == "size-audit") {
    GraphCollection coll;
    if (a.input.empty()) {
      coll.graphs.push_back(analysis_graph(a));
    } else {
      coll = load_collection(a.input, a.format);
    }
    const auto audit = size_audit(coll, a.k, a.height);
    write_size_audit_csv(audit, csv);
    std::printf("max_tree_ratio %.6f max_merge_ratio %.6f within_bounds %d\n", audit.max_tree_ratio,
                audit.max_merge_ratio, audit.within_bounds() ? 1 : 0);
    file = "size_audit.csv";
    manifest["k"] = a.k;
    manifest["height"] = a.height;
  } else {
    throw ArgumentError("unknown analysis '" + a.kind + "'");
  }
  const auto dir = prepare_out(c);
  write_text(dir / file, csv.str());
  manifest["outputs"] = {file};
  write_manifest(dir, manifest);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ntgnn: neighborhood-tree graph neural networks"};
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_option("--seed", common.seed, "64-bit seed for all randomness");
  app.add_option("--threads", common.threads, "preprocessing workers (0 = all cores)");
  app.add_option("--out", common.out, "output directory")->envname("NTGNN_OUT");

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "generate a dataset");
  gen_cmd->add_option("family", gen.family, "csl | counterexamples | random")->required();
  gen_cmd->add_option("--n", gen.n, "vertices per graph");
  gen_cmd->add_option("--skips", gen.skips, "CSL skip lengths, comma separated");
  gen_cmd->add_option("--copies", gen.copies, "copies per class (permuted for CSL)");
  gen_cmd->add_option("--p", gen.p, "edge probability");
  gen_cmd->add_option("--count", gen.count, "number of random graphs");
  gen_cmd->add_option("--labels", gen.labels, "number of vertex labels");
  gen_cmd->add_flag("--connected", gen.connected, "reject disconnected random graphs");
  gen_cmd->add_flag("--task", gen.task, "hexagon-vs-triangles classification set");

  PreprocessArgs pre;
  auto* pre_cmd = app.add_subcommand("preprocess", "build and merge k-NTs, export layered matrices");
  pre_cmd->add_option("--input", pre.input, "graph collection")->required();
  pre_cmd->add_option("--format", pre.format, "json | edge-list");
  pre_cmd->add_option("--k", pre.k, "redundancy k or inf");
  pre_cmd->add_option("--height", pre.height, "tree height");
  pre_cmd->add_option("--labeling", pre.labeling, "phi | mu");
  pre_cmd->add_option("--features", pre.features, "one-hot | raw");
  pre_cmd->add_flag("--final-only", pre.final_only, "build trees of the final height only");
  pre_cmd->add_flag("--self-links", pre.self_links, "store same-origin predecessor rows (phi only)");

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "train a DAG-MLP on preprocessed data");
  train_cmd->add_option("--data", tr.data, "preprocess output directory")->required();
  train_cmd->add_option("--layers", tr.layers, "message-passing layers (default: DAG height)");
  train_cmd->add_option("--hidden", tr.hidden, "MLP hidden width");
  train_cmd->add_option("--embed", tr.embed, "embedding width");
  train_cmd->add_option("--classes", tr.classes, "number of classes (default: max label + 1)");
  train_cmd->add_option("--readout", tr.readout, "combine | fixed");
  train_cmd->add_option("--pool", tr.pool, "mean | sum");
  train_cmd->add_option("--lr", tr.lr, "learning rate");
  train_cmd->add_option("--epochs", tr.epochs, "epochs");
  train_cmd->add_option("--batch-size", tr.batch_size, "graphs per step (0 = all)");
  train_cmd->add_option("--optimizer", tr.optimizer, "sgd | momentum");
  train_cmd->add_option("--momentum", tr.momentum, "momentum coefficient");
  train_cmd->add_option("--clip", tr.clip, "gradient norm clip (0 = off)");

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
  eval_cmd->add_option("--data", ev.data, "preprocess output directory")->required();
  eval_cmd->add_option("--checkpoint", ev.checkpoint, "checkpoint.json")->required();

  AnalyzeArgs an;
  auto* analyze_cmd = app.add_subcommand("analyze", "influence, expressivity and size reports");
  analyze_cmd->add_option("kind", an.kind, "influence | expressivity | size-audit")->required();
  analyze_cmd->add_option("--input", an.input, "graph collection (default: built-in graphs)");
  analyze_cmd->add_option("--format", an.format, "json | edge-list");
  analyze_cmd->add_option("--graph", an.graph, "graph index within --input");
  analyze_cmd->add_option("--builtin", an.builtin, "built-in graph when no --input is given");
  analyze_cmd->add_option("--u", an.u, "receiving vertex");
  analyze_cmd->add_option("--v", an.v, "influencing vertex");
  analyze_cmd->add_option("--k", an.k, "depth (influence) or redundancy (size-audit)");
  analyze_cmd->add_option("--method", an.method, "influence method or all");
  analyze_cmd->add_option("--heights", an.heights, "heights, comma separated");
  analyze_cmd->add_option("--ks", an.ks, "redundancies, comma separated (inf allowed)");
  analyze_cmd->add_option("--height", an.height, "tree height (size-audit)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitArgument;
  }

  try {
    if (*gen_cmd) return cmd_gen(common, gen);
    if (*pre_cmd) return cmd_preprocess(common, pre);
    if (*train_cmd) return cmd_train(common, tr);
    if (*eval_cmd) return cmd_eval(common, ev);
    if (*analyze_cmd) return cmd_analyze(common, an);
  } catch (const ArgumentError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitArgument;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitArgument;
}

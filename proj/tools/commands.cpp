#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "semtask/catalog.hpp"
#include "semtask/classifiers.hpp"
#include "semtask/embeddings.hpp"
#include "semtask/error.hpp"
#include "semtask/hashing.hpp"
#include "semtask/parallel.hpp"
#include "semtask/report.hpp"
#include "semtask/sampler.hpp"
#include "semtask/semantics.hpp"
#include "semtask/synth.hpp"
#include "semtask/taxonomy.hpp"
#include "semtask/testbed_io.hpp"

namespace semtask::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buffer[32];
  std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buffer;
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string(), {path.string()});
  return out;
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string(), {path.string()});
  return in;
}

fs::path with_suffix(const fs::path& prefix, const std::string& suffix) { return fs::path(prefix.string() + suffix); }

/// Provenance record written next to every output as <name>.manifest.json.
class RunManifest {
 public:
  RunManifest(std::string command, int argc, const char* const* argv) {
    doc_["tool"] = "semtask";
    doc_["version"] = SEMTASK_VERSION;
    doc_["command"] = std::move(command);
    auto& line = doc_["command_line"] = ojson::array();
    for (int i = 0; i < argc; ++i) line.push_back(argv[i]);
    doc_["config"] = ojson::object();
    doc_["inputs"] = ojson::object();
    doc_["outputs"] = ojson::object();
    doc_["warnings"] = ojson::array();
    doc_["started_utc"] = utc_now();
  }

  ojson& config() { return doc_["config"]; }
  void input(const fs::path& path) { doc_["inputs"][path.string()] = sha256_file(path); }
  void output(const fs::path& path) { doc_["outputs"][path.string()] = sha256_file(path); }
  void warn(const std::string& message) { doc_["warnings"].push_back(message); }

  void write(const fs::path& path) {
    doc_["finished_utc"] = utc_now();
    auto out = open_output(path);
    out << doc_.dump(2) << '\n';
  }

 private:
  ojson doc_;
};

struct DistancesArgs {
  std::string taxonomy;
  std::string out;
  unsigned threads = 0;
};

int cmd_distances(const DistancesArgs& args, int argc, const char* const* argv, std::ostream& out) {
  RunManifest manifest("distances", argc, argv);
  const auto graph = load_taxonomy_file(args.taxonomy);
  manifest.input(args.taxonomy);
  const auto dm = distance_matrix(graph, args.threads);
  {
    auto file = open_output(args.out);
    write_distance_csv(file, dm);
  }
  manifest.config()["classes"] = dm.size();
  manifest.config()["log_base"] = "e";
  manifest.output(args.out);
  manifest.write(with_suffix(args.out, ".manifest.json"));
  out << "wrote " << dm.size() << "x" << dm.size() << " distance matrix to " << args.out << '\n';
  return 0;
}

struct SampleArgs {
  std::string taxonomy;
  std::string catalog;
  std::string strategy = "semantic";
  SamplerConfig config;
  std::string out;
};

int cmd_sample(SampleArgs args, int argc, const char* const* argv, std::ostream& out) {
  RunManifest manifest("sample", argc, argv);
  args.config.strategy = parse_strategy(args.strategy);
  const auto graph = load_taxonomy_file(args.taxonomy);
  manifest.input(args.taxonomy);
  InstanceCatalog catalog;
  if (args.catalog.empty()) {
    catalog = catalog_from_counts(graph);
    manifest.warn("no --catalog given; instance ids synthesized from taxonomy counts");
  } else {
    auto in = open_input(args.catalog);
    catalog = read_catalog_csv(in);
    manifest.input(args.catalog);
  }
  catalog.validate_against(graph);
  const auto dm = distance_matrix(graph);
  const auto testbed = generate_testbed(graph, dm, catalog, args.config);
  {
    auto file = open_output(args.out);
    write_testbed_jsonl(file, testbed);
  }
  auto& cfg = manifest.config();
  cfg["strategy"] = to_string(args.config.strategy);
  cfg["alpha"] = args.config.alpha;
  cfg["beta"] = args.config.beta;
  cfg["ways"] = args.config.ways;
  cfg["shots"] = args.config.shots;
  cfg["queries"] = args.config.queries;
  cfg["tasks"] = args.config.num_tasks;
  cfg["oversample"] = args.config.oversample_factor;
  cfg["seed"] = args.config.seed;
  cfg["candidates_drawn"] = testbed.provenance.candidates_drawn;
  cfg["unique_candidates"] = testbed.provenance.unique_candidates;
  for (const auto& w : testbed.provenance.warnings) manifest.warn(w);
  manifest.output(args.out);
  manifest.write(with_suffix(args.out, ".manifest.json"));
  out << "wrote " << testbed.tasks.size() << " tasks (" << testbed.provenance.unique_candidates << " unique of "
      << testbed.provenance.candidates_drawn << " candidates) to " << args.out << '\n';
  return 0;
}

struct StatsArgs {
  std::string testbed;
  std::string distances;
  std::string out;
  double bin_width = 2.0;
};

int cmd_stats(const StatsArgs& args, int argc, const char* const* argv, std::ostream& out) {
  if (!(args.bin_width > 0.0)) throw Error(ErrorCode::InvalidConfig, "bin width must be positive");
  RunManifest manifest("stats", argc, argv);
  Testbed testbed;
  {
    auto in = open_input(args.testbed);
    testbed = read_testbed_jsonl(in);
  }
  manifest.input(args.testbed);
  DistanceMatrix dm;
  {
    auto in = open_input(args.distances);
    dm = read_distance_csv(in);
  }
  manifest.input(args.distances);
  if (testbed.tasks.empty()) throw Error(ErrorCode::MalformedInput, "testbed has no tasks");

  std::vector<double> coarsities;
  std::vector<std::size_t> participation(dm.size(), 0);
  for (const auto& task : testbed.tasks) {
    coarsities.push_back(coarsity(dm, task.class_ids));
    for (const auto& id : task.class_ids) ++participation[dm.index_of(id)];
  }

  const auto histogram_path = with_suffix(args.out, "_histogram.csv");
  {
    const double top = *std::max_element(coarsities.begin(), coarsities.end());
    const auto bins = static_cast<std::size_t>(std::floor(top / args.bin_width)) + 1;
    std::vector<std::size_t> counts(bins, 0);
    for (double c : coarsities) ++counts[std::min(bins - 1, static_cast<std::size_t>(std::floor(c / args.bin_width)))];
    auto file = open_output(histogram_path);
    file << "bin_start,bin_end,count\n";
    for (std::size_t b = 0; b < bins; ++b) {
      file << b * args.bin_width << ',' << (b + 1) * args.bin_width << ',' << counts[b] << '\n';
    }
  }

  const auto participation_path = with_suffix(args.out, "_participation.csv");
  {
    auto file = open_output(participation_path);
    file << "class_id,tasks,proportion\n";
    const double total = static_cast<double>(testbed.tasks.size());
    char buffer[32];
    for (std::size_t i = 0; i < dm.size(); ++i) {
      std::snprintf(buffer, sizeof buffer, "%.17g", static_cast<double>(participation[i]) / total);
      file << dm.class_ids()[i] << ',' << participation[i] << ',' << buffer << '\n';
    }
  }

  const auto quartile_path = with_suffix(args.out, "_quartiles.csv");
  {
    std::vector<std::size_t> order(coarsities.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (coarsities[a] != coarsities[b]) return coarsities[a] < coarsities[b];
      return testbed.tasks[a].task_id < testbed.tasks[b].task_id;
    });
    auto file = open_output(quartile_path);
    file << "quartile,count,coarsity_min,coarsity_max\n";
    char lo[32];
    char hi[32];
    for (std::size_t q = 0; q < 4; ++q) {
      const std::size_t begin = order.size() * q / 4;
      const std::size_t end = order.size() * (q + 1) / 4;
      file << q + 1 << ',' << end - begin << ',';
      if (end > begin) {
        std::snprintf(lo, sizeof lo, "%.17g", coarsities[order[begin]]);
        std::snprintf(hi, sizeof hi, "%.17g", coarsities[order[end - 1]]);
        file << lo << ',' << hi;
      } else {
        file << ',';
      }
      file << '\n';
    }
  }

  std::vector<double> sorted = coarsities;
  std::sort(sorted.begin(), sorted.end());
  const double median = sorted.size() % 2 ? sorted[sorted.size() / 2]
                                          : 0.5 * (sorted[sorted.size() / 2 - 1] + sorted[sorted.size() / 2]);
  manifest.config()["bin_width"] = args.bin_width;
  manifest.config()["tasks"] = testbed.tasks.size();
  manifest.config()["median_coarsity"] = median;
  manifest.config()["mean_participation"] =
      static_cast<double>(testbed.config.ways) / static_cast<double>(dm.size());
  for (const auto& p : {histogram_path, participation_path, quartile_path}) manifest.output(p);
  manifest.write(with_suffix(args.out, ".manifest.json"));
  out << "tasks=" << testbed.tasks.size() << " median_coarsity=" << median << '\n';
  return 0;
}

struct EvalArgs {
  std::string testbed;
  std::string embeddings;
  std::string method = "protonet";
  ClassifierSpec classifier;
  std::size_t window = 200;
  std::string out;
  unsigned threads = 0;
};

int cmd_eval(EvalArgs args, int argc, const char* const* argv, std::ostream& out) {
  RunManifest manifest("eval", argc, argv);
  args.classifier.method = parse_method(args.method);
  args.classifier.validate();
  Testbed testbed;
  {
    auto in = open_input(args.testbed);
    testbed = read_testbed_jsonl(in);
  }
  manifest.input(args.testbed);
  const auto store = load_embeddings(args.embeddings);
  manifest.input(args.embeddings);
  const auto report = evaluate_testbed(store, testbed, args.classifier, args.threads);
  const auto rolling = rolling_correlation(report, args.window);

  const auto json_path = with_suffix(args.out, ".json");
  const auto tasks_path = with_suffix(args.out, "_tasks.csv");
  const auto rolling_path = with_suffix(args.out, "_rolling.csv");
  {
    auto file = open_output(json_path);
    write_report_json(file, report, args.window, rolling);
  }
  {
    auto file = open_output(tasks_path);
    write_task_csv(file, report);
  }
  {
    auto file = open_output(rolling_path);
    write_rolling_csv(file, rolling);
  }
  auto& cfg = manifest.config();
  cfg["method"] = args.method;
  cfg["steps"] = args.classifier.steps;
  cfg["learning_rate"] = args.classifier.learning_rate;
  cfg["temperature"] = args.classifier.rectify.temperature;
  cfg["shift_weight"] = args.classifier.rectify.shift_weight;
  cfg["window"] = args.window;
  for (const auto& p : {json_path, tasks_path, rolling_path}) manifest.output(p);
  manifest.write(with_suffix(args.out, ".manifest.json"));
  out << "method=" << args.method << " tasks=" << report.tasks.size() << " top1=" << report.mean_top1 << " +- "
      << report.ci95_top1 << '\n';
  return 0;
}

struct SynthArgs {
  std::string kind = "wordnet";
  std::size_t leaves = 160;
  std::uint64_t seed = 0;
  std::size_t max_per_class = 0;
  synth::EmbeddingShape embedding;
  bool binary = true;
  std::string out_dir;
};

int cmd_synth(const SynthArgs& args, int argc, const char* const* argv, std::ostream& out) {
  RunManifest manifest("synth", argc, argv);
  std::vector<ConceptNode> nodes;
  if (args.kind == "wordnet") {
    synth::DagShape shape;
    shape.leaves = args.leaves;
    nodes = synth::wordnet_like_nodes(shape, args.seed);
  } else if (args.kind == "tree") {
    synth::TreeShape shape;
    shape.leaves = args.leaves;
    nodes = synth::taxonomic_tree_nodes(shape, args.seed);
  } else {
    throw Error(ErrorCode::InvalidConfig, "unknown synth kind '" + args.kind + "'", {args.kind});
  }
  const auto graph = TaxonomyGraph::build(std::move(nodes));
  const fs::path dir(args.out_dir);
  const auto taxonomy_path = dir / "taxonomy.json";
  const auto catalog_path = dir / "catalog.csv";
  const auto embeddings_path = dir / (args.binary ? "embeddings.emb" : "embeddings.csv");
  {
    auto file = open_output(taxonomy_path);
    file << serialize_taxonomy(graph);
  }
  const auto catalog = synth::capped_catalog(graph, args.max_per_class);
  {
    auto file = open_output(catalog_path);
    write_catalog_csv(file, catalog);
  }
  const auto store = synth::hierarchy_embeddings(graph, catalog, args.embedding, args.seed);
  {
    auto file = open_output(embeddings_path);
    if (args.binary) {
      write_embeddings_binary(file, store);
    } else {
      write_embeddings_csv(file, store);
    }
  }
  auto& cfg = manifest.config();
  cfg["kind"] = args.kind;
  cfg["leaves"] = args.leaves;
  cfg["seed"] = args.seed;
  cfg["max_per_class"] = args.max_per_class;
  cfg["dim"] = args.embedding.dim;
  cfg["spread"] = args.embedding.spread;
  cfg["noise"] = args.embedding.noise;
  for (const auto& p : {taxonomy_path, catalog_path, embeddings_path}) manifest.output(p);
  manifest.write(dir / "synth.manifest.json");
  out << "wrote " << graph.node_count() << "-node taxonomy (" << graph.leaf_count() << " classes), "
      << catalog.instance_count() << " instances to " << dir.string() << '\n';
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Semantic few-shot task sampling and evaluation"};
  app.set_version_flag("--version", std::string(SEMTASK_VERSION));
  app.require_subcommand(1);

  DistancesArgs distances;
  auto* distances_cmd = app.add_subcommand("distances", "Export the pairwise class distance matrix as CSV");
  distances_cmd->add_option("--taxonomy", distances.taxonomy, "Taxonomy JSON")->required()->check(CLI::ExistingFile);
  distances_cmd->add_option("--out", distances.out, "Output CSV")->required();
  distances_cmd->add_option("--threads", distances.threads, "Worker threads (default: SEMTASK_THREADS or all cores)");

  SampleArgs sample;
  auto* sample_cmd = app.add_subcommand("sample", "Generate a testbed of few-shot tasks (JSON Lines)");
  sample_cmd->add_option("--taxonomy", sample.taxonomy, "Taxonomy JSON")->required()->check(CLI::ExistingFile);
  sample_cmd->add_option("--catalog", sample.catalog, "Instance catalog CSV (instance_id,class_id)")
      ->check(CLI::ExistingFile);
  sample_cmd->add_option("--strategy", sample.strategy, "uniform or semantic")
      ->check(CLI::IsMember({"uniform", "semantic"}))
      ->capture_default_str();
  sample_cmd->add_option("--alpha", sample.config.alpha, "Semantic affinity")->capture_default_str();
  sample_cmd->add_option("--beta", sample.config.beta, "Occurrence penalty")->capture_default_str();
  sample_cmd->add_option("--ways", sample.config.ways, "Classes per task")->capture_default_str();
  sample_cmd->add_option("--shots", sample.config.shots, "Support instances per class")->capture_default_str();
  sample_cmd->add_option("--queries", sample.config.queries, "Query instances per class")->capture_default_str();
  sample_cmd->add_option("--tasks", sample.config.num_tasks, "Tasks to keep")->capture_default_str();
  sample_cmd->add_option("--oversample", sample.config.oversample_factor, "Candidates drawn per kept task")
      ->capture_default_str();
  sample_cmd->add_option("--seed", sample.config.seed, "Random seed")->capture_default_str();
  sample_cmd->add_option("--out", sample.out, "Output JSONL")->required();

  StatsArgs stats;
  auto* stats_cmd = app.add_subcommand("stats", "Coarsity histogram, class participation and quartiles");
  stats_cmd->add_option("--testbed", stats.testbed, "Testbed JSONL")->required()->check(CLI::ExistingFile);
  stats_cmd->add_option("--distances", stats.distances, "Distance CSV")->required()->check(CLI::ExistingFile);
  stats_cmd->add_option("--bin-width", stats.bin_width, "Histogram bin width")->capture_default_str();
  stats_cmd->add_option("--out", stats.out, "Output prefix")->required();

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a classifier on a testbed from precomputed embeddings");
  eval_cmd->add_option("--testbed", eval.testbed, "Testbed JSONL")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--embeddings", eval.embeddings, "Embeddings (EMB1 binary or CSV)")
      ->required()
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--method", eval.method, "protonet, finetune or bdcspn")
      ->check(CLI::IsMember({"protonet", "finetune", "bdcspn"}))
      ->capture_default_str();
  eval_cmd->add_option("--steps", eval.classifier.steps, "Finetune steps")->capture_default_str();
  eval_cmd->add_option("--lr", eval.classifier.learning_rate, "Finetune learning rate")->capture_default_str();
  eval_cmd->add_option("--temperature", eval.classifier.rectify.temperature, "BD-CSPN softmax temperature")
      ->capture_default_str();
  eval_cmd->add_option("--shift-weight", eval.classifier.rectify.shift_weight, "BD-CSPN prototype shift weight")
      ->capture_default_str();
  eval_cmd->add_option("--window", eval.window, "Rolling window (tasks)")->capture_default_str();
  eval_cmd->add_option("--threads", eval.threads, "Worker threads (default: SEMTASK_THREADS or all cores)");
  eval_cmd->add_option("--out", eval.out, "Output prefix")->required();

  SynthArgs synth_args;
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic taxonomy, catalog and embeddings");
  synth_cmd->add_option("--kind", synth_args.kind, "wordnet (DAG) or tree (fixed depth)")
      ->check(CLI::IsMember({"wordnet", "tree"}))
      ->capture_default_str();
  synth_cmd->add_option("--leaves", synth_args.leaves, "Number of classes")->capture_default_str();
  synth_cmd->add_option("--seed", synth_args.seed, "Random seed")->capture_default_str();
  synth_cmd->add_option("--max-per-class", synth_args.max_per_class, "Cap on cataloged instances per class (0 = all)")
      ->capture_default_str();
  synth_cmd->add_option("--dim", synth_args.embedding.dim, "Embedding dimension")->capture_default_str();
  synth_cmd->add_option("--spread", synth_args.embedding.spread, "Class-mean walk variance per unit of JC distance")
      ->capture_default_str();
  synth_cmd->add_option("--noise", synth_args.embedding.noise, "Instance noise standard deviation")
      ->capture_default_str();
  synth_cmd->add_flag("!--csv", synth_args.binary, "Write embeddings as CSV instead of EMB1");
  synth_cmd->add_option("--out-dir", synth_args.out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*distances_cmd) return cmd_distances(distances, argc, argv, out);
    if (*sample_cmd) return cmd_sample(sample, argc, argv, out);
    if (*stats_cmd) return cmd_stats(stats, argc, argv, out);
    if (*eval_cmd) return cmd_eval(eval, argc, argv, out);
    if (*synth_cmd) return cmd_synth(synth_args, argc, argv, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_status(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  }
  return 2;
}

}  // namespace semtask::cli

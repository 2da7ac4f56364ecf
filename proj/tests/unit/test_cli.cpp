#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "commands.hpp"
#include "helpers.hpp"
#include "semtask/hashing.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int status;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "semtask");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int status = semtask::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {status, out.str(), err.str()};
}

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / ("semtask_cli_" + std::to_string(::getpid()))) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

void write(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

std::size_t lines(const std::string& path) {
  const auto text = semtask::read_file(path);
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

const char* kTwoLeaves = R"({"nodes": [
  {"id": "root", "name": "entity", "parents": [], "instances": 0},
  {"id": "a", "name": "a", "parents": ["root"], "instances": 12},
  {"id": "b", "name": "b", "parents": ["root"], "instances": 12}
]})";

}  // namespace

TEST_CASE("distances command") {
  TempDir dir;
  write(dir / "t.json", kTwoLeaves);
  auto r = cli({"distances", "--taxonomy", dir / "t.json", "--out", dir / "d.csv"});
  REQUIRE(r.status == 0);
  CHECK(lines(dir / "d.csv") == 3);
  const auto first = semtask::read_file(dir / "d.csv");
  REQUIRE(cli({"distances", "--taxonomy", dir / "t.json", "--out", dir / "d.csv"}).status == 0);
  CHECK(semtask::read_file(dir / "d.csv") == first);

  auto manifest = nlohmann::json::parse(semtask::read_file(dir / "d.csv.manifest.json"));
  CHECK(manifest["inputs"][dir / "t.json"] == semtask::sha256_file(dir / "t.json"));
  CHECK(manifest["outputs"][dir / "d.csv"] == semtask::sha256_file(dir / "d.csv"));
  CHECK(manifest["version"] == SEMTASK_VERSION);

  CHECK(lines(std::string(SEMTASK_DATA_DIR) + "/wordnet160/taxonomy.json") > 0);
  REQUIRE(cli({"distances", "--taxonomy", std::string(SEMTASK_DATA_DIR) + "/wordnet160/taxonomy.json", "--out",
               dir / "d160.csv"})
              .status == 0);
  CHECK(lines(dir / "d160.csv") == 161);
}

TEST_CASE("load errors carry file and line context") {
  TempDir dir;
  write(dir / "bad.json", "{\"nodes\": [\n  {\"id\": \"r\", \"name\": \"r\", \"parents\": [], \"instances\": 0},\n"
                          "  {\"id\": \"x\", \"name\": \"x\", \"parents\": [\"ghost\"], \"instances\": 1}\n]}\n");
  auto r = cli({"distances", "--taxonomy", dir / "bad.json", "--out", dir / "d.csv"});
  CHECK(r.status == 2);
  CHECK(r.err.find("UnknownParent") != std::string::npos);
  CHECK(r.err.find("bad.json:3") != std::string::npos);
  CHECK(r.err.find("ghost") != std::string::npos);

  write(dir / "syntax.json", "{\"nodes\": [\n\n  {,}\n]}");
  auto s = cli({"distances", "--taxonomy", dir / "syntax.json", "--out", dir / "d.csv"});
  CHECK(s.status == 2);
  CHECK(s.err.find("line 3") != std::string::npos);
}

TEST_CASE("sample, stats and eval pipeline") {
  TempDir dir;
  const std::string data = std::string(SEMTASK_DATA_DIR) + "/wordnet160/";
  auto sample = [&](const std::string& out, const std::string& strategy) {
    return cli({"sample", "--taxonomy", data + "taxonomy.json", "--catalog", data + "catalog.csv", "--strategy",
                strategy, "--tasks", "400", "--seed", "3", "--out", out});
  };
  REQUIRE(sample(dir / "a.jsonl", "semantic").status == 0);
  REQUIRE(sample(dir / "b.jsonl", "semantic").status == 0);
  CHECK(semtask::read_file(dir / "a.jsonl") == semtask::read_file(dir / "b.jsonl"));
  CHECK(lines(dir / "a.jsonl") == 401);
  auto header = nlohmann::json::parse(semtask::read_file(dir / "a.jsonl").substr(0, semtask::read_file(dir / "a.jsonl").find('\n')));
  CHECK(header["config"]["alpha"] == 0.383);
  CHECK(header["config"]["beta"] == 100.0);
  CHECK(header["config"]["queries"] == 10);
  CHECK(header["candidates_drawn"] == 800);
  CHECK(header["taxonomy_sha256"] == semtask::sha256_file(data + "taxonomy.json"));

  REQUIRE(cli({"distances", "--taxonomy", data + "taxonomy.json", "--out", dir / "d.csv"}).status == 0);
  REQUIRE(cli({"stats", "--testbed", dir / "a.jsonl", "--distances", dir / "d.csv", "--out", dir / "s"}).status == 0);
  std::istringstream hist(semtask::read_file(dir / "s_histogram.csv"));
  std::string line;
  std::getline(hist, line);
  CHECK(line == "bin_start,bin_end,count");
  std::size_t total = 0;
  while (std::getline(hist, line)) total += std::stoul(line.substr(line.rfind(',') + 1));
  CHECK(total == 400);
  CHECK(lines(dir / "s_participation.csv") == 161);
  CHECK(lines(dir / "s_quartiles.csv") == 5);

  auto r = cli({"eval", "--testbed", dir / "a.jsonl", "--embeddings", data + "embeddings.emb", "--method", "finetune",
                "--window", "200", "--out", dir / "e"});
  REQUIRE(r.status == 0);
  CHECK(lines(dir / "e_rolling.csv") == 1 + 400 - 199);
  CHECK(lines(dir / "e_tasks.csv") == 401);
  auto report = nlohmann::json::parse(semtask::read_file(dir / "e.json"));
  CHECK(report["hyperparameters"]["steps"] == 10);
  CHECK(report["hyperparameters"]["learning_rate"] == 0.001);
  auto manifest = nlohmann::json::parse(semtask::read_file(dir / "e.manifest.json"));
  CHECK(manifest["inputs"][data + "embeddings.emb"] == semtask::sha256_file(data + "embeddings.emb"));
  CHECK(manifest["outputs"][dir / "e.json"] == semtask::sha256_file(dir / "e.json"));
}

TEST_CASE("exit statuses") {
  TempDir dir;
  CHECK(cli({}).status == 2);
  CHECK(cli({"sample", "--taxonomy"}).status == 2);
  CHECK(cli({"--version"}).status == 0);

  write(dir / "six.json", R"({"nodes": [{"id": "r", "name": "r", "parents": [], "instances": 0},
    {"id": "a", "name": "a", "parents": ["r"], "instances": 20}, {"id": "b", "name": "b", "parents": ["r"], "instances": 20},
    {"id": "c", "name": "c", "parents": ["r"], "instances": 20}, {"id": "d", "name": "d", "parents": ["r"], "instances": 20},
    {"id": "e", "name": "e", "parents": ["r"], "instances": 20}, {"id": "f", "name": "f", "parents": ["r"], "instances": 20}]})");
  auto few = cli({"sample", "--taxonomy", dir / "six.json", "--tasks", "10", "--out", dir / "t.jsonl"});
  CHECK(few.status == 3);
  CHECK(few.err.find("NotEnoughUniqueTasks") != std::string::npos);
  CHECK(few.err.find("only 6 unique") != std::string::npos);

  auto ways = cli({"sample", "--taxonomy", dir / "six.json", "--ways", "7", "--out", dir / "t.jsonl"});
  CHECK(ways.status == 2);
  CHECK(ways.err.find("InvalidConfig") != std::string::npos);

  write(dir / "t.json", kTwoLeaves);
  REQUIRE(cli({"sample", "--taxonomy", dir / "t.json", "--ways", "2", "--tasks", "1", "--out", dir / "t.jsonl"}).status == 0);
  write(dir / "e.csv", "a/0,a,1,2\n");
  auto missing = cli({"eval", "--testbed", dir / "t.jsonl", "--embeddings", dir / "e.csv", "--window", "1", "--out", dir / "r"});
  CHECK(missing.status == 2);
  CHECK(missing.err.find("MissingInstance") != std::string::npos);
  CHECK(missing.err.find("task 0") != std::string::npos);
}

TEST_CASE("synth command") {
  TempDir dir;
  REQUIRE(cli({"synth", "--kind", "tree", "--leaves", "30", "--max-per-class", "12", "--dim", "4", "--csv", "--out-dir",
               dir / "syn"})
              .status == 0);
  CHECK(lines(dir / "syn/catalog.csv") == 1 + 30 * 12);
  CHECK(lines(dir / "syn/embeddings.csv") == 1 + 30 * 12);
  CHECK(fs::exists(dir / "syn/synth.manifest.json"));
}

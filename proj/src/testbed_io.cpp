#include "semtask/testbed_io.hpp"

#include <istream>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "semtask/error.hpp"

namespace semtask {

namespace {

using ojson = nlohmann::ordered_json;

ojson config_to_json(const SamplerConfig& c) {
  ojson j;
  j["ways"] = c.ways;
  j["shots"] = c.shots;
  j["queries"] = c.queries;
  j["tasks"] = c.num_tasks;
  j["oversample"] = c.oversample_factor;
  j["alpha"] = c.alpha;
  j["beta"] = c.beta;
  j["strategy"] = to_string(c.strategy);
  j["seed"] = c.seed;
  return j;
}

SamplerConfig config_from_json(const ojson& j) {
  SamplerConfig c;
  c.ways = j.at("ways").get<std::size_t>();
  c.shots = j.at("shots").get<std::size_t>();
  c.queries = j.at("queries").get<std::size_t>();
  c.num_tasks = j.at("tasks").get<std::size_t>();
  c.oversample_factor = j.at("oversample").get<std::size_t>();
  c.alpha = j.at("alpha").get<double>();
  c.beta = j.at("beta").get<double>();
  c.strategy = parse_strategy(j.at("strategy").get<std::string>());
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

}  // namespace

void write_testbed_jsonl(std::ostream& out, const Testbed& testbed) {
  ojson header;
  header["config"] = config_to_json(testbed.config);
  header["taxonomy_sha256"] = testbed.provenance.taxonomy_sha256;
  header["strategy"] = to_string(testbed.provenance.strategy);
  header["seed"] = testbed.provenance.seed;
  header["warnings"] = testbed.provenance.warnings;
  header["candidates_drawn"] = testbed.provenance.candidates_drawn;
  header["unique_candidates"] = testbed.provenance.unique_candidates;
  out << header.dump() << '\n';

  for (const auto& task : testbed.tasks) {
    ojson line;
    line["task_id"] = task.task_id;
    line["classes"] = task.class_ids;
    auto& support = line["support"] = ojson::object();
    auto& query = line["query"] = ojson::object();
    for (std::size_t i = 0; i < task.class_ids.size(); ++i) {
      support[task.class_ids[i]] = task.support[i];
      query[task.class_ids[i]] = task.query[i];
    }
    line["coarsity"] = task.coarsity;
    out << line.dump() << '\n';
  }
}

Testbed read_testbed_jsonl(std::istream& in) {
  Testbed testbed;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  try {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const auto j = ojson::parse(line);
      if (!have_header) {
        testbed.config = config_from_json(j.at("config"));
        testbed.provenance.taxonomy_sha256 = j.value("taxonomy_sha256", "");
        testbed.provenance.strategy = parse_strategy(j.at("strategy").get<std::string>());
        testbed.provenance.seed = j.at("seed").get<std::uint64_t>();
        testbed.provenance.warnings = j.value("warnings", std::vector<std::string>{});
        testbed.provenance.candidates_drawn = j.value("candidates_drawn", std::size_t{0});
        testbed.provenance.unique_candidates = j.value("unique_candidates", std::size_t{0});
        have_header = true;
        continue;
      }
      TaskSpec task;
      task.task_id = j.at("task_id").get<std::uint64_t>();
      task.class_ids = j.at("classes").get<std::vector<std::string>>();
      for (const auto& cls : task.class_ids) {
        task.support.push_back(j.at("support").at(cls).get<std::vector<std::string>>());
        task.query.push_back(j.at("query").at(cls).get<std::vector<std::string>>());
      }
      task.coarsity = j.at("coarsity").get<double>();
      testbed.tasks.push_back(std::move(task));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedInput, "testbed line " + std::to_string(line_no) + ": " + e.what());
  }
  if (!have_header) throw Error(ErrorCode::MalformedInput, "testbed has no header line");
  return testbed;
}

}  // namespace semtask

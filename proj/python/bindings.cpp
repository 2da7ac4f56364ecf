#include <fstream>
#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/numpy.h>
#include <pybind11/stl.h>

#include "semtask/catalog.hpp"
#include "semtask/classifiers.hpp"
#include "semtask/embeddings.hpp"
#include "semtask/error.hpp"
#include "semtask/report.hpp"
#include "semtask/sampler.hpp"
#include "semtask/semantics.hpp"
#include "semtask/taxonomy.hpp"
#include "semtask/testbed_io.hpp"

namespace py = pybind11;
using namespace semtask;

namespace {

InstanceCatalog catalog_for(const TaxonomyGraph& graph, const std::optional<std::string>& path) {
  if (!path) return catalog_from_counts(graph);
  std::ifstream in(*path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + *path, {*path});
  auto catalog = read_catalog_csv(in);
  catalog.validate_against(graph);
  return catalog;
}

py::dict task_dict(const TaskSpec& t) {
  py::dict d;
  d["task_id"] = t.task_id;
  d["classes"] = t.class_ids;
  d["support"] = t.support;
  d["query"] = t.query;
  d["coarsity"] = t.coarsity;
  return d;
}

}  // namespace

PYBIND11_MODULE(_semtask, m) {
  m.doc() = "Semantic few-shot task sampling and evaluation";
  m.attr("__version__") = SEMTASK_VERSION;

  // Message starts with the error code name, e.g. "CycleDetected: ...".
  py::register_exception<Error>(m, "SemtaskError", PyExc_ValueError);

  py::class_<TaxonomyGraph>(m, "Taxonomy")
      .def_static("from_file", [](const std::string& path) { return load_taxonomy_file(path); }, py::arg("path"))
      .def_static("from_json", [](const std::string& text) { return load_taxonomy(text); }, py::arg("text"))
      .def_property_readonly("leaf_ids", &TaxonomyGraph::leaf_class_ids)
      .def_property_readonly("root", [](const TaxonomyGraph& g) { return g.root().id; })
      .def_property_readonly("sha256", &TaxonomyGraph::source_sha256)
      .def("__len__", &TaxonomyGraph::node_count)
      .def("cumulative_count", py::overload_cast<std::string_view>(&TaxonomyGraph::cumulative_count, py::const_))
      .def("lowest_superordinate", &TaxonomyGraph::lowest_superordinate)
      .def("ancestor_set", &TaxonomyGraph::ancestor_set)
      .def("to_json", &serialize_taxonomy);

  py::class_<DistanceMatrix>(m, "DistanceMatrix")
      .def_property_readonly("class_ids", &DistanceMatrix::class_ids)
      .def_property_readonly("values",
                             [](const DistanceMatrix& dm) {
                               py::array_t<double> a({dm.size(), dm.size()});
                               std::copy(dm.values().begin(), dm.values().end(), a.mutable_data());
                               return a;
                             })
      .def("__len__", &DistanceMatrix::size)
      .def("__call__", [](const DistanceMatrix& dm, const std::string& a, const std::string& b) {
        return dm(dm.index_of(a), dm.index_of(b));
      })
      .def("coarsity", [](const DistanceMatrix& dm, const std::vector<std::string>& ids) { return coarsity(dm, ids); });

  m.def("jc_distance", &jc_distance, py::arg("taxonomy"), py::arg("c1"), py::arg("c2"));
  m.def("distance_matrix", &distance_matrix, py::arg("taxonomy"), py::arg("threads") = 0);

  m.def(
      "sample_testbed",
      [](const TaxonomyGraph& graph, std::optional<std::string> catalog, const std::string& strategy, std::size_t ways,
         std::size_t shots, std::size_t queries, std::size_t tasks, std::size_t oversample, double alpha, double beta,
         std::uint64_t seed) {
        SamplerConfig config{ways, shots, queries, tasks, oversample, alpha, beta, parse_strategy(strategy), seed};
        const auto dm = distance_matrix(graph);
        Testbed tb;
        {
          py::gil_scoped_release release;
          tb = generate_testbed(graph, dm, catalog_for(graph, catalog), config);
        }
        std::ostringstream out;
        write_testbed_jsonl(out, tb);
        return out.str();
      },
      py::arg("taxonomy"), py::arg("catalog") = py::none(), py::arg("strategy") = "semantic", py::arg("ways") = 5,
      py::arg("shots") = 1, py::arg("queries") = 10, py::arg("tasks") = 5000, py::arg("oversample") = 2,
      py::arg("alpha") = 0.383, py::arg("beta") = 100.0, py::arg("seed") = 0,
      "Testbed as JSON Lines text (header line, then one task per line).");

  m.def(
      "read_tasks",
      [](const std::string& jsonl) {
        std::istringstream in(jsonl);
        py::list out;
        for (const auto& t : read_testbed_jsonl(in).tasks) out.append(task_dict(t));
        return out;
      },
      py::arg("jsonl"));

  m.def(
      "evaluate",
      [](const std::string& jsonl, const std::string& embeddings, const std::string& method, std::size_t steps,
         double lr, double temperature, double shift_weight, std::size_t window) {
        std::istringstream in(jsonl);
        const auto tb = read_testbed_jsonl(in);
        const auto store = load_embeddings(embeddings);
        ClassifierSpec spec{parse_method(method), steps, lr, {temperature, shift_weight}};
        spec.validate();
        EvalReport report;
        std::vector<RollingPoint> rolling;
        {
          py::gil_scoped_release release;
          report = evaluate_testbed(store, tb, spec);
          rolling = rolling_correlation(report, window);
        }
        py::dict d;
        d["mean_top1"] = report.mean_top1;
        d["ci95_top1"] = report.ci95_top1;
        if (report.mean_top5) d["mean_top5"] = *report.mean_top5;
        py::list quartiles;
        for (const auto& q : report.quartiles) quartiles.append(q.mean_top1 ? py::cast(*q.mean_top1) : py::none());
        d["quartile_top1"] = quartiles;
        std::vector<double> c, a, rc, ra;
        for (const auto& r : report.tasks) {
          c.push_back(r.coarsity);
          a.push_back(r.top1);
        }
        for (const auto& p : rolling) {
          rc.push_back(p.coarsity);
          ra.push_back(p.accuracy);
        }
        d["task_coarsity"] = py::array(py::cast(c));
        d["task_top1"] = py::array(py::cast(a));
        d["rolling_coarsity"] = py::array(py::cast(rc));
        d["rolling_top1"] = py::array(py::cast(ra));
        return d;
      },
      py::arg("testbed"), py::arg("embeddings"), py::arg("method") = "protonet", py::arg("steps") = 10,
      py::arg("lr") = 1e-3, py::arg("temperature") = 1.0, py::arg("shift_weight") = 0.5, py::arg("window") = 200);
}

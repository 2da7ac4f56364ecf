#include <cmath>
#include <random>
#include <sstream>

#include "helpers.hpp"
#include "oracles.hpp"
#include "semtask/semantics.hpp"
#include "semtask/synth.hpp"

using namespace semtask;
using testing::node;

TEST_CASE("jc distance hand values") {
  auto g = testing::two_leaves(10);
  CHECK(jc_distance(g, "c1", "c1") == 0.0);
  CHECK(jc_distance(g, "c1", "c2") == doctest::Approx(1.3863).epsilon(1e-4));
  CHECK(jc_distance(g, "c1", "c2") == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-15));
  CHECK_ERROR_CODE(jc_distance(g, "c1", "root"), ErrorCode::UnknownClass);
}

TEST_CASE("distance matrix of two leaves") {
  auto dm = distance_matrix(testing::two_leaves(10));
  REQUIRE(dm.size() == 2);
  CHECK(dm(0, 0) == 0.0);
  CHECK(dm(1, 1) == 0.0);
  CHECK(dm(0, 1) == dm(1, 0));
  CHECK(dm(0, 1) == doctest::Approx(2.0 * std::log(2.0)));
}

TEST_CASE("distance matrix matches pairwise recomputation and is thread independent") {
  auto g = TaxonomyGraph::build(synth::wordnet_like_nodes({}, 3));
  auto dm = distance_matrix(g, 1);
  CHECK(dm == distance_matrix(g, 4));
  oracle::BruteTaxonomy brute(std::vector<ConceptNode>(g.nodes().begin(), g.nodes().end()));
  std::mt19937_64 gen(5);
  std::uniform_int_distribution<std::size_t> pick(0, dm.size() - 1);
  for (int s = 0; s < 100; ++s) {
    const auto i = pick(gen);
    const auto j = pick(gen);
    const auto& ids = dm.class_ids();
    CHECK(dm(i, j) == jc_distance(g, ids[i], ids[j]));
    CHECK(dm(i, j) == brute.jc(ids[i], ids[j]));
  }
  for (std::size_t i = 0; i < dm.size(); ++i) {
    CHECK(dm(i, i) == 0.0);
    for (std::size_t j = 0; j < dm.size(); ++j) {
      CHECK(dm(i, j) == dm(j, i));
      CHECK(std::isfinite(dm(i, j)));
      CHECK(dm(i, j) >= 0.0);
    }
  }
}

TEST_CASE("siblings in a genus are closer than leaves across kingdoms") {
  auto g = TaxonomyGraph::build(synth::taxonomic_tree_nodes({}, 11));
  CHECK(g.leaf_count() == 1604);
  // find a genus with two species, and two species under different kingdoms
  std::string s1, s2, far1, far2;
  for (std::size_t v = 0; v < g.node_count() && s1.empty(); ++v) {
    const auto& kids = g.children(v);
    if (g.nodes()[v].id.rfind("genus_", 0) == 0 && kids.size() >= 2) {
      s1 = g.nodes()[kids[0]].id;
      s2 = g.nodes()[kids[1]].id;
    }
  }
  const auto& kingdoms = g.children(g.root_index());
  REQUIRE(kingdoms.size() >= 2);
  for (const auto& leaf : g.leaf_class_ids()) {
    const auto idx = *g.find(leaf);
    if (far1.empty() && g.is_ancestor(kingdoms[0], idx)) far1 = leaf;
    if (far2.empty() && g.is_ancestor(kingdoms[1], idx)) far2 = leaf;
  }
  REQUIRE(!s1.empty());
  CHECK(jc_distance(g, s1, s2) < jc_distance(g, far1, far2));
}

TEST_CASE("a higher-count ancestor would give a larger value") {
  auto g = TaxonomyGraph::build(
      {node("root"), node("A", {"root"}), node("c1", {"A"}, 3), node("c2", {"A"}, 4), node("c3", {"root"}, 5)});
  const double with_lso = jc_distance(g, "c1", "c2");
  const double with_root = 2.0 * std::log(static_cast<double>(g.cumulative_count("root"))) - std::log(3.0) - std::log(4.0);
  CHECK(with_root > with_lso);
}

TEST_CASE("coarsity") {
  DistanceMatrix two({"a", "b"}, {0, 3, 3, 0});
  const std::vector<std::string> ab{"a", "b"};
  CHECK(coarsity(two, ab) == 9.0);

  const double d = 1.7;
  std::vector<double> v(16, d);
  for (int i = 0; i < 4; ++i) v[i * 5] = 0.0;
  DistanceMatrix flat({"a", "b", "c", "d"}, v);
  const std::vector<std::string> all{"a", "b", "c", "d"};
  CHECK(coarsity(flat, all) == doctest::Approx(d * d));

  DistanceMatrix three({"a", "b", "c"}, {0, 1, 2, 1, 0, 4, 2, 4, 0});
  const std::vector<std::string> p1{"a", "b", "c"};
  const std::vector<std::string> p2{"c", "a", "b"};
  CHECK(coarsity(three, p1) == doctest::Approx((1.0 + 4.0 + 16.0) / 3.0));
  CHECK(coarsity(three, p1) == coarsity(three, p2));

  const std::vector<std::string> one{"a"};
  const std::vector<std::string> dup{"a", "a"};
  const std::vector<std::string> unknown{"a", "q"};
  CHECK_ERROR_CODE(coarsity(three, one), ErrorCode::SingletonClassSet);
  CHECK_ERROR_CODE(coarsity(three, dup), ErrorCode::SingletonClassSet);
  CHECK_ERROR_CODE(coarsity(three, unknown), ErrorCode::UnknownClass);
}

TEST_CASE("distance matrix validation and CSV round trip") {
  CHECK_ERROR_CODE(DistanceMatrix({"a", "b"}, {0, 1, 2, 0}), ErrorCode::MalformedInput);
  CHECK_ERROR_CODE(DistanceMatrix({"a", "b"}, {1, 1, 1, 0}), ErrorCode::MalformedInput);
  CHECK_ERROR_CODE(DistanceMatrix({"a", "b"}, {0, -1, -1, 0}), ErrorCode::MalformedInput);
  CHECK_ERROR_CODE(DistanceMatrix({"a", "a"}, {0, 1, 1, 0}), ErrorCode::MalformedInput);

  auto dm = distance_matrix(TaxonomyGraph::build(synth::wordnet_like_nodes({.leaves = 12}, 1)));
  std::stringstream csv;
  write_distance_csv(csv, dm);
  const auto text = csv.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 13);
  std::istringstream back(text);
  CHECK(read_distance_csv(back) == dm);
}

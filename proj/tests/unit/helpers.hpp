#pragma once

#include <string>
#include <vector>

#include <doctest.h>

#include "semtask/error.hpp"
#include "semtask/taxonomy.hpp"

namespace testing {

inline semtask::ConceptNode node(std::string id, std::vector<std::string> parents = {}, std::uint64_t count = 0) {
  return {id, id, std::move(parents), count};
}

// root -> {c1, c2}, both with `count` instances.
inline semtask::TaxonomyGraph two_leaves(std::uint64_t count = 10) {
  return semtask::TaxonomyGraph::build({node("root"), node("c1", {"root"}, count), node("c2", {"root"}, count)});
}

template <class F>
semtask::Error capture_error(F&& f) {
  try {
    f();
  } catch (const semtask::Error& e) {
    return e;
  }
  FAIL("expected semtask::Error");
  return semtask::Error(semtask::ErrorCode::IoError, "unreachable");
}

}  // namespace testing

#define CHECK_ERROR_CODE(expr, expected) CHECK(::testing::capture_error([&] { (void)(expr); }).code() == (expected))

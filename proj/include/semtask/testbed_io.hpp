#pragma once

#include <iosfwd>

#include "semtask/sampler.hpp"

namespace semtask {

/// JSON Lines: a header object {"config", "taxonomy_sha256", "strategy",
/// "seed", "warnings", ...} followed by one task object per line
/// {"task_id", "classes", "support", "query", "coarsity"}.
/// Output is a pure function of the testbed (no timestamps).
void write_testbed_jsonl(std::ostream& out, const Testbed& testbed);
Testbed read_testbed_jsonl(std::istream& in);

}  // namespace semtask

#include <atomic>
#include <cmath>
#include <numeric>
#include <sstream>

#include "helpers.hpp"
#include "semtask/catalog.hpp"
#include "semtask/csv.hpp"
#include "semtask/hashing.hpp"
#include "semtask/parallel.hpp"
#include "semtask/rng.hpp"

using namespace semtask;

TEST_CASE("rng is reproducible and streams are separate") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
  auto s1 = Rng::substream(42, Stream::ClassDraws);
  auto s2 = Rng::substream(42, Stream::InstanceDraws);
  auto s3 = Rng::substream(42, Stream::InstanceDraws, 1);
  const auto x1 = s1.next(), x2 = s2.next(), x3 = s3.next();
  CHECK(x1 != x2);
  CHECK(x2 != x3);
  // splitmix64 reference value for seed 0
  CHECK(splitmix64(0) == 0xe220a8397b1dcdafULL);
}

TEST_CASE("rng derived draws") {
  Rng rng(1);
  std::vector<std::size_t> bins(7, 0);
  double sum = 0.0, sq = 0.0;
  const int n = 70000;
  for (int i = 0; i < n; ++i) {
    const auto k = rng.below(7);
    REQUIRE(k < 7);
    ++bins[k];
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    const double z = rng.normal();
    sum += z;
    sq += z * z;
  }
  for (auto c : bins) CHECK(std::abs(static_cast<double>(c) - n / 7.0) < 5 * std::sqrt(n / 7.0));
  CHECK(std::abs(sum / n) < 0.02);
  CHECK(std::abs(sq / n - 1.0) < 0.03);
}

TEST_CASE("sha256") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK_ERROR_CODE(read_file("/nonexistent/semtask"), ErrorCode::IoError);
}

TEST_CASE("csv fields") {
  std::istringstream in("a,\"b,c\",\"d\"\"e\"\n\nx,y\n");
  csv::Reader reader(in);
  std::vector<std::string> f;
  REQUIRE(reader.next(f));
  CHECK(f == std::vector<std::string>{"a", "b,c", "d\"e"});
  REQUIRE(reader.next(f));
  CHECK(f == std::vector<std::string>{"x", "y"});
  CHECK(reader.line() == 3);
  CHECK_FALSE(reader.next(f));
  CHECK(csv::escape("p,q") == "\"p,q\"");
  CHECK(csv::escape("plain") == "plain");
  CHECK_ERROR_CODE(csv::parse_double("1.5x", 4), ErrorCode::MalformedInput);
}

TEST_CASE("catalog") {
  std::istringstream in("instance_id,class_id\ni1,a\ni2,a\ni3,b\n");
  auto catalog = read_catalog_csv(in);
  CHECK(catalog.instance_count() == 3);
  CHECK(catalog.instances("a") == std::vector<std::string>{"i1", "i2"});
  CHECK(catalog.class_of("i3") == "b");
  CHECK_ERROR_CODE(catalog.instances("z"), ErrorCode::UnknownClass);
  CHECK_ERROR_CODE(catalog.add("i1", "b"), ErrorCode::DuplicateInstance);
  std::ostringstream out;
  write_catalog_csv(out, catalog);
  std::istringstream back(out.str());
  CHECK(read_catalog_csv(back).instances("b") == catalog.instances("b"));

  auto g = testing::two_leaves(3);
  CHECK_ERROR_CODE(catalog.validate_against(g), ErrorCode::UnknownClass);
  auto counted = catalog_from_counts(g);
  CHECK(counted.instances("c2") == std::vector<std::string>{"c2/0", "c2/1", "c2/2"});
  counted.validate_against(g);
}

TEST_CASE("parallel_for covers every index and rethrows") {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  CHECK(std::accumulate(hits.begin(), hits.end(), 0) == 1000);
  CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  CHECK_THROWS_AS(parallel_for(10, 3, [](std::size_t i) {
                    if (i == 7) throw Error(ErrorCode::IoError, "boom");
                  }),
                  Error);
  CHECK(default_thread_count() >= 1);
}

#include "doctest.h"
#include "dcgkit/hc.hpp"
#include "dcgkit/io.hpp"
#include "dcgkit/newick.hpp"
#include "support.hpp"

using namespace dcgkit;

TEST_CASE("matrix csv kinds are inferred") {
  CHECK(io::matrix_from_csv(",a,b\nr,0,1\n").kind() == MatrixKind::binary);
  CHECK(io::matrix_from_csv(",a,b\nr,1,6\n").kind() == MatrixKind::coded);
  CHECK(io::matrix_from_csv(",a,b\nr,1.5,6\n").kind() == MatrixKind::real);
  const auto letters = io::matrix_from_csv(",a,b,c,d\nr,A,g,C,T\n");
  CHECK(letters.kind() == MatrixKind::coded);
  CHECK(letters.vector_along(Axis::rows, 0) == std::vector<double>{1, 2, 5, 6});
}

TEST_CASE("gaps, quoting and errors") {
  const auto m = io::matrix_from_csv("id,\"a,1\",b\nr1,,-\nr2,1,2\n");
  CHECK(m.col_labels()[0] == "a,1");
  CHECK(m.is_gap(0, 0));
  CHECK(m.is_gap(0, 1));
  CHECK_FALSE(m.is_gap(1, 0));
  CHECK_THROWS_WITH_AS(io::matrix_from_csv(",a\nr,x\n"), doctest::Contains("row 1, col 1"), InputError);
  CHECK_THROWS_AS(io::matrix_from_csv(",a,b\nr,1\n"), InputError);
  CHECK_THROWS_AS(io::matrix_from_csv(",a\n"), InputError);
}

TEST_CASE("matrix csv round trip") {
  const auto m = io::matrix_from_csv("id,\"a,1\",b\nr1,,0.25\nr2,1,2\n");
  CHECK(io::matrix_from_csv(io::matrix_to_csv(m, "id")) == m);
}

TEST_CASE("distance csv round trip and validation") {
  const auto d = testing::random_distance(6, 1);
  CHECK(io::distance_from_csv(io::distance_to_csv(d)) == d);
  CHECK_THROWS_AS(io::distance_from_csv(",a,b\na,0,1\nc,1,0\n"), InputError);
  CHECK_THROWS_AS(io::distance_from_csv(",a,b\na,0,1\nb,2,0\n"), InputError);
}

TEST_CASE("newick write and parse round trip") {
  const ClusterTree t({"a", "b c", "d", "e"},
                      {{3.0, Partition::single(4)}, {2.0, Partition({0, 0, 1, 1})}, {0.5, Partition({0, 1, 2, 2})}});
  const std::string s = newick::write(t);
  CHECK(s == "(((a:0.5):1.5,('b c':0.5):1.5):1,((d:0.5,e:0.5):1.5):1);");
  CHECK(newick::parse(s) == t);
}

TEST_CASE("newick with an open top level keeps the root height") {
  const ClusterTree t(testing::names(4), {{1.0, Partition({0, 0, 1, 1})}, {0.0, Partition::singletons(4)}}, 5.0);
  const auto back = newick::parse(newick::write(t));
  // the implicit root comes back as an explicit single-cluster level
  REQUIRE(back.level_count() == 3);
  CHECK(back.level(0).height == 5.0);
  CHECK(back.level(1) == t.level(0));
  CHECK(back.level(2) == t.level(1));
  CHECK(back.cophenetic() == t.cophenetic());
}

TEST_CASE("newick round trip of hc trees with a leaf order") {
  for (std::uint64_t seed = 0; seed < 100; ++seed)
    for (auto linkage : {hc::Linkage::single, hc::Linkage::complete, hc::Linkage::average}) {
      const auto d = testing::random_distance(3 + seed % 18, seed);
      const auto t = hc::full_tree(hc::hc_build(d, linkage));
      const auto back = newick::parse(newick::write(t), d.labels());
      CHECK(back == t);
    }
}

TEST_CASE("newick parse errors") {
  CHECK_THROWS_AS(newick::parse("(a:1,b:1)"), InputError);
  CHECK_THROWS_AS(newick::parse("((a:1,b:1):1,c:2);"), InputError);  // ragged depth
  CHECK_THROWS_AS(newick::parse("(a,b);"), InputError);               // no lengths
}

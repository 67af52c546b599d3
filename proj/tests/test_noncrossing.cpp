#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "core/noncrossing.hpp"

using namespace bandloop;

namespace {

// Brute force over all chord subsets, for cross-checking the enumerator.
long count_noncrossing_brute(int n) {
  const auto pool = admissible_chords(n);
  require(pool.size() <= 22, "brute force too large");
  long count = 0;
  for (unsigned long mask = 0; mask < (1ul << pool.size()); ++mask) {
    ChordSet set;
    for (std::size_t p = 0; p < pool.size(); ++p)
      if ((mask >> p) & 1ul) set.push_back(pool[p]);
    if (is_noncrossing(set)) ++count;
  }
  return count;
}

}  // namespace

TEST_CASE("admissible chords exclude neighboring edges") {
  CHECK(admissible_chords(2).empty());
  CHECK(admissible_chords(3).empty());
  const auto four = admissible_chords(4);
  REQUIRE(four.size() == 2);
  CHECK(four[0] == Chord{1, 3});
  CHECK(four[1] == Chord{2, 4});
  CHECK(admissible_chords(5).size() == 5);
}

TEST_CASE("non-crossing counts: 1, 3, 11 for n = 3, 4, 5") {
  CHECK(enumerate_noncrossing(3).size() == 1);
  CHECK(enumerate_noncrossing(4).size() == 3);
  CHECK(enumerate_noncrossing(5).size() == 11);
}

TEST_CASE("enumeration is deterministic, unique and matches brute force") {
  for (int n = 2; n <= 7; ++n) {
    const auto sets = enumerate_noncrossing(n);
    CHECK(static_cast<long>(sets.size()) == count_noncrossing_brute(n));
    CHECK(sets.front().empty());
    std::set<ChordSet> unique(sets.begin(), sets.end());
    CHECK(unique.size() == sets.size());
    for (const auto& s : sets) CHECK(is_noncrossing(s));
    const auto again = enumerate_noncrossing(n);
    CHECK(again == sets);
  }
}

TEST_CASE("crossing predicate follows strict interleaving on the line") {
  CHECK(chords_cross(Chord{1, 3}, Chord{2, 4}));
  CHECK(chords_cross(Chord{2, 4}, Chord{1, 3}));
  CHECK_FALSE(chords_cross(Chord{1, 4}, Chord{4, 6}));  // shared endpoint
  CHECK_FALSE(chords_cross(Chord{1, 4}, Chord{2, 4}));  // nested, shared endpoint
  CHECK_FALSE(chords_cross(Chord{1, 5}, Chord{2, 4}));  // nested
  CHECK_FALSE(chords_cross(Chord{1, 3}, Chord{4, 6}));  // disjoint
}

TEST_CASE("star partition: one face holding every vertex") {
  const PartitionTree star = build_partition_tree(4, {});
  CHECK(star.face_count == 1);
  CHECK(star.internal_edges.empty());
  for (int v = 1; v <= 4; ++v) CHECK(star.face_of_vertex[v - 1] == 0);
  CHECK(star.face_rep[0] == 1);
}

TEST_CASE("single chord splits the square into two faces") {
  const PartitionTree tree = build_partition_tree(4, {{1, 3}});
  CHECK(tree.face_count == 2);
  // Chord {1,3} encloses vertices 1, 2; the rest stay in the outer face.
  CHECK(tree.face_of_vertex[0] == 1);
  CHECK(tree.face_of_vertex[1] == 1);
  CHECK(tree.face_of_vertex[2] == 0);
  CHECK(tree.face_of_vertex[3] == 0);
  REQUIRE(tree.internal_edges.size() == 1);
  CHECK(tree.internal_edges[0].inner_face == 1);
  CHECK(tree.internal_edges[0].outer_face == 0);
  CHECK(tree.face_rep[1] == 1);
  CHECK(tree.face_rep[0] == 3);
}

TEST_CASE("hexagon with chords {1,4} and {4,6} reproduces the known face list") {
  const PartitionTree tree = build_partition_tree(6, {{1, 4}, {4, 6}});
  CHECK(tree.face_count == 3);
  // Faces: {1,2,3} inside chord {1,4}; {4,5} inside chord {4,6}; {6} outside.
  CHECK(tree.face_of_vertex[0] == 1);
  CHECK(tree.face_of_vertex[1] == 1);
  CHECK(tree.face_of_vertex[2] == 1);
  CHECK(tree.face_of_vertex[3] == 2);
  CHECK(tree.face_of_vertex[4] == 2);
  CHECK(tree.face_of_vertex[5] == 0);
  REQUIRE(tree.internal_edges.size() == 2);
  // Both chords attach to the outer face {6}.
  CHECK(tree.internal_edges[0].inner_face == 1);
  CHECK(tree.internal_edges[0].outer_face == 0);
  CHECK(tree.internal_edges[1].inner_face == 2);
  CHECK(tree.internal_edges[1].outer_face == 0);
}

TEST_CASE("nested chords can leave a vertex-free face") {
  const PartitionTree tree = build_partition_tree(6, {{1, 3}, {1, 5}, {3, 5}});
  CHECK(tree.face_count == 4);
  // Chord {1,5} owns a face with no polygon vertices: {1,2} and {3,4} are
  // swallowed by the inner chords, 5 and 6 stay outside.
  int free_faces = 0;
  for (int f = 0; f < tree.face_count; ++f)
    if (tree.face_rep[f] == 0) ++free_faces;
  CHECK(free_faces == 1);
  // The vertex-free face belongs to chord {1,5} (second in sorted order).
  CHECK(tree.face_rep[2] == 0);
  // Chord {1,5} hangs off the outer face; the nested chords hang off it.
  for (const auto& e : tree.internal_edges) {
    if (e.chord_index == 1) CHECK(e.outer_face == 0);
    if (e.chord_index == 0) CHECK(e.outer_face == 2);
    if (e.chord_index == 2) CHECK(e.outer_face == 2);
  }
  // The outer face always contains the last vertex.
  CHECK(tree.face_of_vertex[5] == 0);
}

TEST_CASE("crossing chord sets are rejected") {
  CHECK_THROWS_AS(build_partition_tree(4, {{1, 3}, {2, 4}}), InvalidArgument);
  CHECK_THROWS_AS(build_partition_tree(4, {{1, 2}}), InvalidArgument);
}

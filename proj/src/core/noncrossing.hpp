#pragma once

#include <vector>

#include "core/errors.hpp"

namespace bandloop {

/// Chord of the n-gon joining the midpoints of polygon edges e_i and e_j
/// (edge e_k runs from vertex k-1 to vertex k, cyclically). Positions are
/// 1-based with i < j; admissible chords have |i-j| != 1 mod n.
struct Chord {
  int i = 0;
  int j = 0;

  friend bool operator==(const Chord&, const Chord&) = default;
  friend auto operator<=>(const Chord&, const Chord&) = default;
};

using ChordSet = std::vector<Chord>;  // kept sorted lexicographically

/// Strict interleaving on the integer order: i < k < j < l or k < i < l < j.
bool chords_cross(const Chord& a, const Chord& b);

bool is_noncrossing(const ChordSet& chords);

/// All admissible chords of the n-gon in lexicographic order.
std::vector<Chord> admissible_chords(int n);

/// Every subset of admissible chords with no crossing pair, in deterministic
/// lexicographic order (the empty set first). n >= 2.
std::vector<ChordSet> enumerate_noncrossing(int n);

/// The face structure of a non-crossing chord arrangement, contracted to the
/// tree evaluated by the loop calculus:
///   - faces partition the polygon vertices; chord {i,j} (i<j) separates
///     vertices {i..j-1} from the rest,
///   - every chord contributes one internal tree edge joining its inner face
///     to the enclosing face,
///   - every polygon vertex v hangs off its face by a boundary edge.
/// Face ids: 0 is the outer face (always contains vertex n), chord c (by
/// position in `chords`) owns face c+1, which may contain no vertices when
/// nested chords fill it completely.
struct PartitionTree {
  int n = 0;
  ChordSet chords;
  std::vector<int> face_of_vertex;  // length n, entry v-1 = face id of vertex v
  int face_count = 0;               // chords.size() + 1
  std::vector<int> face_rep;        // minimal vertex (1-based) per face, 0 if vertex-free
  struct InternalEdge {
    int chord_index = 0;  // position in `chords`
    int inner_face = 0;
    int outer_face = 0;
  };
  std::vector<InternalEdge> internal_edges;
};

/// Builds the partition tree for a non-crossing chord set; rejects crossings.
PartitionTree build_partition_tree(int n, const ChordSet& chords);

}  // namespace bandloop

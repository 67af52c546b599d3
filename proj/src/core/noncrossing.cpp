#include "core/noncrossing.hpp"

#include <algorithm>

namespace bandloop {

bool chords_cross(const Chord& a, const Chord& b) {
  return (a.i < b.i && b.i < a.j && a.j < b.j) || (b.i < a.i && a.i < b.j && b.j < a.j);
}

bool is_noncrossing(const ChordSet& chords) {
  for (std::size_t x = 0; x < chords.size(); ++x)
    for (std::size_t y = x + 1; y < chords.size(); ++y)
      if (chords_cross(chords[x], chords[y])) return false;
  return true;
}

std::vector<Chord> admissible_chords(int n) {
  require(n >= 2, "admissible_chords: need n >= 2");
  std::vector<Chord> out;
  for (int i = 1; i <= n; ++i) {
    for (int j = i + 1; j <= n; ++j) {
      const int gap = j - i;
      if (gap == 1 || gap == n - 1) continue;  // neighboring edges mod n
      out.push_back({i, j});
    }
  }
  return out;
}

std::vector<ChordSet> enumerate_noncrossing(int n) {
  const std::vector<Chord> pool = admissible_chords(n);
  std::vector<ChordSet> out;
  ChordSet current;

  // Depth-first over the lexicographically ordered pool; emitting each prefix
  // before extending keeps the output in lexicographic order of chord lists.
  auto extend = [&](auto&& self, std::size_t start) -> void {
    out.push_back(current);
    for (std::size_t p = start; p < pool.size(); ++p) {
      bool ok = true;
      for (const Chord& c : current) {
        if (chords_cross(c, pool[p])) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      current.push_back(pool[p]);
      self(self, p + 1);
      current.pop_back();
    }
  };
  extend(extend, 0);
  return out;
}

namespace {

/// Vertices strictly inside chord {i, j}: positions i..j-1.
inline bool vertex_inside(const Chord& c, int v) { return c.i <= v && v < c.j; }

inline int inside_size(const Chord& c) { return c.j - c.i; }

}  // namespace

PartitionTree build_partition_tree(int n, const ChordSet& chords) {
  require(n >= 2, "partition tree: need n >= 2");
  for (const Chord& c : chords) {
    require(1 <= c.i && c.i < c.j && c.j <= n, "partition tree: chord positions out of range");
    const int gap = c.j - c.i;
    require(gap != 1 && gap != n - 1, "partition tree: chord joins neighboring edges");
  }
  require(is_noncrossing(chords), "partition tree: chord set has a crossing pair");

  PartitionTree tree;
  tree.n = n;
  tree.chords = chords;
  tree.face_count = static_cast<int>(chords.size()) + 1;

  // Face of a vertex: owned by the smallest enclosing chord (the chord
  // insides form a laminar family), face 0 when no chord encloses it.
  tree.face_of_vertex.assign(static_cast<std::size_t>(n), 0);
  for (int v = 1; v <= n; ++v) {
    int best = -1;
    for (std::size_t c = 0; c < chords.size(); ++c) {
      if (!vertex_inside(chords[c], v)) continue;
      if (best < 0 || inside_size(chords[c]) < inside_size(chords[best])) {
        best = static_cast<int>(c);
      }
    }
    tree.face_of_vertex[v - 1] = best + 1;
  }

  tree.face_rep.assign(static_cast<std::size_t>(tree.face_count), 0);
  for (int v = n; v >= 1; --v) tree.face_rep[tree.face_of_vertex[v - 1]] = v;

  // A chord's tree edge joins its own face to the face of the smallest chord
  // strictly containing it (the outer face when none does).
  for (std::size_t c = 0; c < chords.size(); ++c) {
    int parent = -1;
    for (std::size_t d = 0; d < chords.size(); ++d) {
      if (d == c) continue;
      if (chords[d].i <= chords[c].i && chords[c].j <= chords[d].j &&
          inside_size(chords[d]) > inside_size(chords[c])) {
        if (parent < 0 || inside_size(chords[d]) < inside_size(chords[parent])) {
          parent = static_cast<int>(d);
        }
      }
    }
    tree.internal_edges.push_back(
        {static_cast<int>(c), static_cast<int>(c) + 1, parent + 1});
  }
  return tree;
}

}  // namespace bandloop

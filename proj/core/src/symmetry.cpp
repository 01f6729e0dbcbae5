#include "csgnn/symmetry.hpp"

#include <algorithm>
#include <bit>
#include <mutex>
#include <map>
#include <numeric>
#include <sstream>

#include "csgnn/error.hpp"

namespace csgnn {

namespace {

NodeMask to_mask(std::span<const int> s, int n) {
  require(n >= 1 && n <= 31, "symmetry: n must be in [1, 31]");
  NodeMask m = 0;
  for (int v : s) {
    require(v >= 0 && v < n, "symmetry: set member out of range");
    m |= NodeMask{1} << v;
  }
  require(m != 0, "symmetry: sets must be non-empty");
  return m;
}

bool has(NodeMask m, int i) { return (m >> i) & 1U; }

}  // namespace

std::uint64_t QuadOrbit::packed() const noexcept {
  std::uint64_t key = distinct ? 1 : 0;
  key = key * 256 + static_cast<std::uint64_t>(k1);
  key = key * 256 + static_cast<std::uint64_t>(k2);
  key = key * 256 + static_cast<std::uint64_t>(k_cap);
  key = key * 16 + (i1_in_s1 ? 8 : 0) + (i2_in_s2 ? 4 : 0) + (i1_in_s2 ? 2 : 0) + (i2_in_s1 ? 1 : 0);
  return key;
}

std::string QuadOrbit::to_string() const {
  std::ostringstream os;
  os << (distinct ? "i1!=i2" : "i1=i2") << ";k1=" << k1 << ";k2=" << k2 << ";kcap=" << k_cap
     << ";same=" << i1_in_s1 << i2_in_s2 << ";diff=" << i1_in_s2 << i2_in_s1;
  return os.str();
}

PairOrbit classify_pair(NodeMask s, int i) { return {std::popcount(s), has(s, i)}; }

PairOrbit classify_pair(std::span<const int> s, int i, int n) {
  require(i >= 0 && i < n, "classify_pair: index out of range");
  return classify_pair(to_mask(s, n), i);
}

QuadOrbit classify_quad(NodeMask s1, int i1, NodeMask s2, int i2) {
  QuadOrbit o;
  o.distinct = i1 != i2;
  o.k1 = std::popcount(s1);
  o.k2 = std::popcount(s2);
  o.k_cap = std::popcount(s1 & s2);
  o.i1_in_s1 = has(s1, i1);
  o.i2_in_s2 = has(s2, i2);
  o.i1_in_s2 = has(s2, i1);
  o.i2_in_s1 = has(s1, i2);
  return o;
}

QuadOrbit classify_quad(std::span<const int> s1, int i1, std::span<const int> s2, int i2, int n) {
  require(i1 >= 0 && i1 < n && i2 >= 0 && i2 < n, "classify_quad: index out of range");
  return classify_quad(to_mask(s1, n), i1, to_mask(s2, n), i2);
}

bool is_realizable(const PairOrbit& orbit, int n) {
  if (orbit.k < 1 || orbit.k > n) return false;
  return orbit.member || orbit.k < n;
}

namespace {

// Venn regions: 0 = S1 only, 1 = S1 ∩ S2, 2 = S2 only, 3 = outside.
int region(bool in_s1, bool in_s2) {
  if (in_s1 && !in_s2) return 0;
  if (in_s1 && in_s2) return 1;
  if (in_s2) return 2;
  return 3;
}

bool region_sizes(const QuadOrbit& o, int n, int (&sizes)[4]) {
  if (o.k1 < 1 || o.k2 < 1 || o.k_cap < 0 || o.k_cap > std::min(o.k1, o.k2)) return false;
  sizes[0] = o.k1 - o.k_cap;
  sizes[1] = o.k_cap;
  sizes[2] = o.k2 - o.k_cap;
  sizes[3] = n - (o.k1 + o.k2 - o.k_cap);
  return sizes[3] >= 0;
}

}  // namespace

bool is_realizable(const QuadOrbit& o, int n) {
  int sizes[4];
  if (!region_sizes(o, n, sizes)) return false;
  int r1 = region(o.i1_in_s1, o.i1_in_s2);
  int r2 = region(o.i2_in_s1, o.i2_in_s2);
  if (!o.distinct) return r1 == r2 && sizes[r1] >= 1;
  if (r1 == r2) return sizes[r1] >= 2;
  return sizes[r1] >= 1 && sizes[r2] >= 1;
}

QuadWitness witness(const QuadOrbit& o, int n) {
  require(is_realizable(o, n), "witness: orbit not realizable for n=" + std::to_string(n));
  int sizes[4];
  region_sizes(o, n, sizes);
  // Lay regions out consecutively over [n]; start[r] is the first node of region r.
  int start[4];
  start[0] = 0;
  for (int r = 1; r < 4; ++r) start[r] = start[r - 1] + sizes[r - 1];
  QuadWitness w;
  for (int r = 0; r < 3; ++r)
    for (int v = start[r]; v < start[r] + sizes[r]; ++v) {
      if (r <= 1) w.s1 |= NodeMask{1} << v;
      if (r >= 1) w.s2 |= NodeMask{1} << v;
    }
  int r1 = region(o.i1_in_s1, o.i1_in_s2);
  int r2 = region(o.i2_in_s1, o.i2_in_s2);
  w.i1 = start[r1];
  w.i2 = !o.distinct ? w.i1 : (r1 == r2 ? start[r2] + 1 : start[r2]);
  return w;
}

std::vector<PairOrbit> enumerate_pair_orbits(int n, SetSizeFilter filter) {
  std::vector<PairOrbit> out;
  for (int k = 1; k <= n; ++k) {
    if (!filter.admits(k)) continue;
    for (bool member : {false, true}) {
      PairOrbit o{k, member};
      if (is_realizable(o, n)) out.push_back(o);
    }
  }
  return out;
}

std::vector<QuadOrbit> enumerate_quad_orbits(int n, SetSizeFilter filter) {
  std::vector<QuadOrbit> out;
  for (bool distinct : {false, true})
    for (int k1 = 1; k1 <= n; ++k1) {
      if (!filter.admits(k1)) continue;
      for (int k2 = 1; k2 <= n; ++k2) {
        if (!filter.admits(k2)) continue;
        for (int kc = 0; kc <= std::min(k1, k2); ++kc)
          for (int bits = 0; bits < 16; ++bits) {
            QuadOrbit o;
            o.distinct = distinct;
            o.k1 = k1;
            o.k2 = k2;
            o.k_cap = kc;
            o.i1_in_s1 = bits & 8;
            o.i2_in_s2 = bits & 4;
            o.i1_in_s2 = bits & 2;
            o.i2_in_s1 = bits & 1;
            if (is_realizable(o, n)) out.push_back(o);
          }
      }
    }
  return out;
}

OrbitIndex::OrbitIndex(int n) : n_(n), orbits_(enumerate_quad_orbits(n)) {
  codes_.reserve(orbits_.size());
  for (int c = 0; c < static_cast<int>(orbits_.size()); ++c) codes_.emplace(orbits_[c].packed(), c);
}

std::shared_ptr<const OrbitIndex> OrbitIndex::for_n(int n) {
  static std::mutex mu;
  static std::map<int, std::shared_ptr<const OrbitIndex>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[n];
  if (!slot) slot = std::make_shared<const OrbitIndex>(n);
  return slot;
}

int OrbitIndex::code(const QuadOrbit& orbit) const {
  auto it = codes_.find(orbit.packed());
  return it == codes_.end() ? -1 : it->second;
}

namespace {

struct DisjointSets {
  std::vector<int> parent;
  explicit DisjointSets(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

NodeMask permute_mask(const std::vector<int>& perm, NodeMask s) {
  NodeMask out = 0;
  for (int v = 0; s; ++v, s >>= 1)
    if (s & 1U) out |= NodeMask{1} << perm[v];
  return out;
}

}  // namespace

OrbitPartition brute_force_orbits(int n, OrbitMode mode, SetSizeFilter filter) {
  require(n >= 1, "brute_force_orbits: n must be positive");
  require(n <= kMaxOracleNodes,
          "brute_force_orbits: refusing n=" + std::to_string(n) + " (limit " +
              std::to_string(kMaxOracleNodes) + ")");

  std::vector<NodeMask> sets;
  std::vector<int> set_slot(std::size_t{1} << n, -1);
  for (NodeMask m = 1; m < (NodeMask{1} << n); ++m)
    if (filter.admits(std::popcount(m))) {
      set_slot[m] = static_cast<int>(sets.size());
      sets.push_back(m);
    }
  const int num_sets = static_cast<int>(sets.size());
  const int num_pairs = num_sets * n;

  OrbitPartition out;
  out.n = n;
  out.mode = mode;
  for (int s = 0; s < num_sets; ++s)
    for (int i = 0; i < n; ++i) out.pairs.push_back({sets[s], i});

  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);

  if (mode == OrbitMode::pair) {
    DisjointSets dsu(num_pairs);
    do {
      for (int p = 0; p < num_pairs; ++p) {
        const auto& e = out.pairs[p];
        int img = set_slot[permute_mask(perm, e.set)] * n + perm[e.i];
        dsu.unite(p, img);
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    out.orbit_of.resize(num_pairs);
    std::vector<int> label(num_pairs, -1);
    for (int p = 0; p < num_pairs; ++p) {
      int r = dsu.find(p);
      if (label[r] < 0) label[r] = out.num_orbits++;
      out.orbit_of[p] = label[r];
    }
    return out;
  }

  const std::size_t num_quads = static_cast<std::size_t>(num_pairs) * num_pairs;
  DisjointSets dsu(static_cast<int>(num_quads));
  std::vector<int> pair_image(num_pairs);
  do {
    for (int p = 0; p < num_pairs; ++p) {
      const auto& e = out.pairs[p];
      pair_image[p] = set_slot[permute_mask(perm, e.set)] * n + perm[e.i];
    }
    for (int a = 0; a < num_pairs; ++a)
      for (int b = 0; b < num_pairs; ++b)
        dsu.unite(a * num_pairs + b, pair_image[a] * num_pairs + pair_image[b]);
  } while (std::next_permutation(perm.begin(), perm.end()));

  out.quads.reserve(num_quads);
  out.orbit_of.resize(num_quads);
  std::vector<int> label(num_quads, -1);
  for (int a = 0; a < num_pairs; ++a)
    for (int b = 0; b < num_pairs; ++b) {
      const auto& x = out.pairs[a];
      const auto& y = out.pairs[b];
      out.quads.push_back({x.set, x.i, y.set, y.i});
      std::size_t q = static_cast<std::size_t>(a) * num_pairs + b;
      int r = dsu.find(static_cast<int>(q));
      if (label[r] < 0) label[r] = out.num_orbits++;
      out.orbit_of[q] = label[r];
    }
  out.pairs.clear();
  return out;
}

std::vector<std::uint8_t> pair_basis_tensor(const PairOrbit& orbit, int n) {
  require(n >= 1 && n <= kMaxOracleNodes, "pair_basis_tensor: n out of range");
  const NodeMask full = NodeMask{1} << n;
  std::vector<std::uint8_t> t(static_cast<std::size_t>(full - 1) * n, 0);
  for (NodeMask s = 1; s < full; ++s)
    for (int i = 0; i < n; ++i)
      if (classify_pair(s, i) == orbit) t[static_cast<std::size_t>(s - 1) * n + i] = 1;
  return t;
}

std::vector<std::uint8_t> quad_basis_tensor(const QuadOrbit& orbit, int n) {
  require(n >= 1 && n <= kMaxOracleNodes, "quad_basis_tensor: n out of range");
  const NodeMask full = NodeMask{1} << n;
  const std::size_t side = static_cast<std::size_t>(full - 1) * n;
  std::vector<std::uint8_t> t(side * side, 0);
  for (NodeMask s1 = 1; s1 < full; ++s1)
    for (int i1 = 0; i1 < n; ++i1)
      for (NodeMask s2 = 1; s2 < full; ++s2)
        for (int i2 = 0; i2 < n; ++i2)
          if (classify_quad(s1, i1, s2, i2) == orbit)
            t[(static_cast<std::size_t>(s1 - 1) * n + i1) * side + static_cast<std::size_t>(s2 - 1) * n + i2] = 1;
  return t;
}

ParamCounts param_count_comparison(int n, int block_size) {
  SetSizeFilter block{block_size, block_size};
  ParamCounts out;
  out.quad_block = static_cast<int>(enumerate_quad_orbits(n, block).size());
  out.pair_block = static_cast<int>(enumerate_pair_orbits(n, block).size());
  return out;
}

}  // namespace csgnn

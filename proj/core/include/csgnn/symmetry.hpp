#pragma once

#include <compare>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace csgnn {

/// Orbit of a (S, i) pair under node permutations: |S| and whether i lies in S.
struct PairOrbit {
  int k = 0;
  bool member = false;
  auto operator<=>(const PairOrbit&) const = default;
};

/// Orbit of a (S1, i1, S2, i2) quadruple, described by six invariants: whether
/// i1 == i2, |S1|, |S2|, |S1 ∩ S2|, the same-side memberships (i1∈S1, i2∈S2)
/// and the cross memberships (i1∈S2, i2∈S1). Field order is the canonical
/// lexicographic order used to assign orbit codes.
struct QuadOrbit {
  bool distinct = false;  // false: i1 == i2
  int k1 = 0;
  int k2 = 0;
  int k_cap = 0;
  bool i1_in_s1 = false;
  bool i2_in_s2 = false;
  bool i1_in_s2 = false;
  bool i2_in_s1 = false;

  auto operator<=>(const QuadOrbit&) const = default;

  /// n-independent integer key (valid while set sizes stay below 256).
  std::uint64_t packed() const noexcept;
  std::string to_string() const;
};

/// Node subsets are bitmasks over [n] (n <= 31) in the mask-based overloads.
using NodeMask = std::uint32_t;

PairOrbit classify_pair(std::span<const int> s, int i, int n);
PairOrbit classify_pair(NodeMask s, int i);
QuadOrbit classify_quad(std::span<const int> s1, int i1, std::span<const int> s2, int i2, int n);
QuadOrbit classify_quad(NodeMask s1, int i1, NodeMask s2, int i2);

bool is_realizable(const PairOrbit& orbit, int n);
/// True when some concrete quadruple over [n] has these invariants.
bool is_realizable(const QuadOrbit& orbit, int n);

struct QuadWitness {
  NodeMask s1 = 0;
  int i1 = 0;
  NodeMask s2 = 0;
  int i2 = 0;
};
/// Builds a concrete quadruple in the orbit; requires is_realizable(orbit, n).
QuadWitness witness(const QuadOrbit& orbit, int n);

/// Restricts the index space to sets with min_size <= |S| <= max_size.
struct SetSizeFilter {
  int min_size = 1;
  int max_size = 1 << 30;
  bool admits(int k) const noexcept { return k >= min_size && k <= max_size; }
};

std::vector<PairOrbit> enumerate_pair_orbits(int n, SetSizeFilter filter = {});
/// Realizable quadruple orbits in canonical lexicographic order.
std::vector<QuadOrbit> enumerate_quad_orbits(int n, SetSizeFilter filter = {});

/// Dense orbit codes: the position of each realizable quadruple orbit in the
/// canonical enumeration for a fixed n. Codes are not comparable across n.
class OrbitIndex {
 public:
  explicit OrbitIndex(int n);
  /// Shared, lazily built index for n.
  static std::shared_ptr<const OrbitIndex> for_n(int n);

  int n() const noexcept { return n_; }
  int size() const noexcept { return static_cast<int>(orbits_.size()); }
  /// -1 when the orbit is not realizable for n.
  int code(const QuadOrbit& orbit) const;
  const QuadOrbit& orbit(int code) const { return orbits_.at(code); }
  const std::vector<QuadOrbit>& orbits() const noexcept { return orbits_; }

 private:
  int n_;
  std::vector<QuadOrbit> orbits_;
  std::unordered_map<std::uint64_t, int> codes_;
};

enum class OrbitMode { pair, quad };

struct PairIndex {
  NodeMask set = 0;
  int i = 0;
};
struct QuadIndex {
  NodeMask s1 = 0;
  int i1 = 0;
  NodeMask s2 = 0;
  int i2 = 0;
};

/// Orbits of the index space computed by applying every permutation of [n].
struct OrbitPartition {
  int n = 0;
  OrbitMode mode = OrbitMode::pair;
  std::vector<PairIndex> pairs;  // populated in pair mode
  std::vector<QuadIndex> quads;  // populated in quad mode
  std::vector<int> orbit_of;     // orbit id per element, ids numbered by first occurrence
  int num_orbits = 0;
};

inline constexpr int kMaxOracleNodes = 7;

/// Brute-force S_n orbit oracle. Refuses n > kMaxOracleNodes with ContractViolation.
OrbitPartition brute_force_orbits(int n, OrbitMode mode, SetSizeFilter filter = {});

/// Indicator of a pair orbit over non-empty S: entry ((S-1)·n + i).
std::vector<std::uint8_t> pair_basis_tensor(const PairOrbit& orbit, int n);
/// Indicator of a quadruple orbit over (S1,i1,S2,i2), row-major in the pair index.
std::vector<std::uint8_t> quad_basis_tensor(const QuadOrbit& orbit, int n);

struct ParamCounts {
  int quad_block = 0;  // realizable quadruple orbits with |S1| = |S2| = block_size
  int pair_block = 0;  // realizable pair orbits with |S| = block_size
  int reference_3ign = 203;  // parameters of a 3-IGN block over six indices (Bell number B6)
};

ParamCounts param_count_comparison(int n, int block_size = 2);

}  // namespace csgnn

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "wclab/rng.hpp"

namespace wclab {

// Checked 64-bit lattice arithmetic. Desk-scale inputs never get close to
// the bound; silent wraparound would corrupt the group law, so overflow is
// a hard error.
std::int64_t checked_add(std::int64_t a, std::int64_t b);
std::int64_t checked_sub(std::int64_t a, std::int64_t b);
std::int64_t checked_mul(std::int64_t a, std::int64_t b);
std::int64_t floor_div(std::int64_t a, std::int64_t b);   // floored division, b != 0
std::int64_t floor_mod(std::int64_t a, std::int64_t b);   // result in [0,b) for b > 0

// Finite group presented by a full multiplication table. Validated on
// construction: identity, inverses, associativity.
class FiniteGroup {
 public:
  explicit FiniteGroup(std::vector<std::vector<int>> table);

  int size() const { return static_cast<int>(table_.size()); }
  int identity() const { return identity_; }
  int compose(int a, int b) const { return table_[a][b]; }
  int inverse(int a) const { return inverse_[a]; }
  const std::vector<std::vector<int>>& table() const { return table_; }

  static FiniteGroup trivial();
  static FiniteGroup cyclic(int n);
  // Symmetric group on n letters (n <= 5), elements = permutations in
  // lexicographic order, so index 0 is the identity.
  static FiniteGroup symmetric(int n);
  static FiniteGroup product(const FiniteGroup& a, const FiniteGroup& b);

 private:
  std::vector<std::vector<int>> table_;
  std::vector<int> inverse_;
  int identity_ = 0;
};

// Element of Z^d x (finite part). `lattice` has length d; `finite` indexes
// the context's table (0 for groups with trivial finite part).
struct GroupElement {
  std::vector<std::int64_t> lattice;
  int finite = 0;

  bool operator==(const GroupElement&) const = default;
  bool operator<(const GroupElement& o) const {
    if (lattice != o.lattice) return lattice < o.lattice;
    return finite < o.finite;
  }
};

void encode_element(const GroupElement& g, StreamHash& h);
std::string to_string(const GroupElement& g);

// A concrete countable group: Z^d, a finite group by table, or their
// direct product. Immutable; share via shared_ptr across threads.
class Group {
 public:
  explicit Group(int lattice_dim,
                 std::optional<FiniteGroup> finite = std::nullopt);

  int lattice_dim() const { return lattice_dim_; }
  bool has_finite() const { return finite_.has_value(); }
  const FiniteGroup& finite() const { return *finite_; }
  int finite_size() const { return finite_ ? finite_->size() : 1; }
  // 0 when the group is infinite.
  std::int64_t order() const { return lattice_dim_ == 0 ? finite_size() : 0; }

  GroupElement identity() const;
  GroupElement compose(const GroupElement& a, const GroupElement& b) const;
  GroupElement inverse(const GroupElement& a) const;
  bool is_identity(const GroupElement& a) const;
  void check_element(const GroupElement& a) const;

  // All elements with |coordinate| <= radius, crossed with the whole finite
  // part. Deterministic order (lex on lattice coords, then finite index).
  std::vector<GroupElement> box(int radius) const;
  // {e, +-e_i} on the lattice part crossed with the finite part.
  std::vector<GroupElement> generator_ball() const;
  std::vector<GroupElement> all_elements() const;  // finite groups only

  bool same_shape(const Group& o) const;

 private:
  int lattice_dim_;
  std::optional<FiniteGroup> finite_;
};

using GroupPtr = std::shared_ptr<const Group>;

// Canonical coset label of g + H: the HNF-reduced lattice residue plus the
// canonical finite-part representative index. Equal iff the elements differ
// by an element of H.
struct CosetId {
  std::vector<std::int64_t> residue;
  int finite_rep = 0;

  bool operator==(const CosetId&) const = default;
  bool operator<(const CosetId& o) const {
    if (residue != o.residue) return residue < o.residue;
    return finite_rep < o.finite_rep;
  }
};

void encode_coset(const CosetId& c, StreamHash& h);
std::string to_string(const CosetId& c);

// Subgroup H <= G given by an integer basis (rows, linearly independent)
// for the lattice part and a table-closed subset for the finite part.
// Precomputes HNF for coset reduction and, when H is normal, the Smith
// normal form data backing the quotient group.
class Subgroup {
 public:
  Subgroup(GroupPtr ambient, std::vector<std::vector<std::int64_t>> lattice_basis,
           std::optional<std::vector<int>> finite_subset = std::nullopt);

  static Subgroup full(GroupPtr ambient);    // H = G
  static Subgroup trivial(GroupPtr ambient); // H = {e}

  const Group& ambient() const { return *ambient_; }
  GroupPtr ambient_ptr() const { return ambient_; }
  const std::vector<std::vector<std::int64_t>>& lattice_basis() const {
    return basis_;
  }
  int lattice_rank() const { return static_cast<int>(hnf_rows_.size()); }

  bool contains(const GroupElement& g) const;
  bool is_normal() const { return normal_; }
  bool is_full() const;
  // Number of cosets; 0 when infinite.
  std::int64_t index_if_finite() const;

  CosetId coset_of(const GroupElement& g) const;
  // Canonical lift; section(coset_of(e)) == e.
  GroupElement section(const CosetId& c) const;
  // rho(g, kH) = section(g k H)^{-1} g section(kH), an element of H.
  GroupElement cocycle(const GroupElement& g, const CosetId& c) const;

  // All cosets whose canonical residue lies in the centered box of the
  // given radius, crossed with all finite-part cosets. Sorted.
  std::vector<CosetId> enumerate_cosets(int bound) const;

  // Coordinates of h's lattice part in this subgroup's basis (h must be a
  // member). Used to evaluate restricted representations.
  std::vector<std::int64_t> basis_coordinates(const GroupElement& h) const;

  // Quotient group structure; requires a normal subgroup.
  GroupPtr quotient_group() const;
  GroupElement project(const GroupElement& g) const;           // G -> Q, hom
  GroupElement lift_quotient(const GroupElement& q) const;     // Q -> G
  CosetId coset_of_quotient(const GroupElement& q) const;
  GroupElement quotient_of_coset(const CosetId& c) const;

 private:
  void build_quotient();

  GroupPtr ambient_;
  std::vector<std::vector<std::int64_t>> basis_;
  std::vector<int> finite_subset_;       // sorted member indices
  std::vector<char> finite_member_;      // bitmap
  std::vector<int> finite_cosets_;       // canonical rep per finite element
  std::vector<int> finite_coset_reps_;   // list of distinct reps (identity's first)
  bool normal_ = false;

  // HNF of basis rows (echelon, positive pivots, reduced above).
  std::vector<std::vector<std::int64_t>> hnf_rows_;
  std::vector<int> hnf_pivot_cols_;
  std::vector<std::vector<std::int64_t>> hnf_transform_;  // hnf = U * basis

  // Quotient data (normal subgroups only).
  GroupPtr quotient_;
  std::vector<std::vector<std::int64_t>> snf_v_;     // column transform
  std::vector<std::vector<std::int64_t>> snf_vinv_;
  std::vector<std::int64_t> torsion_;                // s_i > 1 factors
  std::vector<int> torsion_cols_;                    // their SNF coordinate slots
  std::vector<int> free_cols_;                       // free coordinate slots
  int q_finite_torsion_size_ = 1;                    // product of torsion_
  int q_finite_part_size_ = 1;                       // |T/N|
};

// Finite ordered list of distinct group elements.
using Window = std::vector<GroupElement>;

void validate_window(const Group& g, const Window& w);
Window box_window(const Group& g, int radius);
Window generator_ball_window(const Group& g, bool include_identity = true);

// Folner set of an amenable-representable group: the box {0..n-1}^k on the
// lattice part crossed with the whole finite part.
Window folner_set(const Group& g, int n);

// |{x in Fn : exists f in F with f*x not in Fn}| / |Fn|
double boundary_ratio(const Group& g, const Window& f, const Window& fn);

struct GroupElementHash {
  std::size_t operator()(const GroupElement& g) const {
    StreamHash h;
    encode_element(g, h);
    return static_cast<std::size_t>(h.digest());
  }
};

struct CosetIdHash {
  std::size_t operator()(const CosetId& c) const {
    StreamHash h;
    encode_coset(c, h);
    return static_cast<std::size_t>(h.digest());
  }
};

}  // namespace wclab

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "wclab/groups.hpp"
#include "wclab/rng.hpp"

namespace wclab {

using SubgroupPtr = std::shared_ptr<const Subgroup>;

// ---------------------------------------------------------------------------
// Sites: coordinates of a configuration space. A site names one cell of one
// action's index set; products nest sites, induced-representation spaces pair
// an axis with a coset.

enum class SiteKind : std::uint8_t { Elem, Coset, Unit, Axis, CosetAxis, Pair };

struct Site {
  SiteKind kind = SiteKind::Unit;
  GroupElement elem;                 // Elem
  CosetId coset;                     // Coset, CosetAxis
  int axis = 0;                      // Axis, CosetAxis
  int factor = 0;                    // Pair
  std::shared_ptr<const Site> sub;   // Pair

  static Site unit();
  static Site of_elem(GroupElement e);
  static Site of_coset(CosetId c);
  static Site of_axis(int n);
  static Site of_coset_axis(int n, CosetId c);
  static Site of_pair(int factor, Site inner);

  bool operator==(const Site& o) const;
  bool operator<(const Site& o) const;
};

void encode_site(const Site& s, StreamHash& h);
std::string to_string(const Site& s);

struct SiteHash {
  std::size_t operator()(const Site& s) const {
    StreamHash h;
    encode_site(s, h);
    return static_cast<std::size_t>(h.digest());
  }
};

// ---------------------------------------------------------------------------
// Values and lazy points

class Action;

// A cell whose value is itself a configuration of an inner action: the
// stream pins the inner point's randomness, `pending` is the inner group
// transform accumulated by twists, i.e. the value is pending * (raw point).
struct InnerPointRef {
  const Action* action = nullptr;
  std::uint64_t stream = 0;
  GroupElement pending;
};

class Value {
 public:
  enum class Kind : std::uint8_t { Int, Real, Inner };

  static Value of_int(std::int64_t v);
  static Value of_real(double v);
  static Value of_inner(InnerPointRef ref);

  Kind kind() const { return kind_; }
  std::int64_t as_int() const;
  double as_real() const;
  const InnerPointRef& as_inner() const;

 private:
  Kind kind_ = Kind::Int;
  std::int64_t i_ = 0;
  double r_ = 0.0;
  InnerPointRef inner_;
};

// Per-point evaluation state: the master seed, the sample index, a memo of
// jointly drawn Gaussian vectors keyed by stream id, and a label memo for
// data-driven evaluators (marker scans) keyed by structural hashes.
struct EvalCtx {
  std::uint64_t seed = 0;
  std::uint64_t sample = 0;
  std::unordered_map<std::uint64_t, std::vector<double>> joint_memo;
  std::unordered_map<std::uint64_t, std::pair<bool, GroupElement>> label_memo;
};

// ---------------------------------------------------------------------------
// Action: an immutable, thread-shareable description of a p.m.p. action.
// eval(ctx, stream, g, t) returns the value (g . x)(t) of the point pinned
// by (ctx.seed, ctx.sample, stream). All randomness is a pure function of
// (seed, sample, structural path), so results do not depend on evaluation
// order or worker scheduling.

class Action {
 public:
  virtual ~Action() = default;

  const Group& group() const { return *group_; }
  GroupPtr group_ptr() const { return group_; }
  // Subgroup-restricted actions expose their domain; null means the whole group.
  virtual const Subgroup* domain() const { return nullptr; }

  virtual Value eval(EvalCtx& ctx, std::uint64_t stream, const GroupElement& g,
                     const Site& site) const = 0;

  // Structural identity of the cell that (g . x)(site) reads, when the value
  // is a single i.i.d. cell: equal streams mean equal raw cells. Used by
  // exact-law oracles; nullopt when the value mixes several cells.
  virtual std::optional<std::uint64_t> cell_stream(std::uint64_t stream,
                                                   const GroupElement& g,
                                                   const Site& site) const {
    (void)stream, (void)g, (void)site;
    return std::nullopt;
  }

  std::uint64_t node_tag() const { return tag_; }

 protected:
  Action(GroupPtr group, std::uint64_t tag) : group_(std::move(group)), tag_(tag) {}

  GroupPtr group_;
  std::uint64_t tag_;
};

using ActionPtr = std::shared_ptr<const Action>;

// One sampled configuration. at(g, s) evaluates (g . x)(s); inner_at
// descends into inner-point cell values.
class Point {
 public:
  Point(ActionPtr a, std::uint64_t seed, std::uint64_t sample);

  Value at(const GroupElement& g, const Site& s);
  Value at(const Site& s);
  Value inner_at(const InnerPointRef& ref, const GroupElement& g, const Site& s);

  const Action& action() const { return *a_; }
  EvalCtx& ctx() { return ctx_; }
  std::uint64_t root_stream() const { return root_; }

 private:
  ActionPtr a_;
  EvalCtx ctx_;
  std::uint64_t root_;
};

// ---------------------------------------------------------------------------
// Alphabets (finite Bernoulli cells)

struct Alphabet {
  std::vector<double> weights;

  int size() const { return static_cast<int>(weights.size()); }
  static Alphabet uniform(int n);
  static Alphabet coin() { return uniform(2); }
  void validate() const;
};

// ---------------------------------------------------------------------------
// Coordinate sets: the index set T of a shift-type action together with the
// group action on it.

class CoordinateSet {
 public:
  virtual ~CoordinateSet() = default;
  virtual Site act(const GroupElement& g, const Site& t) const = 0;
  virtual void validate_site(const Site& t) const = 0;
  virtual std::uint64_t tag() const = 0;
};

using CoordinateSetPtr = std::shared_ptr<const CoordinateSet>;

// T = the group itself (optionally restricted to a subgroup's elements).
CoordinateSetPtr group_sites(GroupPtr g);
// T = G/H with g . kH = (g k)H.
CoordinateSetPtr coset_sites(SubgroupPtr h);

// ---------------------------------------------------------------------------
// Shift-type actions and the operations on handles

struct FiniteHom {
  std::vector<int> lattice_gen_images;  // image of each lattice generator
  std::vector<int> finite_images;       // image per finite-part element (may be empty)
};

// i.i.d. alphabet cells indexed by the group, shifted by left translation.
ActionPtr bernoulli_shift(GroupPtr g, Alphabet alphabet);
// Bernoulli shift of a subgroup H on cells indexed by H's elements.
ActionPtr bernoulli_shift_subgroup(SubgroupPtr h, Alphabet alphabet);
// Shift of G on X^T for a coordinate set T.
ActionPtr generalized_shift(GroupPtr g, CoordinateSetPtr sites, Alphabet alphabet);
// Shift of G on X^{G/H}.
ActionPtr generalized_coset_shift(SubgroupPtr h, Alphabet alphabet);
// Trivial action on one alphabet cell.
ActionPtr trivial_action(GroupPtr g, Alphabet alphabet);
// Trivial action of a subgroup on one alphabet cell.
ActionPtr trivial_action_subgroup(SubgroupPtr h, Alphabet alphabet);
// Co-induction of an H-action to G, realized on coset-indexed cells with the
// cocycle twist (g . x)(kH) = a(rho(g^{-1},kH)^{-1}) x(g^{-1} kH).
ActionPtr coinduce(ActionPtr a_on_h, SubgroupPtr h);
// Generalized shift on Y^{G/H} with independent inner-point cells and no
// twist: (g . x)(kH) = x(g^{-1} kH).
ActionPtr generalized_inner_shift(SubgroupPtr h, ActionPtr cell);
// Diagonal action on tagged pairs of coordinates.
ActionPtr product_action(ActionPtr a, ActionPtr b);
// Pre-compose an action of G/H with the quotient map (H normal).
ActionPtr quotient_lift(ActionPtr b_on_quotient, SubgroupPtr h);
// Same space, action map restricted to a subgroup.
ActionPtr restrict_action(ActionPtr a, SubgroupPtr h);
// Action factoring through a finite quotient: uniform atoms = quotient
// elements, g acts by left translation through the homomorphism.
ActionPtr finite_action(GroupPtr g, FiniteGroup quotient, FiniteHom hom);

// Co-induction cell access used by drivers: the coset-space subgroup of a
// co-induced action, and the inner cell action. Throws if `a` is not a
// co-induced handle.
SubgroupPtr coinduced_subgroup(const Action& a);
ActionPtr coinduced_cell_action(const Action& a);
const Action* product_factor(const Action& a, int factor);  // null if not a product

// True when both handles are actions of group contexts with equal shape.
void require_same_group(const Action& a, const Action& b);

}  // namespace wclab

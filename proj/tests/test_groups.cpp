#include <doctest.h>

#include <set>

#include "wclab/groups.hpp"

using namespace wclab;

namespace {

GroupElement lat(const GroupPtr& g, std::vector<std::int64_t> v) {
  GroupElement e = g->identity();
  e.lattice = std::move(v);
  return e;
}

}  // namespace

TEST_CASE("lattice composition and identity") {
  auto z2 = std::make_shared<Group>(2);
  const GroupElement a = lat(z2, {1, 0}), b = lat(z2, {0, 1});
  CHECK(z2->compose(a, b) == lat(z2, {1, 1}));
  CHECK(z2->compose(a, z2->identity()) == a);
  CHECK(z2->is_identity(z2->compose(a, z2->inverse(a))));
}

TEST_CASE("finite group validation catches broken tables") {
  CHECK_THROWS(FiniteGroup({{0, 1}, {1, 1}}));            // no inverse row
  CHECK_THROWS(FiniteGroup({{1, 0}, {0, 0}}));            // no identity
  CHECK_NOTHROW(FiniteGroup::cyclic(4));
  CHECK_NOTHROW(FiniteGroup::symmetric(3));
}

TEST_CASE("symmetric group table: exhaustive axioms and a transposition") {
  const FiniteGroup s3 = FiniteGroup::symmetric(3);
  REQUIRE(s3.size() == 6);
  // Exhaustive verification oracle: associativity, identity, inverses.
  for (int a = 0; a < 6; ++a) {
    CHECK(s3.compose(s3.identity(), a) == a);
    CHECK(s3.compose(a, s3.inverse(a)) == s3.identity());
    for (int b = 0; b < 6; ++b)
      for (int c = 0; c < 6; ++c)
        CHECK(s3.compose(s3.compose(a, b), c) == s3.compose(a, s3.compose(b, c)));
  }
  // One-line perms in lex order: index 1 is 021, the transposition (1 2).
  CHECK(s3.compose(1, 1) == s3.identity());
}

TEST_CASE("checked arithmetic overflows loudly") {
  auto z1 = std::make_shared<Group>(1);
  const GroupElement big = lat(z1, {std::int64_t{1} << 62});
  CHECK_THROWS_AS(z1->compose(z1->compose(big, big), z1->compose(big, big)),
                  std::overflow_error);
}

TEST_CASE("cosets of 2Z in Z") {
  auto z1 = std::make_shared<Group>(1);
  Subgroup h(z1, {{2}});
  CHECK(h.coset_of(lat(z1, {5})).residue == std::vector<std::int64_t>{1});
  CHECK(h.coset_of(z1->identity()).residue == std::vector<std::int64_t>{0});
  CHECK(h.section(h.coset_of(lat(z1, {1}))) == lat(z1, {1}));
  CHECK(h.section(h.coset_of(z1->identity())) == z1->identity());
  CHECK(h.index_if_finite() == 2);
  const auto cosets = h.enumerate_cosets(5);
  CHECK(cosets.size() == 2);
}

TEST_CASE("cosets of Z x {0} in Z^2 via HNF reduction") {
  auto z2 = std::make_shared<Group>(2);
  Subgroup h(z2, {{1, 0}});
  CHECK(h.coset_of(lat(z2, {7, 3})).residue == std::vector<std::int64_t>({0, 3}));
  CHECK(h.section(h.coset_of(lat(z2, {7, 3}))) == lat(z2, {0, 3}));
  CHECK(h.index_if_finite() == 0);
  const auto cosets = h.enumerate_cosets(3);
  CHECK(cosets.size() == 7);
  // Constant on cosets and compatible with the section.
  for (const auto& c : cosets) {
    CHECK(h.coset_of(h.section(c)) == c);
    for (std::int64_t k = -3; k <= 3; ++k) {
      const GroupElement moved = z2->compose(h.section(c), lat(z2, {k, 0}));
      CHECK(h.coset_of(moved) == c);
    }
  }
}

TEST_CASE("HNF reduction on a full-rank sublattice") {
  auto z2 = std::make_shared<Group>(2);
  Subgroup h(z2, {{3, 1}, {0, 4}});
  CHECK(h.index_if_finite() == 12);
  CHECK(h.enumerate_cosets(12).size() == 12);
  // coset_of is H-invariant and section lifts back into the coset.
  for (std::int64_t x = -6; x <= 6; ++x)
    for (std::int64_t y = -6; y <= 6; ++y) {
      const GroupElement g = lat(z2, {x, y});
      const CosetId c = h.coset_of(g);
      const GroupElement diff = z2->compose(g, z2->inverse(h.section(c)));
      CHECK(h.contains(diff));
      for (const auto& row : h.lattice_basis())
        CHECK(h.coset_of(z2->compose(g, lat(z2, {row[0], row[1]}))) == c);
    }
}

TEST_CASE("dependent basis rows are rejected") {
  auto z2 = std::make_shared<Group>(2);
  CHECK_THROWS(Subgroup(z2, {{1, 0}, {2, 0}}));
}

TEST_CASE("cocycle values and identities") {
  auto z1 = std::make_shared<Group>(1);
  Subgroup h(z1, {{2}});
  const CosetId c0 = h.coset_of(z1->identity());
  // rho(3, 0+H) = -sigma(1) + 3 + sigma(0) = 2.
  CHECK(h.cocycle(lat(z1, {3}), c0) == lat(z1, {2}));
  // rho(e, c) = e.
  for (const auto& c : h.enumerate_cosets(1))
    CHECK(z1->is_identity(h.cocycle(z1->identity(), c)));
  // rho(h, H) = h for members.
  for (std::int64_t k = -6; k <= 6; k += 2)
    CHECK(h.cocycle(lat(z1, {k}), c0) == lat(z1, {k}));
}

TEST_CASE("cocycle identity on boxes") {
  auto z2 = std::make_shared<Group>(2);
  Subgroup h(z2, {{1, 0}});
  const auto cosets = h.enumerate_cosets(2);
  for (const auto& g0 : z2->box(2))
    for (const auto& g1 : z2->box(2))
      for (const auto& c : cosets) {
        const GroupElement lhs = h.cocycle(z2->compose(g0, g1), c);
        const CosetId g1c = h.coset_of(z2->compose(g1, h.section(c)));
        const GroupElement rhs = z2->compose(h.cocycle(g0, g1c), h.cocycle(g1, c));
        CHECK(lhs == rhs);
      }
}

TEST_CASE("folner boxes and boundary ratios") {
  auto z1 = std::make_shared<Group>(1);
  Window plus_one = {lat(z1, {1})};
  CHECK(boundary_ratio(*z1, plus_one, folner_set(*z1, 10)) == doctest::Approx(0.1));

  auto z2 = std::make_shared<Group>(2);
  Window gens;
  for (auto v : {std::vector<std::int64_t>{1, 0}, {-1, 0}, {0, 1}, {0, -1}})
    gens.push_back(lat(z2, v));
  CHECK(boundary_ratio(*z2, gens, folner_set(*z2, 5)) == doctest::Approx(16.0 / 25.0));

  auto c4 = std::make_shared<Group>(0, FiniteGroup::cyclic(4));
  CHECK(boundary_ratio(*c4, c4->all_elements(), folner_set(*c4, 1)) == 0.0);

  // Monotone non-increasing in n for a fixed window.
  double prev = 1.0;
  for (int n : {2, 4, 8, 16, 32}) {
    const double r = boundary_ratio(*z2, gens, folner_set(*z2, n));
    CHECK(r <= prev + 1e-12);
    prev = r;
  }
}

TEST_CASE("quotient structure of Z^2 by Z x {0}") {
  auto z2 = std::make_shared<Group>(2);
  Subgroup h(z2, {{1, 0}});
  REQUIRE(h.is_normal());
  const GroupPtr q = h.quotient_group();
  CHECK(q->lattice_dim() == 1);
  CHECK(q->finite_size() == 1);
  // Projection is a homomorphism with kernel H.
  for (const auto& a : z2->box(3))
    for (const auto& b : z2->box(3)) {
      CHECK(h.project(z2->compose(a, b)) == q->compose(h.project(a), h.project(b)));
    }
  for (const auto& a : z2->box(3))
    CHECK(h.contains(z2->compose(a, z2->inverse(h.lift_quotient(h.project(a))))));
  // Coset <-> quotient correspondence is mutually inverse.
  for (const auto& c : h.enumerate_cosets(3))
    CHECK(h.coset_of_quotient(h.quotient_of_coset(c)) == c);
}

TEST_CASE("torsion quotients come out as finite tables") {
  auto z1 = std::make_shared<Group>(1);
  Subgroup h2(z1, {{2}});
  const GroupPtr q = h2.quotient_group();
  CHECK(q->lattice_dim() == 0);
  CHECK(q->finite_size() == 2);
  CHECK(h2.project(lat(z1, {5})) != q->identity());
  CHECK(h2.project(lat(z1, {4})) == q->identity());

  auto z2 = std::make_shared<Group>(2);
  Subgroup h22(z2, {{2, 0}, {0, 2}});
  const GroupPtr q4 = h22.quotient_group();
  CHECK(q4->finite_size() == 4);
  for (const auto& a : z2->box(2))
    for (const auto& b : z2->box(2))
      CHECK(h22.project(z2->compose(a, b)) ==
            q4->compose(h22.project(a), h22.project(b)));
}

TEST_CASE("S3 modulo A3 and a non-normal subgroup") {
  auto s3 = std::make_shared<Group>(0, FiniteGroup::symmetric(3));
  // Even permutations in lex index order: 012 -> 0, 120 -> 3, 201 -> 4.
  Subgroup a3(s3, {}, std::vector<int>{0, 3, 4});
  CHECK(a3.is_normal());
  CHECK(a3.index_if_finite() == 2);
  const GroupPtr q = a3.quotient_group();
  CHECK(q->finite_size() == 2);

  Subgroup refl(s3, {}, std::vector<int>{0, 1});
  CHECK_FALSE(refl.is_normal());
  CHECK(refl.index_if_finite() == 3);
  CHECK_THROWS(refl.quotient_group());
}

TEST_CASE("basis coordinates reconstruct members") {
  auto z2 = std::make_shared<Group>(2);
  Subgroup h(z2, {{2, 1}, {0, 3}});
  for (std::int64_t a = -3; a <= 3; ++a)
    for (std::int64_t b = -3; b <= 3; ++b) {
      GroupElement m = z2->identity();
      for (int i = 0; i < 2; ++i)
        m.lattice[i] = a * h.lattice_basis()[0][i] + b * h.lattice_basis()[1][i];
      REQUIRE(h.contains(m));
      const auto coords = h.basis_coordinates(m);
      CHECK(coords == std::vector<std::int64_t>({a, b}));
    }
  CHECK_THROWS(h.basis_coordinates(lat(z2, {1, 0})));
}

TEST_CASE("windows validate distinctness") {
  auto z1 = std::make_shared<Group>(1);
  Window w = {z1->identity(), z1->identity()};
  CHECK_THROWS(validate_window(*z1, w));
  CHECK(box_window(*z1, 2).size() == 5);
  CHECK(generator_ball_window(*z1).size() == 3);
}

TEST_CASE("product groups compose componentwise") {
  auto g = std::make_shared<Group>(1, FiniteGroup::cyclic(3));
  GroupElement a = g->identity();
  a.lattice[0] = 2;
  a.finite = 1;
  GroupElement b = g->identity();
  b.lattice[0] = -1;
  b.finite = 2;
  const GroupElement ab = g->compose(a, b);
  CHECK(ab.lattice[0] == 1);
  CHECK(ab.finite == 0);
  CHECK(g->is_identity(g->compose(a, g->inverse(a))));
}

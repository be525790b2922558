#include <doctest.h>

#include <map>
#include <random>

#include "wclab/actions.hpp"
#include "wclab/stats.hpp"

using namespace wclab;

namespace {

GroupElement lat(const GroupPtr& g, std::vector<std::int64_t> v) {
  GroupElement e = g->identity();
  e.lattice = std::move(v);
  return e;
}

// Law of phi((f g) x) over the window: used for measure-preservation checks.
struct ShiftedLabel final : LabelFunction {
  const LabelFunction& inner;
  GroupElement g;
  const Group& grp;
  ShiftedLabel(const LabelFunction& i, GroupElement gg, const Group& gr)
      : inner(i), g(std::move(gg)), grp(gr) {}
  std::int64_t operator()(Point& p, const GroupElement& f) const override {
    return inner(p, grp.compose(f, g));
  }
};

double self_l1(const ActionPtr& a, const LabelFunction& phi, const Window& w,
               const GroupElement& g, std::int64_t n, std::uint64_t seed) {
  const auto base = window_distribution(a, phi, w, n, chain(seed, 1), 2);
  const ShiftedLabel shifted(phi, g, a->group());
  const auto moved = window_distribution(a, shifted, w, n, chain(seed, 2), 2);
  return l1_distance(base, moved);
}

}  // namespace

TEST_CASE("bernoulli shift marginals and pair independence") {
  auto z1 = std::make_shared<Group>(1);
  ActionPtr a = bernoulli_shift(z1, Alphabet::coin());
  Window w = {z1->identity(), lat(z1, {1})};
  const Observable phi = Observable::coordinate(Site::of_elem(z1->identity()), 2);
  const auto dist = window_distribution(a, phi, w, 100000, 17, 4);

  // Exact product law: all four pairs at 1/4.
  double l1 = 0.0;
  for (std::int64_t i = 0; i < 2; ++i)
    for (std::int64_t j = 0; j < 2; ++j) {
      const auto it = dist.counts.find({i, j});
      const double e = it == dist.counts.end()
                           ? 0.0
                           : static_cast<double>(it->second) / dist.total;
      l1 += std::abs(e - 0.25);
    }
  CHECK(l1 < 0.02);
}

TEST_CASE("shifting by g then g inverse restores sampled coordinates") {
  auto z2 = std::make_shared<Group>(2);
  ActionPtr a = bernoulli_shift(z2, Alphabet::uniform(3));
  Point p(a, 23, 5);
  const GroupElement g = lat(z2, {2, -1});
  const GroupElement gg = z2->compose(g, z2->inverse(g));
  for (const auto& e : z2->box(2)) {
    const Site s = Site::of_elem(e);
    CHECK(p.at(gg, s).as_int() == p.at(s).as_int());
  }
}

TEST_CASE("points are deterministic in (seed, sample)") {
  auto z1 = std::make_shared<Group>(1);
  ActionPtr a = bernoulli_shift(z1, Alphabet::coin());
  Point p1(a, 99, 3), p2(a, 99, 3), p3(a, 99, 4);
  bool same = true, differ = false;
  for (const auto& e : z1->box(8)) {
    const Site s = Site::of_elem(e);
    same = same && p1.at(s).as_int() == p2.at(s).as_int();
    differ = differ || p1.at(s).as_int() != p3.at(s).as_int();
  }
  CHECK(same);
  CHECK(differ);
}

TEST_CASE("generalized shift with full subgroup is the trivial action") {
  auto z2 = std::make_shared<Group>(2);
  ActionPtr tau = trivial_action(z2, Alphabet::coin());
  Point p(tau, 7, 0);
  const CosetId c = Subgroup::full(z2).coset_of(z2->identity());
  const auto base = p.at(Site::of_coset(c)).as_int();
  for (const auto& g : z2->box(2)) CHECK(p.at(g, Site::of_coset(c)).as_int() == base);
}

TEST_CASE("coset coordinate orbits follow the quotient arithmetic") {
  auto z2 = std::make_shared<Group>(2);
  auto h = std::make_shared<Subgroup>(z2, std::vector<std::vector<std::int64_t>>{{1, 0}});
  ActionPtr a = generalized_coset_shift(h, Alphabet::coin());
  Point p(a, 31, 2);
  // (0,1) moves the residue-0 coset to residue 1: reading coset 1 under the
  // transform equals reading coset 0 untransformed, exactly.
  const CosetId c0 = h->coset_of(z2->identity());
  const CosetId c1 = h->coset_of(lat(z2, {0, 1}));
  CHECK(p.at(lat(z2, {0, 1}), Site::of_coset(c1)).as_int() ==
        p.at(Site::of_coset(c0)).as_int());
}

TEST_CASE("measure preservation across handle kinds") {
  auto z1 = std::make_shared<Group>(1);
  auto z2 = std::make_shared<Group>(2);
  auto h = std::make_shared<Subgroup>(z2, std::vector<std::vector<std::int64_t>>{{1, 0}});
  auto h2 = std::make_shared<Subgroup>(z1, std::vector<std::vector<std::int64_t>>{{2}});

  Window wz1 = {z1->identity(), lat(z1, {1})};
  Window wz2 = {z2->identity(), lat(z2, {0, 1})};
  const std::int64_t n = 20000;

  SUBCASE("bernoulli") {
    ActionPtr a = bernoulli_shift(z1, Alphabet::coin());
    const Observable phi = Observable::coordinate(Site::of_elem(z1->identity()), 2);
    for (const auto& g : z1->box(2))
      CHECK(self_l1(a, phi, wz1, g, n, 41) < 3.0 * std::sqrt(4.0 / n));
  }
  SUBCASE("generalized coset shift") {
    ActionPtr a = generalized_coset_shift(h, Alphabet::coin());
    const Observable phi =
        Observable::coordinate(Site::of_coset(h->coset_of(z2->identity())), 2);
    for (const auto& g : z2->box(1))
      CHECK(self_l1(a, phi, wz2, g, n, 43) < 3.0 * std::sqrt(4.0 / n));
  }
  SUBCASE("coinduced") {
    ActionPtr cell = bernoulli_shift_subgroup(h2, Alphabet::coin());
    ActionPtr a = coinduce(cell, h2);
    const Observable phi = Observable::inner_coordinate(
        Site::of_coset(h2->coset_of(z1->identity())), Site::of_elem(z1->identity()),
        2);
    for (const auto& g : z1->box(2))
      CHECK(self_l1(a, phi, wz1, g, n, 47) < 3.0 * std::sqrt(4.0 / n));
  }
  SUBCASE("finite rotation") {
    FiniteHom hom;
    hom.lattice_gen_images = {1};
    ActionPtr a = finite_action(z1, FiniteGroup::cyclic(4), hom);
    const Observable phi = Observable::coordinate(Site::unit(), 4);
    for (const auto& g : z1->box(2))
      CHECK(self_l1(a, phi, wz1, g, n, 53) < 3.0 * std::sqrt(8.0 / n));
  }
}

TEST_CASE("co-induced action law holds exactly on evaluated cells") {
  auto z2 = std::make_shared<Group>(2);
  auto h = std::make_shared<Subgroup>(z2, std::vector<std::vector<std::int64_t>>{{1, 0}});
  ActionPtr cell = bernoulli_shift_subgroup(h, Alphabet::coin());
  ActionPtr a = coinduce(cell, h);
  Point p(a, 61, 9);

  for (const auto& g0 : z2->box(1))
    for (const auto& g1 : z2->box(1))
      for (const auto& c : h->enumerate_cosets(1)) {
        const Site t = Site::of_coset(c);
        const InnerPointRef direct = p.at(z2->compose(g0, g1), t).as_inner();
        // Two-step route: W(g0, t) W(g1, g0^{-1} t) on the doubly-shifted cell.
        const InnerPointRef w0 = p.at(g0, t).as_inner();
        const CosetId t1 = h->coset_of(z2->compose(z2->inverse(g0), h->section(c)));
        const InnerPointRef w1 = p.at(g1, Site::of_coset(t1)).as_inner();
        CHECK(direct.stream == w1.stream);
        CHECK(direct.pending == z2->compose(w0.pending, w1.pending));
      }
}

TEST_CASE("co-induction from the full group degenerates to the action itself") {
  auto z1 = std::make_shared<Group>(1);
  auto full = std::make_shared<Subgroup>(Subgroup::full(z1));
  ActionPtr cell = bernoulli_shift(z1, Alphabet::coin());
  ActionPtr a = coinduce(cell, full);
  Point p(a, 67, 1);
  const CosetId c = full->coset_of(z1->identity());
  for (const auto& g : z1->box(3)) {
    const InnerPointRef ref = p.at(g, Site::of_coset(c)).as_inner();
    // Single coset: rho(g^{-1}, H) = g^{-1}, so the twist is a(g).
    CHECK(ref.pending == g);
  }
}

TEST_CASE("co-induction matches a direct simulation of the constrained space") {
  // G = Z, H = 2Z, a = Bernoulli coin shift of H. The oracle samples the
  // constrained space Z = {z : a(h^{-1}) z(g) = z(gh)} directly with its own
  // generator, checks the constraint identity exactly, and tabulates the
  // windowed law of z -> z(sigma(c0))(0) under the action (g z)(f) = z(g^{-1} f).
  auto z1 = std::make_shared<Group>(1);
  auto h = std::make_shared<Subgroup>(z1, std::vector<std::vector<std::int64_t>>{{2}});

  const std::int64_t n = 40000;
  Window window = {lat(z1, {-1}), z1->identity(), lat(z1, {1})};

  std::map<std::vector<std::int64_t>, std::int64_t> oracle_counts;
  {
    std::mt19937_64 gen(0xfeedbeef);
    std::bernoulli_distribution coin(0.5);
    for (std::int64_t s = 0; s < n; ++s) {
      // Independent X-configurations per coset residue, materialized on a
      // window of H-coordinates; X = {0,1}^H.
      std::map<std::pair<std::int64_t, std::int64_t>, int> cells;  // (residue, h)
      auto x_val = [&](std::int64_t res, std::int64_t hc) {
        const auto key = std::make_pair(res, hc);
        auto it = cells.find(key);
        if (it == cells.end()) it = cells.emplace(key, coin(gen) ? 1 : 0).first;
        return it->second;
      };
      // z(g) = a(h_g^{-1}) x_{res(g)} with h_g = g - res(g); evaluated at an
      // H-coordinate s gives x_{res(g)}(h_g + s).
      auto z_at = [&](std::int64_t g, std::int64_t hc) {
        const std::int64_t res = ((g % 2) + 2) % 2;
        return x_val(res, (g - res) + hc);
      };
      // Constraint: z(g h)(s) = (a(h^{-1}) z(g))(s) = z(g)(h + s).
      for (std::int64_t g = -2; g <= 2; ++g)
        for (std::int64_t hc : {-2, 0, 2})
          REQUIRE(z_at(g + hc, 0) == z_at(g, hc));
      // Windowed tuple of (f z) -> z(f^{-1} sigma(c0))(0) = z(-f)(0).
      std::vector<std::int64_t> tuple;
      for (const auto& f : window) tuple.push_back(z_at(-f.lattice[0], 0));
      ++oracle_counts[tuple];
    }
  }

  ActionPtr cell = bernoulli_shift_subgroup(h, Alphabet::coin());
  ActionPtr a = coinduce(cell, h);
  const Observable phi = Observable::inner_coordinate(
      Site::of_coset(h->coset_of(z1->identity())), Site::of_elem(z1->identity()), 2);
  const auto ours = window_distribution(a, phi, window, n, 71, 4);

  WindowDistribution oracle;
  oracle.window = window;
  oracle.total = n;
  oracle.counts = std::move(oracle_counts);
  CHECK(l1_distance(ours, oracle) < 0.03);
}

TEST_CASE("product actions have independent factors and exact projections") {
  auto z1 = std::make_shared<Group>(1);
  ActionPtr a = bernoulli_shift(z1, Alphabet::coin());
  ActionPtr tau = trivial_action(z1, Alphabet::coin());
  ActionPtr prod = product_action(a, tau);

  // Observables ignoring the trivial factor reproduce a's law.
  Window w = {z1->identity(), lat(z1, {1})};
  Observable::Probe pr;
  pr.site = Site::of_pair(0, Site::of_elem(z1->identity()));
  pr.cardinality = 2;
  const Observable phi_prod({pr});
  const Observable phi = Observable::coordinate(Site::of_elem(z1->identity()), 2);
  const auto d1 = window_distribution(prod, phi_prod, w, 30000, 73, 2);
  const auto d2 = window_distribution(a, phi, w, 30000, 74, 2);
  const auto cert = defect_certificate(d1, d2);
  CHECK(cert.defect <= cert.slack);

  // Product of two coin shifts = one 4-letter Bernoulli shift: exact law.
  ActionPtr b = bernoulli_shift(z1, Alphabet::coin());
  ActionPtr prod2 = product_action(a, b);
  Observable::Probe p0, p1;
  p0.site = Site::of_pair(0, Site::of_elem(z1->identity()));
  p0.cardinality = 2;
  p1.site = Site::of_pair(1, Site::of_elem(z1->identity()));
  p1.cardinality = 2;
  const Observable pair_obs({p0, p1});
  const auto d3 = window_distribution(prod2, pair_obs, {z1->identity()}, 100000, 75, 4);
  double l1 = 0.0;
  for (std::int64_t v = 0; v < 4; ++v) {
    const auto it = d3.counts.find({v});
    const double e =
        it == d3.counts.end() ? 0.0 : static_cast<double>(it->second) / d3.total;
    l1 += std::abs(e - 0.25);
  }
  CHECK(l1 < 0.02);
}

TEST_CASE("quotient lift kills the subgroup exactly") {
  auto z2 = std::make_shared<Group>(2);
  auto h = std::make_shared<Subgroup>(z2, std::vector<std::vector<std::int64_t>>{{1, 0}});
  const GroupPtr q = h->quotient_group();
  ActionPtr b = bernoulli_shift(q, Alphabet::coin());
  ActionPtr lifted = quotient_lift(b, h);

  Point p(lifted, 77, 3);
  for (const auto& qe : q->box(2)) {
    const Site s = Site::of_elem(qe);
    const auto base = p.at(s).as_int();
    // h in H acts as the identity.
    CHECK(p.at(lat(z2, {5, 0}), s).as_int() == base);
    CHECK(p.at(lat(z2, {-3, 0}), s).as_int() == base);
  }
  // (0,1) acts as the generator shift of the quotient.
  const GroupElement gen_q = h->project(lat(z2, {0, 1}));
  for (const auto& qe : q->box(1)) {
    const Site s = Site::of_elem(q->compose(gen_q, qe));
    CHECK(p.at(lat(z2, {0, 1}), s).as_int() == p.at(Site::of_elem(qe)).as_int());
  }
}

TEST_CASE("restriction is the same space with a smaller advertised domain") {
  auto z2 = std::make_shared<Group>(2);
  auto h = std::make_shared<Subgroup>(z2, std::vector<std::vector<std::int64_t>>{{1, 0}});
  ActionPtr a = bernoulli_shift(z2, Alphabet::coin());
  ActionPtr r = restrict_action(a, h);
  CHECK(r->domain() != nullptr);
  Point pa(a, 83, 0), pr(r, 83, 0);
  for (const auto& e : z2->box(2)) {
    const Site s = Site::of_elem(e);
    CHECK(pa.at(s).as_int() == pr.at(s).as_int());
    CHECK(pa.at(lat(z2, {1, 1}), s).as_int() == pr.at(lat(z2, {1, 1}), s).as_int());
  }
}

TEST_CASE("finite actions rotate atoms through the homomorphism") {
  auto z1 = std::make_shared<Group>(1);
  const FiniteGroup c4 = FiniteGroup::cyclic(4);
  FiniteHom hom;
  hom.lattice_gen_images = {1};
  ActionPtr a = finite_action(z1, c4, hom);

  Point p(a, 89, 2);
  const int atom = static_cast<int>(p.at(Site::unit()).as_int());
  CHECK(p.at(lat(z1, {1}), Site::unit()).as_int() == (atom + 1) % 4);
  CHECK(p.at(lat(z1, {-1}), Site::unit()).as_int() == (atom + 3) % 4);

  // Window law over {0, +1}: supported on the 4 consecutive pairs, each 1/4.
  const Observable phi = Observable::coordinate(Site::unit(), 4);
  Window w = {z1->identity(), lat(z1, {1})};
  const auto dist = window_distribution(a, phi, w, 40000, 91, 2);
  CHECK(dist.counts.size() == 4);
  double l1 = 0.0;
  for (std::int64_t v = 0; v < 4; ++v) {
    const auto it = dist.counts.find({v, (v + 1) % 4});
    const double e =
        it == dist.counts.end() ? 0.0 : static_cast<double>(it->second) / dist.total;
    l1 += std::abs(e - 0.25);
  }
  CHECK(l1 < 0.02);

  // The trivial quotient gives the trivial action on one atom.
  FiniteHom triv;
  triv.lattice_gen_images = {0};
  ActionPtr t = finite_action(z1, FiniteGroup::trivial(), triv);
  Point pt(t, 93, 0);
  CHECK(pt.at(lat(z1, {7}), Site::unit()).as_int() == pt.at(Site::unit()).as_int());
}

TEST_CASE("finite action validation rejects non-homomorphisms") {
  auto z2 = std::make_shared<Group>(2);
  const FiniteGroup s3 = FiniteGroup::symmetric(3);
  FiniteHom bad;
  bad.lattice_gen_images = {1, 2};  // transpositions that do not commute
  CHECK_THROWS(finite_action(z2, s3, bad));

  auto s3g = std::make_shared<Group>(0, FiniteGroup::symmetric(3));
  FiniteHom not_hom;
  not_hom.finite_images = {0, 0, 0, 1, 2, 0};
  CHECK_THROWS(finite_action(s3g, FiniteGroup::cyclic(3), not_hom));
}

TEST_CASE("alphabet validation") {
  Alphabet bad;
  bad.weights = {0.5, 0.6};
  CHECK_THROWS(bad.validate());
  bad.weights = {1.0, 0.0};
  CHECK_THROWS(bad.validate());
  CHECK_NOTHROW(Alphabet::uniform(3).validate());
}

TEST_CASE("inner shifts move cells without twisting them") {
  auto z2 = std::make_shared<Group>(2);
  auto h = std::make_shared<Subgroup>(z2, std::vector<std::vector<std::int64_t>>{{1, 0}});
  ActionPtr cell = bernoulli_shift(z2, Alphabet::coin());
  ActionPtr a = generalized_inner_shift(h, cell);
  Point p(a, 97, 4);
  for (const auto& g : z2->box(1))
    for (const auto& c : h->enumerate_cosets(1)) {
      const InnerPointRef ref = p.at(g, Site::of_coset(c)).as_inner();
      CHECK(z2->is_identity(ref.pending));
    }
}

TEST_CASE("handle construction errors") {
  auto z2 = std::make_shared<Group>(2);
  auto z1 = std::make_shared<Group>(1);
  auto h = std::make_shared<Subgroup>(z2, std::vector<std::vector<std::int64_t>>{{1, 0}});
  ActionPtr a2 = bernoulli_shift(z2, Alphabet::coin());
  ActionPtr a1 = bernoulli_shift(z1, Alphabet::coin());
  CHECK_THROWS(product_action(a2, a1));
  // Co-induction needs an action of the designated subgroup.
  CHECK_THROWS(coinduce(a2, h));
  // Quotient lift needs an action of the quotient group.
  CHECK_THROWS(quotient_lift(a2, h));
}

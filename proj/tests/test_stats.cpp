#include <doctest.h>

#include <cmath>
#include <sstream>

#include "wclab/stats.hpp"

using namespace wclab;

namespace {

GroupElement lat(const GroupPtr& g, std::vector<std::int64_t> v) {
  GroupElement e = g->identity();
  e.lattice = std::move(v);
  return e;
}

WindowDistribution make_dist(std::map<std::vector<std::int64_t>, std::int64_t> counts) {
  WindowDistribution d;
  d.counts = std::move(counts);
  for (const auto& [k, v] : d.counts) d.total += v;
  return d;
}

}  // namespace

TEST_CASE("l1 distance basics") {
  const auto p = make_dist({{{0}, 50}, {{1}, 50}});
  const auto q = make_dist({{{0}, 100}});
  const auto r = make_dist({{{2}, 70}, {{3}, 30}});
  CHECK(l1_distance(p, p) == 0.0);
  CHECK(l1_distance(p, q) == doctest::Approx(1.0));
  CHECK(l1_distance(p, r) == doctest::Approx(2.0));
}

TEST_CASE("l1 is a metric on random distributions") {
  CounterRng rng(5, 77);
  for (int rep = 0; rep < 200; ++rep) {
    auto rand_dist = [&]() {
      std::map<std::vector<std::int64_t>, std::int64_t> c;
      for (std::int64_t i = 0; i < 5; ++i)
        c[{i}] = 1 + static_cast<std::int64_t>(rng.next_unit() * 100);
      return make_dist(std::move(c));
    };
    const auto p = rand_dist(), q = rand_dist(), r = rand_dist();
    CHECK(l1_distance(p, q) == doctest::Approx(l1_distance(q, p)));
    CHECK(l1_distance(p, r) <= l1_distance(p, q) + l1_distance(q, r) + 1e-12);
    CHECK(l1_distance(p, q) >= 0.0);
    CHECK(l1_distance(p, q) <= 2.0);
  }
}

TEST_CASE("arity mismatch is rejected") {
  const auto p = make_dist({{{0}, 10}});
  const auto q = make_dist({{{0, 1}, 10}});
  WindowDistribution pw = p, qw = q;
  auto z1 = std::make_shared<Group>(1);
  pw.window = {z1->identity()};
  qw.window = {z1->identity(), lat(z1, {1})};
  CHECK_THROWS(l1_distance(pw, qw));
}

TEST_CASE("window distributions are seed-deterministic and worker-invariant") {
  auto z1 = std::make_shared<Group>(1);
  ActionPtr a = bernoulli_shift(z1, Alphabet::coin());
  const Observable phi = Observable::coordinate(Site::of_elem(z1->identity()), 2);
  Window w = {lat(z1, {-1}), z1->identity(), lat(z1, {1})};
  const auto d1 = window_distribution(a, phi, w, 5000, 123, 1);
  const auto d2 = window_distribution(a, phi, w, 5000, 123, 3);
  const auto d3 = window_distribution(a, phi, w, 5000, 123, 7);
  const auto d4 = window_distribution(a, phi, w, 5000, 124, 1);
  CHECK(d1.counts == d2.counts);
  CHECK(d1.counts == d3.counts);
  CHECK(d1.counts != d4.counts);
}

TEST_CASE("containment defect: shared seed vanishes, independent seeds stay in slack") {
  auto z1 = std::make_shared<Group>(1);
  ActionPtr a = bernoulli_shift(z1, Alphabet::coin());
  const Observable phi = Observable::coordinate(Site::of_elem(z1->identity()), 2);
  Window w = {z1->identity(), lat(z1, {1})};
  const auto shared = containment_defect(a, a, phi, phi, w, 20000, 9, 9, 2);
  CHECK(shared.defect == 0.0);
  const auto indep = containment_defect(a, a, phi, phi, w, 20000, 9, 10, 2);
  CHECK(indep.defect > 0.0);
  CHECK(indep.defect <= indep.slack);
}

TEST_CASE("self-comparison stays below slack in at least 95 of 100 repetitions") {
  auto z1 = std::make_shared<Group>(1);
  ActionPtr a = bernoulli_shift(z1, Alphabet::coin());
  const Observable phi = Observable::coordinate(Site::of_elem(z1->identity()), 2);
  Window w = {lat(z1, {-1}), z1->identity(), lat(z1, {1})};
  int below = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const auto cert = containment_defect(a, a, phi, phi, w, 2000,
                                         chain(1000, rep), chain(2000, rep), 2);
    if (cert.defect <= cert.slack) ++below;
  }
  CHECK(below >= 95);
}

TEST_CASE("observable quantizer and label combination") {
  Observable::Probe p0;
  p0.site = Site::of_axis(0);
  p0.thresholds = {-1.0, 0.0, 1.0};
  Observable::Probe p1;
  p1.site = Site::of_axis(1);
  p1.cardinality = 3;
  const Observable obs({p0, p1});
  CHECK(obs.label_bound() == 12);

  const auto t = Observable::normal_quantile_thresholds(4);
  REQUIRE(t.size() == 3);
  CHECK(t[1] == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(t[0] == doctest::Approx(-0.6744897).epsilon(1e-5));
  CHECK(t[2] == doctest::Approx(0.6744897).epsilon(1e-5));
}

TEST_CASE("observable label space is capped") {
  std::vector<Observable::Probe> probes;
  for (int i = 0; i < 8; ++i) {
    Observable::Probe p;
    p.site = Site::of_axis(i);
    p.cardinality = 1000;
    probes.push_back(std::move(p));
  }
  CHECK_THROWS(Observable(probes));
}

TEST_CASE("csv export is deterministic and sorted") {
  const auto d = make_dist({{{1, 0}, 3}, {{0, 1}, 7}});
  std::ostringstream os;
  d.to_csv(os);
  CHECK(os.str() == "tuple,count\n0|1,7\n1|0,3\n");
}

TEST_CASE("wilson halfwidth shrinks like 1/sqrt(n)") {
  const double h1 = wilson_halfwidth(0.95, 1000);
  const double h2 = wilson_halfwidth(0.95, 100000);
  CHECK(h1 > h2);
  CHECK(h2 < 0.005);
  CHECK(wilson_halfwidth(0.0, 100) > 0.0);
}

TEST_CASE("defect slack follows the declared formula") {
  const double s = defect_slack(512, 100000, 0.01);
  CHECK(s == doctest::Approx(2.0 * std::sqrt(512.0 / 100000.0) +
                             2.0 * std::sqrt(std::log(100.0) / 200000.0)));
}

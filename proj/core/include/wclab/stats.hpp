#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <vector>

#include "wclab/actions.hpp"

namespace wclab {

// Anything that labels a transformed point: phi(g . x). Observables are the
// standard implementation; experiment drivers add coupled evaluators whose
// coordinate dependence is data-driven.
class LabelFunction {
 public:
  virtual ~LabelFunction() = default;
  virtual std::int64_t operator()(Point& p, const GroupElement& g) const = 0;
  // Upper bound on the number of distinct labels (for slack accounting and
  // sanity checks); 0 = unknown.
  virtual std::int64_t label_bound() const { return 0; }
};

// Finite-valued map with declared finite coordinate dependence. Each probe
// reads one cell (descending through inner-point cells along inner_path);
// discrete cells contribute their label, real cells are quantized by the
// probe's thresholds. Probe labels combine by mixed radix.
class Observable final : public LabelFunction {
 public:
  struct Probe {
    Site site;
    std::vector<Site> inner_path;
    std::vector<double> thresholds;  // sorted; empty for discrete cells
    int cardinality = 0;             // discrete: alphabet size; real: bins
  };

  explicit Observable(std::vector<Probe> probes);

  std::int64_t operator()(Point& p, const GroupElement& g) const override;
  std::int64_t label_bound() const override { return bound_; }
  const std::vector<Probe>& probes() const { return probes_; }

  // Label of one probe from an already-read head value: descends the inner
  // path, then quantizes real cells. Shared with coupled evaluators.
  static std::int64_t probe_label(Point& p, const Probe& probe, Value head);

  // Single discrete coordinate.
  static Observable coordinate(Site site, int cardinality);
  // Discrete coordinate behind one inner-point descent.
  static Observable inner_coordinate(Site outer, Site inner, int cardinality);
  // Single real coordinate quantized into equiprobable standard-normal bins.
  static Observable gaussian_bins(Site site, int bins);

  static std::vector<double> normal_quantile_thresholds(int bins);

 private:
  std::vector<Probe> probes_;
  std::int64_t bound_;
};

// Empirical law of the tuple (phi(a(f) x))_{f in F}.
struct WindowDistribution {
  Window window;
  std::map<std::vector<std::int64_t>, std::int64_t> counts;
  std::int64_t total = 0;

  void to_csv(std::ostream& os) const;
};

// n i.i.d. samples, fanned out over `workers` threads. Deterministic in
// (action, phi, F, n, seed); independent of the worker count.
WindowDistribution window_distribution(const ActionPtr& a, const LabelFunction& phi,
                                       const Window& f, std::int64_t n,
                                       std::uint64_t seed, int workers = 1);

// Total variation style L1 on the union support; in [0, 2].
double l1_distance(const WindowDistribution& p, const WindowDistribution& q);

struct DefectCertificate {
  double defect = 0.0;
  double slack = 0.0;
  std::int64_t support = 0;   // union support size
  std::int64_t samples = 0;
  double delta = 0.01;
};

DefectCertificate defect_certificate(const WindowDistribution& pa,
                                     const WindowDistribution& pb);

// One-sided witnessed bound: true defect <= defect + slack with confidence
// 1 - 2*delta. Seeds are passed per side so callers choose shared or
// independent randomness.
DefectCertificate containment_defect(const ActionPtr& a, const ActionPtr& b,
                                     const LabelFunction& phi,
                                     const LabelFunction& psi, const Window& f,
                                     std::int64_t n, std::uint64_t seed_a,
                                     std::uint64_t seed_b, int workers = 1);

double defect_slack(std::int64_t support, std::int64_t n, double delta = 0.01);
double wilson_halfwidth(double fraction, std::int64_t n, double z = 1.96);

}  // namespace wclab

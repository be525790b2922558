#pragma once

#include <functional>
#include <optional>

#include "wclab/actions.hpp"
#include "wclab/stats.hpp"

namespace wclab {

// Rare-marker rule: anchors are occurrences of `pattern` along the first
// lattice axis; the label is the displacement to the nearest anchor within
// the search radius (ell-infinity, lexicographic tie-break).
struct MarkerRule {
  std::vector<int> pattern;
  int radius = 0;

  void validate() const;
  // Occurrence probability of the pattern at a fixed site under the alphabet.
  double density(const Alphabet& alphabet) const;
  // Search radius making the no-anchor probability provably below
  // `bottom_prob` (disjoint-block tail bound), for a rank-`dim` lattice.
  static int radius_for(double density, int pattern_len, int dim, double bottom_prob);
};

// Symbol accessor over the quotient group's sites: (lattice coords, finite
// index) -> symbol. Reads are cached by the scanner.
using SymbolAccessor =
    std::function<int(const std::vector<std::int64_t>&, int finite)>;

// Displacement to the nearest anchor as a group element of `q`;
// nullopt = no anchor within the radius.
std::optional<GroupElement> marker_scan(const Group& q, const SymbolAccessor& at,
                                        const MarkerRule& rule);

// J for a point of a Bernoulli-type shift of a lattice(+finite) group,
// evaluated on the transformed point f . y.
std::optional<GroupElement> marker_labeling(Point& y, const GroupElement& f,
                                            const MarkerRule& rule);

// Anchor start sites of f . y with coordinates in the centered box; used by
// the exact shift-covariance check.
std::vector<GroupElement> marker_anchors(Point& y, const GroupElement& f,
                                         const MarkerRule& rule, int box_radius);

struct LabelingReport {
  Window window;
  std::int64_t samples = 0;
  double fraction = 0.0;   // empirical measure of {y : J(f y) = f J(y) for all f}
  double halfwidth = 0.0;  // Wilson interval half-width
  std::int64_t bottoms = 0;  // samples with a missing anchor (counted as failures)
};

LabelingReport equivariance_defect(const ActionPtr& b, const MarkerRule& rule,
                                   const Window& f, std::int64_t n,
                                   std::uint64_t seed, int workers = 1);

struct MarkerCalibration {
  MarkerRule rule;
  bool achieved = false;
  double pilot_fraction = 0.0;
  int pattern_symbol = 0;
};

// Smallest pattern length from a fixed ladder whose pilot equivariance
// fraction reaches 1 - eps; radius from the tail bound at eps/10. `alphabet`
// is the cell alphabet of b (fixes the pattern symbol and its density).
MarkerCalibration calibrate_marker_rule(const ActionPtr& b, const Alphabet& alphabet,
                                        const Window& f, double eps,
                                        std::uint64_t seed,
                                        std::int64_t pilot_samples = 4000,
                                        int workers = 1);

}  // namespace wclab

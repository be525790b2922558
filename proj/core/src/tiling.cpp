#include "wclab/tiling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "wclab/parallel.hpp"

namespace wclab {

void MarkerRule::validate() const {
  if (pattern.empty()) throw std::invalid_argument("marker pattern is empty");
  if (radius < static_cast<int>(pattern.size()))
    throw std::invalid_argument("marker radius must cover the pattern extent");
}

double MarkerRule::density(const Alphabet& alphabet) const {
  double p = 1.0;
  for (int s : pattern) {
    if (s < 0 || s >= alphabet.size())
      throw std::invalid_argument("marker pattern symbol outside the alphabet");
    p *= alphabet.weights[s];
  }
  return p;
}

int MarkerRule::radius_for(double density, int pattern_len, int dim,
                           double bottom_prob) {
  if (!(density > 0.0) || !(density < 1.0))
    throw std::invalid_argument("marker density must lie in (0,1)");
  // Disjoint pattern windows along the first axis are independent anchor
  // trials; rows in the remaining axes multiply the trial count.
  for (int r = pattern_len; r <= (1 << 20); r *= 2) {
    const double blocks = std::floor(static_cast<double>(2 * r + 2 - pattern_len) /
                                     pattern_len);
    double rows = 1.0;
    for (int k = 1; k < dim; ++k) rows *= 2.0 * r + 1.0;
    const double log_miss = blocks * rows * std::log1p(-density);
    if (log_miss < std::log(bottom_prob)) return r;
  }
  throw std::invalid_argument("marker pattern too rare for a bounded search radius");
}

namespace {

// Symbol reads cached with packed integer keys for rank <= 2 (the common
// case), falling back to element keys for higher ranks.
class ScanCache {
 public:
  ScanCache(int dim, int nf, std::int64_t coord_bound, const SymbolAccessor& at)
      : dim_(dim), nf_(nf), bound_(coord_bound + 1), at_(at) {}

  int read(const std::vector<std::int64_t>& coords, int fin) {
    if (dim_ <= 2) {
      std::int64_t key = coords[0] + bound_;
      if (dim_ == 2) key += (2 * bound_ + 1) * (coords[1] + bound_);
      key = key * nf_ + fin;
      const auto it = packed_.find(key);
      if (it != packed_.end()) return it->second;
      const int v = at_(coords, fin);
      packed_.emplace(key, v);
      return v;
    }
    GroupElement key;
    key.lattice = coords;
    key.finite = fin;
    const auto it = general_.find(key);
    if (it != general_.end()) return it->second;
    const int v = at_(coords, fin);
    general_.emplace(std::move(key), v);
    return v;
  }

 private:
  int dim_;
  int nf_;
  std::int64_t bound_;
  const SymbolAccessor& at_;
  std::unordered_map<std::int64_t, int> packed_;
  std::unordered_map<GroupElement, int, GroupElementHash> general_;
};

bool anchor_at(ScanCache& cache, std::vector<std::int64_t> coords, int fin,
               const std::vector<int>& pattern) {
  for (std::size_t j = 0; j < pattern.size(); ++j) {
    if (cache.read(coords, fin) != pattern[j]) return false;
    coords[0] += 1;
  }
  return true;
}

// Visit exactly the lattice sites with |x|_inf == s, in lexicographic
// order; stop early when the visitor returns true.
bool visit_shell_rec(std::vector<std::int64_t>& x, int i, std::int64_t s,
                     bool pinned, const std::function<bool(const std::vector<std::int64_t>&)>& visit) {
  const int dim = static_cast<int>(x.size());
  if (i == dim) return pinned ? visit(x) : false;
  if (i == dim - 1 && !pinned) {
    // Last coordinate must realize the shell.
    for (std::int64_t v : {-s, s}) {
      x[i] = v;
      if (visit(x)) return true;
      if (s == 0) break;
    }
    return false;
  }
  for (std::int64_t v = -s; v <= s; ++v) {
    x[i] = v;
    if (visit_shell_rec(x, i + 1, s, pinned || std::llabs(v) == s, visit)) return true;
  }
  return false;
}

bool visit_shell(int dim, std::int64_t s,
                 const std::function<bool(const std::vector<std::int64_t>&)>& visit) {
  std::vector<std::int64_t> x(dim, 0);
  return visit_shell_rec(x, 0, s, false, visit);
}

}  // namespace

std::optional<GroupElement> marker_scan(const Group& q, const SymbolAccessor& at,
                                        const MarkerRule& rule) {
  rule.validate();
  const int dim = q.lattice_dim();
  if (dim < 1)
    throw std::invalid_argument("marker labeling needs a lattice direction");
  const int nf = q.finite_size();
  ScanCache cache(dim, nf, rule.radius + static_cast<int>(rule.pattern.size()) + 1, at);

  for (std::int64_t s = 0; s <= rule.radius; ++s) {
    std::optional<GroupElement> best;
    visit_shell(dim, s, [&](const std::vector<std::int64_t>& x) {
      for (int fin = 0; fin < nf; ++fin) {
        if (anchor_at(cache, x, fin, rule.pattern)) {
          GroupElement g;
          g.lattice = x;
          g.finite = fin;
          best = std::move(g);
          return true;  // lexicographic first hit in the shell wins
        }
      }
      return false;
    });
    if (best) return best;
  }
  return std::nullopt;
}

std::optional<GroupElement> marker_labeling(Point& y, const GroupElement& f,
                                            const MarkerRule& rule) {
  const Group& q = y.action().group();
  SymbolAccessor at = [&](const std::vector<std::int64_t>& coords, int fin) {
    GroupElement site;
    site.lattice = coords;
    site.finite = fin;
    return static_cast<int>(y.at(f, Site::of_elem(std::move(site))).as_int());
  };
  return marker_scan(q, at, rule);
}

std::vector<GroupElement> marker_anchors(Point& y, const GroupElement& f,
                                         const MarkerRule& rule, int box_radius) {
  rule.validate();
  const Group& q = y.action().group();
  SymbolAccessor at = [&](const std::vector<std::int64_t>& coords, int fin) {
    GroupElement site;
    site.lattice = coords;
    site.finite = fin;
    return static_cast<int>(y.at(f, Site::of_elem(std::move(site))).as_int());
  };
  ScanCache cache(q.lattice_dim(), q.finite_size(),
                  box_radius + static_cast<int>(rule.pattern.size()) + 1, at);
  std::vector<GroupElement> out;
  for (const auto& g : q.box(box_radius))
    if (anchor_at(cache, g.lattice, g.finite, rule.pattern)) out.push_back(g);
  return out;
}

LabelingReport equivariance_defect(const ActionPtr& b, const MarkerRule& rule,
                                   const Window& f, std::int64_t n,
                                   std::uint64_t seed, int workers) {
  rule.validate();
  validate_window(b->group(), f);
  if (n < 1) throw std::invalid_argument("sample count must be positive");
  const Group& q = b->group();

  struct Tally {
    std::int64_t good = 0;
    std::int64_t bottoms = 0;
  };
  std::vector<Tally> tallies(std::max(1, workers));

  parallel_chunks(n, workers, [&](int w, std::int64_t lo, std::int64_t hi) {
    Tally& t = tallies[w];
    for (std::int64_t s = lo; s < hi; ++s) {
      Point y(b, seed, static_cast<std::uint64_t>(s));
      const auto j0 = marker_labeling(y, q.identity(), rule);
      if (!j0) {
        ++t.bottoms;
        continue;
      }
      bool ok = true;
      bool bottom = false;
      for (const auto& g : f) {
        const auto jg = marker_labeling(y, g, rule);
        if (!jg) {
          bottom = true;
          break;
        }
        if (!(*jg == q.compose(g, *j0))) {
          ok = false;
          break;
        }
      }
      if (bottom)
        ++t.bottoms;
      else if (ok)
        ++t.good;
    }
  });

  LabelingReport rep;
  rep.window = f;
  rep.samples = n;
  std::int64_t good = 0;
  for (const auto& t : tallies) {
    good += t.good;
    rep.bottoms += t.bottoms;
  }
  rep.fraction = static_cast<double>(good) / static_cast<double>(n);
  rep.halfwidth = wilson_halfwidth(rep.fraction, n);
  return rep;
}

MarkerCalibration calibrate_marker_rule(const ActionPtr& b, const Alphabet& alphabet,
                                        const Window& f, double eps,
                                        std::uint64_t seed,
                                        std::int64_t pilot_samples, int workers) {
  if (!(eps > 0.0) || !(eps < 1.0))
    throw std::invalid_argument("calibration target must lie in (0,1)");
  alphabet.validate();
  // Most likely symbol: the density ladder is its weight's powers.
  int symbol = 0;
  for (int i = 1; i < alphabet.size(); ++i)
    if (alphabet.weights[i] > alphabet.weights[symbol]) symbol = i;
  const double w = alphabet.weights[symbol];

  MarkerCalibration out;
  out.pattern_symbol = symbol;
  const int dim = b->group().lattice_dim();
  for (int len : {2, 4, 6, 8, 10, 12, 14, 16, 20, 24}) {
    const double density = std::pow(w, len);
    if (!(density > 0.0) || density >= 1.0) continue;
    MarkerRule rule;
    rule.pattern.assign(len, symbol);
    rule.radius = MarkerRule::radius_for(density, len, dim, eps / 10.0);
    const LabelingReport rep = equivariance_defect(
        b, rule, f, pilot_samples, chain(seed, 0x9a7bull + len), workers);
    if (rep.fraction > out.pilot_fraction) {
      out.pilot_fraction = rep.fraction;
      out.rule = rule;
    }
    if (rep.fraction >= 1.0 - 0.8 * eps) {
      out.rule = rule;
      out.pilot_fraction = rep.fraction;
      out.achieved = true;
      break;
    }
  }
  if (out.rule.pattern.empty())
    throw std::runtime_error("marker calibration could not build any rule");
  return out;
}

}  // namespace wclab

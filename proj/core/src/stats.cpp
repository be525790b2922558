#include "wclab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "wclab/parallel.hpp"

namespace wclab {

namespace {
constexpr std::int64_t kSupportCap = 1000000;
}

// ---------------------------------------------------------------------------
// Observable

Observable::Observable(std::vector<Probe> probes) : probes_(std::move(probes)) {
  if (probes_.empty()) throw std::invalid_argument("observable has no probes");
  bound_ = 1;
  for (auto& p : probes_) {
    if (!p.thresholds.empty()) {
      if (!std::is_sorted(p.thresholds.begin(), p.thresholds.end()))
        throw std::invalid_argument("quantizer thresholds must be sorted");
      p.cardinality = static_cast<int>(p.thresholds.size()) + 1;
    }
    if (p.cardinality < 1)
      throw std::invalid_argument("probe cardinality must be positive");
    if (bound_ > kSupportCap / p.cardinality)
      throw std::invalid_argument("observable label space too large");
    bound_ *= p.cardinality;
  }
}

std::int64_t Observable::probe_label(Point& p, const Probe& probe, Value head) {
  Value v = std::move(head);
  for (const auto& inner : probe.inner_path) {
    const InnerPointRef ref = v.as_inner();
    v = p.inner_at(ref, ref.action->group().identity(), inner);
  }
  if (probe.thresholds.empty()) {
    const std::int64_t l = v.as_int();
    if (l < 0 || l >= probe.cardinality)
      throw std::logic_error("discrete cell label out of declared range");
    return l;
  }
  const double x = v.as_real();
  return std::upper_bound(probe.thresholds.begin(), probe.thresholds.end(), x) -
         probe.thresholds.begin();
}

std::int64_t Observable::operator()(Point& p, const GroupElement& g) const {
  std::int64_t label = 0;
  for (const auto& probe : probes_)
    label = label * probe.cardinality + probe_label(p, probe, p.at(g, probe.site));
  return label;
}

Observable Observable::coordinate(Site site, int cardinality) {
  Probe p;
  p.site = std::move(site);
  p.cardinality = cardinality;
  return Observable({std::move(p)});
}

Observable Observable::inner_coordinate(Site outer, Site inner, int cardinality) {
  Probe p;
  p.site = std::move(outer);
  p.inner_path.push_back(std::move(inner));
  p.cardinality = cardinality;
  return Observable({std::move(p)});
}

std::vector<double> Observable::normal_quantile_thresholds(int bins) {
  if (bins < 2) throw std::invalid_argument("need at least 2 bins");
  // Inverse normal CDF by bisection on erf; plenty for fixed thresholds.
  auto inv_cdf = [](double q) {
    double lo = -10.0, hi = 10.0;
    for (int i = 0; i < 80; ++i) {
      const double mid = 0.5 * (lo + hi);
      const double c = 0.5 * std::erfc(-mid / std::sqrt(2.0));
      (c < q ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  };
  std::vector<double> t;
  for (int i = 1; i < bins; ++i)
    t.push_back(inv_cdf(static_cast<double>(i) / bins));
  return t;
}

Observable Observable::gaussian_bins(Site site, int bins) {
  Probe p;
  p.site = std::move(site);
  p.thresholds = normal_quantile_thresholds(bins);
  return Observable({std::move(p)});
}

// ---------------------------------------------------------------------------
// WindowDistribution

void WindowDistribution::to_csv(std::ostream& os) const {
  os << "tuple,count\n";
  for (const auto& [tuple, count] : counts) {
    for (std::size_t i = 0; i < tuple.size(); ++i) {
      if (i) os << "|";
      os << tuple[i];
    }
    os << "," << count << "\n";
  }
}

WindowDistribution window_distribution(const ActionPtr& a, const LabelFunction& phi,
                                       const Window& f, std::int64_t n,
                                       std::uint64_t seed, int workers) {
  validate_window(a->group(), f);
  if (n < 1) throw std::invalid_argument("sample count must be positive");

  using Counts = std::map<std::vector<std::int64_t>, std::int64_t>;
  std::vector<Counts> partial(std::max(1, workers));

  parallel_chunks(n, workers, [&](int w, std::int64_t lo, std::int64_t hi) {
    Counts& counts = partial[w];
    std::vector<std::int64_t> tuple(f.size());
    for (std::int64_t s = lo; s < hi; ++s) {
      Point p(a, seed, static_cast<std::uint64_t>(s));
      for (std::size_t i = 0; i < f.size(); ++i) tuple[i] = phi(p, f[i]);
      ++counts[tuple];
      if (static_cast<std::int64_t>(counts.size()) > kSupportCap)
        throw std::runtime_error("window distribution support exceeds cap");
    }
  });

  WindowDistribution out;
  out.window = f;
  out.total = n;
  for (auto& c : partial)
    for (auto& [tuple, count] : c) out.counts[tuple] += count;
  return out;
}

double l1_distance(const WindowDistribution& p, const WindowDistribution& q) {
  if (!p.window.empty() && !q.window.empty() && p.window.size() != q.window.size())
    throw std::invalid_argument("window arity mismatch");
  if (p.total == 0 || q.total == 0)
    throw std::invalid_argument("empty distribution");
  double d = 0.0;
  auto it_p = p.counts.begin();
  auto it_q = q.counts.begin();
  while (it_p != p.counts.end() || it_q != q.counts.end()) {
    if (it_q == q.counts.end() ||
        (it_p != p.counts.end() && it_p->first < it_q->first)) {
      d += static_cast<double>(it_p->second) / p.total;
      ++it_p;
    } else if (it_p == p.counts.end() || it_q->first < it_p->first) {
      d += static_cast<double>(it_q->second) / q.total;
      ++it_q;
    } else {
      d += std::abs(static_cast<double>(it_p->second) / p.total -
                    static_cast<double>(it_q->second) / q.total);
      ++it_p;
      ++it_q;
    }
  }
  return d;
}

double defect_slack(std::int64_t support, std::int64_t n, double delta) {
  return 2.0 * std::sqrt(static_cast<double>(support) / n) +
         2.0 * std::sqrt(std::log(1.0 / delta) / (2.0 * n));
}

DefectCertificate defect_certificate(const WindowDistribution& pa,
                                     const WindowDistribution& pb) {
  DefectCertificate cert;
  cert.defect = l1_distance(pa, pb);
  std::int64_t support = static_cast<std::int64_t>(pa.counts.size());
  for (const auto& [tuple, count] : pb.counts)
    if (!pa.counts.count(tuple)) ++support;
  cert.support = support;
  cert.samples = std::min(pa.total, pb.total);
  cert.delta = 0.01;
  cert.slack = defect_slack(support, cert.samples, cert.delta);
  return cert;
}

DefectCertificate containment_defect(const ActionPtr& a, const ActionPtr& b,
                                     const LabelFunction& phi,
                                     const LabelFunction& psi, const Window& f,
                                     std::int64_t n, std::uint64_t seed_a,
                                     std::uint64_t seed_b, int workers) {
  const WindowDistribution pa = window_distribution(a, phi, f, n, seed_a, workers);
  const WindowDistribution pb = window_distribution(b, psi, f, n, seed_b, workers);
  return defect_certificate(pa, pb);
}

double wilson_halfwidth(double fraction, std::int64_t n, double z) {
  const double nn = static_cast<double>(n);
  const double denom = 1.0 + z * z / nn;
  return (z / denom) *
         std::sqrt(fraction * (1.0 - fraction) / nn + z * z / (4.0 * nn * nn));
}

}  // namespace wclab

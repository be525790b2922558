#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "wclab/actions.hpp"
#include "wclab/stats.hpp"

namespace wclab {

// ---------------------------------------------------------------------------
// Kernels: G-invariant real positive-definite functions on a countable index
// set, presented as covariance oracles over sites.

class Kernel {
 public:
  virtual ~Kernel() = default;
  virtual double eval(const Site& s, const Site& t) const = 0;
  virtual Site act(const GroupElement& g, const Site& t) const = 0;
  virtual void validate_site(const Site& t) const = 0;
  virtual std::uint64_t tag() const = 0;
};

using KernelPtr = std::shared_ptr<const Kernel>;

// phi(s,t) = variance * [s == t] on any coordinate set.
KernelPtr white_noise_kernel(CoordinateSetPtr sites, double variance = 1.0);
// phi(s,t) = lambda^{|s-t|_1} on a lattice group (finite parts must match).
KernelPtr exp_decay_kernel(GroupPtr g, double lambda);

class Representation;
using RepresentationPtr = std::shared_ptr<const Representation>;

// phi(g1,g2) = <pi(g1) v, pi(g2) v> on group-element sites (the orbit kernel
// of a finite-dimensional representation).
KernelPtr rep_orbit_kernel(RepresentationPtr pi, Eigen::VectorXd v);

Eigen::MatrixXd kernel_gram(const Kernel& k, const std::vector<Site>& coords);

// LLT with additive jitter 1e-10*trace/dim on failure, one retry at 1e-8;
// then a hard error. Returns the lower factor.
Eigen::MatrixXd cholesky_with_jitter(const Eigen::MatrixXd& gram);

// Joint sampler for the centered Gaussian with covariance Gram(phi, coords).
// The factorization is computed once; draws are pure functions of
// (seed, stream).
class GaussianSampler {
 public:
  GaussianSampler(KernelPtr k, std::vector<Site> coords);
  const std::vector<Site>& coords() const { return coords_; }
  Eigen::VectorXd sample(std::uint64_t seed, std::uint64_t stream) const;

 private:
  KernelPtr kernel_;
  std::vector<Site> coords_;
  Eigen::MatrixXd chol_;
};

// One draw; restricting coords yields the restricted law (marginal
// consistency is statistical, not samplewise).
std::vector<double> gaussian_sample(const KernelPtr& k, const std::vector<Site>& coords,
                                    std::uint64_t seed);

// Gaussian shift action s_phi on the declared materialization window.
// Requesting a site outside the window is an error (correlated cells cannot
// be extended after sampling).
ActionPtr gaussian_shift(KernelPtr k, GroupPtr g, std::vector<Site> materialization);

// ---------------------------------------------------------------------------
// Orthogonal representations (finite-dimensional, lattice groups)

class Representation {
 public:
  // Representation of a lattice group: one orthogonal matrix per generator;
  // matrices must commute.
  Representation(GroupPtr g, std::vector<Eigen::MatrixXd> generator_matrices);
  // Representation of a lattice subgroup: one matrix per basis row.
  Representation(SubgroupPtr h, std::vector<Eigen::MatrixXd> basis_matrices);

  int dim() const { return dim_; }
  const Group& group() const { return *group_; }
  GroupPtr group_ptr() const { return group_; }
  const Subgroup* domain() const { return domain_.get(); }
  std::uint64_t tag() const { return tag_; }

  Eigen::MatrixXd matrix(const GroupElement& g) const;
  double coefficient(const GroupElement& g, const Eigen::VectorXd& v,
                     const Eigen::VectorXd& w) const;  // <pi(g) v, w>

  // pi restricted to a subgroup: basis matrices are pi evaluated on the rows.
  Representation restricted(SubgroupPtr h) const;

  // 2-dimensional rotation representation: generator i acts by R(angles[i]).
  static Representation rotation(GroupPtr g, const std::vector<double>& angles);

 private:
  void validate() const;

  GroupPtr group_;
  SubgroupPtr domain_;  // null for whole-group representations
  std::vector<Eigen::MatrixXd> mats_;
  int dim_;
  std::uint64_t tag_;
};

// Gaussian action of a finite-dimensional representation on R^N with the
// standard normal law: (g . x)(n) = (pi(g^{-1})^T x)(n).
ActionPtr rep_gaussian_action(RepresentationPtr pi);

// ---------------------------------------------------------------------------
// Induced representations on a coset truncation

class InducedRep {
 public:
  InducedRep(RepresentationPtr base, SubgroupPtr h, std::vector<CosetId> truncation);

  const Representation& base() const { return *base_; }
  const Subgroup& subgroup() const { return *h_; }
  const std::vector<CosetId>& truncation() const { return truncation_; }
  int base_dim() const { return base_->dim(); }
  int total_dim() const { return base_dim() * static_cast<int>(truncation_.size()); }

  int coset_index(const CosetId& c) const;  // -1 if outside the truncation
  int flat_index(int axis, int coset_idx) const {
    return coset_idx * base_dim() + axis;
  }

  // g . (e_m, kH) = (pi(rho(g,kH)) e_m, g kH); throws when the image coset
  // escapes the truncation.
  std::pair<Eigen::VectorXd, CosetId> apply_basis(const GroupElement& g, int axis,
                                                  const CosetId& c) const;
  // Dense block operator on the truncation; throws on escape.
  Eigen::MatrixXd block_matrix(const GroupElement& g) const;
  // <Ind(g) w1, w2> for flat block vectors.
  double coefficient(const GroupElement& g, const Eigen::VectorXd& w1,
                     const Eigen::VectorXd& w2) const;

 private:
  RepresentationPtr base_;
  SubgroupPtr h_;
  std::vector<CosetId> truncation_;
  std::unordered_map<CosetId, int, CosetIdHash> index_;
};

using InducedRepPtr = std::shared_ptr<const InducedRep>;

// Gaussian action of the induced block representation on its truncation.
// Sites are (axis, coset) pairs; evaluation throws if a window image leaves
// the truncation.
ActionPtr induced_gaussian_action(InducedRepPtr ind);

// ---------------------------------------------------------------------------
// Certificates

struct ZimmerReport {
  int folner_n = 0;           // chosen Folner parameter N
  bool achieved = false;      // deviation < eps within the cap
  double deviation = 0.0;     // max |<pi(g)v_i,v_j> - <Ind(g)w_i,w_j>|, direct
  double formula_deviation = 0.0;  // max |<pi(g)v_i,v_j>| (1 - <lambda(g)u_N,u_N>)
  double max_coefficient = 0.0;
  double min_overlap = 1.0;   // min_g <lambda(g) u_N, u_N>
};

// Lemma-16-style witness: w_i = v_i (x) u_N with u_N the normalized
// indicator of a Folner set of cosets. Searches N <= n_cap for deviation
// < eps; reports the best N found (the last tried when not achieved).
ZimmerReport zimmer_witness(const Representation& pi,
                            const std::vector<Eigen::VectorXd>& vectors,
                            const SubgroupPtr& h, const Window& f, double eps,
                            int n_cap = 65536);

// <lambda_{G/H}(g) u_N, u_N> for the normalized indicator of the given coset
// set: exact overlap count / size.
double quasi_regular_overlap(const Subgroup& h, const GroupElement& g,
                             const std::vector<CosetId>& cosets);

// Folner coset family: all cosets when the index is finite, otherwise the
// projection of the quotient box {0..n-1}^k.
std::vector<CosetId> folner_cosets(const SubgroupPtr& h, int n);

struct LemmaCommuteReport {
  double cov_max_diff = 0.0;  // exact block covariance vs twisted-shift covariance
  double l1 = 0.0;
  double slack = 0.0;
  bool pass = false;
};

// Checks CInd_H^G(a(pi)) against a(Ind_H^G(pi)): coordinate covariances in
// closed form through both routes, then windowed quantized laws.
LemmaCommuteReport verify_lemma_commute(const RepresentationPtr& pi_of_h,
                                        const SubgroupPtr& h, const Window& f,
                                        int bins, std::int64_t n_samples,
                                        std::uint64_t seed, int workers = 1);

// p_n(w)(t) = |Fn|^{-1/2} sum_{x in Fn} w(x)(t) for a point of an
// inner-cell coset space; returns the averaged values at the inner sites.
std::vector<double> folner_average_factor(Point& w, const std::vector<CosetId>& fn,
                                          const std::vector<Site>& inner_sites);

}  // namespace wclab

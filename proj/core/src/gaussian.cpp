#include "wclab/gaussian.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace wclab {

// ---------------------------------------------------------------------------
// Kernels

namespace {

class WhiteNoiseKernel final : public Kernel {
 public:
  WhiteNoiseKernel(CoordinateSetPtr sites, double variance)
      : sites_(std::move(sites)), variance_(variance) {
    if (!(variance_ > 0.0)) throw std::invalid_argument("variance must be positive");
    StreamHash h(0x77686974u);
    h.absorb(sites_->tag());
    h.absorb(std::bit_cast<std::uint64_t>(variance_));
    tag_ = h.digest();
  }

  double eval(const Site& s, const Site& t) const override {
    return s == t ? variance_ : 0.0;
  }
  Site act(const GroupElement& g, const Site& t) const override {
    return sites_->act(g, t);
  }
  void validate_site(const Site& t) const override { sites_->validate_site(t); }
  std::uint64_t tag() const override { return tag_; }

 private:
  CoordinateSetPtr sites_;
  double variance_;
  std::uint64_t tag_;
};

class ExpDecayKernel final : public Kernel {
 public:
  ExpDecayKernel(GroupPtr g, double lambda) : g_(std::move(g)), lambda_(lambda) {
    if (!(lambda > 0.0) || !(lambda < 1.0))
      throw std::invalid_argument("decay parameter must lie in (0,1)");
    StreamHash h(0x64656361u);
    h.absorb(std::bit_cast<std::uint64_t>(lambda_));
    h.absorb(static_cast<std::uint64_t>(g_->lattice_dim()));
    tag_ = h.digest();
  }

  double eval(const Site& s, const Site& t) const override {
    if (s.elem.finite != t.elem.finite) return 0.0;
    std::int64_t dist = 0;
    for (std::size_t i = 0; i < s.elem.lattice.size(); ++i)
      dist = checked_add(dist,
                         std::llabs(checked_sub(s.elem.lattice[i], t.elem.lattice[i])));
    return std::pow(lambda_, static_cast<double>(dist));
  }
  Site act(const GroupElement& g, const Site& t) const override {
    return Site::of_elem(g_->compose(g, t.elem));
  }
  void validate_site(const Site& t) const override {
    if (t.kind != SiteKind::Elem)
      throw std::invalid_argument("decay kernel expects group-element sites");
    g_->check_element(t.elem);
  }
  std::uint64_t tag() const override { return tag_; }

 private:
  GroupPtr g_;
  double lambda_;
  std::uint64_t tag_;
};

class RepOrbitKernel final : public Kernel {
 public:
  RepOrbitKernel(RepresentationPtr pi, Eigen::VectorXd v)
      : pi_(std::move(pi)), v_(std::move(v)) {
    if (v_.size() != pi_->dim())
      throw std::invalid_argument("orbit vector dimension mismatch");
    StreamHash h(0x6f726269u);
    h.absorb(pi_->tag());
    for (int i = 0; i < v_.size(); ++i)
      h.absorb(std::bit_cast<std::uint64_t>(v_[i]));
    tag_ = h.digest();
  }

  double eval(const Site& s, const Site& t) const override {
    const Eigen::VectorXd a = pi_->matrix(s.elem) * v_;
    const Eigen::VectorXd b = pi_->matrix(t.elem) * v_;
    return a.dot(b);
  }
  Site act(const GroupElement& g, const Site& t) const override {
    return Site::of_elem(pi_->group().compose(g, t.elem));
  }
  void validate_site(const Site& t) const override {
    if (t.kind != SiteKind::Elem)
      throw std::invalid_argument("orbit kernel expects group-element sites");
    pi_->group().check_element(t.elem);
  }
  std::uint64_t tag() const override { return tag_; }

 private:
  RepresentationPtr pi_;
  Eigen::VectorXd v_;
  std::uint64_t tag_;
};

}  // namespace

KernelPtr white_noise_kernel(CoordinateSetPtr sites, double variance) {
  return std::make_shared<WhiteNoiseKernel>(std::move(sites), variance);
}

KernelPtr exp_decay_kernel(GroupPtr g, double lambda) {
  return std::make_shared<ExpDecayKernel>(std::move(g), lambda);
}

KernelPtr rep_orbit_kernel(RepresentationPtr pi, Eigen::VectorXd v) {
  return std::make_shared<RepOrbitKernel>(std::move(pi), std::move(v));
}

Eigen::MatrixXd kernel_gram(const Kernel& k, const std::vector<Site>& coords) {
  const int n = static_cast<int>(coords.size());
  Eigen::MatrixXd g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const double v = k.eval(coords[i], coords[j]);
      g(i, j) = v;
      g(j, i) = v;
    }
  return g;
}

Eigen::MatrixXd cholesky_with_jitter(const Eigen::MatrixXd& gram) {
  const double scale = gram.trace() / std::max<int>(1, gram.rows());
  for (double jitter : {0.0, 1e-10 * scale, 1e-8 * scale}) {
    Eigen::MatrixXd m = gram;
    if (jitter > 0.0)
      m += jitter * Eigen::MatrixXd::Identity(gram.rows(), gram.cols());
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() == Eigen::Success) return llt.matrixL();
  }
  throw std::runtime_error("Gram matrix indefinite beyond jitter tolerance");
}

// ---------------------------------------------------------------------------
// Joint sampling

GaussianSampler::GaussianSampler(KernelPtr k, std::vector<Site> coords)
    : kernel_(std::move(k)), coords_(std::move(coords)) {
  if (coords_.empty()) throw std::invalid_argument("no coordinates to sample");
  for (const auto& s : coords_) kernel_->validate_site(s);
  chol_ = cholesky_with_jitter(kernel_gram(*kernel_, coords_));
}

Eigen::VectorXd GaussianSampler::sample(std::uint64_t seed, std::uint64_t stream) const {
  CounterRng rng(seed, stream);
  Eigen::VectorXd xi(chol_.rows());
  for (int i = 0; i < xi.size(); ++i) xi[i] = rng.next_gaussian();
  return chol_ * xi;
}

std::vector<double> gaussian_sample(const KernelPtr& k, const std::vector<Site>& coords,
                                    std::uint64_t seed) {
  GaussianSampler sampler(k, coords);
  const Eigen::VectorXd v = sampler.sample(seed, 0x677362ull);
  return std::vector<double>(v.data(), v.data() + v.size());
}

// ---------------------------------------------------------------------------
// Gaussian shift action

namespace {

class GaussianShiftAction final : public Action {
 public:
  GaussianShiftAction(GroupPtr group, KernelPtr k, std::vector<Site> window)
      : Action(std::move(group), 0), kernel_(std::move(k)) {
    std::sort(window.begin(), window.end());
    window.erase(std::unique(window.begin(), window.end()), window.end());
    if (window.empty())
      throw std::invalid_argument("gaussian shift needs a materialization window");
    // Invariance spot check on the generator ball.
    for (const auto& g : group_->generator_ball()) {
      for (const auto& s : window)
        for (const auto& t : window) {
          const double lhs = kernel_->eval(kernel_->act(g, s), kernel_->act(g, t));
          const double rhs = kernel_->eval(s, t);
          if (std::abs(lhs - rhs) > 1e-9)
            throw std::invalid_argument("kernel is not invariant under the action");
        }
    }
    sampler_.emplace(kernel_, std::move(window));
    for (std::size_t i = 0; i < sampler_->coords().size(); ++i)
      index_.emplace(sampler_->coords()[i], static_cast<int>(i));
    StreamHash h(0x67617573u);
    h.absorb(kernel_->tag());
    for (const auto& s : sampler_->coords()) encode_site(s, h);
    tag_ = h.digest();
  }

  Value eval(EvalCtx& ctx, std::uint64_t stream, const GroupElement& g,
             const Site& site) const override {
    kernel_->validate_site(site);
    const Site base = kernel_->act(group().inverse(g), site);
    const auto it = index_.find(base);
    if (it == index_.end())
      throw std::runtime_error(
          "gaussian cell outside the declared materialization window: " +
          to_string(base));
    const std::uint64_t key = chain(stream, tag_);
    auto& memo = ctx.joint_memo[key];
    if (memo.empty()) {
      const Eigen::VectorXd v = sampler_->sample(ctx.seed, key);
      memo.assign(v.data(), v.data() + v.size());
    }
    return Value::of_real(memo[it->second]);
  }

 private:
  KernelPtr kernel_;
  std::optional<GaussianSampler> sampler_;
  std::unordered_map<Site, int, SiteHash> index_;
};

}  // namespace

ActionPtr gaussian_shift(KernelPtr k, GroupPtr g, std::vector<Site> materialization) {
  return std::make_shared<GaussianShiftAction>(std::move(g), std::move(k),
                                               std::move(materialization));
}

// ---------------------------------------------------------------------------
// Representations

namespace {

Eigen::MatrixXd matrix_power(const Eigen::MatrixXd& m, std::int64_t e) {
  const int n = static_cast<int>(m.rows());
  Eigen::MatrixXd base = e < 0 ? Eigen::MatrixXd(m.transpose()) : m;
  std::uint64_t k = e < 0 ? static_cast<std::uint64_t>(-e) : static_cast<std::uint64_t>(e);
  Eigen::MatrixXd acc = Eigen::MatrixXd::Identity(n, n);
  while (k > 0) {
    if (k & 1) acc = acc * base;
    base = base * base;
    k >>= 1;
  }
  return acc;
}

std::uint64_t matrices_tag(std::uint64_t init, const std::vector<Eigen::MatrixXd>& ms) {
  StreamHash h(init);
  for (const auto& m : ms) {
    h.absorb(static_cast<std::uint64_t>(m.rows()));
    for (int i = 0; i < m.rows(); ++i)
      for (int j = 0; j < m.cols(); ++j)
        h.absorb(std::bit_cast<std::uint64_t>(m(i, j)));
  }
  return h.digest();
}

}  // namespace

Representation::Representation(GroupPtr g, std::vector<Eigen::MatrixXd> generator_matrices)
    : group_(std::move(g)), mats_(std::move(generator_matrices)) {
  if (group_->has_finite() && group_->finite().size() > 1)
    throw std::invalid_argument("representations support lattice groups only");
  if (static_cast<int>(mats_.size()) != group_->lattice_dim())
    throw std::invalid_argument("need one matrix per lattice generator");
  if (mats_.empty()) throw std::invalid_argument("representation needs generators");
  dim_ = static_cast<int>(mats_[0].rows());
  validate();
  tag_ = matrices_tag(0x72657031u, mats_);
}

Representation::Representation(SubgroupPtr h, std::vector<Eigen::MatrixXd> basis_matrices)
    : group_(h->ambient_ptr()), domain_(std::move(h)), mats_(std::move(basis_matrices)) {
  if (group_->has_finite() && group_->finite().size() > 1)
    throw std::invalid_argument("representations support lattice groups only");
  if (static_cast<int>(mats_.size()) != domain_->lattice_rank())
    throw std::invalid_argument("need one matrix per subgroup basis row");
  if (mats_.empty()) throw std::invalid_argument("representation needs generators");
  dim_ = static_cast<int>(mats_[0].rows());
  validate();
  tag_ = matrices_tag(0x72657032u, mats_);
}

void Representation::validate() const {
  for (const auto& m : mats_) {
    if (m.rows() != dim_ || m.cols() != dim_)
      throw std::invalid_argument("representation matrices must be square, equal size");
    const double ortho =
        (m.transpose() * m - Eigen::MatrixXd::Identity(dim_, dim_)).cwiseAbs().maxCoeff();
    if (ortho > 1e-10)
      throw std::invalid_argument("representation matrix is not orthogonal");
  }
  for (std::size_t i = 0; i < mats_.size(); ++i)
    for (std::size_t j = i + 1; j < mats_.size(); ++j) {
      const double comm = (mats_[i] * mats_[j] - mats_[j] * mats_[i]).cwiseAbs().maxCoeff();
      if (comm > 1e-10)
        throw std::invalid_argument("generator matrices must commute");
    }
}

Eigen::MatrixXd Representation::matrix(const GroupElement& g) const {
  Eigen::MatrixXd acc = Eigen::MatrixXd::Identity(dim_, dim_);
  if (domain_) {
    const std::vector<std::int64_t> coords = domain_->basis_coordinates(g);
    for (std::size_t i = 0; i < mats_.size(); ++i)
      if (coords[i] != 0) acc = acc * matrix_power(mats_[i], coords[i]);
  } else {
    group_->check_element(g);
    for (std::size_t i = 0; i < mats_.size(); ++i)
      if (g.lattice[i] != 0) acc = acc * matrix_power(mats_[i], g.lattice[i]);
  }
  return acc;
}

double Representation::coefficient(const GroupElement& g, const Eigen::VectorXd& v,
                                   const Eigen::VectorXd& w) const {
  return (matrix(g) * v).dot(w);
}

Representation Representation::restricted(SubgroupPtr h) const {
  if (domain_)
    throw std::invalid_argument("cannot restrict an already restricted representation");
  std::vector<Eigen::MatrixXd> basis_mats;
  for (const auto& row : h->lattice_basis()) {
    GroupElement e = group_->identity();
    e.lattice.assign(row.begin(), row.end());
    basis_mats.push_back(matrix(e));
  }
  return Representation(std::move(h), std::move(basis_mats));
}

Representation Representation::rotation(GroupPtr g, const std::vector<double>& angles) {
  std::vector<Eigen::MatrixXd> mats;
  for (double a : angles) {
    Eigen::MatrixXd m(2, 2);
    m << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
    mats.push_back(std::move(m));
  }
  return Representation(std::move(g), std::move(mats));
}

// ---------------------------------------------------------------------------
// Gaussian actions of representations

namespace {

// (g . x)(n) = (pi(g^{-1})^T x)(n) on an i.i.d. standard normal vector.
class RepGaussianAction final : public Action {
 public:
  explicit RepGaussianAction(RepresentationPtr pi)
      : Action(pi->group_ptr(), 0), pi_(std::move(pi)) {
    if (pi_->domain())
      domain_ = SubgroupPtr(pi_, pi_->domain());  // aliasing share
    StreamHash h(0x61706931u);
    h.absorb(pi_->tag());
    tag_ = h.digest();
  }

  const Subgroup* domain() const override { return domain_.get(); }

  Value eval(EvalCtx& ctx, std::uint64_t stream, const GroupElement& g,
             const Site& site) const override {
    if (site.kind != SiteKind::Axis)
      throw std::invalid_argument("representation action expects axis sites");
    if (site.axis < 0 || site.axis >= pi_->dim())
      throw std::invalid_argument("axis out of range");
    const std::uint64_t key = chain(stream, tag_);
    auto& memo = ctx.joint_memo[key];
    if (memo.empty()) {
      CounterRng rng(ctx.seed, key);
      memo.resize(pi_->dim());
      for (auto& v : memo) v = rng.next_gaussian();
    }
    if (group().is_identity(g)) return Value::of_real(memo[site.axis]);
    const Eigen::MatrixXd m = pi_->matrix(group().inverse(g));
    double acc = 0.0;
    for (int r = 0; r < pi_->dim(); ++r) acc += m(r, site.axis) * memo[r];
    return Value::of_real(acc);
  }

 private:
  RepresentationPtr pi_;
  SubgroupPtr domain_;
};

class InducedGaussianAction final : public Action {
 public:
  explicit InducedGaussianAction(InducedRepPtr ind)
      : Action(ind->subgroup().ambient_ptr(), 0), ind_(std::move(ind)) {
    StreamHash h(0x61706932u);
    h.absorb(ind_->base().tag());
    for (const auto& c : ind_->truncation()) encode_coset(c, h);
    tag_ = h.digest();
  }

  Value eval(EvalCtx& ctx, std::uint64_t stream, const GroupElement& g,
             const Site& site) const override {
    if (site.kind != SiteKind::CosetAxis)
      throw std::invalid_argument("induced action expects (axis, coset) sites");
    const std::uint64_t key = chain(stream, tag_);
    auto& memo = ctx.joint_memo[key];
    if (memo.empty()) {
      CounterRng rng(ctx.seed, key);
      memo.resize(ind_->total_dim());
      for (auto& v : memo) v = rng.next_gaussian();
    }
    const GroupElement g_inv = group().inverse(g);
    const auto [vec, target] = ind_->apply_basis(g_inv, site.axis, site.coset);
    const int ci = ind_->coset_index(target);
    if (ci < 0)
      throw std::runtime_error("coset escapes the truncation: " + to_string(target));
    double acc = 0.0;
    for (int n = 0; n < ind_->base_dim(); ++n)
      acc += vec[n] * memo[ind_->flat_index(n, ci)];
    return Value::of_real(acc);
  }

 private:
  InducedRepPtr ind_;
};

}  // namespace

ActionPtr rep_gaussian_action(RepresentationPtr pi) {
  return std::make_shared<RepGaussianAction>(std::move(pi));
}

ActionPtr induced_gaussian_action(InducedRepPtr ind) {
  return std::make_shared<InducedGaussianAction>(std::move(ind));
}

// ---------------------------------------------------------------------------
// Induced representation blocks

InducedRep::InducedRep(RepresentationPtr base, SubgroupPtr h,
                       std::vector<CosetId> truncation)
    : base_(std::move(base)), h_(std::move(h)), truncation_(std::move(truncation)) {
  if (!base_->domain())
    throw std::invalid_argument("induced representation needs a subgroup representation");
  std::sort(truncation_.begin(), truncation_.end());
  truncation_.erase(std::unique(truncation_.begin(), truncation_.end()),
                    truncation_.end());
  if (truncation_.empty()) throw std::invalid_argument("empty coset truncation");
  for (std::size_t i = 0; i < truncation_.size(); ++i)
    index_.emplace(truncation_[i], static_cast<int>(i));
}

int InducedRep::coset_index(const CosetId& c) const {
  const auto it = index_.find(c);
  return it == index_.end() ? -1 : it->second;
}

std::pair<Eigen::VectorXd, CosetId> InducedRep::apply_basis(const GroupElement& g,
                                                            int axis,
                                                            const CosetId& c) const {
  const GroupElement rho = h_->cocycle(g, c);
  const Eigen::MatrixXd m = base_->matrix(rho);
  const CosetId target = h_->coset_of(h_->ambient().compose(g, h_->section(c)));
  return {m.col(axis), target};
}

Eigen::MatrixXd InducedRep::block_matrix(const GroupElement& g) const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(total_dim(), total_dim());
  for (std::size_t ci = 0; ci < truncation_.size(); ++ci) {
    for (int axis = 0; axis < base_dim(); ++axis) {
      const auto [vec, target] = apply_basis(g, axis, truncation_[ci]);
      const int ti = coset_index(target);
      if (ti < 0)
        throw std::runtime_error("coset escapes the truncation: " + to_string(target));
      for (int n = 0; n < base_dim(); ++n)
        m(flat_index(n, ti), flat_index(axis, static_cast<int>(ci))) = vec[n];
    }
  }
  return m;
}

double InducedRep::coefficient(const GroupElement& g, const Eigen::VectorXd& w1,
                               const Eigen::VectorXd& w2) const {
  if (w1.size() != total_dim() || w2.size() != total_dim())
    throw std::invalid_argument("block vector dimension mismatch");
  double acc = 0.0;
  const int nd = base_dim();
  for (std::size_t ci = 0; ci < truncation_.size(); ++ci) {
    bool zero = true;
    for (int n = 0; n < nd && zero; ++n)
      zero = w1[flat_index(n, static_cast<int>(ci))] == 0.0;
    if (zero) continue;
    const GroupElement rho = h_->cocycle(g, truncation_[ci]);
    const Eigen::MatrixXd m = base_->matrix(rho);
    const CosetId target =
        h_->coset_of(h_->ambient().compose(g, h_->section(truncation_[ci])));
    const int ti = coset_index(target);
    // Blocks mapped outside the truncation pair to zero against vectors
    // supported inside it.
    if (ti < 0) continue;
    for (int axis = 0; axis < nd; ++axis) {
      const double w = w1[flat_index(axis, static_cast<int>(ci))];
      if (w == 0.0) continue;
      for (int n = 0; n < nd; ++n)
        acc += w * m(n, axis) * w2[flat_index(n, ti)];
    }
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Zimmer witness

std::vector<CosetId> folner_cosets(const SubgroupPtr& h, int n) {
  if (h->index_if_finite() > 0) {
    int bound = 1;
    for (const auto& row : h->lattice_basis())
      for (std::int64_t v : row)
        bound = std::max<int>(bound, static_cast<int>(std::llabs(v)));
    return h->enumerate_cosets(bound);
  }
  if (!h->is_normal())
    throw std::invalid_argument(
        "Folner cosets need a normal subgroup or finite index");
  std::vector<CosetId> out;
  for (const auto& q : folner_set(*h->quotient_group(), n))
    out.push_back(h->coset_of_quotient(q));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double quasi_regular_overlap(const Subgroup& h, const GroupElement& g,
                             const std::vector<CosetId>& cosets) {
  std::unordered_set<CosetId, CosetIdHash> members(cosets.begin(), cosets.end());
  std::int64_t inside = 0;
  for (const auto& c : cosets) {
    const CosetId img = h.coset_of(h.ambient().compose(g, h.section(c)));
    if (members.count(img)) ++inside;
  }
  return static_cast<double>(inside) / static_cast<double>(cosets.size());
}

namespace {

struct DeviationAtN {
  double formula = 0.0;
  double direct = 0.0;
  double min_overlap = 1.0;
};

DeviationAtN deviation_at(const Representation& pi,
                          const std::vector<Eigen::VectorXd>& vectors,
                          const SubgroupPtr& h, const Window& f, int n) {
  const std::vector<CosetId> cn = folner_cosets(h, n);
  DeviationAtN out;

  // Formula route: |<pi(g)v_i,v_j>| (1 - <lambda(g)u_N,u_N>).
  std::vector<Eigen::MatrixXd> gmats;
  gmats.reserve(f.size());
  for (const auto& g : f) gmats.push_back(pi.matrix(g));
  for (std::size_t gi = 0; gi < f.size(); ++gi) {
    const double overlap = quasi_regular_overlap(*h, f[gi], cn);
    out.min_overlap = std::min(out.min_overlap, overlap);
    for (const auto& vi : vectors)
      for (const auto& vj : vectors) {
        const double coeff = (gmats[gi] * vi).dot(vj);
        out.formula = std::max(out.formula, std::abs(coeff) * (1.0 - overlap));
      }
  }

  // Direct route: Ind_H^G(pi|H) block coefficients of w_i = v_i (x) u_N,
  // pulled back through (xi, gH) -> pi(sigma(gH)) xi (x) delta_gH.
  std::vector<CosetId> trunc = cn;
  for (const auto& g : f)
    for (const auto& c : cn)
      trunc.push_back(h->coset_of(h->ambient().compose(g, h->section(c))));
  auto base = std::make_shared<Representation>(pi.restricted(h));
  InducedRep ind(base, h, std::move(trunc));

  const double norm = 1.0 / std::sqrt(static_cast<double>(cn.size()));
  std::vector<Eigen::VectorXd> ws;
  for (const auto& v : vectors) {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(ind.total_dim());
    for (const auto& c : cn) {
      const Eigen::VectorXd block = pi.matrix(h->ambient().inverse(h->section(c))) * v;
      const int ci = ind.coset_index(c);
      for (int nn = 0; nn < ind.base_dim(); ++nn)
        w[ind.flat_index(nn, ci)] = norm * block[nn];
    }
    ws.push_back(std::move(w));
  }
  for (std::size_t gi = 0; gi < f.size(); ++gi)
    for (std::size_t i = 0; i < vectors.size(); ++i)
      for (std::size_t j = 0; j < vectors.size(); ++j) {
        const double lhs = (gmats[gi] * vectors[i]).dot(vectors[j]);
        const double rhs = ind.coefficient(f[gi], ws[i], ws[j]);
        out.direct = std::max(out.direct, std::abs(lhs - rhs));
      }
  return out;
}

}  // namespace

ZimmerReport zimmer_witness(const Representation& pi,
                            const std::vector<Eigen::VectorXd>& vectors,
                            const SubgroupPtr& h, const Window& f, double eps,
                            int n_cap) {
  if (vectors.empty()) throw std::invalid_argument("need witness vectors");
  for (const auto& v : vectors)
    if (v.size() != pi.dim())
      throw std::invalid_argument("witness vector dimension mismatch");
  validate_window(pi.group(), f);
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");

  ZimmerReport rep;
  for (const auto& g : f)
    for (const auto& vi : vectors)
      for (const auto& vj : vectors)
        rep.max_coefficient =
            std::max(rep.max_coefficient, std::abs(pi.coefficient(g, vi, vj)));

  if (h->index_if_finite() > 0) {
    const DeviationAtN d = deviation_at(pi, vectors, h, f, 1);
    rep.folner_n = 1;
    rep.formula_deviation = d.formula;
    rep.deviation = d.direct;
    rep.min_overlap = d.min_overlap;
    rep.achieved = d.formula < eps;
    return rep;
  }

  // Geometric search then binary refinement; box overlaps are monotone in N.
  int lo = 0, hi = 0;
  DeviationAtN at_hi;
  for (int n = 1; n <= n_cap; n *= 2) {
    at_hi = deviation_at(pi, vectors, h, f, n);
    hi = n;
    if (at_hi.formula < eps) break;
    lo = n;
  }
  if (at_hi.formula >= eps) {
    rep.folner_n = hi;
    rep.formula_deviation = at_hi.formula;
    rep.deviation = at_hi.direct;
    rep.min_overlap = at_hi.min_overlap;
    rep.achieved = false;
    return rep;
  }
  while (hi - lo > 1) {
    const int mid = lo + (hi - lo) / 2;
    const DeviationAtN d = deviation_at(pi, vectors, h, f, mid);
    if (d.formula < eps) {
      hi = mid;
      at_hi = d;
    } else {
      lo = mid;
    }
  }
  rep.folner_n = hi;
  rep.formula_deviation = at_hi.formula;
  rep.deviation = at_hi.direct;
  rep.min_overlap = at_hi.min_overlap;
  rep.achieved = true;
  return rep;
}

// ---------------------------------------------------------------------------
// Lemma commute check

LemmaCommuteReport verify_lemma_commute(const RepresentationPtr& pi_of_h,
                                        const SubgroupPtr& h, const Window& f,
                                        int bins, std::int64_t n_samples,
                                        std::uint64_t seed, int workers) {
  if (!pi_of_h->domain())
    throw std::invalid_argument("expected a representation of the subgroup");
  const Group& amb = h->ambient();
  validate_window(amb, f);
  const int nd = pi_of_h->dim();

  // Truncation: window images of the base coset, then closed under the
  // window again so covariance pairs stay interior.
  const CosetId c0 = h->coset_of(amb.identity());
  std::vector<CosetId> trunc = {c0};
  for (int round = 0; round < 2; ++round) {
    std::vector<CosetId> next = trunc;
    for (const auto& g : f)
      for (const auto& c : trunc)
        next.push_back(h->coset_of(amb.compose(amb.inverse(g), h->section(c))));
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
    trunc = std::move(next);
  }

  auto ind = std::make_shared<InducedRep>(pi_of_h, h, trunc);
  ActionPtr side_cind = coinduce(rep_gaussian_action(pi_of_h), h);
  ActionPtr side_ind = induced_gaussian_action(ind);

  LemmaCommuteReport report;

  // Exact covariance: Cov((g.x)(m,kH), x(n,lH)) through both routes. The
  // co-induced side is read off the handle's own cell evaluation (stream
  // identity locates the base cell, the pending transform carries the
  // twist); the induced side comes from the block operator.
  {
    Point probe(side_cind, 0x70726f62ull, 0);
    const GroupElement e = amb.identity();
    for (const auto& g : f) {
      const GroupElement g_inv = amb.inverse(g);
      for (const auto& k : trunc) {
        const CosetId base = h->coset_of(amb.compose(g_inv, h->section(k)));
        if (ind->coset_index(base) < 0) continue;  // exterior, skip
        const InnerPointRef cell_g = probe.at(g, Site::of_coset(k)).as_inner();
        const Eigen::MatrixXd tw =
            pi_of_h->matrix(amb.inverse(cell_g.pending));
        for (int m = 0; m < nd; ++m) {
          const auto [vec, target] = ind->apply_basis(g_inv, m, k);
          for (const auto& l : trunc) {
            const InnerPointRef cell_e = probe.at(e, Site::of_coset(l)).as_inner();
            const bool same_cell = cell_e.stream == cell_g.stream;
            for (int n = 0; n < nd; ++n) {
              const double cov1 = same_cell ? tw(n, m) : 0.0;
              const double cov2 = (l == target) ? vec[n] : 0.0;
              report.cov_max_diff =
                  std::max(report.cov_max_diff, std::abs(cov1 - cov2));
            }
          }
        }
      }
    }
  }

  // Windowed laws of the quantized base-coset cell coordinates.
  std::vector<Observable::Probe> p1, p2;
  for (int m = 0; m < nd; ++m) {
    Observable::Probe a;
    a.site = Site::of_coset(c0);
    a.inner_path = {Site::of_axis(m)};
    a.thresholds = Observable::normal_quantile_thresholds(bins);
    p1.push_back(std::move(a));
    Observable::Probe b;
    b.site = Site::of_coset_axis(m, c0);
    b.thresholds = Observable::normal_quantile_thresholds(bins);
    p2.push_back(std::move(b));
  }
  const Observable phi1(std::move(p1)), phi2(std::move(p2));
  const DefectCertificate cert =
      containment_defect(side_cind, side_ind, phi1, phi2, f, n_samples,
                         chain(seed, 0xa1), chain(seed, 0xa2), workers);
  report.l1 = cert.defect;
  report.slack = cert.slack;
  report.pass = report.cov_max_diff < 1e-12 && report.l1 <= report.slack;
  return report;
}

// ---------------------------------------------------------------------------
// Folner averaging factor map

std::vector<double> folner_average_factor(Point& w, const std::vector<CosetId>& fn,
                                          const std::vector<Site>& inner_sites) {
  if (fn.empty()) throw std::invalid_argument("empty Folner set");
  const GroupElement e = w.action().group().identity();
  std::vector<double> out(inner_sites.size(), 0.0);
  const double norm = 1.0 / std::sqrt(static_cast<double>(fn.size()));
  for (const auto& c : fn) {
    const Value cell = w.at(e, Site::of_coset(c));
    const InnerPointRef& ref = cell.as_inner();
    for (std::size_t i = 0; i < inner_sites.size(); ++i)
      out[i] += norm * w.inner_at(ref, ref.action->group().identity(),
                                  inner_sites[i]).as_real();
  }
  return out;
}

}  // namespace wclab

#include "wclab/actions.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace wclab {

// ---------------------------------------------------------------------------
// Site

Site Site::unit() { return Site{}; }

Site Site::of_elem(GroupElement e) {
  Site s;
  s.kind = SiteKind::Elem;
  s.elem = std::move(e);
  return s;
}

Site Site::of_coset(CosetId c) {
  Site s;
  s.kind = SiteKind::Coset;
  s.coset = std::move(c);
  return s;
}

Site Site::of_axis(int n) {
  Site s;
  s.kind = SiteKind::Axis;
  s.axis = n;
  return s;
}

Site Site::of_coset_axis(int n, CosetId c) {
  Site s;
  s.kind = SiteKind::CosetAxis;
  s.axis = n;
  s.coset = std::move(c);
  return s;
}

Site Site::of_pair(int factor, Site inner) {
  Site s;
  s.kind = SiteKind::Pair;
  s.factor = factor;
  s.sub = std::make_shared<Site>(std::move(inner));
  return s;
}

bool Site::operator==(const Site& o) const {
  if (kind != o.kind) return false;
  switch (kind) {
    case SiteKind::Elem:
      return elem == o.elem;
    case SiteKind::Coset:
      return coset == o.coset;
    case SiteKind::Unit:
      return true;
    case SiteKind::Axis:
      return axis == o.axis;
    case SiteKind::CosetAxis:
      return axis == o.axis && coset == o.coset;
    case SiteKind::Pair:
      return factor == o.factor && *sub == *o.sub;
  }
  return false;
}

bool Site::operator<(const Site& o) const {
  if (kind != o.kind) return kind < o.kind;
  switch (kind) {
    case SiteKind::Elem:
      return elem < o.elem;
    case SiteKind::Coset:
      return coset < o.coset;
    case SiteKind::Unit:
      return false;
    case SiteKind::Axis:
      return axis < o.axis;
    case SiteKind::CosetAxis:
      if (axis != o.axis) return axis < o.axis;
      return coset < o.coset;
    case SiteKind::Pair:
      if (factor != o.factor) return factor < o.factor;
      return *sub < *o.sub;
  }
  return false;
}

void encode_site(const Site& s, StreamHash& h) {
  h.absorb(static_cast<std::uint64_t>(s.kind) + 0x53697400u);
  switch (s.kind) {
    case SiteKind::Elem:
      encode_element(s.elem, h);
      break;
    case SiteKind::Coset:
      encode_coset(s.coset, h);
      break;
    case SiteKind::Unit:
      break;
    case SiteKind::Axis:
      h.absorb(static_cast<std::uint64_t>(s.axis));
      break;
    case SiteKind::CosetAxis:
      h.absorb(static_cast<std::uint64_t>(s.axis));
      encode_coset(s.coset, h);
      break;
    case SiteKind::Pair:
      h.absorb(static_cast<std::uint64_t>(s.factor));
      encode_site(*s.sub, h);
      break;
  }
}

std::string to_string(const Site& s) {
  switch (s.kind) {
    case SiteKind::Elem:
      return to_string(s.elem);
    case SiteKind::Coset:
      return to_string(s.coset);
    case SiteKind::Unit:
      return "*";
    case SiteKind::Axis:
      return "ax" + std::to_string(s.axis);
    case SiteKind::CosetAxis:
      return "ax" + std::to_string(s.axis) + "@" + to_string(s.coset);
    case SiteKind::Pair:
      return "[" + std::to_string(s.factor) + ":" + to_string(*s.sub) + "]";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Value

Value Value::of_int(std::int64_t v) {
  Value x;
  x.kind_ = Kind::Int;
  x.i_ = v;
  return x;
}

Value Value::of_real(double v) {
  Value x;
  x.kind_ = Kind::Real;
  x.r_ = v;
  return x;
}

Value Value::of_inner(InnerPointRef ref) {
  Value x;
  x.kind_ = Kind::Inner;
  x.inner_ = std::move(ref);
  return x;
}

std::int64_t Value::as_int() const {
  if (kind_ != Kind::Int) throw std::logic_error("value is not an integer label");
  return i_;
}

double Value::as_real() const {
  if (kind_ != Kind::Real) throw std::logic_error("value is not a real cell");
  return r_;
}

const InnerPointRef& Value::as_inner() const {
  if (kind_ != Kind::Inner) throw std::logic_error("value is not an inner point");
  return inner_;
}

// ---------------------------------------------------------------------------
// Point

Point::Point(ActionPtr a, std::uint64_t seed, std::uint64_t sample)
    : a_(std::move(a)) {
  ctx_.seed = seed;
  ctx_.sample = sample;
  StreamHash h(0x726f6f74u);  // root
  h.absorb(sample);
  root_ = h.digest();
}

Value Point::at(const GroupElement& g, const Site& s) {
  return a_->eval(ctx_, root_, g, s);
}

Value Point::at(const Site& s) { return at(a_->group().identity(), s); }

Value Point::inner_at(const InnerPointRef& ref, const GroupElement& g, const Site& s) {
  const GroupElement eff = ref.action->group().compose(g, ref.pending);
  return ref.action->eval(ctx_, ref.stream, eff, s);
}

// ---------------------------------------------------------------------------
// Alphabet

Alphabet Alphabet::uniform(int n) {
  if (n < 1) throw std::invalid_argument("alphabet must have at least one symbol");
  Alphabet a;
  a.weights.assign(n, 1.0 / n);
  return a;
}

void Alphabet::validate() const {
  if (weights.empty()) throw std::invalid_argument("alphabet has no weights");
  double sum = 0.0;
  for (double w : weights) {
    if (!(w > 0.0)) throw std::invalid_argument("alphabet weights must be positive");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("alphabet weights must sum to 1");
}

static std::uint64_t alphabet_tag(const Alphabet& a) {
  StreamHash h(0x616c7068u);
  for (double w : a.weights) h.absorb(std::bit_cast<std::uint64_t>(w));
  return h.digest();
}

// ---------------------------------------------------------------------------
// Coordinate sets

namespace {

class GroupSiteSet final : public CoordinateSet {
 public:
  explicit GroupSiteSet(GroupPtr g) : g_(std::move(g)) {
    StreamHash h(0x67727073u);
    h.absorb(static_cast<std::uint64_t>(g_->lattice_dim()));
    h.absorb(static_cast<std::uint64_t>(g_->finite_size()));
    tag_ = h.digest();
  }

  Site act(const GroupElement& g, const Site& t) const override {
    return Site::of_elem(g_->compose(g, t.elem));
  }

  void validate_site(const Site& t) const override {
    if (t.kind != SiteKind::Elem)
      throw std::invalid_argument("expected a group-element site");
    g_->check_element(t.elem);
  }

  std::uint64_t tag() const override { return tag_; }

 private:
  GroupPtr g_;
  std::uint64_t tag_;
};

class CosetSiteSet final : public CoordinateSet {
 public:
  explicit CosetSiteSet(SubgroupPtr h) : h_(std::move(h)) {
    StreamHash s(0x63736574u);
    for (const auto& row : h_->lattice_basis())
      for (std::int64_t v : row) s.absorb_i64(v);
    s.absorb(static_cast<std::uint64_t>(h_->ambient().lattice_dim()));
    tag_ = s.digest();
  }

  Site act(const GroupElement& g, const Site& t) const override {
    return Site::of_coset(
        h_->coset_of(h_->ambient().compose(g, h_->section(t.coset))));
  }

  void validate_site(const Site& t) const override {
    if (t.kind != SiteKind::Coset)
      throw std::invalid_argument("expected a coset site");
  }

  std::uint64_t tag() const override { return tag_; }

  const Subgroup& subgroup() const { return *h_; }

 private:
  SubgroupPtr h_;
  std::uint64_t tag_;
};

}  // namespace

CoordinateSetPtr group_sites(GroupPtr g) {
  return std::make_shared<GroupSiteSet>(std::move(g));
}

CoordinateSetPtr coset_sites(SubgroupPtr h) {
  return std::make_shared<CosetSiteSet>(std::move(h));
}

// ---------------------------------------------------------------------------
// Shift actions

namespace {

// Shift with i.i.d. alphabet cells, optionally restricted to a subgroup
// domain: (g . x)(t) = x(g^{-1} t).
class AtomShiftAction final : public Action {
 public:
  AtomShiftAction(GroupPtr group, SubgroupPtr domain, CoordinateSetPtr sites,
                  Alphabet alphabet)
      : Action(std::move(group), 0),
        domain_(std::move(domain)),
        sites_(std::move(sites)),
        alphabet_(std::move(alphabet)) {
    alphabet_.validate();
    StreamHash h(0x73686674u);
    h.absorb(sites_->tag());
    h.absorb(alphabet_tag(alphabet_));
    tag_ = h.digest();
  }

  const Subgroup* domain() const override { return domain_.get(); }

  Value eval(EvalCtx& ctx, std::uint64_t stream, const GroupElement& g,
             const Site& site) const override {
    const double u = CounterRng(ctx.seed, *cell_stream(stream, g, site)).next_unit();
    return Value::of_int(sample_categorical(alphabet_.weights, u));
  }

  std::optional<std::uint64_t> cell_stream(std::uint64_t stream, const GroupElement& g,
                                           const Site& site) const override {
    sites_->validate_site(site);
    const Site base = sites_->act(group().inverse(g), site);
    StreamHash h(chain(stream, tag_));
    encode_site(base, h);
    return h.digest();
  }

 private:
  SubgroupPtr domain_;
  CoordinateSetPtr sites_;
  Alphabet alphabet_;
};

// Co-induced action on coset-indexed inner cells:
// (g . x)(kH) = a(rho(g^{-1},kH)^{-1}) x(g^{-1} kH).
class CoinducedAction final : public Action {
 public:
  CoinducedAction(GroupPtr group, SubgroupPtr h, ActionPtr cell)
      : Action(std::move(group), 0), h_(std::move(h)), cell_(std::move(cell)) {
    StreamHash t(0x63696e64u);
    StreamHash basis(0);
    for (const auto& row : h_->lattice_basis())
      for (std::int64_t v : row) basis.absorb_i64(v);
    t.absorb(basis.digest());
    t.absorb(cell_->node_tag());
    tag_ = t.digest();
  }

  Value eval(EvalCtx&, std::uint64_t stream, const GroupElement& g,
             const Site& site) const override {
    if (site.kind != SiteKind::Coset)
      throw std::invalid_argument("co-induced action expects coset sites");
    const Group& amb = h_->ambient();
    const GroupElement g_inv = amb.inverse(g);
    const CosetId base = h_->coset_of(amb.compose(g_inv, h_->section(site.coset)));
    StreamHash hs(chain(stream, tag_));
    encode_coset(base, hs);
    InnerPointRef ref;
    ref.action = cell_.get();
    ref.stream = hs.digest();
    ref.pending = amb.inverse(h_->cocycle(g_inv, site.coset));
    return Value::of_inner(std::move(ref));
  }

  const Subgroup& coset_subgroup() const { return *h_; }
  SubgroupPtr coset_subgroup_ptr() const { return h_; }
  ActionPtr cell_action() const { return cell_; }

 private:
  SubgroupPtr h_;
  ActionPtr cell_;
};

// Coordinate permutation of coset-indexed independent inner cells.
class InnerShiftAction final : public Action {
 public:
  InnerShiftAction(GroupPtr group, SubgroupPtr h, ActionPtr cell)
      : Action(std::move(group), 0), h_(std::move(h)), cell_(std::move(cell)) {
    StreamHash t(0x69736866u);
    StreamHash basis(0);
    for (const auto& row : h_->lattice_basis())
      for (std::int64_t v : row) basis.absorb_i64(v);
    t.absorb(basis.digest());
    t.absorb(cell_->node_tag());
    tag_ = t.digest();
  }

  Value eval(EvalCtx&, std::uint64_t stream, const GroupElement& g,
             const Site& site) const override {
    if (site.kind != SiteKind::Coset)
      throw std::invalid_argument("inner shift expects coset sites");
    const Group& amb = h_->ambient();
    const CosetId base =
        h_->coset_of(amb.compose(amb.inverse(g), h_->section(site.coset)));
    StreamHash hs(chain(stream, tag_));
    encode_coset(base, hs);
    InnerPointRef ref;
    ref.action = cell_.get();
    ref.stream = hs.digest();
    ref.pending = cell_->group().identity();
    return Value::of_inner(std::move(ref));
  }

 private:
  SubgroupPtr h_;
  ActionPtr cell_;
};

class ProductActionImpl final : public Action {
 public:
  ProductActionImpl(ActionPtr a, ActionPtr b)
      : Action(a->group_ptr(), 0), a_(std::move(a)), b_(std::move(b)) {
    StreamHash h(0x70726f64u);
    h.absorb(a_->node_tag());
    h.absorb(b_->node_tag());
    tag_ = h.digest();
  }

  const Subgroup* domain() const override { return a_->domain(); }

  Value eval(EvalCtx& ctx, std::uint64_t stream, const GroupElement& g,
             const Site& site) const override {
    if (site.kind != SiteKind::Pair)
      throw std::invalid_argument("product action expects pair sites");
    if (site.factor != 0 && site.factor != 1)
      throw std::invalid_argument("product factor must be 0 or 1");
    const std::uint64_t sub = chain(chain(stream, tag_),
                                    static_cast<std::uint64_t>(site.factor));
    const Action& f = site.factor == 0 ? *a_ : *b_;
    return f.eval(ctx, sub, g, *site.sub);
  }

  const Action* factor(int i) const { return i == 0 ? a_.get() : b_.get(); }

 private:
  ActionPtr a_, b_;
};

class QuotientLiftAction final : public Action {
 public:
  QuotientLiftAction(SubgroupPtr h, ActionPtr b)
      : Action(h->ambient_ptr(), 0), h_(std::move(h)), b_(std::move(b)) {
    StreamHash t(0x716c6966u);
    t.absorb(b_->node_tag());
    tag_ = t.digest();
  }

  Value eval(EvalCtx& ctx, std::uint64_t stream, const GroupElement& g,
             const Site& site) const override {
    // Streams pass through unchanged: the lifted action is the same point
    // space as the quotient action.
    return b_->eval(ctx, stream, h_->project(g), site);
  }

 private:
  SubgroupPtr h_;
  ActionPtr b_;
};

class RestrictedAction final : public Action {
 public:
  RestrictedAction(ActionPtr a, SubgroupPtr h)
      : Action(a->group_ptr(), a->node_tag()), a_(std::move(a)), h_(std::move(h)) {}

  const Subgroup* domain() const override { return h_.get(); }

  Value eval(EvalCtx& ctx, std::uint64_t stream, const GroupElement& g,
             const Site& site) const override {
    // Same space, same randomness; only the advertised domain shrinks.
    return a_->eval(ctx, stream, g, site);
  }

 private:
  ActionPtr a_;
  SubgroupPtr h_;
};

class FiniteOrbitAction final : public Action {
 public:
  FiniteOrbitAction(GroupPtr group, FiniteGroup target, FiniteHom hom)
      : Action(std::move(group), 0),
        target_(std::move(target)),
        hom_(std::move(hom)) {
    const Group& g = *group_;
    if (static_cast<int>(hom_.lattice_gen_images.size()) != g.lattice_dim())
      throw std::invalid_argument("finite action: one image per lattice generator");
    for (int img : hom_.lattice_gen_images)
      if (img < 0 || img >= target_.size())
        throw std::invalid_argument("finite action: generator image out of range");
    for (std::size_t i = 0; i < hom_.lattice_gen_images.size(); ++i)
      for (std::size_t j = i + 1; j < hom_.lattice_gen_images.size(); ++j) {
        const int a = hom_.lattice_gen_images[i], b = hom_.lattice_gen_images[j];
        if (target_.compose(a, b) != target_.compose(b, a))
          throw std::invalid_argument(
              "finite action: lattice generator images must commute");
      }
    if (g.has_finite()) {
      const FiniteGroup& fg = g.finite();
      if (static_cast<int>(hom_.finite_images.size()) != fg.size())
        throw std::invalid_argument("finite action: one image per finite element");
      for (int a = 0; a < fg.size(); ++a)
        for (int b = 0; b < fg.size(); ++b)
          if (hom_.finite_images[fg.compose(a, b)] !=
              target_.compose(hom_.finite_images[a], hom_.finite_images[b]))
            throw std::invalid_argument("finite action: map is not a homomorphism");
      for (int img : hom_.lattice_gen_images)
        for (int fi : hom_.finite_images)
          if (target_.compose(img, fi) != target_.compose(fi, img))
            throw std::invalid_argument(
                "finite action: lattice and finite images must commute");
    } else if (!hom_.finite_images.empty()) {
      throw std::invalid_argument("finite action: unexpected finite images");
    }
    StreamHash t(0x666f7262u);
    t.absorb(static_cast<std::uint64_t>(target_.size()));
    for (int v : hom_.lattice_gen_images) t.absorb(static_cast<std::uint64_t>(v));
    for (int v : hom_.finite_images) t.absorb(static_cast<std::uint64_t>(v));
    tag_ = t.digest();
  }

  Value eval(EvalCtx& ctx, std::uint64_t stream, const GroupElement& g,
             const Site& site) const override {
    if (site.kind != SiteKind::Unit)
      throw std::invalid_argument("finite action has a single unit site");
    const double u = CounterRng(ctx.seed, chain(stream, tag_)).next_unit();
    const int atom =
        std::min<int>(static_cast<int>(u * target_.size()), target_.size() - 1);
    return Value::of_int(target_.compose(hom_value(g), atom));
  }

  int hom_value(const GroupElement& g) const {
    group_->check_element(g);
    int acc = target_.identity();
    for (int i = 0; i < static_cast<int>(g.lattice.size()); ++i)
      acc = target_.compose(acc, power(hom_.lattice_gen_images[i], g.lattice[i]));
    if (!hom_.finite_images.empty())
      acc = target_.compose(acc, hom_.finite_images[g.finite]);
    return acc;
  }

 private:
  int power(int base, std::int64_t e) const {
    if (e < 0) {
      base = target_.inverse(base);
      e = -e;
    }
    int acc = target_.identity();
    while (e > 0) {
      if (e & 1) acc = target_.compose(acc, base);
      base = target_.compose(base, base);
      e >>= 1;
    }
    return acc;
  }

  FiniteGroup target_;
  FiniteHom hom_;
};

void require_subgroup_match(const Action& a, const Subgroup& h) {
  const Subgroup* dom = a.domain();
  if (dom == nullptr) {
    if (!h.is_full())
      throw std::invalid_argument("action is not an action of the designated subgroup");
    return;
  }
  if (!dom->ambient().same_shape(h.ambient()) ||
      dom->lattice_basis() != h.lattice_basis())
    throw std::invalid_argument("action domain does not match the subgroup");
}

}  // namespace

ActionPtr bernoulli_shift(GroupPtr g, Alphabet alphabet) {
  auto sites = group_sites(g);
  return std::make_shared<AtomShiftAction>(std::move(g), nullptr, std::move(sites),
                                           std::move(alphabet));
}

ActionPtr bernoulli_shift_subgroup(SubgroupPtr h, Alphabet alphabet) {
  auto g = h->ambient_ptr();
  auto sites = group_sites(g);
  return std::make_shared<AtomShiftAction>(std::move(g), std::move(h),
                                           std::move(sites), std::move(alphabet));
}

ActionPtr generalized_shift(GroupPtr g, CoordinateSetPtr sites, Alphabet alphabet) {
  return std::make_shared<AtomShiftAction>(std::move(g), nullptr, std::move(sites),
                                           std::move(alphabet));
}

ActionPtr generalized_coset_shift(SubgroupPtr h, Alphabet alphabet) {
  auto g = h->ambient_ptr();
  return std::make_shared<AtomShiftAction>(std::move(g), nullptr,
                                           coset_sites(std::move(h)),
                                           std::move(alphabet));
}

ActionPtr trivial_action(GroupPtr g, Alphabet alphabet) {
  auto full = std::make_shared<Subgroup>(Subgroup::full(g));
  return generalized_coset_shift(std::move(full), std::move(alphabet));
}

ActionPtr trivial_action_subgroup(SubgroupPtr h, Alphabet alphabet) {
  auto base = trivial_action(h->ambient_ptr(), std::move(alphabet));
  return std::make_shared<RestrictedAction>(std::move(base), std::move(h));
}

ActionPtr coinduce(ActionPtr a_on_h, SubgroupPtr h) {
  require_subgroup_match(*a_on_h, *h);
  return std::make_shared<CoinducedAction>(h->ambient_ptr(), std::move(h),
                                           std::move(a_on_h));
}

ActionPtr generalized_inner_shift(SubgroupPtr h, ActionPtr cell) {
  return std::make_shared<InnerShiftAction>(h->ambient_ptr(), std::move(h),
                                            std::move(cell));
}

ActionPtr product_action(ActionPtr a, ActionPtr b) {
  require_same_group(*a, *b);
  return std::make_shared<ProductActionImpl>(std::move(a), std::move(b));
}

ActionPtr quotient_lift(ActionPtr b_on_quotient, SubgroupPtr h) {
  if (!h->is_normal())
    throw std::invalid_argument("quotient lift requires a normal subgroup");
  if (!b_on_quotient->group().same_shape(*h->quotient_group()))
    throw std::invalid_argument("action is not an action of the quotient group");
  return std::make_shared<QuotientLiftAction>(std::move(h), std::move(b_on_quotient));
}

ActionPtr restrict_action(ActionPtr a, SubgroupPtr h) {
  if (!a->group().same_shape(h->ambient()))
    throw std::invalid_argument("restriction subgroup lives in a different group");
  return std::make_shared<RestrictedAction>(std::move(a), std::move(h));
}

ActionPtr finite_action(GroupPtr g, FiniteGroup quotient, FiniteHom hom) {
  return std::make_shared<FiniteOrbitAction>(std::move(g), std::move(quotient),
                                             std::move(hom));
}

SubgroupPtr coinduced_subgroup(const Action& a) {
  const auto* c = dynamic_cast<const CoinducedAction*>(&a);
  if (!c) throw std::invalid_argument("not a co-induced action handle");
  return c->coset_subgroup_ptr();
}

ActionPtr coinduced_cell_action(const Action& a) {
  const auto* c = dynamic_cast<const CoinducedAction*>(&a);
  if (!c) throw std::invalid_argument("not a co-induced action handle");
  return c->cell_action();
}

const Action* product_factor(const Action& a, int factor) {
  const auto* p = dynamic_cast<const ProductActionImpl*>(&a);
  return p ? p->factor(factor) : nullptr;
}

void require_same_group(const Action& a, const Action& b) {
  if (!a.group().same_shape(b.group()))
    throw std::invalid_argument("actions live over different groups");
}

}  // namespace wclab

#include "wclab/groups.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace wclab {

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_add_overflow(a, b, &r))
    throw std::overflow_error("lattice coordinate overflow in add");
  return r;
}

std::int64_t checked_sub(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_sub_overflow(a, b, &r))
    throw std::overflow_error("lattice coordinate overflow in sub");
  return r;
}

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_mul_overflow(a, b, &r))
    throw std::overflow_error("lattice coordinate overflow in mul");
  return r;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::int64_t floor_mod(std::int64_t a, std::int64_t b) {
  return checked_sub(a, checked_mul(floor_div(a, b), b));
}

// ---------------------------------------------------------------------------
// FiniteGroup

FiniteGroup::FiniteGroup(std::vector<std::vector<int>> table)
    : table_(std::move(table)) {
  const int n = static_cast<int>(table_.size());
  if (n == 0) throw std::invalid_argument("finite group table is empty");
  for (const auto& row : table_) {
    if (static_cast<int>(row.size()) != n)
      throw std::invalid_argument("finite group table is not square");
    for (int v : row)
      if (v < 0 || v >= n)
        throw std::invalid_argument("finite group table entry out of range");
  }
  identity_ = -1;
  for (int e = 0; e < n; ++e) {
    bool ok = true;
    for (int a = 0; a < n && ok; ++a)
      ok = table_[e][a] == a && table_[a][e] == a;
    if (ok) {
      identity_ = e;
      break;
    }
  }
  if (identity_ < 0) throw std::invalid_argument("finite group has no identity");
  inverse_.assign(n, -1);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      if (table_[a][b] == identity_ && table_[b][a] == identity_) {
        inverse_[a] = b;
        break;
      }
    }
    if (inverse_[a] < 0)
      throw std::invalid_argument("finite group element has no inverse");
  }
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        if (table_[table_[a][b]][c] != table_[a][table_[b][c]])
          throw std::invalid_argument("finite group table is not associative");
}

FiniteGroup FiniteGroup::trivial() {
  return FiniteGroup(std::vector<std::vector<int>>{{0}});
}

FiniteGroup FiniteGroup::cyclic(int n) {
  if (n < 1) throw std::invalid_argument("cyclic group order must be >= 1");
  std::vector<std::vector<int>> t(n, std::vector<int>(n));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) t[a][b] = (a + b) % n;
  return FiniteGroup(std::move(t));
}

FiniteGroup FiniteGroup::symmetric(int n) {
  if (n < 1 || n > 5) throw std::invalid_argument("symmetric(n) supports 1 <= n <= 5");
  std::vector<std::vector<int>> perms;
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  do {
    perms.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  const int m = static_cast<int>(perms.size());
  auto index_of = [&](const std::vector<int>& q) {
    return static_cast<int>(std::lower_bound(perms.begin(), perms.end(), q) -
                            perms.begin());
  };
  std::vector<std::vector<int>> t(m, std::vector<int>(m));
  std::vector<int> comp(n);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      for (int i = 0; i < n; ++i) comp[i] = perms[a][perms[b][i]];
      t[a][b] = index_of(comp);
    }
  return FiniteGroup(std::move(t));
}

FiniteGroup FiniteGroup::product(const FiniteGroup& a, const FiniteGroup& b) {
  const int na = a.size(), nb = b.size();
  std::vector<std::vector<int>> t(na * nb, std::vector<int>(na * nb));
  for (int i = 0; i < na * nb; ++i)
    for (int j = 0; j < na * nb; ++j) {
      const int ai = i / nb, bi = i % nb, aj = j / nb, bj = j % nb;
      t[i][j] = a.compose(ai, aj) * nb + b.compose(bi, bj);
    }
  return FiniteGroup(std::move(t));
}

// ---------------------------------------------------------------------------
// Group

void encode_element(const GroupElement& g, StreamHash& h) {
  h.absorb(0x67656c00u);  // tag
  h.absorb(g.lattice.size());
  for (std::int64_t v : g.lattice) h.absorb_i64(v);
  h.absorb(static_cast<std::uint64_t>(g.finite));
}

std::string to_string(const GroupElement& g) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < g.lattice.size(); ++i) {
    if (i) os << ",";
    os << g.lattice[i];
  }
  if (g.finite != 0 || g.lattice.empty()) {
    if (!g.lattice.empty()) os << ";";
    os << "f" << g.finite;
  }
  os << ")";
  return os.str();
}

Group::Group(int lattice_dim, std::optional<FiniteGroup> finite)
    : lattice_dim_(lattice_dim), finite_(std::move(finite)) {
  if (lattice_dim < 0) throw std::invalid_argument("negative lattice dimension");
  if (lattice_dim == 0 && !finite_) finite_ = FiniteGroup::trivial();
}

GroupElement Group::identity() const {
  GroupElement e;
  e.lattice.assign(lattice_dim_, 0);
  e.finite = finite_ ? finite_->identity() : 0;
  return e;
}

void Group::check_element(const GroupElement& a) const {
  if (static_cast<int>(a.lattice.size()) != lattice_dim_)
    throw std::invalid_argument("group element has wrong lattice dimension");
  if (a.finite < 0 || a.finite >= finite_size())
    throw std::invalid_argument("group element finite index out of range");
}

GroupElement Group::compose(const GroupElement& a, const GroupElement& b) const {
  check_element(a);
  check_element(b);
  GroupElement r;
  r.lattice.resize(lattice_dim_);
  for (int i = 0; i < lattice_dim_; ++i)
    r.lattice[i] = checked_add(a.lattice[i], b.lattice[i]);
  r.finite = finite_ ? finite_->compose(a.finite, b.finite) : 0;
  return r;
}

GroupElement Group::inverse(const GroupElement& a) const {
  check_element(a);
  GroupElement r;
  r.lattice.resize(lattice_dim_);
  for (int i = 0; i < lattice_dim_; ++i) r.lattice[i] = checked_sub(0, a.lattice[i]);
  r.finite = finite_ ? finite_->inverse(a.finite) : 0;
  return r;
}

bool Group::is_identity(const GroupElement& a) const {
  for (std::int64_t v : a.lattice)
    if (v != 0) return false;
  return a.finite == (finite_ ? finite_->identity() : 0);
}

std::vector<GroupElement> Group::box(int radius) const {
  std::vector<GroupElement> out;
  std::vector<std::int64_t> coords(lattice_dim_, -radius);
  const int nf = finite_size();
  while (true) {
    for (int f = 0; f < nf; ++f) {
      GroupElement g;
      g.lattice = coords;
      g.finite = f;
      out.push_back(std::move(g));
    }
    int i = lattice_dim_ - 1;
    for (; i >= 0; --i) {
      if (coords[i] < radius) {
        ++coords[i];
        break;
      }
      coords[i] = -radius;
    }
    if (i < 0) break;
  }
  return out;
}

std::vector<GroupElement> Group::generator_ball() const {
  std::vector<GroupElement> out;
  out.push_back(identity());
  for (int i = 0; i < lattice_dim_; ++i) {
    for (int s : {+1, -1}) {
      GroupElement g = identity();
      g.lattice[i] = s;
      out.push_back(std::move(g));
    }
  }
  if (finite_) {
    for (int f = 0; f < finite_->size(); ++f) {
      if (f == finite_->identity()) continue;
      GroupElement g = identity();
      g.finite = f;
      out.push_back(std::move(g));
    }
  }
  return out;
}

std::vector<GroupElement> Group::all_elements() const {
  if (lattice_dim_ != 0)
    throw std::logic_error("all_elements() requires a finite group");
  return box(0);
}

bool Group::same_shape(const Group& o) const {
  if (lattice_dim_ != o.lattice_dim_) return false;
  if (has_finite() != o.has_finite()) return false;
  if (has_finite() && finite().table() != o.finite().table()) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Integer matrix helpers (row HNF, SNF)

namespace {

using Mat = std::vector<std::vector<std::int64_t>>;

void row_axpy(Mat& m, int dst, int src, std::int64_t q) {
  // m[dst] -= q * m[src]
  for (std::size_t j = 0; j < m[dst].size(); ++j)
    m[dst][j] = checked_sub(m[dst][j], checked_mul(q, m[src][j]));
}

Mat identity_mat(int n) {
  Mat m(n, std::vector<std::int64_t>(n, 0));
  for (int i = 0; i < n; ++i) m[i][i] = 1;
  return m;
}

// Row-style Hermite normal form: echelon with positive pivots and entries
// above each pivot reduced into [0, pivot). transform tracks hnf = U*input.
struct HnfData {
  Mat rows;
  std::vector<int> pivot_cols;
  Mat transform;
};

HnfData hermite_normal_form(Mat m) {
  const int k = static_cast<int>(m.size());
  const int d = k ? static_cast<int>(m[0].size()) : 0;
  Mat u = identity_mat(k);
  int r = 0;
  std::vector<int> pivots;
  for (int col = 0; col < d && r < k; ++col) {
    int piv = -1;
    for (int i = r; i < k; ++i)
      if (m[i][col] != 0) {
        piv = i;
        break;
      }
    if (piv < 0) continue;
    std::swap(m[r], m[piv]);
    std::swap(u[r], u[piv]);
    // Euclidean elimination below the pivot.
    for (int i = r + 1; i < k; ++i) {
      while (m[i][col] != 0) {
        const std::int64_t q = floor_div(m[i][col], m[r][col]);
        row_axpy(m, i, r, q);
        row_axpy(u, i, r, q);
        if (m[i][col] != 0) {
          std::swap(m[r], m[i]);
          std::swap(u[r], u[i]);
        }
      }
    }
    if (m[r][col] < 0) {
      for (auto& v : m[r]) v = checked_sub(0, v);
      for (auto& v : u[r]) v = checked_sub(0, v);
    }
    // Reduce entries above the pivot into [0, pivot).
    for (int i = 0; i < r; ++i) {
      const std::int64_t q = floor_div(m[i][col], m[r][col]);
      if (q != 0) {
        row_axpy(m, i, r, q);
        row_axpy(u, i, r, q);
      }
    }
    pivots.push_back(col);
    ++r;
  }
  // Rows r..k-1 are zero; callers requiring independent rows check this.
  m.resize(r);
  u.resize(r);
  return {std::move(m), std::move(pivots), std::move(u)};
}

// Smith normal form S = U * input * V, tracking V and V^{-1} only.
struct SnfData {
  std::vector<std::int64_t> diag;  // length min(k,d), nonnegative
  Mat v;                           // d x d
  Mat vinv;                        // d x d
};

SnfData smith_normal_form(Mat m) {
  const int k = static_cast<int>(m.size());
  const int d = k ? static_cast<int>(m[0].size()) : 0;
  Mat v = identity_mat(d), vinv = identity_mat(d);

  auto col_axpy = [&](int dst, int src, std::int64_t q) {
    // column dst -= q * column src; V tracks column ops, Vinv the inverse row ops.
    for (int i = 0; i < k; ++i)
      m[i][dst] = checked_sub(m[i][dst], checked_mul(q, m[i][src]));
    for (int i = 0; i < d; ++i)
      v[i][dst] = checked_sub(v[i][dst], checked_mul(q, v[i][src]));
    for (int j = 0; j < d; ++j)
      vinv[src][j] = checked_add(vinv[src][j], checked_mul(q, vinv[dst][j]));
  };
  auto col_swap = [&](int a, int b) {
    for (int i = 0; i < k; ++i) std::swap(m[i][a], m[i][b]);
    for (int i = 0; i < d; ++i) std::swap(v[i][a], v[i][b]);
    std::swap(vinv[a], vinv[b]);
  };
  auto col_negate = [&](int a) {
    for (int i = 0; i < k; ++i) m[i][a] = checked_sub(0, m[i][a]);
    for (int i = 0; i < d; ++i) v[i][a] = checked_sub(0, v[i][a]);
    for (int j = 0; j < d; ++j) vinv[a][j] = checked_sub(0, vinv[a][j]);
  };

  const int rmax = std::min(k, d);
  int t = 0;
  for (; t < rmax; ++t) {
    // Find a nonzero entry at or below/right of (t,t).
    int pi = -1, pj = -1;
    for (int i = t; i < k && pi < 0; ++i)
      for (int j = t; j < d; ++j)
        if (m[i][j] != 0) {
          pi = i;
          pj = j;
          break;
        }
    if (pi < 0) break;
    if (pi != t) std::swap(m[pi], m[t]);
    if (pj != t) col_swap(pj, t);

    bool clean = false;
    while (!clean) {
      // Clear row t by column ops.
      for (int j = t + 1; j < d; ++j) {
        while (m[t][j] != 0) {
          const std::int64_t q = floor_div(m[t][j], m[t][t]);
          col_axpy(j, t, q);
          if (m[t][j] != 0) col_swap(t, j);
        }
      }
      // Clear column t by row ops (untracked; only V matters to callers).
      for (int i = t + 1; i < k; ++i) {
        while (m[i][t] != 0) {
          const std::int64_t q = floor_div(m[i][t], m[t][t]);
          row_axpy(m, i, t, q);
          if (m[i][t] != 0) std::swap(m[i], m[t]);
        }
      }
      clean = true;
      for (int j = t + 1; j < d; ++j)
        if (m[t][j] != 0) clean = false;
    }
    if (m[t][t] < 0) col_negate(t);
  }
  // Diagonal without the divisibility chain; the quotient decomposition
  // Z^d / rowspan = (+) Z_{s_i} (+) Z^{d-r} only needs a diagonal form.
  std::vector<std::int64_t> diag(rmax, 0);
  for (int i = 0; i < t; ++i) diag[i] = m[i][i];
  return {std::move(diag), std::move(v), std::move(vinv)};
}

std::vector<std::int64_t> mat_vec_row(const std::vector<std::int64_t>& v,
                                      const Mat& m) {
  // row vector v times matrix m
  const int d = static_cast<int>(m.size());
  const int c = d ? static_cast<int>(m[0].size()) : 0;
  std::vector<std::int64_t> out(c, 0);
  for (int j = 0; j < c; ++j) {
    std::int64_t acc = 0;
    for (int i = 0; i < d; ++i)
      acc = checked_add(acc, checked_mul(v[i], m[i][j]));
    out[j] = acc;
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Subgroup

void encode_coset(const CosetId& c, StreamHash& h) {
  h.absorb(0x636f7300u);  // tag
  h.absorb(c.residue.size());
  for (std::int64_t v : c.residue) h.absorb_i64(v);
  h.absorb(static_cast<std::uint64_t>(c.finite_rep));
}

std::string to_string(const CosetId& c) {
  GroupElement g;
  g.lattice = c.residue;
  g.finite = c.finite_rep;
  return to_string(g) + "H";
}

Subgroup::Subgroup(GroupPtr ambient, std::vector<std::vector<std::int64_t>> lattice_basis,
                   std::optional<std::vector<int>> finite_subset)
    : ambient_(std::move(ambient)), basis_(std::move(lattice_basis)) {
  const Group& g = *ambient_;
  for (const auto& row : basis_)
    if (static_cast<int>(row.size()) != g.lattice_dim())
      throw std::invalid_argument("subgroup basis row has wrong dimension");

  auto hnf = hermite_normal_form(basis_);
  if (static_cast<int>(hnf.rows.size()) != static_cast<int>(basis_.size()))
    throw std::invalid_argument("subgroup basis rows are linearly dependent");
  hnf_rows_ = std::move(hnf.rows);
  hnf_pivot_cols_ = std::move(hnf.pivot_cols);
  hnf_transform_ = std::move(hnf.transform);

  // Finite part: default = whole finite group.
  const int nf = g.finite_size();
  if (finite_subset) {
    finite_subset_ = *finite_subset;
    std::sort(finite_subset_.begin(), finite_subset_.end());
    finite_subset_.erase(
        std::unique(finite_subset_.begin(), finite_subset_.end()),
        finite_subset_.end());
  } else {
    finite_subset_.resize(nf);
    std::iota(finite_subset_.begin(), finite_subset_.end(), 0);
  }
  finite_member_.assign(nf, 0);
  for (int v : finite_subset_) {
    if (v < 0 || v >= nf)
      throw std::invalid_argument("finite subgroup element out of range");
    finite_member_[v] = 1;
  }
  if (g.has_finite()) {
    const FiniteGroup& fg = g.finite();
    if (!finite_member_[fg.identity()])
      throw std::invalid_argument("finite subgroup must contain the identity");
    for (int a : finite_subset_)
      for (int b : finite_subset_)
        if (!finite_member_[fg.compose(a, fg.inverse(b))])
          throw std::invalid_argument("finite subset is not closed under the table");
  }

  // Left-coset canonical representatives for the finite part: identity's
  // coset is represented by the identity (so section(H) = e); otherwise the
  // minimal index in gN.
  finite_cosets_.assign(nf, -1);
  const int fid = g.has_finite() ? g.finite().identity() : 0;
  for (int a = 0; a < nf; ++a) {
    if (finite_cosets_[a] >= 0) continue;
    int rep = nf;
    std::vector<int> members;
    for (int h : finite_subset_) {
      const int m = g.has_finite() ? g.finite().compose(a, h) : 0;
      members.push_back(m);
      rep = std::min(rep, m);
    }
    if (finite_member_[a]) rep = fid;
    for (int m : members) finite_cosets_[m] = rep;
  }
  std::unordered_set<int> seen;
  for (int a = 0; a < nf; ++a)
    if (seen.insert(finite_cosets_[a]).second)
      finite_coset_reps_.push_back(finite_cosets_[a]);
  std::sort(finite_coset_reps_.begin(), finite_coset_reps_.end());

  // Normality: lattice part is abelian; check the finite part by conjugation.
  normal_ = true;
  if (g.has_finite()) {
    const FiniteGroup& fg = g.finite();
    for (int a = 0; a < nf && normal_; ++a)
      for (int h : finite_subset_)
        if (!finite_member_[fg.compose(fg.compose(a, h), fg.inverse(a))]) {
          normal_ = false;
          break;
        }
  }
  if (normal_) build_quotient();
}

Subgroup Subgroup::full(GroupPtr ambient) {
  const int d = ambient->lattice_dim();
  std::vector<std::vector<std::int64_t>> basis;
  for (int i = 0; i < d; ++i) {
    std::vector<std::int64_t> row(d, 0);
    row[i] = 1;
    basis.push_back(std::move(row));
  }
  return Subgroup(std::move(ambient), std::move(basis), std::nullopt);
}

Subgroup Subgroup::trivial(GroupPtr ambient) {
  std::vector<int> id = {ambient->has_finite() ? ambient->finite().identity() : 0};
  return Subgroup(std::move(ambient), {}, std::move(id));
}

bool Subgroup::is_full() const {
  if (lattice_rank() != ambient_->lattice_dim()) return false;
  for (std::size_t i = 0; i < hnf_rows_.size(); ++i)
    if (hnf_rows_[i][hnf_pivot_cols_[i]] != 1) return false;
  return static_cast<int>(finite_subset_.size()) == ambient_->finite_size();
}

std::int64_t Subgroup::index_if_finite() const {
  if (lattice_rank() < ambient_->lattice_dim()) return 0;
  std::int64_t idx = 1;
  for (std::size_t i = 0; i < hnf_rows_.size(); ++i)
    idx = checked_mul(idx, hnf_rows_[i][hnf_pivot_cols_[i]]);
  const std::int64_t nf = ambient_->finite_size();
  return checked_mul(idx, nf / static_cast<std::int64_t>(finite_subset_.size()));
}

bool Subgroup::contains(const GroupElement& g) const {
  ambient_->check_element(g);
  if (!finite_member_[g.finite]) return false;
  std::vector<std::int64_t> v = g.lattice;
  for (std::size_t i = 0; i < hnf_rows_.size(); ++i) {
    const int c = hnf_pivot_cols_[i];
    const std::int64_t q = floor_div(v[c], hnf_rows_[i][c]);
    if (q != 0)
      for (std::size_t j = 0; j < v.size(); ++j)
        v[j] = checked_sub(v[j], checked_mul(q, hnf_rows_[i][j]));
  }
  for (std::int64_t x : v)
    if (x != 0) return false;
  return true;
}

CosetId Subgroup::coset_of(const GroupElement& g) const {
  ambient_->check_element(g);
  CosetId c;
  c.residue = g.lattice;
  for (std::size_t i = 0; i < hnf_rows_.size(); ++i) {
    const int col = hnf_pivot_cols_[i];
    const std::int64_t q = floor_div(c.residue[col], hnf_rows_[i][col]);
    if (q != 0)
      for (std::size_t j = 0; j < c.residue.size(); ++j)
        c.residue[j] = checked_sub(c.residue[j], checked_mul(q, hnf_rows_[i][j]));
  }
  c.finite_rep = finite_cosets_[g.finite];
  return c;
}

GroupElement Subgroup::section(const CosetId& c) const {
  GroupElement g;
  g.lattice = c.residue;
  g.finite = c.finite_rep;
  ambient_->check_element(g);
  return g;
}

GroupElement Subgroup::cocycle(const GroupElement& g, const CosetId& c) const {
  const GroupElement k = section(c);
  const GroupElement gk = ambient_->compose(g, k);
  const GroupElement s = section(coset_of(gk));
  const GroupElement rho = ambient_->compose(ambient_->inverse(s), gk);
  if (!contains(rho))
    throw std::logic_error("cocycle value escaped the subgroup (broken section)");
  return rho;
}

std::vector<CosetId> Subgroup::enumerate_cosets(int bound) const {
  if (bound < 1) throw std::invalid_argument("coset enumeration bound must be >= 1");
  const int d = ambient_->lattice_dim();
  std::vector<char> is_pivot(d, 0);
  std::vector<std::int64_t> pivot_limit(d, 0);
  for (std::size_t i = 0; i < hnf_rows_.size(); ++i) {
    is_pivot[hnf_pivot_cols_[i]] = 1;
    pivot_limit[hnf_pivot_cols_[i]] =
        std::min<std::int64_t>(hnf_rows_[i][hnf_pivot_cols_[i]] - 1, bound);
  }
  std::vector<std::int64_t> lo(d), hi(d);
  for (int j = 0; j < d; ++j) {
    lo[j] = is_pivot[j] ? 0 : -bound;
    hi[j] = is_pivot[j] ? pivot_limit[j] : bound;
  }
  std::vector<CosetId> out;
  std::vector<std::int64_t> cur = lo;
  while (true) {
    GroupElement g;
    g.lattice = cur;
    g.finite = ambient_->has_finite() ? ambient_->finite().identity() : 0;
    for (int f : finite_coset_reps_) {
      g.finite = f;
      // Residues in the box are already canonical for pivot columns, but
      // re-canonicalize to stay independent of representation details.
      out.push_back(coset_of(g));
    }
    int i = d - 1;
    for (; i >= 0; --i) {
      if (cur[i] < hi[i]) {
        ++cur[i];
        break;
      }
      cur[i] = lo[i];
    }
    if (i < 0) break;
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<std::int64_t> Subgroup::basis_coordinates(const GroupElement& h) const {
  if (!contains(h))
    throw std::invalid_argument("basis_coordinates: element is not a member");
  // Reduce h against the HNF rows recording quotients, then map back
  // through the unimodular transform (hnf = U * basis).
  std::vector<std::int64_t> v = h.lattice;
  std::vector<std::int64_t> q(hnf_rows_.size(), 0);
  for (std::size_t i = 0; i < hnf_rows_.size(); ++i) {
    const int c = hnf_pivot_cols_[i];
    q[i] = floor_div(v[c], hnf_rows_[i][c]);
    if (q[i] != 0)
      for (std::size_t j = 0; j < v.size(); ++j)
        v[j] = checked_sub(v[j], checked_mul(q[i], hnf_rows_[i][j]));
  }
  // h = sum_i q_i * hnf_i = sum_i q_i * (U * basis)_i = (q U) * basis.
  return mat_vec_row(q, hnf_transform_);
}

void Subgroup::build_quotient() {
  const Group& g = *ambient_;
  const int d = g.lattice_dim();
  const int k = lattice_rank();

  if (k > 0) {
    auto snf = smith_normal_form(basis_);
    snf_v_ = std::move(snf.v);
    snf_vinv_ = std::move(snf.vinv);
    for (int i = 0; i < k; ++i) {
      if (snf.diag[i] == 0)
        throw std::logic_error("SNF rank below basis rank");
      if (snf.diag[i] > 1) {
        torsion_.push_back(snf.diag[i]);
        torsion_cols_.push_back(i);
      }
    }
    for (int j = k; j < d; ++j) free_cols_.push_back(j);
  } else {
    snf_v_ = identity_mat(d);
    snf_vinv_ = identity_mat(d);
    for (int j = 0; j < d; ++j) free_cols_.push_back(j);
  }

  q_finite_torsion_size_ = 1;
  for (std::int64_t s : torsion_) {
    if (s > 4096 || q_finite_torsion_size_ > 4096)
      throw std::invalid_argument("quotient torsion part too large for a table");
    q_finite_torsion_size_ *= static_cast<int>(s);
  }
  q_finite_part_size_ = static_cast<int>(finite_coset_reps_.size());

  std::optional<FiniteGroup> qfin;
  const std::int64_t total =
      static_cast<std::int64_t>(q_finite_torsion_size_) * q_finite_part_size_;
  if (total > 1) {
    if (total > 4096)
      throw std::invalid_argument("quotient finite part too large for a table");
    std::optional<FiniteGroup> tor;
    for (std::int64_t s : torsion_) {
      FiniteGroup c = FiniteGroup::cyclic(static_cast<int>(s));
      tor = tor ? FiniteGroup::product(*tor, c) : std::move(c);
    }
    std::optional<FiniteGroup> fq;
    if (q_finite_part_size_ > 1) {
      // Quotient of the finite part by its normal subgroup, via coset reps.
      const FiniteGroup& fg = g.finite();
      const int m = q_finite_part_size_;
      std::vector<int> rep_index(g.finite_size(), -1);
      for (int i = 0; i < m; ++i) rep_index[finite_coset_reps_[i]] = i;
      std::vector<std::vector<int>> t(m, std::vector<int>(m));
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
          const int prod = fg.compose(finite_coset_reps_[i], finite_coset_reps_[j]);
          t[i][j] = rep_index[finite_cosets_[prod]];
        }
      fq = FiniteGroup(std::move(t));
    }
    if (tor && fq)
      qfin = FiniteGroup::product(*tor, *fq);
    else if (tor)
      qfin = std::move(tor);
    else
      qfin = std::move(fq);
  }
  quotient_ = std::make_shared<Group>(d - k, std::move(qfin));
}

GroupPtr Subgroup::quotient_group() const {
  if (!normal_)
    throw std::logic_error("quotient group requires a normal subgroup");
  return quotient_;
}

GroupElement Subgroup::project(const GroupElement& g) const {
  if (!normal_) throw std::logic_error("project requires a normal subgroup");
  ambient_->check_element(g);
  const std::vector<std::int64_t> w = mat_vec_row(g.lattice, snf_v_);
  GroupElement q;
  q.lattice.reserve(free_cols_.size());
  for (int j : free_cols_) q.lattice.push_back(w[j]);
  int tor_idx = 0;
  for (std::size_t i = 0; i < torsion_.size(); ++i)
    tor_idx = static_cast<int>(tor_idx * torsion_[i] +
                               floor_mod(w[torsion_cols_[i]], torsion_[i]));
  int fin_idx = 0;
  if (q_finite_part_size_ > 1) {
    const int rep = finite_cosets_[g.finite];
    fin_idx = static_cast<int>(std::lower_bound(finite_coset_reps_.begin(),
                                                finite_coset_reps_.end(), rep) -
                               finite_coset_reps_.begin());
  }
  if (quotient_->has_finite()) {
    if (q_finite_torsion_size_ > 1 && q_finite_part_size_ > 1)
      q.finite = tor_idx * q_finite_part_size_ + fin_idx;
    else if (q_finite_torsion_size_ > 1)
      q.finite = tor_idx;
    else
      q.finite = fin_idx;
  }
  return q;
}

GroupElement Subgroup::lift_quotient(const GroupElement& q) const {
  if (!normal_) throw std::logic_error("lift_quotient requires a normal subgroup");
  quotient_->check_element(q);
  const int d = ambient_->lattice_dim();
  std::vector<std::int64_t> w(d, 0);
  for (std::size_t i = 0; i < free_cols_.size(); ++i) w[free_cols_[i]] = q.lattice[i];
  int tor_idx = 0, fin_idx = 0;
  if (quotient_->has_finite()) {
    if (q_finite_torsion_size_ > 1 && q_finite_part_size_ > 1) {
      tor_idx = q.finite / q_finite_part_size_;
      fin_idx = q.finite % q_finite_part_size_;
    } else if (q_finite_torsion_size_ > 1) {
      tor_idx = q.finite;
    } else {
      fin_idx = q.finite;
    }
  }
  for (int i = static_cast<int>(torsion_.size()) - 1; i >= 0; --i) {
    w[torsion_cols_[i]] = tor_idx % torsion_[i];
    tor_idx = static_cast<int>(tor_idx / torsion_[i]);
  }
  GroupElement g;
  g.lattice = mat_vec_row(w, snf_vinv_);
  g.finite = finite_coset_reps_.empty() ? 0 : finite_coset_reps_[fin_idx];
  ambient_->check_element(g);
  return g;
}

CosetId Subgroup::coset_of_quotient(const GroupElement& q) const {
  return coset_of(lift_quotient(q));
}

GroupElement Subgroup::quotient_of_coset(const CosetId& c) const {
  return project(section(c));
}

// ---------------------------------------------------------------------------
// Windows and Folner sets

void validate_window(const Group& g, const Window& w) {
  if (w.empty()) throw std::invalid_argument("window is empty");
  for (const auto& e : w) g.check_element(e);
  for (std::size_t i = 0; i < w.size(); ++i)
    for (std::size_t j = i + 1; j < w.size(); ++j)
      if (w[i] == w[j]) throw std::invalid_argument("window elements not distinct");
}

Window box_window(const Group& g, int radius) { return g.box(radius); }

Window generator_ball_window(const Group& g, bool include_identity) {
  Window w = g.generator_ball();
  if (!include_identity) w.erase(w.begin());
  return w;
}

Window folner_set(const Group& g, int n) {
  if (n < 1) throw std::invalid_argument("Folner parameter must be >= 1");
  const int d = g.lattice_dim();
  Window out;
  std::vector<std::int64_t> coords(d, 0);
  while (true) {
    for (int f = 0; f < g.finite_size(); ++f) {
      GroupElement e;
      e.lattice = coords;
      e.finite = f;
      out.push_back(std::move(e));
    }
    int i = d - 1;
    for (; i >= 0; --i) {
      if (coords[i] < n - 1) {
        ++coords[i];
        break;
      }
      coords[i] = 0;
    }
    if (i < 0) break;
  }
  return out;
}

double boundary_ratio(const Group& g, const Window& f, const Window& fn) {
  std::unordered_set<GroupElement, GroupElementHash> members(fn.begin(), fn.end());
  std::int64_t boundary = 0;
  for (const auto& x : fn) {
    for (const auto& t : f) {
      if (!members.count(g.compose(t, x))) {
        ++boundary;
        break;
      }
    }
  }
  return static_cast<double>(boundary) / static_cast<double>(fn.size());
}

}  // namespace wclab

#ifndef CONFELL_KRIZ_HPP
#define CONFELL_KRIZ_HPP

// Arrangement model for ordered configuration spaces of a space X with
// Poincare-duality cohomology ring R: generators G_{a,b} (one per pair of
// points) and labels (classes of R placed at points), subject to
//   G_{a,b} = G_{b,a},   G_{a,b} * (z at a) = G_{a,b} * (z at b),
//   G_{a,c} G_{b,c} = G_{a,b} G_{b,c} - G_{a,b} G_{a,c},
// with d(G_{a,b}) the diagonal class spread over points a, b.
//
// Canonical monomials are monotone forests: edges (a,b) with a < b whose
// larger endpoints are distinct, labels only at component roots, unit labels
// implicit.  This basis is closed under edge deletion, which keeps the
// differential free of rewriting.

#include <algorithm>
#include <array>
#include <cassert>
#include <cstdint>
#include <cstring>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "confell/common.hpp"
#include "confell/linalg.hpp"
#include "confell/ring.hpp"

namespace confell {

inline constexpr int kmax_points = 12;

// Canonical monomial.  parent[v] = 0 marks a root; otherwise parent[v] < v is
// the smaller endpoint of the edge whose larger endpoint is v.  lab[v] = 0
// means no (equivalently unit) label; otherwise lab[v] - 1 is a basis index.
// Labels may only sit at roots.
struct monomial {
  std::uint8_t n = 0;
  std::uint8_t parent[kmax_points + 1] = {};
  std::uint8_t lab[kmax_points + 1] = {};

  bool operator==(const monomial& o) const {
    return n == o.n && std::memcmp(parent, o.parent, sizeof(parent)) == 0 &&
           std::memcmp(lab, o.lab, sizeof(lab)) == 0;
  }

  int points() const { return n; }

  int q() const {
    int c = 0;
    for (int v = 2; v <= n; ++v)
      if (parent[v] != 0) ++c;
    return c;
  }

  std::vector<std::pair<int, int>> edges() const {
    std::vector<std::pair<int, int>> e;
    for (int v = 2; v <= n; ++v)
      if (parent[v] != 0) e.emplace_back(parent[v], v);
    return e;
  }

  std::vector<std::pair<int, int>> labels() const {
    std::vector<std::pair<int, int>> l;
    for (int v = 1; v <= n; ++v)
      if (lab[v] != 0) l.emplace_back(v, lab[v] - 1);
    return l;
  }

  int degree_p(const ring_presentation& ring) const {
    int p = 0;
    for (int v = 1; v <= n; ++v)
      if (lab[v] != 0) p += ring.degrees[lab[v] - 1];
    return p;
  }

  int weight(const ring_presentation& ring) const {
    int w = 0;
    for (int v = 1; v <= n; ++v)
      if (lab[v] != 0) w += ring.weights[lab[v] - 1];
    return w;
  }

  int root_of(int v) const {
    while (parent[v] != 0) v = parent[v];
    return v;
  }

  // filtration level: points minus the number of bare singletons
  int level() const {
    bool in_edge[kmax_points + 1] = {};
    for (int v = 2; v <= n; ++v)
      if (parent[v] != 0) in_edge[v] = in_edge[parent[v]] = true;
    int bare = 0;
    for (int v = 1; v <= n; ++v)
      if (!in_edge[v] && lab[v] == 0) ++bare;
    return n - bare;
  }

  bool full_support() const { return level() == n; }
};

// Canonical order: lexicographic on the edge list, then on the label list.
struct monomial_less {
  bool operator()(const monomial& x, const monomial& y) const {
    if (x.n != y.n) return x.n < y.n;
    // edge lists, pairs (a, b) in order of increasing b
    int vx = 2, vy = 2;
    while (true) {
      while (vx <= x.n && x.parent[vx] == 0) ++vx;
      while (vy <= y.n && y.parent[vy] == 0) ++vy;
      const bool ex = vx <= x.n, ey = vy <= y.n;
      if (!ex || !ey) {
        if (ex != ey) return !ex;  // shorter edge list first
        break;
      }
      if (x.parent[vx] != y.parent[vy]) return x.parent[vx] < y.parent[vy];
      if (vx != vy) return vx < vy;
      ++vx;
      ++vy;
    }
    // label lists, pairs (vertex, basis index)
    int ux = 1, uy = 1;
    while (true) {
      while (ux <= x.n && x.lab[ux] == 0) ++ux;
      while (uy <= y.n && y.lab[uy] == 0) ++uy;
      const bool ex = ux <= x.n, ey = uy <= y.n;
      if (!ex || !ey) {
        if (ex != ey) return !ex;
        return false;  // equal
      }
      if (ux != uy) return ux < uy;
      if (x.lab[ux] != y.lab[uy]) return x.lab[ux] < y.lab[uy];
      ++ux;
      ++uy;
    }
  }
};

struct monomial_hash {
  std::size_t operator()(const monomial& m) const {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](std::uint8_t b) {
      h ^= b;
      h *= 1099511628211ull;
    };
    mix(m.n);
    for (int v = 1; v <= m.n; ++v) {
      mix(m.parent[v]);
      mix(m.lab[v]);
    }
    return static_cast<std::size_t>(h);
  }
};

using element = std::map<monomial, rat, monomial_less>;

inline void add_term(element& e, const monomial& m, const rat& c) {
  if (c == 0) return;
  auto it = e.find(m);
  if (it == e.end()) {
    e.emplace(m, c);
  } else {
    it->second += c;
    if (it->second == 0) e.erase(it);
  }
}

// One generator in an unreduced product: an edge factor G_{a,b} or a label
// factor (basis class at a vertex).
struct factor {
  bool edge = false;
  int a = 0;  // edge: smaller endpoint (after normalization); label: vertex
  int b = 0;  // edge: larger endpoint
  int basis = 0;

  static factor G(int a, int b) { return {true, a, b, 0}; }
  static factor L(int vertex, int basis) { return {false, vertex, 0, basis}; }
};

namespace detail {

inline bool factor_odd(const ring_presentation& ring, const factor& f) {
  return f.edge ? true : ring.odd(f.basis);  // G has degree top-1, which is odd
}

// Stable insertion sort into [edges by (b, a)] + [labels by vertex], tracking
// the Koszul sign of the permutation.
inline int koszul_sort(const ring_presentation& ring, std::vector<factor>& fs) {
  auto key = [](const factor& f) {
    return f.edge ? std::array<int, 3>{0, f.b, f.a} : std::array<int, 3>{1, f.a, 0};
  };
  int sign = 1;
  for (std::size_t i = 1; i < fs.size(); ++i) {
    std::size_t j = i;
    while (j > 0 && key(fs[j - 1]) > key(fs[j])) {
      if (factor_odd(ring, fs[j - 1]) && factor_odd(ring, fs[j])) sign = -sign;
      std::swap(fs[j - 1], fs[j]);
      --j;
    }
  }
  return sign;
}

}  // namespace detail

// Reduces an arbitrary product of generators to canonical monomials,
// accumulating into `out`.  Handles edge-index normalization, Koszul
// reordering, the three-term straightening of repeated larger endpoints,
// sliding labels to their component roots, and label multiplication.
inline void canonicalize(const ring_presentation& ring, int n, std::vector<factor> fs,
                         rat coeff, element& out) {
  if (n < 0 || n > kmax_points) throw input_error("canonicalize: point count out of range");
  if (ring.top_degree % 2 != 0)
    throw input_error("model requires a ring of even top degree");
  if (coeff == 0) return;
  // normalize edges, drop unit labels (unit is even: no sign)
  {
    std::size_t w = 0;
    for (std::size_t i = 0; i < fs.size(); ++i) {
      factor f = fs[i];
      if (f.edge) {
        if (f.a == f.b) return;
        if (f.a > f.b) std::swap(f.a, f.b);
        if (f.a < 1 || f.b > n) throw input_error("canonicalize: vertex out of range");
      } else {
        if (f.a < 1 || f.a > n) throw input_error("canonicalize: vertex out of range");
        if (f.basis < 0 || f.basis >= ring.dim())
          throw input_error("canonicalize: label out of range");
        if (f.basis == ring.unit) continue;
      }
      fs[w++] = f;
    }
    fs.resize(w);
  }
  coeff *= detail::koszul_sort(ring, fs);

  std::size_t n_edges = 0;
  while (n_edges < fs.size() && fs[n_edges].edge) ++n_edges;

  for (std::size_t k = 1; k < n_edges; ++k) {
    if (fs[k - 1].a == fs[k].a && fs[k - 1].b == fs[k].b) return;  // repeated edge
    if (fs[k - 1].b == fs[k].b) {
      // G_{i,m} G_{j,m} -> -G_{i,j} G_{i,m} + G_{i,j} G_{j,m}  (i < j < m)
      const int i = fs[k - 1].a, j = fs[k].a, m = fs[k].b;
      auto branch = fs;
      branch[k - 1] = factor::G(i, j);
      branch[k] = factor::G(i, m);
      canonicalize(ring, n, branch, -coeff, out);
      branch[k] = factor::G(j, m);
      canonicalize(ring, n, std::move(branch), coeff, out);
      return;
    }
  }

  // monotone forest; slide labels to roots and re-sort them
  monomial m;
  m.n = static_cast<std::uint8_t>(n);
  for (std::size_t k = 0; k < n_edges; ++k)
    m.parent[fs[k].b] = static_cast<std::uint8_t>(fs[k].a);
  std::vector<factor> labels(fs.begin() + static_cast<std::ptrdiff_t>(n_edges), fs.end());
  for (auto& l : labels) l.a = m.root_of(l.a);
  coeff *= detail::koszul_sort(ring, labels);

  // merge labels that landed on the same root, leftmost pair first
  std::function<void(std::size_t, std::vector<factor>&, rat)> merge =
      [&](std::size_t pos, std::vector<factor>& ls, rat c) {
        for (; pos + 1 < ls.size(); ++pos) {
          if (ls[pos].a != ls[pos + 1].a) continue;
          const auto& prods = ring.product(ls[pos].basis, ls[pos + 1].basis);
          for (const auto& [g, pc] : prods) {
            std::vector<factor> next;
            next.reserve(ls.size() - 1);
            next.insert(next.end(), ls.begin(), ls.begin() + static_cast<std::ptrdiff_t>(pos));
            if (g != ring.unit) next.push_back(factor::L(ls[pos].a, g));
            next.insert(next.end(), ls.begin() + static_cast<std::ptrdiff_t>(pos) + 2, ls.end());
            merge(g != ring.unit ? pos : (pos > 0 ? pos - 1 : 0), next, c * pc);
          }
          return;
        }
        monomial res = m;
        for (const auto& l : ls) res.lab[l.a] = static_cast<std::uint8_t>(l.basis + 1);
        add_term(out, res, c);
      };
  merge(0, labels, coeff);
}

enum class diff_mode { full, graded };

// d(m) as (monomial, coefficient) terms, possibly with repeated monomials;
// appended to `out`.  In graded mode only the terms preserving the filtration
// level of m are kept.
inline void differential_terms(const ring_presentation& ring, const diagonal_class& diag,
                               const monomial& m, diff_mode mode,
                               std::vector<std::pair<monomial, rat>>& out) {
  if (ring.top_degree % 2 != 0)
    throw input_error("model requires a ring of even top degree");
  int child_count[kmax_points + 1] = {};
  for (int v = 2; v <= m.n; ++v)
    if (m.parent[v] != 0) ++child_count[m.parent[v]];
  // odd_below[v]: number of odd labels at vertices u < v
  int odd_below[kmax_points + 2] = {};
  for (int v = 1; v <= m.n; ++v)
    odd_below[v + 1] = odd_below[v] + ((m.lab[v] != 0 && ring.odd(m.lab[v] - 1)) ? 1 : 0);

  int k = 0;
  for (int b = 1; b <= m.n; ++b) {
    const int a = m.parent[b];
    if (a == 0) continue;
    ++k;
    const int edge_sign = (k % 2 == 1) ? 1 : -1;
    const int r0 = m.root_of(a);
    const int old_lab = m.lab[r0];  // 0 or basis+1
    const bool ta_singleton = (m.parent[a] == 0 && child_count[a] == 1);
    const bool tb_singleton = (child_count[b] == 0);

    for (const auto& t : diag.terms) {
      if (mode == diff_mode::graded) {
        // keep level: neither split component may become a bare singleton
        if (tb_singleton && t.right == ring.unit) continue;
        if (ta_singleton && t.left == ring.unit && old_lab == 0) continue;
      }
      rat c = t.coeff * edge_sign;
      const bool l_odd = ring.odd(t.left), r_odd = ring.odd(t.right);
      int inversions = 0;
      if (l_odd) {
        inversions += odd_below[r0];
        if (r_odd && r0 > b) ++inversions;
      }
      if (r_odd) inversions += odd_below[b];
      if (inversions % 2 != 0) c = -c;

      monomial res = m;
      res.parent[b] = 0;
      if (t.right != ring.unit) res.lab[b] = static_cast<std::uint8_t>(t.right + 1);
      if (t.left == ring.unit || old_lab == 0) {
        if (t.left != ring.unit) res.lab[r0] = static_cast<std::uint8_t>(t.left + 1);
        out.emplace_back(res, c);
      } else {
        // multiply the incoming label into the existing one at the root
        for (const auto& [g, pc] : ring.product(t.left, old_lab - 1)) {
          monomial res2 = res;
          res2.lab[r0] = static_cast<std::uint8_t>(g + 1);  // g is never the unit here
          out.emplace_back(res2, c * pc);
        }
      }
    }
  }
}

inline element differential(const ring_presentation& ring, const diagonal_class& diag,
                            const monomial& m, diff_mode mode) {
  std::vector<std::pair<monomial, rat>> terms;
  differential_terms(ring, diag, m, mode, terms);
  element out;
  for (const auto& [mm, c] : terms) add_term(out, mm, c);
  return out;
}

inline element differential(const ring_presentation& ring, const diagonal_class& diag,
                            const element& e, diff_mode mode) {
  std::vector<std::pair<monomial, rat>> terms;
  element out;
  for (const auto& [m, c] : e) {
    terms.clear();
    differential_terms(ring, diag, m, mode, terms);
    for (const auto& [mm, tc] : terms) add_term(out, mm, c * tc);
  }
  return out;
}

inline std::vector<factor> factors_of(const monomial& m) {
  std::vector<factor> fs;
  for (int v = 2; v <= m.n; ++v)
    if (m.parent[v] != 0) fs.push_back(factor::G(m.parent[v], v));
  for (int v = 1; v <= m.n; ++v)
    if (m.lab[v] != 0) fs.push_back(factor::L(v, m.lab[v] - 1));
  return fs;
}

inline element multiply(const ring_presentation& ring, int n, const element& e1,
                        const element& e2) {
  element out;
  for (const auto& [m1, c1] : e1)
    for (const auto& [m2, c2] : e2) {
      auto fs = factors_of(m1);
      const auto fs2 = factors_of(m2);
      fs.insert(fs.end(), fs2.begin(), fs2.end());
      canonicalize(ring, n, std::move(fs), c1 * c2, out);
    }
  return out;
}

// Induced map of a (not necessarily injective) map of point sets
// f: {1..n_src} -> {1..n_dst}; f[0] is ignored.
inline element apply_map(const ring_presentation& ring, const std::vector<int>& f,
                         int n_dst, const element& e) {
  element out;
  for (const auto& [m, c] : e) {
    if (static_cast<std::size_t>(m.n) + 1 > f.size())
      throw input_error("apply_map: map does not cover the source points");
    std::vector<factor> fs;
    for (int v = 2; v <= m.n; ++v)
      if (m.parent[v] != 0) fs.push_back(factor::G(f[m.parent[v]], f[v]));
    for (int v = 1; v <= m.n; ++v)
      if (m.lab[v] != 0) fs.push_back(factor::L(f[v], m.lab[v] - 1));
    canonicalize(ring, n_dst, std::move(fs), c, out);
  }
  return out;
}

// All canonical monomials of the given bidegree, optionally restricted to one
// torus weight and/or to full support (every singleton labelled), in
// canonical order.
inline std::vector<monomial> build_basis(const ring_presentation& ring, int n, int p, int q,
                                         std::optional<int> weight = std::nullopt,
                                         bool full_support = false) {
  if (n < 0 || n > kmax_points) throw input_error("build_basis: point count out of range");
  if (ring.dim() > 254) throw input_error("build_basis: ring dimension too large");
  std::vector<monomial> out;
  if (p < 0 || q < 0 || q > std::max(0, n - 1)) return out;

  std::vector<int> nonunit;
  for (int g = 0; g < ring.dim(); ++g)
    if (g != ring.unit) nonunit.push_back(g);
  int max_label_deg = 0, max_abs_weight = 0;
  for (int g : nonunit) {
    max_label_deg = std::max(max_label_deg, ring.degrees[g]);
    max_abs_weight = std::max(max_abs_weight, std::abs(ring.weights[g]));
  }

  monomial m;
  m.n = static_cast<std::uint8_t>(n);
  int child_count[kmax_points + 1] = {};

  std::function<void(int, int, int, int)> assign_labels = [&](int v, int deg, int w,
                                                              int roots_left) {
    if (deg + roots_left * max_label_deg < p) return;
    if (weight && std::abs(*weight - w) > roots_left * max_abs_weight) return;
    if (v > n) {
      if (deg == p && (!weight || w == *weight)) out.push_back(m);
      return;
    }
    if (m.parent[v] != 0) {
      assign_labels(v + 1, deg, w, roots_left);
      return;
    }
    const bool singleton = (child_count[v] == 0);
    if (!(full_support && singleton)) assign_labels(v + 1, deg, w, roots_left - 1);
    for (int g : nonunit) {
      if (deg + ring.degrees[g] > p) continue;
      m.lab[v] = static_cast<std::uint8_t>(g + 1);
      assign_labels(v + 1, deg + ring.degrees[g], w + ring.weights[g], roots_left - 1);
      m.lab[v] = 0;
    }
  };

  std::function<void(int, int)> choose_parents = [&](int v, int e) {
    if (e + (n - v + 1) < q) return;
    if (v > n) {
      if (e == q) {
        int roots = 0;
        for (int u = 1; u <= n; ++u)
          if (m.parent[u] == 0) ++roots;
        assign_labels(1, 0, 0, roots);
      }
      return;
    }
    choose_parents(v + 1, e);
    if (e < q) {
      for (int a = 1; a < v; ++a) {
        m.parent[v] = static_cast<std::uint8_t>(a);
        ++child_count[a];
        choose_parents(v + 1, e + 1);
        --child_count[a];
        m.parent[v] = 0;
      }
    }
  };
  if (n == 0) {
    if (p == 0 && q == 0 && (!weight || *weight == 0)) out.push_back(m);
    return out;
  }
  choose_parents(2, 0);
  std::sort(out.begin(), out.end(), monomial_less{});
  return out;
}

// Matrix of the differential out of the span of `src` with rows indexed by
// `target` (the canonical basis of the image piece, sorted canonically).
// Columns with rational entries are rescaled to integers; this preserves rank.
inline sparse_int_matrix differential_matrix(const ring_presentation& ring,
                                             const diagonal_class& diag, int n,
                                             const std::vector<monomial>& src,
                                             const std::vector<monomial>& target,
                                             diff_mode mode) {
  (void)n;
  sparse_int_matrix mat(static_cast<std::int64_t>(target.size()),
                        static_cast<std::int64_t>(src.size()));
  std::unordered_map<monomial, std::uint32_t, monomial_hash> index;
  index.reserve(target.size() * 2);
  for (std::size_t i = 0; i < target.size(); ++i)
    index.emplace(target[i], static_cast<std::uint32_t>(i));

  std::vector<std::pair<monomial, rat>> terms;
  std::map<std::uint32_t, rat> col;
  for (std::size_t j = 0; j < src.size(); ++j) {
    terms.clear();
    col.clear();
    differential_terms(ring, diag, src[j], mode, terms);
    for (const auto& [mm, c] : terms) {
      auto it = index.find(mm);
      if (it == index.end())
        throw std::logic_error("differential_matrix: image term not in target basis");
      col[it->second] += c;
    }
    bigint scale = 1;
    for (const auto& [row, c] : col)
      if (c != 0) scale = lcm(scale, denominator(c));
    for (const auto& [row, c] : col) {
      if (c == 0) continue;
      bigint v = numerator(c) * (scale / denominator(c));
      if (v > std::numeric_limits<std::int64_t>::max() ||
          v < std::numeric_limits<std::int64_t>::min())
        throw infeasible_error("differential_matrix: entry exceeds 64 bits");
      mat.add_entry(static_cast<std::int64_t>(row), static_cast<std::int64_t>(j),
                    static_cast<std::int64_t>(v));
    }
  }
  return mat;
}

struct matrix_piece {
  sparse_int_matrix mat;  // rows: target basis, cols: source basis
  std::vector<monomial> target;
};

// Convenience overload building the target basis of the image bidegree.
inline matrix_piece differential_matrix(const ring_presentation& ring,
                                        const diagonal_class& diag, int n,
                                        const std::vector<monomial>& src, int p, int q,
                                        diff_mode mode,
                                        std::optional<int> weight = std::nullopt,
                                        bool full_support = false) {
  matrix_piece out;
  if (q <= 0) {
    out.mat = sparse_int_matrix(0, static_cast<std::int64_t>(src.size()));
    return out;
  }
  out.target = build_basis(ring, n, p + ring.top_degree, q - 1, weight, full_support);
  out.mat = differential_matrix(ring, diag, n, src, out.target, mode);
  return out;
}

// Text dump like "-1 * G(1,2)G(1,3) x@1 y@4"; "1 * 1" is the empty monomial.
inline std::string to_string(const ring_presentation& ring, const monomial& m) {
  std::string s;
  for (int v = 2; v <= m.n; ++v)
    if (m.parent[v] != 0)
      s += "G(" + std::to_string(int(m.parent[v])) + "," + std::to_string(v) + ")";
  for (int v = 1; v <= m.n; ++v)
    if (m.lab[v] != 0) {
      if (!s.empty()) s += " ";
      s += ring.names[m.lab[v] - 1] + "@" + std::to_string(v);
    }
  return s.empty() ? "1" : s;
}

inline std::string to_string(const ring_presentation& ring, const element& e) {
  if (e.empty()) return "0";
  std::string s;
  for (const auto& [m, c] : e) {
    if (!s.empty()) s += "  +  ";
    s += c.str() + " * " + to_string(ring, m);
  }
  return s;
}

}  // namespace confell

#endif

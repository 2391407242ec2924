#ifndef CONFELL_PARTITIONS_HPP
#define CONFELL_PARTITIONS_HPP

// Partition combinatorics for the symmetric-group lower bounds: hook lengths,
// Frobenius coordinates, the arm = leg + 1 family, oyster partitions, and
// Littlewood-Richardson coefficients.

#include <algorithm>
#include <functional>
#include <optional>
#include <vector>

#include "confell/common.hpp"
#include "confell/ring.hpp"

namespace confell {

struct partition {
  std::vector<int> parts;  // weakly decreasing, strictly positive

  partition() = default;
  explicit partition(std::vector<int> p) : parts(std::move(p)) {
    while (!parts.empty() && parts.back() == 0) parts.pop_back();
    for (std::size_t i = 0; i + 1 < parts.size(); ++i)
      if (parts[i] < parts[i + 1]) throw input_error("partition: parts must be weakly decreasing");
    if (!parts.empty() && parts.back() < 0) throw input_error("partition: negative part");
  }

  int size() const {
    int s = 0;
    for (int p : parts) s += p;
    return s;
  }
  int rows() const { return static_cast<int>(parts.size()); }
  bool operator==(const partition& o) const { return parts == o.parts; }
  bool operator<(const partition& o) const { return parts < o.parts; }

  partition conjugate() const {
    std::vector<int> c;
    if (parts.empty()) return partition{};
    c.assign(static_cast<std::size_t>(parts[0]), 0);
    for (int p : parts)
      for (int j = 0; j < p; ++j) ++c[static_cast<std::size_t>(j)];
    return partition{std::move(c)};
  }
};

inline std::vector<partition> partitions_of(int n, int max_part = -1) {
  if (max_part < 0) max_part = n;
  std::vector<partition> out;
  std::vector<int> cur;
  std::function<void(int, int)> rec = [&](int rem, int mx) {
    if (rem == 0) {
      out.emplace_back(partition{cur});
      return;
    }
    for (int p = std::min(rem, mx); p >= 1; --p) {
      cur.push_back(p);
      rec(rem - p, p);
      cur.pop_back();
    }
  };
  rec(n, max_part);
  return out;
}

// Frobenius coordinates in the convention where the arm and leg both count
// the diagonal box: a_i = lambda_i - i + 1, b_i = lambda'_i - i + 1, so that
// |lambda| = sum (a_i + b_i - 1).
struct frobenius_coords {
  std::vector<int> arms;
  std::vector<int> legs;
};

inline frobenius_coords frobenius(const partition& lam) {
  frobenius_coords fc;
  const auto conj = lam.conjugate();
  for (int i = 0; i < lam.rows() && lam.parts[static_cast<std::size_t>(i)] >= i + 1; ++i) {
    fc.arms.push_back(lam.parts[static_cast<std::size_t>(i)] - i);
    fc.legs.push_back(conj.parts[static_cast<std::size_t>(i)] - i);
  }
  return fc;
}

// Inverse of frobenius(); throws when the prescriptions are inconsistent.
inline partition from_frobenius(const frobenius_coords& fc) {
  const int d = static_cast<int>(fc.arms.size());
  if (fc.legs.size() != fc.arms.size())
    throw input_error("frobenius: arm/leg lists differ in length");
  for (int i = 0; i < d; ++i) {
    if (fc.arms[i] < 1 || fc.legs[i] < 1)
      throw input_error("frobenius: coordinates must be positive");
    if (i > 0 && (fc.arms[i] >= fc.arms[i - 1] || fc.legs[i] >= fc.legs[i - 1]))
      throw input_error("frobenius: coordinates must be strictly decreasing");
  }
  std::vector<int> parts;
  for (int i = 0; i < d; ++i) parts.push_back(fc.arms[static_cast<std::size_t>(i)] + i);
  const int total_rows = d > 0 ? fc.legs[0] : 0;  // first column height
  for (int r = d + 1; r <= total_rows; ++r) {
    int len = 0;
    for (int j = 0; j < d; ++j)
      if (fc.legs[static_cast<std::size_t>(j)] + j >= r) ++len;
    parts.push_back(len);
  }
  partition lam{std::move(parts)};
  const auto back = frobenius(lam);
  if (back.arms != fc.arms || back.legs != fc.legs)
    throw input_error("frobenius: no partition matches these coordinates");
  return lam;
}

inline std::vector<std::vector<int>> hook_lengths(const partition& lam) {
  const auto conj = lam.conjugate();
  std::vector<std::vector<int>> h(static_cast<std::size_t>(lam.rows()));
  for (int i = 0; i < lam.rows(); ++i) {
    h[static_cast<std::size_t>(i)].resize(static_cast<std::size_t>(lam.parts[static_cast<std::size_t>(i)]));
    for (int j = 0; j < lam.parts[static_cast<std::size_t>(i)]; ++j)
      h[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          lam.parts[static_cast<std::size_t>(i)] - j + conj.parts[static_cast<std::size_t>(j)] - i - 1;
  }
  return h;
}

// dim of the irreducible S_|lambda| representation, by the hook length formula.
inline std::int64_t hook_dim(const partition& lam) {
  const int n = lam.size();
  if (n == 0) return 1;
  bigint num = 1;
  for (int i = 2; i <= n; ++i) num *= i;
  for (const auto& row : hook_lengths(lam))
    for (int h : row) num /= h;
  return static_cast<std::int64_t>(num);
}

// s_lambda(1,...,1) with n ones: the content/hook product formula.
inline std::int64_t schur_eval_ones(const partition& lam, int n) {
  if (lam.rows() > n) return 0;
  bigint num = 1, den = 1;
  const auto hooks = hook_lengths(lam);
  for (int i = 0; i < lam.rows(); ++i)
    for (int j = 0; j < lam.parts[static_cast<std::size_t>(i)]; ++j) {
      num *= n + j - i;
      den *= hooks[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  return static_cast<std::int64_t>(num / den);
}

// dim of the stable family C_lambda at S_n (the representation induced from
// the Specht module of lambda on |lambda| of the n points).
inline std::int64_t dim_C(const partition& lam, int n) {
  const int k = lam.size();
  if (n < k) return 0;
  return binomial(n, k) * hook_dim(lam);
}

// dim of the stable family D_k at S_n.
inline std::int64_t dim_D(int k, int n) {
  if (k == 0) return n == 0 ? 1 : 0;
  if (n < 1) return 0;
  return binomial(n - 1, k - 1);
}

// Littlewood-Richardson coefficient c^{lambda}_{mu nu}: skew semistandard
// tableaux of shape lambda/mu and content nu whose reverse reading word is a
// lattice word.
inline std::int64_t lr_coefficient(const partition& lam, const partition& mu,
                                   const partition& nu) {
  if (mu.size() + nu.size() != lam.size()) return 0;
  if (mu.rows() > lam.rows()) return 0;
  for (int i = 0; i < mu.rows(); ++i)
    if (mu.parts[static_cast<std::size_t>(i)] > lam.parts[static_cast<std::size_t>(i)]) return 0;

  const int rows = lam.rows();
  std::vector<int> inner(static_cast<std::size_t>(rows), 0);
  for (int i = 0; i < mu.rows(); ++i) inner[static_cast<std::size_t>(i)] = mu.parts[static_cast<std::size_t>(i)];
  std::vector<int> content = nu.parts;
  const int maxval = nu.rows();

  // fill cells row by row, left to right within a row, tracking:
  //  - column strictness against the row above,
  //  - row weakness against the cell to the left,
  //  - the lattice property of the reverse reading word via running counts.
  std::vector<std::vector<int>> fill(static_cast<std::size_t>(rows));
  for (int i = 0; i < rows; ++i)
    fill[static_cast<std::size_t>(i)].assign(static_cast<std::size_t>(lam.parts[static_cast<std::size_t>(i)]), 0);
  std::vector<int> used(static_cast<std::size_t>(maxval) + 1, 0);
  std::int64_t count = 0;

  std::function<void(int, int)> rec = [&](int r, int c) {
    if (r == rows) {
      ++count;
      return;
    }
    // next cell in reverse reading order: rows top to bottom, right to left
    const int row_len = lam.parts[static_cast<std::size_t>(r)];
    const int row_inner = inner[static_cast<std::size_t>(r)];
    if (c < row_inner) {  // row exhausted (possibly empty); move down
      rec(r + 1, r + 1 < rows ? lam.parts[static_cast<std::size_t>(r) + 1] - 1 : 0);
      return;
    }
    for (int v = 1; v <= maxval; ++v) {
      if (used[static_cast<std::size_t>(v)] >= content[static_cast<std::size_t>(v - 1)]) continue;
      // lattice: after placing v, #v used must not exceed #(v-1) used
      if (v > 1 && used[static_cast<std::size_t>(v)] + 1 > used[static_cast<std::size_t>(v - 1)]) continue;
      // row weakness: cell to the right (already filled) must be >= v
      if (c + 1 < row_len && fill[static_cast<std::size_t>(r)][static_cast<std::size_t>(c) + 1] < v) continue;
      // column strictness: cell above must be < v (0 when in mu or absent)
      if (r > 0 && c < lam.parts[static_cast<std::size_t>(r) - 1] &&
          c >= inner[static_cast<std::size_t>(r) - 1] &&
          fill[static_cast<std::size_t>(r) - 1][static_cast<std::size_t>(c)] >= v)
        continue;
      fill[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = v;
      ++used[static_cast<std::size_t>(v)];
      rec(c == row_inner ? r + 1 : r, c == row_inner ? (r + 1 < rows ? lam.parts[static_cast<std::size_t>(r) + 1] - 1 : 0) : c - 1);
      --used[static_cast<std::size_t>(v)];
      fill[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = 0;
    }
  };
  rec(0, rows > 0 ? lam.parts[0] - 1 : 0);
  return count;
}

// Partitions of m whose every diagonal box has arm = leg + 1 (in the
// convention above: legs[i] = arms[i] - 1).  Empty for odd m.
inline std::vector<partition> enumerate_Q(int m) {
  std::vector<partition> out;
  for (const auto& lam : partitions_of(m)) {
    const auto fc = frobenius(lam);
    bool ok = !fc.arms.empty() || m == 0;
    for (std::size_t i = 0; i < fc.arms.size() && ok; ++i)
      if (fc.legs[i] != fc.arms[i] - 1) ok = false;
    if (ok && m > 0) out.push_back(lam);
  }
  return out;
}

// lambda is a k-core when it has exactly k rows and lambda - (1,...,1) lies
// in the arm = leg + 1 family.
inline bool is_k_core(const partition& lam, int k) {
  if (lam.rows() != k) return false;
  std::vector<int> shifted;
  for (int p : lam.parts)
    if (p - 1 > 0) shifted.push_back(p - 1);
  const int m = lam.size() - k;
  if (m == 0) return shifted.empty();
  const auto q = enumerate_Q(m);
  return std::find(q.begin(), q.end(), partition{shifted}) != q.end();
}

struct oyster {
  partition lam;
  int k = 0;  // wreath parameter: p - 2a
  int a = 0;  // shell length
};

// (k,a)-oysters of N: the first a Frobenius coordinates form a shell
// (arm = leg + 3, legs > k) and the remaining coordinates form a k-core.
inline std::vector<oyster> enumerate_oyster(int k, int a, int N) {
  if (k < 0 || a < 0 || N < 0) throw input_error("enumerate_oyster: negative argument");
  std::vector<oyster> out;
  for (const auto& lam : partitions_of(N)) {
    const auto fc = frobenius(lam);
    const int len = static_cast<int>(fc.arms.size());
    if (len < a) continue;
    bool shell_ok = true;
    for (int i = 0; i < a && shell_ok; ++i)
      if (fc.arms[static_cast<std::size_t>(i)] != fc.legs[static_cast<std::size_t>(i)] + 3) shell_ok = false;
    if (a > 0 && fc.legs[static_cast<std::size_t>(a) - 1] <= k) shell_ok = false;
    if (!shell_ok) continue;
    partition core;
    if (len > a) {
      frobenius_coords rest;
      rest.arms.assign(fc.arms.begin() + a, fc.arms.end());
      rest.legs.assign(fc.legs.begin() + a, fc.legs.end());
      core = from_frobenius(rest);
    }
    if (!is_k_core(core, k)) continue;
    out.push_back({lam, k, a});
  }
  return out;
}

struct oyster_bound_term {
  partition lam;
  int k = 0;
  int a = 0;
  std::int64_t dim = 0;          // hook_dim(lam)
  std::int64_t contribution = 0;  // dim * (k + 1)
};

struct oyster_bound {
  std::int64_t total = 0;
  std::vector<oyster_bound_term> terms;
};

// Lower bound for the top-filtration cohomology dimension at (p, q), at the
// critical number of points n = p + 2q.
inline oyster_bound oyster_lower_bound(int p, int q) {
  if (p < 0 || q < 0) throw input_error("oyster_lower_bound: negative bidegree");
  oyster_bound out;
  const int N = p + 2 * q;
  for (int a = 0; 2 * a <= p; ++a) {
    const int k = p - 2 * a;
    for (const auto& oy : enumerate_oyster(k, a, N)) {
      const std::int64_t d = hook_dim(oy.lam);
      out.terms.push_back({oy.lam, k, a, d, d * (k + 1)});
      out.total += d * (k + 1);
    }
  }
  return out;
}

// dim of the degree-(p,q) part of the whole model, counted by partitions of
// the points into labelled blocks: q = points - blocks, p = total label degree,
// each shape weighted by n! / (prod sizes * prod multiplicities!).
inline std::int64_t labelled_partition_dim(const ring_presentation& ring, int n, int p,
                                           int q, bool full_support = false) {
  if (n < 0) throw input_error("labelled_partition_dim: negative n");
  // block types ordered (size, label); recursion chooses multiplicities
  struct type {
    int size;
    int label;
  };
  std::vector<type> types;
  for (int s = 1; s <= n; ++s)
    for (int g = 0; g < ring.dim(); ++g) types.push_back({s, g});
  std::int64_t total = 0;
  const std::int64_t nfact = factorial(n);
  // denominator accumulates prod(size_b) * prod(mult!)
  std::function<void(std::size_t, int, int, int, std::int64_t)> rec =
      [&](std::size_t t, int rem, int deg, int blocks, std::int64_t denom) {
        if (deg > p) return;
        if (rem == 0) {
          if (deg == p && n - blocks == q) total += nfact / denom;
          return;
        }
        if (t == types.size()) return;
        rec(t + 1, rem, deg, blocks, denom);
        const auto& ty = types[t];
        if (full_support && ty.size == 1 && ty.label == ring.unit) return;
        std::int64_t d = denom;
        for (int m = 1; m * ty.size <= rem; ++m) {
          d *= ty.size;
          d *= m;
          rec(t + 1, rem - m * ty.size, deg + m * ring.degrees[ty.label], blocks + m, d);
        }
      };
  rec(0, n, 0, 0, 1);
  return total;
}

// dim of the top filtration quotient of the elliptic model at (p, q) and
// n = p + 2q: sum over Q(2q) of hook dims, times C(p+2q, 2q) * 2^p.
inline std::int64_t top_graded_dim(int p, int q) {
  std::int64_t qsum = 1;
  if (q > 0) {
    qsum = 0;
    for (const auto& lam : enumerate_Q(2 * q)) qsum += hook_dim(lam);
  }
  return qsum * binomial(p + 2 * q, 2 * q) * (std::int64_t{1} << p);
}

}  // namespace confell

#endif

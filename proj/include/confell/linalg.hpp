#ifndef CONFELL_LINALG_HPP
#define CONFELL_LINALG_HPP

// Exact rank of sparse integer matrices: modular elimination with
// sparsity-aware pivoting, a multi-prime consensus wrapper, and a
// fraction-free rational oracle for small instances.

#include <algorithm>
#include <cstdint>
#include <utility>
#include <vector>

#include "confell/common.hpp"

namespace confell {

// Column-major sparse matrix with 64-bit integer entries.
struct sparse_int_matrix {
  std::int64_t n_rows = 0;
  std::int64_t n_cols = 0;
  std::vector<std::vector<std::pair<std::uint32_t, std::int64_t>>> cols;

  sparse_int_matrix() = default;
  sparse_int_matrix(std::int64_t rows, std::int64_t columns)
      : n_rows(rows), n_cols(columns), cols(static_cast<std::size_t>(columns)) {}

  void add_entry(std::int64_t row, std::int64_t col, std::int64_t value) {
    if (value == 0) return;
    cols[static_cast<std::size_t>(col)].emplace_back(static_cast<std::uint32_t>(row), value);
  }

  std::size_t nnz() const {
    std::size_t total = 0;
    for (const auto& c : cols) total += c.size();
    return total;
  }

  sparse_int_matrix transposed() const {
    sparse_int_matrix t(n_cols, n_rows);
    for (std::int64_t j = 0; j < n_cols; ++j)
      for (const auto& [i, v] : cols[static_cast<std::size_t>(j)])
        t.add_entry(j, i, v);
    return t;
  }
};

namespace detail {

inline std::uint32_t pow_mod(std::uint32_t base, std::uint64_t exp, std::uint32_t p) {
  std::uint64_t result = 1, b = base % p;
  while (exp) {
    if (exp & 1) result = result * b % p;
    b = b * b % p;
    exp >>= 1;
  }
  return static_cast<std::uint32_t>(result);
}

inline std::uint32_t inv_mod(std::uint32_t a, std::uint32_t p) {
  return pow_mod(a, p - 2, p);
}

// Barrett reduction for a fixed modulus: two multiplications instead of a
// hardware divide.  Valid for any x < 2^64; the estimate floor(x*m / 2^64)
// with m = floor(2^64 / p) is off by at most one, so a single conditional
// subtract lands in [0, p).
struct barrett {
  std::uint64_t p, m;
  explicit barrett(std::uint64_t prime)
      : p(prime),
        m(static_cast<std::uint64_t>((static_cast<unsigned __int128>(1) << 64) / prime)) {}
  std::uint64_t reduce(std::uint64_t x) const {
    const std::uint64_t q =
        static_cast<std::uint64_t>(static_cast<unsigned __int128>(x) * m >> 64);
    std::uint64_t r = x - q * p;
    if (r >= p) r -= p;
    return r;
  }
};

// Dense elimination used once the active submatrix is small or has filled in.
inline std::int64_t dense_rank_mod_p(std::vector<std::vector<std::uint32_t>>& m,
                                     std::uint32_t p) {
  const std::size_t rows = m.size();
  if (rows == 0) return 0;
  const std::size_t cols = m[0].size();
  const barrett red(p);
  std::int64_t rank = 0;
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t piv = r;
    while (piv < rows && m[piv][c] == 0) ++piv;
    if (piv == rows) continue;
    std::swap(m[r], m[piv]);
    const std::uint64_t inv = inv_mod(m[r][c], p);
    const std::uint64_t pf = static_cast<std::uint64_t>(p) * p;  // keeps subtraction positive
    for (std::size_t i = r + 1; i < rows; ++i) {
      if (m[i][c] == 0) continue;
      const std::uint64_t f = red.reduce(m[i][c] * inv);
      for (std::size_t k = c; k < cols; ++k)
        m[i][k] = static_cast<std::uint32_t>(red.reduce(m[i][k] + pf - f * m[r][k]));
    }
    ++rank;
    ++r;
  }
  return rank;
}

}  // namespace detail

// Rank over GF(p).  Pivots are chosen to limit fill-in: the sparsest active
// column, then the sparsest row within it.  Falls back to dense elimination
// once the active submatrix is small enough for it to be the faster path.
inline std::int64_t rank_mod_p(const sparse_int_matrix& a, std::uint32_t p) {
  if (p <= (1u << 20)) throw input_error("rank_mod_p: prime must exceed 2^20");
  const std::size_t nr = static_cast<std::size_t>(a.n_rows);
  const std::size_t nc = static_cast<std::size_t>(a.n_cols);
  if (nr == 0 || nc == 0 || a.nnz() == 0) return 0;

  // row-major working copy mod p; repeated (row, col) entries accumulate
  std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> rows(nr);
  for (std::size_t j = 0; j < nc; ++j)
    for (const auto& [i, v] : a.cols[j]) {
      std::int64_t m = v % static_cast<std::int64_t>(p);
      if (m < 0) m += p;
      rows[i].emplace_back(static_cast<std::uint32_t>(j), static_cast<std::uint32_t>(m));
    }
  for (auto& r : rows) {
    std::sort(r.begin(), r.end());
    std::size_t w = 0;
    for (std::size_t k = 0; k < r.size();) {
      std::uint64_t s = 0;
      const std::uint32_t c = r[k].first;
      for (; k < r.size() && r[k].first == c; ++k) s = (s + r[k].second) % p;
      if (s != 0) r[w++] = {c, static_cast<std::uint32_t>(s)};
    }
    r.resize(w);
  }

  std::vector<std::uint32_t> col_count(nc, 0);
  std::vector<std::vector<std::uint32_t>> col_rows(nc);  // may hold stale row ids
  std::size_t active_rows = 0;
  std::size_t live_nnz = 0;
  for (std::size_t i = 0; i < nr; ++i) {
    if (rows[i].empty()) continue;
    ++active_rows;
    live_nnz += rows[i].size();
    for (const auto& [c, v] : rows[i]) {
      ++col_count[c];
      col_rows[c].push_back(static_cast<std::uint32_t>(i));
    }
  }
  std::vector<char> row_live(nr, 1), col_live(nc, 1);

  // bucket queues over column occupancy and row length; stale entries are
  // skipped (or reinserted at their current size) on pop
  std::size_t max_bucket = 8;
  std::vector<std::vector<std::uint32_t>> buckets(max_bucket + 1);
  std::vector<std::vector<std::uint32_t>> rbuckets(max_bucket + 1);
  auto push_col = [&](std::uint32_t c) {
    std::size_t k = col_count[c];
    if (k == 0) return;
    if (k >= max_bucket) k = max_bucket;
    buckets[k].push_back(c);
  };
  auto push_row = [&](std::uint32_t r) {
    std::size_t k = rows[r].size();
    if (k == 0) return;
    if (k >= max_bucket) k = max_bucket;
    rbuckets[k].push_back(r);
  };
  std::size_t active_cols = 0;
  for (std::size_t c = 0; c < nc; ++c) {
    if (col_count[c] == 0) {
      col_live[c] = 0;
      continue;
    }
    ++active_cols;
    push_col(static_cast<std::uint32_t>(c));
  }
  for (std::size_t i = 0; i < nr; ++i)
    if (!rows[i].empty()) push_row(static_cast<std::uint32_t>(i));

  std::int64_t rank = 0;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> merged;
  const detail::barrett red(p);
  // switch to dense elimination when the active area is small, or earlier
  // when fill-in has pushed the density past the point where the sparse
  // bookkeeping only adds overhead
  constexpr std::size_t kDenseLimit = 512 * 512;
  constexpr std::size_t kDenseCap = 8192 * 8192;

  // A row id may occur twice in a col_rows list (entry cancelled, then
  // recreated by fill-in), so the cleaning pass must deduplicate or the
  // elimination would process the row twice.
  std::vector<std::uint32_t> seen_epoch(nr, 0);
  std::uint32_t epoch = 0;

  auto find_col = [&](std::size_t r, std::uint32_t c) {
    auto& row = rows[r];
    auto it = std::lower_bound(row.begin(), row.end(), std::pair<std::uint32_t, std::uint32_t>{c, 0});
    return it != row.end() && it->first == c ? it : row.end();
  };

  while (active_rows > 0 && active_cols > 0) {
    const std::size_t area = active_rows * active_cols;
    if (area <= kDenseLimit || (area <= kDenseCap && live_nnz >= area / 16)) {
      // gather the active submatrix densely and finish there
      std::vector<std::uint32_t> col_of(nc, 0);
      std::uint32_t k = 0;
      for (std::size_t c = 0; c < nc; ++c)
        if (col_live[c]) col_of[c] = k++;
      std::vector<std::vector<std::uint32_t>> dense;
      dense.reserve(active_rows);
      for (std::size_t i = 0; i < nr; ++i) {
        if (!row_live[i] || rows[i].empty()) continue;
        std::vector<std::uint32_t> d(active_cols, 0);
        for (const auto& [c, v] : rows[i])
          if (col_live[c]) d[col_of[c]] = v;
        dense.push_back(std::move(d));
      }
      rank += detail::dense_rank_mod_p(dense, p);
      return rank;
    }

    // compacts a column's row list (dropping dead and stale duplicate ids)
    // and reports the shortest row in it
    auto clean_col = [&](std::uint32_t c, std::size_t& best_r, std::size_t& best_len) {
      auto& list = col_rows[c];
      ++epoch;
      std::size_t kept = 0;
      best_r = SIZE_MAX;
      best_len = SIZE_MAX;
      for (std::size_t idx = 0; idx < list.size(); ++idx) {
        std::uint32_t r = list[idx];
        if (!row_live[r] || seen_epoch[r] == epoch) continue;
        if (find_col(r, c) == rows[r].end()) continue;
        seen_epoch[r] = epoch;
        list[kept++] = r;
        if (rows[r].size() < best_len) {
          best_len = rows[r].size();
          best_r = r;
        }
      }
      list.resize(kept);
      return kept;
    };

    // pop the sparsest live column
    std::uint32_t ccol = 0;
    bool col_found = false;
    for (std::size_t k = 1; k <= max_bucket && !col_found; ++k) {
      auto& b = buckets[k];
      while (!b.empty()) {
        std::uint32_t c = b.back();
        b.pop_back();
        if (!col_live[c] || col_count[c] == 0) continue;
        std::size_t cnt = col_count[c];
        if ((cnt >= max_bucket ? max_bucket : cnt) != k) {
          push_col(c);  // stale entry; reinsert at its current bucket
          continue;
        }
        ccol = c;
        col_found = true;
        break;
      }
    }
    if (!col_found) break;  // only empty columns remain

    // pop the shortest live row
    std::uint32_t crow = 0;
    bool row_found = false;
    for (std::size_t k = 1; k <= max_bucket && !row_found; ++k) {
      auto& b = rbuckets[k];
      while (!b.empty()) {
        std::uint32_t r = b.back();
        b.pop_back();
        if (!row_live[r] || rows[r].empty()) continue;
        std::size_t len = rows[r].size();
        if ((len >= max_bucket ? max_bucket : len) != k) {
          push_row(r);
          continue;
        }
        crow = r;
        row_found = true;
        break;
      }
    }

    std::size_t best, best_nnz;
    std::size_t w = clean_col(ccol, best, best_nnz);
    if (w == 0) {
      col_count[ccol] = 0;
      col_live[ccol] = 0;
      --active_cols;
      if (row_found) push_row(crow);
      continue;
    }

    // Markowitz-style choice: eliminate through the candidate whose update
    // touches the smaller (rows-1) x (entries-1) area
    std::uint32_t pivot_col = ccol;
    std::size_t pr = best;
    if (row_found) {
      std::uint32_t c2 = 0;
      std::size_t bc = SIZE_MAX;
      for (const auto& [c, v] : rows[crow])
        if (col_count[c] < bc) {
          bc = col_count[c];
          c2 = c;
        }
      const std::size_t cost_col = (w - 1) * (best_nnz - 1);
      const std::size_t cost_row = (rows[crow].size() - 1) * (bc - 1);
      if (cost_row < cost_col && c2 != ccol) {
        pivot_col = c2;
        pr = crow;
        push_col(ccol);
        clean_col(c2, best, best_nnz);
      } else {
        push_row(crow);
      }
    }

    auto& cr = col_rows[pivot_col];
    const std::uint32_t pv = find_col(pr, pivot_col)->second;
    const std::uint64_t pv_inv = detail::inv_mod(pv, p);
    ++rank;

    // retire pivot row and column
    row_live[pr] = 0;
    --active_rows;
    col_live[pivot_col] = 0;
    --active_cols;
    for (const auto& [c, v] : rows[pr])
      if (col_live[c]) --col_count[c];
    col_count[pivot_col] = 0;

    // eliminate the pivot column from the remaining rows
    const auto pivot_row_data = std::move(rows[pr]);
    live_nnz -= pivot_row_data.size();
    for (std::uint32_t r : cr) {
      if (r == pr || !row_live[r]) continue;
      const auto pivot_it = find_col(r, pivot_col);
      if (pivot_it == rows[r].end()) continue;
      const std::uint64_t f = red.reduce(pivot_it->second * pv_inv);
      merged.clear();
      auto& row = rows[r];
      std::size_t ia = 0, ib = 0;
      const std::uint64_t pf = static_cast<std::uint64_t>(p) * p;
      while (ia < row.size() || ib < pivot_row_data.size()) {
        std::uint32_t ca = ia < row.size() ? row[ia].first : UINT32_MAX;
        std::uint32_t cb = ib < pivot_row_data.size() ? pivot_row_data[ib].first : UINT32_MAX;
        if (ca < cb) {
          merged.push_back(row[ia++]);
        } else if (cb < ca) {
          // fill-in
          std::uint32_t nv = static_cast<std::uint32_t>(red.reduce(pf - f * pivot_row_data[ib].second));
          if (nv != 0 && col_live[cb]) {
            merged.emplace_back(cb, nv);
            ++col_count[cb];
            col_rows[cb].push_back(r);
            if (col_count[cb] <= max_bucket) push_col(cb);  // bucket changed
          }
          ++ib;
        } else {
          std::uint32_t nv = static_cast<std::uint32_t>(red.reduce(row[ia].second + pf - f * pivot_row_data[ib].second));
          if (nv != 0) {
            merged.emplace_back(ca, nv);
          } else if (col_live[ca]) {
            --col_count[ca];
          }
          ++ia;
          ++ib;
        }
      }
      const std::size_t old_len = row.size();
      live_nnz -= old_len;
      row.swap(merged);
      live_nnz += row.size();
      if (row.empty()) {
        row_live[r] = 0;
        --active_rows;
      } else {
        const std::size_t ob = old_len >= max_bucket ? max_bucket : old_len;
        const std::size_t nb = row.size() >= max_bucket ? max_bucket : row.size();
        if (nb != ob) push_row(r);
      }
    }
  }
  return rank;
}

struct rank_certificate {
  std::int64_t rank = 0;
  std::vector<std::uint32_t> primes;  // primes actually evaluated, in order
  bool agreed = false;
  int discrepancies = 0;  // primes whose local rank differs from the final value
};

inline const std::vector<std::uint32_t>& default_rank_primes() {
  static const std::vector<std::uint32_t> primes = {2147483629u, 2147483647u};
  return primes;
}

inline const std::vector<std::uint32_t>& reserve_rank_primes() {
  static const std::vector<std::uint32_t> primes = {2147483587u, 2147483579u, 2147483563u,
                                                    2147483549u, 2147483543u, 2147483497u};
  return primes;
}

// Modular rank at independent primes until two of them agree.  An unlucky
// prime can underestimate the rank (it divides some minor), so a single
// evaluation is never trusted.
inline rank_certificate rank(const sparse_int_matrix& a,
                             std::vector<std::uint32_t> primes = default_rank_primes()) {
  if (primes.size() < 2) {
    primes = default_rank_primes();
  }
  rank_certificate cert;
  std::vector<std::int64_t> ranks;
  auto evaluate = [&](std::uint32_t p) {
    cert.primes.push_back(p);
    ranks.push_back(rank_mod_p(a, p));
  };
  evaluate(primes[0]);
  evaluate(primes[1]);
  std::size_t next_given = 2;
  std::size_t next_reserve = 0;
  auto consensus = [&]() -> std::int64_t {
    for (std::size_t i = 0; i < ranks.size(); ++i)
      for (std::size_t j = i + 1; j < ranks.size(); ++j)
        if (ranks[i] == ranks[j]) return ranks[i];
    return -1;
  };
  std::int64_t agreed_rank = consensus();
  while (agreed_rank < 0) {
    std::uint32_t p;
    if (next_given < primes.size()) {
      p = primes[next_given++];
    } else if (next_reserve < reserve_rank_primes().size()) {
      p = reserve_rank_primes()[next_reserve++];
    } else {
      break;
    }
    evaluate(p);
    agreed_rank = consensus();
  }
  if (agreed_rank >= 0) {
    cert.agreed = true;
    cert.rank = agreed_rank;
  } else {
    // no two primes agreed (practically unreachable); report the best upper bound
    cert.agreed = false;
    cert.rank = *std::max_element(ranks.begin(), ranks.end());
  }
  for (std::int64_t r : ranks)
    if (r != cert.rank) ++cert.discrepancies;
  return cert;
}

// Fraction-free Gaussian elimination over the integers (exact).  Guarded:
// the dense working copy is only reasonable for small matrices.
inline std::int64_t rational_rank(const sparse_int_matrix& a) {
  if (a.n_rows * a.n_cols > 4000000)
    throw infeasible_error("rational_rank: matrix exceeds 4e6 entries");
  const std::size_t nr = static_cast<std::size_t>(a.n_rows);
  const std::size_t nc = static_cast<std::size_t>(a.n_cols);
  if (nr == 0 || nc == 0) return 0;
  std::vector<std::vector<bigint>> m(nr, std::vector<bigint>(nc, 0));
  for (std::size_t j = 0; j < nc; ++j)
    for (const auto& [i, v] : a.cols[j]) m[i][j] += v;

  bigint prev(1);
  std::size_t r = 0;
  std::int64_t rank = 0;
  for (std::size_t step = 0; r < nr && step < nc; ++step) {
    // full pivot search in the active submatrix, preferring small entries
    std::size_t pi = SIZE_MAX, pj = SIZE_MAX;
    bigint best;
    for (std::size_t i = r; i < nr; ++i)
      for (std::size_t j = step; j < nc; ++j) {
        if (m[i][j] == 0) continue;
        bigint mag = abs(m[i][j]);
        if (pi == SIZE_MAX || mag < best) {
          best = mag;
          pi = i;
          pj = j;
        }
      }
    if (pi == SIZE_MAX) break;
    std::swap(m[r], m[pi]);
    for (std::size_t i = 0; i < nr; ++i) std::swap(m[i][step], m[i][pj]);
    for (std::size_t i = r + 1; i < nr; ++i) {
      for (std::size_t j = step + 1; j < nc; ++j)
        m[i][j] = (m[i][j] * m[r][step] - m[i][step] * m[r][j]) / prev;
      m[i][step] = 0;
    }
    prev = m[r][step];
    ++rank;
    ++r;
  }
  return rank;
}

}  // namespace confell

#endif

#ifndef CONFELL_RING_HPP
#define CONFELL_RING_HPP

// Graded-commutative coefficient rings presented by a finite basis with an
// explicit multiplication table, plus the class of the diagonal that drives
// the differential of the arrangement model.

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "confell/common.hpp"

namespace confell {

struct ring_presentation {
  std::vector<std::string> names;
  std::vector<int> degrees;
  std::vector<int> weights;  // torus weights; all zero unless the input sets them
  int unit = -1;
  int fundamental = -1;
  int top_degree = 0;
  // row-major dim*dim table; entry (i,j) lists (basis index, coefficient) pairs
  std::vector<std::vector<std::pair<int, rat>>> table;

  int dim() const { return static_cast<int>(names.size()); }

  const std::vector<std::pair<int, rat>>& product(int i, int j) const {
    return table[static_cast<std::size_t>(i) * names.size() + j];
  }

  std::vector<std::pair<int, rat>>& product(int i, int j) {
    return table[static_cast<std::size_t>(i) * names.size() + j];
  }

  int index_of(const std::string& name) const {
    for (int i = 0; i < dim(); ++i)
      if (names[i] == name) return i;
    throw input_error("ring: unknown basis element '" + name + "'");
  }

  bool odd(int i) const { return degrees[i] % 2 != 0; }
};

inline int euler_characteristic(const ring_presentation& ring) {
  int chi = 0;
  for (int d : ring.degrees) chi += (d % 2 == 0) ? 1 : -1;
  return chi;
}

namespace detail {

// Solves A*x = rhs over the rationals; returns empty vector when A is singular.
inline std::vector<rat> solve_linear(std::vector<std::vector<rat>> a,
                                     std::vector<rat> rhs) {
  const int n = static_cast<int>(a.size());
  std::vector<int> perm(n);
  for (int c = 0; c < n; ++c) {
    int piv = -1;
    for (int r = c; r < n; ++r)
      if (a[r][c] != 0) {
        piv = r;
        break;
      }
    if (piv < 0) return {};
    std::swap(a[c], a[piv]);
    std::swap(rhs[c], rhs[piv]);
    for (int r = 0; r < n; ++r) {
      if (r == c || a[r][c] == 0) continue;
      rat f = a[r][c] / a[c][c];
      for (int k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      rhs[r] -= f * rhs[c];
    }
  }
  std::vector<rat> x(n);
  for (int i = 0; i < n; ++i) x[i] = rhs[i] / a[i][i];
  return x;
}

// Poincare pairing matrix: coefficient of the fundamental class in b_i * b_j.
inline std::vector<std::vector<rat>> pairing_matrix(const ring_presentation& ring) {
  const int d = ring.dim();
  std::vector<std::vector<rat>> p(d, std::vector<rat>(d, rat(0)));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (const auto& [k, c] : ring.product(i, j))
        if (k == ring.fundamental) p[i][j] += c;
  return p;
}

}  // namespace detail

// Fills products implied by the unit and by graded commutativity, then checks
// the axioms.  Throws input_error naming the first axiom that fails.
inline void validate_ring(ring_presentation& ring) {
  const int d = ring.dim();
  if (d == 0) throw input_error("ring: empty basis");
  if (ring.weights.empty()) ring.weights.assign(d, 0);
  {
    std::map<std::string, int> seen;
    for (int i = 0; i < d; ++i)
      if (!seen.emplace(ring.names[i], i).second)
        throw input_error("ring: duplicate basis name '" + ring.names[i] + "'");
  }
  if (ring.unit < 0 || ring.unit >= d || ring.fundamental < 0 || ring.fundamental >= d)
    throw input_error("ring: unit/fundamental not in basis");
  if (ring.degrees[ring.unit] != 0)
    throw input_error("ring: unit must have degree 0");
  ring.top_degree = *std::max_element(ring.degrees.begin(), ring.degrees.end());
  if (ring.degrees[ring.fundamental] != ring.top_degree)
    throw input_error("ring: fundamental class is not of top degree");
  for (int i = 0; i < d; ++i) {
    if (ring.degrees[i] < 0) throw input_error("ring: negative degree");
    if (i != ring.unit && ring.degrees[i] == 0)
      throw input_error("ring: wrong dimension in degree 0 (not connected)");
    if (i != ring.fundamental && ring.degrees[i] == ring.top_degree)
      throw input_error("ring: wrong top dimension (H^top must be spanned by the fundamental class)");
  }

  auto drop_zeros = [](std::vector<std::pair<int, rat>>& terms) {
    std::erase_if(terms, [](const auto& t) { return t.second == 0; });
  };
  for (auto& terms : ring.table) drop_zeros(terms);

  // unit rules
  for (int i = 0; i < d; ++i) {
    for (auto [a, b] : {std::pair{ring.unit, i}, std::pair{i, ring.unit}}) {
      auto& terms = ring.product(a, b);
      if (terms.empty())
        terms = {{i, rat(1)}};
      else if (terms.size() != 1 || terms[0].first != i || terms[0].second != 1)
        throw input_error("ring: unit does not act as identity on '" + ring.names[i] + "'");
    }
  }

  auto normalized = [&](int i, int j) {
    std::map<int, rat> acc;
    for (const auto& [k, c] : ring.product(i, j)) acc[k] += c;
    std::vector<std::pair<int, rat>> out;
    for (const auto& [k, c] : acc)
      if (c != 0) out.emplace_back(k, c);
    return out;
  };
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) ring.product(i, j) = normalized(i, j);

  // graded commutativity: fill omitted mirror products, check present ones
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) {
      const rat sign = (ring.odd(i) && ring.odd(j)) ? rat(-1) : rat(1);
      auto mirror = [&](const std::vector<std::pair<int, rat>>& t) {
        auto m = t;
        for (auto& [k, c] : m) c *= sign;
        return m;
      };
      auto& ij = ring.product(i, j);
      auto& ji = ring.product(j, i);
      if (i == j) {
        if (sign < 0 && !ij.empty())
          throw input_error("ring: odd element '" + ring.names[i] + "' has nonzero square");
        continue;
      }
      if (ij.empty() && !ji.empty())
        ij = mirror(ji);
      else if (ji.empty() && !ij.empty())
        ji = mirror(ij);
      else if (mirror(ij) != ji)
        throw input_error("ring: graded commutativity fails on (" + ring.names[i] +
                          ", " + ring.names[j] + ")");
    }
  }

  // homogeneity of degrees and weights
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (const auto& [k, c] : ring.product(i, j)) {
        if (ring.degrees[k] != ring.degrees[i] + ring.degrees[j])
          throw input_error("ring: product (" + ring.names[i] + ", " + ring.names[j] +
                            ") is not degree-homogeneous");
        if (ring.weights[k] != ring.weights[i] + ring.weights[j])
          throw input_error("ring: product (" + ring.names[i] + ", " + ring.names[j] +
                            ") is not weight-homogeneous");
      }
  // a nonzero weight on the fundamental class would make the diagonal class
  // inhomogeneous, so weight splitting would not commute with the differential
  if (std::any_of(ring.weights.begin(), ring.weights.end(), [](int w) { return w != 0; }) &&
      ring.weights[ring.fundamental] != 0)
    throw input_error("ring: fundamental class must have weight 0");

  // associativity
  auto mul_into = [&](int i, int j, const rat& c, std::map<int, rat>& acc) {
    for (const auto& [k, ck] : ring.product(i, j)) acc[k] += c * ck;
  };
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k) {
        std::map<int, rat> lhs, rhs;
        for (const auto& [m, c] : ring.product(i, j)) mul_into(m, k, c, lhs);
        for (const auto& [m, c] : ring.product(j, k)) mul_into(i, m, c, rhs);
        for (const auto& [m, c] : rhs) lhs[m] -= c;
        for (const auto& [m, c] : lhs)
          if (c != 0)
            throw input_error("ring: non-associative triple (" + ring.names[i] + ", " +
                              ring.names[j] + ", " + ring.names[k] + ")");
      }

  // nondegenerate pairing
  auto p = detail::pairing_matrix(ring);
  std::vector<rat> e(d, rat(0));
  e[ring.unit] = 1;
  if (detail::solve_linear(p, e).empty())
    throw input_error("ring: degenerate Poincare pairing");
}

// H^*(elliptic curve): basis 1, x, y, xy with x*y = xy and torus weights +1/-1.
inline ring_presentation elliptic_curve_ring() {
  ring_presentation r;
  r.names = {"1", "x", "y", "xy"};
  r.degrees = {0, 1, 1, 2};
  r.weights = {0, 1, -1, 0};
  r.unit = 0;
  r.fundamental = 3;
  r.table.assign(16, {});
  r.product(1, 2) = {{3, rat(1)}};
  validate_ring(r);
  return r;
}

inline ring_presentation load_ring(const nlohmann::json& doc) {
  ring_presentation r;
  if (!doc.contains("basis") || !doc["basis"].is_array())
    throw input_error("ring file: missing 'basis' array");
  for (const auto& b : doc["basis"]) {
    r.names.push_back(b.at("name").get<std::string>());
    r.degrees.push_back(b.at("degree").get<int>());
    r.weights.push_back(b.contains("weight") ? b["weight"].get<int>() : 0);
  }
  const int d = r.dim();
  r.table.assign(static_cast<std::size_t>(d) * d, {});
  auto index = [&](const std::string& name) {
    for (int i = 0; i < d; ++i)
      if (r.names[i] == name) return i;
    throw input_error("ring file: unknown basis element '" + name + "'");
  };
  r.unit = index(doc.at("unit").get<std::string>());
  r.fundamental = index(doc.at("fundamental").get<std::string>());
  auto parse_coeff = [](const nlohmann::json& c) {
    if (c.is_number_integer()) return rat(c.get<long long>());
    if (c.is_string()) {
      try {
        return rat(c.get<std::string>());
      } catch (const std::exception&) {
        throw input_error("ring file: bad coefficient '" + c.get<std::string>() + "'");
      }
    }
    throw input_error("ring file: coefficient must be integer or 'p/q' string");
  };
  if (doc.contains("mult")) {
    for (const auto& m : doc["mult"]) {
      int i = index(m.at("l").get<std::string>());
      int j = index(m.at("r").get<std::string>());
      std::vector<std::pair<int, rat>> terms;
      for (const auto& t : m.at("out")) {
        if (!t.is_array() || t.size() != 2)
          throw input_error("ring file: 'out' entries must be [name, coeff] pairs");
        terms.emplace_back(index(t[0].get<std::string>()), parse_coeff(t[1]));
      }
      if (!r.product(i, j).empty())
        throw input_error("ring file: duplicate product (" + r.names[i] + ", " +
                          r.names[j] + ")");
      r.product(i, j) = std::move(terms);
    }
  }
  validate_ring(r);
  return r;
}

inline ring_presentation load_ring(std::istream& in) {
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const std::exception& e) {
    throw input_error(std::string("ring file: JSON parse error: ") + e.what());
  }
  return load_ring(doc);
}

inline ring_presentation load_ring_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("ring file: cannot open '" + path + "'");
  return load_ring(in);
}

// One term b_left (x) b_right of the diagonal class, with its coefficient.
struct diagonal_term {
  int left;
  int right;
  rat coeff;
};

struct diagonal_class {
  std::vector<diagonal_term> terms;
  // terms with both factors in strictly positive degree below the top; these
  // are the only ones that never touch the support of a configuration
  std::vector<diagonal_term> graded_terms;
};

// Diagonal class sum_j (-1)^{deg b_j^*} b_j (x) b_j^* expanded in the basis;
// the dual basis comes from inverting the Poincare pairing.
inline diagonal_class diagonal(const ring_presentation& ring) {
  const int d = ring.dim();
  auto p = detail::pairing_matrix(ring);
  diagonal_class dc;
  for (int j = 0; j < d; ++j) {
    std::vector<rat> e(d, rat(0));
    e[j] = 1;
    auto dual = detail::solve_linear(p, e);
    if (dual.empty()) throw input_error("ring: degenerate Poincare pairing");
    const int dual_deg = ring.top_degree - ring.degrees[j];
    const rat sign = (dual_deg % 2 != 0) ? rat(-1) : rat(1);
    for (int k = 0; k < d; ++k)
      if (dual[k] != 0) dc.terms.push_back({j, k, sign * dual[k]});
  }
  for (const auto& t : dc.terms) {
    auto interior = [&](int i) { return i != ring.unit && i != ring.fundamental; };
    if (interior(t.left) && interior(t.right)) dc.graded_terms.push_back(t);
  }
  return dc;
}

}  // namespace confell

#endif

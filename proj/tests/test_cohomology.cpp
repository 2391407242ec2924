#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "confell/cohomology.hpp"

using namespace confell;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string golden(const std::string& name) {
  return std::string(CONFELL_GOLDEN_DIR) + "/" + name;
}

bigraded_table make_table(int n, const std::string& mode,
                          std::initializer_list<std::tuple<int, int, std::int64_t>> xs) {
  bigraded_table t;
  t.n = n;
  t.mode = mode;
  for (auto [p, q, v] : xs) t.set(p, q, v);
  return t;
}

}  // namespace

TEST_CASE("circle-factor deconvolution") {
  SECTION("strips (1+t)^2 row by row") {
    // (1 + 2t)(1 + t)^2 = 1 + 4t + 5t^2 + 2t^3
    auto t = make_table(3, "full", {{0, 0, 1}, {1, 0, 4}, {2, 0, 5}, {3, 0, 2}});
    auto d = deconvolve_by_C(t);
    REQUIRE(d.mode == "full/C");
    REQUIRE(d.at(0, 0) == 1);
    REQUIRE(d.at(1, 0) == 2);
    REQUIRE(d.at(2, 0) == 0);
    REQUIRE(d.at(3, 0) == 0);
  }
  SECTION("constant rows divide exactly") {
    auto t = make_table(2, "full", {{0, 1, 1}, {1, 1, 2}, {2, 1, 1}});
    auto d = deconvolve_by_C(t);
    REQUIRE(d.at(0, 1) == 1);
    REQUIRE(d.at(1, 1) == 0);
  }
  SECTION("rows that are not multiples of (1+t)^2 are rejected") {
    auto t = make_table(2, "full", {{0, 0, 1}, {1, 0, 1}});
    REQUIRE_THROWS_AS(deconvolve_by_C(t), verification_error);
  }
  SECTION("negative quotient entries are rejected") {
    auto t = make_table(3, "full", {{0, 0, 1}, {1, 0, 1}, {2, 0, 1}, {3, 0, 1}});
    REQUIRE_THROWS_AS(deconvolve_by_C(t), verification_error);
  }
  SECTION("rows below qmin are dropped") {
    auto t = make_table(3, "graded", {{0, 0, 7}, {0, 1, 1}, {1, 1, 2}, {2, 1, 1}});
    auto d = deconvolve_by_C(t, 1);  // the q = 0 row (odd polynomial) is skipped
    REQUIRE(d.at(0, 0) == 0);
    REQUIRE(d.at(0, 1) == 1);
    REQUIRE(d.mode == "graded/C");
  }
}

TEST_CASE("binomial polynomial fitting") {
  SECTION("fits exact binomial combinations") {
    std::map<int, std::int64_t> vals;
    for (int n = 0; n <= 6; ++n) vals[n] = 2 * n;
    auto f = fit_binomial(vals, 3);
    REQUIRE(f.coeffs == std::map<int, std::int64_t>{{1, 2}});

    vals.clear();
    for (int n = 0; n <= 5; ++n) vals[n] = 1 + 3 * binomial(n, 2);
    f = fit_binomial(vals, 4);
    REQUIRE(f.coeffs == std::map<int, std::int64_t>{{0, 1}, {2, 3}});
    for (int n = 0; n <= 9; ++n) REQUIRE(f.eval(n) == 1 + 3 * binomial(n, 2));
  }
  SECTION("rejects gaps and short coverage") {
    REQUIRE_THROWS_AS(fit_binomial({{0, 1}, {2, 3}}, 1), input_error);
    REQUIRE_THROWS_AS(fit_binomial({{1, 1}, {2, 3}}, 1), input_error);
  }
  SECTION("rejects values above the degree bound") {
    std::map<int, std::int64_t> vals;
    for (int n = 0; n <= 5; ++n) vals[n] = binomial(n, 3);
    REQUIRE_THROWS_AS(fit_binomial(vals, 2), input_error);
  }
  SECTION("prints like a polynomial in binomials") {
    binomial_polynomial f;
    f.coeffs = {{8, 63}, {7, 427}, {4, 18}};
    REQUIRE(f.to_string() == "63*C(n,8) + 427*C(n,7) + 18*C(n,4)");
    f.coeffs = {{1, 2}, {0, 1}};
    REQUIRE(f.to_string() == "2*n + 1");
    f.coeffs = {{3, 1}, {2, -5}};
    REQUIRE(f.to_string() == "C(n,3) - 5*C(n,2)");
    f.coeffs = {};
    REQUIRE(f.to_string() == "0");
  }
}

TEST_CASE("table layouts and exports") {
  auto t = make_table(3, "full", {{0, 0, 1}, {1, 0, 2}, {0, 1, 3}, {2, 1, 7}});
  SECTION("triangle clips to p <= n-1-q and keeps the q = 0 row") {
    REQUIRE(table_csv(t, table_layout::triangle) == "2,0\n1,3,0\n0,1,2,0\n");
  }
  SECTION("rectangle keeps every computed column") {
    REQUIRE(table_csv(t, table_layout::rectangle) == "2,0,0,0\n1,3,0,7\n0,1,2,0\n");
  }
  SECTION("graded tables start at q = 1 in triangle layout") {
    auto g = make_table(3, "graded/C", {{0, 1, 4}, {1, 1, 5}});
    REQUIRE(table_csv(g, table_layout::triangle) == "2,0\n1,4,5\n");
  }
  SECTION("markdown and json mirror the csv") {
    auto md = table_markdown(t, table_layout::rectangle);
    REQUIRE(md.find("| q\\p |") == 0);
    REQUIRE(md.find("| 1 | 3 | 0 | 7 |") != std::string::npos);
    auto js = table_json(t, table_layout::rectangle);
    REQUIRE(js["n"] == 3);
    REQUIRE(js["rows"][0]["q"] == 2);
    REQUIRE(js["rows"][2]["dims"] == nlohmann::json::array({1, 2, 0}));
  }
}

TEST_CASE("engine reproduces the small quotient tables") {
  engine_options opt;
  opt.mirror_weights = true;
  engine eng(elliptic_curve_ring(), "elliptic", opt);
  for (int n = 2; n <= 5; ++n) {
    auto full = eng.cohom_dims(n);
    auto csv = table_csv(deconvolve_by_C(full), table_layout::triangle);
    REQUIRE(csv == slurp(golden("quotient_n" + std::to_string(n) + ".csv")));
  }
}

TEST_CASE("engine reproduces the small coefficient tables") {
  engine_options opt;
  opt.mirror_weights = true;
  engine eng(elliptic_curve_ring(), "elliptic", opt);

  // quotient-complex coefficients, q >= 1, from an independent prototype
  const std::map<int, std::map<std::pair<int, int>, std::int64_t>> expected = {
      {3, {{{1, 1}, 2}, {{2, 1}, 4}, {{3, 1}, 2}}},
      {4, {{{1, 2}, 4}, {{2, 1}, 10}, {{2, 2}, 8}, {{3, 1}, 20}, {{3, 2}, 4}, {{4, 1}, 10}}},
      {5,
       {{{1, 3}, 12},
        {{2, 2}, 38},
        {{2, 3}, 24},
        {{3, 1}, 24},
        {{3, 2}, 76},
        {{3, 3}, 12},
        {{4, 1}, 48},
        {{4, 2}, 38},
        {{5, 1}, 24}}}};

  for (int r = 3; r <= 5; ++r) {
    auto g = eng.graded_coefficients(r);
    for (const auto& [pq, v] : expected.at(r)) REQUIRE(g.at(pq.first, pq.second) == v);
    for (const auto& [pq, v] : g.dims)
      if (pq.second >= 1 && v != 0) REQUIRE(expected.at(r).count(pq) == 1);
    auto primed = deconvolve_by_C(g, 1);
    REQUIRE(table_csv(primed, table_layout::triangle) ==
            slurp(golden("graded_quotient_r" + std::to_string(r) + ".csv")));
  }
}

TEST_CASE("pieces aggregate their weight subcomplexes") {
  engine eng(elliptic_curve_ring(), "elliptic");
  for (auto [p, q] : {std::pair{2, 1}, {1, 1}, {3, 2}}) {
    auto whole = eng.piece(diff_mode::full, 4, p, q);
    std::int64_t dim = 0, cohom = 0;
    for (int w = -8; w <= 8; ++w) {
      auto pw = eng.piece_weight(diff_mode::full, 4, p, q, w);
      dim += pw.dim;
      cohom += pw.cohom();
    }
    REQUIRE(dim == whole.dim);
    REQUIRE(cohom == whole.cohom());
  }
}

TEST_CASE("cohomology is symmetric under weight negation") {
  engine eng(elliptic_curve_ring(), "elliptic");  // mirror reuse off: both sides computed
  for (int n = 2; n <= 4; ++n)
    for (int p = 0; p <= 2 * n; ++p)
      for (int q = 1; q < n; ++q)
        for (int w = 1; w <= 4; ++w)
          REQUIRE(eng.weight_cohom(diff_mode::full, n, p, q, w) ==
                  eng.weight_cohom(diff_mode::full, n, p, q, -w));
}

TEST_CASE("betti polynomials in the point count") {
  engine_options opt;
  opt.mirror_weights = true;
  engine eng(elliptic_curve_ring(), "elliptic", opt);
  auto bs = betti_polynomials(eng, 3);
  REQUIRE(bs.at(0).coeffs == std::map<int, std::int64_t>{{0, 1}});
  REQUIRE(bs.at(1).coeffs == std::map<int, std::int64_t>{{1, 2}});
  REQUIRE(bs.at(2).coeffs == std::map<int, std::int64_t>{{3, 2}, {2, 3}, {1, 1}});
  REQUIRE(bs.at(3).coeffs == std::map<int, std::int64_t>{{4, 14}, {3, 8}, {2, 2}});
  // b_1(conf(E, n)) = 2n: two circle classes per point, all surviving
  REQUIRE(bs.at(1).eval(5) == 10);
}

TEST_CASE("support filtration is strict at small n") {
  engine_options opt;
  opt.mirror_weights = true;
  engine eng(elliptic_curve_ring(), "elliptic", opt);
  auto rep = verify_strictness(eng, 3);
  REQUIRE(rep.ok);
  REQUIRE(rep.failures.empty());
  REQUIRE(rep.full == eng.cohom_dims(3));
}

TEST_CASE("highest weight multiplicities") {
  engine eng(elliptic_curve_ring(), "elliptic");
  // H^{1,0} of two points: x_1, x_2 at weight +1 and y_1, y_2 at weight -1
  REQUIRE(eng.weight_cohom(diff_mode::full, 2, 1, 0, 1) == 2);
  REQUIRE(highest_weight_dim(eng, diff_mode::full, 2, 1, 0, 1) == 2);
  // H^{2,0} of two points is 5-dimensional: x_1x_2 at weight 2, y_1y_2 at -2,
  // and a 3-dimensional weight-0 slice (one weight-0 class dies into d(G_12))
  REQUIRE(eng.weight_cohom(diff_mode::full, 2, 2, 0, 2) == 1);
  REQUIRE(eng.weight_cohom(diff_mode::full, 2, 2, 0, 0) == 3);
  REQUIRE(highest_weight_dim(eng, diff_mode::full, 2, 2, 0, 0) == 2);
  // the two (1,1) classes are killed by the full differential
  REQUIRE(eng.weight_cohom(diff_mode::full, 2, 1, 1, 1) == 0);
  // H^{0,0}: the unit class sits at weight 0
  REQUIRE(highest_weight_dim(eng, diff_mode::full, 2, 0, 0, 0) == 1);
}

TEST_CASE("engine guardrails") {
  SECTION("tables beyond the atlas limit are refused") {
    engine eng(elliptic_curve_ring(), "elliptic");
    REQUIRE_THROWS_AS(eng.cohom_dims(9), infeasible_error);
  }
  SECTION("graded quotients need Euler characteristic zero") {
    auto g2 = load_ring_file(golden("genus2.json"));
    engine eng(g2, "genus2");
    REQUIRE_THROWS_AS(eng.graded_coefficients(2), input_error);
    REQUIRE(eng.cohom_dims(1).at(1, 0) == 4);  // full complexes still work
  }
}

TEST_CASE("persistent cache") {
  const std::string path = "test_cache_tmp.json";
  std::remove(path.c_str());
  engine_options opt;
  opt.cache_path = path;

  bigraded_table first;
  std::size_t first_jobs = 0;
  {
    engine eng(elliptic_curve_ring(), "elliptic", opt);
    first = eng.cohom_dims(3);
    first_jobs = eng.jobs_run();
    eng.flush_cache();
  }
  REQUIRE(first_jobs > 0);
  const std::string bytes = slurp(path);
  REQUIRE(bytes.find("\"entries\"") != std::string::npos);

  SECTION("a warm engine recomputes nothing and leaves the file untouched") {
    {
      engine eng(elliptic_curve_ring(), "elliptic", opt);
      REQUIRE(eng.cohom_dims(3) == first);
      REQUIRE(eng.jobs_run() == 0);
      REQUIRE(eng.cache_hits() > 0);
    }
    REQUIRE(slurp(path) == bytes);
  }

  SECTION("tampered entries are caught as negative cohomology") {
    auto doc = nlohmann::json::parse(bytes);
    auto& entries = doc["entries"];
    REQUIRE(entries.is_object());
    bool tampered = false;
    for (auto& [key, e] : entries.items()) {
      if (e["dim"].get<std::int64_t>() > 0) {
        e["rank_out"] = e["dim"].get<std::int64_t>() + 5;
        tampered = true;
        break;
      }
    }
    REQUIRE(tampered);
    {
      std::ofstream out(path, std::ios::binary);
      out << doc.dump(1) << "\n";
    }
    engine eng(elliptic_curve_ring(), "elliptic", opt);
    REQUIRE_THROWS_AS(eng.cohom_dims(3), verification_error);
  }

  SECTION("unreadable caches are reported, not silently recomputed") {
    {
      std::ofstream out(path, std::ios::binary);
      out << "this is not json";
    }
    REQUIRE_THROWS_AS(engine(elliptic_curve_ring(), "elliptic", opt), input_error);
  }

  std::remove(path.c_str());
}

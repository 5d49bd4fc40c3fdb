#include <doctest.h>

#include <cmath>
#include <random>

#include "dstf/stats.hpp"
#include "helpers.hpp"

using namespace dstf;
using dstf::testing::parts;

namespace {

const DimensionPartition kXYZ{{"X"}, {"Y"}, {"Z"}};

Scope xy_z_scope(std::size_t z_labels = 3) {
  std::vector<std::string> z;
  for (std::size_t i = 0; i < z_labels; ++i) z.push_back("z" + std::to_string(i));
  return Scope({{"X", {"p", "q"}}, {"Y", {"r", "s"}}, {"Z", z}});
}

RecordSet make_records(const Scope& scope, std::vector<ProductParts> recs) {
  return RecordSet{scope, std::move(recs)};
}

}  // namespace

TEST_CASE("contingency counts with overlapping columns") {
  auto scope = xy_z_scope();
  auto rs = make_records(scope, {
                                    {0b01, 0b01, 0b011},  // (p, r, {z0,z1})
                                    {0b01, 0b01, 0b001},  // (p, r, {z0})
                                    {0b10, 0b10, 0b010},  // (q, s, {z1})
                                });
  std::vector<ProductParts> zl = {parts({0b001}), parts({0b010}), parts({0b011})};
  auto t = build_contingency(rs, kXYZ, zl);

  REQUIRE(t.nx() == 2);
  REQUIRE(t.ny() == 2);
  REQUIRE(t.nz() == 3);
  CHECK(t.x_levels[0] == parts({0b01}));
  CHECK(t.y_levels[1] == parts({0b10}));

  // The first record is a superset of {z0}, {z1} and {z0,z1}: it counts three times.
  CHECK(t.counts[0][0][0] == 2);
  CHECK(t.counts[0][0][1] == 1);
  CHECK(t.counts[0][0][2] == 1);
  CHECK(t.counts[1][1][1] == 1);
  CHECK(t.counts[1][1][0] == 0);
  CHECK(t.level_total(0) == 2);
  CHECK(t.level_total(1) == 2);
  CHECK(t.level_total(2) == 1);
  CHECK(t.n_records == 3);
  CHECK(t.n_xy() == 4);
}

TEST_CASE("structural zeros reduce the admissible cell count") {
  auto scope = xy_z_scope();
  auto rs = make_records(scope, {
                                    {0b01, 0b01, 0b001},
                                    {0b10, 0b10, 0b010},
                                    {0b10, 0b01, 0b001},
                                });
  StructuralZeroSpec impossible{{{"X", {"p"}}, {"Y", {"s"}}}};
  auto t = build_contingency(rs, kXYZ, {parts({0b001}), parts({0b010})}, {impossible});
  CHECK(t.structural[0][1][0]);
  CHECK(t.structural[0][1][1]);
  CHECK(!t.structural[0][0][0]);
  CHECK(t.n_xy() == 3);
  CHECK(t.structural_zero_count() == 2);
}

TEST_CASE("observed v-parts come out distinct and in canonical order") {
  auto scope = xy_z_scope();
  auto rs = make_records(scope, {
                                    {0b01, 0b01, 0b011},
                                    {0b01, 0b01, 0b001},
                                    {0b10, 0b10, 0b011},
                                });
  auto zl = observed_z_levels(rs, {"Z"});
  REQUIRE(zl.size() == 2);
  CHECK(zl[0] == parts({0b001}));
  CHECK(zl[1] == parts({0b011}));
}

TEST_CASE("sample size gate boundaries") {
  auto scope = xy_z_scope();
  auto one = [&](long n, PartMask z) {
    std::vector<ProductParts> recs(static_cast<std::size_t>(n),
                                   ProductParts{0b01, 0b01, z});
    return make_records(scope, recs);
  };
  auto check_gate = [&](long n, GateVerdict expect) {
    auto t = build_contingency(one(n, 0b001), kXYZ, {parts({0b001})});
    auto g = sample_size_gate(t);
    REQUIRE(g.n_xy == 1);
    CHECK(g.lower == 6);
    CHECK(g.upper == 25);
    REQUIRE(g.verdicts.size() == 1);
    CHECK(g.verdicts[0] == expect);
    CHECK(g.all_ok == (expect == GateVerdict::ok));
  };
  check_gate(5, GateVerdict::too_small);
  check_gate(6, GateVerdict::ok);    // closed interval: endpoints pass
  check_gate(25, GateVerdict::ok);
  check_gate(26, GateVerdict::too_large);
}

TEST_CASE("degrees of freedom") {
  CHECK(degrees_of_freedom(2, 2, 4, 0) == 9);
  CHECK(degrees_of_freedom(2, 2, 4, 2) == 7);
  CHECK(degrees_of_freedom(4, 2, 4, 1) == 20);
  CHECK(degrees_of_freedom(2, 2, 3, 0) == 6);
  CHECK_THROWS(degrees_of_freedom(2, 2, 1, 0));   // df would be 0
  CHECK_THROWS(degrees_of_freedom(2, 2, 3, 7));
}

TEST_CASE("chi-square upper tail against known critical values") {
  CHECK(chi_square_pvalue(3.8415, 1) == doctest::Approx(0.05).epsilon(1e-3));
  CHECK(chi_square_pvalue(6.6349, 1) == doctest::Approx(0.01).epsilon(1e-3));
  CHECK(chi_square_pvalue(14.6837, 9) == doctest::Approx(0.10).epsilon(1e-3));
  CHECK(chi_square_pvalue(16.9190, 9) == doctest::Approx(0.05).epsilon(1e-3));
  CHECK(chi_square_pvalue(31.4104, 20) == doctest::Approx(0.05).epsilon(1e-3));

  // df = 2 has the closed form exp(-x/2).
  for (double x : {0.1, 1.0, 3.0, 10.0, 40.0})
    CHECK(chi_square_pvalue(x, 2) == doctest::Approx(std::exp(-x / 2)).epsilon(1e-10));

  CHECK(chi_square_pvalue(0.0, 5) == doctest::Approx(1.0));
  CHECK(chi_square_pvalue(500.0, 3) < 1e-12);

  // Monotone decreasing in the statistic, continuous across the
  // series/continued-fraction switchover.
  for (int df : {1, 2, 5, 9, 20}) {
    double prev = 1.0;
    for (double x = 0.25; x < 60.0; x += 0.25) {
      double p = chi_square_pvalue(x, df);
      CHECK(p <= prev + 1e-12);
      prev = p;
    }
  }
}

TEST_CASE("IPF reproduces the closed-form fit when no cell is forbidden") {
  std::mt19937_64 rng(61);
  auto scope = xy_z_scope();
  std::uniform_int_distribution<int> cnt(1, 20);
  for (int it = 0; it < 20; ++it) {
    // Singleton v-parts: the columns do not overlap, counts are plain cells.
    std::vector<ProductParts> recs;
    long marg_ij[2][2] = {};
    long marg_k[3] = {};
    long total = 0;
    long obs[2][2][3] = {};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 3; ++k) {
          int c = cnt(rng);
          obs[i][j][k] = c;
          marg_ij[i][j] += c;
          marg_k[k] += c;
          total += c;
          for (int n = 0; n < c; ++n)
            recs.push_back({PartMask(1u << i), PartMask(1u << j), PartMask(1u << k)});
        }
    auto t = build_contingency(make_records(scope, recs), kXYZ,
                               {parts({0b001}), parts({0b010}), parts({0b100})});
    auto fit = fit_loglinear(t);
    REQUIRE(fit.converged);
    double chi2 = 0.0;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 3; ++k) {
          double expect = double(marg_ij[i][j]) * double(marg_k[k]) / double(total);
          CHECK(fit.fitted[i][j][k] == doctest::Approx(expect).epsilon(1e-8));
          chi2 += (obs[i][j][k] - expect) * (obs[i][j][k] - expect) / expect;
        }
    CHECK(fit.chi2 == doctest::Approx(chi2).epsilon(1e-8));
    CHECK(fit.df == 6);
    CHECK(fit.p_value == doctest::Approx(chi_square_pvalue(fit.chi2, 6)).epsilon(1e-10));
    CHECK(fit.contrasts_valid);
  }
}

TEST_CASE("residuals square-sum to the statistic") {
  std::mt19937_64 rng(67);
  auto scope = xy_z_scope();
  std::uniform_int_distribution<int> cnt(1, 30);
  std::vector<ProductParts> recs;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 3; ++k)
        for (int n = cnt(rng); n > 0; --n)
          recs.push_back({PartMask(1u << i), PartMask(1u << j), PartMask(1u << k)});
  auto t = build_contingency(make_records(scope, recs), kXYZ,
                             {parts({0b001}), parts({0b010}), parts({0b100})});
  auto fit = fit_loglinear(t);
  auto res = standardized_residuals(t, fit);
  double sum = 0.0;
  for (const auto& pi : res)
    for (const auto& pj : pi)
      for (double r : pj) sum += r * r;
  CHECK(sum == doctest::Approx(fit.chi2).epsilon(1e-10));
}

TEST_CASE("a table that already factorizes fits perfectly") {
  auto scope = xy_z_scope();
  // counts c_ijk = u_ij * w_k exactly.
  long u[2][2] = {{2, 3}, {4, 1}};
  long w[3] = {1, 2, 3};
  std::vector<ProductParts> recs;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 3; ++k)
        for (long n = u[i][j] * w[k]; n > 0; --n)
          recs.push_back({PartMask(1u << i), PartMask(1u << j), PartMask(1u << k)});
  auto t = build_contingency(make_records(scope, recs), kXYZ,
                             {parts({0b001}), parts({0b010}), parts({0b100})});
  auto fit = fit_loglinear(t);
  REQUIRE(fit.converged);
  CHECK(fit.chi2 == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(fit.p_value == doctest::Approx(1.0).epsilon(1e-10));
  REQUIRE(fit.contrasts_valid);
  // The xy interaction contrasts reproduce log u up to the additive model.
  CHECK(fit.delta_xy[0][0] - fit.delta_xy[0][1] - fit.delta_xy[1][0] + fit.delta_xy[1][1] ==
        doctest::Approx(std::log(2.0) - std::log(3.0) - std::log(4.0) + std::log(1.0))
            .epsilon(1e-8));
}

TEST_CASE("recoding: identity partition when everything passes") {
  auto scope = xy_z_scope();
  std::vector<ProductParts> recs;
  // Independent table, every level total inside [24, 100] for n_xy = 4.
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 3; ++k)
        for (int n = 0; n < 8; ++n)
          recs.push_back({PartMask(1u << i), PartMask(1u << j), PartMask(1u << k)});
  auto t = build_contingency(make_records(scope, recs), kXYZ,
                             {parts({0b001}), parts({0b010}), parts({0b100})});
  auto fit = fit_loglinear(t);
  auto rec = suggest_recoding(t, fit, 3);
  REQUIRE(rec.groups.size() == 3);
  for (const auto& g : rec.groups) CHECK(g.size() == 1);
}

TEST_CASE("recoding merges undersized levels into gate-passing groups") {
  auto scope = xy_z_scope(4);
  std::vector<ProductParts> recs;
  long level_n[4] = {60, 15, 12, 30};  // window is [24, 100]; levels 1 and 2 fail
  for (int k = 0; k < 4; ++k)
    for (long n = 0; n < level_n[k]; ++n) {
      int i = int(n % 2), j = int((n / 2) % 2);
      recs.push_back({PartMask(1u << i), PartMask(1u << j), PartMask(1u << k)});
    }
  auto t = build_contingency(
      make_records(scope, recs), kXYZ,
      {parts({0b0001}), parts({0b0010}), parts({0b0100}), parts({0b1000})});
  REQUIRE(t.n_xy() == 4);
  auto fit = fit_loglinear(t);
  auto rec = suggest_recoding(t, fit, 4);

  // Groups partition the levels and each merged total passes the gate.
  std::vector<bool> seen(4, false);
  for (const auto& g : rec.groups) {
    long total = 0;
    for (auto k : g) {
      REQUIRE(k < 4);
      CHECK(!seen[k]);
      seen[k] = true;
      total += t.level_total(k);
    }
    CHECK(total >= 24);
    CHECK(total <= 100);
  }
  for (bool s : seen) CHECK(s);
  CHECK(rec.groups.size() < 4);
  CHECK(rec.heuristic);
}

TEST_CASE("stepwise conditional tests per column") {
  auto scope = xy_z_scope(2);
  std::vector<ProductParts> recs;
  // Level z0: X and Y independent (uniform 10 per cell).
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int n = 0; n < 10; ++n)
        recs.push_back({PartMask(1u << i), PartMask(1u << j), 0b01});
  // Level z1: strong diagonal dependence.
  for (int n = 0; n < 20; ++n) recs.push_back({0b01, 0b01, 0b10});
  recs.push_back({0b01, 0b10, 0b10});
  recs.push_back({0b10, 0b01, 0b10});
  for (int n = 0; n < 20; ++n) recs.push_back({0b10, 0b10, 0b10});

  auto res = stepwise_conditional_test(make_records(scope, recs), kXYZ,
                                       {parts({0b01}), parts({0b10})}, 0.1);
  REQUIRE(res.levels.size() == 2);
  REQUIRE(res.levels[0].testable);
  CHECK(res.levels[0].df == 1);
  CHECK(res.levels[0].chi2 == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(res.levels[0].p_value == doctest::Approx(1.0).epsilon(1e-10));
  REQUIRE(res.levels[1].testable);
  CHECK(res.levels[1].p_value < 0.001);
  CHECK(!res.all_accept);

  // Independent at every level: the decomposition is accepted.
  std::vector<ProductParts> ind;
  for (int k = 0; k < 2; ++k)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int n = 0; n < 8 + 4 * k; ++n)
          ind.push_back({PartMask(1u << i), PartMask(1u << j), PartMask(1u << k)});
  auto ok = stepwise_conditional_test(make_records(scope, ind), kXYZ,
                                      {parts({0b01}), parts({0b10})}, 0.1);
  CHECK(ok.all_accept);
}

TEST_CASE("stepwise: a column seen only once is not testable") {
  auto scope = xy_z_scope(2);
  std::vector<ProductParts> recs;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int n = 0; n < 6; ++n)
        recs.push_back({PartMask(1u << i), PartMask(1u << j), 0b01});
  recs.push_back({0b01, 0b01, 0b10});  // only record at z1
  auto res = stepwise_conditional_test(make_records(scope, recs), kXYZ,
                                       {parts({0b01}), parts({0b10})}, 0.1);
  REQUIRE(res.levels.size() == 2);
  CHECK(res.levels[0].testable);
  CHECK(!res.levels[1].testable);
  CHECK(res.all_accept);  // untestable columns do not block the verdict
}

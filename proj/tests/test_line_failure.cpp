#include <numeric>

#include "hotelling/dynamics.hpp"
#include "hotelling/line_failure.hpp"
#include "test_support.hpp"

using namespace hotelling;

namespace {

void test_closed_form_payoffs() {
  testing::section("lf_payoffs closed forms");
  CHECK_CLOSE(lf_payoffs(Config{{0.5}}, 0.5)[0], 0.875, kExactTol);
  {
    const Config c = validate({0.25, 0.25, 0.75, 0.75}, kUnitSegment);
    const PayoffVector p = lf_payoffs(c, 0.5);
    CHECK_CLOSE(p[0], 0.234375, kExactTol);
    CHECK_CLOSE(p[1], 0.25, kExactTol);
    CHECK_CLOSE(p[2], 0.25, kExactTol);
    CHECK_CLOSE(p[3], 0.234375, kExactTol);
  }
  testing::ConfigGen gen(11);
  for (int it = 0; it < 50; ++it) {
    const Config c = gen.random_config(gen.uniform_int(1, 8));
    const PayoffVector lf = lf_payoffs(c, 0.0);
    const PayoffVector cl = classic_payoffs(c, kUnitSegment);
    for (int i = 0; i < c.n(); ++i) CHECK_CLOSE(lf[i], cl[i], kExactTol);
  }
  // Two-server closed form for the left server.
  for (int it = 0; it < 30; ++it) {
    const double x1 = gen.uniform(0.0, 0.6);
    const double x2 = gen.uniform(x1 + 0.01, 1.0);
    const double r = gen.uniform(0.05, 0.95);
    const PayoffVector p = lf_payoffs(validate({x1, x2}, kUnitSegment), r);
    CHECK_CLOSE(p[0], 0.5 * (x2 + x1) - 0.5 * r * x1 * x1, kExactTol);
  }
}

void test_cut_scenario() {
  testing::section("lf_cut_scenario");
  {
    const Config c = validate({0.25, 0.25, 0.75, 0.75}, kUnitSegment);
    const PayoffVector p = lf_cut_scenario(c, 0.5);
    for (int i = 0; i < 4; ++i) CHECK_CLOSE(p[i], 0.25, kExactTol);
  }
  CHECK_CLOSE(lf_cut_scenario(Config{{0.5}}, 0.2)[0], 0.8, kExactTol);
  {
    const PayoffVector p =
        lf_cut_scenario(validate({0.3, 0.7}, kUnitSegment), 0.4);
    CHECK_CLOSE(p[0], 0.4, kExactTol);
    CHECK_CLOSE(p[1], 0.6, kExactTol);
  }
  CHECK_THROWS_CODE(lf_cut_scenario(Config{{0.5}}, 0.5), Errc::CutOnServer);
  CHECK_THROWS_CODE(lf_cut_scenario(Config{{0.5}}, 0.0), Errc::ParamOutOfRange);
  CHECK_THROWS_CODE(lf_cut_scenario(Config{{0.5}}, 1.0), Errc::ParamOutOfRange);

  // Scenario payoffs are linear in f between consecutive server coordinates.
  testing::ConfigGen gen(12);
  for (int it = 0; it < 40; ++it) {
    const Config c = gen.random_config(gen.uniform_int(2, 6));
    std::vector<double> cuts{0.0};
    for (double v : c.x) {
      if (cuts.back() != v) cuts.push_back(v);
    }
    if (cuts.back() != 1.0) cuts.push_back(1.0);
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      const double w = cuts[k + 1] - cuts[k];
      if (w <= 1e-6) continue;
      const PayoffVector pa = lf_cut_scenario(c, cuts[k] + 0.25 * w);
      const PayoffVector pb = lf_cut_scenario(c, cuts[k] + 0.5 * w);
      const PayoffVector pc = lf_cut_scenario(c, cuts[k] + 0.75 * w);
      for (int i = 0; i < c.n(); ++i) {
        CHECK_CLOSE(pa[i] + pc[i], 2.0 * pb[i], 1e-12);  // collinear
      }
    }
  }
}

void test_quadrature_oracle() {
  testing::section("lf_payoffs_quadrature");
  CHECK_CLOSE(lf_payoffs_quadrature(Config{{0.5}}, 0.5)[0], 0.875, 1e-12);
  testing::ConfigGen gen(13);
  for (int it = 0; it < 400; ++it) {
    const Config c = gen.random_config(gen.uniform_int(1, 8));
    for (const double r : {0.1, 0.5, 0.9}) {
      const PayoffVector exact = lf_payoffs(c, r);
      const PayoffVector quad = lf_payoffs_quadrature(c, r);
      for (int i = 0; i < c.n(); ++i) CHECK_CLOSE(exact[i], quad[i], 1e-10);
    }
  }
  // r = 1: pure scenario integral.
  const Config c = validate({0.3, 0.7}, kUnitSegment);
  const PayoffVector full = lf_payoffs_quadrature(c, 1.0);
  const PayoffVector closed = lf_payoffs(c, 1.0);
  for (int i = 0; i < 2; ++i) CHECK_CLOSE(full[i], closed[i], 1e-12);
}

void test_montecarlo_oracle() {
  testing::section("lf_payoffs_montecarlo");
  {
    const McResult mc = lf_payoffs_montecarlo(Config{{0.5}}, 0.5, 200000, 42);
    CHECK(std::abs(mc.mean[0] - 0.875) <= 4.0 * mc.std_error[0]);
    CHECK(mc.std_error[0] > 0.0);
  }
  {
    const Config c = validate({0.25, 0.25, 0.75, 0.75}, kUnitSegment);
    const McResult mc = lf_payoffs_montecarlo(c, 0.5, 200000, 7);
    const PayoffVector exact = lf_payoffs(c, 0.5);
    for (int i = 0; i < 4; ++i) {
      CHECK(std::abs(mc.mean[i] - exact[i]) <= 4.0 * mc.std_error[i] + 1e-12);
    }
    // Deterministic for a fixed seed.
    const McResult again = lf_payoffs_montecarlo(c, 0.5, 200000, 7);
    CHECK(again.mean == mc.mean);
    CHECK(again.std_error == mc.std_error);
  }
  {
    const Config c = validate({0.2, 0.8}, kUnitSegment);
    const McResult mc = lf_payoffs_montecarlo(c, 0.0, 1000, 3);
    const PayoffVector cl = classic_payoffs(c, kUnitSegment);
    CHECK(mc.mean == cl);
    CHECK(mc.std_error == (PayoffVector{0.0, 0.0}));
  }
}

void test_best_hinterland() {
  testing::section("lf_best_hinterland");
  CHECK_CLOSE(lf_best_hinterland(0.9, 0.8), 0.625, kExactTol);
  CHECK_CLOSE(lf_best_hinterland(0.55, 0.7), 0.55, kExactTol);
  CHECK_CLOSE(lf_best_hinterland(1.0, 1.0 - 1e-12), 0.5, 1e-9);
  CHECK_CLOSE(lf_best_hinterland_right(0.1, 0.8), 0.375, kExactTol);
  CHECK_CLOSE(lf_best_hinterland_right(0.45, 0.7), 0.45, kExactTol);
  CHECK_THROWS_CODE(lf_best_hinterland(0.9, 0.0), Errc::ParamOutOfRange);
}

void test_equilibria() {
  testing::section("lf_equilibrium");
  {
    const Config eq = lf_equilibrium(4, 0.5);
    const double x = eq.x[0];
    CHECK_CLOSE(x, 0.2583426, 1e-7);
    CHECK_CLOSE(0.5 * x * x - 4.0 * x + 1.0, 0.0, 1e-12);  // quadratic root
    const PayoffVector p = lf_payoffs(eq, 0.5);
    for (int i = 0; i < 4; ++i) CHECK_CLOSE(p[i], 0.5 - x, 1e-12);
  }
  for (const double r : {0.05, 0.3, 0.5, 0.7, 0.95}) {
    const Config eq = lf_equilibrium(4, r);
    const double x = eq.x[0];
    const PayoffVector p = lf_payoffs(eq, r);
    for (int i = 0; i < 4; ++i) CHECK_CLOSE(p[i], 0.5 - x, 1e-12);
  }
  {
    const Config eq = lf_equilibrium(5, 0.5);
    const double x = eq.x[0];
    CHECK_CLOSE(x, 3.0 - 2.0 * std::sqrt(2.0), 1e-12);
    // The balance condition itself, and its rationalized root.
    CHECK_CLOSE(0.5 - x, 2.0 * (x - 0.5 * 0.5 * x * x), 1e-12);
    CHECK_CLOSE(x, 1.0 / (3.0 + std::sqrt(9.0 - 2.0 * 0.5)), 1e-12);
    CHECK_CLOSE(eq.x[2], 0.5, kExactTol);
  }
  {
    // The printed five-server root (3 - sqrt(9-4r)) / (2r) violates the
    // stated balance condition; regression-pinned at r = 0.5.
    const double r = 0.5;
    const double printed = (3.0 - std::sqrt(9.0 - 4.0 * r)) / (2.0 * r);
    const double residual = std::abs(
        (0.5 - printed) - 2.0 * (printed - 0.5 * r * printed * printed));
    CHECK(residual > 0.1);
  }
  {
    // Classic limit as r -> 0.
    CHECK_CLOSE(lf_equilibrium(4, 1e-6).x[0], 0.25, 1e-5);
    CHECK_CLOSE(lf_equilibrium(5, 1e-6).x[0], 1.0 / 6, 1e-5);
  }
  CHECK(lf_equilibrium(2, 0.9).x == (Positions{0.5, 0.5}));
  CHECK(lf_equilibrium(1, 0.3).x == (Positions{0.5}));
  CHECK_THROWS_CODE(lf_equilibrium(3, 0.5), Errc::NoEquilibrium);
  CHECK_THROWS_CODE(lf_equilibrium(4, 0.0), Errc::ParamOutOfRange);
  CHECK_THROWS_CODE(lf_equilibrium(6, 0.5), Errc::ParamOutOfRange);

  // n >= 6 family members pass the checker; infeasible parameters fail.
  for (const double r : {0.25, 0.5, 0.75}) {
    const auto [lo, hi] = lf_six_family_bounds(r);
    CHECK(lo < hi);
    for (const double x : {lo, 0.5 * (lo + hi)}) {
      const Config eq = lf_equilibrium(6, r, x);
      CHECK(lf_condition_check(eq, r).equilibrium);
    }
    CHECK_THROWS_CODE(lf_equilibrium(6, r, lo - 0.02), Errc::ParamOutOfRange);
    CHECK_THROWS_CODE(lf_equilibrium(6, r, 0.4), Errc::ParamOutOfRange);
  }
  {
    // Seven servers: even interior spread has a feasible hinterland window.
    const Config eq = lf_equilibrium(7, 0.5, 0.105);
    CHECK(lf_condition_check(eq, 0.5).equilibrium);
    CHECK_CLOSE(eq.x[3], 0.5, 1e-12);
  }
}

void test_condition_check() {
  testing::section("lf_condition_check");
  {
    const ConditionReport rep =
        lf_condition_check(validate({0.3, 0.5, 0.5, 0.7}, kUnitSegment), 0.5);
    CHECK(!rep.cond1);
    CHECK(!rep.equilibrium);
  }
  {
    // Perturbing a passing six-server member flips condition (2) or (3).
    const double r = 0.5;
    const auto [lo, hi] = lf_six_family_bounds(r);
    const double x = 0.5 * (lo + hi);
    Config eq = lf_equilibrium(6, r, x);
    Positions moved = eq.x;
    moved[2] += 0.9 * (moved[3] - moved[2]);  // flank pushed toward center
    const ConditionReport rep =
        lf_condition_check(validate(moved, kUnitSegment), r);
    CHECK(rep.cond1);
    CHECK(!(rep.cond2 && rep.cond3));
  }
  CHECK_THROWS_CODE(lf_condition_check(Config{{0.5}}, 0.5),
                    Errc::NotApplicable);
}

void test_equiv_segment() {
  testing::section("lf_equiv_segment");
  {
    const Segment s = lf_equiv_segment(
        validate({0.25, 0.25, 0.75, 0.75}, kUnitSegment), 0.5);
    CHECK_CLOSE(s.a, 0.015625, kExactTol);
    CHECK_CLOSE(s.b, 0.984375, kExactTol);
  }
  {
    const Segment s = lf_equiv_segment(validate({0.3, 0.7}, kUnitSegment), 0.0);
    CHECK_CLOSE(s.a, 0.0, kExactTol);
    CHECK_CLOSE(s.b, 1.0, kExactTol);
  }
  {
    const Config c = validate({0.5, 0.5}, kUnitSegment);
    const Segment s = lf_equiv_segment(c, 0.8);
    CHECK_CLOSE(s.a, 0.1, kExactTol);
    CHECK_CLOSE(s.b, 0.9, kExactTol);
    const PayoffVector cl = classic_payoffs(c, s);
    CHECK_CLOSE(cl[0], 0.4, kExactTol);
    CHECK_CLOSE(cl[1], 0.4, kExactTol);
    const PayoffVector lf = lf_payoffs(c, 0.8);
    CHECK(cl == lf);
  }
  // Payoff identity and conservation on random configurations.
  testing::ConfigGen gen(14);
  for (int it = 0; it < 300; ++it) {
    const Config c = gen.random_config(gen.uniform_int(1, 8));
    const double r = gen.uniform(0.05, 0.95);
    const Segment s = lf_equiv_segment(c, r);
    const PayoffVector lf = lf_payoffs(c, r);
    const PayoffVector cl = classic_payoffs(c, s);
    double total = 0.0;
    for (int i = 0; i < c.n(); ++i) {
      CHECK_CLOSE(lf[i], cl[i], 1e-12);
      total += lf[i];
    }
    CHECK_CLOSE(total, s.length(), 1e-12);
    const double x1 = c.x.front(), xn = c.x.back();
    CHECK_CLOSE(total, 1.0 - 0.5 * r * (x1 * x1 + (1 - xn) * (1 - xn)),
                1e-12);
  }
}

void test_appendix_tables() {
  testing::section("lf_appendix_tables");
  const double r = 0.5;
  const Config eq = lf_equilibrium(4, r);
  const double x = eq.x[0];

  {
    // Deviator between the pairs: constant expected payoff 1/2 - x per row.
    const ScenarioTable t = lf_appendix_tables(r, 0.35);
    CHECK(!t.deviator_in_hinterland);
    for (const ScenarioRow& row : t.rows) {
      CHECK_CLOSE(row.deviator, 0.5 - x, kExactTol);
    }
    CHECK_CLOSE(t.expected_deviator, 0.5 - x, 1e-12);
    CHECK_CLOSE(t.expected_incumbent, 0.5 - x, 1e-12);
    // Engine cross-check: the moved configuration really earns that much.
    const Config moved = validate({x, x, 0.35, 1.0 - x}, kUnitSegment);
    CHECK_CLOSE(lf_payoffs(moved, r)[2], t.expected_deviator, 1e-12);
  }
  {
    const ScenarioTable t = lf_appendix_tables(r, 0.0);
    CHECK(t.deviator_in_hinterland);
    CHECK_CLOSE(t.rows[0].prob, 1.0 - r, kExactTol);
    CHECK_CLOSE(t.rows[1].prob, 0.0, kExactTol);  // r * y at y = 0
    CHECK_CLOSE(t.rows[2].prob, r * x, kExactTol);
    CHECK_CLOSE(t.rows[3].prob, r * (1.0 - x), kExactTol);
    CHECK(t.difference() >= -kExactTol);
  }
  {
    const double y = 0.5 * x;
    const ScenarioTable t = lf_appendix_tables(r, y);
    const double closed =
        (1.0 - r) * 0.5 * (x - y) + r * 0.5 * (x - y) * (1.0 - y - x);
    CHECK_CLOSE(t.difference(), closed, 1e-12);
    // Incumbent keeps the equilibrium payoff; deviator matches the engine.
    CHECK_CLOSE(t.expected_incumbent, 0.5 - x, 1e-12);
    const Config moved = validate({y, x, 1.0 - x, 1.0 - x}, kUnitSegment);
    CHECK_CLOSE(lf_payoffs(moved, r)[0], t.expected_deviator, 1e-12);
  }
  {
    // Row entries are conditional expectations of the original configuration's
    // scenario payoff over the row interval (incumbent s1, hinterland case).
    const double y = 0.17;
    const ScenarioTable t = lf_appendix_tables(r, y);
    for (const ScenarioRow& row : t.rows) {
      if (row.no_failure || row.f_hi <= row.f_lo) continue;
      const double w = row.f_hi - row.f_lo;
      double acc = 0.0;
      const int kSteps = 2000;
      for (int k = 0; k < kSteps; ++k) {
        const double f = row.f_lo + w * (k + 0.5) / kSteps;
        acc += lf_cut_scenario(eq, f)[0];
      }
      CHECK_CLOSE(acc / kSteps, row.incumbent, 1e-3);
    }
  }
  // Inequality across both regions and several r.
  for (const double rr : {0.25, 0.5, 0.75}) {
    const double xx = lf_equilibrium(4, rr).x[0];
    for (int k = 0; k < 50; ++k) {
      const double y1 = xx * k / 50.0;
      CHECK(lf_appendix_tables(rr, y1).difference() >= -kExactTol);
      const double y2 = xx + (0.5 - xx) * (k + 1) / 51.0;
      CHECK(lf_appendix_tables(rr, y2).difference() >= -kExactTol);
    }
  }
  // Continuity at the equilibrium point from the hinterland side.
  CHECK(std::abs(lf_appendix_tables(r, x - 1e-9).difference()) <= 1e-8);
  CHECK_THROWS_CODE(lf_appendix_tables(r, x), Errc::ParamOutOfRange);
  CHECK_THROWS_CODE(lf_appendix_tables(r, 0.5), Errc::ParamOutOfRange);
  CHECK_THROWS_CODE(lf_appendix_tables(r, -0.1), Errc::ParamOutOfRange);
}

void test_three_server_scan() {
  testing::section("three-server grid scan");
  // No 3-server equilibrium at grid resolution 200 for r in {0.25, 0.5, 0.75}.
  const int res = 200;
  Config cfg;
  cfg.x.resize(3);
  for (const double r : {0.25, 0.5, 0.75}) {
    const GameVariant v = LineFailure{r};
    long found = 0;
    for (int a = 0; a <= res; ++a) {
      for (int b = a; b <= res; ++b) {
        for (int c = b; c <= res; ++c) {
          if (a == c) continue;
          if (a + c > res || (a + c == res && b > res - b)) continue;
          cfg.x = {a / static_cast<double>(res), b / static_cast<double>(res),
                   c / static_cast<double>(res)};
          if (is_equilibrium(cfg, v)) ++found;
        }
      }
    }
    CHECK_MSG(found == 0, "r=" << r << " found=" << found);
  }
}

}  // namespace

int main() {
  test_closed_form_payoffs();
  test_cut_scenario();
  test_quadrature_oracle();
  test_montecarlo_oracle();
  test_best_hinterland();
  test_equilibria();
  test_condition_check();
  test_equiv_segment();
  test_appendix_tables();
  test_three_server_scan();
  return testing::finish("line_failure");
}

#include "dcwave/errors.hpp"
#include "dcwave/jets.hpp"
#include "gen.hpp"

#include <doctest.h>

#include <cmath>

using namespace dcwave;

namespace {

Jet random_poly_1d(Gen& g, const JetSpace& sp, int deg)
{
    Jet j(sp);
    for (int k = 0; k <= deg; ++k) j.set({k}, g.uniform(-1, 1));
    return j;
}

double binom(int n, int k) { return std::tgamma(n + 1.0) / (std::tgamma(k + 1.0) * std::tgamma(n - k + 1.0)); }

}  // namespace

TEST_SUITE("jets") {

TEST_CASE("arithmetic")
{
    JetSpace sp = make_space(1, 0, 6);
    Jet x = Jet::variable(sp, 0);
    Jet x2 = x * x;
    CHECK(x2.coeff({2}) == cplx(1.0));
    CHECK(x2.coeffs().size() == 1);
    CHECK((x2 - x2).is_zero());
    CHECK((x2 + x2 * cplx(-1.0)).is_zero());

    JetSpace s2 = make_space(1, 0, 2);
    Jet y = Jet::variable(s2, 0);
    Jet y3 = (y * y) * y;
    CHECK(y3.is_zero());
    CHECK(y3.lossy());
    CHECK_FALSE((y * y).lossy());

    JetSpace other = make_space(2, 0, 6);
    CHECK_THROWS_AS(x + Jet::variable(other, 0), ArityMismatch);
    JetSpace shifted = sp;
    shifted.x0 = {0.5};
    CHECK_THROWS_AS(x * Jet::variable(shifted, 0), ArityMismatch);
}

TEST_CASE("derivatives")
{
    JetSpace sp = make_space(1, 2, 6);
    Jet x = Jet::variable(sp, 0), z0 = Jet::variable(sp, 1), z1 = Jet::variable(sp, 2);
    Jet d = (x * x * x).derivative(0);
    CHECK(d.max_abs_diff(x * x * cplx(3.0)) == 0.0);
    CHECK((z0 * z1).derivative(1).max_abs_diff(z1) == 0.0);
    CHECK(z1.derivative(0).is_zero());
}

TEST_CASE("evaluation at a shifted base point")
{
    JetSpace sp = make_space(1, 1, 4);
    sp.x0 = {0.5};
    sp.zeta0 = {cplx(0.0, 1.0)};
    Jet x = Jet::variable(sp, 0), z = Jet::variable(sp, 1);
    Jet p = x * x * z;
    double xs[1] = {0.7};
    cplx zs[1] = {cplx(0.2, -0.3)};
    cplx want = 0.49 * zs[0];
    CHECK(std::abs(p.evaluate(xs, zs) - want) < 1e-15);
}

TEST_CASE("formal solution examples")
{
    JetSpace sp = make_space(1, 0, 8);
    Jet x = Jet::variable(sp, 0);
    VectorFieldJet L1 = VectorFieldJet{{Jet::constant(sp, 1.0)}, {}, false, -1};
    FormalSeries s = formal_solution(L1, x * x, 6);
    CHECK(s.u[0].max_abs_diff(x * x) == 0.0);
    CHECK(s.u[1].max_abs_diff(x * cplx(-2.0)) == 0.0);
    CHECK(s.u[2].max_abs_diff(Jet::constant(sp, 1.0)) == 0.0);
    for (int k = 3; k <= 6; ++k) CHECK(s.u[k].is_zero());
    for (int k = 0; k <= 6; ++k) CHECK(s.valid_degree[k] == 8 - k);

    VectorFieldJet Lx{{x}, {}, false, -1};
    FormalSeries e = formal_solution(Lx, x, 8);
    for (int k = 0; k <= 8; ++k)
        CHECK(e.u[k].max_abs_diff(x * cplx((k % 2 ? -1.0 : 1.0) / std::tgamma(k + 1.0))) < 1e-16);

    FormalSeries c = formal_solution(Lx, Jet::constant(sp, 5.0), 4);
    CHECK(c.u[0].coeff({0}) == cplx(5.0));
    for (int k = 1; k <= 4; ++k) CHECK(c.u[k].is_zero());

    CHECK_THROWS_AS(formal_solution(Lx, x, 9), BudgetExhausted);
}

TEST_CASE("truncation and field application")
{
    JetSpace sp = make_space(1, 0, 8);
    Jet x = Jet::variable(sp, 0);
    VectorFieldJet L1{{Jet::constant(sp, 1.0)}, {}, false, -1};
    FormalSeries s = formal_solution(L1, x * x, 4);

    TimePoly t1 = truncate(s, 1);
    REQUIRE(t1.size() == 2);
    CHECK(t1[0].max_abs_diff(x * x) == 0.0);
    CHECK(t1[1].max_abs_diff(x * cplx(-2.0)) == 0.0);
    CHECK(truncate(s, 0).size() == 1);

    TimePoly Lt1 = apply_field(L1, t1);
    // -2t
    CHECK(Lt1[0].is_zero());
    CHECK(Lt1[1].max_abs_diff(Jet::constant(sp, -2.0)) == 0.0);
    // T^4 is the exact solution: L annihilates it.
    for (const auto& c : apply_field(L1, truncate(s, 4))) CHECK(c.is_zero());

    VectorFieldJet Lx{{x}, {}, false, -1};
    FormalSeries e = formal_solution(Lx, x, 4);
    TimePoly q = apply_field(Lx, truncate(e, 1));
    CHECK(q[0].is_zero());
    CHECK(q[1].max_abs_diff(x * cplx(-1.0)) < 1e-16);
    TimePoly q0 = apply_field(Lx, truncate(e, 0));
    CHECK(q0[0].max_abs_diff(e.u[1] * cplx(-1.0)) < 1e-16);

    CHECK(residual_check(s, 1) == 0.0);
    CHECK(residual_check(s, 3) == 0.0);
    for (int n = 0; n <= 3; ++n) CHECK(residual_check(e, n) < 1e-15);
}

TEST_CASE("budget exhaustion in apply_field")
{
    JetSpace sp = make_space(1, 0, 2);
    Jet x = Jet::variable(sp, 0);
    VectorFieldJet L{{x * x}, {}, false, -1};
    TimePoly p = {x * x};
    CHECK_THROWS_AS(apply_field(L, p), BudgetExhausted);
    CHECK_NOTHROW(apply_field(L, p, true));
}

TEST_CASE("recursion is linear in the datum")
{
    Gen g(5);
    JetSpace sp = make_space(1, 1, 10);
    Jet x = Jet::variable(sp, 0), z = Jet::variable(sp, 1);
    for (int trial = 0; trial < 20; ++trial) {
        VectorFieldJet L{{x * g.complex(1) + Jet::constant(sp, g.complex(1))}, {z * g.complex(1)}, false, -1};
        Jet f(sp), h(sp);
        for (int i = 0; i <= 3; ++i)
            for (int j = 0; j <= 3; ++j) {
                f.set({i, j}, g.complex(1));
                h.set({i, j}, g.complex(1));
            }
        cplx a = g.complex(2), b = g.complex(2);
        FormalSeries sf = formal_solution(L, f, 6), sh = formal_solution(L, h, 6);
        FormalSeries sc = formal_solution(L, f * a + h * b, 6);
        for (int k = 0; k <= 6; ++k) CHECK(sc.u[k].max_abs_diff(sf.u[k] * a + sh.u[k] * b) < 1e-12);
        for (int n = 0; n < 6; ++n) CHECK(residual_check(sf, n) < 1e-12);
    }
}

TEST_CASE("transport oracle for random constant speed and datum")
{
    Gen g(9);
    JetSpace sp = make_space(1, 0, 12);
    for (int trial = 0; trial < 20; ++trial) {
        double a = g.uniform(-2, 2);
        Jet f = random_poly_1d(g, sp, 8);
        FormalSeries s = formal_solution(VectorFieldJet{{Jet::constant(sp, a)}, {}, false, -1}, f, 12);
        // u_k = (-a)^k f^(k) / k!
        for (int k = 0; k <= 12; ++k) {
            Jet want(sp);
            for (int m = k; m <= 8; ++m) want.set({m - k}, f.coeff({m}) * binom(m, k) * std::pow(-a, k));
            CHECK(s.u[k].max_abs_diff(want) < 1e-12);
        }
    }
}

TEST_CASE("growth fit")
{
    WeightSequence seq = make_gevrey(2.0, 64);
    JetSpace sp = make_space(1, 0, 20);
    Jet x = Jet::variable(sp, 0);
    FormalSeries tr = formal_solution(VectorFieldJet{{Jet::constant(sp, 1.0)}, {}, false, -1}, x * x, 10);
    GrowthEstimate g1 = growth_fit(tr, seq, Box{{-1}, {1}});
    CHECK(std::isfinite(g1.C_fit));
    CHECK(g1.C_fit >= 1.0);
    CHECK(g1.B_fit >= 1.0);

    Jet f(sp);
    for (int m = 0; m <= 10; ++m) f.set({2 * m}, m % 2 ? -1.0 : 1.0);
    FormalSeries s = formal_solution(VectorFieldJet{{x}, {}, false, -1}, f, 20);
    GrowthEstimate g2 = growth_fit(s, seq, Box{{-0.5}, {0.5}});
    CHECK(std::isfinite(g2.C_fit));

    std::vector<double> sup(40);
    for (int k = 0; k < 40; ++k) sup[k] = std::exp(k * std::log(3.0) + seq.log_M(k) - std::lgamma(k + 1.0));
    double C = fit_growth_constant(sup, seq);
    double step = std::pow(2.0, 0.25);
    CHECK(C >= 3.0 / step);
    CHECK(C <= 3.0 * step);
}

TEST_CASE("time augmentation")
{
    JetSpace sp = make_space(2, 0, 8);  // x, t
    Jet x = Jet::variable(sp, 0), t = Jet::variable(sp, 1);
    VectorFieldJet L{{t, Jet(sp)}, {}, true, 1};
    VectorFieldJet La = time_augment(L);
    CHECK_FALSE(La.time_dependent);
    CHECK(La.a[0].max_abs_diff(t) == 0.0);
    CHECK(La.a[1].max_abs_diff(Jet::constant(sp, 1.0)) == 0.0);

    FormalSeries s = formal_solution(La, x, 8);
    Jet F = restrict_diagonal(s, 1);
    CHECK(F.max_abs_diff(x - t * t * cplx(0.5)) < 1e-15);

    JetSpace s1 = make_space(1, 1, 6);
    VectorFieldJet Li{{Jet::variable(s1, 0)}, {Jet::variable(s1, 1)}, false, -1};
    VectorFieldJet Lt = time_augment(Li);
    CHECK(Lt.space().n_x == 2);
    CHECK(Lt.a[1].max_abs_diff(Jet::constant(Lt.space(), 1.0)) == 0.0);
    CHECK(Lt.a[0].coeff({1, 0, 0}) == cplx(1.0));
    CHECK(Lt.b[0].coeff({0, 0, 1}) == cplx(1.0));
}

}  // TEST_SUITE

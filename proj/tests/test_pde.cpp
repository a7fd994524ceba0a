#include "dcwave/errors.hpp"
#include "dcwave/pde.hpp"
#include "gen.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace dcwave;

namespace {

SolutionSamples samples(const PdeFixture& fx, int nx = 81, int nt = 41)
{
    return make_solution_samples(fx.model, fx.u, {-0.5, -0.25}, {0.5, 0.25}, {nx, nt});
}

double max_abs_minus(const GridFunction& g, cplx want)
{
    double m = 0.0;
    for (const auto& v : g.values) m = std::max(m, std::abs(v - want));
    return m;
}

}  // namespace

TEST_SUITE("pde") {

TEST_CASE("fixtures certify")
{
    for (const auto& name : pde_fixture_names()) {
        PdeFixture fx = pde_fixture(name);
        SolutionSamples s = samples(fx);
        CAPTURE(name);
        CHECK(s.certified);
        CHECK(s.pde_residual <= 1e-6);
    }
    CHECK_THROWS_AS(pde_fixture("nope"), ConfigError);

    PdeFixture fx = pde_fixture("transport");
    fx.u = [](double x, double t) { return cplx(std::sin(x - t)); };
    SolutionSamples wrong = samples(fx);
    CHECK_FALSE(wrong.certified);
    CHECK_THROWS_AS(linearize(fx.model, wrong), Uncertified);
}

TEST_CASE("linearization")
{
    auto a = [](const char* name) { PdeFixture fx = pde_fixture(name); return linearize(fx.model, samples(fx)); };
    CHECK(max_abs_minus(a("conormal")[0], -1.0) == 0.0);
    CHECK(max_abs_minus(a("holomorphic")[0], cplx(0.0, 1.0)) == 0.0);
    PdeFixture b = pde_fixture("burgers");
    SolutionSamples s = samples(b);
    GridFunction ab = linearize(b.model, s)[0];
    double worst = 0.0;
    for (std::size_t i = 0; i < ab.values.size(); ++i) worst = std::max(worst, std::abs(ab.values[i] - s.u.values[i]));
    CHECK(worst < 1e-15);
}

TEST_CASE("characteristic set")
{
    for (auto conv : {CharConvention::symbol, CharConvention::flipped}) {
        CharMembership m = char_set({cplx(0, 1)}, {1.0, 0.3}, conv);
        CHECK_FALSE(m.is_char);
        CHECK(m.distance > 0.1);
    }
    CharMembership s = char_set({-1.0}, {1.0, -1.0}, CharConvention::symbol);
    CHECK(s.is_char);
    CHECK(s.distance < 1e-12);
    CharMembership p = char_set({-1.0}, {1.0, -1.0}, CharConvention::flipped);
    CHECK_FALSE(p.is_char);
    CHECK(char_set({-1.0}, {1.0, 1.0}, CharConvention::flipped).is_char);

    Gen g(21);
    for (int i = 0; i < 100; ++i) {
        double a = g.uniform(-3, 3), xi = g.uniform(-1, 1);
        CHECK(char_set({a}, {xi, a * xi}, CharConvention::symbol).distance < 1e-12);
        CHECK(char_set({a}, {xi, -a * xi}, CharConvention::flipped).distance < 1e-12);
    }
    CharReport rep = char_report({0.0, 0.0}, {-1.0}, {{1.0, -1.0}, {1.0, 1.0}}, CharConvention::symbol);
    REQUIRE(rep.results.size() == 2);
    CHECK(rep.results[0].is_char);
    CHECK_FALSE(rep.results[1].is_char);
}

TEST_CASE("hamiltonian lift examples")
{
    JetSpace sp = rhs_space(1, false, 4);
    Jet x = Jet::variable(sp, 0), z0 = Jet::variable(sp, 1), z1 = Jet::variable(sp, 2);

    HamiltonianField t = hamiltonian_lift(make_rhs(z1));
    CHECK(t.h0.is_zero());
    CHECK(t.h[0].is_zero());
    CHECK(t.base.a[0].max_abs_diff(Jet::constant(sp, -1.0)) == 0.0);

    HamiltonianField b = hamiltonian_lift(make_rhs(z0 * z1));
    CHECK(b.h0.is_zero());
    CHECK(b.h[0].max_abs_diff(z1 * z1) == 0.0);

    HamiltonianField xz = hamiltonian_lift(make_rhs(x * z1));
    CHECK(xz.h0.is_zero());
    CHECK(xz.h[0].max_abs_diff(z1) == 0.0);

    JetSpace tight = rhs_space(1, false, 2);
    CHECK_THROWS_AS(hamiltonian_lift(make_rhs(Jet::variable(tight, 1) * Jet::variable(tight, 2))), BudgetExhausted);
}

TEST_CASE("hamiltonian lift is linear")
{
    Gen g(22);
    JetSpace sp = rhs_space(1, false, 5);
    auto rnd = [&] {
        Jet f(sp);
        for (int i = 0; i <= 2; ++i)
            for (int j = 0; j <= 2 - i; ++j)
                for (int k = 0; k <= 2 - i - j; ++k) f.set({i, j, k}, g.complex(1));
        return f;
    };
    for (int trial = 0; trial < 20; ++trial) {
        Jet f = rnd(), h = rnd();
        cplx a = g.complex(2), b = g.complex(2);
        HamiltonianField Hf = hamiltonian_lift(make_rhs(f)), Hh = hamiltonian_lift(make_rhs(h));
        HamiltonianField Hc = hamiltonian_lift(make_rhs(f * a + h * b));
        CHECK(Hc.h0.max_abs_diff(Hf.h0 * a + Hh.h0 * b) < 1e-13);
        CHECK(Hc.h[0].max_abs_diff(Hf.h[0] * a + Hh.h[0] * b) < 1e-13);
    }
}

TEST_CASE("chain identity")
{
    PdeFixture fx = pde_fixture("transport");
    const JetSpace& sp = fx.model.f.space();
    auto at = [&](int nx) {
        return make_solution_samples(fx.model, fx.u, {-1, -0.25}, {1, 0.25}, {nx, (nx - 1) / 2 + 1});
    };
    SolutionSamples c = at(81), f = at(161);
    for (int var : {1, 2}) {
        ChainResult rc = chain_identity_check(fx.model, c, Jet::variable(sp, var));
        ChainResult rf = chain_identity_check(fx.model, f, Jet::variable(sp, var));
        CHECK(rf.residual < 1e-4);
        CHECK(rc.residual / rf.residual == doctest::Approx(4.0).epsilon(0.15));
        CHECK(rf.step == doctest::Approx(rc.step / 2));
    }
    // phi = x1: both sides equal -df/dzeta1 = -1.
    CHECK(chain_identity_check(fx.model, c, Jet::variable(sp, 0)).residual < 1e-12);

    PdeFixture bu = pde_fixture("burgers");
    SolutionSamples sb = make_solution_samples(bu.model, bu.u, {-0.5, -0.25}, {0.5, 0.25}, {161, 161});
    for (int var : {0, 1, 2})
        CHECK(chain_identity_check(bu.model, sb, Jet::variable(bu.model.f.space(), var)).residual < 1e-3);
}

TEST_CASE("trust box")
{
    PdeFixture fx = pde_fixture("transport");
    SolutionSamples s = samples(fx);
    fx.model.trust_radius = {10.0, 0.1, 10.0};
    CHECK_THROWS_AS(compose(fx.model, Jet::variable(fx.model.f.space(), 1), s), TrustBoxExceeded);
}

TEST_CASE("theta reduction")
{
    ThetaChoice a = theta_reduce({1.0}, {1.0}, 0.0);
    CHECK(a.theta == doctest::Approx(3 * std::numbers::pi / 2));
    CHECK(a.g_value == doctest::Approx(-1.0));
    ThetaChoice b = theta_reduce({cplx(0, 1)}, {1.0}, 0.0);
    CHECK(b.theta == doctest::Approx(std::numbers::pi));
    CHECK_THROWS_AS(theta_reduce({1.0}, {1.0}, -1.0), Characteristic);

    Gen g(23);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<cplx> a0 = {g.complex(2)};
        std::vector<double> xi = {g.uniform(-1, 1)};
        double tau = g.uniform(-1, 1);
        ThetaChoice c = theta_reduce(a0, xi, tau);
        CHECK(c.theta >= 0.0);
        CHECK(c.theta < 2 * std::numbers::pi);
        CHECK(theta_g(a0, xi, tau, c.theta) == doctest::Approx(-c.R).epsilon(1e-12));
        for (int k = 0; k < 1024; ++k)
            CHECK(c.g_value <= theta_g(a0, xi, tau, 2 * std::numbers::pi * k / 1024) + 1e-12);
    }

    JetSpace sp = rhs_space(1, false, 4);
    RhsModel r = theta_rhs(make_rhs(Jet::variable(sp, 2)), 0.5);
    CHECK(r.N == 2);
    CHECK(r.f.space().n_x == 2);
    CHECK(r.f.space().n_zeta == 3);
    // e^{-i theta}(zeta_2 - zeta_1)
    cplx e = std::exp(cplx(0, -0.5));
    CHECK(std::abs(r.f.coeff({0, 0, 0, 0, 1}) - e) < 1e-15);
    CHECK(std::abs(r.f.coeff({0, 0, 0, 1, 0}) + e) < 1e-15);
}

TEST_CASE("renormalization")
{
    auto grid = [](auto fn, int nx = 101, int nt = 21) {
        return sample_grid(2, {-0.5, -0.1}, {0.5, 0.1}, {nx, nt}, [fn](std::span<const double> p) { return fn(p[0], p[1]); });
    };
    GridFunction Z1 = grid([](double x, double t) { return cplx(x - t); });
    GridFunction a1 = grid([](double, double) { return cplx(1.0); });
    RenormalizedField r1 = renormalize(Z1, &a1);
    CHECK(max_abs_minus(r1.b, 1.0) < 1e-12);
    CHECK(r1.max_b_minus_a_t0 < 1e-12);

    for (int nx : {101, 201}) {
        GridFunction Z = grid([](double x, double t) { return cplx(x * std::exp(-t)); }, nx, (nx - 1) / 5 + 1);
        GridFunction a = grid([](double x, double) { return cplx(x); }, nx, (nx - 1) / 5 + 1);
        RenormalizedField r = renormalize(Z, &a);
        double h = Z.spacing(0);
        double worst = 0.0;
        for (int i = 0; i < Z.n[0]; ++i)
            for (int j = 1; j < Z.n[1] - 1; ++j) worst = std::max(worst, std::abs(r.b.at(i, j) - a.at(i, j)));
        CHECK(worst < 10 * h * h);
        CHECK(r.residual <= 10 * h * h);
    }
    GridFunction flat = grid([](double, double t) { return cplx(t); });
    CHECK_THROWS_AS(renormalize(flat), SingularJacobian);
}

TEST_CASE("wf inclusion on the smooth fixture")
{
    WfReport rep = wf_inclusion_experiment(pde_fixture("smooth"), make_gevrey(2.0, 512), WfConfig{});
    CHECK(rep.scan.singular.empty());
    CHECK(rep.pass);
}

TEST_CASE("wf inclusion on the conormal fixture")
{
    WfReport rep = wf_inclusion_experiment(pde_fixture("conormal"), make_gevrey(2.0, 512), WfConfig{});
    CHECK(rep.pass);
    CHECK(rep.scan.singular == std::vector<int>{24, 56});
    CHECK(rep.max_distance <= rep.tolerance);
    for (double d : rep.char_distance_flipped) CHECK(d > rep.tolerance);
    CHECK(rep.a0[0] == cplx(-1.0));
}

}  // TEST_SUITE

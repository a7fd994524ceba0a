#include "dcwave/errors.hpp"
#include "dcwave/weights.hpp"
#include "gen.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

using namespace dcwave;

namespace {

// Brute-force min of m_k r^(k - shift) over k = from..K with m_k = k! (Gevrey 2), long double.
long double brute_min(double r, int from, int shift, int K = 40)
{
    long double best = std::numeric_limits<long double>::infinity(), m = 1.0L;
    for (int k = 0; k <= K; ++k) {
        if (k > 0) m *= k;
        if (k >= from) best = std::min(best, m * std::pow((long double)r, k - shift));
    }
    return best;
}

bool has_tag(const RegularityReport& r, char tag)
{
    return std::any_of(r.failures.begin(), r.failures.end(), [&](auto& f) { return f.first == tag; });
}

}  // namespace

TEST_SUITE("weights") {

TEST_CASE("gevrey table values")
{
    WeightSequence seq = make_gevrey(2.0, 64);
    CHECK(seq.K_max == 64);
    CHECK(seq.m(0) == 1.0);
    CHECK(seq.m(1) == 1.0);
    CHECK(seq.m(2) == doctest::Approx(2.0).epsilon(1e-14));
    for (int k = 0; k <= 20; ++k) CHECK(seq.m(k) == doctest::Approx(std::tgamma(k + 1.0)).epsilon(1e-12));
    CHECK(seq.log_M(5) == doctest::Approx(2 * std::lgamma(6.0)).epsilon(1e-14));
}

TEST_CASE("constructor preconditions")
{
    CHECK_THROWS_AS(make_gevrey(1.0, 64), std::invalid_argument);
    CHECK_THROWS_AS(make_gevrey(2.0, 7), std::invalid_argument);
    CHECK_THROWS_AS(make_table({1, 1, 2}, 8), std::invalid_argument);
    std::vector<double> v(10, 1.0);
    v[3] = -1.0;
    CHECK_THROWS_AS(make_table(v), std::invalid_argument);
}

TEST_CASE("regularity")
{
    CHECK(check_regularity(make_gevrey(2.0, 64)).passed);
    CHECK(check_regularity(make_gevrey(1.5, 256)).passed);

    // M_k = k!, so m_k = 1: fails divergence only.
    std::vector<double> fact(65);
    for (int k = 0; k <= 64; ++k) fact[k] = std::tgamma(k + 1.0);
    RegularityReport flat = check_regularity(make_table(fact));
    CHECK_FALSE(flat.passed);
    CHECK(has_tag(flat, 'd'));
    CHECK_FALSE(has_tag(flat, 'a'));
    CHECK_FALSE(has_tag(flat, 'b'));

    // m = 1, 1, 0.5, ...: decreasing term.
    std::vector<double> dec(65);
    for (int k = 0; k <= 64; ++k) dec[k] = std::tgamma(k + 1.0) * (k >= 2 ? 0.5 : 1.0);
    RegularityReport bad = check_regularity(make_table(dec));
    CHECK_FALSE(bad.passed);
    CHECK(has_tag(bad, 'b'));

    std::vector<double> unnorm = fact;
    for (int k = 0; k <= 64; ++k) unnorm[k] *= 2.0 * std::tgamma(k + 1.0);
    CHECK(has_tag(check_regularity(make_table(unnorm)), 'a'));
}

TEST_CASE("table matches gevrey")
{
    std::vector<double> M(41);
    for (int k = 0; k <= 40; ++k) M[k] = std::pow(std::tgamma(k + 1.0), 2.0);
    WeightSequence t = make_table(M), g = make_gevrey(2.0, 40);
    for (double r : {0.05, 0.2, 0.5, 1.0, 3.0}) {
        CHECK(assoc(t, Assoc::h, r) == doctest::Approx(assoc(g, Assoc::h, r)).epsilon(1e-12));
        CHECK(bigN(t, r) == bigN(g, r));
    }
}

TEST_CASE("associated function examples")
{
    WeightSequence seq = make_gevrey(2.0, 64);
    CHECK(assoc(seq, Assoc::h1, 2.0) == 1.0);
    CHECK(assoc(seq, Assoc::h, 0.5) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(assoc(seq, Assoc::h, 3.0) == 1.0);
    CHECK(assoc(make_gevrey(1.5, 64), Assoc::h, 3.0) == 1.0);
    CHECK(bigN(seq, 1.5) == 0);
    CHECK(bigN(seq, 0.4) == 2);
    for (int n = 1; n <= 10; ++n) CHECK(bigN(seq, 1.0 / (n + 1)) == n);
    CHECK_THROWS_AS(assoc(seq, Assoc::h, -1.0), std::invalid_argument);
}

TEST_CASE("associated functions against brute force")
{
    WeightSequence seq = make_gevrey(2.0, 64);
    Gen gen(11);
    for (int i = 0; i < 200; ++i) {
        double r = gen.log_uniform(0.08, 20.0);
        CHECK(assoc(seq, Assoc::h, r) == doctest::Approx((double)brute_min(r, 0, 0)).epsilon(1e-12));
        CHECK(assoc(seq, Assoc::h1, r) == doctest::Approx((double)brute_min(r, 1, 1)).epsilon(1e-12));
    }
}

TEST_CASE("guard")
{
    WeightSequence seq = make_gevrey(2.0, 16);
    CHECK_THROWS_AS(assoc(seq, Assoc::h, 1e-3), GuardExceeded);
    CHECK_THROWS_AS(bigN(seq, 1e-3), GuardExceeded);
    CHECK(bigN_capped(seq, 1e-3, 10) == 10);
    CHECK_THROWS_AS(bigN_capped(seq, 1e-3, 16), GuardExceeded);
    CHECK(bigN_capped(seq, 0.4, 10) == 2);
    double rmin = certified_r_min(seq);
    CHECK_NOTHROW(assoc(seq, Assoc::h, rmin));
}

TEST_CASE("properties on random r")
{
    Gen gen(7);
    for (double s : {1.5, 2.0, 3.0}) {
        WeightSequence seq = make_gevrey(s, 256);
        double rmin = certified_r_min(seq);
        std::vector<double> rs;
        for (int i = 0; i < 300; ++i) rs.push_back(gen.log_uniform(rmin, 50.0));
        std::sort(rs.begin(), rs.end());
        for (std::size_t i = 0; i < rs.size(); ++i) {
            double r = rs[i];
            double h = assoc(seq, Assoc::h, r);
            CHECK(h <= 1.0);
            if (r >= 1.0) {
                CHECK(assoc(seq, Assoc::h1, r) == 1.0);
                CHECK(bigN(seq, r) == 0);
            }
            if (i > 0) {
                CHECK(bigN(seq, r) <= bigN(seq, rs[i - 1]));
                CHECK(h >= assoc(seq, Assoc::h, rs[i - 1]));
            }
            // m_k r^k <= m_n r^n for n <= k <= N(r).
            int N = bigN(seq, r);
            int n = gen.integer(0, N), k = gen.integer(n, N);
            CHECK(seq.log_m[k] + k * std::log(r) <= seq.log_m[n] + n * std::log(r));
        }
    }
}

TEST_CASE("envelope")
{
    WeightSequence seq = make_gevrey(2.0, 128);
    CHECK(fbi_envelope(seq, 1.0, 1.0) == 1.0);
    CHECK(fbi_envelope(seq, 1.0, 4.0) == doctest::Approx(0.25).epsilon(1e-14));
    Gen gen(3);
    for (int i = 0; i < 100; ++i) {
        double A = gen.log_uniform(0.1, 10.0), l1 = gen.log_uniform(1.0, 100.0), l2 = l1 * gen.uniform(1.0, 4.0);
        CHECK(fbi_envelope(seq, A, l2) <= fbi_envelope(seq, A, l1));
        // E(A, lambda) = A E(1, lambda / A)
        CHECK(log_fbi_envelope(seq, A, l1) ==
              doctest::Approx(std::log(A) + log_fbi_envelope(seq, 1.0, l1 / A)).epsilon(1e-12));
    }
    // Faster than any power: lambda^p E(1, lambda) falls on a growing grid.
    for (int p = 1; p <= 4; ++p) {
        double prev = std::pow(64.0, p) * fbi_envelope(seq, 1.0, 64.0);
        double last = std::pow(4096.0, p) * fbi_envelope(seq, 1.0, 4096.0);
        CHECK(last < prev);
        CHECK(last < 1e-6 * std::pow(4096.0, p));
    }
    CHECK_THROWS_AS(fbi_envelope(make_gevrey(2.0, 16), 1.0, 1e4), GuardExceeded);
}

TEST_CASE("absorption")
{
    WeightSequence big = make_gevrey(2.0, 2048);
    for (int n = 1; n <= 3; ++n) {
        AbsorptionFit f = absorption_fit(big, n, 1e-3, 1.0);
        CHECK(f.passed);
        CHECK(f.C <= 1024.0);
        CHECK(f.r_lo == doctest::Approx(1e-3));
    }
    WeightSequence small = make_gevrey(2.0, 64);
    AbsorptionFit f = absorption_fit(small, 2, 1e-3, 1.0);
    CHECK(f.r_lo >= certified_r_min(small));
}

}  // TEST_SUITE

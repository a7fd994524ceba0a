#include "dcwave/dynkin.hpp"
#include "dcwave/fbi.hpp"

#include <doctest.h>
#include <omp.h>

using namespace dcwave;

namespace {

struct Threads {
    int saved = omp_get_max_threads();
    explicit Threads(int n) { omp_set_num_threads(n); }
    ~Threads() { omp_set_num_threads(saved); }
};

}  // namespace

TEST_SUITE("parallel") {

TEST_CASE("wavefront scan matches the serial reference bitwise")
{
    Threads guard(4);
    WeightSequence seq = make_gevrey(2.0, 512);
    ScanConfig cfg;
    cfg.n_directions = 16;
    double x[2] = {0.0, 0.0};
    GridFunction u = fbi_fixture("conormal2d");
    ScanResult p = wavefront_scan(u, x, cfg, seq), s = wavefront_scan_serial(u, x, cfg, seq);
    REQUIRE(p.reports.size() == s.reports.size());
    for (std::size_t k = 0; k < p.reports.size(); ++k) {
        CHECK(p.reports[k].values == s.reports[k].values);
        CHECK(p.reports[k].errors == s.reports[k].errors);
        CHECK(p.reports[k].growth_ratio == s.reports[k].growth_ratio);
        CHECK(p.reports[k].passed == s.reports[k].passed);
    }
    CHECK(p.singular == s.singular);
}

TEST_CASE("flatness sampling matches the serial reference bitwise")
{
    Threads guard(4);
    JetSpace sp = make_space(1, 0, 16);
    Jet f(sp);
    for (int m = 0; m <= 8; ++m) f.set({2 * m}, m % 2 ? -1.0 : 1.0);
    VectorFieldJet L = field_from(sp, {Jet::variable(sp, 0)});
    WeightSequence seq = make_gevrey(2.0, 1024);
    ApproxSolution sol(formal_solution(L, f, 16), seq, 2.0, make_kernel());
    auto p = sample_flatness(sol, L, -0.5, 0.5, 9, 1e-3, 8);
    auto s = sample_flatness_serial(sol, L, -0.5, 0.5, 9, 1e-3, 8);
    REQUIRE(p.size() == s.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        CHECK(p[i].t == s[i].t);
        CHECK(p[i].sup_Lu == s[i].sup_Lu);
    }
}

}  // TEST_SUITE

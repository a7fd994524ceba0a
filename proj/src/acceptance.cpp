#include "dcwave/acceptance.hpp"

#include "dcwave/dynkin.hpp"
#include "dcwave/errors.hpp"
#include "dcwave/fbi.hpp"
#include "dcwave/pde.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <sstream>

namespace dcwave {

namespace {

// Tolerances and limits are fixed here; changing any of them changes the acceptance contract.
constexpr double kWeightsAbsorptionCmax = 1024.0;
constexpr int kWeightsMonotoneTrials = 1000;
constexpr double kKernelRelTol = 1e-8;
constexpr double kOracleTol = 1e-12;
constexpr double kFlatnessQmax = 256.0;
constexpr double kGaussianRelTol = 1e-6;
constexpr double kPhaseC0Min = 0.5;
constexpr double kRenormTol = 1e-4;
constexpr double kChainTol = 1e-4;
constexpr double kChainFloor = 1e-10;
constexpr double kChainRatioLo = 3.0;
constexpr double kChainRatioHi = 5.0;
constexpr double kTimeLimit[kCriterionCount + 1] = {0, 1, 1, 1, 30, 5, 10, 60, 10, 10, 5};

const char* const kNames[kCriterionCount + 1] = {"",
                                                "weights suite",
                                                "kernel reproduction",
                                                "formal-solution oracles",
                                                "flatness",
                                                "fbi gaussian",
                                                "classification",
                                                "wf in char",
                                                "phase bound",
                                                "renormalization",
                                                "chain identity"};

std::string g(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

std::vector<double> logspace(double a, double b, int n)
{
    std::vector<double> r(n);
    for (int i = 0; i < n; ++i) r[i] = a * std::pow(b / a, n == 1 ? 0.0 : double(i) / (n - 1));
    return r;
}

bool c1(json& data, std::string& detail)
{
    WeightSequence seq = make_gevrey(2.0, 64);
    bool ok = true;

    int bad_exact = 0;
    for (double r : logspace(1.0, 10.0, 20))
        if (assoc(seq, Assoc::h1, r) != 1.0 || bigN(seq, r) != 0) ++bad_exact;
    ok = ok && bad_exact == 0;
    int n04 = bigN(seq, 0.4);
    ok = ok && n04 == 2;

    std::mt19937_64 rng(20260101);
    std::uniform_real_distribution<double> logr(std::log(0.02), std::log(10.0));
    int monotone_bad = 0, trials = 0;
    while (trials < kWeightsMonotoneTrials) {
        double r = std::exp(logr(rng));
        int N = bigN(seq, r);
        std::uniform_int_distribution<int> pick(0, N);
        int n = pick(rng), k = pick(rng);
        if (n > k) std::swap(n, k);
        double lk = seq.log_m[k] + k * std::log(r);
        double ln = seq.log_m[n] + n * std::log(r);
        if (std::exp(lk) > std::exp(ln)) ++monotone_bad;
        ++trials;
    }
    ok = ok && monotone_bad == 0;

    json abs = json::array();
    WeightSequence big = make_gevrey(2.0, 2048);
    for (int n = 1; n <= 3; ++n) {
        for (auto [s, lo] : {std::pair<const WeightSequence*, double>{&seq, 1.0 / 64}, {&big, 1e-3}}) {
            AbsorptionFit f = absorption_fit(*s, n, lo, 1.0, 200, 10, kWeightsAbsorptionCmax);
            ok = ok && f.passed && f.C <= kWeightsAbsorptionCmax;
            abs.push_back({{"K_max", s->K_max}, {"n", n}, {"Q", f.Q}, {"C", f.C}, {"r_lo", f.r_lo},
                           {"r_hi", f.r_hi}, {"passed", f.passed}});
        }
    }
    data = {{"exact_failures", bad_exact}, {"N_0_4", n04}, {"monotone_trials", trials},
            {"monotone_failures", monotone_bad}, {"absorption", abs}};
    detail = "N(0.4)=" + std::to_string(n04) + " monotone failures " + std::to_string(monotone_bad) + "/" +
             std::to_string(trials) + " exact failures " + std::to_string(bad_exact);
    return ok;
}

bool c2(json& data, std::string& detail)
{
    DynkinKernel K = make_kernel();
    double worst = 0.0;
    for (double t : {0.1, -0.1, 0.01, -0.01}) {
        for (int k = 0; k <= 8; ++k) {
            std::vector<cplx> p(k + 1, 0.0);
            p[k] = 1.0;
            double exact = std::pow(t, k);
            worst = std::max(worst, std::abs(kernel_apply_poly(K, p, t) - exact) / std::abs(exact));
        }
    }
    data = {{"max_rel_error", worst}, {"normalization_residual", K.normalization_residual}};
    detail = "max rel error " + g(worst);
    return worst <= kKernelRelTol;
}

bool c3(json& data, std::string& detail)
{
    JetSpace sp = make_space(1, 0, 16);
    Jet x = Jet::variable(sp, 0);
    double worst = 0.0, worst_res = 0.0;

    // (x - t)^2 under d_t + d_x: u_0 = x^2, u_1 = -2x, u_2 = 1.
    {
        VectorFieldJet L = field_from(sp, {Jet::constant(sp, 1.0)});
        FormalSeries s = formal_solution(L, x * x, 12);
        for (int k = 0; k <= 12; ++k) {
            Jet e(sp);
            if (k == 0) e = x * x;
            if (k == 1) e = x * cplx(-2.0);
            if (k == 2) e = Jet::constant(sp, 1.0);
            worst = std::max(worst, s.u[k].max_abs_diff(e));
        }
        for (int n = 0; n <= 6; ++n) worst_res = std::max(worst_res, residual_check(s, n));
    }
    // x e^{-t} under d_t + x d_x: u_k = (-1)^k x / k!.
    {
        VectorFieldJet L = field_from(sp, {x});
        FormalSeries s = formal_solution(L, x, 12);
        for (int k = 0; k <= 12; ++k) {
            Jet e = x * cplx((k % 2 ? -1.0 : 1.0) / std::tgamma(k + 1.0));
            worst = std::max(worst, s.u[k].max_abs_diff(e));
        }
        for (int n = 0; n <= 6; ++n) worst_res = std::max(worst_res, residual_check(s, n));
    }
    data = {{"max_coeff_error", worst}, {"max_residual", worst_res}};
    detail = "coeff error " + g(worst) + " residual " + g(worst_res);
    return worst <= kOracleTol && worst_res <= kOracleTol;
}

bool c4(json& data, std::string& detail)
{
    JetSpace sp = make_space(1, 0, 24);
    Jet f(sp);
    for (int m = 0; m <= 12; ++m) f.set({2 * m}, m % 2 ? -1.0 : 1.0);
    VectorFieldJet L = field_from(sp, {Jet::variable(sp, 0)});
    FormalSeries ser = formal_solution(L, f, 24);
    DynkinKernel K = make_kernel();
    bool ok = true;
    data = json::array();
    for (double s : {1.5, 2.0}) {
        WeightSequence seq = make_gevrey(s, 4096);
        GrowthEstimate ge = growth_fit(ser, seq, Box{{-0.5}, {0.5}});
        ApproxSolution sol(ser, seq, ge.C_fit, K);
        auto samples = sample_flatness(sol, L, -0.5, 0.5, 21, 1e-3, 24);
        FlatnessFit fit = flatness_fit(samples, seq);
        fit.delta = sol.delta();
        bool pass = fit.passed && fit.sup_ratio <= 1.0 && fit.Q <= kFlatnessQmax;
        ok = ok && pass;
        json j = to_json(fit);
        j["s"] = s;
        j["C_star"] = ge.C_fit;
        data.push_back(j);
        detail += "s=" + g(s) + ": Q=" + g(fit.Q) + " A=" + g(fit.A) + " ratio=" + g(fit.sup_ratio) + "; ";
    }
    return ok;
}

bool c5(json& data, std::string& detail)
{
    GridFunction u = sample_grid(1, {-8.0, 0.0}, {8.0, 0.0}, {2048, 1},
                                 [](std::span<const double> y) { return cplx(std::exp(-y[0] * y[0])); });
    double worst = 0.0;
    double x[1] = {0.0};
    for (double a : logspace(1.0, 40.0, 20)) {
        double xi[1] = {a};
        double exact = std::sqrt(std::numbers::pi / (1 + a)) * std::exp(-a * a / (4 * (1 + a)));
        worst = std::max(worst, std::abs(fbi_transform(u, x, xi) - exact) / exact);
    }
    data = {{"max_rel_error", worst}};
    detail = "max rel error " + g(worst);
    return worst <= kGaussianRelTol;
}

bool c6(json& data, std::string& detail)
{
    WeightSequence seq = make_gevrey(2.0, 512);
    ScanConfig cfg;
    double x[1] = {0.0};
    ScanResult sign = wavefront_scan(fbi_fixture("sign"), x, cfg, seq);
    ScanResult gauss = wavefront_scan(fbi_fixture("gaussian"), x, cfg, seq);
    bool sign_fails = !sign.reports[0].passed && !sign.reports[1].passed;
    bool gauss_passes = gauss.reports[0].passed && gauss.reports[1].passed;

    auto lams = lambda_grid(cfg);
    std::vector<double> e2;
    for (double l : lams) e2.push_back(fbi_envelope(seq, 2.0, l));
    DecayReport syn = decay_classify(lams, e2, seq);
    double step = std::sqrt(2.0);
    bool recovered = syn.passed && syn.A_fit && *syn.A_fit >= 2.0 / step * (1 - 1e-12) &&
                     *syn.A_fit <= 2.0 * step * (1 + 1e-12);

    data = {{"sign_growth", {sign.reports[0].growth_ratio, sign.reports[1].growth_ratio}},
            {"gaussian_growth", {gauss.reports[0].growth_ratio, gauss.reports[1].growth_ratio}},
            {"synthetic_A", syn.A_fit ? json(*syn.A_fit) : json(nullptr)}};
    detail = "sign growth " + g(sign.reports[0].growth_ratio) + "/" + g(sign.reports[1].growth_ratio) +
             " gaussian growth " + g(gauss.reports[0].growth_ratio) + "/" + g(gauss.reports[1].growth_ratio) +
             " synthetic A " + (syn.A_fit ? g(*syn.A_fit) : std::string("none"));
    return sign_fails && gauss_passes && recovered;
}

double angle_between(const std::vector<double>& a, const std::vector<double>& b)
{
    double d = std::abs(std::atan2(a[1], a[0]) - std::atan2(b[1], b[0]));
    return std::min(d, 2 * std::numbers::pi - d);
}

bool c7(json& data, std::string& detail)
{
    WeightSequence seq = make_gevrey(2.0, 512);
    WfConfig cfg;
    WfReport con = wf_inclusion_experiment(pde_fixture("conormal"), seq, cfg);
    WfReport hol = wf_inclusion_experiment(pde_fixture("holomorphic"), seq, cfg);

    double r = 1 / std::sqrt(2.0);
    std::vector<std::vector<double>> targets = {{r, -r}, {-r, r}};
    bool matched = con.scan.singular.size() == 2;
    if (matched) {
        for (std::size_t k = 0; k < 2; ++k) {
            const auto& d0 = con.scan.reports[con.scan.singular[k]].direction;
            const auto& d1 = con.scan.reports[con.scan.singular[1 - k]].direction;
            bool a = angle_between(d0, targets[0]) <= con.scan.angular_step &&
                     angle_between(d1, targets[1]) <= con.scan.angular_step;
            if (a) break;
            if (k == 1) matched = false;
        }
    }
    bool in_char = con.max_distance <= con.scan.angular_step;
    bool hol_empty = hol.scan.singular.empty();
    data = {{"conormal", to_json(con)}, {"holomorphic", to_json(hol)}};
    std::ostringstream os;
    os << "conormal singular {";
    for (std::size_t i = 0; i < con.scan.singular.size(); ++i) os << (i ? "," : "") << con.scan.singular[i];
    os << "} char distance " << g(con.max_distance) << " holomorphic singular " << hol.scan.singular.size();
    detail = os.str();
    return matched && in_char && hol_empty && con.pass && hol.pass;
}

bool c8(json& data, std::string& detail)
{
    std::vector<std::vector<double>> xs;
    for (int i = 0; i <= 10; ++i) xs.push_back({-0.1 + 0.02 * i});
    std::vector<double> ts;
    for (int j = 0; j <= 20; ++j) ts.push_back(0.01 * j);
    ConeSearch cone;
    auto run = [&](double sign) {
        PhaseSamples Z = sample_phase_map(
            1, [sign](std::span<const double> x, double t) { return std::vector<cplx>{cplx(x[0], sign * t)}; },
            xs, ts);
        return phase_bound_check(Z, cone);
    };
    PhaseBoundReport plus = run(1.0), minus = run(-1.0);
    bool plus_ok = plus.passed && plus.C0 >= kPhaseC0Min && plus.center[0] == -1.0 &&
                   plus.half_angle >= std::numbers::pi / 8 - 1e-15;
    bool minus_ok = minus.passed && minus.C0 >= kPhaseC0Min && minus.center[0] == 1.0;

    WeightSequence seq = make_gevrey(2.0, 512);
    double x0[1] = {0.0};
    ScanResult tr = wavefront_scan(fbi_fixture("trace_upper"), x0, ScanConfig{}, seq);
    // Decay side of 1/(y + 0.05i): the direction that passes while the other fails.
    double decay_side = 0.0;
    for (const auto& r : tr.reports)
        if (r.passed) decay_side += r.direction[0];
    bool unique_side = tr.reports[0].passed != tr.reports[1].passed;
    bool side_ok = unique_side && decay_side == plus.center[0];
    data = {{"plus", to_json(plus)}, {"minus", to_json(minus)}, {"trace_decay_side", decay_side},
            {"trace_growth", {tr.reports[0].growth_ratio, tr.reports[1].growth_ratio}}};
    detail = "x+it cone " + g(plus.center[0]) + " C0=" + g(plus.C0) + "; x-it cone " + g(minus.center[0]) +
             " C0=" + g(minus.C0) + "; trace decays toward " + g(decay_side);
    return plus_ok && minus_ok && side_ok;
}

bool c9(json& data, std::string& detail)
{
    JetSpace sp = make_space(1, 0, 12);
    Jet x = Jet::variable(sp, 0);
    VectorFieldJet L = field_from(sp, {x});
    FormalSeries ser = formal_solution(L, x, 12);
    WeightSequence seq = make_gevrey(2.0, 512);
    GrowthEstimate ge = growth_fit(ser, seq, Box{{-0.25}, {0.25}});
    ApproxSolution sol(ser, seq, ge.C_fit, make_kernel());

    const double h = 1e-3;
    const int nx = 501;
    GridFunction Z = sample_grid(2, {-0.25, -h}, {0.25, h}, {nx, 3}, [&](std::span<const double> p) {
        double xv[1] = {p[0]};
        return sol.evaluate(xv, p[1], {});
    });
    GridFunction a = sample_grid(2, {-0.25, -h}, {0.25, h}, {nx, 3},
                                 [](std::span<const double> p) { return cplx(p[0]); });
    RenormalizedField rf = renormalize(Z, &a);
    data = {{"max_b_minus_a_t0", rf.max_b_minus_a_t0}, {"C_star", ge.C_fit}, {"delta", sol.delta()}};
    detail = "max|b - a| at t=0 " + g(rf.max_b_minus_a_t0);
    return rf.max_b_minus_a_t0 <= kRenormTol;
}

bool c10(json& data, std::string& detail)
{
    PdeFixture fx = pde_fixture("transport");
    const JetSpace& sp = fx.model.f.space();
    std::vector<std::pair<std::string, Jet>> phis = {
        {"zeta0", Jet::variable(sp, 1)}, {"zeta1", Jet::variable(sp, 2)}, {"x1", Jet::variable(sp, 0)}};
    auto samples = [&](int nx) {
        int nt = (nx - 1) / 2 + 1;  // t range is a quarter of the x range, dt = dx / 2
        return make_solution_samples(fx.model, fx.u, {-1.0, -0.25}, {1.0, 0.25}, {nx, nt});
    };
    SolutionSamples coarse = samples(101), fine = samples(201);
    bool ok = coarse.certified && fine.certified;
    data = json::array();
    for (const auto& [name, phi] : phis) {
        ChainResult a = chain_identity_check(fx.model, coarse, phi);
        ChainResult b = chain_identity_check(fx.model, fine, phi);
        bool floor = a.residual <= kChainFloor && b.residual <= kChainFloor;
        double ratio = b.residual > 0 ? a.residual / b.residual : 0.0;
        bool conv = floor || (ratio >= kChainRatioLo && ratio <= kChainRatioHi);
        ok = ok && a.residual <= kChainTol && b.residual <= kChainTol && conv;
        data.push_back({{"phi", name}, {"residual_coarse", a.residual}, {"residual_fine", b.residual},
                        {"step_coarse", a.step}, {"step_fine", b.step}, {"ratio", ratio}});
        detail += name + ": " + g(b.residual) + " ratio " + (floor ? std::string("floor") : g(ratio)) + "; ";
    }
    return ok;
}

}  // namespace

CriterionResult run_criterion(int id)
{
    if (id < 1 || id > kCriterionCount) throw ConfigError("no acceptance criterion " + std::to_string(id));
    CriterionResult r;
    r.id = id;
    r.name = kNames[id];
    r.time_limit = kTimeLimit[id];
    auto t0 = std::chrono::steady_clock::now();
    bool ok = false;
    try {
        switch (id) {
            case 1: ok = c1(r.data, r.detail); break;
            case 2: ok = c2(r.data, r.detail); break;
            case 3: ok = c3(r.data, r.detail); break;
            case 4: ok = c4(r.data, r.detail); break;
            case 5: ok = c5(r.data, r.detail); break;
            case 6: ok = c6(r.data, r.detail); break;
            case 7: ok = c7(r.data, r.detail); break;
            case 8: ok = c8(r.data, r.detail); break;
            case 9: ok = c9(r.data, r.detail); break;
            case 10: ok = c10(r.data, r.detail); break;
        }
    } catch (const std::exception& e) {
        ok = false;
        r.detail = std::string("error: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (r.seconds > r.time_limit) {
        ok = false;
        r.detail += " [over time limit]";
    }
    r.passed = ok;
    return r;
}

std::vector<CriterionResult> run_acceptance(const std::vector<int>& ids)
{
    std::vector<CriterionResult> out;
    for (int id : ids) out.push_back(run_criterion(id));
    return out;
}

std::string format_line(const CriterionResult& r)
{
    char buf[96];
    std::snprintf(buf, sizeof buf, "%s %2d %-26s %7.3fs/%gs  ", r.passed ? "PASS" : "FAIL", r.id, r.name.c_str(),
                  r.seconds, r.time_limit);
    return buf + r.detail;
}

}  // namespace dcwave

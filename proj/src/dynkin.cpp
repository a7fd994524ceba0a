#include "dcwave/dynkin.hpp"

#include "dcwave/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace dcwave {

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w)
{
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = z;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = 1.0;
            dp = n * (z * p1 - p0) / (z * z - 1.0);
            double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
}

double DynkinKernel::psi(cplx w) const
{
    double r = std::abs(w) / epsilon;
    double q = r * r;
    if (q >= 1.0) return 0.0;
    return norm_const * std::exp(-1.0 / (1.0 - q));
}

DynkinKernel make_kernel(double epsilon, int n_r, int n_theta)
{
    if (!(epsilon > 0.0 && epsilon <= 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1]");
    if (n_r < 8 || n_theta < 8) throw std::invalid_argument("kernel resolution must be at least 8");
    DynkinKernel k;
    k.epsilon = epsilon;
    k.n_r = n_r;
    k.n_theta = n_theta;
    // int_0^eps exp(-1/(1 - rho^2/eps^2)) rho d rho = (eps^2/2)(e^{-1} + Ei(-1))
    double radial = 0.5 * epsilon * epsilon * (std::exp(-1.0) + std::expint(-1.0));
    k.norm_const = 1.0 / (2.0 * std::numbers::pi * radial);

    std::vector<double> gx, gw;
    gauss_legendre(n_r, gx, gw);
    double dtheta = 2.0 * std::numbers::pi / n_theta;
    double total = 0.0;
    for (int i = 0; i < n_r; ++i) {
        double rho = 0.5 * epsilon * (gx[i] + 1.0);
        double wr = 0.5 * epsilon * gw[i] * rho * dtheta;
        double q = rho * rho / (epsilon * epsilon);
        double psi = k.norm_const * std::exp(-1.0 / (1.0 - q));
        double dpsi = psi * (-2.0 / (epsilon * epsilon)) / ((1.0 - q) * (1.0 - q));
        for (int j = 0; j < n_theta; ++j) {
            double th = dtheta * (j + 0.5);
            k.nodes.push_back({std::polar(rho, th), wr, psi, dpsi});
            total += wr * psi;
        }
    }
    k.normalization_residual = std::abs(total - 1.0);
    if (k.normalization_residual > 1e-10)
    {
        char buf[64];
        std::snprintf(buf, sizeof buf, "normalization residual %.3g exceeds 1e-10", k.normalization_residual);
        throw QuadratureTooCoarse(buf);
    }
    return k;
}

cplx kernel_apply_poly(const DynkinKernel& kernel, std::span<const cplx> poly, double t)
{
    if (t == 0.0) throw std::invalid_argument("kernel_apply_poly needs t != 0");
    double at = std::abs(t);
    cplx acc = 0.0;
    for (const auto& nd : kernel.nodes) {
        cplx z = t + at * nd.w;
        cplx p = 0.0;
        for (auto it = poly.rbegin(); it != poly.rend(); ++it) p = p * z + *it;
        acc += nd.weight * nd.psi * p;
    }
    return acc;
}

ApproxSolution::ApproxSolution(FormalSeries series, WeightSequence seq, double C_star, DynkinKernel kernel)
    : series_(std::move(series)), seq_(std::move(seq)), C_star_(C_star), kernel_(std::move(kernel))
{
    if (!(C_star_ > 0.0)) throw std::invalid_argument("C_star must be positive");
    if (seq_.K_max < series_.n_max + 1)
        throw GuardExceeded("sequence K_max must exceed the series order");
    double e = kernel_.epsilon;
    delta_ = 1.0 / ((1.0 + e) * (1.0 + e) * C_star_);
    const JetSpace& sp = series_.u[0].space();
    deriv_.resize(sp.arity());
    for (int v = 0; v < sp.arity(); ++v)
        for (const auto& uk : series_.u) deriv_[v].push_back(uk.derivative(v));
}

int ApproxSolution::truncation_index(double t) const
{
    double e = kernel_.epsilon;
    int n = bigN_capped(seq_, (1.0 + e) * (1.0 + e) * C_star_ * std::abs(t), series_.n_max);
    return std::max(n - 1, 0);
}

int ApproxSolution::node_cap(cplx z) const
{
    double r = (1.0 + kernel_.epsilon) * C_star_ * std::abs(z);
    if (r == 0.0) return series_.n_max;
    return bigN_capped(seq_, r, series_.n_max);
}

void ApproxSolution::check_t(double t) const
{
    if (std::abs(t) > delta_ * (1.0 + 1e-12))
        throw OutOfDomain("|t|=" + std::to_string(std::abs(t)) + " exceeds t_eval_max=" + std::to_string(delta_));
}

ApproxSolution::Values ApproxSolution::tabulate(std::span<const double> x, std::span<const cplx> zeta,
                                                bool derivs) const
{
    Values v;
    for (const auto& uk : series_.u) v.u.push_back(uk.evaluate(x, zeta));
    if (derivs) {
        v.du.resize(deriv_.size());
        for (std::size_t var = 0; var < deriv_.size(); ++var)
            for (const auto& d : deriv_[var]) v.du[var].push_back(d.evaluate(x, zeta));
    }
    return v;
}

namespace {

cplx horner(const std::vector<cplx>& c, int n, cplx z)
{
    cplx s = 0.0;
    for (int k = n; k >= 0; --k) s = s * z + c[k];
    return s;
}

}  // namespace

cplx ApproxSolution::evaluate(std::span<const double> x, double t, std::span<const cplx> zeta) const
{
    check_t(t);
    Values v = tabulate(x, zeta, false);
    if (t == 0.0) return v.u[0];
    double at = std::abs(t);
    cplx acc = 0.0;
    for (const auto& nd : kernel_.nodes) {
        cplx z = t + at * nd.w;
        acc += nd.weight * nd.psi * horner(v.u, node_cap(z), z);
    }
    return acc;
}

cplx ApproxSolution::apply_L(const VectorFieldJet& L, std::span<const double> x, double t,
                             std::span<const cplx> zeta) const
{
    check_t(t);
    if (t == 0.0) throw std::invalid_argument("apply_L needs t != 0");
    if (L.time_dependent) throw std::invalid_argument("apply_L needs a time-independent field");
    const JetSpace& sp = series_.u[0].space();
    Values v = tabulate(x, zeta, true);
    double at = std::abs(t);
    double sg = t > 0.0 ? 1.0 : -1.0;
    int nv = sp.arity();

    std::vector<int> caps(kernel_.nodes.size());
    int n_min = series_.n_max;
    for (std::size_t k = 0; k < caps.size(); ++k) {
        caps[k] = node_cap(t + at * kernel_.nodes[k].w);
        n_min = std::min(n_min, caps[k]);
    }
    bool split = n_min < kernel_.n_theta;
    int base = split ? n_min : -1;

    // Terms up to the common cap form a polynomial P that the rule reproduces exactly,
    // so d/dt contributes P'(t) times the discrete mass. Only the per-node excess goes
    // through the kernel derivative, which keeps its quadrature error from being
    // amplified by 1/|t|.
    double mass = 0.0;
    cplx dt = 0.0;
    std::vector<cplx> dv(nv, 0.0);
    for (std::size_t k = 0; k < caps.size(); ++k) {
        const auto& nd = kernel_.nodes[k];
        cplx z = t + at * nd.w;
        int n = caps[k];
        mass += nd.weight * nd.psi;
        cplx excess = 0.0;
        for (int j = n; j > base; --j) excess = excess * z + v.u[j];
        if (base >= 0 && n > base) excess *= std::pow(z, base + 1);
        double grad = nd.dpsi * std::real(std::conj(nd.w) * (1.0 + sg * nd.w));
        dt += nd.weight * (-2.0 * sg * nd.psi - grad) * excess;
        for (int var = 0; var < nv; ++var) dv[var] += nd.weight * nd.psi * horner(v.du[var], n, z);
    }
    cplx Lu = dt / at;
    if (base >= 0) {
        cplx dp = 0.0;
        for (int j = base; j >= 1; --j) dp = dp * t + static_cast<double>(j) * v.u[j];
        Lu += mass * dp;
    }
    for (int i = 0; i < sp.n_x; ++i)
        if (!L.a[i].is_zero()) Lu += L.a[i].evaluate(x, zeta) * dv[i];
    for (int j = 0; j < sp.n_zeta; ++j)
        if (!L.b[j].is_zero()) Lu += L.b[j].evaluate(x, zeta) * dv[sp.n_x + j];
    return Lu;
}

cplx apply_L_numeric(const ApproxSolution& sol, const VectorFieldJet& L, std::span<const double> x,
                     double t, std::span<const cplx> zeta, double step)
{
    if (!(step > 0.0)) throw std::invalid_argument("step must be positive");
    if (t == 0.0) throw std::invalid_argument("apply_L_numeric needs t != 0");
    if (L.time_dependent) throw std::invalid_argument("apply_L_numeric needs a time-independent field");
    const JetSpace& sp = sol.series().u[0].space();
    cplx Lu = (sol.evaluate(x, t + step, zeta) - sol.evaluate(x, t - step, zeta)) / (2.0 * step);
    std::vector<double> xs(x.begin(), x.end());
    std::vector<cplx> zs(zeta.begin(), zeta.end());
    for (int i = 0; i < sp.n_x; ++i) {
        if (L.a[i].is_zero()) continue;
        xs[i] = x[i] + step;
        cplx up = sol.evaluate(xs, t, zeta);
        xs[i] = x[i] - step;
        cplx dn = sol.evaluate(xs, t, zeta);
        xs[i] = x[i];
        Lu += L.a[i].evaluate(x, zeta) * (up - dn) / (2.0 * step);
    }
    for (int j = 0; j < sp.n_zeta; ++j) {
        if (L.b[j].is_zero()) continue;
        zs[j] = zeta[j] + step;
        cplx up = sol.evaluate(x, t, zs);
        zs[j] = zeta[j] - step;
        cplx dn = sol.evaluate(x, t, zs);
        zs[j] = zeta[j];
        Lu += L.b[j].evaluate(x, zeta) * (up - dn) / (2.0 * step);
    }
    return Lu;
}

FlatnessFit flatness_fit(const std::vector<FlatnessSample>& samples, const WeightSequence& seq)
{
    if (samples.empty()) throw std::invalid_argument("flatness_fit needs samples");
    FlatnessFit fit;
    bool all_zero = std::all_of(samples.begin(), samples.end(), [](const auto& s) { return s.sup_Lu == 0.0; });
    double best_spread = std::numeric_limits<double>::infinity();
    bool any = false;
    for (int j = -4; j <= 16; ++j) {
        double Q = std::pow(2.0, j / 2.0);
        std::vector<double> lh;
        try {
            for (const auto& s : samples) lh.push_back(log_assoc(seq, Assoc::h, Q * s.t));
        } catch (const GuardExceeded&) {
            continue;
        }
        double hi = -std::numeric_limits<double>::infinity();
        double lo = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < samples.size(); ++i) {
            if (samples[i].sup_Lu == 0.0) continue;
            double r = std::log(samples[i].sup_Lu) - lh[i];
            hi = std::max(hi, r);
            lo = std::min(lo, r);
        }
        double spread = all_zero ? 0.0 : hi - lo;
        if (!any || spread < best_spread - 1e-12) {
            any = true;
            best_spread = spread;
            fit.Q = Q;
            fit.A = all_zero ? 0.0 : std::exp(hi);
            fit.h_Q_t.clear();
            for (double l : lh) fit.h_Q_t.push_back(std::exp(l));
        }
    }
    if (!any) throw FitFailed("h(Q|t|) is uncertified for every Q on the grid");
    fit.sup_ratio = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].sup_Lu == 0.0) continue;
        fit.sup_ratio = std::max(fit.sup_ratio, samples[i].sup_Lu / (fit.A * fit.h_Q_t[i]));
    }
    fit.passed = std::isfinite(fit.A) && fit.sup_ratio <= 1.0;
    return fit;
}

namespace {

std::vector<double> t_grid(double t_min, double t_max, int n_t)
{
    std::vector<double> ts(n_t);
    for (int i = 0; i < n_t; ++i)
        ts[i] = n_t == 1 ? t_min : std::exp(std::log(t_min) + (std::log(t_max) - std::log(t_min)) * i / (n_t - 1));
    if (n_t > 1) ts.back() = t_max;
    return ts;
}

double lu_job(const ApproxSolution& sol, const VectorFieldJet& L, const std::vector<double>& ts,
              double x_lo, double x_hi, int n_x, int job)
{
    int ix = job % n_x;
    int rest = job / n_x;
    double sg = rest % 2 == 0 ? 1.0 : -1.0;
    double t = sg * ts[rest / 2];
    const JetSpace& sp = sol.series().u[0].space();
    std::vector<double> x(sp.n_x, 0.0);
    x[0] = n_x == 1 ? x_lo : x_lo + (x_hi - x_lo) * ix / (n_x - 1);
    return std::abs(sol.apply_L(L, x, t, sp.zeta0));
}

std::vector<FlatnessSample> reduce(const std::vector<double>& ts, const std::vector<double>& vals, int n_x)
{
    std::vector<FlatnessSample> out;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        double m = 0.0;
        for (int j = 0; j < 2 * n_x; ++j) m = std::max(m, vals[2 * n_x * i + j]);
        out.push_back({ts[i], m});
    }
    return out;
}

}  // namespace

std::vector<FlatnessSample> sample_flatness_serial(const ApproxSolution& sol, const VectorFieldJet& L,
                                                   double x_lo, double x_hi, int n_x, double t_min, int n_t)
{
    auto ts = t_grid(t_min, sol.delta(), n_t);
    int jobs = n_t * 2 * n_x;
    std::vector<double> vals(jobs);
    for (int j = 0; j < jobs; ++j) vals[j] = lu_job(sol, L, ts, x_lo, x_hi, n_x, j);
    return reduce(ts, vals, n_x);
}

std::vector<FlatnessSample> sample_flatness(const ApproxSolution& sol, const VectorFieldJet& L,
                                            double x_lo, double x_hi, int n_x, double t_min, int n_t)
{
    auto ts = t_grid(t_min, sol.delta(), n_t);
    int jobs = n_t * 2 * n_x;
    std::vector<double> vals(jobs);
#pragma omp parallel for schedule(dynamic)
    for (int j = 0; j < jobs; ++j) vals[j] = lu_job(sol, L, ts, x_lo, x_hi, n_x, j);
    return reduce(ts, vals, n_x);
}

cplx AlmostAnalytic::value(cplx z) const
{
    double x[1] = {z.real()};
    return sol.evaluate(x, z.imag(), {});
}

cplx AlmostAnalytic::dbar(cplx z) const
{
    double x[1] = {z.real()};
    if (z.imag() == 0.0) return 0.0;
    return cplx(0.0, 0.5) * sol.apply_L(L, x, z.imag(), {});
}

VectorFieldJet field_from(const JetSpace& sp, std::vector<Jet> a, std::vector<Jet> b)
{
    VectorFieldJet L;
    L.a = std::move(a);
    L.b = std::move(b);
    while (static_cast<int>(L.a.size()) < sp.n_x) L.a.emplace_back(sp);
    while (static_cast<int>(L.b.size()) < sp.n_zeta) L.b.emplace_back(sp);
    L.validate();
    return L;
}

AlmostAnalytic almost_analytic_extend(const Jet& f, const WeightSequence& seq, const DynkinKernel& kernel,
                                      double x_lo, double x_hi, int n_max)
{
    const JetSpace& sp = f.space();
    if (sp.n_x != 1 || sp.n_zeta != 0) throw ArityMismatch("almost-analytic extension needs a one-variable jet");
    if (n_max < 0) n_max = std::min(sp.degree_budget, seq.K_max - 3);
    VectorFieldJet L = field_from(sp, {Jet::constant(sp, cplx(0.0, -1.0))});
    FormalSeries s = formal_solution(L, f, n_max);
    GrowthEstimate g = growth_fit(s, seq, Box{{x_lo}, {x_hi}});
    return AlmostAnalytic{ApproxSolution(std::move(s), seq, g.C_fit, kernel), L};
}

FlatnessRun dbar_fit(const AlmostAnalytic& ext, double x_lo, double x_hi, int n_x, double t_min, int n_t)
{
    FlatnessRun run;
    run.samples = sample_flatness(ext.sol, ext.L, x_lo, x_hi, n_x, t_min, n_t);
    for (auto& s : run.samples) s.sup_Lu *= 0.5;
    run.fit = flatness_fit(run.samples, ext.sol.seq());
    run.fit.delta = ext.sol.delta();
    return run;
}

}  // namespace dcwave

#include "dcwave/pde.hpp"

#include "dcwave/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dcwave {

JetSpace rhs_space(int N, bool time_dependent, int degree_budget)
{
    return make_space(N + (time_dependent ? 1 : 0), N + 1, degree_budget);
}

void RhsModel::validate() const
{
    const JetSpace& sp = f.space();
    if (sp.n_x != N + (time_dependent ? 1 : 0) || sp.n_zeta != N + 1)
        throw ArityMismatch("rhs jet layout does not match N and the time slot");
    if (!trust_radius.empty() && static_cast<int>(trust_radius.size()) != sp.arity())
        throw ArityMismatch("trust radius needs one entry per jet variable");
}

RhsModel make_rhs(Jet f, int N, bool time_dependent)
{
    RhsModel m;
    m.f = std::move(f);
    m.N = N;
    m.time_dependent = time_dependent;
    m.validate();
    return m;
}

namespace {

void check_trust(const RhsModel& m, std::span<const double> x, std::span<const cplx> zeta)
{
    if (m.trust_radius.empty()) return;
    const JetSpace& sp = m.f.space();
    for (int v = 0; v < sp.n_x; ++v)
        if (std::abs(x[v] - sp.x0[v]) > m.trust_radius[v])
            throw TrustBoxExceeded("x-slot " + std::to_string(v) + " leaves the trust box");
    for (int j = 0; j < sp.n_zeta; ++j)
        if (std::abs(zeta[j] - sp.zeta0[j]) > m.trust_radius[sp.n_x + j])
            throw TrustBoxExceeded("zeta-slot " + std::to_string(j) + " leaves the trust box");
}

// Derivative along one axis of a dim-2 grid: fourth order inside, second order near the edges.
GridFunction diff(const GridFunction& g, int axis)
{
    GridFunction d = g;
    d.cutoff_applied = false;
    int n0 = g.n[0], n1 = g.n[1];
    int n = g.n[axis];
    double h = g.spacing(axis);
    for (int i = 0; i < n0; ++i) {
        for (int j = 0; j < n1; ++j) {
            auto v = [&](int k) { return axis == 0 ? g.at(i + k, j) : g.at(i, j + k); };
            int p = axis == 0 ? i : j;
            cplx r;
            if (p >= 2 && p <= n - 3) r = (-v(2) + 8.0 * v(1) - 8.0 * v(-1) + v(-2)) / (12.0 * h);
            else if (p >= 1 && p <= n - 2) r = (v(1) - v(-1)) / (2.0 * h);
            else if (p == 0) r = (-3.0 * v(0) + 4.0 * v(1) - v(2)) / (2.0 * h);
            else r = (3.0 * v(0) - 4.0 * v(-1) + v(-2)) / (2.0 * h);
            d.at(i, j) = r;
        }
    }
    return d;
}

void require_n1(const RhsModel& m)
{
    m.validate();
    if (m.N != 1) throw std::invalid_argument("sampled solutions support N = 1 only");
}

struct Point {
    std::vector<double> x;
    std::vector<cplx> zeta;
};

Point point(const RhsModel& m, const SolutionSamples& s, int i, int j)
{
    Point p;
    p.x.push_back(s.u.coord(0, i));
    if (m.time_dependent) p.x.push_back(s.u.coord(1, j));
    p.zeta = {s.u.at(i, j), s.u_x.at(i, j)};
    return p;
}

}  // namespace

SolutionSamples make_solution_samples(const RhsModel& model, const ScalarField& u, std::array<double, 2> lo,
                                      std::array<double, 2> hi, std::array<int, 2> n, double tolerance)
{
    require_n1(model);
    if (n[0] < 7 || n[1] < 7) throw std::invalid_argument("solution grid needs at least 7 samples per axis");
    SolutionSamples s;
    s.tolerance = tolerance;
    s.u = sample_grid(2, lo, hi, n, [&](std::span<const double> p) { return u(p[0], p[1]); });
    s.u_x = diff(s.u, 0);
    s.u_t = diff(s.u, 1);
    double res = 0.0;
    for (int i = 2; i < n[0] - 2; ++i) {
        for (int j = 2; j < n[1] - 2; ++j) {
            Point p = point(model, s, i, j);
            check_trust(model, p.x, p.zeta);
            res = std::max(res, std::abs(s.u_t.at(i, j) - model.f.evaluate(p.x, p.zeta)));
        }
    }
    s.pde_residual = res;
    s.certified = res <= tolerance;
    return s;
}

std::vector<GridFunction> linearize(const RhsModel& model, const SolutionSamples& sol)
{
    require_n1(model);
    if (!sol.certified)
        throw Uncertified("solution residual " + std::to_string(sol.pde_residual) + " above tolerance");
    std::vector<GridFunction> out;
    for (int j = 1; j <= model.N; ++j) {
        Jet df = model.f.derivative(model.zeta_var(j));
        GridFunction a = sol.u;
        a.cutoff_applied = false;
        for (int i0 = 0; i0 < sol.u.n[0]; ++i0) {
            for (int i1 = 0; i1 < sol.u.n[1]; ++i1) {
                Point p = point(model, sol, i0, i1);
                check_trust(model, p.x, p.zeta);
                a.at(i0, i1) = df.evaluate(p.x, p.zeta);
            }
        }
        out.push_back(std::move(a));
    }
    return out;
}

CharMembership char_set(const std::vector<cplx>& a0, const std::vector<double>& covector, CharConvention conv)
{
    std::size_t N = a0.size();
    if (covector.size() != N + 1) throw ArityMismatch("covector must be (xi, tau)");
    double norm = 0.0;
    for (double c : covector) norm += c * c;
    norm = std::sqrt(norm);
    if (norm == 0.0) throw std::invalid_argument("covector must be nonzero");
    std::vector<double> v(covector);
    for (double& c : v) c /= norm;

    // Char is the kernel of the rows r1 = (Im a, 0) and r2 = (-+Re a, 1); distance = |projection on row space|.
    double sgn = conv == CharConvention::symbol ? -1.0 : 1.0;
    std::vector<double> r1(N + 1, 0.0), r2(N + 1, 0.0);
    for (std::size_t k = 0; k < N; ++k) {
        r1[k] = a0[k].imag();
        r2[k] = sgn * a0[k].real();
    }
    r2[N] = 1.0;
    auto dot = [](const std::vector<double>& p, const std::vector<double>& q) {
        double s = 0.0;
        for (std::size_t k = 0; k < p.size(); ++k) s += p[k] * q[k];
        return s;
    };
    std::vector<std::vector<double>> basis;
    for (auto r : {r1, r2}) {
        for (const auto& e : basis) {
            double c = dot(r, e);
            for (std::size_t k = 0; k <= N; ++k) r[k] -= c * e[k];
        }
        double len = std::sqrt(dot(r, r));
        if (len > 1e-12) {
            for (double& c : r) c /= len;
            basis.push_back(r);
        }
    }
    double proj = 0.0;
    for (const auto& e : basis) proj += dot(v, e) * dot(v, e);
    CharMembership m;
    m.distance = std::sqrt(proj);
    m.is_char = m.distance <= 1e-9;
    return m;
}

CharReport char_report(std::vector<double> base_point, const std::vector<cplx>& a0,
                       const std::vector<std::vector<double>>& covectors, CharConvention conv)
{
    CharReport r;
    r.base_point = std::move(base_point);
    r.a0 = a0;
    r.convention = conv;
    r.covectors = covectors;
    for (const auto& c : covectors) r.results.push_back(char_set(a0, c, conv));
    return r;
}

HamiltonianField hamiltonian_lift(const RhsModel& model)
{
    model.validate();
    const JetSpace& sp = model.f.space();
    if (model.f.max_degree() >= sp.degree_budget)
        throw BudgetExhausted("hamiltonian lift needs one spare degree in the jet budget");
    int N = model.N;
    HamiltonianField hf;
    std::vector<Jet> fz;
    for (int j = 0; j <= N; ++j) fz.push_back(model.f.derivative(model.zeta_var(j)));

    hf.h0 = model.f;
    for (int j = 1; j <= N; ++j) hf.h0 -= Jet::variable(sp, model.zeta_var(j)) * fz[j];
    for (int i = 1; i <= N; ++i)
        hf.h.push_back(model.f.derivative(i - 1) + Jet::variable(sp, model.zeta_var(i)) * fz[0]);

    auto lossy = [](const Jet& j) { return j.lossy(); };
    if (lossy(hf.h0) || std::any_of(hf.h.begin(), hf.h.end(), lossy))
        throw BudgetExhausted("hamiltonian lift truncated");

    VectorFieldJet base;
    for (int v = 0; v < sp.n_x; ++v) base.a.emplace_back(sp);
    for (int j = 1; j <= N; ++j) base.a[j - 1] = fz[j] * cplx(-1.0);
    for (int j = 0; j < sp.n_zeta; ++j) base.b.emplace_back(sp);
    base.time_dependent = model.time_dependent;
    base.time_slot = model.t_var();
    hf.H = base;
    hf.H.b[0] = hf.h0;
    for (int j = 1; j <= N; ++j) hf.H.b[j] = hf.h[j - 1];
    // Time-independent models still carry d_t in H; apply() adds it only through a time slot,
    // which is harmless since such jets do not depend on t.
    hf.base = std::move(base);
    return hf;
}

GridFunction compose(const RhsModel& model, const Jet& phi, const SolutionSamples& sol)
{
    require_n1(model);
    if (!(phi.space() == model.f.space())) throw ArityMismatch("phi must share the rhs jet space");
    GridFunction g = sol.u;
    g.cutoff_applied = false;
    for (int i = 0; i < g.n[0]; ++i) {
        for (int j = 0; j < g.n[1]; ++j) {
            Point p = point(model, sol, i, j);
            check_trust(model, p.x, p.zeta);
            g.at(i, j) = phi.evaluate(p.x, p.zeta);
        }
    }
    return g;
}

ChainResult chain_identity_check(const RhsModel& model, const SolutionSamples& sol, const Jet& phi)
{
    if (!sol.certified)
        throw Uncertified("solution residual " + std::to_string(sol.pde_residual) + " above tolerance");
    HamiltonianField hf = hamiltonian_lift(model);
    GridFunction left = compose(model, phi, sol);
    GridFunction right = compose(model, hf.H.apply(phi), sol);
    Jet a1 = model.f.derivative(model.zeta_var(1));
    double hx = sol.u.spacing(0), ht = sol.u.spacing(1);
    ChainResult r;
    r.step = hx;
    for (int i = 3; i < sol.u.n[0] - 3; ++i) {
        for (int j = 3; j < sol.u.n[1] - 3; ++j) {
            Point p = point(model, sol, i, j);
            cplx a = a1.evaluate(p.x, p.zeta);
            cplx lhs = (left.at(i, j + 1) - left.at(i, j - 1)) / (2.0 * ht) -
                       a * (left.at(i + 1, j) - left.at(i - 1, j)) / (2.0 * hx);
            r.residual = std::max(r.residual, std::abs(lhs - right.at(i, j)));
        }
    }
    return r;
}

double theta_g(const std::vector<cplx>& a0, const std::vector<double>& xi, double tau, double theta)
{
    double P = 0.0, S = tau;
    for (std::size_t k = 0; k < a0.size(); ++k) {
        P += a0[k].imag() * xi.at(k);
        S += a0[k].real() * xi.at(k);
    }
    return std::cos(theta) * P + std::sin(theta) * S;
}

ThetaChoice theta_reduce(const std::vector<cplx>& a0, const std::vector<double>& xi, double tau)
{
    if (xi.size() != a0.size()) throw ArityMismatch("xi and a0 sizes differ");
    double P = 0.0, S = tau;
    for (std::size_t k = 0; k < a0.size(); ++k) {
        P += a0[k].imag() * xi[k];
        S += a0[k].real() * xi[k];
    }
    ThetaChoice c;
    c.R = std::hypot(P, S);
    if (c.R <= 1e-12) throw Characteristic("covector satisfies both equations of the flipped characteristic set");
    double th = std::atan2(S, P) + std::numbers::pi;
    th = std::fmod(th, 2.0 * std::numbers::pi);
    if (th < 0.0) th += 2.0 * std::numbers::pi;
    c.theta = th;
    c.g_value = -c.R;
    return c;
}

RhsModel theta_rhs(const RhsModel& model, double theta)
{
    model.validate();
    const JetSpace& old = model.f.space();
    int N = model.N;
    JetSpace sp = make_space(N + 1, N + 2, old.degree_budget);
    for (int i = 0; i < old.n_x; ++i) sp.x0[i] = old.x0[i];
    for (int j = 0; j <= N; ++j) sp.zeta0[j] = old.zeta0[j];
    Jet f(sp);
    for (const auto& [alpha, c] : model.f.coeffs()) {
        MultiIndex beta(sp.arity(), 0);
        for (int i = 0; i < old.n_x; ++i) beta[i] = alpha[i];
        for (int j = 0; j <= N; ++j) beta[N + 1 + j] = alpha[old.n_x + j];
        f.set(beta, c);
    }
    Jet rot = (Jet::variable(sp, sp.arity() - 1) - f) * std::exp(cplx(0.0, -theta));
    RhsModel m;
    m.f = std::move(rot);
    m.N = N + 1;
    m.time_dependent = false;
    return m;
}

RenormalizedField renormalize(const GridFunction& Z, const GridFunction* a)
{
    Z.validate();
    if (Z.dim != 2) throw std::invalid_argument("renormalize needs Z on an (x, t) grid");
    int n0 = Z.n[0], n1 = Z.n[1];
    if (n1 < 3 || n0 < 3) throw std::invalid_argument("renormalize needs at least 3 samples per axis");
    double hx = Z.spacing(0), ht = Z.spacing(1);
    auto d2 = [&](int i, int j, int axis) -> cplx {
        int n = Z.n[axis], p = axis == 0 ? i : j;
        double h = axis == 0 ? hx : ht;
        auto v = [&](int k) { return axis == 0 ? Z.at(i + k, j) : Z.at(i, j + k); };
        if (p == 0) return (-3.0 * v(0) + 4.0 * v(1) - v(2)) / (2.0 * h);
        if (p == n - 1) return (3.0 * v(0) - 4.0 * v(-1) + v(-2)) / (2.0 * h);
        return (v(1) - v(-1)) / (2.0 * h);
    };
    RenormalizedField r;
    r.b = Z;
    r.b.cutoff_applied = false;
    double zmax = 0.0;
    for (const auto& v : Z.values) zmax = std::max(zmax, std::abs(v));
    for (int i = 0; i < n0; ++i) {
        for (int j = 0; j < n1; ++j) {
            cplx zx = d2(i, j, 0);
            if (std::abs(zx) <= 1e-12 * std::max(zmax, 1.0))
                throw SingularJacobian("Z_x vanishes at sample (" + std::to_string(i) + ", " + std::to_string(j) + ")");
            r.b.at(i, j) = -d2(i, j, 1) / zx;
        }
    }
    // Independent check with fourth-order stencils where they fit.
    for (int i = 2; i < n0 - 2; ++i) {
        for (int j = 2; j < n1 - 2; ++j) {
            cplx zx = (-Z.at(i + 2, j) + 8.0 * Z.at(i + 1, j) - 8.0 * Z.at(i - 1, j) + Z.at(i - 2, j)) / (12.0 * hx);
            cplx zt = (-Z.at(i, j + 2) + 8.0 * Z.at(i, j + 1) - 8.0 * Z.at(i, j - 1) + Z.at(i, j - 2)) / (12.0 * ht);
            r.residual = std::max(r.residual, std::abs(zt + zx * r.b.at(i, j)));
        }
    }
    if (a) {
        if (a->n != Z.n || a->lo != Z.lo || a->hi != Z.hi) throw ArityMismatch("a-grid must match the Z grid");
        r.max_b_minus_a_t0 = 0.0;
        for (int j = 0; j < n1; ++j) {
            if (std::abs(Z.coord(1, j)) > 0.5 * ht) continue;
            for (int i = 0; i < n0; ++i)
                r.max_b_minus_a_t0 = std::max(r.max_b_minus_a_t0, std::abs(r.b.at(i, j) - a->at(i, j)));
        }
    }
    return r;
}

std::vector<std::string> pde_fixture_names()
{
    return {"conormal", "holomorphic", "smooth", "burgers", "transport"};
}

PdeFixture pde_fixture(const std::string& name)
{
    JetSpace sp = rhs_space(1, false, 4);
    Jet z0 = Jet::variable(sp, 1);
    Jet z1 = Jet::variable(sp, 2);
    PdeFixture fx;
    fx.name = name;
    if (name == "conormal") {
        fx.model = make_rhs(z1 * cplx(-1.0));
        fx.u = [](double x, double t) { return cplx(std::pow(std::abs(x - t), 3)); };
        fx.description = "u_t = -u_x, u = |x - t|^3";
    } else if (name == "holomorphic") {
        fx.model = make_rhs(z1 * cplx(0.0, 1.0));
        fx.u = [](double x, double t) { return std::exp(cplx(x, t)); };
        fx.description = "u_t = i u_x, u = exp(x + i t)";
    } else if (name == "smooth") {
        fx.model = make_rhs(z1 * cplx(-1.0));
        fx.u = [](double x, double t) { return cplx((x - t) * (x - t)); };
        fx.description = "u_t = -u_x, u = (x - t)^2";
    } else if (name == "burgers") {
        fx.model = make_rhs(z0 * z1);
        fx.u = [](double x, double t) { return cplx(x / (1.0 - t)); };
        fx.description = "u_t = u u_x, u = x / (1 - t)";
    } else if (name == "transport") {
        fx.model = make_rhs(z1);
        fx.u = [](double x, double t) { return cplx(std::sin(x + t)); };
        fx.description = "u_t = u_x, u = sin(x + t)";
    } else {
        throw ConfigError("unknown pde fixture: " + name);
    }
    return fx;
}

TraceTest trace_halfspace_test(const GridFunction& trace, double x0, double im_b0, const ScanConfig& cfg,
                               const WeightSequence& seq)
{
    TraceTest tt;
    tt.im_b0 = im_b0;
    double p[1] = {x0};
    tt.scan = wavefront_scan(trace, p, cfg, seq);
    for (int d : tt.scan.singular) {
        double xi = tt.scan.reports[d].direction[0];
        if (im_b0 * xi < 0.0) tt.plus_holds = false;
        if (im_b0 * xi > 0.0) tt.minus_holds = false;
    }
    return tt;
}

namespace {

int nearest(const GridFunction& g, int axis, double v)
{
    int i = static_cast<int>(std::lround((v - g.lo[axis]) / g.spacing(axis)));
    return std::clamp(i, 0, g.n[axis] - 1);
}

}  // namespace

WfReport wf_inclusion_experiment(const RhsModel& model, const SolutionSamples& sol, const WeightSequence& seq,
                                 const WfConfig& cfg, const std::string& name)
{
    if (!sol.certified)
        throw Uncertified("solution residual " + std::to_string(sol.pde_residual) + " above tolerance");
    WfReport rep;
    rep.fixture = name;
    rep.pde_residual = sol.pde_residual;
    auto agrid = linearize(model, sol);
    int i0 = nearest(sol.u, 0, 0.0), j0 = nearest(sol.u, 1, 0.0);
    double base[2] = {sol.u.coord(0, i0), sol.u.coord(1, j0)};
    for (const auto& a : agrid) rep.a0.push_back(a.at(i0, j0));

    GridFunction u = sol.u;
    apply_cutoff(u, base, cfg.r_in, cfg.r_out);
    rep.scan = wavefront_scan(u, base, cfg.scan, seq);
    rep.tolerance = rep.scan.angular_step;
    for (int d : rep.scan.singular) {
        const auto& w = rep.scan.reports[d].direction;
        rep.char_distance.push_back(char_set(rep.a0, w, CharConvention::symbol).distance);
        rep.char_distance_flipped.push_back(char_set(rep.a0, w, CharConvention::flipped).distance);
    }
    for (double d : rep.char_distance) rep.max_distance = std::max(rep.max_distance, d);
    rep.pass = rep.max_distance <= rep.tolerance;

    GridFunction tr;
    tr.dim = 1;
    tr.lo = {sol.u.lo[0], 0.0};
    tr.hi = {sol.u.hi[0], 1.0};
    tr.n = {sol.u.n[0], 1};
    for (int i = 0; i < sol.u.n[0]; ++i) tr.values.push_back(sol.u.at(i, j0));
    double bx[1] = {base[0]};
    apply_cutoff(tr, bx, cfg.r_in, cfg.r_out);
    rep.trace = trace_halfspace_test(tr, base[0], rep.a0[0].imag(), cfg.scan, seq);
    return rep;
}

WfReport wf_inclusion_experiment(const PdeFixture& fx, const WeightSequence& seq, const WfConfig& cfg)
{
    double w = cfg.half_width;
    SolutionSamples sol = make_solution_samples(fx.model, fx.u, {-w, -w}, {w, w}, {cfg.n, cfg.n}, cfg.tolerance);
    return wf_inclusion_experiment(fx.model, sol, seq, cfg, fx.name);
}

}  // namespace dcwave

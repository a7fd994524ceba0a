#include "dcwave/fbi.hpp"

#include "dcwave/errors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace dcwave {

void GridFunction::validate() const
{
    if (dim != 1 && dim != 2) throw std::invalid_argument("grid dimension must be 1 or 2");
    for (int a = 0; a < dim; ++a) {
        if (!(hi[a] > lo[a])) throw std::invalid_argument("grid box is degenerate");
        if (n[a] < 2) throw std::invalid_argument("grid needs at least two samples per axis");
    }
    if (values.size() != size()) throw std::invalid_argument("grid value count does not match n");
}

GridFunction sample_grid(int dim, std::array<double, 2> lo, std::array<double, 2> hi, std::array<int, 2> n,
                         const GridFn& fn)
{
    GridFunction g;
    g.dim = dim;
    g.lo = lo;
    g.hi = hi;
    g.n = n;
    if (dim == 1) g.n[1] = 1;
    g.values.resize(g.size());
    int n1 = dim == 2 ? g.n[1] : 1;
    for (int i = 0; i < g.n[0]; ++i) {
        for (int j = 0; j < n1; ++j) {
            double p[2] = {g.coord(0, i), dim == 2 ? g.coord(1, j) : 0.0};
            g.at(i, j) = fn(std::span<const double>(p, dim));
        }
    }
    g.validate();
    return g;
}

double cutoff(double r, double r_in, double r_out)
{
    if (r <= r_in) return 1.0;
    if (r >= r_out) return 0.0;
    double s = (r - r_in) / (r_out - r_in);
    double a = std::exp(-1.0 / (1.0 - s));
    double b = std::exp(-1.0 / s);
    return a / (a + b);
}

void apply_cutoff(GridFunction& u, std::span<const double> center, double r_in, double r_out)
{
    int n1 = u.dim == 2 ? u.n[1] : 1;
    for (int i = 0; i < u.n[0]; ++i) {
        for (int j = 0; j < n1; ++j) {
            double d0 = u.coord(0, i) - center[0];
            double d1 = u.dim == 2 ? u.coord(1, j) - center[1] : 0.0;
            u.at(i, j) *= cutoff(std::hypot(d0, d1), r_in, r_out);
        }
    }
    u.cutoff_applied = true;
}

double boundary_max(const GridFunction& u)
{
    double m = 0.0;
    if (u.dim == 1) return std::max(std::abs(u.at(0)), std::abs(u.at(u.n[0] - 1)));
    for (int i = 0; i < u.n[0]; ++i)
        m = std::max({m, std::abs(u.at(i, 0)), std::abs(u.at(i, u.n[1] - 1))});
    for (int j = 0; j < u.n[1]; ++j)
        m = std::max({m, std::abs(u.at(0, j)), std::abs(u.at(u.n[0] - 1, j))});
    return m;
}

namespace {

template <typename T>
void put_le(std::vector<unsigned char>& buf, T v)
{
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
    buf.insert(buf.end(), b, b + sizeof(T));
}

template <typename T>
T get_le(std::istream& in, const std::string& path)
{
    unsigned char b[sizeof(T)];
    if (!in.read(reinterpret_cast<char*>(b), sizeof(T))) throw IoError("truncated grid file " + path);
    if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
    T v;
    std::memcpy(&v, b, sizeof(T));
    return v;
}

}  // namespace

void write_grid(const std::string& path, const GridFunction& u)
{
    u.validate();
    std::vector<unsigned char> buf;
    put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(u.dim));
    for (int a = 0; a < u.dim; ++a) put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(u.n[a]));
    for (int a = 0; a < u.dim; ++a) {
        put_le<double>(buf, u.lo[a]);
        put_le<double>(buf, u.hi[a]);
    }
    for (const auto& v : u.values) {
        put_le<float>(buf, static_cast<float>(v.real()));
        put_le<float>(buf, static_cast<float>(v.imag()));
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!out) throw IoError("write failed for " + path);
}

GridFunction read_grid(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("grid file not found: " + path);
    GridFunction g;
    g.dim = static_cast<int>(get_le<std::uint32_t>(in, path));
    if (g.dim != 1 && g.dim != 2) throw IoError("bad grid dimension in " + path);
    for (int a = 0; a < g.dim; ++a) g.n[a] = static_cast<int>(get_le<std::uint32_t>(in, path));
    if (g.dim == 1) g.n[1] = 1;
    for (int a = 0; a < g.dim; ++a) {
        g.lo[a] = get_le<double>(in, path);
        g.hi[a] = get_le<double>(in, path);
    }
    g.values.resize(g.size());
    for (auto& v : g.values) {
        float re = get_le<float>(in, path);
        float im = get_le<float>(in, path);
        v = cplx(re, im);
    }
    g.validate();
    return g;
}

void check_sampling(const GridFunction& u, std::span<const double> xi)
{
    double mag = 0.0;
    for (double v : xi) mag += v * v;
    mag = std::sqrt(mag);
    for (int a = 0; a < u.dim; ++a) {
        double L = 0.5 * (u.hi[a] - u.lo[a]);
        double limit = std::numbers::pi / (4.0 * (mag + std::sqrt(mag) * L));
        if (u.spacing(a) > limit)
            throw Undersampled("spacing " + std::to_string(u.spacing(a)) + " exceeds " + std::to_string(limit) +
                               " at |xi|=" + std::to_string(mag));
    }
}

namespace {

// Trapezoid weights times the one-dimensional kernel factor, using every stride-th sample.
std::vector<cplx> axis_factor(const GridFunction& u, int axis, double x, double xi, double mag, int stride)
{
    int n = u.n[axis];
    int last = (n - 1) - (n - 1) % stride;
    double h = u.spacing(axis) * stride;
    std::vector<cplx> f;
    for (int i = 0; i <= last; i += stride) {
        double d = x - u.coord(axis, i);
        double w = (i == 0 || i == last) ? 0.5 * h : h;
        f.push_back(w * std::exp(cplx(-mag * d * d, d * xi)));
    }
    return f;
}

cplx transform(const GridFunction& u, std::span<const double> x, std::span<const double> xi, int stride)
{
    double mag = 0.0;
    for (int a = 0; a < u.dim; ++a) mag += xi[a] * xi[a];
    mag = std::sqrt(mag);
    auto fa = axis_factor(u, 0, x[0], xi[0], mag, stride);
    if (u.dim == 1) {
        cplx s = 0.0;
        for (std::size_t i = 0; i < fa.size(); ++i) s += fa[i] * u.at(static_cast<int>(i) * stride);
        return s;
    }
    auto fb = axis_factor(u, 1, x[1], xi[1], mag, stride);
    cplx s = 0.0;
    for (std::size_t i = 0; i < fa.size(); ++i) {
        cplx row = 0.0;
        const cplx* r = &u.values[i * stride * static_cast<std::size_t>(u.n[1])];
        for (std::size_t j = 0; j < fb.size(); ++j) row += fb[j] * r[j * stride];
        s += fa[i] * row;
    }
    return s;
}

void check_support(const GridFunction& u)
{
    if (!u.cutoff_applied && boundary_max(u) > 1e-12)
        throw std::invalid_argument("FBI input must vanish on the box boundary or carry a cutoff");
}

}  // namespace

cplx fbi_transform(const GridFunction& u, std::span<const double> x, std::span<const double> xi)
{
    u.validate();
    check_support(u);
    check_sampling(u, xi);
    return transform(u, x, xi, 1);
}

FbiValue fbi_transform_err(const GridFunction& u, std::span<const double> x, std::span<const double> xi)
{
    cplx f = fbi_transform(u, x, xi);
    cplx g = transform(u, x, xi, 2);
    return {f, std::abs(f - g)};
}

double needed_envelope_constant(const WeightSequence& seq, double value, double lambda)
{
    if (!(value > 0.0)) return 0.0;
    // E(A) <= A, and E(A) = A once A >= lambda, so the root lies below max(value, lambda).
    double hi = std::log(std::max(value, lambda));
    double lo = std::log(1e-6);
    auto above = [&](double logA) {
        try {
            return log_fbi_envelope(seq, std::exp(logA), lambda) >= std::log(value);
        } catch (const GuardExceeded&) {
            return false;  // the table minimum overestimates E, so an uncertified value lies below it
        }
    };
    if (above(lo)) return std::exp(lo);
    for (int it = 0; it < 80 && hi - lo > 1e-13; ++it) {
        double mid = 0.5 * (lo + hi);
        if (above(mid)) hi = mid;
        else lo = mid;
    }
    return std::exp(hi);
}

DecayReport decay_classify(const std::vector<double>& lambdas, const std::vector<double>& values,
                           const WeightSequence& seq, const std::vector<double>& errors, const DecayOptions& opts)
{
    if (lambdas.size() != values.size()) throw std::invalid_argument("lambda and value counts differ");
    if (lambdas.size() < 12) throw std::invalid_argument("decay_classify needs at least 12 lambda samples");
    if (!errors.empty() && errors.size() != values.size()) throw std::invalid_argument("error count differs");
    DecayReport rep;
    rep.lambdas = lambdas;
    rep.values = values;
    rep.errors = errors;

    std::vector<std::size_t> used;
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        if (lambdas[i] < opts.lambda_min) continue;
        if (!errors.empty() && values[i] < opts.resolve_factor * errors[i]) continue;
        used.push_back(i);
    }
    rep.needed_A.assign(values.size(), 0.0);
    for (std::size_t i : used) rep.needed_A[i] = needed_envelope_constant(seq, values[i], lambdas[i]);

    for (int j = -60; j <= 32; ++j) {
        double A = std::pow(2.0, j / 2.0);
        bool ok = true;
        for (std::size_t i : used) {
            bool below = false;
            try {
                below = values[i] <= fbi_envelope(seq, A, lambdas[i]);
            } catch (const GuardExceeded&) {
                below = false;  // uncertified envelope counts as a miss
            }
            if (!below) {
                ok = false;
                break;
            }
        }
        if (ok) {
            rep.A_fit = A;
            break;
        }
    }

    double lam_top = *std::max_element(lambdas.begin(), lambdas.end());
    double top = 0.0, low = 0.0;
    for (std::size_t i : used) {
        if (lambdas[i] > 0.5 * lam_top * (1.0 + 1e-12)) top = std::max(top, rep.needed_A[i]);
        else low = std::max(low, rep.needed_A[i]);
    }
    if (top == 0.0) rep.growth_ratio = 0.0;
    else if (low == 0.0) rep.growth_ratio = std::numeric_limits<double>::infinity();
    else rep.growth_ratio = top / low;
    rep.passed = rep.A_fit.has_value() && rep.growth_ratio <= 1.0 + opts.growth_tol;
    return rep;
}

std::vector<double> lambda_grid(const ScanConfig& cfg)
{
    std::vector<double> g(cfg.n_lambda);
    for (int i = 0; i < cfg.n_lambda; ++i)
        g[i] = cfg.lambda_min * std::pow(cfg.lambda_max / cfg.lambda_min, static_cast<double>(i) / (cfg.n_lambda - 1));
    g.back() = cfg.lambda_max;
    return g;
}

std::vector<std::vector<double>> scan_directions(int dim, int n_directions)
{
    if (dim == 1) return {{1.0}, {-1.0}};
    std::vector<std::vector<double>> d;
    for (int j = 0; j < n_directions; ++j) {
        double th = 2.0 * std::numbers::pi * j / n_directions;
        d.push_back({std::cos(th), std::sin(th)});
    }
    return d;
}

namespace {

ScanResult assemble(const GridFunction& u, std::span<const double> x, const ScanConfig& cfg,
                    const WeightSequence& seq, const std::vector<FbiValue>& vals, bool parallel)
{
    auto dirs = scan_directions(u.dim, cfg.n_directions);
    auto lams = lambda_grid(cfg);
    int nd = static_cast<int>(dirs.size());
    int nl = static_cast<int>(lams.size());
    ScanResult res;
    res.reports.resize(nd);
    res.angular_step = u.dim == 1 ? std::numbers::pi : 2.0 * std::numbers::pi / nd;
    auto classify = [&](int d) {
        std::vector<double> mags(nl), errs(nl);
        for (int l = 0; l < nl; ++l) {
            mags[l] = std::abs(vals[d * nl + l].value);
            errs[l] = vals[d * nl + l].err;
        }
        DecayOptions opts = cfg.decay;
        opts.lambda_min = cfg.lambda_min;
        DecayReport r = decay_classify(lams, mags, seq, errs, opts);
        r.point.assign(x.begin(), x.end());
        r.direction = dirs[d];
        r.direction_index = d;
        res.reports[d] = std::move(r);
    };
    if (parallel) {
#pragma omp parallel for schedule(dynamic)
        for (int d = 0; d < nd; ++d) classify(d);
    } else {
        for (int d = 0; d < nd; ++d) classify(d);
    }
    for (int d = 0; d < nd; ++d)
        if (!res.reports[d].passed) res.flagged.push_back(d);
    for (int d : res.flagged) {
        if (u.dim == 1) {
            res.singular.push_back(d);
            continue;
        }
        double g = res.reports[d].growth_ratio;
        double gl = res.reports[(d + nd - 1) % nd].growth_ratio;
        double gr = res.reports[(d + 1) % nd].growth_ratio;
        if (g >= gl && g >= gr) res.singular.push_back(d);
    }
    return res;
}

FbiValue scan_job(const GridFunction& u, std::span<const double> x, const std::vector<std::vector<double>>& dirs,
                  const std::vector<double>& lams, int job)
{
    int nl = static_cast<int>(lams.size());
    const auto& w = dirs[job / nl];
    double lam = lams[job % nl];
    double xi[2] = {lam * w[0], u.dim == 2 ? lam * w[1] : 0.0};
    return fbi_transform_err(u, x, std::span<const double>(xi, u.dim));
}

void prepare(const GridFunction& u, std::span<const double> x, const ScanConfig& cfg)
{
    u.validate();
    if (static_cast<int>(x.size()) != u.dim) throw ArityMismatch("scan point dimension");
    if (cfg.n_lambda < 12) throw std::invalid_argument("scan needs at least 12 lambda samples");
    check_support(u);
    double top[2] = {cfg.lambda_max, 0.0};
    check_sampling(u, std::span<const double>(top, u.dim));
}

}  // namespace

ScanResult wavefront_scan(const GridFunction& u, std::span<const double> x, const ScanConfig& cfg,
                          const WeightSequence& seq)
{
    prepare(u, x, cfg);
    auto dirs = scan_directions(u.dim, cfg.n_directions);
    auto lams = lambda_grid(cfg);
    int jobs = static_cast<int>(dirs.size() * lams.size());
    std::vector<FbiValue> vals(jobs);
#pragma omp parallel for schedule(dynamic)
    for (int j = 0; j < jobs; ++j) vals[j] = scan_job(u, x, dirs, lams, j);
    return assemble(u, x, cfg, seq, vals, true);
}

ScanResult wavefront_scan_serial(const GridFunction& u, std::span<const double> x, const ScanConfig& cfg,
                                 const WeightSequence& seq)
{
    prepare(u, x, cfg);
    auto dirs = scan_directions(u.dim, cfg.n_directions);
    auto lams = lambda_grid(cfg);
    int jobs = static_cast<int>(dirs.size() * lams.size());
    std::vector<FbiValue> vals(jobs);
    for (int j = 0; j < jobs; ++j) vals[j] = scan_job(u, x, dirs, lams, j);
    return assemble(u, x, cfg, seq, vals, false);
}

PhaseSamples sample_phase_map(int dim, const PhaseMap& Z, const std::vector<std::vector<double>>& x,
                              const std::vector<double>& t)
{
    PhaseSamples s;
    s.dim = dim;
    s.x = x;
    s.t = t;
    for (const auto& xi : x) {
        std::vector<std::vector<cplx>> row;
        for (double tj : t) row.push_back(Z(xi, tj));
        s.z.push_back(std::move(row));
    }
    return s;
}

double phase_real(std::span<const double> xi, std::span<const double> y, std::span<const cplx> Z)
{
    double mag = 0.0;
    cplx lin = 0.0, sq = 0.0;
    for (std::size_t j = 0; j < xi.size(); ++j) {
        cplx d = y[j] - Z[j];
        mag += xi[j] * xi[j];
        lin += xi[j] * d;
        sq += d * d;
    }
    return std::real(cplx(0.0, 1.0) * lin) - std::sqrt(mag) * sq.real();
}

PhaseBoundReport phase_bound_check(const PhaseSamples& Z, const ConeSearch& cone)
{
    int dim = Z.dim;
    for (std::size_t i = 0; i < Z.x.size(); ++i) {
        for (std::size_t j = 0; j < Z.t.size(); ++j) {
            if (Z.t[j] != 0.0) continue;
            for (int a = 0; a < dim; ++a)
                if (std::abs(Z.z[i][j][a] - Z.x[i][a]) > 1e-12)
                    throw std::invalid_argument("phase map must satisfy Z(x,0) = x");
        }
    }

    std::vector<std::vector<double>> ys;
    for (int i = 0; i < cone.n_y; ++i) {
        double y0 = cone.y_lo[0] + (cone.y_hi[0] - cone.y_lo[0]) * i / (cone.n_y - 1);
        if (dim == 1) {
            ys.push_back({y0});
            continue;
        }
        for (int j = 0; j < cone.n_y; ++j)
            ys.push_back({y0, cone.y_lo[1] + (cone.y_hi[1] - cone.y_lo[1]) * j / (cone.n_y - 1)});
    }

    auto centers = scan_directions(dim, cone.n_centers);
    PhaseBoundReport best;
    bool found = false;
    for (const auto& c : centers) {
        std::vector<std::vector<double>> omegas;
        if (dim == 1) {
            omegas.push_back(c);
        } else {
            double th0 = std::atan2(c[1], c[0]);
            for (int k = 0; k < cone.n_cone; ++k) {
                double th = th0 + cone.half_angle * (2.0 * k / (cone.n_cone - 1) - 1.0);
                omegas.push_back({std::cos(th), std::sin(th)});
            }
        }
        // Largest C0 with max Re Q + C0 t/2 <= 0, i.e. min over t of -max Re Q / (t/2).
        double margin = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < Z.t.size(); ++j) {
            double t = Z.t[j];
            if (!(t > 0.0) || t > cone.t_max) continue;
            double m = -std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < Z.x.size(); ++i)
                for (const auto& y : ys)
                    for (const auto& w : omegas) m = std::max(m, phase_real(w, y, Z.z[i][j]));
            margin = std::min(margin, -m / (0.5 * t));
        }
        double C0 = 0.0;
        for (int k = 0; k <= 10; ++k) {
            double c0 = std::ldexp(1.0, -k);
            if (c0 <= margin) {
                C0 = c0;
                break;
            }
        }
        if (C0 > 0.0 && (!found || C0 > best.C0)) {
            found = true;
            best.center = c;
            best.C0 = C0;
            best.half_angle = cone.half_angle;
            best.delta = cone.t_max;
            double v = -std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < Z.t.size(); ++j) {
                double t = Z.t[j];
                if (!(t > 0.0) || t > cone.t_max) continue;
                for (std::size_t i = 0; i < Z.x.size(); ++i)
                    for (const auto& y : ys)
                        for (const auto& w : omegas)
                            v = std::max(v, phase_real(w, y, Z.z[i][j]) + 0.5 * C0 * t);
            }
            best.max_violation = v;
            best.passed = v <= 0.0;
        }
    }
    if (!found) throw NoCone("no sampled direction admits C0 >= 2^-10");
    return best;
}

std::vector<std::string> fbi_fixture_names()
{
    return {"gaussian", "sign", "trace_upper", "trace_lower", "analytic", "conormal2d", "holomorphic2d"};
}

GridFunction fbi_fixture(const std::string& name, double noise, unsigned long long seed)
{
    GridFn fn;
    int dim = 1;
    bool cut = true;
    std::array<double, 2> lo{-1.6, -1.6}, hi{1.6, 1.6};
    std::array<int, 2> n{2049, 1};
    if (name == "gaussian") {
        fn = [](std::span<const double> y) { return cplx(std::exp(-y[0] * y[0])); };
        lo = {-8.0, 0.0};
        hi = {8.0, 1.0};
        n = {4097, 1};
        cut = false;
    } else if (name == "sign") {
        fn = [](std::span<const double> y) { return cplx(y[0] > 0.0 ? 1.0 : (y[0] < 0.0 ? -1.0 : 0.0)); };
    } else if (name == "trace_upper") {
        fn = [](std::span<const double> y) { return 1.0 / cplx(y[0], 0.05); };
    } else if (name == "trace_lower") {
        fn = [](std::span<const double> y) { return 1.0 / cplx(y[0], -0.05); };
    } else if (name == "analytic") {
        fn = [](std::span<const double> y) { return cplx(1.0 / (1.0 + y[0] * y[0])); };
    } else if (name == "conormal2d") {
        fn = [](std::span<const double> y) { return cplx(std::pow(std::abs(y[0] - y[1]), 3)); };
        dim = 2;
        n = {417, 417};
    } else if (name == "holomorphic2d") {
        fn = [](std::span<const double> y) { return std::exp(cplx(y[0], y[1])); };
        dim = 2;
        n = {417, 417};
    } else {
        throw ConfigError("unknown fbi fixture: " + name);
    }
    GridFunction g = sample_grid(dim, lo, hi, n, fn);
    if (noise > 0.0) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> dist(-noise, noise);
        for (auto& v : g.values) v += cplx(dist(rng), dist(rng));
    }
    if (cut) {
        double c[2] = {0.0, 0.0};
        apply_cutoff(g, std::span<const double>(c, dim), 0.8, 1.4);
    }
    return g;
}

}  // namespace dcwave

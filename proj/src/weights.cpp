#include "dcwave/weights.hpp"

#include "dcwave/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace dcwave {

namespace {

constexpr double kTieTol = 1e-12;  // log-domain tie tolerance for argmin scans

void finish(WeightSequence& seq)
{
    seq.c_bound = 0.0;
    for (int k = 1; k < seq.K_max; ++k) {
        double v = std::exp((seq.log_m[k + 1] - seq.log_m[k]) / k);
        seq.c_bound = std::max(seq.c_bound, v);
    }
}

struct Scan {
    int argmin;
    double value;
};

// Least argmin of log m_k + k*x over k in [k_lo, k_hi], x = log of the ratio.
Scan scan(const WeightSequence& seq, double x, int k_lo, int k_hi)
{
    double best = std::numeric_limits<double>::infinity();
    for (int k = k_lo; k <= k_hi; ++k)
        best = std::min(best, seq.log_m[k] + k * x);
    for (int k = k_lo; k <= k_hi; ++k)
        if (seq.log_m[k] + k * x <= best + kTieTol)
            return {k, seq.log_m[k] + k * x};
    return {k_hi, best};
}

void guard(const WeightSequence& seq, const Scan& sc, double x, const char* what, double arg)
{
    int K = seq.K_max;
    if (sc.argmin == K && seq.log_m[K] + K * x < seq.log_m[K - 1] + (K - 1) * x)
        throw GuardExceeded(std::string(what) + " minimizer reaches K_max=" + std::to_string(K) +
                            " at argument " + std::to_string(arg));
}

}  // namespace

double WeightSequence::m(int k) const { return std::exp(log_m.at(k)); }

double WeightSequence::log_M(int k) const { return log_m.at(k) + std::lgamma(k + 1.0); }

WeightSequence make_gevrey(double s, int K_max)
{
    if (!(s > 1.0)) throw std::invalid_argument("Gevrey exponent must exceed 1");
    if (K_max < 8) throw std::invalid_argument("K_max must be at least 8");
    WeightSequence seq;
    seq.kind = WeightSequence::Kind::Gevrey;
    seq.s = s;
    seq.K_max = K_max;
    seq.log_m.resize(K_max + 1);
    for (int k = 0; k <= K_max; ++k)
        seq.log_m[k] = (s - 1.0) * std::lgamma(k + 1.0);
    finish(seq);
    return seq;
}

WeightSequence make_table(std::vector<double> values, int K_max)
{
    if (K_max < 0) K_max = static_cast<int>(values.size()) - 1;
    if (K_max < 8) throw std::invalid_argument("K_max must be at least 8");
    if (static_cast<int>(values.size()) < K_max + 1)
        throw std::invalid_argument("table needs at least K_max+1 entries");
    WeightSequence seq;
    seq.kind = WeightSequence::Kind::Table;
    seq.K_max = K_max;
    seq.log_m.resize(K_max + 1);
    for (int k = 0; k <= K_max; ++k) {
        if (!(values[k] > 0.0)) throw std::invalid_argument("table values must be positive");
        seq.log_m[k] = std::log(values[k]) - std::lgamma(k + 1.0);
    }
    seq.values = std::move(values);
    finish(seq);
    return seq;
}

RegularityReport check_regularity(const WeightSequence& seq, double d_threshold)
{
    RegularityReport rep;
    const auto& lm = seq.log_m;
    int K = seq.K_max;

    if (std::abs(lm[0]) > kTieTol) rep.failures.push_back({'a', 0});
    else if (std::abs(lm[1]) > kTieTol) rep.failures.push_back({'a', 1});

    for (int k = 1; k <= K; ++k) {
        bool convex = k == K || 2.0 * lm[k] <= lm[k - 1] + lm[k + 1] + kTieTol;
        bool monotone = lm[k] >= lm[k - 1] - kTieTol;
        if (!convex || !monotone) {
            rep.failures.push_back({'b', k});
            break;
        }
    }

    // c) proxy: (m_{k+1}/m_k)^{1/k} must not grow into the top quartile.
    int q = K - std::max(1, K / 4);
    double lower = -std::numeric_limits<double>::infinity();
    for (int k = 1; k < q; ++k) lower = std::max(lower, (lm[k + 1] - lm[k]) / k);
    for (int k = q; k < K; ++k) {
        if ((lm[k + 1] - lm[k]) / k > lower + kTieTol) {
            rep.failures.push_back({'c', k});
            break;
        }
    }

    // d) proxy: m_K^{1/K} above threshold and m_k^{1/k} strictly increasing on the top quartile.
    if (lm[K] / K < std::log(d_threshold)) {
        rep.failures.push_back({'d', K});
    } else {
        for (int k = q + 1; k <= K; ++k) {
            if (!(lm[k] / k > lm[k - 1] / (k - 1))) {
                rep.failures.push_back({'d', k});
                break;
            }
        }
    }

    rep.passed = rep.failures.empty();
    return rep;
}

double log_assoc(const WeightSequence& seq, Assoc variant, double r)
{
    if (!(r > 0.0)) throw std::invalid_argument("assoc needs r > 0");
    double x = std::log(r);
    if (variant == Assoc::h) {
        Scan sc = scan(seq, x, 0, seq.K_max);
        guard(seq, sc, x, "h", r);
        return sc.value;
    }
    Scan sc = scan(seq, x, 1, seq.K_max);
    guard(seq, sc, x, "h1", r);
    return sc.value - x;
}

double assoc(const WeightSequence& seq, Assoc variant, double r)
{
    return std::exp(log_assoc(seq, variant, r));
}

int bigN(const WeightSequence& seq, double r)
{
    if (!(r > 0.0)) throw std::invalid_argument("bigN needs r > 0");
    double x = std::log(r);
    Scan sc = scan(seq, x, 0, seq.K_max);
    guard(seq, sc, x, "N", r);
    return sc.argmin;
}

int bigN_capped(const WeightSequence& seq, double r, int cap)
{
    if (!(r > 0.0)) throw std::invalid_argument("bigN needs r > 0");
    if (cap + 1 > seq.K_max)
        throw GuardExceeded("cap " + std::to_string(cap) + " needs K_max > cap");
    Scan sc = scan(seq, std::log(r), 0, cap + 1);
    return std::min(sc.argmin, cap);
}

double certified_r_min(const WeightSequence& seq)
{
    int K = seq.K_max;
    return std::exp(seq.log_m[K - 1] - seq.log_m[K]) * (1.0 + 1e-9);
}

double log_fbi_envelope(const WeightSequence& seq, double A, double lambda)
{
    if (!(A > 0.0) || !(lambda > 0.0)) throw std::invalid_argument("envelope needs A, lambda > 0");
    double x = std::log(A) - std::log(lambda);
    int K = seq.K_max;
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (int k = 0; k <= K; ++k) {
        double v = seq.log_M(k) + k * x;
        if (v < best - kTieTol) {
            best = v;
            arg = k;
        }
    }
    if (arg == K && seq.log_M(K) + K * x < seq.log_M(K - 1) + (K - 1) * x)
        throw GuardExceeded("envelope minimizer reaches K_max at A=" + std::to_string(A) +
                            " lambda=" + std::to_string(lambda));
    return std::log(A) + best;
}

double fbi_envelope(const WeightSequence& seq, double A, double lambda)
{
    return std::exp(log_fbi_envelope(seq, A, lambda));
}

AbsorptionFit absorption_fit(const WeightSequence& seq, int n, double r_lo, double r_hi,
                             int n_samples, int j_max, double C_max)
{
    AbsorptionFit fit;
    fit.n = n;
    fit.r_lo = std::max(r_lo, certified_r_min(seq));
    fit.r_hi = r_hi;
    if (fit.r_lo > r_hi || n_samples < 2) return fit;

    std::vector<double> logs(n_samples);
    std::vector<double> lh(n_samples);
    for (int i = 0; i < n_samples; ++i) {
        double lr = std::log(fit.r_lo) + (std::log(r_hi) - std::log(fit.r_lo)) * i / (n_samples - 1);
        logs[i] = lr;
        lh[i] = log_assoc(seq, Assoc::h, std::exp(lr));
    }

    double best = std::numeric_limits<double>::infinity();
    for (int j = 1; j <= j_max; ++j) {
        double Q = std::ldexp(1.0, j);
        double worst = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < n_samples; ++i) {
            double lhq = log_assoc(seq, Assoc::h, Q * std::exp(logs[i]));
            worst = std::max(worst, -n * logs[i] + lh[i] - lhq);
        }
        if (worst < best) {
            best = worst;
            fit.Q = Q;
        }
    }
    fit.C = std::exp(best);
    fit.passed = fit.C <= C_max;
    return fit;
}

}  // namespace dcwave

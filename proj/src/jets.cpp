#include "dcwave/jets.hpp"

#include "dcwave/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace dcwave {

int total_degree(const MultiIndex& alpha)
{
    int d = 0;
    for (int a : alpha) d += a;
    return d;
}

JetSpace make_space(int n_x, int n_zeta, int degree_budget)
{
    JetSpace sp;
    sp.n_x = n_x;
    sp.n_zeta = n_zeta;
    sp.x0.assign(n_x, 0.0);
    sp.zeta0.assign(n_zeta, cplx(0.0));
    sp.degree_budget = degree_budget;
    return sp;
}

Jet::Jet(JetSpace space) : space_(std::move(space))
{
    if (static_cast<int>(space_.x0.size()) != space_.n_x ||
        static_cast<int>(space_.zeta0.size()) != space_.n_zeta)
        throw ArityMismatch("base point does not match n_x/n_zeta");
}

Jet Jet::constant(const JetSpace& space, cplx c)
{
    Jet j(space);
    j.set(MultiIndex(space.arity(), 0), c);
    return j;
}

Jet Jet::variable(const JetSpace& space, int var)
{
    if (var < 0 || var >= space.arity()) throw ArityMismatch("variable index out of range");
    cplx base = var < space.n_x ? cplx(space.x0[var]) : space.zeta0[var - space.n_x];
    Jet j = constant(space, base);
    if (space.degree_budget >= 1) {
        MultiIndex e(space.arity(), 0);
        e[var] = 1;
        j.set(e, 1.0);
    } else {
        j.lossy_ = true;
    }
    return j;
}

cplx Jet::coeff(const MultiIndex& alpha) const
{
    auto it = coeffs_.find(alpha);
    return it == coeffs_.end() ? cplx(0.0) : it->second;
}

void Jet::set(const MultiIndex& alpha, cplx c)
{
    if (static_cast<int>(alpha.size()) != space_.arity()) throw ArityMismatch("multi-index arity");
    if (total_degree(alpha) > space_.degree_budget) {
        lossy_ = lossy_ || std::abs(c) > kPrune;
        return;
    }
    if (std::abs(c) <= kPrune) coeffs_.erase(alpha);
    else coeffs_[alpha] = c;
}

int Jet::max_degree() const
{
    int d = 0;
    for (const auto& [alpha, c] : coeffs_) d = std::max(d, total_degree(alpha));
    return d;
}

cplx Jet::evaluate(std::span<const double> x, std::span<const cplx> zeta) const
{
    if (static_cast<int>(x.size()) != space_.n_x || static_cast<int>(zeta.size()) != space_.n_zeta)
        throw ArityMismatch("evaluation point arity");
    int n = space_.arity();
    int D = space_.degree_budget;
    // powers[v][p] = (v - base)^p
    std::vector<std::vector<cplx>> powers(n, std::vector<cplx>(D + 1, 1.0));
    for (int v = 0; v < n; ++v) {
        cplx d = v < space_.n_x ? cplx(x[v] - space_.x0[v]) : zeta[v - space_.n_x] - space_.zeta0[v - space_.n_x];
        for (int p = 1; p <= D; ++p) powers[v][p] = powers[v][p - 1] * d;
    }
    cplx sum = 0.0;
    for (const auto& [alpha, c] : coeffs_) {
        cplx term = c;
        for (int v = 0; v < n; ++v)
            if (alpha[v]) term *= powers[v][alpha[v]];
        sum += term;
    }
    return sum;
}

Jet Jet::derivative(int var) const
{
    if (var < 0 || var >= space_.arity()) throw ArityMismatch("derivative variable out of range");
    Jet out(space_);
    out.lossy_ = lossy_;
    for (const auto& [alpha, c] : coeffs_) {
        if (alpha[var] == 0) continue;
        MultiIndex beta = alpha;
        beta[var] -= 1;
        out.coeffs_[beta] = c * static_cast<double>(alpha[var]);
    }
    return out;
}

double Jet::max_abs_diff(const Jet& other) const
{
    check_compatible(other);
    double d = 0.0;
    for (const auto& [alpha, c] : coeffs_) d = std::max(d, std::abs(c - other.coeff(alpha)));
    for (const auto& [alpha, c] : other.coeffs_)
        if (!coeffs_.count(alpha)) d = std::max(d, std::abs(c));
    return d;
}

void Jet::check_compatible(const Jet& b) const
{
    if (!(space_ == b.space_)) throw ArityMismatch("jets differ in base point, arity or budget");
}

void Jet::prune()
{
    for (auto it = coeffs_.begin(); it != coeffs_.end();) {
        if (std::abs(it->second) <= kPrune) it = coeffs_.erase(it);
        else ++it;
    }
}

Jet& Jet::operator+=(const Jet& b)
{
    check_compatible(b);
    for (const auto& [alpha, c] : b.coeffs_) coeffs_[alpha] += c;
    lossy_ = lossy_ || b.lossy_;
    prune();
    return *this;
}

Jet& Jet::operator-=(const Jet& b)
{
    check_compatible(b);
    for (const auto& [alpha, c] : b.coeffs_) coeffs_[alpha] -= c;
    lossy_ = lossy_ || b.lossy_;
    prune();
    return *this;
}

Jet& Jet::operator*=(cplx c)
{
    for (auto& [alpha, v] : coeffs_) v *= c;
    prune();
    return *this;
}

Jet operator*(const Jet& a, const Jet& b)
{
    a.check_compatible(b);
    Jet out(a.space_);
    out.lossy_ = a.lossy_ || b.lossy_;
    int D = a.space_.degree_budget;
    int n = a.space_.arity();
    MultiIndex gamma(n);
    for (const auto& [alpha, ca] : a.coeffs_) {
        int da = total_degree(alpha);
        for (const auto& [beta, cb] : b.coeffs_) {
            if (da + total_degree(beta) > D) {
                out.lossy_ = true;
                continue;
            }
            for (int v = 0; v < n; ++v) gamma[v] = alpha[v] + beta[v];
            out.coeffs_[gamma] += ca * cb;
        }
    }
    out.prune();
    return out;
}

const JetSpace& VectorFieldJet::space() const
{
    if (!a.empty()) return a.front().space();
    if (!b.empty()) return b.front().space();
    throw ArityMismatch("vector field has no coefficients");
}

void VectorFieldJet::validate() const
{
    const JetSpace& sp = space();
    if (static_cast<int>(a.size()) != sp.n_x || static_cast<int>(b.size()) != sp.n_zeta)
        throw ArityMismatch("vector field needs one coefficient per variable");
    for (const auto& j : a)
        if (!(j.space() == sp)) throw ArityMismatch("vector field coefficients disagree");
    for (const auto& j : b)
        if (!(j.space() == sp)) throw ArityMismatch("vector field coefficients disagree");
    if (time_dependent && (time_slot < 0 || time_slot >= sp.n_x))
        throw ArityMismatch("time-dependent field needs a valid time slot");
}

Jet VectorFieldJet::apply(const Jet& phi) const
{
    validate();
    if (!(phi.space() == space())) throw ArityMismatch("field and jet disagree");
    const JetSpace& sp = space();
    Jet out(sp);
    if (time_dependent) out += phi.derivative(time_slot);
    for (int i = 0; i < sp.n_x; ++i)
        if (!a[i].is_zero()) out += a[i] * phi.derivative(i);
    for (int j = 0; j < sp.n_zeta; ++j)
        if (!b[j].is_zero()) out += b[j] * phi.derivative(sp.n_x + j);
    return out;
}

namespace {

// a.d/dx + b.d/dzeta without the time term.
Jet spatial_part(const VectorFieldJet& L, const Jet& p)
{
    const JetSpace& sp = L.space();
    Jet out(sp);
    for (int i = 0; i < sp.n_x; ++i)
        if (!L.a[i].is_zero()) out += L.a[i] * p.derivative(i);
    for (int j = 0; j < sp.n_zeta; ++j)
        if (!L.b[j].is_zero()) out += L.b[j] * p.derivative(sp.n_x + j);
    return out;
}

}  // namespace

FormalSeries formal_solution(const VectorFieldJet& L, const Jet& f, int n_max)
{
    L.validate();
    if (L.time_dependent) throw std::invalid_argument("formal_solution needs a time-independent field");
    if (!(f.space() == L.space())) throw ArityMismatch("datum and field disagree");
    int D = f.space().degree_budget;
    if (n_max > D)
        throw BudgetExhausted("n_max=" + std::to_string(n_max) + " exceeds degree budget " + std::to_string(D));
    FormalSeries s;
    s.field = L;
    s.n_max = n_max;
    s.u.push_back(f);
    s.valid_degree.push_back(D);
    for (int k = 1; k <= n_max; ++k) {
        Jet next = spatial_part(L, s.u.back());
        next *= cplx(-1.0 / k);
        s.u.push_back(std::move(next));
        s.valid_degree.push_back(D - k);
    }
    return s;
}

TimePoly truncate(const FormalSeries& s, int n)
{
    if (n < 0 || n > s.n_max) throw std::invalid_argument("truncation order out of range");
    return TimePoly(s.u.begin(), s.u.begin() + n + 1);
}

TimePoly apply_field(const VectorFieldJet& L, const TimePoly& p, bool allow_truncation)
{
    L.validate();
    if (L.time_dependent) throw std::invalid_argument("apply_field needs a time-independent field");
    TimePoly out;
    for (std::size_t m = 0; m < p.size(); ++m) {
        Jet c = spatial_part(L, p[m]);
        if (c.lossy() && !allow_truncation)
            throw BudgetExhausted("field application truncated at degree " +
                                  std::to_string(c.space().degree_budget));
        if (m + 1 < p.size()) c += p[m + 1] * cplx(static_cast<double>(m + 1));
        out.push_back(std::move(c));
    }
    return out;
}

double residual_check(const FormalSeries& s, int n)
{
    if (n + 1 > s.n_max) throw std::invalid_argument("residual_check needs n+1 <= n_max");
    TimePoly lp = apply_field(s.field, truncate(s, n), true);
    const JetSpace& sp = s.u[0].space();
    double dev = 0.0;
    for (int m = 0; m <= n; ++m) {
        Jet expect(sp);
        if (m == n) expect = s.u[n + 1] * cplx(-(n + 1.0));
        dev = std::max(dev, lp[m].max_abs_diff(expect));
    }
    return dev;
}

namespace {

void tensor_grid(const Box& box, int n_grid, std::vector<std::vector<double>>& pts)
{
    int d = static_cast<int>(box.lo.size());
    std::vector<int> idx(d, 0);
    int count = 1;
    for (int i = 0; i < d; ++i) count *= n_grid;
    for (int c = 0; c < count; ++c) {
        int rem = c;
        std::vector<double> p(d);
        for (int i = 0; i < d; ++i) {
            int k = rem % n_grid;
            rem /= n_grid;
            p[i] = n_grid == 1 ? box.lo[i] : box.lo[i] + (box.hi[i] - box.lo[i]) * k / (n_grid - 1);
        }
        pts.push_back(std::move(p));
    }
}

constexpr double kCeil = 16.0;  // log2 of the largest admissible C

double grid_up(double log_c)
{
    // smallest 2^{j/4}, j >= 0, with log 2^{j/4} >= log_c
    double j = std::ceil(4.0 * log_c / std::log(2.0) - 1e-9);
    j = std::max(j, 0.0);
    if (j / 4.0 > kCeil) throw FitFailed("growth constant exceeds 2^16");
    return std::pow(2.0, j / 4.0);
}

}  // namespace

double fit_growth_constant(const std::vector<double>& sup_u, const WeightSequence& seq)
{
    double need = 0.0;
    for (std::size_t k = 0; k < sup_u.size(); ++k) {
        if (!(sup_u[k] > 0.0)) continue;
        if (static_cast<int>(k) > seq.K_max) throw GuardExceeded("growth fit needs K_max >= n_max");
        double lhs = std::log(sup_u[k]) - seq.log_M(static_cast<int>(k)) + std::lgamma(k + 1.0);
        need = std::max(need, lhs / (1.0 + k));
    }
    return grid_up(need);
}

GrowthEstimate growth_fit(const FormalSeries& s, const WeightSequence& seq, const Box& box,
                          int max_alpha, int n_grid)
{
    const JetSpace& sp = s.u[0].space();
    if (static_cast<int>(box.lo.size()) != sp.n_x || box.hi.size() != box.lo.size())
        throw ArityMismatch("growth box must cover every x-slot");
    std::vector<std::vector<double>> pts;
    tensor_grid(box, n_grid, pts);

    GrowthEstimate est;
    est.box = box;
    est.max_alpha = max_alpha;
    double need = 0.0;
    std::vector<double> sup_u(s.n_max + 1, 0.0);
    for (int k = 0; k <= s.n_max; ++k) {
        for (int i = 0; i < std::max(sp.n_x, 1); ++i) {
            Jet d = s.u[k];
            for (int order = 0; order <= max_alpha; ++order) {
                if (order > 0) {
                    if (sp.n_x == 0) break;
                    d = d.derivative(i);
                }
                double sup = 0.0;
                for (const auto& p : pts) sup = std::max(sup, std::abs(d.evaluate(p, sp.zeta0)));
                if (order == 0) sup_u[k] = sup;
                if (!(sup > 0.0)) continue;
                int idx = order + k;
                if (idx > seq.K_max) throw GuardExceeded("growth fit needs K_max >= n_max + max_alpha");
                double lhs = std::log(sup) - seq.log_M(idx) + std::lgamma(k + 1.0);
                need = std::max(need, lhs / (1.0 + order + k));
            }
        }
    }
    est.C_fit = grid_up(need);

    double logB = 0.0;
    for (int n = 0; n + 1 <= s.n_max; ++n) {
        double r = (n + 1.0) * sup_u[n + 1];
        if (r > 0.0) logB = std::max(logB, (std::log(r) - seq.log_m.at(n)) / (n + 1.0));
    }
    est.B_fit = std::exp(logB);
    return est;
}

VectorFieldJet time_augment(const VectorFieldJet& L)
{
    L.validate();
    VectorFieldJet out = L;
    if (L.time_dependent) {
        out.a[L.time_slot] = Jet::constant(L.space(), 1.0);
        out.time_dependent = false;
        out.time_slot = -1;
        return out;
    }
    // Time-independent input: append a new x-slot with unit coefficient.
    const JetSpace& old = L.space();
    JetSpace sp = old;
    sp.n_x += 1;
    sp.x0.push_back(0.0);
    auto lift = [&](const Jet& j) {
        Jet r(sp);
        for (const auto& [alpha, c] : j.coeffs()) {
            MultiIndex beta(alpha.begin(), alpha.begin() + old.n_x);
            beta.push_back(0);
            beta.insert(beta.end(), alpha.begin() + old.n_x, alpha.end());
            r.set(beta, c);
        }
        return r;
    };
    out.a.clear();
    out.b.clear();
    for (const auto& j : L.a) out.a.push_back(lift(j));
    out.a.push_back(Jet::constant(sp, 1.0));
    for (const auto& j : L.b) out.b.push_back(lift(j));
    return out;
}

Jet restrict_diagonal(const FormalSeries& s, int slot)
{
    const JetSpace& sp = s.u[0].space();
    Jet t = Jet::variable(sp, slot);
    Jet power = Jet::constant(sp, 1.0);
    Jet out(sp);
    for (int k = 0; k <= s.n_max; ++k) {
        out += s.u[k] * power;
        power = power * t;
    }
    return out;
}

}  // namespace dcwave

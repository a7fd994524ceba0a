#pragma once

#include "dcwave/weights.hpp"

#include <complex>
#include <map>
#include <optional>
#include <span>
#include <vector>

namespace dcwave {

using cplx = std::complex<double>;
using MultiIndex = std::vector<int>;

// Variable layout: x-slots first (indices 0..n_x-1), then zeta-slots.
struct JetSpace {
    int n_x = 0;
    int n_zeta = 0;
    std::vector<double> x0;
    std::vector<cplx> zeta0;
    int degree_budget = 0;

    int arity() const { return n_x + n_zeta; }
    bool operator==(const JetSpace&) const = default;
};

JetSpace make_space(int n_x, int n_zeta, int degree_budget);

// Truncated Taylor polynomial in shifted variables (x - x0, zeta - zeta0).
class Jet {
public:
    static constexpr double kPrune = 1e-30;

    Jet() = default;
    explicit Jet(JetSpace space);

    static Jet constant(const JetSpace& space, cplx c);
    // The coordinate function of variable var (includes its base-point value).
    static Jet variable(const JetSpace& space, int var);

    const JetSpace& space() const { return space_; }
    const std::map<MultiIndex, cplx>& coeffs() const { return coeffs_; }
    cplx coeff(const MultiIndex& alpha) const;
    void set(const MultiIndex& alpha, cplx c);

    bool lossy() const { return lossy_; }
    bool is_zero() const { return coeffs_.empty(); }
    int max_degree() const;

    cplx evaluate(std::span<const double> x, std::span<const cplx> zeta) const;
    Jet derivative(int var) const;
    double max_abs_diff(const Jet& other) const;

    Jet& operator+=(const Jet& b);
    Jet& operator-=(const Jet& b);
    Jet& operator*=(cplx c);

    friend Jet operator+(Jet a, const Jet& b) { return a += b; }
    friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
    friend Jet operator*(Jet a, cplx c) { return a *= c; }
    friend Jet operator*(cplx c, Jet a) { return a *= c; }
    friend Jet operator*(const Jet& a, const Jet& b);

private:
    void check_compatible(const Jet& b) const;
    void prune();

    JetSpace space_;
    std::map<MultiIndex, cplx> coeffs_;
    bool lossy_ = false;
};

int total_degree(const MultiIndex& alpha);

struct VectorFieldJet {
    std::vector<Jet> a;   // coefficients of d/dx_i, one per x-slot
    std::vector<Jet> b;   // coefficients of d/dzeta_j, one per zeta-slot
    bool time_dependent = false;
    int time_slot = -1;   // x-slot carrying t when time_dependent

    const JetSpace& space() const;
    void validate() const;
    // a.d/dx + b.d/dzeta applied to phi, plus d/dt phi through the time slot when time dependent.
    Jet apply(const Jet& phi) const;
};

struct FormalSeries {
    std::vector<Jet> u;            // u_0..u_{n_max}
    int n_max = 0;
    std::vector<int> valid_degree; // D - k
    VectorFieldJet field;
};

// Coefficients (in t) of a polynomial with jet coefficients.
using TimePoly = std::vector<Jet>;

FormalSeries formal_solution(const VectorFieldJet& L, const Jet& f, int n_max);
TimePoly truncate(const FormalSeries& s, int n);
TimePoly apply_field(const VectorFieldJet& L, const TimePoly& p, bool allow_truncation = false);
double residual_check(const FormalSeries& s, int n);

struct Box {
    std::vector<double> lo;
    std::vector<double> hi;
};

struct GrowthEstimate {
    double C_fit = 0.0;
    double B_fit = 0.0;
    Box box;
    int max_alpha = 0;
};

// Samples u_k and pure x-derivatives up to order max_alpha on a tensor grid over the x-box.
GrowthEstimate growth_fit(const FormalSeries& s, const WeightSequence& seq, const Box& box,
                          int max_alpha = 2, int n_grid = 21);

// Variant for pre-tabulated sup norms: sup_u[k] = sup|u_k| (alpha = 0 only).
double fit_growth_constant(const std::vector<double>& sup_u, const WeightSequence& seq);

VectorFieldJet time_augment(const VectorFieldJet& L);
// F(x, t) = sum_k u_k(x, t) t^k where t is the augmented slot.
Jet restrict_diagonal(const FormalSeries& s, int slot);

}  // namespace dcwave

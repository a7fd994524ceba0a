#pragma once

#include "dcwave/jets.hpp"
#include "dcwave/weights.hpp"

#include <complex>
#include <span>
#include <vector>

namespace dcwave {

struct KernelNode {
    cplx w;
    double weight;  // quadrature weight for dA
    double psi;     // psi(w)
    double dpsi;    // d psi / d rho divided by rho, so grad psi . v = dpsi * Re(conj(w) v)
};

struct DynkinKernel {
    double epsilon = 0.5;
    int n_r = 64;
    int n_theta = 64;
    double norm_const = 0.0;
    std::vector<KernelNode> nodes;
    double normalization_residual = 0.0;

    double psi(cplx w) const;
};

// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w);

DynkinKernel make_kernel(double epsilon = 0.5, int n_r = 64, int n_theta = 64);

// (i / 2t^2) int psi((z - t)/|t|) P(z) dz ^ dzbar with P given by ascending coefficients.
cplx kernel_apply_poly(const DynkinKernel& kernel, std::span<const cplx> poly, double t);

class ApproxSolution {
public:
    ApproxSolution(FormalSeries series, WeightSequence seq, double C_star, DynkinKernel kernel);

    const FormalSeries& series() const { return series_; }
    const WeightSequence& seq() const { return seq_; }
    const DynkinKernel& kernel() const { return kernel_; }
    double C_star() const { return C_star_; }
    double epsilon() const { return kernel_.epsilon; }
    double delta() const { return delta_; }
    double t_eval_max() const { return delta_; }
    // n = N((1+eps)^2 C |t|) - 1, floored at zero.
    int truncation_index(double t) const;

    cplx evaluate(std::span<const double> x, double t, std::span<const cplx> zeta) const;
    // Lu with the time derivative taken through the kernel; the field must be time independent.
    cplx apply_L(const VectorFieldJet& L, std::span<const double> x, double t,
                 std::span<const cplx> zeta) const;

private:
    struct Values {
        std::vector<cplx> u;                 // u_k(x, zeta)
        std::vector<std::vector<cplx>> du;   // d u_k / d var, var over all slots
    };
    Values tabulate(std::span<const double> x, std::span<const cplx> zeta, bool derivs) const;
    int node_cap(cplx z) const;
    void check_t(double t) const;

    FormalSeries series_;
    WeightSequence seq_;
    double C_star_;
    DynkinKernel kernel_;
    double delta_;
    std::vector<std::vector<Jet>> deriv_;  // deriv_[var][k]
};

// Central differences of evaluate composed with the coefficients of L.
cplx apply_L_numeric(const ApproxSolution& sol, const VectorFieldJet& L, std::span<const double> x,
                     double t, std::span<const cplx> zeta, double step);

struct FlatnessSample {
    double t;        // |t|
    double sup_Lu;
};

struct FlatnessFit {
    double A = 0.0;
    double Q = 0.0;
    double delta = 0.0;
    double sup_ratio = 0.0;
    bool passed = false;
    std::vector<double> h_Q_t;  // h(Q |t|) per sample, in sample order
};

// Picks Q in {2^{j/2}, j = -4..16} whose ratio |Lu|/h(Q|t|) is flattest, then A = max ratio.
FlatnessFit flatness_fit(const std::vector<FlatnessSample>& samples, const WeightSequence& seq);

struct FlatnessRun {
    std::vector<FlatnessSample> samples;
    FlatnessFit fit;
};

// Samples sup over x of |Lu| on n_t log-spaced |t| in [t_min, delta], both signs of t.
std::vector<FlatnessSample> sample_flatness(const ApproxSolution& sol, const VectorFieldJet& L,
                                            double x_lo, double x_hi, int n_x, double t_min, int n_t);
std::vector<FlatnessSample> sample_flatness_serial(const ApproxSolution& sol, const VectorFieldJet& L,
                                                   double x_lo, double x_hi, int n_x, double t_min,
                                                   int n_t);

struct AlmostAnalytic {
    ApproxSolution sol;
    VectorFieldJet L;  // d_t - i d_x
    cplx value(cplx z) const;
    cplx dbar(cplx z) const;  // (i/2) L u at (Re z, Im z)
};

// Extension of a one-variable jet through L = d_t - i d_x; C_star from growth_fit on [x_lo, x_hi].
AlmostAnalytic almost_analytic_extend(const Jet& f, const WeightSequence& seq, const DynkinKernel& kernel,
                                      double x_lo, double x_hi, int n_max = -1);

// Fit of |dbar U| = |Lu|/2 against A h(Q |Im z|) over Re z in [x_lo, x_hi].
FlatnessRun dbar_fit(const AlmostAnalytic& ext, double x_lo, double x_hi, int n_x, double t_min, int n_t);

// The field d_t + sum a_i d_x_i with constant or jet coefficients; helpers for fixtures.
VectorFieldJet field_from(const JetSpace& sp, std::vector<Jet> a, std::vector<Jet> b = {});

}  // namespace dcwave

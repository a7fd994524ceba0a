#pragma once

#include "dcwave/fbi.hpp"
#include "dcwave/jets.hpp"
#include "dcwave/weights.hpp"

#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace dcwave {

// f(x, t, zeta_0, zeta_1..zeta_N) as a jet: x-slots x_1..x_N then t when time dependent,
// zeta-slots zeta_0..zeta_N.
struct RhsModel {
    Jet f;
    int N = 1;
    bool time_dependent = false;
    std::vector<double> trust_radius;  // per jet variable, |v - base| bound

    int t_var() const { return time_dependent ? N : -1; }
    int zeta_var(int j) const { return N + (time_dependent ? 1 : 0) + j; }
    void validate() const;
};

RhsModel make_rhs(Jet f, int N = 1, bool time_dependent = false);
// Jet space matching an RhsModel layout.
JetSpace rhs_space(int N, bool time_dependent, int degree_budget);

using ScalarField = std::function<cplx(double x, double t)>;

// Samples over (x, t); grids are dim 2 with axis 0 = x and axis 1 = t. N = 1 only.
struct SolutionSamples {
    GridFunction u, u_x, u_t;
    double pde_residual = 0.0;
    bool certified = false;
    double tolerance = 1e-6;
};

SolutionSamples make_solution_samples(const RhsModel& model, const ScalarField& u, std::array<double, 2> lo,
                                      std::array<double, 2> hi, std::array<int, 2> n, double tolerance = 1e-6);

// a_j(x,t) = df/dzeta_j along w = (u, u_x); one grid per j = 1..N.
std::vector<GridFunction> linearize(const RhsModel& model, const SolutionSamples& sol);

// symbol: tau = Re a.xi and Im a.xi = 0. flipped: tau = -Re a.xi and Im a.xi = 0.
enum class CharConvention { symbol, flipped };

struct CharMembership {
    bool is_char = false;
    double distance = 0.0;
};

// covector = (xi_1..xi_N, tau).
CharMembership char_set(const std::vector<cplx>& a0, const std::vector<double>& covector, CharConvention conv);

struct CharReport {
    std::vector<double> base_point;
    std::vector<cplx> a0;
    CharConvention convention = CharConvention::symbol;
    std::vector<std::vector<double>> covectors;
    std::vector<CharMembership> results;
};

CharReport char_report(std::vector<double> base_point, const std::vector<cplx>& a0,
                       const std::vector<std::vector<double>>& covectors, CharConvention conv);

struct HamiltonianField {
    VectorFieldJet base;  // script L: d_t - sum df/dzeta_j d_x_j
    Jet h0;
    std::vector<Jet> h;
    VectorFieldJet H;
};

HamiltonianField hamiltonian_lift(const RhsModel& model);

// Values of phi(x, t, u, u_x) on the sample grid, with trust-box checks.
GridFunction compose(const RhsModel& model, const Jet& phi, const SolutionSamples& sol);

struct ChainResult {
    double residual = 0.0;
    double step = 0.0;  // x spacing of the sample grid
};

ChainResult chain_identity_check(const RhsModel& model, const SolutionSamples& sol, const Jet& phi);

struct ThetaChoice {
    double theta = 0.0;
    double g_value = 0.0;
    double R = 0.0;
};

// g(theta) = cos(theta) Im(a0.xi) + sin(theta) (Re(a0.xi) + tau).
double theta_g(const std::vector<cplx>& a0, const std::vector<double>& xi, double tau, double theta);
ThetaChoice theta_reduce(const std::vector<cplx>& a0, const std::vector<double>& xi, double tau);
// f^theta = e^{-i theta}(zeta_{N+1} - f) with t moved into an x-slot.
RhsModel theta_rhs(const RhsModel& model, double theta);

struct RenormalizedField {
    GridFunction b;
    double condition_number = 1.0;
    double residual = 0.0;             // max |Z_t + Z_x b| with fourth-order derivatives
    double max_b_minus_a_t0 = std::numeric_limits<double>::quiet_NaN();
};

// Z sampled on an (x, t) grid, N = 1. Derivatives by central differences at the grid spacing.
RenormalizedField renormalize(const GridFunction& Z, const GridFunction* a = nullptr);

struct PdeFixture {
    std::string name;
    RhsModel model;
    ScalarField u;
    std::string description;
};

// conormal, holomorphic, smooth, burgers, transport
PdeFixture pde_fixture(const std::string& name);
std::vector<std::string> pde_fixture_names();

struct WfConfig {
    ScanConfig scan;
    double half_width = 1.6;
    int n = 417;
    double r_in = 0.8;
    double r_out = 1.4;
    double tolerance = 1e-6;
};

struct TraceTest {
    ScanResult scan;
    double im_b0 = 0.0;
    bool plus_holds = true;   // singular trace directions satisfy Im b(0).xi >= 0
    bool minus_holds = true;  // singular trace directions satisfy Im b(0).xi <= 0
};

struct WfReport {
    std::string fixture;
    std::vector<cplx> a0;
    double pde_residual = 0.0;
    ScanResult scan;
    std::vector<double> char_distance;        // per singular direction, symbol convention
    std::vector<double> char_distance_flipped;  // same directions, flipped convention
    double max_distance = 0.0;
    double tolerance = 0.0;  // one angular step
    bool pass = false;
    TraceTest trace;
};

TraceTest trace_halfspace_test(const GridFunction& trace, double x0, double im_b0, const ScanConfig& cfg,
                               const WeightSequence& seq);

WfReport wf_inclusion_experiment(const RhsModel& model, const SolutionSamples& sol, const WeightSequence& seq,
                                 const WfConfig& cfg, const std::string& name = "custom");
WfReport wf_inclusion_experiment(const PdeFixture& fx, const WeightSequence& seq, const WfConfig& cfg);

}  // namespace dcwave

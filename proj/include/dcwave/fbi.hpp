#pragma once

#include "dcwave/jets.hpp"
#include "dcwave/weights.hpp"

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dcwave {

// Complex samples on a box in 1 or 2 real dimensions, row-major with axis 0 slowest.
struct GridFunction {
    int dim = 1;
    std::array<double, 2> lo{0.0, 0.0};
    std::array<double, 2> hi{1.0, 1.0};
    std::array<int, 2> n{1, 1};
    std::vector<cplx> values;
    bool cutoff_applied = false;

    std::size_t size() const { return static_cast<std::size_t>(n[0]) * (dim == 2 ? n[1] : 1); }
    double spacing(int axis) const { return (hi[axis] - lo[axis]) / (n[axis] - 1); }
    double coord(int axis, int i) const { return lo[axis] + spacing(axis) * i; }
    cplx& at(int i, int j = 0) { return values[static_cast<std::size_t>(i) * (dim == 2 ? n[1] : 1) + j]; }
    cplx at(int i, int j = 0) const { return values[static_cast<std::size_t>(i) * (dim == 2 ? n[1] : 1) + j]; }
    void validate() const;
};

using GridFn = std::function<cplx(std::span<const double>)>;

GridFunction sample_grid(int dim, std::array<double, 2> lo, std::array<double, 2> hi, std::array<int, 2> n,
                         const GridFn& fn);

// Gevrey-2 radial cutoff: 1 for r <= r_in, 0 for r >= r_out.
double cutoff(double r, double r_in, double r_out);
void apply_cutoff(GridFunction& u, std::span<const double> center, double r_in, double r_out);
double boundary_max(const GridFunction& u);

GridFunction read_grid(const std::string& path);
void write_grid(const std::string& path, const GridFunction& u);

// Throws Undersampled when the grid cannot resolve frequency xi.
void check_sampling(const GridFunction& u, std::span<const double> xi);

struct FbiValue {
    cplx value;
    double err;  // |F_h - F_2h|, the half-grid discrepancy
};

cplx fbi_transform(const GridFunction& u, std::span<const double> x, std::span<const double> xi);
FbiValue fbi_transform_err(const GridFunction& u, std::span<const double> x, std::span<const double> xi);

struct DecayOptions {
    double lambda_min = 4.0;
    double resolve_factor = 1.0;  // samples with |F| < factor * err are ignored
    double growth_tol = 1e-9;
};

struct DecayReport {
    std::vector<double> point;
    std::vector<double> direction;
    int direction_index = 0;
    std::vector<double> lambdas;
    std::vector<double> values;    // |F|
    std::vector<double> errors;    // quadrature error estimates, empty when unknown
    std::vector<double> needed_A;  // least A with |F| <= E(A, lambda), per sample
    std::optional<double> A_fit;   // grid fit over {2^{j/2}}, empty on Fail
    double growth_ratio = 0.0;     // max needed_A over the top octave / max below it
    bool passed = false;
};

// Least A with E(A, lambda) >= value, by bisection in log A.
double needed_envelope_constant(const WeightSequence& seq, double value, double lambda);

DecayReport decay_classify(const std::vector<double>& lambdas, const std::vector<double>& values,
                           const WeightSequence& seq, const std::vector<double>& errors = {},
                           const DecayOptions& opts = {});

struct ScanConfig {
    int n_directions = 64;
    double lambda_min = 4.0;
    double lambda_max = 64.0;
    int n_lambda = 13;
    DecayOptions decay;
};

struct ScanResult {
    std::vector<DecayReport> reports;
    std::vector<int> flagged;   // every failed direction
    std::vector<int> singular;  // failed directions that are local maxima of the growth ratio
    double angular_step = 0.0;
};

std::vector<double> lambda_grid(const ScanConfig& cfg);
std::vector<std::vector<double>> scan_directions(int dim, int n_directions);

ScanResult wavefront_scan(const GridFunction& u, std::span<const double> x, const ScanConfig& cfg,
                          const WeightSequence& seq);
ScanResult wavefront_scan_serial(const GridFunction& u, std::span<const double> x, const ScanConfig& cfg,
                                 const WeightSequence& seq);

// Z(x, t) sampled on point lists; z[i][j] = Z(x[i], t[j]).
struct PhaseSamples {
    int dim = 1;
    std::vector<std::vector<double>> x;
    std::vector<double> t;
    std::vector<std::vector<std::vector<cplx>>> z;
};

using PhaseMap = std::function<std::vector<cplx>(std::span<const double>, double)>;
PhaseSamples sample_phase_map(int dim, const PhaseMap& Z, const std::vector<std::vector<double>>& x,
                              const std::vector<double>& t);

struct ConeSearch {
    double half_angle = 0.39269908169872414;  // pi/8
    int n_centers = 64;                       // dim 2 only
    int n_cone = 9;                           // sampled directions across the cone, dim 2
    std::array<double, 2> y_lo{-0.1, -0.1};
    std::array<double, 2> y_hi{0.1, 0.1};
    int n_y = 21;
    double t_max = 0.2;
};

struct PhaseBoundReport {
    std::vector<double> center;
    double half_angle = 0.0;
    double C0 = 0.0;
    double delta = 0.0;
    double max_violation = 0.0;
    bool passed = false;
};

// Re Q = Re(i xi.(y - Z)) - |xi| Re <y - Z>^2 with the complex bilinear square.
double phase_real(std::span<const double> xi, std::span<const double> y, std::span<const cplx> Z);

PhaseBoundReport phase_bound_check(const PhaseSamples& Z, const ConeSearch& cone);

// Named grids: gaussian (1D, [-8,8], n=4097, no cutoff); sign, trace_upper = 1/(y + 0.05i),
// trace_lower = 1/(y - 0.05i), analytic = 1/(1+y^2) (1D, [-1.6,1.6], n=2049, cutoff at 0);
// conormal2d = |y1 - y2|^3, holomorphic2d = exp(y1 + i y2) (2D, [-1.6,1.6]^2, n=417, cutoff at 0).
// noise adds seeded uniform perturbations of that amplitude before the cutoff.
GridFunction fbi_fixture(const std::string& name, double noise = 0.0, unsigned long long seed = 0);
std::vector<std::string> fbi_fixture_names();

}  // namespace dcwave

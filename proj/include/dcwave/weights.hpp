#pragma once

#include <utility>
#include <vector>

namespace dcwave {

// Regular Denjoy-Carleman weight sequence, stored as log m_k with m_k = M_k / k!.
struct WeightSequence {
    enum class Kind { Gevrey, Table };

    Kind kind = Kind::Gevrey;
    double s = 2.0;               // Gevrey exponent, unused for Table
    std::vector<double> values;   // M_k as supplied, Table only
    int K_max = 0;
    std::vector<double> log_m;    // k = 0..K_max
    double c_bound = 0.0;

    double m(int k) const;
    double log_M(int k) const;
};

WeightSequence make_gevrey(double s, int K_max);
// values are M_k; K_max defaults to values.size() - 1.
WeightSequence make_table(std::vector<double> values, int K_max = -1);

struct RegularityReport {
    bool passed = true;
    std::vector<std::pair<char, int>> failures;  // (condition tag a..d, first offending index)
};

RegularityReport check_regularity(const WeightSequence& seq, double d_threshold = 4.0);

enum class Assoc { h, h1 };

// h(r) = inf_{k>=0} m_k r^k, h1(r) = inf_{k>=1} m_k r^{k-1}. Throws GuardExceeded when uncertified.
double assoc(const WeightSequence& seq, Assoc variant, double r);
double log_assoc(const WeightSequence& seq, Assoc variant, double r);

// Least minimizing index of m_k r^k over k >= 0 (same argmin as m_k r^{k-1} for k >= 1).
int bigN(const WeightSequence& seq, double r);
// min(N(r), cap) without requiring certification beyond cap + 1.
int bigN_capped(const WeightSequence& seq, double r, int cap);

// Smallest r whose h-minimizer lies strictly inside the table.
double certified_r_min(const WeightSequence& seq);

// E(A, lambda) = inf_k A^{k+1} M_k lambda^{-k}.
double fbi_envelope(const WeightSequence& seq, double A, double lambda);
double log_fbi_envelope(const WeightSequence& seq, double A, double lambda);

struct AbsorptionFit {
    int n = 0;
    double Q = 0.0;
    double C = 0.0;
    double r_lo = 0.0;   // lower end actually sampled (raised to the certified range)
    double r_hi = 0.0;
    bool passed = false;
};

// Searches Q in {2^j : j = 1..j_max} for the smallest C with r^{-n} h(r) <= C h(Q r) on a log grid.
AbsorptionFit absorption_fit(const WeightSequence& seq, int n, double r_lo, double r_hi,
                             int n_samples = 200, int j_max = 10, double C_max = 1024.0);

}  // namespace dcwave

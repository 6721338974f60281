#pragma once

#include "qk/test_function.hpp"
#include "qk/weight_sequences.hpp"

#include <optional>
#include <string>
#include <vector>

namespace qk {

// Beurling weight h^alpha e^{A(h|x|)} / M_alpha, or the Roumieu weight
// e^{B_r(|x|)} / (M_alpha prod_{j<=alpha} r_j) with B_r the associated function of A_p prod r_j.
struct SeminormWeight {
    double h = 1.0;
    std::optional<RSequence> r;

    static SeminormWeight beurling(double h);
    static SeminormWeight roumieu(RSequence r);
    bool is_roumieu() const { return r.has_value(); }
};

struct SeminormOptions {
    int alpha_cap = 60;
    double start_box = 4.0;
    int points_per_unit = 32;
    double boundary_ratio = 1e-3;
    int max_expansions = 12;
    int growth_streak = 3;
    double growth_factor = 1.1;
};

struct SeminormValue {
    double value = 0.0;  // +inf for the divergence marker
    bool infinite = false;
    std::string reason;  // why the value was declared infinite
    int alpha_at = 0;
    double x_at = 0.0;
    int alpha_cap = 0;
    double x_box = 0.0;
    int expansions = 0;
    bool saturated = false;
    std::vector<double> per_alpha;  // sup over x for each alpha
};

// Sup over alpha <= alpha_cap and an adaptive box of the weighted derivatives of phi.
SeminormValue seminorm(const TestFunction& phi, const WeightSequence& M, const WeightSequence& A,
                       const SeminormWeight& w, const SeminormOptions& opts = {});

// (f * phi)(x). Point masses and constants are handled in closed form, anything else by
// quadrature over the line. Throws Divergence when the integral does not converge.
double convolve_at(const TestFunction& f, const TestFunction& phi, double x);

struct GrowthOptions {
    std::vector<double> t_grid = {0.0625, 0.125, 0.25, 0.5, 1.0, 2.0, 4.0};
    double start_box = 4.0;
    int points_per_unit = 8;
    double boundary_ratio = 1e-3;
    int max_expansions = 8;
    int growth_streak = 3;
    double growth_factor = 1.1;
};

struct GrowthRow {
    double t = 0.0;
    double C = 0.0;  // +inf when the weighted sup keeps growing
    double x_at = 0.0;
    double x_box = 0.0;
    std::string reason;
};

struct GrowthFit {
    bool found = false;
    double t = 0.0;
    double C = 0.0;
    double x_at = 0.0;
    std::vector<GrowthRow> rows;  // every t tried, ascending
};

// Smallest t on the grid with sup_x |f * phi|(x) e^{-A(t|x|)} finite. Throws Divergence
// ("non-convolvable pair") when f * phi does not exist at x = 0.
GrowthFit growth_fit(const TestFunction& f, const TestFunction& phi, const WeightSequence& A,
                     const GrowthOptions& opts = {});

enum class Membership { consistent_with_membership, fails };
const char* to_string(Membership m);

struct MembershipReport {
    Membership verdict = Membership::fails;
    double t_uniform = 0.0;
    int witness = -1;  // index of the first probe without a finite fit
    std::vector<std::string> probes;
    std::vector<GrowthFit> fits;
};

// Gaussian-class probes with scales below 1.
std::vector<TestFunction> default_probes();

// A finite probe set can falsify membership or stay consistent with it; it never proves it.
MembershipReport membership_test(const TestFunction& f, const WeightSequence& A, const std::vector<TestFunction>& probes,
                                 const GrowthOptions& opts = {});

// Normalized Gaussian of scale 0.15.
TestFunction default_mollifier();

// chi_n * (phi_n psi) with chi_n(x) = n chi(n x) and phi_n(x) = phi(x / n). Rejects chi whose
// integral differs from 1 by more than 1e-10 and phi with phi(0) != 1.
TestFunction regularize(const TestFunction& psi, const TestFunction& chi, const TestFunction& phi, int n);

struct RegularizeRow {
    int n = 0;
    double distance = 0.0;  // truncated seminorm of Q_n psi - psi
    bool saturated = false;
    double point_error = 0.0;  // |(Q_n psi)(0) - psi(0)|
};

struct RegularizeReport {
    double h = 0.0;
    int alpha_cap = 0;
    std::vector<RegularizeRow> rows;
    bool strictly_decreasing = false;
    bool monotone_within_noise = false;  // each step at most doubles the previous distance
};

RegularizeReport regularize_report(const TestFunction& psi, const TestFunction& chi, const TestFunction& phi,
                                   const WeightSequence& M, const WeightSequence& A, double h,
                                   const std::vector<int>& ladder = {1, 2, 4, 8, 16}, int alpha_cap = 10);

}  // namespace qk

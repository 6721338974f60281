#pragma once

#include "qk/numerics.hpp"
#include "qk/test_function.hpp"
#include "qk/weight_sequences.hpp"

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qk {

enum class Flavor { beurling, roumieu };
enum class J0Mode { strict, relaxed };

const char* to_string(Flavor f);
const char* to_string(J0Mode m);

struct UltrapolyParams {
    Flavor flavor = Flavor::beurling;
    J0Mode mode = J0Mode::relaxed;
    int q = 2;
    double k = 1.0;   // Beurling decay target
    RSpec k_seq;      // Roumieu decay target (k_p)
    double rprime = 2.0;
    int d = 1;
    std::optional<double> H;  // taken from the (M.2) fit of the base when absent
    double box = 4096.0;      // evaluation is certified for |z| <= box

    // Test hooks: bypass the formulas for l and j0.
    std::optional<double> l_override;
    std::optional<int> j0_override;
};

// P(z) = prod_{j >= j0} (1 + (z / rho_j)^{2q}) with rho_j = m_j / l (Beurling) or l_j m_j (Roumieu).
class Ultrapolynomial {
public:
    static Ultrapolynomial build(const WeightSequence& base, const UltrapolyParams& params);

    const UltrapolyParams& params() const { return params_; }
    const WeightSequence& base() const { return base_; }
    int q() const { return params_.q; }
    int j0() const { return j0_; }
    double H() const { return H_; }
    // Beurling: l. Roumieu: l_1 (the full sequence is l_sequence()).
    double l() const { return l_; }
    const std::optional<RSequence>& l_sequence() const { return l_seq_; }
    const std::vector<std::string>& notes() const { return notes_; }

    double log_rho(int j) const;
    // Smallest |Im z| of any zero of P.
    double zero_free_halfwidth() const;

    // Truncation index used at radius |z|, with the geometric tail ratio kept <= 1/4.
    int truncation(double abs_z) const;
    // Bound on the error in log P from truncating the tail series after its last term.
    double tail_bound(double abs_z) const;

    LogComplex log_evaluate(cplx z) const;
    // Direct product over j0..J plus the analytic tail past J; J must be at least truncation(|z|).
    LogComplex log_evaluate(cplx z, int J) const;
    cplx evaluate(cplx z) const { return log_evaluate(z).value(); }
    // log P(x) >= 0 on the real axis.
    double log_abs_real(double x) const;

    // Exponent of the lower bound |P(x)| >= C' exp(weight): M(2k|x|) or N_{k_p/2}(|x|).
    AssociatedValue lower_weight(double x) const;
    // Exponent of the decay target for 1/P: M(k|x|) or N_{k_p}(|x|).
    AssociatedValue decay_weight(double x) const;

    // key=value header: flavor, mode, q, j0, l, H, rprime, box and the base generator.
    std::string to_kv() const;

private:
    Ultrapolynomial(WeightSequence base, UltrapolyParams p) : base_(std::move(base)), params_(std::move(p)) {}

    WeightSequence base_;
    UltrapolyParams params_;
    int j0_ = 2;
    double H_ = 1.0;
    double l_ = 1.0;
    std::optional<RSequence> l_seq_;
    double sigma_ = 1.0;     // ratio-law exponent of the base
    double log_kappa_ = 0.0; // log rho_j = sigma log j + log_kappa past tail_start_
    int tail_start_ = 0;
    std::optional<WeightSequence> lower_seq_;  // Roumieu: M_p prod k_j/2
    std::optional<WeightSequence> decay_seq_;  // Roumieu: M_p prod k_j
    std::vector<std::string> notes_;
};

struct StripGrid {
    double x_max = 20.0;
    int nx = 1001;
    int ny = 9;  // rows spread over [-2r', 2r']
};

struct StripPoint {
    double x = 0.0;
    double y = 0.0;
    double log_abs = 0.0;
};

struct StripRow {
    double x = 0.0;
    double log_abs = 0.0;    // log |P(x)|
    double log_ratio = 0.0;  // log(|P(x)| e^{-weight(x)})
};

struct StripReport {
    StripGrid grid;
    double y_max = 0.0;
    double min_abs_real = 0.0;
    double argmin_real = 0.0;
    StripPoint min_strip;
    double c_prime = 0.0;  // fitted lower-bound constant on the real grid
    bool weight_saturated = false;
    double zero_free_halfwidth = 0.0;
    bool strip_reduced = false;  // zeros of P lie inside |Im z| <= 2r'
    std::vector<cplx> zeros_in_window;
    std::vector<StripPoint> violations;  // grid points with |P| < 1e-300
    std::vector<StripRow> rows;
};

StripReport strip_check(const Ultrapolynomial& P, const StripGrid& grid = {});

struct InvDerivative {
    double value = 0.0;        // d^n/dx^n (1/P)(x)
    double bound_ratio = 0.0;  // |value| / (n! r'^{-n} e^{-weight(x)})
    int nodes = 0;
};

// Cauchy integral on |w - x| = radius with trapezoidal nodes doubled until two
// successive values agree to 1e-10 of the integrand scale.
InvDerivative inv_derivative(const Ultrapolynomial& P, double x, int n, double radius);

// A real even Fourier multiplier: either an ultrapolynomial symbol or the identity.
class Multiplier {
public:
    static Multiplier identity();
    static Multiplier from(Ultrapolynomial P);

    bool is_identity() const { return !poly_; }
    const Ultrapolynomial* ultrapoly() const { return poly_.get(); }
    double log_symbol(double xi) const;
    std::string describe() const;

private:
    std::shared_ptr<const Ultrapolynomial> poly_;
};

// Samples of P(D) f = F^{-1}(P f^) at xs. Cosines and constants are handled exactly; other
// descriptors need a Fourier oracle. Throws OutOfBox when P f^ leaves double range.
std::vector<double> multiplier_apply(const Multiplier& P, const TestFunction& f, std::span<const double> xs);

}  // namespace qk

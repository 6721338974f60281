#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qk {

// Positive nondecreasing sequence r_1, r_2, ... with r_p growing without bound.
// Only finitely many terms are stored; lookups past the end repeat the last term.
class RSequence {
public:
    // Throws InvalidArgument unless the values are positive, nondecreasing and r_last > r_1.
    static RSequence from_values(std::vector<double> values);

    int size() const { return static_cast<int>(values_.size()); }
    std::span<const double> values() const { return values_; }
    // 1-based.
    double operator[](int p) const;
    // sum_{j=1}^{p} log r_j
    double log_product(int p) const;

private:
    explicit RSequence(std::vector<double> v);
    std::vector<double> values_;
    std::vector<double> log_prefix_;  // log_prefix_[p] = sum_{j<=p} log r_j
};

// Generators for r-sequences used in key=value specs: "linear" (r_p = p),
// "log1p" (log(p+1)), "power:e" (p^e), "values:a,b,c".
struct RSpec {
    enum class Kind { linear, log1p, power, table };
    Kind kind = Kind::linear;
    double exponent = 1.0;
    std::vector<double> table;

    RSequence materialize(int p_max) const;
    std::string to_string() const;
    static RSpec parse(const std::string& text);
};

// k'_p = p * min_{j<=p} k_j / j. The result is bounded by k, nondecreasing and satisfies
// prod_{j<=p+q} k'_j <= 2^{p+q} prod_{j<=p} k'_j prod_{j<=q} k'_j.
RSequence subordinate(const RSequence& k);

struct SequenceSpec {
    enum class Kind { gevrey, factorial, custom, modulated };
    Kind kind = Kind::factorial;
    double sigma = 1.0;          // gevrey exponent; also the base exponent of "modulated"
    std::vector<double> table;   // custom: M_0..M_P
    RSpec r;                     // modulated only
    int p_max = 256;

    static SequenceSpec gevrey(double sigma, int p_max = 256);
    static SequenceSpec factorial(int p_max = 256);
    static SequenceSpec custom(std::vector<double> table);
    static SequenceSpec modulated(double sigma, RSpec r, int p_max = 256);

    // Line-oriented key=value block, e.g. "generator=gevrey\nsigma=0.5\npmax=256\n".
    std::string to_kv() const;
    static SequenceSpec from_kv(const std::string& text);
};

// For j past `exact_from`, log m_j = sigma * log j + log_c. Lets the tail of a sequence be
// extended past the stored table.
struct RatioLaw {
    double sigma = 1.0;
    double log_c = 0.0;
    int exact_from = 0;
};

struct AssociatedValue {
    double value = 0.0;
    int argmax = 0;
    bool saturated = false;  // sup attained at p = p_max
};

// M_0..M_P stored as logarithms, with the ratios m_p = M_p / M_{p-1}.
class WeightSequence {
public:
    WeightSequence(std::vector<double> log_ratios, std::optional<RatioLaw> law, std::string generator);

    int p_max() const { return static_cast<int>(log_values_.size()) - 1; }
    std::span<const double> log_values() const { return log_values_; }
    double log_value(int p) const { return log_values_.at(static_cast<std::size_t>(p)); }
    // log m_p for 1 <= p <= p_max; past p_max only when a ratio law is known.
    double log_ratio(int p) const;
    bool has_ratio_law() const { return law_.has_value(); }
    const std::optional<RatioLaw>& ratio_law() const { return law_; }
    const std::string& generator() const { return generator_; }

    // M_p^q
    WeightSequence power(double q) const;
    // M_p * prod_{j<=p} l_j
    WeightSequence modulate(const RSequence& l) const;

private:
    std::vector<double> log_values_;
    std::vector<double> log_ratios_;  // index p, entry 0 unused
    std::optional<RatioLaw> law_;
    std::string generator_;
};

// Throws InvalidArgument for p_max < 2, nonpositive table entries, table not starting 1, 1,
// or sigma <= 0.
WeightSequence make_sequence(const SequenceSpec& spec);

// sup_{p<=p_max} (p log rho - log M_p)
AssociatedValue associated(const WeightSequence& m, double rho);
// #{1 <= p <= p_max : m_p <= rho}
int counting(const WeightSequence& m, double rho);

class AssociatedFunction {
public:
    explicit AssociatedFunction(WeightSequence m) : m_(std::move(m)) {}
    double operator()(double rho) const { return associated(m_, rho).value; }
    AssociatedValue evaluate(double rho) const { return associated(m_, rho); }
    const WeightSequence& source() const { return m_; }

private:
    WeightSequence m_;
};

enum class Quasianalyticity { quasianalytic, non_quasianalytic, inconclusive };
const char* to_string(Quasianalyticity q);

struct M2Result {
    bool holds = false;
    double c0 = 1.0;
    double H = 1.0;
};

struct M5Result {
    int q = 0;
    double c0 = 1.0;
    bool holds = false;
    bool inconclusive = false;
    double tail_exponent = 0.0;  // fitted growth exponent of m_p^q
    double tail_extrapolation = 0.0;  // bound used for sum_{j>p_max} 1/m~_j
};

struct M6Result {
    double c0 = 1.0;
    double L0 = 1.0;
    bool holds = false;
};

struct QuasianalyticResult {
    Quasianalyticity verdict = Quasianalyticity::inconclusive;
    double partial_sum = 0.0;
    double fit_exponent = 0.0;
    double fit_residual = 0.0;
};

struct ConditionReport {
    int p_max = 0;
    bool m1 = false;
    M2Result m2;
    M5Result m5;                       // first candidate that holds, else the last one tried
    std::vector<M5Result> m5_candidates;
    M6Result m6;
    QuasianalyticResult quasianalytic;
    bool a_m1 = false;
    M2Result a_m2;
    std::vector<std::string> notes;
};

bool check_m1(const WeightSequence& m);
M2Result fit_m2(const WeightSequence& m);
// Verifies M_{p+q} <= c0 H^{p+q} M_p M_q for all p + q <= n_max (log domain, 1e-12 slack).
bool verify_m2(const WeightSequence& m, double c0, double H, int n_max);
M5Result check_m5(const WeightSequence& m, int q);
M6Result fit_m6(const WeightSequence& a);
QuasianalyticResult classify_quasianalytic(const WeightSequence& m);

// Both sequences must share p_max. Short tables yield inconclusive verdicts.
ConditionReport check_conditions(const WeightSequence& m, const WeightSequence& a, const std::vector<int>& q_candidates);

std::string to_text(const ConditionReport& r);

}  // namespace qk

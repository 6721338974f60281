#include "qk/ultrapoly.hpp"

#include "qk/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace qk {

namespace {

constexpr int max_truncation = 50'000'000;
constexpr double tail_series_tol = 1e-18;
const double log_tiny = std::log(1e-300);

std::string num(double v) { return format_number(v); }

}  // namespace

const char* to_string(Flavor f) { return f == Flavor::beurling ? "beurling" : "roumieu"; }
const char* to_string(J0Mode m) { return m == J0Mode::strict ? "strict" : "relaxed"; }

// ---------------------------------------------------------------------------
// Construction

Ultrapolynomial Ultrapolynomial::build(const WeightSequence& base, const UltrapolyParams& params)
{
    const auto& p = params;
    if (p.d != 1)
        throw InvalidArgument("only d = 1 is supported");
    if (p.q < 2)
        throw InvalidArgument("q must be an integer >= 2");
    if (!(p.rprime >= 1.0))
        throw InvalidArgument("r' must be >= 1");
    if (!(p.box > 0.0))
        throw InvalidArgument("evaluation box must be positive");
    if (!base.has_ratio_law())
        throw InvalidArgument("ultrapolynomial base needs a ratio law for its tail (gevrey, factorial or modulated)");
    if (!check_m1(base))
        throw InvalidArgument("base sequence fails (M.1)");
    const M5Result m5 = check_m5(base, p.q);
    if (!m5.holds)
        throw InvalidArgument("base sequence does not satisfy (M.5) with q = " + std::to_string(p.q) +
                              (m5.inconclusive ? " (inconclusive fit)" : ""));

    Ultrapolynomial P(base, params);
    P.H_ = p.H ? *p.H : fit_m2(base).H;
    if (!(P.H_ >= 1.0))
        throw InvalidArgument("H must be >= 1");
    if (!p.H)
        P.notes_.push_back("H taken from the (M.2) fit of the base: " + num(P.H_));

    const double root = std::sqrt(2.0 * p.d);
    const auto& law = *base.ratio_law();
    P.sigma_ = law.sigma;
    if (p.flavor == Flavor::beurling) {
        if (!(p.k > 0.0))
            throw InvalidArgument("k must be positive");
        P.l_ = p.l_override ? *p.l_override : 2.0 * P.H_ * p.k * root;
        P.log_kappa_ = law.log_c - std::log(P.l_);
        P.tail_start_ = law.exact_from;
    } else {
        const RSequence k = p.k_seq.materialize(base.p_max());
        std::vector<double> lp(k.values().begin(), k.values().end());
        for (auto& v : lp)
            v /= 4.0 * P.H_ * root;
        P.l_seq_ = subordinate(RSequence::from_values(lp));
        P.l_ = (*P.l_seq_)[1];
        P.log_kappa_ = law.log_c + std::log(P.l_seq_->values().back());
        P.tail_start_ = std::max(law.exact_from, P.l_seq_->size());
        std::vector<double> half(k.values().begin(), k.values().end());
        for (auto& v : half)
            v *= 0.5;
        P.lower_seq_ = base.modulate(RSequence::from_values(half));
        P.decay_seq_ = base.modulate(k);
    }
    if (!(2.0 * p.q * P.sigma_ > 1.0))
        throw InvalidArgument("tail exponent 2 q sigma must exceed 1");

    if (p.j0_override) {
        if (*p.j0_override < 1)
            throw InvalidArgument("j0 must be >= 1");
        P.j0_ = *p.j0_override;
        P.notes_.push_back("j0 fixed by override");
    } else {
        // r' l / m_j <= theta (Beurling) and r' / (l_j m_j) <= theta (Roumieu) both read
        // log rho_j >= log(r' / theta).
        const double theta = p.mode == J0Mode::strict ? std::pow(2.0, -p.q - 5) * std::pow(p.d, -p.q) : 0.5;
        const double need = std::log(p.rprime / theta);
        int j0 = 0;
        for (int j = 2; j <= base.p_max(); ++j) {
            if (P.log_rho(j) >= need - 1e-12) {
                j0 = j;
                break;
            }
        }
        if (j0 == 0) {
            const double estimate = std::exp((need - P.log_kappa_) / P.sigma_);
            std::ostringstream os;
            os << "no j <= p_max = " << base.p_max() << " satisfies the " << to_string(p.mode)
               << " j0 rule; p_max >= " << static_cast<long long>(std::ceil(estimate)) << " is required";
            throw InvalidArgument(os.str());
        }
        P.j0_ = j0;
        if (p.mode == J0Mode::relaxed)
            P.notes_.push_back("relaxed j0: downstream constants C, C' are fitted, not the closed-form ones");
    }
    if (P.zero_free_halfwidth() < 2.0 * p.rprime)
        P.notes_.push_back("zeros of P lie inside |Im z| <= 2r'; zero-free half-width " + num(P.zero_free_halfwidth()));
    return P;
}

double Ultrapolynomial::log_rho(int j) const
{
    const double lm = base_.log_ratio(j);
    if (params_.flavor == Flavor::beurling)
        return lm - std::log(l_);
    return lm + std::log((*l_seq_)[j]);
}

double Ultrapolynomial::zero_free_halfwidth() const
{
    return std::exp(log_rho(j0_)) * std::sin(pi / (2.0 * params_.q));
}

// ---------------------------------------------------------------------------
// Evaluation

int Ultrapolynomial::truncation(double abs_z) const
{
    if (!(abs_z <= params_.box))
        throw OutOfBox("|z| = " + num(abs_z) + " outside the certified box of radius " + num(params_.box));
    const double s = 2.0 * params_.q * sigma_;
    int J = std::max(j0_ - 1, tail_start_);
    if (abs_z > 0.0) {
        const double log_a = std::log(4.0) / s + (std::log(abs_z) - log_kappa_) / sigma_;
        if (log_a > std::log(static_cast<double>(max_truncation)))
            throw OutOfBox("|z| = " + num(abs_z) + " needs more than " + std::to_string(max_truncation) + " factors");
        J = std::max(J, static_cast<int>(std::ceil(std::exp(log_a))) - 1);
    }
    return J;
}

namespace {

struct TailSum {
    cplx value;
    double bound;
};

// sum_{j >= a} log(1 + w j^{-s}) as sum_k (-1)^{k+1}/k v^k Z(sk, a), v = w a^{-s}.
TailSum tail_series(double log_abs_w, double arg_w, double s, double a)
{
    const double log_v = log_abs_w - s * std::log(a);
    const double abs_v = std::exp(log_v);
    cplx acc{0.0, 0.0};
    cplx vk{1.0, 0.0};
    const cplx v = std::polar(abs_v, arg_w);
    for (int k = 1; k <= 400; ++k) {
        vk *= v;
        const double term_scale = hurwitz_scaled(s * k, a) / k;
        acc += (k % 2 ? 1.0 : -1.0) * term_scale * vk;
        const double bound = std::pow(abs_v, k + 1) * hurwitz_scaled(s * (k + 1), a) / ((k + 1) * (1.0 - abs_v));
        if (bound < tail_series_tol)
            return {acc, bound};
    }
    throw NotConverged("ultrapolynomial tail series did not converge");
}

}  // namespace

double Ultrapolynomial::tail_bound(double abs_z) const
{
    const int J = truncation(abs_z);
    if (abs_z == 0.0)
        return 0.0;
    const double log_w = 2.0 * params_.q * (std::log(abs_z) - log_kappa_);
    return tail_series(log_w, 0.0, 2.0 * params_.q * sigma_, J + 1.0).bound;
}

LogComplex Ultrapolynomial::log_evaluate(cplx z) const { return log_evaluate(z, truncation(std::abs(z))); }

LogComplex Ultrapolynomial::log_evaluate(cplx z, int J) const
{
    const double abs_z = std::abs(z);
    if (abs_z == 0.0)
        return {0.0, 0.0};
    if (J < truncation(abs_z))
        throw InvalidArgument("truncation index below the certified minimum");
    const double two_q = 2.0 * params_.q;
    const double log_z = std::log(abs_z);
    const double arg_w = wrap_angle(two_q * std::arg(z));
    double re = 0.0, im = 0.0;
    for (int j = j0_; j <= J; ++j) {
        const double lw = two_q * (log_z - log_rho(j));
        cplx term;
        if (lw < 0.0) {
            term = log1p(std::polar(std::exp(lw), arg_w));
        } else {
            // log(1 + w) = log w + log(1 + 1/w)
            term = cplx{lw, arg_w} + log1p(std::polar(std::exp(-lw), -arg_w));
        }
        re += term.real();
        im = wrap_angle(im + wrap_angle(term.imag()));
    }
    const TailSum tail = tail_series(two_q * (log_z - log_kappa_), arg_w, two_q * sigma_, J + 1.0);
    re += tail.value.real();
    im = wrap_angle(im + tail.value.imag());
    return {re, im};
}

double Ultrapolynomial::log_abs_real(double x) const
{
    const double ax = std::abs(x);
    if (ax == 0.0)
        return 0.0;
    const int J = truncation(ax);
    const double two_q = 2.0 * params_.q;
    const double log_x = std::log(ax);
    double acc = 0.0;
    for (int j = j0_; j <= J; ++j) {
        const double lw = two_q * (log_x - log_rho(j));
        acc += lw < 0.0 ? std::log1p(std::exp(lw)) : lw + std::log1p(std::exp(-lw));
    }
    acc += tail_series(two_q * (log_x - log_kappa_), 0.0, two_q * sigma_, J + 1.0).value.real();
    return acc;
}

AssociatedValue Ultrapolynomial::lower_weight(double x) const
{
    const double ax = std::abs(x);
    if (ax == 0.0)
        return {};
    if (params_.flavor == Flavor::beurling)
        return associated(base_, 2.0 * params_.k * ax);
    return associated(*lower_seq_, ax);
}

AssociatedValue Ultrapolynomial::decay_weight(double x) const
{
    const double ax = std::abs(x);
    if (ax == 0.0)
        return {};
    if (params_.flavor == Flavor::beurling)
        return associated(base_, params_.k * ax);
    return associated(*decay_seq_, ax);
}

std::string Ultrapolynomial::to_kv() const
{
    std::ostringstream os;
    os << "upoly.flavor=" << to_string(params_.flavor) << '\n';
    os << "upoly.mode=" << to_string(params_.mode) << '\n';
    os << "upoly.q=" << params_.q << '\n';
    if (params_.flavor == Flavor::beurling)
        os << "upoly.k=" << num(params_.k) << '\n';
    else
        os << "upoly.kseq=" << params_.k_seq.to_string() << '\n';
    os << "upoly.rprime=" << num(params_.rprime) << '\n';
    os << "upoly.d=" << params_.d << '\n';
    os << "upoly.H=" << num(H_) << '\n';
    os << "upoly.box=" << num(params_.box) << '\n';
    os << "upoly.l=" << num(l_) << '\n';
    os << "upoly.j0=" << j0_ << '\n';
    os << "upoly.base=" << base_.generator() << '\n';
    os << "upoly.base_pmax=" << base_.p_max() << '\n';
    return os.str();
}

// ---------------------------------------------------------------------------
// Strip check

StripReport strip_check(const Ultrapolynomial& P, const StripGrid& grid)
{
    if (grid.nx < 2 || grid.ny < 2 || !(grid.x_max > 0))
        throw InvalidArgument("strip grid needs nx, ny >= 2 and x_max > 0");
    StripReport r;
    r.grid = grid;
    r.y_max = 2.0 * P.params().rprime;
    r.zero_free_halfwidth = P.zero_free_halfwidth();
    r.strip_reduced = r.zero_free_halfwidth < r.y_max;

    r.min_abs_real = std::numeric_limits<double>::infinity();
    double log_c = std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid.nx; ++i) {
        const double x = -grid.x_max + 2.0 * grid.x_max * i / (grid.nx - 1);
        const double la = P.log_abs_real(x);
        const auto w = P.lower_weight(x);
        r.weight_saturated = r.weight_saturated || w.saturated;
        r.rows.push_back({x, la, la - w.value});
        log_c = std::min(log_c, la - w.value);
        if (std::exp(la) < r.min_abs_real) {
            r.min_abs_real = std::exp(la);
            r.argmin_real = x;
        }
        if (la < log_tiny)
            r.violations.push_back({x, 0.0, la});
    }
    r.c_prime = std::exp(log_c);

    r.min_strip = {0.0, 0.0, std::numeric_limits<double>::infinity()};
    for (int jy = 0; jy < grid.ny; ++jy) {
        const double y = -r.y_max + 2.0 * r.y_max * jy / (grid.ny - 1);
        for (int i = 0; i < grid.nx; ++i) {
            const double x = -grid.x_max + 2.0 * grid.x_max * i / (grid.nx - 1);
            const double la = P.log_evaluate({x, y}).log_abs;
            if (la < r.min_strip.log_abs)
                r.min_strip = {x, y, la};
            if (la < log_tiny && y != 0.0)
                r.violations.push_back({x, y, la});
        }
    }

    // Zeros sit at rho_j exp(i (2m+1) pi / (2q)).
    const int q = P.q();
    const double s = std::sin(pi / (2.0 * q));
    for (int j = P.j0(); j <= P.base().p_max(); ++j) {
        const double rho = std::exp(P.log_rho(j));
        if (rho * s > r.y_max)
            break;
        for (int m = 0; m < 2 * q; ++m) {
            const cplx zero = std::polar(rho, (2.0 * m + 1.0) * pi / (2.0 * q));
            if (std::abs(zero.imag()) <= r.y_max + 1e-12 && std::abs(zero.real()) <= grid.x_max)
                r.zeros_in_window.push_back(zero);
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// Derivatives of 1/P

InvDerivative inv_derivative(const Ultrapolynomial& P, double x, int n, double radius)
{
    if (n < 0 || n > 40)
        throw InvalidArgument("derivative order must lie in [0, 40]");
    if (!(radius > 0.0) || radius > P.params().rprime)
        throw InvalidArgument("Cauchy radius must lie in (0, r']");
    const double log_fact = log_factorial(n);

    auto run = [&](int nodes, double& scale) {
        // f^{(n)}(x) = n! / (r^n N) sum_k f(x + r e^{i t_k}) e^{-i n t_k}
        std::vector<LogComplex> vals(static_cast<std::size_t>(nodes));
        double peak = neg_inf;
        for (int k = 0; k < nodes; ++k) {
            const double t = 2.0 * pi * k / nodes;
            vals[static_cast<std::size_t>(k)] = P.log_evaluate(x + std::polar(radius, t)).inverse();
            peak = std::max(peak, vals[static_cast<std::size_t>(k)].log_abs);
        }
        cplx acc{0.0, 0.0};
        for (int k = 0; k < nodes; ++k) {
            const double t = 2.0 * pi * k / nodes;
            const auto& v = vals[static_cast<std::size_t>(k)];
            acc += std::polar(std::exp(v.log_abs - peak), v.arg - n * t);
        }
        const double log_pref = log_fact - n * std::log(radius) + peak;
        scale = std::exp(log_pref);
        return acc.real() / nodes * std::exp(log_pref);
    };

    double scale = 0.0, prev_scale = 0.0;
    int nodes = std::max(32, 4 * n + 8);
    double prev = run(nodes, prev_scale);
    for (nodes *= 2; nodes <= (1 << 16); nodes *= 2) {
        const double cur = run(nodes, scale);
        if (std::abs(cur - prev) <= 1e-10 * scale) {
            InvDerivative out;
            out.value = cur;
            out.nodes = nodes;
            const double log_bound = log_fact - n * std::log(P.params().rprime) - P.decay_weight(x).value;
            out.bound_ratio = cur == 0.0 ? 0.0 : std::exp(std::log(std::abs(cur)) - log_bound);
            return out;
        }
        prev = cur;
    }
    throw NotConverged("Cauchy integral for D^" + std::to_string(n) + "(1/P) at x = " + num(x) +
                       " did not settle within 2^16 nodes");
}

// ---------------------------------------------------------------------------
// Multipliers

Multiplier Multiplier::identity() { return Multiplier{}; }

Multiplier Multiplier::from(Ultrapolynomial P)
{
    Multiplier m;
    m.poly_ = std::make_shared<const Ultrapolynomial>(std::move(P));
    return m;
}

double Multiplier::log_symbol(double xi) const { return poly_ ? poly_->log_abs_real(xi) : 0.0; }

std::string Multiplier::describe() const
{
    if (!poly_)
        return "identity";
    std::ostringstream os;
    os << to_string(poly_->params().flavor) << " ultrapolynomial q=" << poly_->q() << " j0=" << poly_->j0()
       << " l=" << num(poly_->l());
    return os.str();
}

std::vector<double> multiplier_apply(const Multiplier& P, const TestFunction& f, std::span<const double> xs)
{
    using Kind = TestFunction::Kind;
    std::vector<double> out(xs.size(), 0.0);
    if (P.is_identity()) {
        for (std::size_t i = 0; i < xs.size(); ++i)
            out[i] = f.value(xs[i]);
        return out;
    }
    switch (f.kind()) {
    case Kind::sum: {
        const auto a = multiplier_apply(P, f.children()[0], xs);
        const auto b = multiplier_apply(P, f.children()[1], xs);
        for (std::size_t i = 0; i < xs.size(); ++i)
            out[i] = a[i] + b[i];
        return out;
    }
    case Kind::scaled: {
        out = multiplier_apply(P, f.children()[0], xs);
        for (auto& v : out)
            v *= f.params()[0];
        return out;
    }
    case Kind::constant: {
        const double c = f.params()[0] * std::exp(P.log_symbol(0.0));
        std::fill(out.begin(), out.end(), c);
        return out;
    }
    case Kind::cosine: {
        const double w = f.params()[0];
        const double pw = std::exp(P.log_symbol(w));
        for (std::size_t i = 0; i < xs.size(); ++i)
            out[i] = pw * std::cos(w * xs[i]);
        return out;
    }
    default: break;
    }
    if (!f.has_fourier())
        throw InvalidArgument("multiplier_apply needs a Fourier oracle for " + f.to_string());
    const auto support = f.essential_support();
    if (!support)
        throw InvalidArgument("multiplier_apply needs a localized descriptor, got " + f.to_string());

    double x_reach = std::max(std::abs(support->lo), std::abs(support->hi));
    for (double x : xs)
        x_reach = std::max(x_reach, std::abs(x));
    // Uniform xi-sampling periodizes P(D)f with period 2 pi / dxi.
    const double period = 4.0 * x_reach + 64.0;
    const double dxi = 2.0 * pi / period;

    struct Sample {
        double xi, log_abs, arg;
    };
    std::vector<Sample> samples;
    double peak = neg_inf;
    int quiet = 0;
    constexpr int max_k = 1 << 22;
    for (int k = 0; k <= max_k; ++k) {
        bool loud = false;
        for (int sgn : {1, -1}) {
            if (k == 0 && sgn < 0)
                continue;
            const double xi = sgn * k * dxi;
            const LogComplex fh = f.log_fourier(xi);
            const double la = fh.log_abs + P.log_symbol(xi);
            samples.push_back({xi, la, fh.arg});
            peak = std::max(peak, la);
            loud = loud || la > peak - 40.0;
        }
        quiet = loud ? 0 : quiet + 1;
        if (quiet >= 32)
            break;
        if (k == max_k)
            throw OutOfBox("spectrum of P(D)f not resolved within 2^22 samples; refine the descriptor");
    }
    if (peak > 700.0)
        throw OutOfBox("P(xi) f^(xi) reaches e^" + num(peak) + ", beyond double range");
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double acc = 0.0;
        for (const auto& s : samples)
            acc += std::exp(s.log_abs) * std::cos(s.xi * xs[i] + s.arg);
        out[i] = acc * dxi / (2.0 * pi);
    }
    return out;
}

}  // namespace qk

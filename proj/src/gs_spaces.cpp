#include "qk/gs_spaces.hpp"

#include "qk/errors.hpp"
#include "qk/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>

namespace qk {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

std::string num(double v) { return format_number(v); }

enum class BoxStatus { converged, infinite, unresolved };

struct BoxSearch {
    BoxStatus status = BoxStatus::converged;
    double log_sup = -inf;
    double x_at = 0.0;
    double box = 0.0;
    int expansions = 0;
    std::string reason;
};

struct BoxRule {
    double start = 4.0;
    int ppu = 8;
    double ratio = 1e-3;
    int max_expansions = 8;
    int streak = 3;
    double factor = 1.1;
};

// Sup of exp(log_value(x)) over growing boxes [-X, X] sampled at ppu points per unit.
// Converged when the boundary value drops below ratio * sup; infinite after `streak`
// consecutive doublings that each grow the sup by more than `factor`, or on a
// non-finite value.
BoxSearch box_sup(const std::function<double(double)>& log_value, const BoxRule& rule)
{
    BoxSearch s;
    bool blown = false;
    auto visit = [&](long long k) {
        const double x = static_cast<double>(k) / rule.ppu;
        const double v = log_value(x);
        if (std::isnan(v) || v == inf) {
            blown = true;
            s.x_at = x;
            return v;
        }
        if (v > s.log_sup) {
            s.log_sup = v;
            s.x_at = x;
        }
        return v;
    };

    long long K = static_cast<long long>(std::llround(rule.start * rule.ppu));
    s.box = rule.start;
    double boundary = -inf;
    for (long long k = -K; k <= K; ++k) {
        const double v = visit(k);
        if (k == -K || k == K)
            boundary = std::max(boundary, v);
    }
    int streak = 0;
    while (true) {
        if (blown) {
            s.status = BoxStatus::infinite;
            s.reason = "non-finite weighted value at x = " + num(s.x_at);
            return s;
        }
        if (s.log_sup == -inf || boundary < s.log_sup + std::log(rule.ratio))
            return s;
        if (s.expansions == rule.max_expansions) {
            s.status = BoxStatus::unresolved;
            s.reason = "weighted sup still reached at the boundary of [-" + num(s.box) + ", " + num(s.box) + "]";
            return s;
        }
        const double prev = s.log_sup;
        const long long K2 = 2 * K;
        double b1 = -inf, b2 = -inf;
        for (long long k = K + 1; k <= K2 && !blown; ++k) {
            b1 = visit(k);
            b2 = visit(-k);
        }
        boundary = std::max(b1, b2);
        K = K2;
        s.box *= 2.0;
        ++s.expansions;
        if (s.log_sup > prev + std::log(rule.factor)) {
            if (++streak >= rule.streak) {
                s.status = BoxStatus::infinite;
                s.reason = "weighted sup grew by more than " + num(100.0 * (rule.factor - 1.0)) + "% on " +
                           std::to_string(streak) + " consecutive box doublings";
                return s;
            }
        } else {
            streak = 0;
        }
    }
}

}  // namespace

SeminormWeight SeminormWeight::beurling(double h)
{
    if (!(h > 0.0))
        throw InvalidArgument("seminorm scale h must be positive");
    SeminormWeight w;
    w.h = h;
    return w;
}

SeminormWeight SeminormWeight::roumieu(RSequence r)
{
    SeminormWeight w;
    w.r = std::move(r);
    return w;
}

SeminormValue seminorm(const TestFunction& phi, const WeightSequence& M, const WeightSequence& A,
                       const SeminormWeight& w, const SeminormOptions& opts)
{
    if (!phi.has_derivatives())
        throw InvalidArgument("seminorm needs a derivative oracle, " + phi.to_string() + " has none");
    const int cap = opts.alpha_cap;
    if (cap < 0 || cap > M.p_max())
        throw InvalidArgument("alpha cap must lie in [0, p_max of M]");

    std::optional<WeightSequence> B;
    if (w.is_roumieu())
        B = A.modulate(*w.r);
    const WeightSequence& weight_seq = B ? *B : A;
    const double scale = B ? 1.0 : w.h;

    std::vector<double> norm(static_cast<std::size_t>(cap) + 1);
    for (int a = 0; a <= cap; ++a)
        norm[static_cast<std::size_t>(a)] =
            B ? -M.log_value(a) - w.r->log_product(a) : a * std::log(w.h) - M.log_value(a);

    SeminormValue out;
    out.alpha_cap = cap;
    std::vector<double> per_alpha(static_cast<std::size_t>(cap) + 1, -inf);
    int best_alpha = 0;
    double best = -inf;
    bool weight_saturated = false;

    auto log_value = [&](double x) {
        const auto d = phi.derivatives(x, cap);
        double lw = 0.0;
        bool sat = false;
        if (x != 0.0) {
            const auto av = associated(weight_seq, scale * std::abs(x));
            lw = av.value;
            sat = av.saturated;
        }
        double here = -inf;
        for (int a = 0; a <= cap; ++a) {
            const double v = d[static_cast<std::size_t>(a)];
            if (!std::isfinite(v))
                return inf;
            if (v == 0.0)
                continue;
            const double lv = lw + std::log(std::abs(v)) + norm[static_cast<std::size_t>(a)];
            if (!std::isfinite(lv))
                return inf;
            per_alpha[static_cast<std::size_t>(a)] = std::max(per_alpha[static_cast<std::size_t>(a)], lv);
            here = std::max(here, lv);
            if (lv > best) {
                best = lv;
                best_alpha = a;
                weight_saturated = sat;
            }
        }
        return here;
    };

    BoxRule rule{opts.start_box, opts.points_per_unit, opts.boundary_ratio, opts.max_expansions, opts.growth_streak,
                 opts.growth_factor};
    const BoxSearch s = box_sup(log_value, rule);
    out.x_box = s.box;
    out.expansions = s.expansions;
    if (s.status == BoxStatus::unresolved)
        throw NotConverged("seminorm of " + phi.to_string() + " unresolved: " + s.reason);
    if (s.status == BoxStatus::infinite) {
        out.infinite = true;
        out.value = inf;
        out.reason = s.reason;
        out.x_at = s.x_at;
        out.saturated = false;
        return out;
    }
    out.value = std::exp(best);
    out.alpha_at = best_alpha;
    out.x_at = s.x_at;
    out.saturated = best_alpha == cap || weight_saturated;
    out.per_alpha.reserve(per_alpha.size());
    for (double v : per_alpha)
        out.per_alpha.push_back(std::exp(v));
    return out;
}

// ---------------------------------------------------------------------------

double convolve_at(const TestFunction& f, const TestFunction& phi, double x)
{
    if (phi.contains_point_masses())
        throw InvalidArgument("the second factor must be a function, got " + phi.to_string());
    if (f.is_point_masses()) {
        double acc = 0.0;
        for (const auto& pm : f.point_masses())
            acc += pm.weight * phi.value(x - pm.x);
        return acc;
    }
    if (f.contains_point_masses())
        throw InvalidArgument("mixed point masses and functions are not supported in " + f.to_string());
    if (const auto c = f.constant_value()) {
        if (phi.has_fourier())
            return *c * phi.fourier(0.0).real();
        return *c * integrate_line([&](double y) { return phi.value(y); }, -8.0, 8.0).value;
    }
    const auto supp = phi.essential_support();
    double lo = x - 8.0, hi = x + 8.0;
    if (supp) {
        lo = x - supp->hi;
        hi = x - supp->lo;
    }
    // A decayed-to-zero factor wins over an overflowed one.
    auto integrand = [&](double y) {
        const double p = phi.value(x - y);
        return p == 0.0 ? 0.0 : f.value(y) * p;
    };
    return integrate_line(integrand, lo, hi).value;
}

GrowthFit growth_fit(const TestFunction& f, const TestFunction& phi, const WeightSequence& A, const GrowthOptions& opts)
{
    if (opts.t_grid.empty())
        throw InvalidArgument("growth fit needs a nonempty t grid");
    std::vector<double> ts = opts.t_grid;
    std::sort(ts.begin(), ts.end());
    if (!(ts.front() > 0.0))
        throw InvalidArgument("t grid values must be positive");

    try {
        (void)convolve_at(f, phi, 0.0);
    } catch (const Divergence& e) {
        throw Divergence("non-convolvable pair " + f.to_string() + " * " + phi.to_string() + ": " + e.what());
    }

    // Far from the origin an overflowing integrand means the convolution is beyond double
    // range; that counts as unbounded growth, not as a missing convolution.
    std::map<double, double> cache;
    auto conv = [&](double x) {
        const auto it = cache.find(x);
        if (it != cache.end())
            return it->second;
        double v;
        try {
            v = convolve_at(f, phi, x);
        } catch (const Divergence&) {
            v = inf;
        }
        cache.emplace(x, v);
        return v;
    };

    GrowthFit fit;
    BoxRule rule{opts.start_box, opts.points_per_unit, opts.boundary_ratio, opts.max_expansions, opts.growth_streak,
                 opts.growth_factor};
    for (double t : ts) {
        auto log_value = [&](double x) {
            const double c = conv(x);
            if (!std::isfinite(c))
                return inf;
            if (c == 0.0)
                return -inf;
            return std::log(std::abs(c)) - (x == 0.0 ? 0.0 : associated(A, t * std::abs(x)).value);
        };
        const BoxSearch s = box_sup(log_value, rule);
        GrowthRow row;
        row.t = t;
        row.x_box = s.box;
        row.x_at = s.x_at;
        if (s.status == BoxStatus::converged) {
            row.C = std::exp(s.log_sup);
            fit.rows.push_back(row);
            fit.found = true;
            fit.t = t;
            fit.C = row.C;
            fit.x_at = row.x_at;
            return fit;
        }
        row.C = inf;
        row.reason = s.reason;
        fit.rows.push_back(row);
    }
    return fit;
}

const char* to_string(Membership m)
{
    return m == Membership::consistent_with_membership ? "consistent-with-membership" : "fails";
}

std::vector<TestFunction> default_probes()
{
    return {TestFunction::gaussian(0.0, 0.5), TestFunction::gaussian(1.0, 0.7), 0.5 * TestFunction::hermite(1, 0.6)};
}

MembershipReport membership_test(const TestFunction& f, const WeightSequence& A, const std::vector<TestFunction>& probes,
                                 const GrowthOptions& opts)
{
    if (probes.empty())
        throw InvalidArgument("membership test needs at least one probe");
    MembershipReport r;
    r.verdict = Membership::consistent_with_membership;
    for (std::size_t i = 0; i < probes.size(); ++i) {
        r.probes.push_back(probes[i].to_string());
        r.fits.push_back(growth_fit(f, probes[i], A, opts));
        const auto& fit = r.fits.back();
        if (!fit.found) {
            if (r.witness < 0)
                r.witness = static_cast<int>(i);
            r.verdict = Membership::fails;
        } else {
            r.t_uniform = std::max(r.t_uniform, fit.t);
        }
    }
    if (r.verdict == Membership::fails)
        r.t_uniform = 0.0;
    return r;
}

// ---------------------------------------------------------------------------

TestFunction default_mollifier()
{
    const double s = 0.15;
    return (1.0 / (s * std::sqrt(pi))) * TestFunction::gaussian(0.0, s);
}

TestFunction regularize(const TestFunction& psi, const TestFunction& chi, const TestFunction& phi, int n)
{
    if (n < 1)
        throw InvalidArgument("regularization index n must be >= 1");
    const double mass = integrate_line([&](double x) { return chi.value(x); }, -8.0, 8.0).value;
    if (std::abs(mass - 1.0) > 1e-10)
        throw InvalidArgument("mollifier integral is " + num(mass) + ", not 1");
    if (phi.value(0.0) != 1.0)
        throw InvalidArgument("cutoff must satisfy phi(0) = 1");
    const double dn = n;
    const auto chi_n = dn * TestFunction::affine(chi, dn, 0.0);
    const auto phi_n = TestFunction::affine(phi, 1.0 / dn, 0.0);
    return TestFunction::convolve(chi_n, phi_n * psi);
}

RegularizeReport regularize_report(const TestFunction& psi, const TestFunction& chi, const TestFunction& phi,
                                   const WeightSequence& M, const WeightSequence& A, double h,
                                   const std::vector<int>& ladder, int alpha_cap)
{
    if (ladder.empty())
        throw InvalidArgument("regularization ladder is empty");
    RegularizeReport r;
    r.h = h;
    r.alpha_cap = alpha_cap;
    SeminormOptions opts;
    opts.alpha_cap = alpha_cap;
    for (int n : ladder) {
        const auto q = regularize(psi, chi, phi, n);
        const auto diff = q + (-1.0) * psi;
        const auto s = seminorm(diff, M, A, SeminormWeight::beurling(h), opts);
        RegularizeRow row;
        row.n = n;
        row.distance = s.value;
        row.saturated = s.saturated;
        row.point_error = std::abs(q.value(0.0) - psi.value(0.0));
        r.rows.push_back(row);
    }
    r.strictly_decreasing = true;
    r.monotone_within_noise = true;
    for (std::size_t i = 1; i < r.rows.size(); ++i) {
        r.strictly_decreasing = r.strictly_decreasing && r.rows[i].distance < r.rows[i - 1].distance;
        r.monotone_within_noise = r.monotone_within_noise && r.rows[i].distance <= 2.0 * r.rows[i - 1].distance;
    }
    r.monotone_within_noise = r.monotone_within_noise && r.rows.back().distance < r.rows.front().distance;
    return r;
}

}  // namespace qk

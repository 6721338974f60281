#include "qk/convolution.hpp"

#include "qk/errors.hpp"
#include "qk/gs_spaces.hpp"
#include "qk/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace qk {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

using TF = TestFunction;

std::string num(double v) { return format_number(v); }

struct TailFit {
    double slope = 0.0;
    double residual = 0.0;
    std::vector<std::pair<double, double>> points;
};

// log|h| against |x| over the outer part of the box; both sides share one fit.
TailFit fit_tail(const std::vector<double>& pos, const std::vector<double>& neg, int K, double dx, double fraction)
{
    TailFit t;
    const int k0 = static_cast<int>(std::ceil((1.0 - fraction) * K));
    std::vector<double> xs, ys;
    bool underflow = false;
    for (int k = k0; k <= K; ++k) {
        for (double h : {pos[static_cast<std::size_t>(k)], neg[static_cast<std::size_t>(k)]}) {
            if (h == 0.0) {
                underflow = true;
                continue;
            }
            xs.push_back(k * dx);
            ys.push_back(std::log(std::abs(h)));
        }
    }
    if (xs.size() < 3) {
        t.slope = underflow ? -inf : 0.0;
        return t;
    }
    const auto f = fit_line(xs, ys);
    double mean = 0.0;
    for (double y : ys)
        mean += std::abs(y);
    mean /= static_cast<double>(ys.size());
    t.slope = f.slope;
    t.residual = f.rms_residual / std::max(1.0, mean);
    const std::size_t stride = std::max<std::size_t>(1, xs.size() / 64);
    for (std::size_t i = 0; i < xs.size(); i += stride)
        t.points.emplace_back(xs[i], ys[i]);
    return t;
}

ProbeRecord run_probe(const TF& f1r, const TF& f2, const ProbePair& pp, const CriterionOptions& o)
{
    ProbeRecord rec;
    rec.phi = pp.phi.to_string();
    rec.psi = pp.psi.to_string();
    const double dx = 1.0 / o.points_per_unit;

    auto sample = [&](double x) {
        const double u = convolve_at(f1r, pp.phi, x);
        if (u == 0.0)
            return 0.0;
        return u * convolve_at(f2, pp.psi, x);
    };

    std::vector<double> pos, neg;  // h(k dx) and h(-k dx)
    auto extend = [&](int K) {
        for (int k = static_cast<int>(pos.size()); k <= K; ++k) {
            const double x = k * dx;
            pos.push_back(sample(x));
            neg.push_back(k == 0 ? pos.back() : sample(-x));
            if (!std::isfinite(pos.back()) || !std::isfinite(neg.back()))
                throw Divergence("non-finite product at |x| = " + num(x));
        }
    };
    struct Sums {
        double plain, abs;
    };
    auto trapezoid = [&](int K) {
        Sums s{0.0, 0.0};
        for (int k = -K; k <= K; ++k) {
            const double h = k >= 0 ? pos[static_cast<std::size_t>(k)] : neg[static_cast<std::size_t>(-k)];
            const double w = (k == -K || k == K) ? 0.5 : 1.0;
            s.plain += w * h;
            s.abs += w * std::abs(h);
        }
        return Sums{s.plain * dx, s.abs * dx};
    };

    int K = static_cast<int>(std::lround(o.start_box * o.points_per_unit));
    try {
        extend(K);
        Sums prev = trapezoid(K);
        Sums cur = prev;
        for (int d = 1; d <= o.max_doublings; ++d) {
            K *= 2;
            extend(K);
            cur = trapezoid(K);
            rec.doublings = d;
            if (std::abs(cur.abs - prev.abs) <= o.agreement * cur.abs) {
                rec.agreed = true;
                break;
            }
            prev = cur;
        }
        rec.product_integral = cur.plain;
        rec.abs_integral = cur.abs;
    } catch (const Error& e) {
        rec.status = ProbeStatus::inconclusive;
        rec.reason = std::string("product not computable: ") + e.what();
        rec.box = K * dx;
        return rec;
    }
    rec.box = K * dx;

    auto tail = fit_tail(pos, neg, K, dx, o.tail_fraction);
    rec.tail_exponent = tail.slope;
    rec.tail_residual = tail.residual;
    rec.tail = std::move(tail.points);

    if (rec.agreed && rec.tail_exponent < o.integrable_slope) {
        rec.status = ProbeStatus::integrable;
        rec.integrable = true;
    } else if (!rec.agreed && rec.tail_exponent >= 0.0 && rec.tail_residual < o.fit_tolerance) {
        rec.status = ProbeStatus::non_integrable;
        rec.reason = "|h| does not decay on the outer quarter of [-" + num(rec.box) + ", " + num(rec.box) + "]";
    } else {
        rec.status = ProbeStatus::inconclusive;
        rec.reason = rec.agreed ? "integral settled but the tail exponent " + num(rec.tail_exponent) +
                                      " is not below " + num(o.integrable_slope)
                                : "integral of |h| did not settle to " + num(100.0 * o.agreement) + "% within " +
                                      std::to_string(o.max_doublings) + " box doublings";
    }
    return rec;
}

// Trapezoid sums of a(u) b(u) on [-L, L] with a fixed step, widening L until the ends are negligible.
struct GridPairing {
    double value = 0.0;
    double abs_value = 0.0;
};

using Batch = std::function<std::vector<double>(const std::vector<double>&)>;

GridPairing grid_pairing(const Batch& a, const Batch& b)
{
    constexpr double step = 1.0 / 32.0;
    for (double L = 8.0; L <= 128.0; L *= 2.0) {
        const int K = static_cast<int>(std::lround(L / step));
        std::vector<double> xs;
        xs.reserve(2 * static_cast<std::size_t>(K) + 1);
        for (int k = -K; k <= K; ++k)
            xs.push_back(k * step);
        const auto av = a(xs);
        const auto bv = b(xs);
        GridPairing g;
        double peak = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double p = av[i] == 0.0 || bv[i] == 0.0 ? 0.0 : av[i] * bv[i];
            if (!std::isfinite(p))
                throw Divergence("pairing integrand is not finite at u = " + num(xs[i]));
            const double w = (i == 0 || i + 1 == xs.size()) ? 0.5 : 1.0;
            g.value += w * p;
            g.abs_value += w * std::abs(p);
            peak = std::max(peak, std::abs(p));
        }
        g.value *= step;
        g.abs_value *= step;
        const double ends = std::max(std::abs(av.front() * bv.front()), std::abs(av.back() * bv.back()));
        if (ends <= 1e-16 * peak)
            return g;
    }
    throw NotConverged("pairing integrand still significant at |u| = 128");
}

Batch pointwise(std::function<double(double)> f)
{
    return [f = std::move(f)](const std::vector<double>& xs) {
        std::vector<double> out;
        out.reserve(xs.size());
        for (double x : xs)
            out.push_back(f(x));
        return out;
    };
}

Batch apply_batch(const Multiplier& P, const TF& f)
{
    return [&P, f](const std::vector<double>& xs) { return multiplier_apply(P, f, xs); };
}

// (2 pi)^{-1} int P(xi) f1^(xi) f2^(xi) phi^(-xi) dxi
double spectral_pairing(const TF& f1, const TF& f2, const TF& phi, const Multiplier& P)
{
    auto integrand = [&](double xi) {
        const LogComplex a = f1.log_fourier(xi) * f2.log_fourier(xi) * phi.log_fourier(-xi);
        if (a.is_zero())
            return 0.0;
        const double la = a.log_abs + P.log_symbol(xi);
        if (la < -745.0)
            return 0.0;
        return std::exp(la) * std::cos(a.arg);
    };
    return integrate_line(integrand, -8.0, 8.0).value / (2.0 * pi);
}

}  // namespace

const char* to_string(Verdict v)
{
    switch (v) {
    case Verdict::exists: return "exists";
    case Verdict::fails: return "fails";
    case Verdict::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

const char* to_string(ProbeStatus s)
{
    switch (s) {
    case ProbeStatus::integrable: return "integrable";
    case ProbeStatus::non_integrable: return "non-integrable";
    case ProbeStatus::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

std::vector<ProbePair> default_probe_pairs()
{
    const std::vector<TF> p = {
        TF::gaussian(0.0, 1.0),   TF::gaussian(0.0, 0.5),          TF::gaussian(1.0, 0.7),
        TF::gaussian(-1.5, 1.2),  TF::gaussian(0.5, 2.0),          TF::gaussian(-0.3, 0.35),
        TF::hermite(1, 0.8),      0.5 * TF::hermite(2, 1.0),
    };
    std::vector<ProbePair> out;
    for (std::size_t i = 0; i < p.size(); ++i)
        out.push_back({p[i], p[(i + 1) % p.size()]});
    return out;
}

ConvolvabilityReport criterion_iv(const TF& f1, const TF& f2, const std::vector<ProbePair>& probes,
                                  const CriterionOptions& opts)
{
    if (probes.empty())
        throw InvalidArgument("criterion (iv) needs at least one probe pair");
    if (opts.points_per_unit < 1 || !(opts.start_box > 0.0) || opts.max_doublings < 1 || !(opts.agreement > 0.0) ||
        !(opts.tail_fraction > 0.0 && opts.tail_fraction <= 1.0))
        throw InvalidArgument("criterion (iv) options out of range");
    for (const auto& pp : probes)
        if (pp.phi.contains_point_masses() || pp.psi.contains_point_masses())
            throw InvalidArgument("probe functions must not contain point masses");

    ConvolvabilityReport r;
    r.f1 = f1.to_string();
    r.f2 = f2.to_string();
    const TF f1r = TF::reflect(f1);
    bool all_integrable = true;
    for (std::size_t i = 0; i < probes.size(); ++i) {
        r.probes.push_back(run_probe(f1r, f2, probes[i], opts));
        const auto s = r.probes.back().status;
        all_integrable = all_integrable && s == ProbeStatus::integrable;
        if (s == ProbeStatus::non_integrable)
            r.witnesses.push_back(static_cast<int>(i));
    }
    if (!r.witnesses.empty())
        r.verdict = Verdict::fails;
    else if (all_integrable)
        r.verdict = Verdict::exists;
    else
        r.verdict = Verdict::inconclusive;
    return r;
}

double pair_value(const TF& f1, const TF& f2, const TF& phi, const PairOptions& opts)
{
    if (phi.contains_point_masses())
        throw InvalidArgument("the test function must not contain point masses");
    if (!opts.acknowledge) {
        const ConvolvabilityReport screened =
            opts.report ? *opts.report : criterion_iv(f1, f2, default_probe_pairs());
        if (screened.verdict != Verdict::exists)
            throw InvalidArgument("pair " + f1.to_string() + ", " + f2.to_string() + " has verdict '" +
                                  to_string(screened.verdict) + "'; acknowledge to evaluate anyway");
    }

    try {
        // g(x) = int f2(y) phi(x + y) dy
        const TF f2r = TF::reflect(f2);
        auto g = [&](double x) { return convolve_at(f2r, phi, x); };

        if (f1.is_point_masses()) {
            double acc = 0.0;
            for (const auto& pm : f1.point_masses())
                acc += pm.weight * g(pm.x);
            return acc;
        }
        if (f1.contains_point_masses())
            throw InvalidArgument("mixed point masses and functions are not supported in " + f1.to_string());
        if (const auto c = f1.constant_value()) {
            if (f2.has_fourier() && phi.has_fourier())
                return *c * (f2.fourier(0.0) * phi.fourier(0.0)).real();
            return *c * integrate_line(g, -8.0, 8.0).value;
        }
        double lo = -8.0, hi = 8.0;
        if (const auto s = f1.essential_support()) {
            lo = s->lo;
            hi = s->hi;
        }
        auto integrand = [&](double x) {
            const double v = g(x);
            return v == 0.0 ? 0.0 : f1.value(x) * v;
        };
        return integrate_line(integrand, lo, hi).value;
    } catch (const Divergence& e) {
        throw Divergence("pairing of " + f1.to_string() + " * " + f2.to_string() + " with " + phi.to_string() +
                         " diverges: " + e.what());
    }
}

AlgebraReport algebra_checks(const TF& f1, const TF& f2, const Multiplier& P, const std::vector<TF>& phis,
                             const PairOptions& opts)
{
    if (phis.empty())
        throw InvalidArgument("algebra checks need at least one test function");
    if (f2.contains_point_masses() || !f2.has_derivatives())
        throw InvalidArgument("P(D) f2 needs a smooth descriptor, got " + f2.to_string());

    AlgebraReport rep;
    rep.f1 = f1.to_string();
    rep.f2 = f2.to_string();
    rep.multiplier = P.describe();

    PairOptions ack;
    ack.acknowledge = true;
    if (!opts.acknowledge) {
        const ConvolvabilityReport screened = opts.report ? *opts.report : criterion_iv(f1, f2, default_probe_pairs());
        if (screened.verdict != Verdict::exists)
            throw InvalidArgument("pair " + rep.f1 + ", " + rep.f2 + " has verdict '" + to_string(screened.verdict) +
                                  "'; acknowledge to evaluate anyway");
    }

    const bool f1_smooth = !f1.contains_point_masses() && f1.has_fourier();
    rep.pass = true;
    for (const auto& phi : phis) {
        InterchangeRow row;
        row.phi = phi.to_string();
        const double v12 = pair_value(f1, f2, phi, ack);
        const double v21 = pair_value(f2, f1, phi, ack);
        row.commutativity = std::abs(v12 - v21);
        row.scale = std::max(std::abs(v12), std::abs(v21));

        std::vector<double> routes;
        if (P.is_identity()) {
            // P(D) f = f, so every route is the same spatial pairing.
            row.on_test = pair_value(f1, f2, phi, ack);
            row.on_f2 = pair_value(f1, f2, phi, ack);
            routes = {row.on_test, row.on_f2};
            if (f1_smooth) {
                row.on_f1 = pair_value(f1, f2, phi, ack);
                row.has_on_f1 = true;
                routes.push_back(row.on_f1);
            }
        } else {
            // <f1 * f2, P(-D) phi>; P is even so P(-D) = P(D).
            const auto t = grid_pairing(pointwise([&](double u) { return convolve_at(f1, f2, u); }),
                                        apply_batch(P, phi));
            row.on_test = t.value;
            const TF f1r = TF::reflect(f1);
            const auto s2 = grid_pairing(apply_batch(P, f2), pointwise([&](double y) { return convolve_at(f1r, phi, y); }));
            row.on_f2 = s2.value;
            routes = {row.on_test, row.on_f2};
            row.scale = std::max({row.scale, t.abs_value, s2.abs_value});
            if (f1_smooth) {
                const TF f2r = TF::reflect(f2);
                const auto s1 =
                    grid_pairing(apply_batch(P, f1), pointwise([&](double x) { return convolve_at(f2r, phi, x); }));
                row.on_f1 = s1.value;
                row.has_on_f1 = true;
                routes.push_back(row.on_f1);
                row.scale = std::max(row.scale, s1.abs_value);
            }
            if (f1.has_fourier() && f2.has_fourier() && phi.has_fourier()) {
                row.spectral = spectral_pairing(f1, f2, phi, P);
                row.has_spectral = true;
                routes.push_back(row.spectral);
            }
        }
        for (std::size_t i = 0; i < routes.size(); ++i)
            for (std::size_t j = i + 1; j < routes.size(); ++j)
                row.interchange = std::max(row.interchange, std::abs(routes[i] - routes[j]));
        for (double v : routes)
            row.scale = std::max(row.scale, std::abs(v));

        rep.max_commutativity = std::max(rep.max_commutativity, row.commutativity);
        rep.max_interchange = std::max(rep.max_interchange, row.interchange);
        rep.pass = rep.pass && row.commutativity <= 1e-5 * row.scale && row.interchange <= 1e-5 * row.scale;
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

}  // namespace qk

#include "qk/parametrix.hpp"

#include "qk/errors.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <sstream>

namespace qk {

namespace {

std::string num(double v) { return format_number(v); }

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

// cos and sin of 2 pi m / n, rounded from float128.
struct TrigTable {
    int n = 0;
    std::vector<quad> cq, sq;
    std::vector<double> c, s;

    explicit TrigTable(int n_, bool keep_quad) : n(n_)
    {
        const quad two_pi = 2 * boost::multiprecision::acos(quad(-1));
        c.resize(static_cast<std::size_t>(n));
        s.resize(static_cast<std::size_t>(n));
        if (keep_quad) {
            cq.resize(static_cast<std::size_t>(n));
            sq.resize(static_cast<std::size_t>(n));
        }
        for (int m = 0; m < n; ++m) {
            const quad a = two_pi * m / n;
            const quad cv = boost::multiprecision::cos(a);
            const quad sv = boost::multiprecision::sin(a);
            c[static_cast<std::size_t>(m)] = static_cast<double>(cv);
            s[static_cast<std::size_t>(m)] = static_cast<double>(sv);
            if (keep_quad) {
                cq[static_cast<std::size_t>(m)] = cv;
                sq[static_cast<std::size_t>(m)] = sv;
            }
        }
    }

    // index of xi_k x_i = 2 pi k (i - n/2) / n
    std::size_t index(long long k, int i) const
    {
        long long m = (k * (i - n / 2)) % n;
        if (m < 0)
            m += n;
        return static_cast<std::size_t>(m);
    }
};

std::uint64_t fnv1a(const std::string& s)
{
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

// Bound on (dxi / pi) sum_{k > K} 1/P(xi_k): the factors with rho_j <= xi_K give
// 1/P(xi) <= prod (rho_j / xi)^{2q}, integrated from xi_K.
class TailBound {
public:
    explicit TailBound(const Ultrapolynomial& P) : P_(P), next_(P.j0()) {}

    double at(double xi)
    {
        while (std::exp(P_.log_rho(next_)) <= xi) {
            sum_log_rho_ += P_.log_rho(next_);
            ++count_;
            ++next_;
        }
        const double e = 2.0 * P_.q() * count_;
        if (count_ == 0 || e <= 1.0)
            return std::numeric_limits<double>::infinity();
        const double log_prod = 2.0 * P_.q() * (sum_log_rho_ - count_ * std::log(xi));
        return std::exp(log_prod) * xi / (pi * (e - 1.0));
    }

private:
    const Ultrapolynomial& P_;
    int next_;
    int count_ = 0;
    double sum_log_rho_ = 0.0;
};

}  // namespace

double KernelGrid::log_ghat_at(int k) const
{
    if (k < 0)
        k = -k;
    if (k <= K)
        return log_ghat[static_cast<std::size_t>(k)];
    return -source->log_abs_real(k * dxi);
}

KernelGrid build_kernel(const Ultrapolynomial& P, const KernelGridSpec& spec, double tol)
{
    if (!is_power_of_two(spec.n) || spec.n < 16)
        throw InvalidArgument("kernel grid size must be a power of two >= 16");
    if (!(spec.x_max > 0.0))
        throw InvalidArgument("kernel grid half-width must be positive");
    if (!(tol > 0.0 && tol <= 1e-2))
        throw InvalidArgument("kernel tolerance must lie in (0, 1e-2]");

    KernelGrid G;
    G.spec = spec;
    G.tol = tol;
    G.dx = 2.0 * spec.x_max / spec.n;
    G.dxi = pi / spec.x_max;
    G.source = std::make_shared<const Ultrapolynomial>(P);

    TailBound tail(P);
    const int nyquist = spec.n / 2;
    int K = 0;
    double bound = std::numeric_limits<double>::infinity();
    for (int k = 1; k < nyquist; ++k) {
        bound = tail.at(k * G.dxi);
        if (bound < tol) {
            K = k;
            break;
        }
    }
    if (K == 0) {
        long long k = nyquist;
        while (k < (1ll << 30) && tail.at(static_cast<double>(k) * G.dxi) >= tol)
            k *= 2;
        throw OutOfBox("kernel tolerance " + num(tol) + " needs Xi >= " + num(static_cast<double>(k) * G.dxi) +
                       " but the grid resolves Xi < " + num(nyquist * G.dxi) + "; refine the x-grid");
    }
    G.K = K;
    G.xi_max = K * G.dxi;
    G.tail_bound = bound;

    G.log_ghat.resize(static_cast<std::size_t>(K) + 1);
    std::vector<double> coef(static_cast<std::size_t>(K) + 1);
    for (int k = 0; k <= K; ++k) {
        G.log_ghat[static_cast<std::size_t>(k)] = -P.log_abs_real(k * G.dxi);
        coef[static_cast<std::size_t>(k)] = G.dxi / pi * std::exp(G.log_ghat[static_cast<std::size_t>(k)]);
    }
    coef[0] *= 0.5;

    const TrigTable trig(spec.n, false);
    G.values.assign(static_cast<std::size_t>(spec.n), 0.0);
    for (int i = 0; i < spec.n; ++i) {
        double acc = coef[0];
        for (int k = 1; k <= K; ++k)
            acc += coef[static_cast<std::size_t>(k)] * trig.c[trig.index(k, i)];
        G.values[static_cast<std::size_t>(i)] = acc;
    }
    return G;
}

double kernel_mass(const KernelGrid& G)
{
    double acc = 0.0;
    for (double v : G.values)
        acc += v;
    return acc * G.dx;
}

ParsevalCheck parseval_check(const KernelGrid& G)
{
    ParsevalCheck r;
    for (double v : G.values)
        r.spatial += v * v;
    r.spatial *= G.dx;
    const Ultrapolynomial& P = *G.source;
    double xi_c = G.xi_max;
    while (-2.0 * P.log_abs_real(xi_c) > std::log(1e-40))
        xi_c += G.xi_max;
    r.spectral = integrate([&](double xi) { return std::exp(-2.0 * P.log_abs_real(xi)); }, 0.0, xi_c, 1e-13) / pi;
    r.rel_diff = std::abs(r.spatial - r.spectral) / r.spectral;
    return r;
}

std::string kernel_csv(const KernelGrid& G)
{
    std::ostringstream os;
    const std::string kv = G.source->to_kv();
    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a(kv)));
    os << kv;
    os << "upoly.hash=" << hash << '\n';
    os << "grid.x_max=" << num(G.spec.x_max) << '\n';
    os << "grid.n=" << G.spec.n << '\n';
    os << "quad.xi_max=" << num(G.xi_max) << '\n';
    os << "quad.n_xi=" << 2 * G.K + 1 << '\n';
    os << "quad.method=" << G.method << '\n';
    os << "tol=" << num(G.tol) << '\n';
    os << "tail_bound=" << num(G.tail_bound) << '\n';
    os << "x,G\n";
    for (int i = 0; i < G.size(); ++i)
        os << num(G.x(i)) << ',' << num(G.values[static_cast<std::size_t>(i)]) << '\n';
    return os.str();
}

// ---------------------------------------------------------------------------

DecayFit verify_decay(const KernelGrid& G, const WeightSequence& A, double t, int alpha_cap, int beta_cap,
                      const DecayOptions& opts)
{
    if (G.tail_bound > 1e-10)
        throw InvalidArgument("verify_decay needs a kernel with tail bound <= 1e-10, got " + num(G.tail_bound));
    if (!(t > 0.0))
        throw InvalidArgument("t must be positive");
    const WeightSequence& M = G.source->base();
    const int sigma_cap = opts.sigma_alpha_cap;
    if (alpha_cap < 0 || beta_cap < 0 || sigma_cap < 0)
        throw InvalidArgument("derivative caps must be nonnegative");
    if (std::max(alpha_cap, sigma_cap) > M.p_max())
        throw InvalidArgument("alpha cap exceeds the stored M_p table");
    if (beta_cap > A.p_max())
        throw InvalidArgument("beta cap exceeds the stored A_p table");

    const int n = G.size();
    const int half = n / 2;
    const TrigTable trig(n, false);
    const double log_t = std::log(t);

    std::vector<double> weight(static_cast<std::size_t>(n - half));
    bool weight_saturated = false;
    for (int i = half; i < n; ++i) {
        if (i == half)
            continue;
        const auto w = associated(A, t * G.x(i));
        weight[static_cast<std::size_t>(i - half)] = w.value;
        weight_saturated = weight_saturated || w.saturated;
    }

    DecayFit fit;
    fit.t = t;
    fit.sigma_alpha_cap = sigma_cap;
    double log_sigma = -std::numeric_limits<double>::infinity();
    double log_max_c = -std::numeric_limits<double>::infinity();
    std::vector<double> dvals(static_cast<std::size_t>(n - half));

    for (int alpha = 0; alpha <= std::max(alpha_cap, sigma_cap); ++alpha) {
        // coefficients of xi^alpha / P(xi), extended until they fall 1e-18 below their peak
        std::vector<double> log_c;
        double peak = -std::numeric_limits<double>::infinity();
        int peak_k = 0;
        for (int k = 0;; ++k) {
            if (k >= half)
                throw InvalidArgument("xi^" + std::to_string(alpha) +
                                      "/P(xi) is not resolved below the grid Nyquist frequency; raise Xi");
            const double lc = (k == 0 ? (alpha == 0 ? std::log(0.5) : -std::numeric_limits<double>::infinity())
                                      : alpha * std::log(k * G.dxi)) +
                              G.log_ghat_at(k);
            log_c.push_back(lc);
            if (lc > peak) {
                peak = lc;
                peak_k = k;
            }
            if (k > std::max(peak_k, G.K) && lc < peak + std::log(1e-18))
                break;
        }
        if (peak + std::log(G.dxi / pi) > 700.0)
            throw OutOfBox("xi^" + std::to_string(alpha) + "/P(xi) exceeds double range");
        std::vector<double> coef(log_c.size());
        for (std::size_t k = 0; k < log_c.size(); ++k)
            coef[k] = G.dxi / pi * std::exp(log_c[k]);

        const auto& table = (alpha % 2 == 0) ? trig.c : trig.s;
        for (int i = half; i < n; ++i) {
            double acc = 0.0;
            for (std::size_t k = 0; k < coef.size(); ++k)
                acc += coef[k] * table[trig.index(static_cast<long long>(k), i)];
            dvals[static_cast<std::size_t>(i - half)] = std::abs(acc);
        }

        const double log_m = M.log_value(alpha);
        if (alpha <= sigma_cap) {
            for (int i = half; i < n; ++i) {
                const double d = dvals[static_cast<std::size_t>(i - half)];
                if (d == 0.0)
                    continue;
                const double v = weight[static_cast<std::size_t>(i - half)] + std::log(d) + alpha * log_t - log_m;
                if (v > log_sigma) {
                    log_sigma = v;
                    fit.sigma_alpha = alpha;
                    fit.sigma_x = G.x(i);
                }
            }
        }
        if (alpha <= alpha_cap) {
            for (int beta = 0; beta <= beta_cap; ++beta) {
                DecayEntry e{alpha, beta, 0.0, 0.0};
                double best = -std::numeric_limits<double>::infinity();
                for (int i = half; i < n; ++i) {
                    const double x = G.x(i);
                    const double d = dvals[static_cast<std::size_t>(i - half)];
                    if (d == 0.0 || (x == 0.0 && beta > 0))
                        continue;
                    const double v = (beta > 0 ? beta * std::log(x) : 0.0) + std::log(d);
                    if (v > best) {
                        best = v;
                        e.x_at = x;
                    }
                }
                const double log_c_fit = best + (alpha + beta) * log_t - log_m - A.log_value(beta);
                e.C = std::exp(log_c_fit);
                log_max_c = std::max(log_max_c, log_c_fit);
                fit.table.push_back(e);
            }
        }
    }
    fit.sigma_t = std::exp(log_sigma);
    fit.max_C = std::exp(log_max_c);
    fit.saturated = fit.sigma_alpha == sigma_cap || fit.sigma_x >= G.x(n - 1) || weight_saturated;
    fit.pass = std::isfinite(fit.max_C) && std::all_of(fit.table.begin(), fit.table.end(),
                                                       [](const DecayEntry& e) { return std::isfinite(e.C); });
    return fit;
}

// ---------------------------------------------------------------------------

DeltaCheck verify_delta(const KernelGrid& G, const TestFunction& phi, int min_band)
{
    if (phi.contains_point_masses() || !phi.has_fourier())
        throw InvalidArgument("verify_delta needs a function with an exact Fourier transform, got " + phi.to_string());
    const Ultrapolynomial& P = *G.source;
    const int n = G.size();
    const int half = n / 2;

    // Band: smallest K' >= K whose dropped |phi^| mass is below tol.
    std::vector<LogComplex> fpos, fneg;
    std::vector<double> mass;
    int quiet = 0;
    for (int k = 0; k < half; ++k) {
        fpos.push_back(phi.log_fourier(k * G.dxi));
        fneg.push_back(phi.log_fourier(-k * G.dxi));
        const double m = G.dxi / pi * std::exp(std::max(fpos.back().log_abs, fneg.back().log_abs));
        mass.push_back(m);
        quiet = m < 1e-6 * G.tol ? quiet + 1 : 0;
        if (quiet >= 64 && k >= std::max(G.K, min_band))
            break;
    }
    if (quiet < 64)
        throw OutOfBox("spectrum of " + phi.to_string() + " not resolved below the grid Nyquist frequency");
    int band = static_cast<int>(mass.size()) - 1;
    double dropped = 0.0;
    while (band > std::max(G.K, min_band) && dropped + mass[static_cast<std::size_t>(band)] < G.tol) {
        dropped += mass[static_cast<std::size_t>(band)];
        --band;
    }

    DeltaCheck r;
    r.band = band;
    r.target = phi.value(0.0);

    std::vector<double> log_ghat(static_cast<std::size_t>(band) + 1), log_p(static_cast<std::size_t>(band) + 1);
    for (int k = 0; k <= band; ++k) {
        log_ghat[static_cast<std::size_t>(k)] = G.log_ghat_at(k);
        log_p[static_cast<std::size_t>(k)] = P.log_abs_real(k * G.dxi);
    }

    // (a) (dxi / 2 pi) sum_k G^_k P(xi_k) phi^(-xi_k)
    double spectral = 0.0;
    for (int k = -band; k <= band; ++k) {
        const std::size_t a = static_cast<std::size_t>(std::abs(k));
        const LogComplex& f = k >= 0 ? fneg[a] : fpos[a];
        spectral += std::exp(log_ghat[a] + log_p[a] + f.log_abs) * std::cos(f.arg);
    }
    r.spectral = spectral * G.dxi / (2.0 * pi);

    // (b) sum_i G_i psi_i dx with psi = P(-D) phi band-limited to |k| <= band, in float128
    const TrigTable trig(n, true);
    std::vector<quad> gcoef(static_cast<std::size_t>(band) + 1), pc(static_cast<std::size_t>(band) + 1),
        ps(static_cast<std::size_t>(band) + 1);
    const quad scale = quad(G.dxi) / (2 * boost::multiprecision::acos(quad(-1)));
    for (int k = 0; k <= band; ++k) {
        const std::size_t a = static_cast<std::size_t>(k);
        const quad w = k == 0 ? quad(1) : quad(2);
        gcoef[a] = scale * w * boost::multiprecision::exp(quad(log_ghat[a]));
        const quad mag = scale * w * boost::multiprecision::exp(quad(log_p[a]) + quad(fpos[a].log_abs));
        pc[a] = mag * quad(std::cos(fpos[a].arg));
        ps[a] = mag * quad(std::sin(fpos[a].arg));
    }
    quad acc = 0;
    for (int i = 0; i < n; ++i) {
        quad g = 0, psi = 0;
        for (int k = 0; k <= band; ++k) {
            const std::size_t a = static_cast<std::size_t>(k);
            const std::size_t m = trig.index(k, i);
            g += gcoef[a] * trig.cq[m];
            psi += pc[a] * trig.cq[m] - ps[a] * trig.sq[m];
        }
        acc += g * psi;
    }
    r.spatial = static_cast<double>(acc * quad(G.dx));

    r.route_gap = std::abs(r.spectral - r.spatial);
    r.residual = std::max(std::abs(r.spectral - r.target), std::abs(r.spatial - r.target));
    if (r.route_gap > 10.0 * G.tol)
        throw Inconsistent("spectral and spatial pairings differ by " + num(r.route_gap) + " (tol " + num(G.tol) +
                           "); refine the kernel grid");
    return r;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<int> window_indices(const KernelGrid& G, Interval window)
{
    if (!(window.lo < window.hi) || window.lo < G.x(0) || window.hi > G.x(G.size() - 1))
        throw InvalidArgument("window must be a nonempty interval inside the kernel grid");
    std::vector<int> idx;
    for (int i = 0; i < G.size(); ++i)
        if (G.x(i) >= window.lo && G.x(i) <= window.hi)
            idx.push_back(i);
    return idx;
}

struct FftwBuffer {
    fftw_complex* data;
    explicit FftwBuffer(int n) : data(fftw_alloc_complex(static_cast<std::size_t>(n))) {}
    ~FftwBuffer() { fftw_free(data); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;
};

}  // namespace

WeierstrassResult solve_weierstrass(const KernelGrid& G, const WeierstrassParams& w, Interval window)
{
    if (!(w.a > 0.0 && w.a < 1.0))
        throw InvalidArgument("Weierstrass amplitude a must lie in (0, 1)");
    if (w.b < 3 || w.b % 2 == 0)
        throw InvalidArgument("Weierstrass frequency base b must be an odd integer >= 3");
    if (!(w.a * w.b > 1.0))
        throw InvalidArgument("Weierstrass parameters need a b > 1");
    if (!(w.tau > 0.0))
        throw InvalidArgument("tau must be positive: an undamped target has no convergent convolution with G");
    if (w.n_terms < 0 || w.n_terms > 30)
        throw InvalidArgument("Weierstrass term count must lie in [0, 30]");
    if (!(w.r > 0.0))
        throw InvalidArgument("decay-fit scale r must be positive");
    if (std::floor(G.spec.x_max) != G.spec.x_max)
        throw InvalidArgument("solve_weierstrass needs an integral grid half-width so b^n pi lies on the xi-grid");

    const Ultrapolynomial& P = *G.source;
    const auto idx = window_indices(G, window);
    const int n = G.size();

    WeierstrassResult out;
    {
        double inside = 0.0, total = 0.0;
        for (int i = 0; i < n; ++i) {
            const double v = std::abs(G.values[static_cast<std::size_t>(i)]);
            total += v;
            if (G.x(i) >= window.lo && G.x(i) <= window.hi)
                inside += v;
        }
        out.mass_outside = (total - inside) / total;
        if (out.mass_outside > 0.01)
            throw InvalidArgument("window holds less than 99% of the mass of |G|; widen it");
    }

    const TestFunction g = TestFunction::weierstrass(w.a, w.b, w.tau, w.n_terms);

    // f^_k = g^(xi_k) G^_k on the kernel's band
    std::vector<double> fhat(static_cast<std::size_t>(G.K) + 1);
    for (int k = 0; k <= G.K; ++k)
        fhat[static_cast<std::size_t>(k)] = g.fourier(k * G.dxi).real() * std::exp(G.log_ghat_at(k));

    const TrigTable trig(n, false);
    const WeightSequence& M = P.base();
    if (M.p_max() < 6)
        throw InvalidArgument("decay fit needs M_0..M_6");
    out.decay_fit = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = G.x(i);
        const bool in_window = x >= window.lo && x <= window.hi;
        const bool in_fit = std::abs(x) <= 0.5 * G.spec.x_max;
        if (!in_window && !in_fit)
            continue;
        for (int j = 0; j <= 6; ++j) {
            // d^j/dx^j cos(xi x) = xi^j cos(xi x + j pi / 2)
            double acc = j == 0 ? 0.5 * fhat[0] : 0.0;
            for (int k = 1; k <= G.K; ++k) {
                const double xi = k * G.dxi;
                const std::size_t m = trig.index(k, i);
                double tr = 0.0;
                switch (j % 4) {
                case 0: tr = trig.c[m]; break;
                case 1: tr = -trig.s[m]; break;
                case 2: tr = -trig.c[m]; break;
                default: tr = trig.s[m]; break;
                }
                acc += fhat[static_cast<std::size_t>(k)] * std::pow(xi, j) * tr;
            }
            acc *= G.dxi / pi;
            if (j == 0 && in_window) {
                out.xs.push_back(x);
                out.f.push_back(acc);
                out.g.push_back(g.value(x));
            }
            if (in_fit) {
                const double v = std::pow(w.r, j) * std::exp(w.tau * std::abs(x) - M.log_value(j)) * std::abs(acc);
                if (v > out.decay_fit) {
                    out.decay_fit = v;
                    out.decay_argmax_k = j;
                }
            }
        }
    }

    // Symbol m(xi) = P(xi) G^(xi) with G^ measured from the kernel samples, on the band
    // where P stays below 1e10; past it the sampled G^ is below double resolution and
    // m = 1 is used.
    int band = 0;
    while (band + 1 <= G.K && P.log_abs_real((band + 1) * G.dxi) <= std::log(1e10))
        ++band;
    out.symbol_band = band;
    std::vector<double> symbol(static_cast<std::size_t>(band) + 1);
    for (int k = 0; k <= band; ++k) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i)
            acc += G.values[static_cast<std::size_t>(i)] * trig.c[trig.index(k, i)];
        symbol[static_cast<std::size_t>(k)] = std::exp(P.log_abs_real(k * G.dxi)) * acc * G.dx;
    }

    const int fft_n = 1 << 21;
    if (fft_n % n != 0)
        throw InvalidArgument("kernel grid larger than the reconstruction transform");
    out.fft_size = fft_n;
    const int stride = fft_n / n;
    FftwBuffer in(fft_n), res(fft_n);
    fftw_plan plan = fftw_plan_dft_1d(fft_n, in.data, res.data, FFTW_BACKWARD, FFTW_ESTIMATE);
    out.pdf.assign(out.xs.size(), 0.0);
    const long long x_max = static_cast<long long>(G.spec.x_max);
    long long bn = 1;
    double an = 1.0;
    for (int term = 0; term <= w.n_terms; ++term, bn *= w.b, an *= w.a) {
        const long long shift = bn * x_max;  // omega_n / dxi
        for (int u = 0; u < fft_n; ++u) {
            const long long s = u < fft_n / 2 ? u : u - fft_n;
            const double xi = s * G.dxi;
            const long long kk = std::llabs(s + shift);
            const double m = kk <= band ? symbol[static_cast<std::size_t>(kk)] : 1.0;
            const double lorentz = 2.0 * w.tau / (w.tau * w.tau + xi * xi);
            in.data[u][0] = (s % 2 == 0 ? 1.0 : -1.0) * an * m * lorentz;
            in.data[u][1] = 0.0;
        }
        fftw_execute(plan);
        const double omega = static_cast<double>(bn) * pi;
        for (std::size_t p = 0; p < idx.size(); ++p) {
            const int j = idx[p] * stride;
            const cplx h{res.data[j][0], res.data[j][1]};
            const double x = out.xs[p];
            out.pdf[p] += (std::polar(1.0, omega * x) * h).real() * G.dxi / (2.0 * pi);
        }
    }
    fftw_destroy_plan(plan);

    out.residual = 0.0;
    for (std::size_t p = 0; p < out.xs.size(); ++p)
        out.residual = std::max(out.residual, std::abs(out.pdf[p] - out.g[p]));
    return out;
}

CosineSolve solve_cosine(const KernelGrid& G, double omega, Interval window)
{
    if (!(omega > 0.0))
        throw InvalidArgument("cosine frequency must be positive");
    const auto idx = window_indices(G, window);
    const Ultrapolynomial& P = *G.source;
    CosineSolve out;
    out.coefficient = std::exp(-P.log_abs_real(omega));
    std::vector<double> xs;
    for (int i : idx)
        xs.push_back(G.x(i));
    const auto f = out.coefficient * TestFunction::cosine(omega);
    const auto pdf = multiplier_apply(Multiplier::from(P), f, xs);
    for (std::size_t p = 0; p < xs.size(); ++p)
        out.residual = std::max(out.residual, std::abs(pdf[p] - std::cos(omega * xs[p])));
    return out;
}

}  // namespace qk

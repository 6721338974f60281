#pragma once

#include "qk/test_function.hpp"
#include "qk/ultrapoly.hpp"
#include "qk/weight_sequences.hpp"

#include <memory>
#include <string>
#include <vector>

namespace qk {

// x_i = (i - n/2) dx with dx = 2 x_max / n; xi_k = k dxi with dxi = pi / x_max.
struct KernelGridSpec {
    double x_max = 32.0;
    int n = 1 << 14;
};

// Samples of G = F^{-1}(1/P) on a uniform grid. G is computed as the cosine sum
// (dxi / pi) [G^_0 / 2 + sum_{k=1}^{K} G^_k cos(xi_k x)], G^_k = 1/P(xi_k).
struct KernelGrid {
    KernelGridSpec spec;
    double dx = 0.0;
    double dxi = 0.0;
    double tol = 0.0;
    int K = 0;
    double xi_max = 0.0;
    double tail_bound = 0.0;  // bound on the dropped terms k > K, uniform in x
    std::string method = "cosine-sum";
    std::shared_ptr<const Ultrapolynomial> source;
    std::vector<double> log_ghat;  // -log P(xi_k), k = 0..K
    std::vector<double> values;

    int size() const { return spec.n; }
    double x(int i) const { return (i - spec.n / 2) * dx; }
    // -log P(xi_k) for any k >= 0, reusing the table when k <= K.
    double log_ghat_at(int k) const;
};

// Throws InvalidArgument for malformed grids, OutOfBox with the required cutoff when
// tol cannot be met below the Nyquist frequency of the grid.
KernelGrid build_kernel(const Ultrapolynomial& P, const KernelGridSpec& spec = {}, double tol = 1e-10);

// Trapezoid integral of G over the grid.
double kernel_mass(const KernelGrid& G);

struct ParsevalCheck {
    double spatial = 0.0;   // sum G_i^2 dx
    double spectral = 0.0;  // (2 pi)^{-1} int P^{-2}
    double rel_diff = 0.0;
};
ParsevalCheck parseval_check(const KernelGrid& G);

// key=value header lines followed by "x,G" rows.
std::string kernel_csv(const KernelGrid& G);

struct DecayEntry {
    int alpha = 0;
    int beta = 0;
    double C = 0.0;
    double x_at = 0.0;
};

struct DecayFit {
    double t = 0.0;
    std::vector<DecayEntry> table;
    double max_C = 0.0;
    double sigma_t = 0.0;
    int sigma_alpha = 0;
    double sigma_x = 0.0;
    int sigma_alpha_cap = 0;
    bool saturated = false;  // sigma_t attained at the alpha cap or the grid edge
    bool pass = false;
};

struct DecayOptions {
    int sigma_alpha_cap = 60;
};

// D^alpha G comes from the multiplier xi^alpha / P(xi), never from differencing the grid.
// M is the base of the ultrapolynomial behind G, A the decay sequence.
DecayFit verify_decay(const KernelGrid& G, const WeightSequence& A, double t, int alpha_cap, int beta_cap,
                      const DecayOptions& opts = {});

struct DeltaCheck {
    double spectral = 0.0;
    double spatial = 0.0;
    double target = 0.0;  // phi(0)
    double residual = 0.0;
    double route_gap = 0.0;
    int band = 0;  // spectral samples |k| <= band
};

// Pairs G with P(-D) phi in two ways: spectrally, and by spatial quadrature in float128
// against the band-limited P(-D) phi. Throws Inconsistent when the routes disagree by
// more than 10 tol. The spectral band is at least min_band samples wide; pairings that share
// a band are exactly linear in phi.
DeltaCheck verify_delta(const KernelGrid& G, const TestFunction& phi, int min_band = 0);

struct WeierstrassParams {
    double a = 0.5;
    int b = 3;
    double tau = 1.0;
    int n_terms = 12;
    double r = 1.0;  // derivative scale in the decay fit
};

struct WeierstrassResult {
    std::vector<double> xs;   // kernel grid points inside the window
    std::vector<double> f;    // (G * g)(x)
    std::vector<double> g;    // target
    std::vector<double> pdf;  // P(D) f
    double residual = 0.0;
    double decay_fit = 0.0;   // sup_{k<=6} r^k |e^{tau|x|} f^(k)| / M_k over |x| <= x_max / 2
    int decay_argmax_k = 0;
    double mass_outside = 0.0;  // fraction of int |G| outside the window
    int fft_size = 0;
    int symbol_band = 0;  // |k| <= band uses P(xi_k) times the sampled G^
};

// Target g(x) = exp(-tau|x|) sum_{n<=N} a^n cos(b^n pi x), f = G * g, residual sup|P(D) f - g|
// over the window.
WeierstrassResult solve_weierstrass(const KernelGrid& G, const WeierstrassParams& w, Interval window);

struct CosineSolve {
    double coefficient = 0.0;  // f = coefficient * cos(omega x)
    double residual = 0.0;
};

// Undamped single cosine g = cos(omega x): f = cos(omega x) / P(omega).
CosineSolve solve_cosine(const KernelGrid& G, double omega, Interval window);

}  // namespace qk

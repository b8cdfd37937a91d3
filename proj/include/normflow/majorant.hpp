#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "dense.hpp"
#include "errors.hpp"
#include "series.hpp"

namespace normflow {

/// Parameters of the one-variable majorant a rho zeta^s / (rho - zeta).
struct GeometricMajorant {
    double a = 0.0;
    int s = 0;
};

/// a = polydisk_norm_upper(H, rho) / rho^s with s the lowest degree present; empty for H = 0.
inline std::optional<GeometricMajorant> geometric_majorant(const TruncatedSeries &h, double rho)
{
    detail::require(rho > 0.0, "geometric_majorant: rho must be positive");
    if (h.empty()) {
        return std::nullopt;
    }
    const int s = h.terms().begin()->first.degree();
    return GeometricMajorant{polydisk_norm_upper(h, rho) / std::pow(rho, s), s};
}

/// a rho zeta^s / (rho - zeta) with zeta = sum_j (z_j + zbar_j), expanded in the 2n variables
/// through degree max_degree: the coefficient of z^k is a rho^{s-|k|} |k|! / prod(k_j! kbar_j!).
inline TruncatedSeries majorant_expansion(const GeometricMajorant &m, double rho, int n, int max_degree)
{
    detail::require(rho > 0.0, "majorant_expansion: rho must be positive");
    TruncatedSeries out(n, max_degree, 0);
    for (const MultiIndex &k : enumerate_indices(n, m.s, max_degree)) {
        double log_multinomial = std::lgamma(k.degree() + 1.0);
        for (int j = 0; j < n; ++j) {
            log_multinomial -= std::lgamma(k.k()[j] + 1.0) + std::lgamma(k.kbar()[j] + 1.0);
        }
        out.set(k, m.a * std::pow(rho, m.s - k.degree()) * std::exp(log_multinomial));
    }
    return out;
}

/// b / (1 + 2 a tau + 2 sqrt(a tau (1 + a tau))) with tau = 8 n delta: the radius of the disk
/// where the solution of G = f'(zeta + tau G), f'(x) = a x^2 / (b - x), stays analytic.
inline double burgers_radius(double a, double b, int n, double delta)
{
    detail::require(a > 0.0 && b > 0.0, "burgers_radius: a and b must be positive");
    detail::require(n >= 1, "burgers_radius: n must be positive");
    detail::require(delta >= 0.0, "burgers_radius: delta must be nonnegative");
    const double at = a * 8.0 * n * delta;
    return b / (1.0 + 2.0 * at + 2.0 * std::sqrt(at * (1.0 + at)));
}

struct FixedPointResult {
    bool converged = false;
    double value = 0.0;
    int iterations = 0;
};

/// Iterates G <- a x^2 / (b - x), x = zeta + tau G, from G = 0 (tolerance 1e-12, at most 200
/// iterations). Failure means the pole was crossed, the iterates blew up or did not settle.
inline FixedPointResult burgers_fixed_point(double a, double b, int n, double delta, double zeta,
                                            int max_iterations = 200, double tolerance = 1e-12)
{
    const double tau = 8.0 * n * delta;
    FixedPointResult r;
    double g = 0.0;
    for (int i = 1; i <= max_iterations; ++i) {
        const double x = zeta + tau * g;
        if (x >= b) {
            r.iterations = i;
            return r;
        }
        const double next = a * x * x / (b - x);
        if (!std::isfinite(next)) {
            r.iterations = i;
            return r;
        }
        const bool done = std::abs(next - g) <= tolerance * std::max(1.0, std::abs(next));
        g = next;
        if (done) {
            return {true, g, i};
        }
    }
    r.value = g;
    r.iterations = max_iterations;
    return r;
}

/// Largest real zeta in [0, b] for which burgers_fixed_point converges, by bisection.
inline double burgers_empirical_boundary(double a, double b, int n, double delta, int max_iterations = 200)
{
    double lo = 0.0;
    double hi = b;
    for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        (burgers_fixed_point(a, b, n, delta, mid, max_iterations).converged ? lo : hi) = mid;
    }
    return lo;
}

/// RK4 for dHbar/ddelta = 4 sum_j d_{z_j} Hbar d_{zbar_j} Hbar. Coefficients stay nonnegative.
inline TruncatedSeries majorant_flow(const TruncatedSeries &seed, double delta, int steps)
{
    detail::require(delta >= 0.0, "majorant_flow: delta must be nonnegative");
    detail::require(steps >= 1, "majorant_flow: steps must be at least 1");
    for (const auto &[k, c] : seed.terms()) {
        if (c.imag() != 0.0 || c.real() < 0.0) {
            throw PreconditionError("majorant_flow: coefficient at " + to_string(k) + " is not a nonnegative real");
        }
    }
    const int n = seed.dof();
    const int M = seed.max_degree();
    const DenseLayout layout(n, 0, M);
    const BracketStencil stencil(layout, layout, layout);
    std::vector<double> y(layout.size());
    for (const auto &[k, c] : seed.terms()) {
        y[static_cast<std::size_t>(layout.find(k))] = c.real();
    }
    const std::size_t N = y.size();
    std::vector<double> k1(N), k2(N), k3(N), k4(N), tmp(N);
    auto rhs = [&](const std::vector<double> &v, std::vector<double> &out) {
        std::fill(out.begin(), out.end(), 0.0);
        stencil.gradient_product(v, v, out, 4.0);
    };
    const double h = delta / steps;
    for (int s = 0; s < steps && delta > 0.0; ++s) {
        rhs(y, k1);
        for (std::size_t i = 0; i < N; ++i) {
            tmp[i] = y[i] + 0.5 * h * k1[i];
        }
        rhs(tmp, k2);
        for (std::size_t i = 0; i < N; ++i) {
            tmp[i] = y[i] + 0.5 * h * k2[i];
        }
        rhs(tmp, k3);
        for (std::size_t i = 0; i < N; ++i) {
            tmp[i] = y[i] + h * k3[i];
        }
        rhs(tmp, k4);
        for (std::size_t i = 0; i < N; ++i) {
            y[i] += (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    TruncatedSeries out(n, M, seed.min_degree());
    for (std::size_t i = 0; i < N; ++i) {
        if (y[i] != 0.0) {
            out.set(layout.index(i), y[i]);
        }
    }
    return out;
}

struct ConvolutionSum {
    double value = 0.0;
    double bound = 0.0;
};

/// S_gamma(N) = sum_{n1 + n2 = N, n1, n2 >= 1} n1^-gamma n2^-gamma and the bound
/// 2 (2/N)^gamma zeta(gamma).
inline ConvolutionSum s_gamma(double gamma, int N)
{
    detail::require(gamma >= 2.0, "s_gamma: gamma must be at least 2");
    detail::require(N >= 2, "s_gamma: N must be at least 2");
    ConvolutionSum r;
    for (int n1 = 1; n1 < N; ++n1) {
        r.value += std::pow(n1, -gamma) * std::pow(N - n1, -gamma);
    }
    r.bound = 2.0 * std::pow(2.0 / N, gamma) * std::riemann_zeta(gamma);
    return r;
}

/// (rho / mu)^{2n} polydisk_norm_upper(F, rho): bounds the norm at radius rho - mu of any sub-series.
inline double subseries_norm_bound(const TruncatedSeries &f, double rho, double mu)
{
    detail::require(mu > 0.0 && mu < rho, "subseries_norm_bound: need 0 < mu < rho");
    return std::pow(rho / mu, 2 * f.dof()) * polydisk_norm_upper(f, rho);
}

/// c_F s^beta m^-beta rho^{s-m} with rho = e^{-beta/s} R (rho = R when beta = 0).
inline double coefficient_tail_bound(double c_f, double R, int s, int beta, int m)
{
    detail::require(R > 0.0, "coefficient_tail_bound: R must be positive");
    detail::require(beta >= 0 && s >= 0 && m >= s, "coefficient_tail_bound: need m >= s >= 0 and beta >= 0");
    if (beta == 0) {
        return c_f * std::pow(R, s - m);
    }
    detail::require(s > 0, "coefficient_tail_bound: s = 0 requires beta = 0");
    const double rho = std::exp(-static_cast<double>(beta) / s) * R;
    return c_f * std::pow(static_cast<double>(s) / m, beta) * std::pow(rho, s - m);
}

/// Largest rho with polydisk_norm_upper(H, rho) <= threshold (bisection; the norm is increasing).
inline double majorant_radius(const TruncatedSeries &h, double threshold)
{
    detail::require(threshold > 0.0, "majorant_radius: threshold must be positive");
    if (h.empty()) {
        return INFINITY;
    }
    double lo = 0.0;
    double hi = 1.0;
    while (polydisk_norm_upper(h, hi) <= threshold) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e12) {
            return hi;
        }
    }
    for (int i = 0; i < 100; ++i) {
        const double mid = 0.5 * (lo + hi);
        (polydisk_norm_upper(h, mid) <= threshold ? lo : hi) = mid;
    }
    return lo;
}

struct InverseLinearFit {
    double A = 0.0;
    double B = 0.0;
    /// max |A / (1 + B delta) - r| / r over the samples.
    double max_relative_residual = 0.0;
};

/// Fit of 1/r = (1 + B delta) / A by least squares weighted with r^2, so the residuals being
/// minimized are relative ones.
inline InverseLinearFit fit_inverse_linear(const std::vector<double> &deltas, const std::vector<double> &radii)
{
    detail::require(deltas.size() == radii.size() && deltas.size() >= 2, "fit_inverse_linear: need matching samples");
    double sw = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        detail::require(radii[i] > 0.0, "fit_inverse_linear: radii must be positive");
        const double y = 1.0 / radii[i];
        const double w = radii[i] * radii[i];
        sw += w;
        sx += w * deltas[i];
        sy += w * y;
        sxx += w * deltas[i] * deltas[i];
        sxy += w * deltas[i] * y;
    }
    const double slope = (sw * sxy - sx * sy) / (sw * sxx - sx * sx);
    const double intercept = (sy - slope * sx) / sw;
    InverseLinearFit fit{1.0 / intercept, slope / intercept, 0.0};
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        const double model = fit.A / (1.0 + fit.B * deltas[i]);
        fit.max_relative_residual = std::max(fit.max_relative_residual, std::abs(model - radii[i]) / radii[i]);
    }
    return fit;
}

} // namespace normflow

#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "errors.hpp"
#include "exp_poly.hpp"
#include "flow.hpp"
#include "frequency.hpp"
#include "graded.hpp"
#include "normal_series.hpp"
#include "series.hpp"

namespace normflow {

/// exp(-sigma_q delta <q, d>N0) N^q for every q != 0; N0 is left as is. The exponent is a
/// multiplier without constant term, so its exponential series terminates at the truncation.
inline GradedHamiltonian asymptotic_flow_explicit(const GradedHamiltonian &seed, const FrequencyVector &freq,
                                                  double delta)
{
    detail::require_same_dof(seed.dof(), freq.dof(), "asymptotic_flow_explicit");
    detail::require(delta >= 0.0, "asymptotic_flow_explicit: delta must be nonnegative");
    const IntVector zero(seed.dof(), 0);
    const NormalSeries n0 = seed.component(zero);
    GradedHamiltonian out(seed.dof(), seed.max_degree());
    for (const auto &[q, nq] : seed.components()) {
        if (is_zero(q)) {
            out.set(q, nq);
            continue;
        }
        const int K = seed.kappa_limit(q);
        NormalSeries g = directional(n0.truncated(K + 1), q).truncated(K);
        g *= -freq.sigma(q) * delta;
        out.set(q, product(exp_series(g, K), nq.truncated(K)));
    }
    return out;
}

/// RK4 for dN^q/ddelta = -sigma_q N^q <q, d>N0 with N0 frozen.
inline GradedHamiltonian asymptotic_flow_ode(const GradedHamiltonian &seed, const FrequencyVector &freq, double delta,
                                             int steps)
{
    detail::require_same_dof(seed.dof(), freq.dof(), "asymptotic_flow_ode");
    detail::require(delta >= 0.0, "asymptotic_flow_ode: delta must be nonnegative");
    detail::require(steps >= 1, "asymptotic_flow_ode: steps must be at least 1");
    const IntVector zero(seed.dof(), 0);
    const NormalSeries n0 = seed.component(zero);
    GradedHamiltonian out(seed.dof(), seed.max_degree());
    const double h = delta / steps;
    for (const auto &[q, nq] : seed.components()) {
        if (is_zero(q)) {
            out.set(q, nq);
            continue;
        }
        const int K = seed.kappa_limit(q);
        NormalSeries rate = directional(n0.truncated(K + 1), q).truncated(K);
        rate *= -static_cast<double>(freq.sigma(q));
        auto f = [&](const NormalSeries &y) { return product(y, rate); };
        NormalSeries y = nq.truncated(K);
        for (int s = 0; s < steps; ++s) {
            const NormalSeries k1 = f(y);
            const NormalSeries k2 = f(y + (0.5 * h) * k1);
            const NormalSeries k3 = f(y + (0.5 * h) * k2);
            const NormalSeries k4 = f(y + h * k3);
            y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        out.set(q, y);
    }
    return out;
}

/// Initial value Ghat of the asymptotic system conjugate to the flow started at `seed`.
///
/// Every trajectory splits as calH_k = P_k(delta) + (terms with nu > 0), and the polynomial parts
/// P solve the asymptotic system (the coupling only produces decaying terms), so Ghat_k = P_k(0).
/// The polynomial parts are checked against an independent solve of the asymptotic system.
inline TruncatedSeries lambda_conjugacy(const TruncatedSeries &seed, const FrequencyVector &freq)
{
    const FlowSolution sol = solve_flow(seed, freq);
    TruncatedSeries ghat = TruncatedSeries::diamond(seed.dof(), seed.max_degree());
    for (const auto &[k, p] : sol.trajectories()) {
        for (const auto &[key, c] : p.terms()) {
            if (key.s == 0 && key.exponent.is_zero()) {
                ghat.set(k, c);
            }
        }
    }
    FlowOptions asymptotic;
    asymptotic.coupling = false;
    const FlowSolution reduced = solve_flow(ghat, freq, asymptotic);
    double scale = 1.0;
    for (const auto &[k, p] : sol.trajectories()) {
        scale = std::max(scale, p.polynomial_part().max_abs());
    }
    auto mismatch = [&](const MultiIndex &k) {
        ExpPolynomial diff = sol.trajectory(k).polynomial_part() - reduced.trajectory(k);
        diff.purge(1e-9 * scale);
        return !diff.is_zero();
    };
    for (const auto &[k, p] : sol.trajectories()) {
        if (mismatch(k)) {
            throw StructureError("lambda_conjugacy: polynomial part of " + to_string(k)
                                 + " does not solve the asymptotic system");
        }
    }
    for (const auto &[k, p] : reduced.trajectories()) {
        if (mismatch(k)) {
            throw StructureError("lambda_conjugacy: asymptotic trajectory of " + to_string(k)
                                 + " has no counterpart in the flow");
        }
    }
    return ghat;
}

/// e^{-omega_q delta} times the asymptotic solution, valid when every component has
/// <omega, q> >= 0 (there the coupling vanishes and this is the flow itself in H-variables).
inline GradedHamiltonian one_sided_flow(const GradedHamiltonian &seed, const FrequencyVector &freq, double delta)
{
    for (const auto &[q, nq] : seed.components()) {
        if (freq.sigma(q) < 0) {
            throw PreconditionError("one_sided_flow: component q = " + to_string(q) + " has <omega,q> < 0");
        }
    }
    GradedHamiltonian out = asymptotic_flow_explicit(seed, freq, delta);
    GradedHamiltonian scaled(out.dof(), out.max_degree());
    for (const auto &[q, nq] : out.components()) {
        scaled.set(q, std::exp(-freq.rate(q) * delta) * nq);
    }
    return scaled;
}

/// polydisk_norm_upper of the one-sided flow at each delta.
inline std::vector<double> divergence_probe(const GradedHamiltonian &seed, const FrequencyVector &freq, double rho,
                                            const std::vector<double> &deltas)
{
    std::vector<double> norms;
    for (double d : deltas) {
        norms.push_back(polydisk_norm_upper(one_sided_flow(seed, freq, d).reconstruct(), rho));
    }
    return norms;
}

/// Among q with sigma_q > 0 and 3 <= |q| <= max_degree - 2, the one minimizing omega_q / |q|
/// (ties broken by the canonical order of q).
inline IntVector smallest_divisor_direction(const FrequencyVector &freq, int max_degree)
{
    IntVector best;
    double best_ratio = std::numeric_limits<double>::infinity();
    for_each_vector_in_l1_ball(freq.dof(), max_degree - 2, [&](const IntVector &q) {
        const int order = l1_norm(q);
        if (order < 3 || freq.sigma(q) <= 0) {
            return;
        }
        const double ratio = freq.rate(q) / order;
        if (ratio < best_ratio) {
            best_ratio = ratio;
            best = q;
        }
    });
    detail::require(!best.empty(), "smallest_divisor_direction: no admissible q");
    return best;
}

/// N0 = (kappa_1^2 + ... + kappa_n^2) / 2 plus a single term z^{k_q} for the small-divisor direction q.
inline GradedHamiltonian make_divergence_seed(const FrequencyVector &freq, int max_degree)
{
    const int n = freq.dof();
    GradedHamiltonian seed(n, max_degree);
    NormalSeries n0(n, max_degree / 2);
    for (int j = 0; j < n; ++j) {
        IntVector l(n, 0);
        l[j] = 2;
        n0.set(l, 0.5);
    }
    seed.set(IntVector(n, 0), n0);
    const IntVector q = smallest_divisor_direction(freq, max_degree);
    NormalSeries nq(n, seed.kappa_limit(q));
    nq.set(IntVector(n, 0), 1.0);
    seed.set(q, nq);
    return seed;
}

struct ThreeSystemState {
    NormalSeries nq;
    NormalSeries nmq;
    NormalSeries n0;
};

namespace detail {

inline IntVector abs_vector(const IntVector &q)
{
    IntVector r(q.size());
    for (std::size_t j = 0; j < q.size(); ++j) {
        r[j] = std::abs(q[j]);
    }
    return r;
}

} // namespace detail

/// Right side of the system restricted to the components q, -q and 0 (sigma_q > 0):
///   dN^{+-q} = -N^{+-q} <q, d>N0,
///   dN0      = -2 <q, d>(kappa^{|q|} N^{-q} N^q) e^{-2 omega_q delta}.
inline ThreeSystemState three_system_rhs(const ThreeSystemState &y, const IntVector &q, double decay)
{
    const NormalSeries dn0 = directional(y.n0, q);
    const int top = y.n0.max_kappa_degree() + 1;
    const NormalSeries kq = shift(product(y.nmq.truncated(top), y.nq.truncated(top)), detail::abs_vector(q));
    NormalSeries r0 = directional(kq, q);
    r0 *= -2.0 * decay;
    NormalSeries rq = product(y.nq, dn0);
    rq *= -1.0;
    NormalSeries rmq = product(y.nmq, dn0);
    rmq *= -1.0;
    return {rq.truncated(y.nq.max_kappa_degree()), rmq.truncated(y.nmq.max_kappa_degree()),
            r0.truncated(y.n0.max_kappa_degree())};
}

/// RK4 integration of the three-component system over [0, delta]; each component keeps its own
/// kappa truncation.
inline ThreeSystemState three_system_integrate(const NormalSeries &nq, const NormalSeries &nmq, const NormalSeries &n0,
                                               const IntVector &q, const FrequencyVector &freq, double delta,
                                               int steps)
{
    detail::require(freq.sigma(q) > 0, "three_system_integrate: need <omega,q> > 0");
    detail::require(delta >= 0.0, "three_system_integrate: delta must be nonnegative");
    detail::require(steps >= 1, "three_system_integrate: steps must be at least 1");
    detail::require(n0.coeff(IntVector(n0.dof(), 0)) == Complex{} && n0.order() != 1,
                    "three_system_integrate: N0 must vanish to second order in kappa");
    const double wq = freq.rate(q);
    const double h = delta / steps;
    ThreeSystemState y{nq, nmq, n0};
    auto axpy = [](const ThreeSystemState &a, double s, const ThreeSystemState &b) {
        return ThreeSystemState{a.nq + s * b.nq, a.nmq + s * b.nmq, a.n0 + s * b.n0};
    };
    for (int i = 0; i < steps; ++i) {
        const double t = i * h;
        const ThreeSystemState k1 = three_system_rhs(y, q, std::exp(-2.0 * wq * t));
        const ThreeSystemState k2 = three_system_rhs(axpy(y, 0.5 * h, k1), q, std::exp(-2.0 * wq * (t + 0.5 * h)));
        const ThreeSystemState k3 = three_system_rhs(axpy(y, 0.5 * h, k2), q, std::exp(-2.0 * wq * (t + 0.5 * h)));
        const ThreeSystemState k4 = three_system_rhs(axpy(y, h, k3), q, std::exp(-2.0 * wq * (t + h)));
        y.nq += (h / 6.0) * (k1.nq + 2.0 * k2.nq + 2.0 * k3.nq + k4.nq);
        y.nmq += (h / 6.0) * (k1.nmq + 2.0 * k2.nmq + 2.0 * k3.nmq + k4.nmq);
        y.n0 += (h / 6.0) * (k1.n0 + 2.0 * k2.n0 + 2.0 * k3.n0 + k4.n0);
    }
    return y;
}

} // namespace normflow

#pragma once

#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "dense.hpp"
#include "errors.hpp"
#include "exp_poly.hpp"
#include "frequency.hpp"
#include "multi_index.hpp"
#include "normal_series.hpp"
#include "series.hpp"

namespace normflow {

/// Coefficient values of all degrees <= complete_through_degree. Keys absent from the map are zero.
template <class V>
struct Snapshot {
    int complete_through_degree = 2;
    std::map<MultiIndex, V> values;

    const V *find(const MultiIndex &k) const
    {
        if (k.degree() > complete_through_degree) {
            throw StructureError("snapshot lookup of " + to_string(k) + " beyond completed degree "
                                 + std::to_string(complete_through_degree));
        }
        auto it = values.find(k);
        return it == values.end() ? nullptr : &it->second;
    }
};

namespace detail {

/// k + e_j - (l, l) when all entries stay nonnegative.
inline bool v1_partner(const MultiIndex &k, const IntVector &l, int j, MultiIndex &out)
{
    IntVector a = k.k();
    IntVector abar = k.kbar();
    ++a[j];
    ++abar[j];
    for (std::size_t i = 0; i < l.size(); ++i) {
        a[i] -= l[i];
        abar[i] -= l[i];
        if (a[i] < 0 || abar[i] < 0) {
            return false;
        }
    }
    out = MultiIndex(std::move(a), std::move(abar));
    return true;
}

/// Decay rate of the factor multiplying H_l H_m in the equation for k = l + m - e_j:
/// omega_{l'} + omega_{m'} - omega_{l'+m'}, which reduces to 2 omega_{m'} when sigma_{k'} < 0 and to
/// 2 omega_{l'} otherwise.
inline Exponent pair_exponent(const FrequencyVector &freq, const IntVector &lp, const IntVector &mp)
{
    const int sk = freq.sigma(lp + mp);
    const IntVector &base = sk < 0 ? mp : lp;
    return Exponent::atom(freq, base + base);
}

inline int thread_count()
{
    if (const char *env = std::getenv("NORMFLOW_THREADS")) {
        const int t = std::atoi(env);
        if (t >= 1) {
            return t;
        }
    }
    return 1;
}

} // namespace detail

/// v_{1,k} = -sum_j sum_{|l|>=2} sigma_{k'} k'_j l_j H_{k+e_j-(l,l)} H_{l,l}.
/// The same expression serves H-variables (V = Complex) and trajectories (V = ExpPolynomial),
/// since the exponential weights cancel.
template <class V>
V rhs_v1(const MultiIndex &k, const Snapshot<V> &snap, const FrequencyVector &freq)
{
    V out{};
    const IntVector kp = k.prime();
    const int sk = freq.sigma(kp);
    if (sk == 0) {
        return out;
    }
    const int n = k.dof();
    for (int ll = 2; 2 * ll <= k.degree() - 1; ++ll) {
        for (const IntVector &l : enumerate_compositions(n, ll)) {
            const V *hl = snap.find(MultiIndex::diagonal(l));
            if (hl == nullptr) {
                continue;
            }
            for (int j = 0; j < n; ++j) {
                const int w = kp[j] * l[j];
                MultiIndex a;
                if (w == 0 || !detail::v1_partner(k, l, j, a) || a.degree() < 3) {
                    continue;
                }
                const V *ha = snap.find(a);
                if (ha != nullptr) {
                    out += Complex(-static_cast<double>(sk * w)) * ((*ha) * (*hl));
                }
            }
        }
    }
    return out;
}

namespace detail {

/// Calls f(l, m, j, w) for every ordered pair with sigma_{l'} < 0 < sigma_{m'}, l + m - k = e_j and
/// w = lbar_j m_j - l_j mbar_j != 0, restricted to keys present in the snapshot.
template <class V, class F>
void for_each_v2_pair(const MultiIndex &k, const Snapshot<V> &snap, const FrequencyVector &freq, F &&f)
{
    const int n = k.dof();
    for (const MultiIndex &l : enumerate_indices(n, 3, k.degree() - 1)) {
        if (freq.sigma(l.prime()) >= 0) {
            continue;
        }
        for (int j = 0; j < n; ++j) {
            IntVector m = k.k() - l.k();
            IntVector mbar = k.kbar() - l.kbar();
            ++m[j];
            ++mbar[j];
            bool ok = true;
            for (int i = 0; i < n; ++i) {
                ok = ok && m[i] >= 0 && mbar[i] >= 0;
            }
            if (!ok) {
                continue;
            }
            const MultiIndex mi(std::move(m), std::move(mbar));
            if (mi.degree() < 3 || freq.sigma(mi.prime()) <= 0) {
                continue;
            }
            const int w = l.kbar()[j] * mi.k()[j] - l.k()[j] * mi.kbar()[j];
            if (w == 0) {
                continue;
            }
            const V *hl = snap.find(l);
            const V *hm = snap.find(mi);
            if (hl != nullptr && hm != nullptr) {
                f(l, mi, *hl, *hm, w);
            }
        }
    }
}

} // namespace detail

/// v_{2,k} = -2i {H^-, H^+}_k in H-variables.
inline Complex rhs_v2(const MultiIndex &k, const Snapshot<Complex> &snap, const FrequencyVector &freq)
{
    Complex out{};
    detail::for_each_v2_pair(k, snap, freq,
                             [&](const MultiIndex &, const MultiIndex &, Complex hl, Complex hm, int w) {
                                 out += 2.0 * w * hl * hm;
                             });
    return out;
}

/// The same sum on trajectories, each product damped by its exact decay rate.
inline ExpPolynomial rhs_v2bar(const MultiIndex &k, const Snapshot<ExpPolynomial> &snap, const FrequencyVector &freq)
{
    ExpPolynomial out;
    detail::for_each_v2_pair(k, snap, freq,
                             [&](const MultiIndex &l, const MultiIndex &m, const ExpPolynomial &hl,
                                 const ExpPolynomial &hm, int w) {
                                 const Exponent e = detail::pair_exponent(freq, l.prime(), m.prime());
                                 out += Complex(2.0 * w) * (hl * hm).damped(e);
                             });
    return out;
}

/// Exact trajectories delta -> calH_k(delta) of the flow started at a diamond seed.
/// H-variable coefficients are H_k = calH_k e^{-omega_{k'} delta}. Keys without a stored
/// trajectory are identically zero.
class FlowSolution {
public:
    FlowSolution(FrequencyVector freq, TruncatedSeries seed)
        : freq_(std::move(freq)), seed_(std::move(seed))
    {
    }

    const FrequencyVector &freq() const
    {
        return freq_;
    }

    const TruncatedSeries &seed() const
    {
        return seed_;
    }

    int dof() const
    {
        return seed_.dof();
    }

    int max_degree() const
    {
        return seed_.max_degree();
    }

    const std::map<MultiIndex, ExpPolynomial> &trajectories() const
    {
        return trajectories_;
    }

    ExpPolynomial trajectory(const MultiIndex &k) const
    {
        auto it = trajectories_.find(k);
        return it == trajectories_.end() ? ExpPolynomial{} : it->second;
    }

    ExpPolynomial h_trajectory(const MultiIndex &k) const
    {
        return trajectory(k).damped(Exponent::atom(freq_, k.prime()));
    }

    /// calH(delta).
    TruncatedSeries value_at(double delta) const
    {
        TruncatedSeries out = TruncatedSeries::diamond(dof(), max_degree());
        for (const auto &[k, p] : trajectories_) {
            out.set(k, ep_eval(p, delta));
        }
        return out;
    }

    /// H(delta).
    TruncatedSeries h_value_at(double delta) const
    {
        detail::require(delta >= 0.0, "h_value_at: delta must be nonnegative");
        TruncatedSeries out = TruncatedSeries::diamond(dof(), max_degree());
        for (const auto &[k, p] : trajectories_) {
            out.set(k, ep_eval(p, delta) * std::exp(-freq_.rate(k.prime()) * delta));
        }
        return out;
    }

    void store(const MultiIndex &k, ExpPolynomial p)
    {
        if (p.is_zero()) {
            trajectories_.erase(k);
        } else {
            trajectories_[k] = std::move(p);
        }
    }

private:
    FrequencyVector freq_;
    TruncatedSeries seed_;
    std::map<MultiIndex, ExpPolynomial> trajectories_;
};

struct FlowOptions {
    int threads = detail::thread_count();
    double purge_threshold = 1e-300;
    /// false drops the v2bar coupling, which leaves the asymptotic system.
    bool coupling = true;
};

namespace detail {

struct SolvedKey {
    MultiIndex k;
    IntVector prime;
    int sigma;
    const ExpPolynomial *value;
};

using RhsMap = std::map<MultiIndex, ExpPolynomial>;

/// Scatters the v1 and v2bar contributions of the sources of degree da (every stride-th one,
/// starting at first) into the right sides of degree d.
inline void scatter_level(int d, int da, const std::vector<std::vector<SolvedKey>> &by_degree,
                          std::size_t first, std::size_t stride, const FrequencyVector &freq, bool coupling,
                          RhsMap &rhs)
{
    const int n = freq.dof();
    const auto &sources = by_degree[da];
    const int partner_degree = d + 2 - da;
    static const std::vector<SolvedKey> none;
    const auto &partners = partner_degree < static_cast<int>(by_degree.size()) ? by_degree[partner_degree] : none;
    for (std::size_t i = first; i < sources.size(); i += stride) {
        const SolvedKey &a = sources[i];
        if (a.sigma == 0) {
            continue;
        }
        for (const SolvedKey &b : partners) {
            if (b.sigma == 0) {
                // v1: a is H_{k+e_j-(l,l)}, b is H_{l,l}.
                const IntVector &l = b.k.k();
                ExpPolynomial prod;
                for (int j = 0; j < n; ++j) {
                    const int w = a.prime[j] * l[j];
                    if (w == 0) {
                        continue;
                    }
                    if (prod.is_zero()) {
                        prod = (*a.value) * (*b.value);
                    }
                    IntVector k = a.k.k() + l;
                    IntVector kbar = a.k.kbar() + l;
                    --k[j];
                    --kbar[j];
                    rhs[MultiIndex(std::move(k), std::move(kbar))] += Complex(-static_cast<double>(a.sigma * w)) * prod;
                }
            } else if (coupling && a.sigma < 0 && b.sigma > 0) {
                // v2bar: a is H_l, b is H_m.
                ExpPolynomial prod;
                for (int j = 0; j < n; ++j) {
                    const int w = a.k.kbar()[j] * b.k.k()[j] - a.k.k()[j] * b.k.kbar()[j];
                    if (w == 0) {
                        continue;
                    }
                    if (prod.is_zero()) {
                        prod = ((*a.value) * (*b.value)).damped(pair_exponent(freq, a.prime, b.prime));
                    }
                    IntVector k = a.k.k() + b.k.k();
                    IntVector kbar = a.k.kbar() + b.k.kbar();
                    --k[j];
                    --kbar[j];
                    rhs[MultiIndex(std::move(k), std::move(kbar))] += Complex(2.0 * w) * prod;
                }
            }
        }
    }
}

} // namespace detail

/// Solves the flow degree by degree: calH_k = Hhat_k + int_0^delta (v1 + v2bar), where the integrand
/// only involves trajectories of lower degree and is integrated in closed form.
inline FlowSolution solve_flow(const TruncatedSeries &seed, const FrequencyVector &freq, const FlowOptions &options = {})
{
    detail::require_same_dof(seed.dof(), freq.dof(), "solve_flow");
    detail::require(seed.is_diamond(), "solve_flow: seed must be a diamond series (no terms below degree 3)");
    const int M = seed.max_degree();
    if (freq.max_checked_order() < M) {
        throw OrderOverflow("solve_flow: frequencies certified only through order "
                            + std::to_string(freq.max_checked_order()) + ", need " + std::to_string(M));
    }
    FlowSolution sol(freq, seed);
    std::vector<std::vector<detail::SolvedKey>> by_degree(M + 1);
    const int threads = std::max(1, options.threads);

    for (int d = 3; d <= M; ++d) {
        detail::RhsMap rhs;
        for (int da = 3; da < d; ++da) {
            if (d + 2 - da < 3 || by_degree[da].empty()) {
                continue;
            }
            if (threads == 1 || by_degree[da].size() < 2) {
                detail::scatter_level(d, da, by_degree, 0, 1, freq, options.coupling, rhs);
                continue;
            }
            std::vector<detail::RhsMap> partial(threads);
            std::vector<std::thread> pool;
            for (int t = 0; t < threads; ++t) {
                pool.emplace_back([&, t] {
                    detail::scatter_level(d, da, by_degree, static_cast<std::size_t>(t),
                                          static_cast<std::size_t>(threads), freq, options.coupling, partial[t]);
                });
            }
            for (auto &th : pool) {
                th.join();
            }
            for (const auto &part : partial) {
                for (const auto &[k, p] : part) {
                    rhs[k] += p;
                }
            }
        }

        for (const auto &[k, c] : seed.terms()) {
            if (k.degree() == d) {
                rhs.try_emplace(k);
            }
        }
        for (auto &[k, integrand] : rhs) {
            ExpPolynomial traj = ep_integrate(integrand);
            traj += ExpPolynomial::constant(seed.coeff(k));
            traj.purge(options.purge_threshold);
            if (is_zero(k.prime())) {
                for (const auto &[key, c] : traj.terms()) {
                    if (key.exponent.is_zero() && key.s > 0) {
                        throw StructureError("solve_flow: secular term delta^" + std::to_string(key.s)
                                             + " in the normal coefficient " + to_string(k));
                    }
                }
            }
            sol.store(k, std::move(traj));
        }
        for (const auto &[k, p] : sol.trajectories()) {
            if (k.degree() == d) {
                const IntVector kp = k.prime();
                by_degree[d].push_back(detail::SolvedKey{k, kp, freq.sigma(kp), &p});
            }
        }
    }
    return sol;
}

/// ceil(200 delta (1 + max |<omega, k'>|)) with |k'| <= M.
inline int default_rk4_steps(const FrequencyVector &freq, int max_degree, double delta)
{
    double wmax = 0.0;
    for (double w : freq.omega()) {
        wmax = std::max(wmax, std::abs(w));
    }
    return std::max(1, static_cast<int>(std::ceil(200.0 * delta * (1.0 + max_degree * wmax))));
}

/// Classical RK4 for the coefficient ODE in H-variables,
/// dH/ddelta = -{xi H, H2 + H} = -omega_{k'} H_k + v1 + v2, with the quadratic part evaluated as a
/// Poisson bracket. The state can be advanced repeatedly.
class Rk4Oracle {
public:
    Rk4Oracle(const TruncatedSeries &seed, const FrequencyVector &freq)
        : layout_(seed.dof(), 3, seed.max_degree()), stencil_(layout_, layout_, layout_)
    {
        detail::require_same_dof(seed.dof(), freq.dof(), "Rk4Oracle");
        detail::require(seed.is_diamond(), "Rk4Oracle: seed must be a diamond series");
        state_ = layout_.pack(seed);
        rate_.resize(layout_.size());
        xi_.resize(layout_.size());
        for (std::size_t i = 0; i < layout_.size(); ++i) {
            const auto sr = freq.sigma_omega(layout_.index(i).prime());
            rate_[i] = sr.magnitude;
            xi_[i] = Complex{0.0, -static_cast<double>(sr.sign)};
        }
    }

    double time() const
    {
        return time_;
    }

    TruncatedSeries state() const
    {
        return layout_.unpack(state_);
    }

    std::size_t stencil_size() const
    {
        return stencil_.size();
    }

    void advance(double dt, int steps)
    {
        detail::require(dt >= 0.0, "Rk4Oracle::advance: dt must be nonnegative");
        detail::require(steps >= 1, "Rk4Oracle::advance: steps must be at least 1");
        if (dt == 0.0) {
            return;
        }
        const double h = dt / steps;
        const std::size_t N = state_.size();
        std::vector<Complex> k1(N), k2(N), k3(N), k4(N), tmp(N);
        for (int s = 0; s < steps; ++s) {
            rhs(state_, k1);
            for (std::size_t i = 0; i < N; ++i) {
                tmp[i] = state_[i] + 0.5 * h * k1[i];
            }
            rhs(tmp, k2);
            for (std::size_t i = 0; i < N; ++i) {
                tmp[i] = state_[i] + 0.5 * h * k2[i];
            }
            rhs(tmp, k3);
            for (std::size_t i = 0; i < N; ++i) {
                tmp[i] = state_[i] + h * k3[i];
            }
            rhs(tmp, k4);
            for (std::size_t i = 0; i < N; ++i) {
                state_[i] += (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
        time_ += dt;
    }

private:
    void rhs(const std::vector<Complex> &y, std::vector<Complex> &out) const
    {
        std::vector<Complex> xi(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) {
            out[i] = -rate_[i] * y[i];
            xi[i] = xi_[i] * y[i];
        }
        stencil_.bracket(xi, y, out, -1.0);
    }

    DenseLayout layout_;
    BracketStencil stencil_;
    std::vector<Complex> state_;
    std::vector<double> rate_;
    std::vector<Complex> xi_;
    double time_ = 0.0;
};

/// H(delta) by RK4 from the seed. steps <= 0 selects default_rk4_steps.
inline TruncatedSeries rk4_oracle(const TruncatedSeries &seed, const FrequencyVector &freq, double delta, int steps)
{
    detail::require(delta >= 0.0, "rk4_oracle: delta must be nonnegative");
    if (delta == 0.0) {
        return seed;
    }
    if (steps <= 0) {
        steps = default_rk4_steps(freq, seed.max_degree(), delta);
    }
    Rk4Oracle rk(seed, freq);
    rk.advance(delta, steps);
    return rk.state();
}

/// Limit of the flow as delta -> +infinity, an element of the normal subspace.
inline NormalSeries normal_form(const FlowSolution &sol)
{
    NormalSeries out(sol.dof(), sol.max_degree() / 2);
    for (const auto &[k, p] : sol.trajectories()) {
        if (!k.is_normal()) {
            const Limit lim = ep_limit_infinity(sol.h_trajectory(k));
            if (!lim.finite || lim.value != Complex{}) {
                throw StructureError("normal_form: non-normal coefficient " + to_string(k) + " does not decay");
            }
            continue;
        }
        const Limit lim = ep_limit_infinity(p);
        if (!lim.finite) {
            throw StructureError("normal_form: trajectory of " + to_string(k) + " grows without bound");
        }
        out.set(k.k(), lim.value);
    }
    return out;
}

/// z -> Z(z): the coordinates after the shift along the flow of F = xi H(., delta).
/// Components are truncated at degree `degree`.
struct CanonicalTransform {
    std::vector<TruncatedSeries> Z;
    std::vector<TruncatedSeries> Zbar;
    double delta = 0.0;
    int degree = 0;
};

inline CanonicalTransform identity_transform(int n, int degree)
{
    CanonicalTransform t;
    t.degree = degree;
    for (int j = 0; j < n; ++j) {
        t.Z.push_back(monomial(MultiIndex::unit(n, j, false), 1.0, degree));
        t.Zbar.push_back(monomial(MultiIndex::unit(n, j, true), 1.0, degree));
    }
    return t;
}

/// Z with H2(z) + Hhat(z) = H2(Z) + H(Z, delta), through degree M - 1.
///
/// Each coordinate function phi is pulled back along the time-dependent Hamiltonian flow of
/// F_s = xi H(., s): U_t = phi o g_{delta - t, delta} solves dU/dt = {F_{delta - t}, U}, U_0 = phi,
/// so U_delta is phi composed with the full shift and no series substitution is needed.
inline CanonicalTransform normalizing_transform(const FlowSolution &sol, double delta, int steps)
{
    detail::require(delta >= 0.0, "normalizing_transform: delta must be nonnegative");
    const int n = sol.dof();
    const int M = sol.max_degree();
    const int D = M - 1;
    detail::require(D >= 1, "normalizing_transform: truncation degree too small");
    CanonicalTransform t = identity_transform(n, D);
    t.delta = delta;
    if (delta == 0.0 || sol.trajectories().empty()) {
        return t;
    }
    if (steps <= 0) {
        steps = default_rk4_steps(sol.freq(), M, delta);
    }

    const DenseLayout flayout(n, 3, M);
    const DenseLayout ulayout(n, 1, D);
    const BracketStencil stencil(flayout, ulayout, ulayout);

    struct Generator {
        std::size_t index;
        ExpPolynomial h;
        Complex xi;
    };
    std::vector<Generator> gens;
    for (const auto &[k, p] : sol.trajectories()) {
        const int sg = sol.freq().sigma(k.prime());
        if (sg == 0) {
            continue;
        }
        gens.push_back({static_cast<std::size_t>(flayout.find(k)), sol.h_trajectory(k),
                        Complex{0.0, -static_cast<double>(sg)}});
    }
    auto generator_at = [&](double s) {
        std::vector<Complex> f(flayout.size());
        for (const Generator &g : gens) {
            f[g.index] = g.xi * ep_eval(g.h, std::max(s, 0.0));
        }
        return f;
    };

    std::vector<std::vector<Complex>> u;
    for (int j = 0; j < n; ++j) {
        u.push_back(ulayout.pack(t.Z[j]));
    }
    for (int j = 0; j < n; ++j) {
        u.push_back(ulayout.pack(t.Zbar[j]));
    }

    const double h = delta / steps;
    const std::size_t N = ulayout.size();
    std::vector<Complex> k1(N), k2(N), k3(N), k4(N), tmp(N);
    auto rhs = [&](const std::vector<Complex> &f, const std::vector<Complex> &y, std::vector<Complex> &out) {
        std::fill(out.begin(), out.end(), Complex{});
        stencil.bracket(f, y, out);
    };
    std::vector<Complex> f0 = generator_at(delta);
    for (int s = 0; s < steps; ++s) {
        const double tt = s * h;
        const std::vector<Complex> fmid = generator_at(delta - tt - 0.5 * h);
        std::vector<Complex> f1 = generator_at(delta - tt - h);
        for (auto &y : u) {
            rhs(f0, y, k1);
            for (std::size_t i = 0; i < N; ++i) {
                tmp[i] = y[i] + 0.5 * h * k1[i];
            }
            rhs(fmid, tmp, k2);
            for (std::size_t i = 0; i < N; ++i) {
                tmp[i] = y[i] + 0.5 * h * k2[i];
            }
            rhs(fmid, tmp, k3);
            for (std::size_t i = 0; i < N; ++i) {
                tmp[i] = y[i] + h * k3[i];
            }
            rhs(f1, tmp, k4);
            for (std::size_t i = 0; i < N; ++i) {
                y[i] += (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
        f0 = std::move(f1);
    }
    for (int j = 0; j < n; ++j) {
        t.Z[j] = ulayout.unpack(u[j]).with_degrees(0, D);
        t.Zbar[j] = ulayout.unpack(u[n + j]).with_degrees(0, D);
    }
    return t;
}

/// H(Z, Zbar) truncated at degree `degree` (<= transform degree), by monomial expansion with
/// memoized partial products.
inline TruncatedSeries compose(const TruncatedSeries &h, const CanonicalTransform &t, int degree)
{
    const int n = h.dof();
    detail::require_same_dof(n, static_cast<int>(t.Z.size()), "compose");
    detail::require(degree <= t.degree, "compose: requested degree exceeds the transform's truncation");
    std::vector<TruncatedSeries> vars;
    for (const auto &z : t.Z) {
        vars.push_back(z.with_degrees(0, degree));
    }
    for (const auto &z : t.Zbar) {
        vars.push_back(z.with_degrees(0, degree));
    }
    std::map<MultiIndex, TruncatedSeries> memo;
    memo.emplace(MultiIndex::zero(n), monomial(MultiIndex::zero(n), 1.0, degree));
    auto power = [&](auto &&self, const MultiIndex &k) -> const TruncatedSeries & {
        auto it = memo.find(k);
        if (it != memo.end()) {
            return it->second;
        }
        IntVector a = k.k();
        IntVector abar = k.kbar();
        int var = 0;
        while (var < 2 * n && (var < n ? a[var] : abar[var - n]) == 0) {
            ++var;
        }
        --(var < n ? a[var] : abar[var - n]);
        const TruncatedSeries &rest = self(self, MultiIndex(std::move(a), std::move(abar)));
        TruncatedSeries value = product(rest, vars[var]);
        return memo.emplace(k, std::move(value)).first->second;
    };
    TruncatedSeries out(n, degree, 0);
    for (const auto &[k, c] : h.terms()) {
        if (k.degree() > degree) {
            continue;
        }
        out += c * power(power, k);
    }
    return out;
}

/// Largest coefficient of {Zbar_l, Z_j} - i delta_{lj}, {Z_l, Z_j} and {Zbar_l, Zbar_j} through
/// degree `through_degree`.
inline double symplectic_defect(const CanonicalTransform &t, int through_degree)
{
    const int n = static_cast<int>(t.Z.size());
    double m = 0.0;
    auto measure = [&](const TruncatedSeries &f, const TruncatedSeries &g, Complex expected) {
        TruncatedSeries b = poisson_bracket(f, g).with_degrees(0, through_degree);
        b.accumulate(MultiIndex::zero(n), -expected);
        m = std::max(m, b.max_abs());
    };
    for (int l = 0; l < n; ++l) {
        for (int j = 0; j < n; ++j) {
            measure(t.Zbar[l], t.Z[j], l == j ? Complex{0.0, 1.0} : Complex{});
            measure(t.Z[l], t.Z[j], Complex{});
            measure(t.Zbar[l], t.Zbar[j], Complex{});
        }
    }
    return m;
}

/// Invariance of the strip M1 <= <omega, k'> <= M2: the seed must lie in it, and the result is true
/// iff no trajectory outside it is stored (stored trajectories are never identically zero).
inline bool check_strip_invariance(const FlowSolution &sol, double m1, double m2)
{
    detail::require(m1 <= m2, "check_strip_invariance: empty strip");
    auto inside = [&](const MultiIndex &k) {
        const double v = sol.freq().inner(k.prime());
        return v >= m1 && v <= m2;
    };
    for (const auto &[k, c] : sol.seed().terms()) {
        detail::require(inside(k), "check_strip_invariance: seed term " + to_string(k) + " lies outside the strip");
    }
    for (const auto &[k, p] : sol.trajectories()) {
        if (!inside(k) && !p.is_zero()) {
            return false;
        }
    }
    return true;
}

/// Invariance of the subspace of series vanishing through degree `order`: the seed must have no
/// terms of degree <= order, and the result is true iff no such trajectory appears.
inline bool check_ball_invariance(const FlowSolution &sol, int order)
{
    for (const auto &[k, c] : sol.seed().terms()) {
        detail::require(k.degree() > order,
                        "check_ball_invariance: seed term " + to_string(k) + " has degree <= " + std::to_string(order));
    }
    for (const auto &[k, p] : sol.trajectories()) {
        if (k.degree() <= order && !p.is_zero()) {
            return false;
        }
    }
    return true;
}

} // namespace normflow

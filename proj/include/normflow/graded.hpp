#pragma once

#include <map>
#include <vector>

#include "errors.hpp"
#include "multi_index.hpp"
#include "normal_series.hpp"
#include "series.hpp"

namespace normflow {

/// A diamond series regrouped by q = k': H = sum_q z^{k_q} N^q(kappa).
///
/// Component q is truncated at kappa-degree (M - |q|) / 2 so that reconstruction is exact.
class GradedHamiltonian {
public:
    using Components = std::map<IntVector, NormalSeries>;

    GradedHamiltonian() = default;

    GradedHamiltonian(int n, int max_degree) : n_(n), max_degree_(max_degree)
    {
        detail::require(n >= 1, "GradedHamiltonian: need at least one degree of freedom");
    }

    int dof() const
    {
        return n_;
    }

    int max_degree() const
    {
        return max_degree_;
    }

    const Components &components() const
    {
        return components_;
    }

    /// kappa-truncation for component q.
    int kappa_limit(const IntVector &q) const
    {
        return (max_degree_ - l1_norm(q)) / 2;
    }

    /// N^q, or the zero series when q is absent.
    NormalSeries component(const IntVector &q) const
    {
        auto it = components_.find(q);
        return it == components_.end() ? NormalSeries(n_, std::max(kappa_limit(q), 0)) : it->second;
    }

    bool has(const IntVector &q) const
    {
        return components_.count(q) != 0;
    }

    void set(const IntVector &q, const NormalSeries &nq)
    {
        detail::require_same_dof(n_, static_cast<int>(q.size()), "GradedHamiltonian::set");
        detail::require(l1_norm(q) <= max_degree_, "GradedHamiltonian: |q| exceeds truncation degree");
        NormalSeries t = nq.truncated(kappa_limit(q));
        if (t.empty()) {
            components_.erase(q);
        } else {
            components_[q] = std::move(t);
        }
    }

    TruncatedSeries reconstruct() const
    {
        TruncatedSeries out = TruncatedSeries::diamond(n_, max_degree_);
        for (const auto &[q, nq] : components_) {
            const MultiIndex base = minimal_index(q);
            for (const auto &[l, c] : nq.terms()) {
                out.set(base + MultiIndex::diagonal(l), c);
            }
        }
        return out;
    }

    friend bool operator==(const GradedHamiltonian &a, const GradedHamiltonian &b)
    {
        return a.n_ == b.n_ && a.max_degree_ == b.max_degree_ && a.components_ == b.components_;
    }

private:
    int n_ = 1;
    int max_degree_ = 0;
    Components components_;
};

/// Groups keys by k' = q and factors each key as k_q + (l, l).
inline GradedHamiltonian grade(const TruncatedSeries &h)
{
    detail::require(h.is_diamond(), "grade: expects a diamond series");
    GradedHamiltonian g(h.dof(), h.max_degree());
    std::map<IntVector, NormalSeries> parts;
    for (const auto &[k, c] : h.terms()) {
        const IntVector q = k.prime();
        MultiIndex rest;
        if (!k.try_subtract(minimal_index(q), rest) || !rest.is_normal()) {
            throw StructureError("grade: key " + to_string(k) + " does not factor through k_q");
        }
        auto it = parts.try_emplace(q, NormalSeries(h.dof(), g.kappa_limit(q))).first;
        it->second.set(rest.k(), c);
    }
    for (const auto &[q, nq] : parts) {
        g.set(q, nq);
    }
    return g;
}

inline double max_abs_difference(const GradedHamiltonian &a, const GradedHamiltonian &b)
{
    double m = 0.0;
    for (const auto &[q, nq] : a.components()) {
        m = std::max(m, max_abs_difference(nq, b.component(q)));
    }
    for (const auto &[q, nq] : b.components()) {
        if (!a.has(q)) {
            m = std::max(m, nq.max_abs());
        }
    }
    return m;
}

/// The N^{q+p} factor of {z^{k_q} N^q, z^{k_p} N^p}:
///   i ( N^q kappa^[q◁p] <q,d>(N^p kappa^[p◁q]) - N^p kappa^[p◁q] <p,d>(N^q kappa^[q◁p]) ).
/// The half-integer powers are expanded by the product rule so that only the integral
/// exponent l = [q◁p] + [p◁q] and l - e_j appear.
inline NormalSeries graded_bracket(const IntVector &q, const NormalSeries &nq, const IntVector &p, const NormalSeries &np,
                                   int max_kappa_degree)
{
    const int n = nq.dof();
    detail::require_same_dof(n, np.dof(), "graded_bracket");
    const auto alpha = triangle(q, p);
    const auto beta = triangle(p, q);
    const IntVector l = contact_exponent(q, p);

    const NormalSeries a = nq.truncated(max_kappa_degree);
    const NormalSeries b = np.truncated(max_kappa_degree);
    NormalSeries out(n, max_kappa_degree);
    out += shift(product(a, directional(b, q)), l);
    out -= shift(product(b, directional(a, p)), l);
    const NormalSeries ab = product(a, b);
    for (int j = 0; j < n; ++j) {
        const double w = q[j] * std::abs(beta[j]) - p[j] * std::abs(alpha[j]);
        if (w == 0.0) {
            continue;
        }
        IntVector lj = l;
        --lj[j];
        if (lj[j] < 0) {
            throw StructureError("graded_bracket: negative kappa exponent");
        }
        out += w * shift(ab, lj);
    }
    out *= Complex{0.0, 1.0};
    return out;
}

} // namespace normflow

#pragma once

#include <cmath>
#include <complex>
#include <map>
#include <numeric>
#include <vector>

#include "errors.hpp"
#include "multi_index.hpp"
#include "series.hpp"

namespace normflow {

inline int total(const IntVector &l)
{
    return std::accumulate(l.begin(), l.end(), 0);
}

/// Series in the actions kappa_j = z_j zbar_j, truncated at kappa-degree |l| <= max_kappa_degree.
/// Keys are graded lexicographic like MultiIndex.
class NormalSeries {
public:
    struct GradedLess {
        bool operator()(const IntVector &a, const IntVector &b) const
        {
            const int da = total(a);
            const int db = total(b);
            return da != db ? da < db : a < b;
        }
    };
    using Map = std::map<IntVector, Complex, GradedLess>;

    NormalSeries() = default;

    NormalSeries(int n, int max_kappa_degree) : n_(n), max_kappa_degree_(max_kappa_degree)
    {
        detail::require(n >= 1, "NormalSeries: need at least one degree of freedom");
    }

    int dof() const
    {
        return n_;
    }

    int max_kappa_degree() const
    {
        return max_kappa_degree_;
    }

    const Map &terms() const
    {
        return terms_;
    }

    bool empty() const
    {
        return terms_.empty();
    }

    Complex coeff(const IntVector &l) const
    {
        auto it = terms_.find(l);
        return it == terms_.end() ? Complex{} : it->second;
    }

    void set(const IntVector &l, Complex c)
    {
        check_key(l);
        detail::require(total(l) <= max_kappa_degree_, "NormalSeries: key above truncation degree");
        if (c == Complex{}) {
            terms_.erase(l);
        } else {
            terms_[l] = c;
        }
    }

    /// Adds to a coefficient; keys above the truncation degree are dropped.
    void accumulate(const IntVector &l, Complex c)
    {
        check_key(l);
        if (total(l) > max_kappa_degree_) {
            return;
        }
        auto [it, fresh] = terms_.try_emplace(l, c);
        if (!fresh) {
            it->second += c;
            if (it->second == Complex{}) {
                terms_.erase(it);
            }
        }
    }

    NormalSeries truncated(int max_kappa_degree) const
    {
        NormalSeries r(n_, max_kappa_degree);
        for (const auto &[l, c] : terms_) {
            if (total(l) <= max_kappa_degree) {
                r.terms_.emplace(l, c);
            }
        }
        return r;
    }

    /// Lowest kappa-degree present (-1 when empty).
    int order() const
    {
        return terms_.empty() ? -1 : total(terms_.begin()->first);
    }

    double max_abs() const
    {
        double m = 0.0;
        for (const auto &[l, c] : terms_) {
            m = std::max(m, std::abs(c));
        }
        return m;
    }

    /// sum |c_l| r^{|l|}.
    double norm_upper(double r) const
    {
        double s = 0.0;
        for (const auto &[l, c] : terms_) {
            s += std::abs(c) * std::pow(r, total(l));
        }
        return s;
    }

    NormalSeries &operator+=(const NormalSeries &o)
    {
        detail::require_same_dof(n_, o.n_, "NormalSeries +=");
        for (const auto &[l, c] : o.terms_) {
            accumulate(l, c);
        }
        return *this;
    }

    NormalSeries &operator-=(const NormalSeries &o)
    {
        detail::require_same_dof(n_, o.n_, "NormalSeries -=");
        for (const auto &[l, c] : o.terms_) {
            accumulate(l, -c);
        }
        return *this;
    }

    NormalSeries &operator*=(Complex s)
    {
        if (s == Complex{}) {
            terms_.clear();
            return *this;
        }
        for (auto &[l, c] : terms_) {
            c *= s;
        }
        return *this;
    }

    friend NormalSeries operator+(NormalSeries a, const NormalSeries &b)
    {
        a += b;
        return a;
    }

    friend NormalSeries operator-(NormalSeries a, const NormalSeries &b)
    {
        a -= b;
        return a;
    }

    friend NormalSeries operator*(Complex s, NormalSeries a)
    {
        a *= s;
        return a;
    }

    friend bool operator==(const NormalSeries &a, const NormalSeries &b)
    {
        return a.n_ == b.n_ && a.terms_ == b.terms_;
    }

private:
    void check_key(const IntVector &l) const
    {
        detail::require_same_dof(n_, static_cast<int>(l.size()), "NormalSeries key");
        for (int v : l) {
            detail::require(v >= 0, "NormalSeries: kappa exponents must be nonnegative");
        }
    }

    int n_ = 1;
    int max_kappa_degree_ = 0;
    Map terms_;
};

inline double max_abs_difference(const NormalSeries &a, const NormalSeries &b)
{
    double m = 0.0;
    for (const auto &[l, c] : a.terms()) {
        m = std::max(m, std::abs(c - b.coeff(l)));
    }
    for (const auto &[l, c] : b.terms()) {
        if (a.terms().find(l) == a.terms().end()) {
            m = std::max(m, std::abs(c));
        }
    }
    return m;
}

/// Truncated product; the result keeps the smaller truncation degree.
inline NormalSeries product(const NormalSeries &a, const NormalSeries &b)
{
    detail::require_same_dof(a.dof(), b.dof(), "NormalSeries product");
    NormalSeries out(a.dof(), std::min(a.max_kappa_degree(), b.max_kappa_degree()));
    for (const auto &[la, ca] : a.terms()) {
        for (const auto &[lb, cb] : b.terms()) {
            if (total(la) + total(lb) > out.max_kappa_degree()) {
                break;
            }
            out.accumulate(la + lb, ca * cb);
        }
    }
    return out;
}

/// kappa^l N.
inline NormalSeries shift(const NormalSeries &a, const IntVector &l)
{
    NormalSeries out(a.dof(), a.max_kappa_degree());
    for (const auto &[k, c] : a.terms()) {
        out.accumulate(k + l, c);
    }
    return out;
}

/// d/dkappa_j. Terms beyond the truncation are zero in the truncated system, so the
/// truncation degree is kept.
inline NormalSeries partial(const NormalSeries &a, int j)
{
    NormalSeries out(a.dof(), a.max_kappa_degree());
    for (const auto &[l, c] : a.terms()) {
        if (l[j] == 0) {
            continue;
        }
        IntVector m = l;
        --m[j];
        out.accumulate(m, static_cast<double>(l[j]) * c);
    }
    return out;
}

/// <q, d> N = sum_j q_j dN/dkappa_j.
inline NormalSeries directional(const NormalSeries &a, const IntVector &q)
{
    detail::require_same_dof(a.dof(), static_cast<int>(q.size()), "directional");
    NormalSeries out(a.dof(), a.max_kappa_degree());
    for (int j = 0; j < a.dof(); ++j) {
        if (q[j] == 0) {
            continue;
        }
        out += static_cast<double>(q[j]) * partial(a, j);
    }
    return out;
}

/// exp(g) for g without constant term, truncated at max_kappa_degree; the series terminates
/// because each power of g raises the kappa-degree by at least one.
inline NormalSeries exp_series(const NormalSeries &g, int max_kappa_degree)
{
    detail::require(g.coeff(IntVector(g.dof(), 0)) == Complex{}, "exp_series: argument must vanish at kappa = 0");
    NormalSeries result(g.dof(), max_kappa_degree);
    result.set(IntVector(g.dof(), 0), 1.0);
    NormalSeries power = result;
    const NormalSeries gt = g.truncated(max_kappa_degree);
    for (int m = 1; m <= max_kappa_degree; ++m) {
        power = product(power, gt);
        power *= 1.0 / m;
        if (power.empty()) {
            break;
        }
        result += power;
    }
    return result;
}

/// Embeds N(kappa) as a series in (z, zbar): kappa^l -> z^l zbar^l.
inline TruncatedSeries embed(const NormalSeries &nrm, int max_degree, int min_degree = 0)
{
    TruncatedSeries out(nrm.dof(), max_degree, min_degree);
    for (const auto &[l, c] : nrm.terms()) {
        if (2 * total(l) <= max_degree) {
            out.set(MultiIndex::diagonal(l), c);
        }
    }
    return out;
}

/// Inverse of embed; throws when a key with k != kbar is present.
inline NormalSeries extract_normal(const TruncatedSeries &h)
{
    NormalSeries out(h.dof(), h.max_degree() / 2);
    for (const auto &[k, c] : h.terms()) {
        if (!k.is_normal()) {
            throw PreconditionError("extract_normal: key " + to_string(k) + " is not of the form (l, l)");
        }
        out.set(k.k(), c);
    }
    return out;
}

} // namespace normflow

#pragma once

#include <algorithm>
#include <compare>
#include <complex>
#include <cstddef>
#include <cstdlib>
#include <numeric>
#include <string>
#include <vector>

#include "errors.hpp"

namespace normflow {

using IntVector = std::vector<int>;
using Complex = std::complex<double>;

inline int l1_norm(const IntVector &q)
{
    int s = 0;
    for (int v : q) {
        s += std::abs(v);
    }
    return s;
}

inline bool is_zero(const IntVector &q)
{
    return std::all_of(q.begin(), q.end(), [](int v) { return v == 0; });
}

inline IntVector operator+(const IntVector &a, const IntVector &b)
{
    detail::require_same_dof(static_cast<int>(a.size()), static_cast<int>(b.size()), "IntVector +");
    IntVector r(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) {
        r[j] = a[j] + b[j];
    }
    return r;
}

inline IntVector operator-(const IntVector &a)
{
    IntVector r(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) {
        r[j] = -a[j];
    }
    return r;
}

inline IntVector operator-(const IntVector &a, const IntVector &b)
{
    return a + (-b);
}

inline std::string to_string(const IntVector &q)
{
    std::string s = "(";
    for (std::size_t j = 0; j < q.size(); ++j) {
        if (j) {
            s += ",";
        }
        s += std::to_string(q[j]);
    }
    return s + ")";
}

/// Exponent pair (k, kbar) of the monomial z^k zbar^kbar.
///
/// Ordering is graded lexicographic: total degree first, then k, then kbar. Every map keyed
/// by MultiIndex therefore iterates in a canonical order.
class MultiIndex {
public:
    MultiIndex() = default;

    MultiIndex(IntVector k, IntVector kbar) : k_(std::move(k)), kbar_(std::move(kbar))
    {
        detail::require_same_dof(static_cast<int>(k_.size()), static_cast<int>(kbar_.size()), "MultiIndex");
        for (std::size_t j = 0; j < k_.size(); ++j) {
            detail::require(k_[j] >= 0 && kbar_[j] >= 0, "MultiIndex: exponents must be nonnegative");
        }
    }

    static MultiIndex zero(int n)
    {
        return MultiIndex(IntVector(n, 0), IntVector(n, 0));
    }

    /// The index (l, l) of kappa^l.
    static MultiIndex diagonal(const IntVector &l)
    {
        return MultiIndex(l, l);
    }

    /// z_j alone (conjugate = false) or zbar_j alone.
    static MultiIndex unit(int n, int j, bool conjugate)
    {
        MultiIndex m = zero(n);
        (conjugate ? m.kbar_ : m.k_)[j] = 1;
        return m;
    }

    int dof() const
    {
        return static_cast<int>(k_.size());
    }

    const IntVector &k() const
    {
        return k_;
    }

    const IntVector &kbar() const
    {
        return kbar_;
    }

    int degree() const
    {
        return std::accumulate(k_.begin(), k_.end(), 0) + std::accumulate(kbar_.begin(), kbar_.end(), 0);
    }

    /// kbar - k.
    IntVector prime() const
    {
        IntVector p(k_.size());
        for (std::size_t j = 0; j < k_.size(); ++j) {
            p[j] = kbar_[j] - k_[j];
        }
        return p;
    }

    MultiIndex conjugate() const
    {
        return MultiIndex(kbar_, k_);
    }

    bool is_normal() const
    {
        return k_ == kbar_;
    }

    friend MultiIndex operator+(const MultiIndex &a, const MultiIndex &b)
    {
        return MultiIndex(a.k_ + b.k_, a.kbar_ + b.kbar_);
    }

    /// Componentwise difference; returns false when a component would go negative.
    bool try_subtract(const MultiIndex &b, MultiIndex &out) const
    {
        IntVector k(k_.size()), kbar(k_.size());
        for (std::size_t j = 0; j < k_.size(); ++j) {
            k[j] = k_[j] - b.k_[j];
            kbar[j] = kbar_[j] - b.kbar_[j];
            if (k[j] < 0 || kbar[j] < 0) {
                return false;
            }
        }
        out = MultiIndex(std::move(k), std::move(kbar));
        return true;
    }

    friend bool operator==(const MultiIndex &a, const MultiIndex &b) = default;

    friend std::strong_ordering operator<=>(const MultiIndex &a, const MultiIndex &b)
    {
        if (auto c = a.degree() <=> b.degree(); c != 0) {
            return c;
        }
        if (auto c = a.k_ <=> b.k_; c != 0) {
            return c;
        }
        return a.kbar_ <=> b.kbar_;
    }

private:
    IntVector k_;
    IntVector kbar_;
};

inline std::string to_string(const MultiIndex &m)
{
    return "[" + to_string(m.k()) + "," + to_string(m.kbar()) + "]";
}

/// The unique index of least degree with kbar - k = q: (k_q)_j = max(-q_j, 0), (kbar_q)_j = max(q_j, 0).
inline MultiIndex minimal_index(const IntVector &q)
{
    IntVector k(q.size()), kbar(q.size());
    for (std::size_t j = 0; j < q.size(); ++j) {
        k[j] = std::max(-q[j], 0);
        kbar[j] = std::max(q[j], 0);
    }
    return MultiIndex(std::move(k), std::move(kbar));
}

/// Componentwise q ◁ p. Entries are integers or halves of odd integers (only when q_j = -p_j).
inline std::vector<double> triangle(const IntVector &q, const IntVector &p)
{
    detail::require_same_dof(static_cast<int>(q.size()), static_cast<int>(p.size()), "triangle");
    std::vector<double> r(q.size(), 0.0);
    for (std::size_t j = 0; j < q.size(); ++j) {
        const long prod = static_cast<long>(q[j]) * p[j];
        if (prod >= 0) {
            r[j] = 0.0;
        } else if (q[j] == -p[j]) {
            r[j] = q[j] / 2.0;
        } else if (std::abs(q[j]) < std::abs(p[j])) {
            r[j] = q[j];
        } else {
            r[j] = 0.0;
        }
    }
    return r;
}

/// [q ◁ p] + [p ◁ q], the kappa exponent in k_q + k_p = k_{q+p} + (l, l). Always integral.
inline IntVector contact_exponent(const IntVector &q, const IntVector &p)
{
    const auto a = triangle(q, p);
    const auto b = triangle(p, q);
    IntVector l(q.size());
    for (std::size_t j = 0; j < q.size(); ++j) {
        const double s = std::abs(a[j]) + std::abs(b[j]);
        l[j] = static_cast<int>(s);
        if (static_cast<double>(l[j]) != s) {
            throw StructureError("contact_exponent: [q<p]+[p<q] is not integral at component " + std::to_string(j));
        }
    }
    return l;
}

/// Calls f(q) for every q in Z^n with |q|_1 <= max_order, in lexicographic order.
template <class F>
void for_each_vector_in_l1_ball(int n, int max_order, F &&f)
{
    IntVector q(n, 0);
    auto rec = [&](auto &&self, int j, int budget) -> void {
        if (j == n) {
            f(static_cast<const IntVector &>(q));
            return;
        }
        for (int v = -budget; v <= budget; ++v) {
            q[j] = v;
            self(self, j + 1, budget - std::abs(v));
        }
        q[j] = 0;
    };
    rec(rec, 0, max_order);
}

/// All multi-indices of 2n variables with min_degree <= degree <= max_degree, in graded order.
inline std::vector<MultiIndex> enumerate_indices(int n, int min_degree, int max_degree)
{
    std::vector<MultiIndex> out;
    std::vector<int> e(2 * n, 0);
    for (int d = std::max(min_degree, 0); d <= max_degree; ++d) {
        std::vector<MultiIndex> level;
        auto rec = [&](auto &&self, int j, int left) -> void {
            if (j == 2 * n - 1) {
                e[j] = left;
                level.emplace_back(IntVector(e.begin(), e.begin() + n), IntVector(e.begin() + n, e.end()));
                return;
            }
            for (int v = 0; v <= left; ++v) {
                e[j] = v;
                self(self, j + 1, left - v);
            }
        };
        if (n > 0) {
            rec(rec, 0, d);
        }
        std::sort(level.begin(), level.end());
        out.insert(out.end(), level.begin(), level.end());
    }
    return out;
}

/// All l in Z_+^n with |l| = d.
inline std::vector<IntVector> enumerate_compositions(int n, int d)
{
    std::vector<IntVector> out;
    IntVector l(n, 0);
    auto rec = [&](auto &&self, int j, int left) -> void {
        if (j == n - 1) {
            l[j] = left;
            out.push_back(l);
            return;
        }
        for (int v = 0; v <= left; ++v) {
            l[j] = v;
            self(self, j + 1, left - v);
        }
    };
    if (n > 0) {
        rec(rec, 0, d);
    }
    return out;
}

} // namespace normflow

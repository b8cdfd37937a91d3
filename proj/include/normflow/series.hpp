#pragma once

#include <cmath>
#include <complex>
#include <map>
#include <string>
#include <vector>

#include "errors.hpp"
#include "frequency.hpp"
#include "multi_index.hpp"

namespace normflow {

/// Element of C[[z, zbar]] truncated at total degree max_degree.
///
/// Only nonzero coefficients are stored. Keys of degree below min_degree are rejected, so a
/// series with min_degree 3 is an element of the diamond subspace (series starting at cubic terms).
class TruncatedSeries {
public:
    using Map = std::map<MultiIndex, Complex>;

    TruncatedSeries() = default;

    TruncatedSeries(int n, int max_degree, int min_degree = 0) : n_(n), max_degree_(max_degree), min_degree_(min_degree)
    {
        detail::require(n >= 1, "TruncatedSeries: need at least one degree of freedom");
        detail::require(max_degree >= 0 && min_degree >= 0, "TruncatedSeries: degrees must be nonnegative");
    }

    static TruncatedSeries diamond(int n, int max_degree)
    {
        return TruncatedSeries(n, max_degree, 3);
    }

    int dof() const
    {
        return n_;
    }

    int max_degree() const
    {
        return max_degree_;
    }

    int min_degree() const
    {
        return min_degree_;
    }

    bool is_diamond() const
    {
        return min_degree_ >= 3;
    }

    const Map &terms() const
    {
        return terms_;
    }

    std::size_t size() const
    {
        return terms_.size();
    }

    bool empty() const
    {
        return terms_.empty();
    }

    Complex coeff(const MultiIndex &k) const
    {
        auto it = terms_.find(k);
        return it == terms_.end() ? Complex{} : it->second;
    }

    /// Sets a coefficient; zero erases. Rejects keys outside [min_degree, max_degree].
    void set(const MultiIndex &k, Complex c)
    {
        check_key(k);
        if (c == Complex{}) {
            terms_.erase(k);
        } else {
            terms_[k] = c;
        }
    }

    /// Adds to a coefficient; contributions above max_degree are dropped (truncation).
    void accumulate(const MultiIndex &k, Complex c)
    {
        const int d = k.degree();
        if (d > max_degree_) {
            return;
        }
        check_key(k);
        auto [it, fresh] = terms_.try_emplace(k, c);
        if (!fresh) {
            it->second += c;
            if (it->second == Complex{}) {
                terms_.erase(it);
            }
        }
    }

    /// Terms of total degree d.
    TruncatedSeries homogeneous_part(int d) const
    {
        TruncatedSeries r(n_, max_degree_, 0);
        for (const auto &[k, c] : terms_) {
            if (k.degree() == d) {
                r.terms_.emplace(k, c);
            }
        }
        return r;
    }

    TruncatedSeries truncated(int max_degree) const
    {
        TruncatedSeries r(n_, max_degree, std::min(min_degree_, max_degree));
        for (const auto &[k, c] : terms_) {
            if (k.degree() <= max_degree) {
                r.terms_.emplace(k, c);
            }
        }
        return r;
    }

    /// Same coefficients with a different degree window; keys outside the new window are dropped.
    TruncatedSeries with_degrees(int min_degree, int max_degree) const
    {
        TruncatedSeries r(n_, max_degree, min_degree);
        for (const auto &[k, c] : terms_) {
            const int d = k.degree();
            if (d >= min_degree && d <= max_degree) {
                r.terms_.emplace(k, c);
            }
        }
        return r;
    }

    double max_abs() const
    {
        double m = 0.0;
        for (const auto &[k, c] : terms_) {
            m = std::max(m, std::abs(c));
        }
        return m;
    }

    TruncatedSeries &operator+=(const TruncatedSeries &o)
    {
        detail::require_same_dof(n_, o.n_, "TruncatedSeries +=");
        for (const auto &[k, c] : o.terms_) {
            accumulate(k, c);
        }
        return *this;
    }

    TruncatedSeries &operator-=(const TruncatedSeries &o)
    {
        detail::require_same_dof(n_, o.n_, "TruncatedSeries -=");
        for (const auto &[k, c] : o.terms_) {
            accumulate(k, -c);
        }
        return *this;
    }

    TruncatedSeries &operator*=(Complex s)
    {
        if (s == Complex{}) {
            terms_.clear();
            return *this;
        }
        for (auto &[k, c] : terms_) {
            c *= s;
        }
        return *this;
    }

    friend TruncatedSeries operator+(TruncatedSeries a, const TruncatedSeries &b)
    {
        a.min_degree_ = std::min(a.min_degree_, b.min_degree_);
        a += b;
        return a;
    }

    friend TruncatedSeries operator-(TruncatedSeries a, const TruncatedSeries &b)
    {
        a.min_degree_ = std::min(a.min_degree_, b.min_degree_);
        a -= b;
        return a;
    }

    friend TruncatedSeries operator-(TruncatedSeries a)
    {
        a *= -1.0;
        return a;
    }

    friend TruncatedSeries operator*(Complex s, TruncatedSeries a)
    {
        a *= s;
        return a;
    }

    /// Coefficientwise equality of stored terms (exact).
    friend bool operator==(const TruncatedSeries &a, const TruncatedSeries &b)
    {
        return a.n_ == b.n_ && a.max_degree_ == b.max_degree_ && a.terms_ == b.terms_;
    }

private:
    void check_key(const MultiIndex &k) const
    {
        detail::require_same_dof(n_, k.dof(), "TruncatedSeries key");
        const int d = k.degree();
        if (d > max_degree_ || d < min_degree_) {
            throw PreconditionError("TruncatedSeries: key " + to_string(k) + " of degree " + std::to_string(d)
                                    + " outside [" + std::to_string(min_degree_) + ", "
                                    + std::to_string(max_degree_) + "]");
        }
    }

    int n_ = 1;
    int max_degree_ = 0;
    int min_degree_ = 0;
    Map terms_;
};

/// max_k |a_k - b_k| over the union of supports.
inline double max_abs_difference(const TruncatedSeries &a, const TruncatedSeries &b)
{
    double m = 0.0;
    for (const auto &[k, c] : a.terms()) {
        m = std::max(m, std::abs(c - b.coeff(k)));
    }
    for (const auto &[k, c] : b.terms()) {
        if (a.terms().find(k) == a.terms().end()) {
            m = std::max(m, std::abs(c));
        }
    }
    return m;
}

/// Single monomial c z^k zbar^kbar.
inline TruncatedSeries monomial(const MultiIndex &k, Complex c, int max_degree)
{
    TruncatedSeries s(k.dof(), max_degree, 0);
    s.set(k, c);
    return s;
}

/// H2 = sum_j omega_j z_j zbar_j.
inline TruncatedSeries quadratic_hamiltonian(const FrequencyVector &freq, int max_degree)
{
    const int n = freq.dof();
    TruncatedSeries h(n, max_degree, 0);
    for (int j = 0; j < n; ++j) {
        IntVector l(n, 0);
        l[j] = 1;
        h.set(MultiIndex::diagonal(l), freq.omega()[j]);
    }
    return h;
}

/// {F, G} = i sum_j (d_{zbar_j} F d_{z_j} G - d_{z_j} F d_{zbar_j} G), truncated at F's max degree.
inline TruncatedSeries poisson_bracket(const TruncatedSeries &f, const TruncatedSeries &g)
{
    detail::require_same_dof(f.dof(), g.dof(), "poisson_bracket");
    detail::require(f.max_degree() == g.max_degree(), "poisson_bracket: truncation degrees differ");
    const int n = f.dof();
    const int max_degree = f.max_degree();
    const int min_degree = (f.is_diamond() && g.is_diamond()) ? 3 : 0;
    TruncatedSeries out(n, max_degree, min_degree);
    const Complex i{0.0, 1.0};
    for (const auto &[a, fa] : f.terms()) {
        const int da = a.degree();
        for (const auto &[b, gb] : g.terms()) {
            if (da + b.degree() - 2 > max_degree) {
                break; // g iterates in graded order
            }
            for (int j = 0; j < n; ++j) {
                const int w = a.kbar()[j] * b.k()[j] - a.k()[j] * b.kbar()[j];
                if (w == 0) {
                    continue;
                }
                IntVector k = a.k() + b.k();
                IntVector kbar = a.kbar() + b.kbar();
                --k[j];
                --kbar[j];
                out.accumulate(MultiIndex(std::move(k), std::move(kbar)), i * static_cast<double>(w) * fa * gb);
            }
        }
    }
    return out;
}

/// Truncated product F G.
inline TruncatedSeries product(const TruncatedSeries &f, const TruncatedSeries &g)
{
    detail::require_same_dof(f.dof(), g.dof(), "product");
    const int max_degree = std::min(f.max_degree(), g.max_degree());
    TruncatedSeries out(f.dof(), max_degree, 0);
    for (const auto &[a, fa] : f.terms()) {
        const int da = a.degree();
        for (const auto &[b, gb] : g.terms()) {
            if (da + b.degree() > max_degree) {
                break;
            }
            out.accumulate(a + b, fa * gb);
        }
    }
    return out;
}

/// d/dz_j (conjugate = false) or d/dzbar_j (conjugate = true).
inline TruncatedSeries derivative(const TruncatedSeries &f, int j, bool conjugate)
{
    TruncatedSeries out(f.dof(), f.max_degree(), 0);
    for (const auto &[a, c] : f.terms()) {
        const int e = conjugate ? a.kbar()[j] : a.k()[j];
        if (e == 0) {
            continue;
        }
        IntVector k = a.k();
        IntVector kbar = a.kbar();
        (conjugate ? kbar : k)[j] -= 1;
        out.accumulate(MultiIndex(std::move(k), std::move(kbar)), static_cast<double>(e) * c);
    }
    return out;
}

/// {F, H2}: the coefficient at k becomes i <omega, k'> F_k.
inline TruncatedSeries bracket_with_H2(const TruncatedSeries &f, const FrequencyVector &freq)
{
    detail::require_same_dof(f.dof(), freq.dof(), "bracket_with_H2");
    TruncatedSeries out(f.dof(), f.max_degree(), f.min_degree());
    const Complex i{0.0, 1.0};
    for (const auto &[k, c] : f.terms()) {
        const IntVector kp = k.prime();
        if (is_zero(kp)) {
            continue;
        }
        out.set(k, i * freq.inner(kp) * c);
    }
    return out;
}

/// H = h0 + hplus + hminus by the sign of <omega, k'>.
struct SignSplit {
    TruncatedSeries h0;
    TruncatedSeries hplus;
    TruncatedSeries hminus;
};

inline SignSplit split_by_sign(const TruncatedSeries &h, const FrequencyVector &freq)
{
    detail::require_same_dof(h.dof(), freq.dof(), "split_by_sign");
    const int n = h.dof();
    SignSplit s{TruncatedSeries(n, h.max_degree(), h.min_degree()), TruncatedSeries(n, h.max_degree(), h.min_degree()),
                TruncatedSeries(n, h.max_degree(), h.min_degree())};
    for (const auto &[k, c] : h.terms()) {
        const int sg = freq.sigma(k.prime());
        (sg == 0 ? s.h0 : (sg > 0 ? s.hplus : s.hminus)).set(k, c);
    }
    return s;
}

/// xi H = -i sum sigma_{k'} H_k z^k = i (H^- - H^+).
inline TruncatedSeries apply_xi(const TruncatedSeries &h, const FrequencyVector &freq)
{
    detail::require_same_dof(h.dof(), freq.dof(), "apply_xi");
    TruncatedSeries out(h.dof(), h.max_degree(), h.min_degree());
    const Complex minus_i{0.0, -1.0};
    for (const auto &[k, c] : h.terms()) {
        const int sg = freq.sigma(k.prime());
        if (sg != 0) {
            out.set(k, minus_i * static_cast<double>(sg) * c);
        }
    }
    return out;
}

enum class InvolutionSign { plus, minus };

/// H o I^{+-}, where I^{+-}(z, zbar) = +-(zbar, z).
inline TruncatedSeries involution(const TruncatedSeries &h, InvolutionSign sign)
{
    TruncatedSeries out(h.dof(), h.max_degree(), h.min_degree());
    for (const auto &[k, c] : h.terms()) {
        const bool flip = sign == InvolutionSign::minus && (k.degree() % 2 == 1);
        out.set(k.conjugate(), flip ? -c : c);
    }
    return out;
}

/// conj(H_k) == H_{k*} within tol for every stored k.
inline bool is_real(const TruncatedSeries &h, double tol)
{
    for (const auto &[k, c] : h.terms()) {
        if (std::abs(std::conj(c) - h.coeff(k.conjugate())) > tol) {
            return false;
        }
    }
    return true;
}

/// Largest |conj(H_k) - H_{k*}|.
inline double reality_defect(const TruncatedSeries &h)
{
    double m = 0.0;
    for (const auto &[k, c] : h.terms()) {
        m = std::max(m, std::abs(std::conj(c) - h.coeff(k.conjugate())));
    }
    return m;
}

/// sum_k |H_k| rho^|k|, an upper bound for sup over the polydisk of radius rho.
inline double polydisk_norm_upper(const TruncatedSeries &h, double rho)
{
    detail::require(rho > 0.0, "polydisk_norm_upper: rho must be positive");
    double s = 0.0;
    for (const auto &[k, c] : h.terms()) {
        s += std::abs(c) * std::pow(rho, k.degree());
    }
    return s;
}

/// |H_k| <= c rho^{-|k|} whenever the sup norm on the polydisk of radius rho is at most c.
inline double cauchy_coefficient_bound(double norm_bound, double rho, const MultiIndex &k)
{
    detail::require(rho > 0.0, "cauchy_coefficient_bound: rho must be positive");
    detail::require(norm_bound >= 0.0, "cauchy_coefficient_bound: norm bound must be nonnegative");
    return norm_bound * std::pow(rho, -k.degree());
}

/// F << Fbar: Fbar has nonnegative real coefficients and |F_k| <= Fbar_k everywhere.
inline bool majorizes(const TruncatedSeries &f, const TruncatedSeries &fbar)
{
    detail::require_same_dof(f.dof(), fbar.dof(), "majorizes");
    for (const auto &[k, c] : fbar.terms()) {
        if (c.imag() != 0.0 || c.real() < 0.0) {
            return false;
        }
    }
    for (const auto &[k, c] : f.terms()) {
        if (std::abs(c) > fbar.coeff(k).real()) {
            return false;
        }
    }
    return true;
}

} // namespace normflow

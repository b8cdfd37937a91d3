#pragma once

#include <cmath>
#include <complex>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "frequency.hpp"
#include "multi_index.hpp"

namespace normflow {

/// Exact decay rate nu = <omega, Q> of a factor e^{-nu delta}.
///
/// Every rate produced by the flow is a sum of atoms omega_q = |<omega, q>|. Each atom is stored
/// through its positive representative sigma_q q, so the whole multiset collapses to the integer
/// vector Q = sum sigma_q q. For nonresonant omega two rates coincide iff their Q coincide, which
/// makes equality and the nu = 0 test exact. The float value is cached for evaluation only.
class Exponent {
public:
    Exponent() = default;

    /// The atom omega_q. q = 0 gives the zero exponent.
    static Exponent atom(const FrequencyVector &freq, const IntVector &q)
    {
        if (normflow::is_zero(q)) {
            return {};
        }
        Exponent e;
        e.q_ = freq.positive_representative(q);
        e.nu_ = std::abs(freq.inner(q));
        return e;
    }

    /// The exponent with reduced vector Q; <omega, Q> must be positive unless Q = 0.
    static Exponent from_reduced(const FrequencyVector &freq, const IntVector &q)
    {
        if (normflow::is_zero(q)) {
            return {};
        }
        const double nu = freq.inner(q);
        detail::require(nu > 0.0, "Exponent: <omega, Q> must be positive for Q = " + to_string(q));
        Exponent e;
        e.q_ = q;
        e.nu_ = nu;
        return e;
    }

    bool is_zero() const
    {
        return q_.empty();
    }

    double nu() const
    {
        return nu_;
    }

    /// Q, or an empty vector for the zero exponent.
    const IntVector &reduced() const
    {
        return q_;
    }

    friend Exponent operator+(const Exponent &a, const Exponent &b)
    {
        if (a.is_zero()) {
            return b;
        }
        if (b.is_zero()) {
            return a;
        }
        Exponent e;
        e.q_ = a.q_ + b.q_;
        e.nu_ = a.nu_ + b.nu_;
        if (normflow::is_zero(e.q_)) {
            throw StructureError("Exponent: sum of positive atoms vanished");
        }
        return e;
    }

    friend bool operator==(const Exponent &a, const Exponent &b)
    {
        return a.q_ == b.q_;
    }

    friend bool operator<(const Exponent &a, const Exponent &b)
    {
        return a.q_ < b.q_;
    }

private:
    IntVector q_;
    double nu_ = 0.0;
};

/// Finite sum of terms c delta^s e^{-nu delta}; canonical (one coefficient per (s, nu), no zeros).
class ExpPolynomial {
public:
    struct Key {
        int s = 0;
        Exponent exponent;

        friend bool operator<(const Key &a, const Key &b)
        {
            if (a.exponent == b.exponent) {
                return a.s < b.s;
            }
            return a.exponent < b.exponent;
        }
    };
    using Map = std::map<Key, Complex>;

    ExpPolynomial() = default;

    static ExpPolynomial constant(Complex c)
    {
        return term(0, Exponent{}, c);
    }

    static ExpPolynomial term(int s, const Exponent &e, Complex c)
    {
        detail::require(s >= 0, "ExpPolynomial: power of delta must be nonnegative");
        ExpPolynomial p;
        p.add(Key{s, e}, c);
        return p;
    }

    const Map &terms() const
    {
        return terms_;
    }

    bool is_zero() const
    {
        return terms_.empty();
    }

    std::size_t size() const
    {
        return terms_.size();
    }

    void add(const Key &key, Complex c)
    {
        if (c == Complex{}) {
            return;
        }
        auto [it, fresh] = terms_.try_emplace(key, c);
        if (!fresh) {
            it->second += c;
            if (it->second == Complex{}) {
                terms_.erase(it);
            }
        }
    }

    ExpPolynomial &operator+=(const ExpPolynomial &o)
    {
        for (const auto &[k, c] : o.terms_) {
            add(k, c);
        }
        return *this;
    }

    ExpPolynomial &operator-=(const ExpPolynomial &o)
    {
        for (const auto &[k, c] : o.terms_) {
            add(k, -c);
        }
        return *this;
    }

    ExpPolynomial &operator*=(Complex s)
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

    friend ExpPolynomial operator+(ExpPolynomial a, const ExpPolynomial &b)
    {
        a += b;
        return a;
    }

    friend ExpPolynomial operator-(ExpPolynomial a, const ExpPolynomial &b)
    {
        a -= b;
        return a;
    }

    friend ExpPolynomial operator*(Complex s, ExpPolynomial a)
    {
        a *= s;
        return a;
    }

    friend ExpPolynomial operator*(const ExpPolynomial &a, const ExpPolynomial &b)
    {
        ExpPolynomial r;
        for (const auto &[ka, ca] : a.terms_) {
            for (const auto &[kb, cb] : b.terms_) {
                r.add(Key{ka.s + kb.s, ka.exponent + kb.exponent}, ca * cb);
            }
        }
        return r;
    }

    /// Multiplies every term by e^{-nu delta}.
    ExpPolynomial damped(const Exponent &e) const
    {
        if (e.is_zero()) {
            return *this;
        }
        ExpPolynomial r;
        for (const auto &[k, c] : terms_) {
            r.terms_.emplace(Key{k.s, k.exponent + e}, c);
        }
        return r;
    }

    /// Drops terms with |c| < threshold.
    void purge(double threshold)
    {
        for (auto it = terms_.begin(); it != terms_.end();) {
            it = std::abs(it->second) < threshold ? terms_.erase(it) : std::next(it);
        }
    }

    /// Terms with nu = 0 only (a polynomial in delta).
    ExpPolynomial polynomial_part() const
    {
        ExpPolynomial r;
        for (const auto &[k, c] : terms_) {
            if (k.exponent.is_zero()) {
                r.terms_.emplace(k, c);
            }
        }
        return r;
    }

    /// Highest power of delta among nu = 0 terms (-1 when there are none).
    int polynomial_degree() const
    {
        int d = -1;
        for (const auto &[k, c] : terms_) {
            if (k.exponent.is_zero()) {
                d = std::max(d, k.s);
            }
        }
        return d;
    }

    double max_abs() const
    {
        double m = 0.0;
        for (const auto &[k, c] : terms_) {
            m = std::max(m, std::abs(c));
        }
        return m;
    }

    friend bool operator==(const ExpPolynomial &a, const ExpPolynomial &b)
    {
        if (a.terms_.size() != b.terms_.size()) {
            return false;
        }
        auto ib = b.terms_.begin();
        for (const auto &[k, c] : a.terms_) {
            if (ib->first.s != k.s || !(ib->first.exponent == k.exponent) || ib->second != c) {
                return false;
            }
            ++ib;
        }
        return true;
    }

private:
    Map terms_;
};

inline ExpPolynomial ep_mul(const ExpPolynomial &a, const ExpPolynomial &b)
{
    return a * b;
}

/// F(delta) = int_0^delta a(lambda) dlambda in closed form.
///
/// nu = 0:  delta^s          -> delta^{s+1} / (s+1)
/// nu > 0:  delta^s e^{-nu delta} -> s!/nu^{s+1} (1 - e^{-nu delta} sum_{j<=s} (nu delta)^j / j!)
inline ExpPolynomial ep_integrate(const ExpPolynomial &a)
{
    ExpPolynomial r;
    for (const auto &[k, c] : a.terms()) {
        if (k.exponent.is_zero()) {
            r.add({k.s + 1, Exponent{}}, c / static_cast<double>(k.s + 1));
            continue;
        }
        const double nu = k.exponent.nu();
        if (!(nu > 0.0)) {
            throw StructureError("ep_integrate: nonpositive decay rate " + std::to_string(nu));
        }
        // s! / nu^{s+1}
        double lead = 1.0 / nu;
        for (int i = 1; i <= k.s; ++i) {
            lead *= i / nu;
        }
        r.add({0, Exponent{}}, c * lead);
        // - s!/nu^{s+1} * nu^j / j! for j = 0..s
        double coef = lead;
        for (int j = 0; j <= k.s; ++j) {
            if (j > 0) {
                coef *= nu / j;
            }
            r.add({j, k.exponent}, -c * coef);
        }
    }
    return r;
}

inline Complex ep_eval(const ExpPolynomial &a, double delta)
{
    detail::require(delta >= 0.0, "ep_eval: delta must be nonnegative");
    Complex s{};
    for (const auto &[k, c] : a.terms()) {
        double w = k.s == 0 ? 1.0 : std::pow(delta, k.s);
        if (!k.exponent.is_zero()) {
            w *= std::exp(-k.exponent.nu() * delta);
        }
        s += c * w;
    }
    return s;
}

struct Limit {
    bool finite = false;
    Complex value{};
};

/// delta -> +infinity: finite iff no nu = 0 term carries a positive power of delta.
inline Limit ep_limit_infinity(const ExpPolynomial &a)
{
    Limit lim{true, Complex{}};
    for (const auto &[k, c] : a.terms()) {
        if (!k.exponent.is_zero()) {
            continue;
        }
        if (k.s > 0) {
            return {false, Complex{}};
        }
        lim.value = c;
    }
    return lim;
}

} // namespace normflow

#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "errors.hpp"
#include "multi_index.hpp"

namespace normflow {

/// sign(<omega, q>) together with |<omega, q>|.
struct SignedRate {
    int sign = 0;
    double magnitude = 0.0;
};

/// Frequency vector of H2 = sum_j omega_j z_j zbar_j with a finite nonresonance certificate:
/// |<omega, q>| > tolerance for every nonzero q with |q|_1 <= max_checked_order.
class FrequencyVector {
public:
    FrequencyVector(std::vector<double> omega, double tolerance, int max_checked_order)
        : omega_(std::move(omega)), tolerance_(tolerance), max_order_(max_checked_order)
    {
        detail::require(!omega_.empty(), "FrequencyVector: omega must be nonempty");
        detail::require(tolerance_ > 0.0, "FrequencyVector: resonance tolerance must be positive");
        detail::require(max_order_ >= 1, "FrequencyVector: max_checked_order must be >= 1");
        for (double w : omega_) {
            detail::require(std::isfinite(w), "FrequencyVector: omega must be finite");
        }
        certify();
    }

    /// Certificate sized for truncation degree M (every k' arising has |k'| <= M; checked to 2M).
    static FrequencyVector for_degree(std::vector<double> omega, int max_degree, double tolerance = 1e-9)
    {
        return FrequencyVector(std::move(omega), tolerance, std::max(2 * max_degree, 1));
    }

    int dof() const
    {
        return static_cast<int>(omega_.size());
    }

    const std::vector<double> &omega() const
    {
        return omega_;
    }

    double tolerance() const
    {
        return tolerance_;
    }

    int max_checked_order() const
    {
        return max_order_;
    }

    double inner(const IntVector &q) const
    {
        detail::require_same_dof(dof(), static_cast<int>(q.size()), "FrequencyVector::inner");
        double s = 0.0;
        for (std::size_t j = 0; j < q.size(); ++j) {
            s += omega_[j] * q[j];
        }
        return s;
    }

    /// (sigma_q, omega_q). Throws OrderOverflow when q is outside the certified range.
    SignedRate sigma_omega(const IntVector &q) const
    {
        const int order = l1_norm(q);
        if (order > max_order_) {
            throw OrderOverflow("sigma_omega: |q| = " + std::to_string(order) + " exceeds certified order "
                                + std::to_string(max_order_) + " for q = " + to_string(q));
        }
        if (order == 0) {
            return {0, 0.0};
        }
        const double v = inner(q);
        return {v > 0.0 ? 1 : -1, std::abs(v)};
    }

    int sigma(const IntVector &q) const
    {
        return sigma_omega(q).sign;
    }

    double rate(const IntVector &q) const
    {
        return sigma_omega(q).magnitude;
    }

    /// sigma_q * q, the representative of {q, -q} with <omega, .> > 0 (zero stays zero).
    IntVector positive_representative(const IntVector &q) const
    {
        return sigma(q) < 0 ? -q : q;
    }

    /// Smallest |<omega, q>| over the certified range.
    double smallest_divisor() const
    {
        double best = INFINITY;
        for_each_vector_in_l1_ball(dof(), max_order_, [&](const IntVector &q) {
            if (!is_zero(q)) {
                best = std::min(best, std::abs(inner(q)));
            }
        });
        return best;
    }

private:
    void certify() const
    {
        for_each_vector_in_l1_ball(dof(), max_order_, [&](const IntVector &q) {
            if (is_zero(q)) {
                return;
            }
            if (std::abs(inner(q)) <= tolerance_) {
                throw ResonanceError("frequencies are resonant at q = " + to_string(q)
                                     + " (|<omega,q>| <= " + std::to_string(tolerance_) + ")");
            }
        });
    }

    std::vector<double> omega_;
    double tolerance_;
    int max_order_;
};

inline SignedRate sigma_omega(const FrequencyVector &freq, const IntVector &q)
{
    return freq.sigma_omega(q);
}

} // namespace normflow

#pragma once

#include <cmath>
#include <vector>

#include "errors.hpp"
#include "frequency.hpp"
#include "normal_series.hpp"
#include "series.hpp"

namespace normflow {

struct BirkhoffResult {
    NormalSeries normal;
    /// generators[i] is homogeneous of degree i + 3.
    std::vector<TruncatedSeries> generators;
    /// Largest non-normal coefficient left in the transformed Hamiltonian.
    double residual = 0.0;
};

/// exp(ad_chi) h = sum_m {chi, .}^m h / m!, stopping once brackets exceed the truncation.
inline TruncatedSeries lie_transform(const TruncatedSeries &h, const TruncatedSeries &chi, int brackets)
{
    TruncatedSeries out = h;
    TruncatedSeries term = h;
    for (int m = 1; m <= brackets; ++m) {
        term = poisson_bracket(chi, term);
        term *= 1.0 / m;
        if (term.empty()) {
            break;
        }
        out += term;
    }
    return out;
}

/// Classical normalization degree by degree: at degree d the generator chi_d solves
/// {chi_d, H2} + R_d = 0 for the non-normal part R_d, i.e. chi_k = i R_k / <omega, k'>.
inline BirkhoffResult birkhoff_normalize(const TruncatedSeries &seed, const FrequencyVector &freq)
{
    detail::require_same_dof(seed.dof(), freq.dof(), "birkhoff_normalize");
    detail::require(seed.is_diamond(), "birkhoff_normalize: seed must be a diamond series");
    const int n = seed.dof();
    const int M = seed.max_degree();
    TruncatedSeries h = quadratic_hamiltonian(freq, M) + seed.with_degrees(0, M);
    BirkhoffResult result{NormalSeries(n, M / 2), {}, 0.0};

    for (int d = 3; d <= M; ++d) {
        TruncatedSeries chi(n, M, 0);
        for (const auto &[k, c] : h.terms()) {
            if (k.degree() != d || k.is_normal()) {
                continue;
            }
            const IntVector kp = k.prime();
            const double divisor = freq.inner(kp);
            if (std::abs(divisor) < freq.tolerance()) {
                throw ResonanceError("birkhoff_normalize: small divisor |<omega,k'>| = " + std::to_string(divisor)
                                     + " at k' = " + to_string(kp));
            }
            chi.set(k, Complex{0.0, 1.0} * c / divisor);
        }
        if (!chi.empty()) {
            const int brackets = (M - 2 + d - 3) / (d - 2);
            h = lie_transform(h, chi, brackets);
        }
        result.generators.push_back(chi.with_degrees(d, d));
    }

    for (const auto &[k, c] : h.terms()) {
        if (k.degree() < 3) {
            continue;
        }
        if (k.is_normal()) {
            result.normal.set(k.k(), c);
        } else {
            result.residual = std::max(result.residual, std::abs(c));
        }
    }
    return result;
}

} // namespace normflow

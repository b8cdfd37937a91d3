#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "errors.hpp"
#include "multi_index.hpp"
#include "series.hpp"

namespace normflow {

/// Dense coordinates for all monomials of 2n variables with degree in [min_degree, max_degree].
/// Used by the step-by-step integrators, where map-based series would dominate the run time.
class DenseLayout {
public:
    DenseLayout(int n, int min_degree, int max_degree)
        : n_(n), min_degree_(min_degree), max_degree_(max_degree),
          indices_(enumerate_indices(n, min_degree, max_degree))
    {
        position_.reserve(indices_.size());
        for (std::size_t i = 0; i < indices_.size(); ++i) {
            if (!position_.emplace(code(indices_[i]), static_cast<std::uint32_t>(i)).second) {
                throw StructureError("DenseLayout: index hash collision");
            }
            degrees_.push_back(indices_[i].degree());
        }
    }

    int dof() const
    {
        return n_;
    }

    int min_degree() const
    {
        return min_degree_;
    }

    int max_degree() const
    {
        return max_degree_;
    }

    std::size_t size() const
    {
        return indices_.size();
    }

    const MultiIndex &index(std::size_t i) const
    {
        return indices_[i];
    }

    int degree(std::size_t i) const
    {
        return degrees_[i];
    }

    /// Position of k, or -1 when k is outside the layout.
    long find(const MultiIndex &k) const
    {
        if (k.dof() != n_) {
            return -1;
        }
        auto it = position_.find(code(k));
        if (it == position_.end() || !(indices_[it->second] == k)) {
            return -1;
        }
        return static_cast<long>(it->second);
    }

    std::vector<Complex> pack(const TruncatedSeries &s) const
    {
        detail::require_same_dof(n_, s.dof(), "DenseLayout::pack");
        std::vector<Complex> v(size());
        for (const auto &[k, c] : s.terms()) {
            const long i = find(k);
            detail::require(i >= 0, "DenseLayout::pack: key " + to_string(k) + " outside layout");
            v[static_cast<std::size_t>(i)] = c;
        }
        return v;
    }

    /// Zero entries are not stored.
    TruncatedSeries unpack(std::span<const Complex> v) const
    {
        TruncatedSeries s(n_, max_degree_, min_degree_);
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (v[i] != Complex{}) {
                s.set(indices_[i], v[i]);
            }
        }
        return s;
    }

private:
    static std::uint64_t code(const MultiIndex &k)
    {
        std::uint64_t h = 1469598103934665603ull;
        auto mix = [&](int v) {
            h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        };
        for (int v : k.k()) {
            mix(v);
        }
        for (int v : k.kbar()) {
            mix(v);
        }
        return h;
    }

    int n_;
    int min_degree_;
    int max_degree_;
    std::vector<MultiIndex> indices_;
    std::vector<int> degrees_;
    std::unordered_map<std::uint64_t, std::uint32_t> position_;
};

/// Precomputed index triples for bilinear forms built from first derivatives:
/// for monomials a (left layout), b (right layout) and each j with a + b - e_j in the output
/// layout, plus = abar_j b_j and minus = a_j bbar_j.
///
/// {F, G}_t = i sum (plus - minus) F_a G_b and
/// (d_{z_j} F d_{zbar_j} G)_t = sum minus F_a G_b, both summed over entries with target t.
class BracketStencil {
public:
    struct Entry {
        std::uint32_t a;
        std::uint32_t b;
        std::uint32_t target;
        double plus;
        double minus;
    };

    BracketStencil(const DenseLayout &left, const DenseLayout &right, const DenseLayout &out)
    {
        detail::require_same_dof(left.dof(), right.dof(), "BracketStencil");
        detail::require_same_dof(left.dof(), out.dof(), "BracketStencil");
        const int n = left.dof();
        for (std::size_t ia = 0; ia < left.size(); ++ia) {
            const MultiIndex &a = left.index(ia);
            for (std::size_t ib = 0; ib < right.size(); ++ib) {
                const MultiIndex &b = right.index(ib);
                const int d = left.degree(ia) + right.degree(ib) - 2;
                if (d > out.max_degree()) {
                    break;
                }
                if (d < out.min_degree()) {
                    continue;
                }
                for (int j = 0; j < n; ++j) {
                    const int plus = a.kbar()[j] * b.k()[j];
                    const int minus = a.k()[j] * b.kbar()[j];
                    if (plus == 0 && minus == 0) {
                        continue;
                    }
                    IntVector k = a.k() + b.k();
                    IntVector kbar = a.kbar() + b.kbar();
                    --k[j];
                    --kbar[j];
                    const long t = out.find(MultiIndex(std::move(k), std::move(kbar)));
                    if (t < 0) {
                        continue;
                    }
                    entries_.push_back(Entry{static_cast<std::uint32_t>(ia), static_cast<std::uint32_t>(ib),
                                             static_cast<std::uint32_t>(t), static_cast<double>(plus),
                                             static_cast<double>(minus)});
                }
            }
        }
    }

    std::size_t size() const
    {
        return entries_.size();
    }

    /// out += scale * {f, g}.
    void bracket(std::span<const Complex> f, std::span<const Complex> g, std::span<Complex> out,
                 Complex scale = 1.0) const
    {
        const Complex s = scale * Complex{0.0, 1.0};
        for (const Entry &e : entries_) {
            const Complex fg = f[e.a] * g[e.b];
            if (fg == Complex{}) {
                continue;
            }
            out[e.target] += s * (e.plus - e.minus) * fg;
        }
    }

    /// out += scale * sum_j d_{z_j} f d_{zbar_j} g for real coefficient vectors.
    void gradient_product(std::span<const double> f, std::span<const double> g, std::span<double> out,
                          double scale = 1.0) const
    {
        for (const Entry &e : entries_) {
            if (e.minus != 0.0) {
                out[e.target] += scale * e.minus * f[e.a] * g[e.b];
            }
        }
    }

private:
    std::vector<Entry> entries_;
};

} // namespace normflow

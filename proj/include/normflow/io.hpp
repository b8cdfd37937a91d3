#pragma once

#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "exp_poly.hpp"
#include "flow.hpp"
#include "frequency.hpp"
#include "graded.hpp"
#include "normal_series.hpp"
#include "series.hpp"

namespace normflow::io {

using Json = nlohmann::ordered_json;

namespace detail {

template <class T>
T get(const Json &j, const char *key)
{
    if (!j.is_object() || !j.contains(key)) {
        throw ParseError(std::string("missing field \"") + key + "\"");
    }
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception &e) {
        throw ParseError(std::string("field \"") + key + "\": " + e.what());
    }
}

inline Complex complex_from(const Json &j)
{
    return {get<double>(j, "re"), get<double>(j, "im")};
}

} // namespace detail

inline Json parse(const std::string &text)
{
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error &e) {
        throw ParseError(std::string("invalid JSON: ") + e.what());
    }
}

inline Json read_file(const std::string &path)
{
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open " + path);
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

// ---- series ----

inline Json to_json(const TruncatedSeries &s)
{
    Json terms = Json::array();
    for (const auto &[k, c] : s.terms()) {
        terms.push_back({{"k", k.k()}, {"kbar", k.kbar()}, {"re", c.real()}, {"im", c.imag()}});
    }
    return {{"n", s.dof()}, {"M", s.max_degree()}, {"min_degree", s.min_degree()}, {"terms", terms}};
}

/// Reads a series. max_degree_override replaces "M" (keys above it are dropped).
inline TruncatedSeries series_from_json(const Json &j, std::optional<int> max_degree_override = std::nullopt)
{
    const int n = detail::get<int>(j, "n");
    const int M = max_degree_override.value_or(detail::get<int>(j, "M"));
    const int min_degree = j.contains("min_degree") ? detail::get<int>(j, "min_degree") : 0;
    if (n < 1 || M < 0 || min_degree < 0) {
        throw ParseError("series: n must be positive and degrees nonnegative");
    }
    TruncatedSeries s(n, M, min_degree);
    if (!j.contains("terms") || !j.at("terms").is_array()) {
        throw ParseError("series: missing \"terms\" array");
    }
    for (const Json &t : j.at("terms")) {
        const auto k = detail::get<IntVector>(t, "k");
        const auto kbar = detail::get<IntVector>(t, "kbar");
        if (static_cast<int>(k.size()) != n || static_cast<int>(kbar.size()) != n) {
            throw ParseError("series: term exponent length differs from n");
        }
        for (int v : k) {
            if (v < 0) {
                throw ParseError("series: negative exponent");
            }
        }
        for (int v : kbar) {
            if (v < 0) {
                throw ParseError("series: negative exponent");
            }
        }
        const MultiIndex mi(k, kbar);
        if (mi.degree() > M) {
            continue;
        }
        s.accumulate(mi, detail::complex_from(t));
    }
    return s;
}

/// Frequencies from {"omega": [...], "tolerance": t}; omega_override replaces the stored vector.
inline FrequencyVector frequency_from_json(const Json &j, int max_degree,
                                           const std::optional<std::vector<double>> &omega_override = std::nullopt,
                                           std::optional<double> tolerance_override = std::nullopt)
{
    std::vector<double> omega;
    if (omega_override) {
        omega = *omega_override;
    } else {
        omega = detail::get<std::vector<double>>(j, "omega");
    }
    double tol = 1e-9;
    if (tolerance_override) {
        tol = *tolerance_override;
    } else if (j.contains("tolerance")) {
        tol = detail::get<double>(j, "tolerance");
    }
    return FrequencyVector::for_degree(std::move(omega), max_degree, tol);
}

// ---- exp-polynomials and flow solutions ----

inline Json to_json(const ExpPolynomial &p)
{
    Json terms = Json::array();
    for (const auto &[key, c] : p.terms()) {
        Json atoms = Json::array();
        if (!key.exponent.is_zero()) {
            atoms.push_back(key.exponent.reduced());
        }
        terms.push_back({{"s", key.s}, {"nu_atoms", atoms}, {"re", c.real()}, {"im", c.imag()}});
    }
    return terms;
}

inline ExpPolynomial exp_polynomial_from_json(const Json &j, const FrequencyVector &freq)
{
    if (!j.is_array()) {
        throw ParseError("exp-polynomial: expected a term array");
    }
    ExpPolynomial p;
    for (const Json &t : j) {
        const int s = detail::get<int>(t, "s");
        if (s < 0) {
            throw ParseError("exp-polynomial: negative power of delta");
        }
        Exponent e;
        for (const auto &q : detail::get<std::vector<IntVector>>(t, "nu_atoms")) {
            if (static_cast<int>(q.size()) != freq.dof()) {
                throw ParseError("exp-polynomial: atom length differs from n");
            }
            e = e + Exponent::from_reduced(freq, q);
        }
        p.add({s, e}, detail::complex_from(t));
    }
    return p;
}

inline Json to_json(const FlowSolution &sol)
{
    Json traj = Json::array();
    for (const auto &[k, p] : sol.trajectories()) {
        traj.push_back({{"k", k.k()}, {"kbar", k.kbar()}, {"terms", to_json(p)}});
    }
    Json seed = to_json(sol.seed());
    return {{"n", sol.dof()},
            {"M", sol.max_degree()},
            {"omega", sol.freq().omega()},
            {"tolerance", sol.freq().tolerance()},
            {"seed", seed},
            {"trajectories", traj}};
}

inline FlowSolution flow_solution_from_json(const Json &j)
{
    const int M = detail::get<int>(j, "M");
    const FrequencyVector freq = frequency_from_json(j, M);
    FlowSolution sol(freq, series_from_json(detail::get<Json>(j, "seed")));
    for (const Json &t : detail::get<Json>(j, "trajectories")) {
        const MultiIndex k(detail::get<IntVector>(t, "k"), detail::get<IntVector>(t, "kbar"));
        sol.store(k, exp_polynomial_from_json(detail::get<Json>(t, "terms"), freq));
    }
    return sol;
}

// ---- normal and graded series ----

inline Json to_json(const NormalSeries &s)
{
    Json terms = Json::array();
    for (const auto &[l, c] : s.terms()) {
        terms.push_back({{"l", l}, {"re", c.real()}, {"im", c.imag()}});
    }
    return {{"n", s.dof()}, {"K", s.max_kappa_degree()}, {"terms", terms}};
}

inline NormalSeries normal_series_from_json(const Json &j)
{
    NormalSeries s(detail::get<int>(j, "n"), detail::get<int>(j, "K"));
    for (const Json &t : detail::get<Json>(j, "terms")) {
        const auto l = detail::get<IntVector>(t, "l");
        if (static_cast<int>(l.size()) != s.dof()) {
            throw ParseError("normal series: exponent length differs from n");
        }
        s.set(l, detail::complex_from(t));
    }
    return s;
}

inline std::string kappa_key(const IntVector &l)
{
    std::string out;
    for (std::size_t i = 0; i < l.size(); ++i) {
        out += (i ? "," : "") + std::to_string(l[i]);
    }
    return out;
}

inline IntVector parse_kappa_key(const std::string &key, int n)
{
    IntVector l;
    std::stringstream ss(key);
    std::string part;
    while (std::getline(ss, part, ',')) {
        try {
            l.push_back(std::stoi(part));
        } catch (const std::exception &) {
            throw ParseError("graded series: bad kappa monomial \"" + key + "\"");
        }
    }
    if (static_cast<int>(l.size()) != n) {
        throw ParseError("graded series: kappa monomial \"" + key + "\" has wrong length");
    }
    return l;
}

inline Json to_json(const GradedHamiltonian &g)
{
    Json comps = Json::array();
    for (const auto &[q, nq] : g.components()) {
        Json nj = Json::object();
        for (const auto &[l, c] : nq.terms()) {
            nj[kappa_key(l)] = {c.real(), c.imag()};
        }
        comps.push_back({{"q", q}, {"N", nj}});
    }
    return {{"n", g.dof()}, {"M", g.max_degree()}, {"components", comps}};
}

inline GradedHamiltonian graded_from_json(const Json &j)
{
    GradedHamiltonian g(detail::get<int>(j, "n"), detail::get<int>(j, "M"));
    for (const Json &c : detail::get<Json>(j, "components")) {
        const auto q = detail::get<IntVector>(c, "q");
        if (static_cast<int>(q.size()) != g.dof()) {
            throw ParseError("graded series: q length differs from n");
        }
        NormalSeries nq(g.dof(), std::max(g.kappa_limit(q), 0));
        const Json coeffs = detail::get<Json>(c, "N");
        if (!coeffs.is_object()) {
            throw ParseError("graded series: \"N\" must be an object");
        }
        for (const auto &[key, v] : coeffs.items()) {
            if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
                throw ParseError("graded series: coefficient must be [re, im]");
            }
            nq.set(parse_kappa_key(key, g.dof()), {v[0].get<double>(), v[1].get<double>()});
        }
        g.set(q, nq);
    }
    return g;
}

// ---- transforms ----

inline Json to_json(const CanonicalTransform &t)
{
    Json z = Json::array();
    Json zbar = Json::array();
    for (const auto &s : t.Z) {
        z.push_back(to_json(s));
    }
    for (const auto &s : t.Zbar) {
        zbar.push_back(to_json(s));
    }
    return {{"delta", t.delta}, {"degree", t.degree}, {"Z", z}, {"Zbar", zbar}};
}

inline CanonicalTransform transform_from_json(const Json &j)
{
    CanonicalTransform t;
    t.delta = detail::get<double>(j, "delta");
    t.degree = detail::get<int>(j, "degree");
    for (const Json &s : detail::get<Json>(j, "Z")) {
        t.Z.push_back(series_from_json(s));
    }
    for (const Json &s : detail::get<Json>(j, "Zbar")) {
        t.Zbar.push_back(series_from_json(s));
    }
    if (t.Z.size() != t.Zbar.size()) {
        throw ParseError("transform: Z and Zbar differ in length");
    }
    return t;
}

// ---- CSV ----

inline std::string csv_number(double v)
{
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

/// One row per (k, delta): k_1..k_n, kbar_1..kbar_n, delta, re, im.
inline std::string trajectory_csv(const std::vector<std::pair<double, TruncatedSeries>> &samples)
{
    std::ostringstream os;
    if (samples.empty()) {
        return "";
    }
    const int n = samples.front().second.dof();
    for (int j = 1; j <= n; ++j) {
        os << "k" << j << ",";
    }
    for (int j = 1; j <= n; ++j) {
        os << "kbar" << j << ",";
    }
    os << "delta,re,im\n";
    for (const auto &[delta, s] : samples) {
        for (const auto &[k, c] : s.terms()) {
            for (int v : k.k()) {
                os << v << ",";
            }
            for (int v : k.kbar()) {
                os << v << ",";
            }
            os << csv_number(delta) << "," << csv_number(c.real()) << "," << csv_number(c.imag()) << "\n";
        }
    }
    return os.str();
}

struct RadiusSample {
    double delta;
    double radius;
    double norm;
};

inline std::string radius_csv(const std::vector<RadiusSample> &rows)
{
    std::ostringstream os;
    os << "delta,radius,norm\n";
    for (const auto &r : rows) {
        os << csv_number(r.delta) << "," << csv_number(r.radius) << "," << csv_number(r.norm) << "\n";
    }
    return os.str();
}

} // namespace normflow::io

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "normflow/normflow.hpp"
#include "testing.hpp"

using namespace normflow;
using namespace normflow::testing;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

class Report {
public:
    void fail(const std::string &what)
    {
        if (pass_) {
            first_ = what;
        }
        pass_ = false;
        ++failures_;
    }

    void check(bool ok, const std::string &what)
    {
        if (!ok) {
            fail(what);
        }
    }

    void note(const std::string &s)
    {
        notes_ += (notes_.empty() ? "" : "; ") + s;
    }

    Outcome outcome() const
    {
        if (pass_) {
            return {true, notes_};
        }
        return {false, std::to_string(failures_) + " failure(s), first: " + first_
                           + (notes_.empty() ? "" : "; " + notes_)};
    }

private:
    bool pass_ = true;
    int failures_ = 0;
    std::string first_;
    std::string notes_;
};

std::string fmt(double v)
{
    std::ostringstream os;
    os.precision(2);
    os << std::scientific << v;
    return os.str();
}

struct Case {
    TruncatedSeries seed;
    FrequencyVector freq;
};

/// The 20-seed sweep; criteria 2 to 5 and 9 reuse it.
const std::vector<Case> &sweep()
{
    static const std::vector<Case> cases = [] {
        std::vector<Case> out;
        std::mt19937_64 rng(20240);
        const auto w1 = FrequencyVector::for_degree({1.0}, 8);
        const auto wa = FrequencyVector::for_degree({1.0, kSqrt2}, 8);
        const auto wb = FrequencyVector::for_degree({1.0, kGolden}, 8);
        for (int i = 0; i < 6; ++i) {
            out.push_back({random_real_seed(rng, 1, 8, 0.7), w1});
        }
        for (int i = 0; i < 7; ++i) {
            out.push_back({random_real_seed(rng, 2, 6 + i % 3, 0.4), wa});
        }
        for (int i = 0; i < 7; ++i) {
            out.push_back({random_real_seed(rng, 2, 8, 0.3), wb});
        }
        return out;
    }();
    return cases;
}

const std::vector<FlowSolution> &sweep_solutions()
{
    static const std::vector<FlowSolution> sols = [] {
        std::vector<FlowSolution> out;
        for (const auto &c : sweep()) {
            out.push_back(solve_flow(c.seed, c.freq));
        }
        return out;
    }();
    return sols;
}

TruncatedSeries one_sided(const TruncatedSeries &h, const FrequencyVector &freq)
{
    TruncatedSeries out = TruncatedSeries::diamond(h.dof(), h.max_degree());
    for (const auto &[k, c] : h.terms()) {
        if (freq.sigma(k.prime()) >= 0) {
            out.set(k, c);
        }
    }
    return out;
}

TruncatedSeries abs_series(const TruncatedSeries &h)
{
    TruncatedSeries out(h.dof(), h.max_degree(), 0);
    for (const auto &[k, c] : h.terms()) {
        out.set(k, std::abs(c));
    }
    return out;
}

TruncatedSeries damp(const TruncatedSeries &h, const FrequencyVector &freq, double delta)
{
    TruncatedSeries out(h.dof(), h.max_degree(), h.min_degree());
    for (const auto &[k, c] : h.terms()) {
        out.set(k, c * std::exp(-freq.rate(k.prime()) * delta));
    }
    return out;
}

double scale_of(const TruncatedSeries &h)
{
    return std::max(1.0, h.max_abs());
}

// ---- criteria ----

Outcome worked_fixture()
{
    Report r;
    const auto t0 = std::chrono::steady_clock::now();
    const auto freq = FrequencyVector::for_degree({1.0}, 4);
    const TruncatedSeries seed = cubic_fixture(4);
    const FlowSolution sol = solve_flow(seed, freq);
    const MultiIndex k22({2}, {2});
    double traj_err = 0.0;
    for (double d : {0.0, 0.25, 1.0, 3.0, 10.0}) {
        traj_err = std::max(traj_err, std::abs(ep_eval(sol.trajectory(k22), d) + 3.0 * (1.0 - std::exp(-6.0 * d))));
    }
    r.check(traj_err <= 1e-12, "trajectory (2,2) error " + fmt(traj_err));
    const double nf_err = std::abs(normal_form(sol).coeff({2}) + 3.0);
    r.check(nf_err <= 1e-12, "normal form error " + fmt(nf_err));
    const TruncatedSeries rk = rk4_oracle(seed, freq, 1.0, 1000);
    const double rk_err = std::abs(rk.coeff(k22) + 3.0 * (1.0 - std::exp(-6.0)));
    r.check(rk_err <= 1e-8, "rk4 error " + fmt(rk_err));
    const double rk_all = max_abs_difference(rk, sol.h_value_at(1.0));
    r.check(rk_all <= 1e-8, "rk4 vs exact " + fmt(rk_all));
    const double bk_err = std::abs(birkhoff_normalize(seed, freq).normal.coeff({2}) + 3.0);
    r.check(bk_err <= 1e-9, "birkhoff error " + fmt(bk_err));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    r.check(secs < 1.0, "runtime " + fmt(secs) + " s");
    r.note("rk4 err " + fmt(rk_err) + ", birkhoff err " + fmt(bk_err) + ", " + fmt(secs) + " s");
    return r.outcome();
}

Outcome oracle_sweep()
{
    Report r;
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    for (std::size_t i = 0; i < sweep().size(); ++i) {
        const Case &c = sweep()[i];
        const FlowSolution &sol = sweep_solutions()[i];
        Rk4Oracle rk(c.seed, c.freq);
        double t = 0.0;
        for (double d : {0.1, 1.0, 5.0}) {
            rk.advance(d - t, static_cast<int>(std::ceil(300.0 * (d - t))));
            t = d;
            const double rel = relative_difference(sol.h_value_at(d), rk.state());
            worst = std::max(worst, rel);
            r.check(rel <= 1e-6, "seed " + std::to_string(i) + " delta " + fmt(d) + ": " + fmt(rel));
        }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    r.check(secs < 60.0, "runtime " + fmt(secs) + " s");
    r.note("worst relative difference " + fmt(worst) + ", " + fmt(secs) + " s");
    return r.outcome();
}

Outcome normal_form_uniqueness()
{
    Report r;
    double worst = 0.0;
    for (std::size_t i = 0; i < sweep().size(); ++i) {
        const NormalSeries flow = normal_form(sweep_solutions()[i]);
        const NormalSeries bk = birkhoff_normalize(sweep()[i].seed, sweep()[i].freq).normal;
        const double diff = max_abs_difference(flow, bk) / std::max(1.0, flow.max_abs());
        worst = std::max(worst, diff);
        r.check(diff <= 1e-9, "seed " + std::to_string(i) + ": " + fmt(diff));
    }
    r.note("worst difference " + fmt(worst));
    return r.outcome();
}

Outcome strip_and_ball()
{
    Report r;
    std::mt19937_64 rng(4);
    int runs = 0;
    for (const auto &c : sweep()) {
        const FlowSolution sol = solve_flow(one_sided(c.seed, c.freq), c.freq);
        r.check(check_strip_invariance(sol, 0.0, INFINITY), "strip left by a one-sided seed");
        ++runs;
    }
    const auto wa = FrequencyVector::for_degree({1.0, kSqrt2}, 8);
    const auto w1 = FrequencyVector::for_degree({1.0}, 10);
    for (int i = 0; i < 5; ++i) {
        const FlowSolution sa = solve_flow(random_real_seed(rng, 2, 8, 0.5, 1.0, 6), wa);
        r.check(check_ball_invariance(sa, 5), "ball left (n = 2)");
        const FlowSolution sb = solve_flow(random_real_seed(rng, 1, 10, 0.8, 1.0, 6), w1);
        r.check(check_ball_invariance(sb, 5), "ball left (n = 1)");
        runs += 2;
    }
    r.note(std::to_string(runs) + " flows checked");
    return r.outcome();
}

Outcome reality_and_reversibility()
{
    Report r;
    const std::vector<double> deltas = {0.1, 1.0, 5.0};
    for (std::size_t i = 0; i < sweep().size(); ++i) {
        for (double d : deltas) {
            const TruncatedSeries h = sweep_solutions()[i].h_value_at(d);
            r.check(is_real(h, 1e-11 * scale_of(h)), "reality, seed " + std::to_string(i));
        }
    }
    std::mt19937_64 rng(5);
    const auto wa = FrequencyVector::for_degree({1.0, kSqrt2}, 7);
    const auto w1 = FrequencyVector::for_degree({1.0}, 8);
    double worst = 0.0;
    for (auto sign : {InvolutionSign::plus, InvolutionSign::minus}) {
        for (int i = 0; i < 6; ++i) {
            const bool two = i % 2 == 0;
            const TruncatedSeries raw = two ? random_real_seed(rng, 2, 7, 0.5) : random_real_seed(rng, 1, 8, 0.7);
            const TruncatedSeries seed = 0.5 * (raw + involution(raw, sign));
            const FlowSolution sol = solve_flow(seed, two ? wa : w1);
            for (double d : deltas) {
                const TruncatedSeries h = sol.h_value_at(d);
                const double defect = max_abs_difference(involution(h, sign), h) / scale_of(h);
                worst = std::max(worst, defect);
                r.check(defect <= 1e-11, std::string(sign == InvolutionSign::plus ? "I+" : "I-") + " defect "
                                             + fmt(defect));
                r.check(is_real(h, 1e-11 * scale_of(h)), "reality of a reversible seed");
            }
        }
    }
    r.note("worst reversibility defect " + fmt(worst));
    return r.outcome();
}

Outcome transform_consistency()
{
    Report r;
    std::mt19937_64 rng(6);
    std::vector<Case> cases;
    cases.push_back({cubic_fixture(6), FrequencyVector::for_degree({1.0}, 6)});
    cases.push_back({random_real_seed(rng, 1, 7, 0.7), FrequencyVector::for_degree({1.0}, 7)});
    cases.push_back({random_real_seed(rng, 2, 6, 0.4), FrequencyVector::for_degree({1.0, kSqrt2}, 6)});
    double worst_sub = 0.0;
    double worst_symp = 0.0;
    for (const auto &c : cases) {
        const int M = c.seed.max_degree();
        const FlowSolution sol = solve_flow(c.seed, c.freq);
        const CanonicalTransform t = normalizing_transform(sol, 1.0, 0);
        const TruncatedSeries h2 = quadratic_hamiltonian(c.freq, M);
        const TruncatedSeries lhs = compose(h2 + sol.h_value_at(1.0), t, M - 1);
        const TruncatedSeries rhs = (h2 + c.seed).truncated(M - 1);
        const double sub = max_abs_difference(lhs, rhs) / scale_of(rhs);
        const double symp = symplectic_defect(t, M - 2);
        worst_sub = std::max(worst_sub, sub);
        worst_symp = std::max(worst_symp, symp);
        r.check(sub <= 1e-7, "substitution residual " + fmt(sub));
        r.check(symp < 1e-7, "symplectic defect " + fmt(symp));
    }
    r.note("substitution " + fmt(worst_sub) + ", symplectic " + fmt(worst_symp));
    return r.outcome();
}

Outcome majorant_principle()
{
    Report r;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> slack(1.0, 1.5);
    const auto freq = FrequencyVector::for_degree({1.0, kSqrt2}, 6);
    int checked = 0;
    for (int pair = 0; pair < 10; ++pair) {
        const TruncatedSeries seed = random_real_seed(rng, 2, 6, 0.5);
        TruncatedSeries hbar0 = abs_series(seed);
        for (const auto &[k, c] : seed.terms()) {
            hbar0.set(k, c.real() == 0.0 && c.imag() == 0.0 ? 0.0 : std::abs(c) * slack(rng));
        }
        const FlowSolution sol = solve_flow(seed, freq);
        for (double d : {0.5, 1.0, 2.0}) {
            const TruncatedSeries hbar = majorant_flow(hbar0, d, 400);
            for (const MultiIndex &k : enumerate_indices(2, 3, 6)) {
                ++checked;
                const double lhs = std::abs(sol.h_value_at(d).coeff(k));
                if (lhs > hbar.coeff(k).real() * (1.0 + 1e-9) + 1e-14) {
                    r.fail("violation at " + to_string(k) + ", delta " + fmt(d));
                }
            }
        }
    }
    r.note(std::to_string(checked) + " (k, delta) pairs");
    return r.outcome();
}

Outcome burgers()
{
    Report r;
    double worst = 0.0;
    for (double a : {0.5, 1.0, 2.0}) {
        for (int n : {1, 2, 3}) {
            for (double d : {0.01, 0.1, 1.0}) {
                const double closed = burgers_radius(a, 1.5, n, d);
                const double gap = std::abs(burgers_empirical_boundary(a, 1.5, n, d) / closed - 1.0);
                worst = std::max(worst, gap);
                r.check(gap <= 0.01, "boundary gap " + fmt(gap));
            }
        }
    }
    for (double a : {0.5, 2.0}) {
        for (int n : {1, 3}) {
            for (double d : {100.0, 300.0, 1e3, 1e4}) {
                const double ratio = burgers_radius(a, 1.0, n, 2.0 * d) / burgers_radius(a, 1.0, n, d);
                r.check(ratio >= 0.45 && ratio <= 0.55, "ratio " + fmt(ratio));
            }
        }
    }
    r.note("worst boundary gap " + fmt(worst));
    return r.outcome();
}

Outcome asymptotic_machinery()
{
    Report r;
    double worst_ode = 0.0, worst_conj = 0.0, worst_one = 0.0;
    const std::vector<double> deltas = {0.5, 1.0, 2.0};
    for (std::size_t i = 0; i < sweep().size(); ++i) {
        const Case &c = sweep()[i];
        const GradedHamiltonian g = grade(c.seed);
        for (double d : deltas) {
            const double e = max_abs_difference(asymptotic_flow_explicit(g, c.freq, d), asymptotic_flow_ode(g, c.freq, d, 400));
            worst_ode = std::max(worst_ode, e);
            r.check(e <= 1e-8, "explicit vs ode " + fmt(e));
        }
        const GradedHamiltonian ghat = grade(lambda_conjugacy(c.seed, c.freq));
        const FlowSolution &sol = sweep_solutions()[i];
        for (double d : deltas) {
            const TruncatedSeries lhs = lambda_conjugacy(sol.h_value_at(d), c.freq);
            const TruncatedSeries rhs = damp(asymptotic_flow_explicit(ghat, c.freq, d).reconstruct(), c.freq, d);
            const double e = max_abs_difference(lhs, rhs) / scale_of(rhs);
            worst_conj = std::max(worst_conj, e);
            r.check(e < 1e-7, "conjugacy residual " + fmt(e));
        }
        const TruncatedSeries os = one_sided(c.seed, c.freq);
        const FlowSolution osol = solve_flow(os, c.freq);
        for (double d : deltas) {
            const double e = max_abs_difference(one_sided_flow(grade(os), c.freq, d).reconstruct(), osol.h_value_at(d));
            worst_one = std::max(worst_one, e);
            r.check(e <= 1e-9, "one-sided coincidence " + fmt(e));
        }
    }
    r.note("ode " + fmt(worst_ode) + ", conjugacy " + fmt(worst_conj) + ", one-sided " + fmt(worst_one));
    return r.outcome();
}

Outcome converging_and_divergent()
{
    Report r;
    const auto freq = FrequencyVector::for_degree({1.0, kSqrt2}, 11);
    const IntVector q{1, 0};
    NormalSeries nq(2, 5), nmq(2, 5), n0(2, 5);
    nq.set({0, 0}, 1.0);
    nq.set({1, 0}, 0.5);
    nmq.set({0, 0}, 1.0);
    nmq.set({0, 1}, -0.5);
    n0.set({2, 0}, 0.5);
    n0.set({0, 2}, 0.5);
    const ThreeSystemState s40 = three_system_integrate(nq, nmq, n0, q, freq, 40.0, 4000);
    const ThreeSystemState s50 = three_system_integrate(nq, nmq, n0, q, freq, 50.0, 5000);
    const double tail = std::exp(-freq.rate(q) * 50.0) * std::max(s50.nq.max_abs(), s50.nmq.max_abs());
    const double drift = max_abs_difference(s50.n0, s40.n0);
    r.check(tail < 1e-6, "off-diagonal components " + fmt(tail));
    r.check(drift < 1e-6, "N0 drift " + fmt(drift));

    const GradedHamiltonian seed = make_divergence_seed(freq, 11);
    const std::vector<double> deltas = {0.0, 1.0, 2.0, 4.0, 8.0, 16.0};
    const auto norms = divergence_probe(seed, freq, 0.5, deltas);
    for (std::size_t i = 1; i < norms.size(); ++i) {
        r.check(norms[i] > norms[i - 1], "probe not increasing at delta " + fmt(deltas[i]));
    }
    r.note("tail " + fmt(tail) + ", drift " + fmt(drift) + ", probe " + fmt(norms.front()) + " -> " + fmt(norms.back()));
    return r.outcome();
}

} // namespace

int main()
{
    const std::vector<std::pair<const char *, std::function<Outcome()>>> criteria = {
        {"worked 1-DOF fixture", worked_fixture},
        {"exact vs RK4 sweep", oracle_sweep},
        {"normal form uniqueness", normal_form_uniqueness},
        {"strip and ball invariance", strip_and_ball},
        {"reality and reversibility", reality_and_reversibility},
        {"transform consistency", transform_consistency},
        {"majorant principle", majorant_principle},
        {"Burgers radius", burgers},
        {"asymptotic machinery", asymptotic_machinery},
        {"converging case and divergence probe", converging_and_divergent},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception &e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += o.pass ? 0 : 1;
        std::printf("Criterion %zu: %s  %s (%s)\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first, o.detail.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}

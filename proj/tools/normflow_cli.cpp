#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "normflow/normflow.hpp"

using namespace normflow;
using io::Json;

namespace {

struct JobSpec {
    std::string command;
    std::string input;
    std::string output;
    std::optional<int> degree;
    std::string delta = "1";
    int steps = 0;
    std::string mode = "exact";
    std::string format = "json";
    std::string omega;
    std::optional<double> tolerance;
    double rho = 0.5;
};

std::vector<double> parse_list(const std::string &text, const char *what)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(part, &used));
            if (used != part.size()) {
                throw std::invalid_argument(part);
            }
        } catch (const std::exception &) {
            throw ParseError(std::string("bad number in ") + what + ": \"" + part + "\"");
        }
    }
    if (out.empty()) {
        throw ParseError(std::string("empty list for ") + what);
    }
    return out;
}

struct Problem {
    TruncatedSeries seed;
    FrequencyVector freq;
};

Problem load(const JobSpec &job)
{
    const Json j = io::read_file(job.input);
    TruncatedSeries seed = io::series_from_json(j, job.degree);
    detail::require(seed.max_degree() >= 3, "truncation degree must be at least 3");
    std::optional<std::vector<double>> omega;
    if (!job.omega.empty()) {
        omega = parse_list(job.omega, "--omega");
    }
    FrequencyVector freq = io::frequency_from_json(j, seed.max_degree(), omega, job.tolerance);
    detail::require_same_dof(seed.dof(), freq.dof(), "input");
    detail::require(seed.min_degree() >= 3 || seed.with_degrees(0, 2).empty(),
                    "input series has terms below degree 3");
    seed = seed.with_degrees(3, seed.max_degree());
    return {std::move(seed), std::move(freq)};
}

std::vector<double> deltas(const JobSpec &job)
{
    std::vector<double> ds = parse_list(job.delta, "--delta");
    for (double d : ds) {
        detail::require(d >= 0.0 && std::isfinite(d), "--delta values must be finite and nonnegative");
    }
    return ds;
}

int steps_for(const JobSpec &job, const Problem &p, double delta)
{
    return job.steps > 0 ? job.steps : default_rk4_steps(p.freq, p.seed.max_degree(), delta);
}

void emit(const JobSpec &job, const std::string &text)
{
    if (job.output.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(job.output);
    if (!out) {
        throw PreconditionError("cannot write " + job.output);
    }
    out << text;
}

std::string dump(const Json &j)
{
    return j.dump(2) + "\n";
}

void run_flow(const JobSpec &job)
{
    const Problem p = load(job);
    const auto ds = deltas(job);
    std::vector<std::pair<double, TruncatedSeries>> samples;
    std::optional<FlowSolution> sol;
    if (job.mode == "exact") {
        sol = solve_flow(p.seed, p.freq);
        for (double d : ds) {
            samples.emplace_back(d, sol->h_value_at(d));
        }
    } else {
        for (double d : ds) {
            samples.emplace_back(d, rk4_oracle(p.seed, p.freq, d, steps_for(job, p, d)));
        }
    }
    if (job.format == "csv") {
        emit(job, io::trajectory_csv(samples));
        return;
    }
    Json out = {{"mode", job.mode}, {"omega", p.freq.omega()}};
    Json js = Json::array();
    for (const auto &[d, s] : samples) {
        js.push_back({{"delta", d}, {"series", io::to_json(s)}});
    }
    out["samples"] = js;
    if (sol) {
        out["solution"] = io::to_json(*sol);
    }
    emit(job, dump(out));
}

void run_normal_form(const JobSpec &job)
{
    const Problem p = load(job);
    NormalSeries nf = job.mode == "exact" ? normal_form(solve_flow(p.seed, p.freq))
                                          : birkhoff_normalize(p.seed, p.freq).normal;
    if (job.format == "csv") {
        std::ostringstream os;
        for (int j = 1; j <= nf.dof(); ++j) {
            os << "l" << j << ",";
        }
        os << "re,im\n";
        for (const auto &[l, c] : nf.terms()) {
            for (int v : l) {
                os << v << ",";
            }
            os << io::csv_number(c.real()) << "," << io::csv_number(c.imag()) << "\n";
        }
        emit(job, os.str());
        return;
    }
    emit(job, dump({{"normal_form", io::to_json(nf)}}));
}

void run_transform(const JobSpec &job)
{
    const Problem p = load(job);
    const auto ds = deltas(job);
    detail::require(ds.size() == 1, "transform takes a single --delta");
    const double d = ds.front();
    const FlowSolution sol = solve_flow(p.seed, p.freq);
    const CanonicalTransform t = normalizing_transform(sol, d, steps_for(job, p, d));
    const int M = p.seed.max_degree();
    const TruncatedSeries h2 = quadratic_hamiltonian(p.freq, M);
    const TruncatedSeries lhs = compose(h2 + sol.h_value_at(d), t, M - 1);
    const TruncatedSeries rhs = (h2 + p.seed).with_degrees(0, M - 1);
    Json out = io::to_json(t);
    out["substitution_residual"] = max_abs_difference(lhs, rhs);
    out["symplectic_defect"] = symplectic_defect(t, M - 2);
    emit(job, dump(out));
}

void run_asymptotic(const JobSpec &job)
{
    const Problem p = load(job);
    const GradedHamiltonian g = grade(p.seed);
    Json out = Json::array();
    for (double d : deltas(job)) {
        const GradedHamiltonian r =
            job.mode == "exact" ? asymptotic_flow_explicit(g, p.freq, d) : asymptotic_flow_ode(g, p.freq, d, steps_for(job, p, d));
        out.push_back({{"delta", d}, {"graded", io::to_json(r)}});
    }
    emit(job, dump({{"mode", job.mode}, {"samples", out}}));
}

void run_three_system(const JobSpec &job)
{
    const Problem p = load(job);
    const GradedHamiltonian g = grade(p.seed);
    const int n = g.dof();
    IntVector q;
    for (const auto &[c, nc] : g.components()) {
        if (!is_zero(c)) {
            if (q.empty() || p.freq.sigma(c) > 0) {
                q = p.freq.positive_representative(c);
            }
        }
    }
    detail::require(!q.empty(), "three-system: input needs a component q != 0");
    for (const auto &[c, nc] : g.components()) {
        detail::require(is_zero(c) || c == q || c == -q, "three-system: input must live on the components q, -q, 0");
    }
    const NormalSeries nq = g.component(q);
    const NormalSeries nmq = g.component(-q);
    const NormalSeries n0 = g.component(IntVector(n, 0));
    Json out = Json::array();
    for (double d : deltas(job)) {
        const ThreeSystemState s = three_system_integrate(nq, nmq, n0, q, p.freq, d, steps_for(job, p, d));
        out.push_back({{"delta", d},
                       {"q", q},
                       {"N_q", io::to_json(s.nq)},
                       {"N_minus_q", io::to_json(s.nmq)},
                       {"N_0", io::to_json(s.n0)}});
    }
    emit(job, dump({{"samples", out}}));
}

void run_radius(const JobSpec &job)
{
    const Problem p = load(job);
    detail::require(job.rho > 0.0, "--rho must be positive");
    const auto gm = geometric_majorant(p.seed, job.rho);
    detail::require(gm.has_value(), "radius: the input series is zero");
    const int n = p.seed.dof();
    // f' << (3/2) a rho^{s-2} zeta^2 / (rho/2 - zeta) for the geometric majorant of the seed.
    const double a = 1.5 * gm->a * std::pow(job.rho, gm->s - 2);
    const double b = job.rho / 2.0;
    const FlowSolution sol = solve_flow(p.seed, p.freq);
    std::vector<io::RadiusSample> rows;
    for (double d : deltas(job)) {
        const double r = burgers_radius(a, b, n, d) / (2.0 * n);
        rows.push_back({d, r, polydisk_norm_upper(sol.h_value_at(d), r)});
    }
    if (job.format == "csv") {
        emit(job, io::radius_csv(rows));
        return;
    }
    Json out = Json::array();
    for (const auto &r : rows) {
        out.push_back({{"delta", r.delta}, {"radius", r.radius}, {"norm", r.norm}});
    }
    emit(job, dump({{"a", a}, {"b", b}, {"samples", out}}));
}

/// Returns false when any check fails.
bool run_check(const JobSpec &job)
{
    const Problem p = load(job);
    const auto ds = deltas(job);
    const FlowSolution sol = solve_flow(p.seed, p.freq);
    std::vector<std::pair<std::string, bool>> report;

    bool constant = true;
    for (const auto &[k, traj] : sol.trajectories()) {
        constant = constant && traj.size() == 1 && traj.terms().begin()->first.s == 0
                   && traj.terms().begin()->first.exponent.is_zero();
    }
    if (constant) {
        report.emplace_back("fixed point: all trajectories constant", true);
    }

    const double scale = std::max(1.0, p.seed.max_abs());
    if (is_real(p.seed, 1e-14 * scale)) {
        bool real = true;
        for (double d : ds) {
            real = real && is_real(sol.h_value_at(d), 1e-11 * std::max(1.0, sol.h_value_at(d).max_abs()));
        }
        report.emplace_back("reality preserved", real);
    }
    for (auto sign : {InvolutionSign::plus, InvolutionSign::minus}) {
        const char *name = sign == InvolutionSign::plus ? "I+" : "I-";
        if (max_abs_difference(involution(p.seed, sign), p.seed) <= 1e-14 * scale) {
            bool inv = true;
            for (double d : ds) {
                const TruncatedSeries h = sol.h_value_at(d);
                inv = inv && max_abs_difference(involution(h, sign), h) <= 1e-11 * std::max(1.0, h.max_abs());
            }
            report.emplace_back(std::string(name) + "-reversibility preserved", inv);
        }
    }
    bool one_sided = true;
    for (const auto &[k, c] : p.seed.terms()) {
        one_sided = one_sided && p.freq.sigma(k.prime()) >= 0;
    }
    if (one_sided) {
        report.emplace_back("strip S[0,+inf) invariant", check_strip_invariance(sol, 0.0, INFINITY));
    }

    double worst = 0.0;
    Rk4Oracle rk(p.seed, p.freq);
    double t = 0.0;
    std::vector<double> sorted = ds;
    std::sort(sorted.begin(), sorted.end());
    for (double d : sorted) {
        if (d > t) {
            rk.advance(d - t, steps_for(job, p, d - t));
            t = d;
        }
        const TruncatedSeries exact = sol.h_value_at(d);
        worst = std::max(worst, max_abs_difference(exact, rk.state()) / std::max(1e-300, exact.max_abs()));
    }
    std::ostringstream agree;
    agree << "exact and rk4 agree (relative difference " << std::setprecision(3) << worst << ")";
    report.emplace_back(agree.str(), worst <= 1e-6);

    const double nf_diff = max_abs_difference(normal_form(sol), birkhoff_normalize(p.seed, p.freq).normal);
    std::ostringstream nf;
    nf << "normal form matches Birkhoff normalization (difference " << std::setprecision(3) << nf_diff << ")";
    report.emplace_back(nf.str(), nf_diff <= 1e-9 * std::max(1.0, normal_form(sol).max_abs()));

    if (job.format == "json") {
        Json out = Json::array();
        for (const auto &[msg, ok] : report) {
            out.push_back({{"check", msg}, {"passed", ok}});
        }
        emit(job, dump({{"checks", out}}));
    } else {
        std::ostringstream os;
        for (const auto &[msg, ok] : report) {
            os << (ok ? "ok    " : "FAIL  ") << msg << "\n";
        }
        emit(job, os.str());
    }
    return std::all_of(report.begin(), report.end(), [](const auto &r) { return r.second; });
}

void validate(const JobSpec &job)
{
    if (job.mode != "exact" && job.mode != "rk4") {
        throw PreconditionError("--mode must be exact or rk4");
    }
    if (job.format != "json" && job.format != "csv" && !(job.command == "check" && job.format == "text")) {
        throw PreconditionError("--format must be json or csv");
    }
    if (job.degree && *job.degree < 3) {
        throw PreconditionError("--degree must be at least 3");
    }
    if (job.steps < 0) {
        throw PreconditionError("--steps must be positive");
    }
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Normalization flow for Hamiltonians near a nonresonant elliptic fixed point"};
    app.require_subcommand(1);
    JobSpec job;

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"flow", "Coefficients H(delta) of the flow (exact or rk4)"},
        {"normal-form", "Limit of the flow (exact) or Birkhoff normalization (rk4 selects the oracle)"},
        {"transform", "Normalizing canonical transformation at a single delta"},
        {"asymptotic", "Asymptotic flow of the graded Hamiltonian (exact formula or rk4)"},
        {"three-system", "Integrate the system on components q, -q, 0"},
        {"radius", "Analyticity radius estimate versus delta"},
        {"check", "Invariant checks on the input"},
    };
    for (const auto &[name, help] : commands) {
        CLI::App *sub = app.add_subcommand(name, help);
        sub->add_option("--input", job.input, "Series JSON with omega")->required()->check(CLI::ExistingFile);
        sub->add_option("--output", job.output, "Output path (default stdout)");
        sub->add_option("--degree", job.degree, "Truncation degree M (default: from input)");
        sub->add_option("--delta", job.delta, "Comma-separated delta values")->capture_default_str();
        sub->add_option("--steps", job.steps, "RK4 steps (default from the stiffest rate)");
        sub->add_option("--mode", job.mode, "exact or rk4")->capture_default_str();
        sub->add_option("--format", job.format, "json or csv (check also accepts text)")->capture_default_str();
        sub->add_option("--omega", job.omega, "Comma-separated frequency override");
        sub->add_option("--tolerance", job.tolerance, "Resonance tolerance override");
        sub->add_option("--rho", job.rho, "Polydisk radius for the radius command")->capture_default_str();
        sub->callback([&job, name = name] { job.command = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (job.command == "check" && job.format == "json" && argc > 0) {
            bool explicit_format = false;
            for (int i = 1; i < argc; ++i) {
                explicit_format = explicit_format || std::string(argv[i]).rfind("--format", 0) == 0;
            }
            if (!explicit_format) {
                job.format = "text";
            }
        }
        validate(job);
        if (job.command == "flow") {
            run_flow(job);
        } else if (job.command == "normal-form") {
            run_normal_form(job);
        } else if (job.command == "transform") {
            run_transform(job);
        } else if (job.command == "asymptotic") {
            run_asymptotic(job);
        } else if (job.command == "three-system") {
            run_three_system(job);
        } else if (job.command == "radius") {
            run_radius(job);
        } else if (!run_check(job)) {
            return 3;
        }
    } catch (const ParseError &e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 1;
    } catch (const PreconditionError &e) {
        std::cerr << "precondition violated: " << e.what() << "\n";
        return 2;
    } catch (const std::exception &e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}

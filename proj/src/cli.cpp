#include "isoyamabe/cli.hpp"

#include "isoyamabe/conformal.hpp"
#include "isoyamabe/errors.hpp"
#include "isoyamabe/solver.hpp"
#include "isoyamabe/spectral.hpp"
#include "isoyamabe/system_file.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

namespace isoyamabe::cli {

namespace {

using nlohmann::json;

std::string num(double x) {
    if (std::isnan(x)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.15g", x);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + '"';
}

json jnum(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

struct Sweep {
    double lo = 0, hi = 0;
    int count = 0;

    std::vector<double> values() const {
        std::vector<double> v(count);
        for (int i = 0; i < count; ++i) v[i] = count == 1 ? lo : lo + (hi - lo) * i / (count - 1);
        return v;
    }
};

Sweep parse_sweep(const std::string& s) {
    const auto c1 = s.find(':');
    const auto c2 = c1 == std::string::npos ? c1 : s.find(':', c1 + 1);
    if (c2 == std::string::npos) throw PreconditionFailed("sweep must look like lo:hi:count, got '" + s + "'");
    Sweep sw;
    try {
        std::size_t used = 0;
        sw.lo = std::stod(s.substr(0, c1), &used);
        sw.hi = std::stod(s.substr(c1 + 1, c2 - c1 - 1), &used);
        sw.count = std::stoi(s.substr(c2 + 1), &used);
    } catch (const std::exception&) {
        throw PreconditionFailed("sweep must look like lo:hi:count, got '" + s + "'");
    }
    if (sw.count < 1) throw PreconditionFailed("sweep count must be >= 1");
    return sw;
}

int default_grid() {
    const char* env = std::getenv("ISOYAMABE_DEFAULT_GRID");
    if (!env || !*env) return kDefaultGrid;
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v <= 0 || v > 100000000) {
        throw PreconditionFailed(std::string("ISOYAMABE_DEFAULT_GRID is not a positive integer: '") + env + "'");
    }
    return static_cast<int>(v);
}

struct Common {
    std::string system;
    int grid = std::numeric_limits<int>::min();  // unset
    double tol = 1e-10;
    std::string format = "csv";
    std::string sweep;

    int resolved_grid() const {
        const int N = grid == std::numeric_limits<int>::min() ? default_grid() : grid;
        if (N < kMinGrid) throw PreconditionFailed("grid below minimum " + std::to_string(kMinGrid));
        return N;
    }
    void check_tol() const {
        if (!(tol > 0.0 && tol < 1.0)) throw PreconditionFailed("tolerance must lie in (0, 1)");
    }
};

void add_format(CLI::App* cmd, Common& c) {
    cmd->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
}

void add_system(CLI::App* cmd, Common& c) {
    cmd->add_option("--system", c.system,
                    "Catalog name, product:<base>+s<v>,v<v>,d<n>, round-product:<base>,m<m>,tau<v>, or a file; "
                    "'{t}' is replaced by the sweep value")
        ->required();
    cmd->add_option("--grid", c.grid, "Cell count N (default 2000 or ISOYAMABE_DEFAULT_GRID)");
}

std::string substitute(const std::string& sys_arg, double t) {
    const auto pos = sys_arg.find("{t}");
    if (pos == std::string::npos) {
        throw PreconditionFailed("sweeping needs a '{t}' placeholder in --system");
    }
    return sys_arg.substr(0, pos) + num(t) + sys_arg.substr(pos + 3);
}

DiscreteOperator build_operator(const std::string& sys_arg, int N) {
    return assemble(to_arclength(resolve_system(sys_arg)), N);
}

int code_of(const Error& e) { return e.error_class() == ErrorClass::Config ? kExitConfig : kExitNumerical; }

/// Runs `work(i)` for every sweep point on a small thread pool; results are
/// stored by index so output order never depends on completion order.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& work) {
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t workers = std::min<std::size_t>(hw, count);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_lock;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            try {
                for (std::size_t i; (i = next.fetch_add(1)) < count;) work(i);
            } catch (...) {
                std::lock_guard<std::mutex> g(failure_lock);
                if (!failure) failure = std::current_exception();
                next = count;
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

struct PointError {
    std::string kind;
    std::string message;
    int code = 0;
};

// catalog ---------------------------------------------------------------------

int cmd_catalog(const Common& c, std::ostream& out) {
    json arr = json::array();
    if (c.format == "csv") out << "name,dim,kf,proper,t_min,t_max\n";
    for (const std::string& name : catalog_names()) {
        const IsoparametricSystem sys = resolve_system(name);
        const bool proper = validate(sys).proper;
        if (c.format == "csv") {
            out << name << ',' << sys.dims.n << ',' << sys.kf << ',' << (proper ? "true" : "false") << ','
                << num(sys.t_min) << ',' << num(sys.t_max) << '\n';
        } else {
            arr.push_back({{"name", name},
                           {"dim", sys.dims.n},
                           {"kf", sys.kf},
                           {"proper", proper},
                           {"interval", {sys.t_min, sys.t_max}}});
        }
    }
    if (c.format == "json") out << arr.dump(2) << '\n';
    return kExitOk;
}

// validate --------------------------------------------------------------------

int cmd_validate(const Common& c, std::ostream& out) {
    const IsoparametricSystem sys = resolve_system(c.system);
    const ValidationReport rep = validate(sys);
    if (c.format == "csv") {
        out << "check,passed,detail\n";
        for (const auto& chk : rep.checks) {
            out << chk.name << ',' << (chk.passed ? "true" : "false") << ',' << csv_field(chk.detail) << '\n';
        }
    } else {
        json checks = json::array();
        for (const auto& chk : rep.checks) {
            checks.push_back({{"name", chk.name}, {"passed", chk.passed}, {"detail", chk.detail}});
        }
        out << json{{"system", sys.name},
                    {"ok", rep.ok()},
                    {"proper", rep.proper},
                    {"identity_residual", jnum(rep.identity_residual)},
                    {"checks", checks}}
                   .dump(2)
            << '\n';
    }
    return rep.ok() ? kExitOk : kExitConfig;
}

// spectrum --------------------------------------------------------------------

int cmd_spectrum(const Common& c, int k, std::ostream& out) {
    if (k < 1) throw PreconditionFailed("--k must be >= 1");
    const DiscreteOperator op = build_operator(c.system, c.resolved_grid());
    const SpectralResult sp = eigs(op, k);
    const double vol_factor = std::pow(operator_volume(op), 2.0 / op.dims.n);
    if (c.format == "csv") {
        out << "index,eigenvalue,yamabe_k_value\n";
        for (std::size_t i = 0; i < sp.size(); ++i) {
            out << i + 1 << ',' << num(sp.eigenvalues[i]) << ',' << num(sp.eigenvalues[i] * vol_factor) << '\n';
        }
    } else {
        json ev = json::array(), yk = json::array(), cl = json::array();
        for (std::size_t i = 0; i < sp.size(); ++i) {
            ev.push_back(sp.eigenvalues[i]);
            yk.push_back(sp.eigenvalues[i] * vol_factor);
            cl.push_back(static_cast<bool>(sp.clustered[i]));
        }
        out << json{{"system", c.system},
                    {"grid", op.size()},
                    {"eigenvalues", ev},
                    {"yamabe_k_values", yk},
                    {"clustered", cl}}
                   .dump(2)
            << '\n';
    }
    return kExitOk;
}

// nodal -----------------------------------------------------------------------

json profile_json(const DiscreteOperator& op, const std::vector<double>& u) {
    return {{"r", op.grid.nodes}, {"t", op.t_nodes}, {"u", u}};
}

void profile_csv(const DiscreteOperator& op, const std::vector<double>& u, std::ostream& out) {
    out << "r,t,u\n";
    for (std::size_t j = 0; j < u.size(); ++j) {
        out << num(op.grid.nodes[j]) << ',' << num(op.t_nodes[j]) << ',' << num(u[j]) << '\n';
    }
}

std::string join_levels(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + num(v[i]);
    return s;
}

int cmd_nodal(const Common& c, double theta, int max_iterations, std::ostream& out, std::ostream& err) {
    c.check_tol();
    if (max_iterations < 1) throw PreconditionFailed("--max-iterations must be >= 1");
    MinimizeOptions opts;
    opts.theta = theta;
    opts.max_iterations = max_iterations;
    const int N = c.resolved_grid();

    if (c.sweep.empty()) {
        const DiscreteOperator op = build_operator(c.system, N);
        SecondYamabeResult res;
        try {
            res = minimize_second_yamabe(op, c.tol, opts);
        } catch (const NoConvergence& e) {
            err << e.what() << "\nlast iterate follows on standard output\n";
            if (!e.last_iterate().empty() && e.last_iterate().size() == op.size()) {
                if (c.format == "csv") {
                    profile_csv(op, e.last_iterate(), out);
                } else {
                    out << json{{"system", c.system}, {"error", e.what()}, {"last_iterate", profile_json(op, e.last_iterate())}}
                               .dump(2)
                        << '\n';
                }
            }
            return kExitNumerical;
        }
        const Solution& s = res.sol;
        if (c.format == "csv") {
            out << "# system=" << c.system << "\n# Y2f=" << num(res.Y2f) << "\n# c=" << num(s.c)
                << "\n# residual=" << num(s.residual) << "\n# sign_changes=" << s.nodal.sign_changes
                << "\n# nodal_levels=" << join_levels(s.nodal.nodal_levels) << "\n# iterations=" << s.iterations
                << "\n# endpoints_nonzero=" << (s.nodal.endpoints_nonzero ? "true" : "false") << '\n';
            profile_csv(op, s.u, out);
        } else {
            out << json{{"system", c.system},
                        {"grid", op.size()},
                        {"Y2f", res.Y2f},
                        {"c", s.c},
                        {"residual", s.residual},
                        {"sign_changes", s.nodal.sign_changes},
                        {"nodal_levels", s.nodal.nodal_levels},
                        {"endpoint_values", {s.nodal.endpoint_values.first, s.nodal.endpoint_values.second}},
                        {"endpoints_nonzero", s.nodal.endpoints_nonzero},
                        {"iterations", s.iterations},
                        {"seed", res.seed_used},
                        {"history", res.history},
                        {"profile", profile_json(op, s.u)}}
                       .dump(2)
                << '\n';
        }
        return kExitOk;
    }

    const std::vector<double> ts = parse_sweep(c.sweep).values();
    std::vector<SecondYamabeResult> results(ts.size());
    std::vector<PointError> errors(ts.size());
    const std::string sys_arg = c.system;
    substitute(sys_arg, 0.0);
    parallel_for(ts.size(), [&](std::size_t i) {
        try {
            results[i] = minimize_second_yamabe(build_operator(substitute(sys_arg, ts[i]), N), c.tol, opts);
        } catch (const Error& e) {
            errors[i] = {e.kind(), e.what(), code_of(e)};
        }
    });
    return [&] {
        int code = kExitOk;
        json arr = json::array();
        if (c.format == "csv") out << "t,Y2f,c,residual,sign_changes,nodal_levels,iterations,status\n";
        for (std::size_t i = 0; i < ts.size(); ++i) {
            const bool ok = errors[i].code == 0;
            if (!ok && code == kExitOk) code = errors[i].code;
            const Solution& s = results[i].sol;
            if (c.format == "csv") {
                if (ok) {
                    out << num(ts[i]) << ',' << num(results[i].Y2f) << ',' << num(s.c) << ',' << num(s.residual) << ','
                        << s.nodal.sign_changes << ',' << join_levels(s.nodal.nodal_levels) << ',' << s.iterations
                        << ",ok\n";
                } else {
                    out << num(ts[i]) << ",nan,nan,nan,,,," << errors[i].kind << '\n';
                }
            } else if (ok) {
                arr.push_back({{"t", ts[i]},
                               {"Y2f", results[i].Y2f},
                               {"c", s.c},
                               {"residual", s.residual},
                               {"sign_changes", s.nodal.sign_changes},
                               {"nodal_levels", s.nodal.nodal_levels},
                               {"iterations", s.iterations},
                               {"status", "ok"}});
            } else {
                arr.push_back({{"t", ts[i]}, {"status", errors[i].kind}, {"error", errors[i].message}});
            }
            if (!ok) err << "t = " << num(ts[i]) << ": " << errors[i].message << '\n';
        }
        if (c.format == "json") out << arr.dump(2) << '\n';
        return code;
    }();
}

// csc -------------------------------------------------------------------------

struct CscRun {
    Solution sol;
    double J_constant = 0.0;
    bool constant = false;
};

CscRun run_csc(const DiscreteOperator& op, double exponent, double tol) {
    CscRun r;
    const double q = std::isnan(exponent) ? op.dims.p_n : exponent;
    r.sol = solve_subcritical(op, q, tol);
    r.J_constant = yamabe_functional(op, std::vector<double>(op.size(), 1.0), q);
    const auto [lo, hi] = std::minmax_element(r.sol.u.begin(), r.sol.u.end());
    r.constant = (*hi - *lo) <= 1e-8 * *hi;
    return r;
}

const char* kCscHeader = "exponent,c,functional_value,J_constant,constant,residual,iterations,u_min,u_max";

void csc_row(const CscRun& r, std::ostream& out) {
    const auto [lo, hi] = std::minmax_element(r.sol.u.begin(), r.sol.u.end());
    out << num(r.sol.exponent) << ',' << num(r.sol.c) << ',' << num(r.sol.functional_value) << ','
        << num(r.J_constant) << ',' << (r.constant ? "true" : "false") << ',' << num(r.sol.residual) << ','
        << r.sol.iterations << ',' << num(*lo) << ',' << num(*hi);
}

json csc_json(const CscRun& r) {
    const auto [lo, hi] = std::minmax_element(r.sol.u.begin(), r.sol.u.end());
    return {{"exponent", r.sol.exponent},   {"c", r.sol.c},
            {"functional_value", r.sol.functional_value},
            {"J_constant", r.J_constant},  {"constant", r.constant},
            {"residual", r.sol.residual},  {"iterations", r.sol.iterations},
            {"u_min", *lo},                {"u_max", *hi}};
}

int cmd_csc(const Common& c, double exponent, bool with_profile, std::ostream& out, std::ostream& err) {
    c.check_tol();
    const int N = c.resolved_grid();
    if (c.sweep.empty()) {
        const DiscreteOperator op = build_operator(c.system, N);
        const CscRun r = run_csc(op, exponent, c.tol);
        if (c.format == "csv") {
            out << "system," << kCscHeader << '\n' << csv_field(c.system) << ',';
            csc_row(r, out);
            out << '\n';
            if (with_profile) {
                out << '\n';
                profile_csv(op, r.sol.u, out);
            }
        } else {
            json j = csc_json(r);
            j["system"] = c.system;
            j["profile"] = profile_json(op, r.sol.u);
            out << j.dump(2) << '\n';
        }
        return kExitOk;
    }

    const std::vector<double> ts = parse_sweep(c.sweep).values();
    std::vector<CscRun> runs(ts.size());
    std::vector<PointError> errors(ts.size());
    const std::string sys_arg = c.system;
    substitute(sys_arg, 0.0);
    parallel_for(ts.size(), [&](std::size_t i) {
        try {
            runs[i] = run_csc(build_operator(substitute(sys_arg, ts[i]), N), exponent, c.tol);
        } catch (const Error& e) {
            errors[i] = {e.kind(), e.what(), code_of(e)};
        }
    });
    int code = kExitOk;
    json arr = json::array();
    if (c.format == "csv") out << "t," << kCscHeader << ",status\n";
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const bool ok = errors[i].code == 0;
        if (!ok && code == kExitOk) code = errors[i].code;
        if (c.format == "csv") {
            out << num(ts[i]) << ',';
            if (ok) {
                csc_row(runs[i], out);
                out << ",ok\n";
            } else {
                out << "nan,nan,nan,nan,,nan,,nan,nan," << errors[i].kind << '\n';
            }
        } else {
            json j = ok ? csc_json(runs[i]) : json{{"error", errors[i].message}};
            j["t"] = ts[i];
            j["status"] = ok ? std::string("ok") : errors[i].kind;
            arr.push_back(j);
        }
        if (!ok) err << "t = " << num(ts[i]) << ": " << errors[i].message << '\n';
    }
    if (c.format == "json") out << arr.dump(2) << '\n';
    return code;
}

// count -----------------------------------------------------------------------

int cmd_count(const Common& c, int n, int m, double t, bool thresholds, std::ostream& out) {
    if (n % 2 != 0) throw UnsupportedDimension("--n must be even (the sphere factor is S^n with n = 2s)");
    const int s_half = n / 2;
    std::vector<double> ts;
    if (!c.sweep.empty()) {
        ts = parse_sweep(c.sweep).values();
    } else if (!std::isnan(t)) {
        ts = {t};
    } else {
        throw PreconditionFailed("count needs --t or --sweep");
    }
    std::vector<CscCount> rows(ts.size());
    parallel_for(ts.size(), [&](std::size_t i) { rows[i] = csc_count_lower_bound(s_half, m, ts[i]); });
    const std::vector<double> th = csc_count_lower_bound(s_half, m, ts.front()).thresholds;
    if (c.format == "csv") {
        if (thresholds) {
            out << "index,threshold\n";
            for (std::size_t i = 0; i < th.size(); ++i) out << i + 1 << ',' << num(th[i]) << '\n';
        } else {
            out << "t,l,i,count\n";
            for (std::size_t k = 0; k < ts.size(); ++k) {
                out << num(ts[k]) << ',' << num(rows[k].l) << ',' << rows[k].i << ',' << rows[k].count << '\n';
            }
        }
    } else {
        json arr = json::array();
        for (std::size_t k = 0; k < ts.size(); ++k) {
            arr.push_back({{"t", ts[k]}, {"l", rows[k].l}, {"i", rows[k].i}, {"count", rows[k].count}});
        }
        out << json{{"n", n}, {"m", m}, {"rows", arr}, {"thresholds", th}}.dump(2) << '\n';
    }
    return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Isoparametric Yamabe laboratory: restricted spectra, positive and nodal solutions"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    Common c;
    int k = 4;
    double theta = 0.5;
    int max_iterations = kNodalIterationCap;
    double exponent = std::nan("");
    bool with_profile = false;
    int count_n = 0, count_m = 0;
    double count_t = std::nan("");
    bool count_thresholds = false;

    CLI::App* catalog = app.add_subcommand("catalog", "List the built-in systems");
    add_format(catalog, c);

    CLI::App* val = app.add_subcommand("validate", "Check a system's consistency (signs, focal data, identity)");
    val->add_option("--system", c.system, "System name or file")->required();
    add_format(val, c);

    CLI::App* spectrum = app.add_subcommand("spectrum", "Lowest restricted eigenvalues of the conformal Laplacian");
    add_system(spectrum, c);
    spectrum->add_option("--k", k, "Number of eigenvalues");
    add_format(spectrum, c);

    CLI::App* nodal = app.add_subcommand("nodal", "Sign-changing solution from the second invariant");
    add_system(nodal, c);
    nodal->add_option("--tol", c.tol, "Iteration tolerance");
    nodal->add_option("--theta", theta, "Damping of the fixed-point update");
    nodal->add_option("--max-iterations", max_iterations, "Iteration cap (per seed)");
    nodal->add_option("--sweep", c.sweep, "lo:hi:count values substituted for {t} in --system");
    add_format(nodal, c);

    CLI::App* csc = app.add_subcommand("csc", "Positive solution (constant scalar curvature factor)");
    add_system(csc, c);
    csc->add_option("--tol", c.tol, "Iteration tolerance");
    csc->add_option("--exponent", exponent, "Exponent q (default: critical exponent of the dimension)");
    csc->add_flag("--profile", with_profile, "Append the (r, t, u) profile to CSV output");
    csc->add_option("--sweep", c.sweep, "lo:hi:count values substituted for {t} in --system");
    add_format(csc, c);

    CLI::App* count = app.add_subcommand("count", "Multiplicity lower bound on S^m(t) x S^n");
    count->add_option("--n", count_n, "Even dimension of the sphere factor")->required();
    count->add_option("--m", count_m, "Dimension of the scaled sphere")->required();
    count->add_option("--t", count_t, "Scale parameter");
    count->add_option("--sweep", c.sweep, "lo:hi:count");
    count->add_flag("--thresholds", count_thresholds, "Print the threshold list instead (CSV)");
    add_format(count, c);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e, out, err);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*catalog) return cmd_catalog(c, out);
        if (*val) return cmd_validate(c, out);
        if (*spectrum) return cmd_spectrum(c, k, out);
        if (*nodal) return cmd_nodal(c, theta, max_iterations, out, err);
        if (*csc) return cmd_csc(c, exponent, with_profile, out, err);
        if (*count) return cmd_count(c, count_n, count_m, count_t, count_thresholds, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return code_of(e);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    }
    return kExitConfig;
}

}  // namespace isoyamabe::cli

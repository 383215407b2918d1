#include "bjj/cli.hpp"

#include "bjj/floquet.hpp"
#include "bjj/husimi.hpp"
#include "bjj/parallel.hpp"
#include "bjj/symmetry_suite.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <regex>
#include <set>
#include <sstream>
#include <variant>

namespace bjj::cli {

namespace {

namespace fs = std::filesystem;

constexpr double kPi = 0.5 * kTwoPi;

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_plain(const std::string& s, const std::string& what) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw ConfigError("not a number: '" + s + "'" + what);
    }
    if (pos != s.size() || !std::isfinite(v)) throw ConfigError("not a finite number: '" + s + "'" + what);
    return v;
}

long parse_long(const std::string& s, const std::string& key) {
    const std::string t = trim(s);
    std::size_t pos = 0;
    long v = 0;
    try {
        v = std::stol(t, &pos);
    } catch (const std::exception&) {
        throw ConfigError(key + ": not an integer: '" + s + "'");
    }
    if (pos != t.size()) throw ConfigError(key + ": not an integer: '" + s + "'");
    return v;
}

bool parse_bool(const std::string& s, const std::string& key) {
    const std::string t = trim(s);
    if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
    if (t == "false" || t == "0" || t == "no" || t == "off") return false;
    throw ConfigError(key + ": not a boolean: '" + s + "'");
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys{
        "model.N",          "model.Lambda",          "model.U",
        "drive.E1",         "drive.E2",              "drive.omega",
        "drive.phi",        "drive.phi_grid",        "init.theta",
        "init.varphi",      "classical.Z",           "classical.phi",
        "classical.tau",    "classical.tau_prime",   "classical.samples_per_period",
        "classical.rel_tol", "classical.abs_tol",    "classical.mode",
        "classical.periods", "propagator.steps_per_period", "propagator.scheme",
        "propagator.tolerance", "window.burn_in_periods", "window.span_periods",
        "window.samples_per_period", "floquet.samples_per_period", "evolve.horizon",
        "evolve.samples_per_period", "grid.nZ",      "grid.nphi",
        "sweep.classical",  "check.names",           "check.phi_grid",
    };
    return keys;
}

// ---- output -------------------------------------------------------------

using Cell = std::variant<double, long, std::string>;

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.11e", v);
    return buf;
}

std::string csv_cell(const Cell& c) {
    if (const auto* d = std::get_if<double>(&c)) return format_double(*d);
    if (const auto* l = std::get_if<long>(&c)) return std::to_string(*l);
    return std::get<std::string>(c);
}

nlohmann::json json_number(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

nlohmann::json json_cell(const Cell& c) {
    if (const auto* d = std::get_if<double>(&c)) return json_number(*d);
    if (const auto* l = std::get_if<long>(&c)) return *l;
    return std::get<std::string>(c);
}

class Output {
public:
    Output(std::string command, fs::path dir, std::string format, nlohmann::json echo)
        : dir_(std::move(dir)), format_(std::move(format)), start_(std::chrono::steady_clock::now()) {
        summary_["command"] = std::move(command);
        summary_["config_echo"] = std::move(echo);
        summary_["results"] = nlohmann::json::object();
        summary_["residuals"] = nlohmann::json::object();
    }

    nlohmann::json& results() { return summary_["results"]; }
    nlohmann::json& residuals() { return summary_["residuals"]; }

    void write(const Table& t) {
        fs::create_directories(dir_);
        if (format_ == "json") {
            nlohmann::json rows = nlohmann::json::array();
            for (const auto& r : t.rows) {
                nlohmann::json row = nlohmann::json::object();
                for (std::size_t c = 0; c < t.columns.size(); ++c) row[t.columns[c]] = json_cell(r[c]);
                rows.push_back(std::move(row));
            }
            results()["tables"][t.name] = std::move(rows);
            return;
        }
        std::ofstream f(dir_ / (t.name + ".csv"));
        for (std::size_t c = 0; c < t.columns.size(); ++c) f << (c ? "," : "") << t.columns[c];
        f << '\n';
        for (const auto& r : t.rows) {
            for (std::size_t c = 0; c < r.size(); ++c) f << (c ? "," : "") << csv_cell(r[c]);
            f << '\n';
        }
        if (!f) throw std::runtime_error("failed writing " + (dir_ / (t.name + ".csv")).string());
    }

    void write_json(const std::string& name, const nlohmann::json& j) {
        fs::create_directories(dir_);
        std::ofstream f(dir_ / name);
        f << j.dump(2) << '\n';
    }

    void finish() {
        const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start_;
        summary_["wall_time_seconds"] = dt.count();
        write_json("summary.json", summary_);
    }

private:
    fs::path dir_;
    std::string format_;
    std::chrono::steady_clock::time_point start_;
    nlohmann::json summary_;
};

struct Context {
    RunConfig cfg;
    fs::path out;
    std::string format;
    int threads;
    std::ostream& log;
};

QuantumState initial_state(const RunConfig& c) { return acs_state(c.initial, c.N); }

ClassicalState classical_init(const RunConfig& c) { return ClassicalState::from_pendulum(c.classical_Z, c.classical_phi); }

// ---- commands -----------------------------------------------------------

int cmd_spectrum(const Context& ctx) {
    const auto& c = ctx.cfg;
    const Propagator prop(c.model(), c.drive, c.propagator);
    const CMatrix U = prop.period_maps(1).monodromy();
    FloquetDecomposition d = floquet_spectrum(U, c.drive.omega());
    if (d.degenerate_flag) {
        ctx.log << "spectrum: quasi-energies are degenerate below " << kDegeneracyThreshold
                << "; weights are not unique, refusing\n";
        return kDegenerate;
    }
    compute_mode_apis(d, prop, c.mode_samples_per_period);
    const QuantumState s0 = initial_state(c);
    const RVector w = mode_weights(s0, d).weights;

    Output out("spectrum", ctx.out, ctx.format, c.echo());
    Table t{"spectrum", {"alpha", "quasi_energy", "mode_api", "weight"}, {}};
    for (Eigen::Index a = 0; a < d.size(); ++a) t.rows.push_back({long(a), d.quasi_energies[a], d.mode_apis[a], w[a]});
    out.write(t);
    const Eigen::Index n = U.rows();
    const CMatrix lamV = d.modes0 * d.eigenvalues.asDiagonal();
    out.results()["api_floquet"] = w.dot(d.mode_apis);
    out.results()["max_abs_mode_api"] = d.mode_apis.cwiseAbs().maxCoeff();
    out.residuals()["unitarity"] = (U.adjoint() * U - CMatrix::Identity(n, n)).cwiseAbs().maxCoeff();
    out.residuals()["eigen"] = (U * d.modes0 - lamV).cwiseAbs().maxCoeff();
    out.residuals()["weight_sum"] = std::abs(w.sum() - 1.0);
    out.finish();
    return kOk;
}

int cmd_api_sweep(const Context& ctx) {
    const auto& c = ctx.cfg;
    if (!c.phi_grid) throw ConfigError("api-sweep: drive.phi_grid is required");
    const auto& grid = *c.phi_grid;
    const ModelParams m = c.model();
    const QuantumState s0 = initial_state(c);
    const AveragingWindow cw = c.classical_window();

    struct Row {
        double quantum{std::nan("")};
        double classical{std::nan("")};
        std::string status{"ok"};
    };
    std::vector<Row> rows(grid.size());
    parallel_for(grid.size(), ctx.threads, [&](std::size_t i) {
        const DriveParams p = c.drive.with_phi(grid[i]);
        Row& r = rows[i];
        try {
            const auto d = floquet_decompose_symmetric(m, p, c.propagator, c.mode_samples_per_period);
            r.quantum = api_floquet_clustered(s0, d);
        } catch (const DegenerateSpectrumError&) {
            r.status = "degenerate";
        }
        if (c.sweep_classical) {
            try {
                r.classical = classical_api(classical_init(c), cw, c.Lambda, p, c.classical);
            } catch (const IntegrationError&) {
                r.status = r.status == "ok" ? "integrator-error" : r.status + "+integrator-error";
            }
        }
    });

    Output out("api-sweep", ctx.out, ctx.format, c.echo());
    Table t{"api_sweep", {"phi", "api_quantum", "api_classical", "N", "theta", "varphi", "status"}, {}};
    bool degenerate = false;
    bool integrator = false;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Row& r = rows[i];
        degenerate = degenerate || r.status.find("degenerate") != std::string::npos;
        integrator = integrator || r.status.find("integrator") != std::string::npos;
        t.rows.push_back({grid[i], r.quantum, r.classical, long(c.N), c.initial.theta, c.initial.varphi, r.status});
    }
    out.write(t);
    out.results()["rows"] = static_cast<long>(grid.size());
    out.results()["failed_rows"] = static_cast<long>(
        std::count_if(rows.begin(), rows.end(), [](const Row& r) { return r.status != "ok"; }));
    out.finish();
    if (degenerate) return kDegenerate;
    if (integrator) return kIntegratorError;
    return kOk;
}

int cmd_classical(const Context& ctx) {
    const auto& c = ctx.cfg;
    Output out("classical", ctx.out, ctx.format, c.echo());
    const ClassicalState init = classical_init(c);
    if (c.classical_mode == "psos") {
        const PSOSData d = psos(init, c.psos_periods, c.Lambda, c.drive, c.classical);
        Table t{"psos", {"k", "Z", "phi"}, {}};
        for (std::size_t k = 0; k < d.size(); ++k) t.rows.push_back({long(k + 1), d.Z[k], d.phi[k]});
        out.write(t);
        out.results()["points"] = static_cast<long>(d.size());
    } else {
        const AveragingWindow w = c.classical_window();
        PhaseHistogram h(c.pdf_grid);
        double zbar = 0.0;
        const bool want_pdf = c.classical_mode == "pdf";
        classical_window(init, w, c.Lambda, c.drive, c.classical, [&](double, const Eigen::Vector3d& s, double wt) {
            zbar += wt * s.z();
            if (want_pdf) h.add(s.z(), std::atan2(s.y(), s.x()), wt);
        });
        out.results()["Z_bar"] = zbar;
        if (want_pdf) {
            const PhasePDF pdf = phase_pdf(h);
            Table t{"pdf", {"Z", "phi", "density"}, {}};
            for (int i = 0; i < pdf.grid.nZ; ++i) {
                for (int j = 0; j < pdf.grid.nphi; ++j) {
                    t.rows.push_back({pdf.grid.Z_center(i), pdf.grid.phi_center(j), pdf.density(i, j)});
                }
            }
            out.write(t);
            out.results()["api_from_pdf"] = api_from_pdf(pdf);
            out.residuals()["normalization"] = std::abs(pdf.density.sum() * pdf.grid.bin_area() - 1.0);
        } else {
            Table t{"classical_api", {"phi", "Z_bar", "tau", "tau_prime"}, {}};
            const double T = c.drive.period();
            t.rows.push_back({c.drive.phi(), zbar, w.burn_in(T), w.span(T)});
            out.write(t);
        }
    }
    out.finish();
    return kOk;
}

int cmd_evolve(const Context& ctx) {
    const auto& c = ctx.cfg;
    const QuantumState s0 = initial_state(c);
    const auto series = observable_series(s0, c.evolve_horizon, c.model(), c.drive, c.propagator,
                                          c.evolve_samples_per_period);
    ClassicalIntegrator integ(c.Lambda, c.drive, c.classical, classical_init(c));
    Output out("evolve", ctx.out, ctx.format, c.echo());
    Table t{"evolve", {"t", "delta_rho_quantum", "Z_classical", "depletion"}, {}};
    double max_dev_early = 0.0;
    for (const auto& smp : series) {
        integ.advance_to(smp.t);
        const double z = integ.state().Z();
        if (smp.t <= 5.0) max_dev_early = std::max(max_dev_early, std::abs(z - smp.delta_rho));
        t.rows.push_back({smp.t, smp.delta_rho, z, smp.depletion});
    }
    out.write(t);
    out.results()["samples"] = static_cast<long>(series.size());
    out.results()["max_deviation_t_le_5"] = max_dev_early;
    out.residuals()["classical_norm_drift"] = integ.max_norm_drift();
    out.finish();
    return kOk;
}

int cmd_husimi(const Context& ctx) {
    const auto& c = ctx.cfg;
    const ModelParams m = c.model();
    const QuantumState s0 = initial_state(c);
    const Propagator prop(m, c.drive, c.propagator);
    const CMatrix rho = time_averaged_density(s0, c.window, prop.period_maps(c.window.samples_per_period));
    const Distribution exact = husimi_of_density(rho, c.N, SphericalGrid::for_particles(c.N));
    const Distribution binned = husimi_of_density(rho, c.N, SphericalGrid::uniform_cos(c.pdf_grid.nZ, c.pdf_grid.nphi));

    PhaseHistogram h(c.pdf_grid);
    double zbar = 0.0;
    classical_window(classical_init(c), c.classical_window(), c.Lambda, c.drive, c.classical,
                     [&](double, const Eigen::Vector3d& s, double wt) {
                         zbar += wt * s.z();
                         h.add(s.z(), std::atan2(s.y(), s.x()), wt);
                     });
    const PhasePDF pdf = phase_pdf(h);

    Output out("husimi", ctx.out, ctx.format, c.echo());
    Table tq{"tahd", {"cos_theta", "phi", "Q"}, {}};
    for (int i = 0; i < binned.grid.n_theta(); ++i) {
        for (int j = 0; j < binned.grid.n_phi(); ++j) {
            tq.rows.push_back({binned.grid.cos_theta()[i], binned.grid.phi()[j], binned.values(i, j)});
        }
    }
    out.write(tq);
    Table tc{"classical_pdf", {"Z", "phi", "density"}, {}};
    for (int i = 0; i < pdf.grid.nZ; ++i) {
        for (int j = 0; j < pdf.grid.nphi; ++j) tc.rows.push_back({pdf.grid.Z_center(i), pdf.grid.phi_center(j), pdf.density(i, j)});
    }
    out.write(tc);
    out.results()["overlap"] = overlap_coefficient(binned, pdf);
    out.results()["api_from_tahd"] = api_from_tahd(exact, c.N);
    out.results()["api_from_pdf"] = api_from_pdf(pdf);
    out.results()["classical_Z_bar"] = zbar;
    out.residuals()["tahd_normalization"] = std::abs(exact.integral() - 1.0);
    out.residuals()["tahd_binned_normalization"] = std::abs(binned.integral() - 1.0);
    out.finish();
    return kOk;
}

int cmd_check(const Context& ctx) {
    const auto& c = ctx.cfg;
    if (c.checks.empty()) throw ConfigError("check: empty check selection");
    SuiteConfig sc;
    sc.model = c.model();
    sc.drive = c.drive;
    sc.settings.propagator = c.propagator;
    sc.settings.samples_per_period = c.mode_samples_per_period;
    sc.phis = c.check_grid;
    sc.initial = c.initial;
    sc.checks = c.checks;
    sc.threads = ctx.threads;
    std::vector<CheckReport> reports;
    try {
        reports = run_suite(sc);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("check: ") + e.what());
    }

    Output out("check", ctx.out, ctx.format, c.echo());
    nlohmann::json arr = nlohmann::json::array();
    bool all = true;
    for (const auto& r : reports) {
        arr.push_back(to_json(r));
        out.residuals()[r.name] = json_number(r.residual);
        all = all && (r.status == CheckStatus::Pass || r.status == CheckStatus::Skipped);
        ctx.log << r.name << ": " << to_string(r.status) << " (residual " << format_double(r.residual) << ")\n";
    }
    out.write_json("report.json", arr);
    out.results()["reports"] = arr;
    out.results()["all_passed"] = all;
    out.finish();
    return all ? kOk : kCheckFailed;
}

}  // namespace

// ---- configuration ------------------------------------------------------

KeyValues parse_config_text(const std::string& text) {
    KeyValues kv;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": unterminated section");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        if (!section.empty()) key = section + "." + key;
        kv[key] = trim(line.substr(eq + 1));
    }
    return kv;
}

void apply_override(KeyValues& kv, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects KEY=VALUE, got '" + assignment + "'");
    const std::string key = trim(assignment.substr(0, eq));
    if (key.empty()) throw ConfigError("--set: empty key");
    kv[key] = trim(assignment.substr(eq + 1));
}

double parse_real(const std::string& raw) {
    const std::string s = trim(raw);
    if (s.empty()) throw ConfigError("empty number");
    static const std::regex pi_form(R"(^([+-]?[0-9.eE+-]*?)\s*\*?\s*pi\s*(?:/\s*([0-9.eE+-]+))?$)");
    std::smatch mt;
    if (std::regex_match(s, mt, pi_form)) {
        const std::string a = mt[1].str();
        double coef = 1.0;
        if (a == "-") coef = -1.0;
        else if (!a.empty() && a != "+") coef = parse_plain(a, " in '" + s + "'");
        double den = 1.0;
        if (mt[2].matched) den = parse_plain(mt[2].str(), " in '" + s + "'");
        if (den == 0.0) throw ConfigError("division by zero in '" + s + "'");
        return coef * kPi / den;
    }
    return parse_plain(s, "");
}

std::vector<double> parse_phi_grid(const std::string& s) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    if (parts.size() != 3) throw ConfigError("phi grid must be start:stop:count, got '" + s + "'");
    const double a = parse_real(parts[0]);
    const double b = parse_real(parts[1]);
    const long n = parse_long(parts[2], "phi grid count");
    if (n < 1) throw ConfigError("phi grid count must be >= 1");
    std::vector<double> g(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n);
    return g;
}

AveragingWindow RunConfig::classical_window() const {
    const double T = drive.period();
    AveragingWindow w;
    w.burn_in_periods = std::max<long>(0, std::lround(classical_tau / T));
    w.span_periods = std::max<long>(1, std::lround(classical_tau_prime / T));
    w.samples_per_period = classical_samples_per_period;
    return w;
}

nlohmann::json RunConfig::echo() const {
    nlohmann::json j;
    j["model"] = {{"N", N}, {"Lambda", Lambda}, {"U", Lambda / N}};
    j["drive"] = {{"E1", drive.E1()}, {"E2", drive.E2()}, {"omega", drive.omega()}, {"phi", drive.phi()}};
    if (phi_grid) j["drive"]["phi_grid"] = *phi_grid;
    j["init"] = {{"theta", initial.theta}, {"varphi", initial.varphi}};
    j["classical"] = {{"Z", classical_Z},
                      {"phi", classical_phi},
                      {"tau", classical_tau},
                      {"tau_prime", classical_tau_prime},
                      {"samples_per_period", classical_samples_per_period},
                      {"rel_tol", classical.rel_tol},
                      {"abs_tol", classical.abs_tol},
                      {"mode", classical_mode},
                      {"periods", psos_periods}};
    j["propagator"] = {{"steps_per_period", propagator.steps_per_period},
                       {"scheme", propagator.scheme == MagnusScheme::CF4 ? "cf4" : "midpoint"},
                       {"tolerance", propagator.tolerance}};
    j["window"] = {{"burn_in_periods", window.burn_in_periods},
                   {"span_periods", window.span_periods},
                   {"samples_per_period", window.samples_per_period}};
    j["floquet"] = {{"samples_per_period", mode_samples_per_period}};
    j["evolve"] = {{"horizon", evolve_horizon}, {"samples_per_period", evolve_samples_per_period}};
    j["grid"] = {{"nZ", pdf_grid.nZ}, {"nphi", pdf_grid.nphi}};
    j["sweep"] = {{"classical", sweep_classical}};
    j["check"] = {{"names", checks}, {"phi_grid", check_grid}};
    return j;
}

RunConfig RunConfig::from(const KeyValues& kv) {
    for (const auto& [k, v] : kv) {
        if (!known_keys().count(k)) throw ConfigError("unknown key '" + k + "'");
    }
    auto get = [&](const std::string& k) -> std::optional<std::string> {
        const auto it = kv.find(k);
        if (it == kv.end()) return std::nullopt;
        return it->second;
    };
    auto real = [&](const std::string& k, double def) {
        const auto v = get(k);
        if (!v) return def;
        try {
            return parse_real(*v);
        } catch (const ConfigError& e) {
            throw ConfigError(k + ": " + e.what());
        }
    };
    auto integer = [&](const std::string& k, long def) {
        const auto v = get(k);
        return v ? parse_long(*v, k) : def;
    };
    auto require = [](bool ok, const std::string& msg) {
        if (!ok) throw ConfigError(msg);
    };

    RunConfig c;
    c.N = static_cast<int>(integer("model.N", c.N));
    require(c.N >= 1 && c.N <= 100000, "model.N must be in [1, 100000]");
    const auto lam = get("model.Lambda");
    const auto u = get("model.U");
    c.Lambda = real("model.Lambda", c.Lambda);
    if (u) {
        const double U = real("model.U", 0.0);
        if (lam) {
            require(std::abs(c.Lambda - c.N * U) <= 1e-12 * std::max(1.0, std::abs(c.Lambda)),
                    "model.Lambda must equal model.N * model.U");
        } else {
            c.Lambda = c.N * U;
        }
    }

    const double E1 = real("drive.E1", 0.4);
    const double E2 = real("drive.E2", 0.2);
    const double omega = real("drive.omega", 0.5);
    const double phi = real("drive.phi", 0.0);
    require(omega > 0.0, "drive.omega must be positive");
    c.drive = DriveParams(E1, E2, omega, phi);
    if (const auto g = get("drive.phi_grid")) c.phi_grid = parse_phi_grid(*g);

    c.initial.theta = real("init.theta", c.initial.theta);
    c.initial.varphi = real("init.varphi", c.initial.varphi);
    require(c.initial.theta >= 0.0 && c.initial.theta <= kPi, "init.theta must lie in [0, pi]");

    c.classical_Z = real("classical.Z", std::cos(c.initial.theta));
    c.classical_phi = real("classical.phi", c.initial.varphi);
    require(c.classical_Z >= -1.0 && c.classical_Z <= 1.0, "classical.Z must lie in [-1, 1]");
    c.classical_tau = real("classical.tau", c.classical_tau);
    c.classical_tau_prime = real("classical.tau_prime", c.classical_tau_prime);
    require(c.classical_tau >= 0.0, "classical.tau must be >= 0");
    require(c.classical_tau_prime > 0.0, "classical.tau_prime must be positive");
    c.classical_samples_per_period = static_cast<int>(integer("classical.samples_per_period", c.classical_samples_per_period));
    require(c.classical_samples_per_period >= 1, "classical.samples_per_period must be >= 1");
    c.classical.rel_tol = real("classical.rel_tol", c.classical.rel_tol);
    c.classical.abs_tol = real("classical.abs_tol", c.classical.abs_tol);
    if (const auto mode = get("classical.mode")) c.classical_mode = trim(*mode);
    require(c.classical_mode == "psos" || c.classical_mode == "api" || c.classical_mode == "pdf",
            "classical.mode must be psos, api or pdf");
    c.psos_periods = integer("classical.periods", c.psos_periods);
    require(c.psos_periods >= 1, "classical.periods must be >= 1");

    c.propagator.steps_per_period = static_cast<int>(integer("propagator.steps_per_period", c.propagator.steps_per_period));
    c.propagator.tolerance = real("propagator.tolerance", c.propagator.tolerance);
    if (const auto s = get("propagator.scheme")) {
        const std::string v = trim(*s);
        require(v == "cf4" || v == "midpoint", "propagator.scheme must be cf4 or midpoint");
        c.propagator.scheme = v == "cf4" ? MagnusScheme::CF4 : MagnusScheme::Midpoint;
    }

    c.window.burn_in_periods = integer("window.burn_in_periods", 1000);
    c.window.span_periods = integer("window.span_periods", 10000);
    c.window.samples_per_period = static_cast<int>(integer("window.samples_per_period", 16));
    c.mode_samples_per_period = static_cast<int>(integer("floquet.samples_per_period", c.mode_samples_per_period));
    c.evolve_horizon = real("evolve.horizon", c.evolve_horizon);
    c.evolve_samples_per_period = static_cast<int>(integer("evolve.samples_per_period", c.evolve_samples_per_period));
    require(c.evolve_horizon > 0.0, "evolve.horizon must be positive");
    const int S = c.propagator.steps_per_period;
    for (const auto& [name, K] : {std::pair<const char*, int>{"window.samples_per_period", c.window.samples_per_period},
                                  {"floquet.samples_per_period", c.mode_samples_per_period},
                                  {"evolve.samples_per_period", c.evolve_samples_per_period}}) {
        require(K >= 1 && S % K == 0, std::string(name) + " must divide propagator.steps_per_period");
    }

    c.pdf_grid.nZ = static_cast<int>(integer("grid.nZ", c.pdf_grid.nZ));
    c.pdf_grid.nphi = static_cast<int>(integer("grid.nphi", c.pdf_grid.nphi));
    if (const auto s = get("sweep.classical")) c.sweep_classical = parse_bool(*s, "sweep.classical");
    if (const auto s = get("check.names")) {
        c.checks = split_list(*s);
    } else {
        c.checks = suite_check_names();
    }
    c.check_grid = parse_phi_grid(get("check.phi_grid").value_or("0:2pi:17"));

    try {
        c.propagator.validate();
        c.window.validate();
        c.classical.validate();
        c.pdf_grid.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return c;
}

// ---- entry point --------------------------------------------------------

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Driven bosonic Josephson junction: Floquet, classical and Husimi analyses", "bjj"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::vector<std::string> sets;
    std::string out_dir = ".";
    int threads = default_threads();
    std::string format = "csv";
    app.add_option("--config", config_path, "Config file (key = value, dotted keys or [sections])");
    app.add_option("--set", sets, "Override KEY=VALUE (repeatable)")->take_all();
    app.add_option("--out", out_dir, "Output directory");
    app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
    app.add_option("--format", format, "Table format")->check(CLI::IsMember({"csv", "json"}));

    std::string classical_mode;
    auto* sp = app.add_subcommand("spectrum", "Quasi-energies, per-mode imbalances and weights");
    auto* sw = app.add_subcommand("api-sweep", "Quantum and classical API over drive.phi_grid");
    auto* cl = app.add_subcommand("classical", "Classical PSOS, time-averaged Z or phase-space PDF");
    cl->add_option("mode", classical_mode, "psos | api | pdf")->check(CLI::IsMember({"psos", "api", "pdf"}));
    auto* ev = app.add_subcommand("evolve", "Quantum and classical imbalance and depletion time series");
    auto* hu = app.add_subcommand("husimi", "Time-averaged Husimi distribution and classical PDF");
    auto* ck = app.add_subcommand("check", "Symmetry check suite");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kConfigError;
    }

    try {
        KeyValues kv;
        if (!config_path.empty()) {
            std::ifstream f(config_path);
            if (!f) throw ConfigError("cannot read config file '" + config_path + "'");
            std::stringstream ss;
            ss << f.rdbuf();
            kv = parse_config_text(ss.str());
        }
        for (const auto& s : sets) apply_override(kv, s);
        if (!classical_mode.empty()) kv["classical.mode"] = classical_mode;
        RunConfig cfg;
        try {
            cfg = RunConfig::from(kv);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
        Context ctx{std::move(cfg), fs::path(out_dir), format, threads, err};

        if (sp->parsed()) return cmd_spectrum(ctx);
        if (sw->parsed()) return cmd_api_sweep(ctx);
        if (cl->parsed()) return cmd_classical(ctx);
        if (ev->parsed()) return cmd_evolve(ctx);
        if (hu->parsed()) return cmd_husimi(ctx);
        if (ck->parsed()) return cmd_check(ctx);
        return kConfigError;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const DegenerateSpectrumError& e) {
        err << "degenerate spectrum: " << e.what() << '\n';
        return kDegenerate;
    } catch (const IntegrationError& e) {
        err << "integrator failure: " << e.what() << '\n';
        return kIntegratorError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kFailure;
    }
}

}  // namespace bjj::cli

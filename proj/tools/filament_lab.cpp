#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "filament/config.hpp"
#include "filament/diagnostics.hpp"
#include "filament/dispersion.hpp"
#include "filament/dispersion_fit.hpp"
#include "filament/envelope.hpp"
#include "filament/harness.hpp"
#include "filament/kernels.hpp"
#include "filament/maxwell.hpp"

using namespace filament;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kInvariant = 2;
constexpr int kBlowup = 3;
constexpr int kUsage = 1;

struct Globals {
    std::string config_path;
    std::string out_dir = ".";
    int threads = 0;
    unsigned long long seed = 0;
    std::vector<std::string> overrides;
    Config cfg;
};

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json nums(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(num(x));
    return a;
}

json medium_json(const MediumParams& m) {
    json j{{"gamma", m.gamma},        {"omega0", m.omega0}, {"omega1", m.omega1}, {"p", m.p},
           {"nonlinearity", to_string(m.nonlinearity)}, {"r", m.r}, {"a_tilde", m.a_tilde}};
    if (m.ionization) {
        const auto& i = *m.ionization;
        j["ionization"] = {{"c", i.c},   {"c0", i.c0},         {"c1", i.c1},        {"c2", i.c2},
                           {"K", i.K},   {"alpha4", i.alpha4}, {"alpha5", i.alpha5}};
    }
    return j;
}

json fit_json(const FitResult& f) {
    json B = json::array();
    for (int i = 0; i < f.B.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < f.B.cols(); ++j) row.push_back(f.B(i, j));
        B.push_back(row);
    }
    std::vector<double> b(f.b.data(), f.b.data() + f.b.size());
    return {{"dims", f.dims},
            {"b", b},
            {"B", B},
            {"C3", f.C3},
            {"k0", f.k0},
            {"half_width", f.half_width},
            {"sup_error", num(f.sup_error)},
            {"nls_sup_error", num(f.nls_sup_error)},
            {"ratio", num(f.nls_sup_error > 0 ? f.sup_error / f.nls_sup_error : 0.0)},
            {"is_zero", f.is_zero()}};
}

json run_report_json(const RunReport& r) {
    json d = json::object();
    for (const auto& [k, v] : r.drift) d[k] = num(v);
    json last = json::object();
    if (!r.series.empty()) {
        const auto& s = r.series.back();
        last = {{"t", s.t},        {"mass", num(s.mass)},           {"energy", num(s.energy)},
                {"momentum", nums(s.momentum)}, {"max_abs", num(s.max_abs)}, {"grad_norm", num(s.grad_norm)},
                {"max_rho", num(s.max_rho)}};
    }
    return {{"status", to_string(r.status)},
            {"message", r.message},
            {"steps", r.steps},
            {"t_final", r.t_final},
            {"samples", r.series.size()},
            {"drift", d},
            {"final", last},
            {"thresholds", {{"grad_growth", r.thresholds.grad_growth}, {"amplitude_growth", r.thresholds.amplitude_growth}}}};
}

void write_report(const Globals& g, const std::string& command, int exit_code, const json& results) {
    json cfg = json::object();
    for (const auto& [k, v] : g.cfg.entries()) cfg[k] = v;
    json rep{{"schema", "filament-lab/report/1"},
             {"command", command},
             {"exit_code", exit_code},
             {"threads", max_threads()},
             {"seed", g.seed},
             {"config", cfg},
             {"results", results}};
    std::ofstream f(fs::path(g.out_dir) / "report.json");
    f << std::setw(2) << rep << '\n';
}

std::ofstream open_csv(const Globals& g, const std::string& name) {
    std::ofstream f(fs::path(g.out_dir) / name);
    if (!f) throw Error("cannot write " + (fs::path(g.out_dir) / name).string());
    f.precision(17);
    return f;
}

std::vector<cplx> seeded_profile(const Globals& g, const GridSpec& grid, const ProfileSpec& p) {
    std::vector<cplx> u = make_profile(grid, p);
    const double noise = g.cfg.get_double("profile.noise", 0.0);
    if (noise != 0.0) {
        std::mt19937_64 rng(g.seed);
        std::normal_distribution<double> d;
        for (auto& x : u) x += noise * cplx(d(rng), d(rng));
    }
    return u;
}

// ---------------------------------------------------------------------------

int cmd_dispersion(Globals& g, const std::vector<double>& krange) {
    const MediumParams m = medium_from_config(g.cfg);
    m.validate(true);
    double kmin = 0.0, kmax = 4.0;
    int n = 81;
    if (krange.size() == 3) kmin = krange[0], kmax = krange[1], n = static_cast<int>(krange[2]);
    else if (!krange.empty()) throw Error("--k expects kmin,kmax,count");
    auto f = open_csv(g, "dispersion.csv");
    f << "k,omega_pp,omega_pm,omega_mp,omega_mm,omega_c0,omega_cp,omega_cm,max_quartic_residual\n";
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
        const double k = n > 1 ? kmin + (kmax - kmin) * i / (n - 1) : kmin;
        const BranchValues v = omega_branches(k, m);
        double res = 0.0;
        for (double w : v.curved) res = std::max(res, std::abs(dispersion_quartic(w, k, m)));
        worst = std::max(worst, res);
        f << k;
        for (double w : v.curved) f << ',' << w;
        for (double w : v.constant) f << ',' << w;
        f << ',' << res << '\n';
    }
    json results{{"medium", medium_json(m)}, {"k_range", {kmin, kmax, n}}, {"max_quartic_residual", worst}};
    if (g.cfg.has("dispersion.k0")) {
        const double k0 = g.cfg.get_double("dispersion.k0", 2.0);
        const BranchId br = parse_branch(g.cfg.get_string("dispersion.branch", "++"));
        const double eps = g.cfg.get_double("dispersion.epsilon", 0.1);
        const NlsCoefficients c = nls_coefficients(k0, br, m, eps);
        results["carrier"] = {{"k0", k0},
                              {"branch", to_string(br)},
                              {"omega", c.omega},
                              {"group_velocity", c.c_g},
                              {"gvd", c.omega_pp},
                              {"alpha1", c.alpha1},
                              {"damping", c.damping},
                              {"cubic_gain", c.cubic_gain},
                              {"alpha3", c.alpha3},
                              {"alpha3_projector", c.alpha3_projector},
                              {"nonresonant", is_nonresonant(k0, br, m)}};
    }
    const int code = worst < 1e-8 ? kOk : kInvariant;
    write_report(g, "dispersion", code, results);
    std::cout << "dispersion: " << n << " wavenumbers, max quartic residual " << worst << '\n';
    return code;
}

int cmd_fit(Globals& g) {
    const MediumParams m = medium_from_config(g.cfg);
    const BranchId br = parse_branch(g.cfg.get_string("fit.branch", "++"));
    const double k0 = g.cfg.get_double("fit.k0", 2.0);
    const double hw = g.cfg.get_double("fit.half_width", 1.5);
    const int dims = g.cfg.get_int("fit.dims", 1);
    FitOptions fo;
    fo.window_points = g.cfg.get_int("fit.window_points", fo.window_points);
    fo.grid_b = g.cfg.get_int("fit.grid_b", fo.grid_b);
    fo.grid_B = g.cfg.get_int("fit.grid_B", fo.grid_B);
    fo.b_max = g.cfg.get_double("fit.b_max", fo.b_max);
    const FitResult f = fit_improved(br, k0, hw, m, dims, fo);
    const HypCheck h = check_hyp(f.b, f.B);
    auto csv = open_csv(g, "fit.csv");
    csv << (dims == 1 ? "k" : "kx,kz") << ",omega_exact,omega_nls,omega_imp\n";
    for (const auto& k : fit_window(k0, hw, dims, dims == 1 ? fo.window_points : 41)) {
        csv << k[0];
        if (dims == 2) csv << ',' << k[1];
        csv << ',' << omega_exact(br, k, dims, m) << ',' << omega_nls(k, dims, k0, br, m) << ','
            << omega_imp(k, dims, k0, br, f, m) << '\n';
    }
    json results{{"medium", medium_json(m)}, {"branch", to_string(br)}, {"fit", fit_json(f)},
                 {"hyp_ok", h.ok},           {"hyp_diagnostic", h.diagnostic}};
    const int code = h.ok ? kOk : kInvariant;
    write_report(g, "fit-dispersion", code, results);
    std::cout << "fit-dispersion: sup error " << f.sup_error << " vs NLS " << f.nls_sup_error << '\n';
    return code;
}

int simulate_maxwell(Globals& g) {
    const MediumParams m = medium_from_config(g.cfg);
    const GridSpec grid = grid_from_config(g.cfg, "grid");
    const double eps = g.cfg.get_double("simulate.epsilon", 0.1);
    const double k = g.cfg.get_double("simulate.k", 2.0);
    const BranchId br = parse_branch(g.cfg.get_string("simulate.branch", "++"));
    const double dt = g.cfg.get_double("simulate.dt", eps / 8.0);
    const double tf = g.cfg.get_double("simulate.t_final", 0.5 / eps);
    const int every = std::max(1, g.cfg.get_int("simulate.sample_every", 10));
    const int nsnap = g.cfg.get_int("simulate.snapshots", 0);
    WavePacketSpec spec;
    spec.envelope = seeded_profile(g, grid, profile_from_config(g.cfg));
    spec.carrier_k = k;
    spec.branch = br;
    MaxwellState s = init_wave_packet(spec, m, eps, grid);
    MaxwellOptions mo;
    mo.carrier_k = k;
    const MaxwellStepper st(grid, m, eps, dt, mo);
    const long nsteps = std::lround(tf / dt);
    auto csv = open_csv(g, "series.csv");
    csv << "t,l2,energy,max_abs,max_rho\n";
    auto row = [&]() {
        double mr = 0.0;
        if (s.rho)
            for (double r : *s.rho) mr = std::max(mr, r);
        csv << s.time << ',' << maxwell_l2(s) << ',' << maxwell_energy(s, m) << ',' << max_abs(s.u) << ',' << mr
            << '\n';
    };
    const double e0 = maxwell_energy(s, m);
    double worst = 0.0;
    row();
    std::string status = "completed";
    int snap = 0;
    auto snapshot = [&]() {
        std::ostringstream name;
        name << "snapshot_" << std::setw(4) << std::setfill('0') << snap++ << ".csv";
        write_snapshot_csv((fs::path(g.out_dir) / name.str()).string(), s.u, {"By", "Ex", "Qx", "Px"});
    };
    if (nsnap > 0) snapshot();
    for (long i = 1; i <= nsteps; ++i) {
        try {
            st.step(s);
        } catch (const Error& e) {
            status = "aborted";
            std::cerr << e.what() << '\n';
            break;
        }
        worst = std::max(worst, std::abs(maxwell_energy(s, m) - e0) / std::max(std::abs(e0), 1e-300));
        if (i % every == 0 || i == nsteps) row();
        if (nsnap > 0 && (i * nsnap) % nsteps == 0) snapshot();
    }
    const bool conservative = m.omega1 == 0.0 && !m.ionization;
    const double tol = g.cfg.get_double("simulate.energy_tol", 1e-6);
    int code = kOk;
    if (status != "completed") code = kBlowup;
    else if (conservative && worst > tol) code = kInvariant;
    write_report(g, "simulate maxwell", code,
                 {{"status", status},
                  {"medium", medium_json(m)},
                  {"epsilon", eps},
                  {"steps", nsteps},
                  {"energy_drift", num(worst)},
                  {"energy_conserved_expected", conservative},
                  {"max_imag_residue", max_imag_residue(s)}});
    std::cout << "simulate maxwell: " << status << ", energy drift " << worst << '\n';
    return code;
}

int simulate_envelope(Globals& g) {
    const GridSpec grid = grid_from_config(g.cfg, "grid");
    ModelConfig cfg = model_from_config(g.cfg, grid.dims);
    const MediumParams m = medium_from_config(g.cfg);
    const double k0 = g.cfg.get_double("simulate.k", 2.0);
    const BranchId br = parse_branch(g.cfg.get_string("simulate.branch", "++"));
    if (g.cfg.get_bool("model.fit.auto", false)) {
        cfg.fit = fit_improved(br, k0, g.cfg.get_double("model.fit.half_width", 1.5), m, grid.dims);
    }
    const double dt = g.cfg.get_double("simulate.dt", 1e-3);
    std::optional<EnvelopeSolver> solver;
    if (is_dimensional(cfg.model))
        solver.emplace(grid, cfg, m, k0, br, dt);
    else
        solver.emplace(grid, cfg, dt);
    EnvelopeState s = make_envelope_state(grid, cfg, seeded_profile(g, grid, profile_from_config(g.cfg)));
    RunOptions ro;
    ro.t_final = g.cfg.get_double("simulate.t_final", 1.0);
    ro.sample_every = g.cfg.get_int("simulate.sample_every", 10);
    ro.thresholds = thresholds_from_config(g.cfg);
    const int nsnap = g.cfg.get_int("simulate.snapshots", 0);
    const long nsteps = std::lround(ro.t_final / dt);
    int snap = 0;
    if (nsnap > 0) {
        ro.on_sample = [&](const EnvelopeState& st, long step) {
            if (step == 0 || (nsteps > 0 && (step * nsnap) % nsteps < ro.sample_every)) {
                std::ostringstream name;
                name << "snapshot_" << std::setw(4) << std::setfill('0') << snap++ << ".csv";
                write_snapshot_csv((fs::path(g.out_dir) / name.str()).string(), st.u);
            }
        };
    }
    RunReport rep = run_envelope(s, *solver, ro);
    write_series_csv((fs::path(g.out_dir) / "series.csv").string(), rep);

    // Invariant checks requested in the config.
    json checks = json::object();
    bool failed = false;
    for (const std::string inv : {"mass", "energy"}) {
        const std::string key = "simulate.check." + inv + "_drift";
        if (!g.cfg.has(key)) continue;
        const double tol = g.cfg.get_double(key, 0.0);
        const double d = rep.drift.count(inv) ? rep.drift[inv] : NAN;
        const bool ok = std::isfinite(d) && d <= tol;
        failed |= !ok;
        checks[inv] = {{"drift", num(d)}, {"tolerance", tol}, {"pass", ok}};
    }
    const bool expect_blowup = g.cfg.get_bool("simulate.expect_blowup", false);
    int code = kOk;
    if (rep.status != RunStatus::completed && !expect_blowup) code = kBlowup;
    else if (failed) code = kInvariant;
    json results = run_report_json(rep);
    results["model"] = to_string(cfg.model);
    results["checks"] = checks;
    results["expect_blowup"] = expect_blowup;
    if (cfg.fit) results["fit"] = fit_json(*cfg.fit);
    write_report(g, "simulate envelope", code, results);
    std::cout << "simulate envelope (" << to_string(cfg.model) << "): " << to_string(rep.status) << " at t = "
              << rep.t_final << '\n';
    return code;
}

int cmd_converge(Globals& g) {
    const ConvergenceOptions opt = convergence_from_config(g.cfg);
    const ConvergenceReport r = run_convergence(opt);
    auto csv = open_csv(g, "convergence.csv");
    csv << "model,epsilon,error,error_demodulated,oracle_self_error\n";
    for (const auto& m : r.models)
        for (std::size_t i = 0; i < r.epsilons.size(); ++i)
            csv << m << ',' << r.epsilons[i] << ',' << r.errors.at(m)[i] << ',' << r.errors_demodulated.at(m)[i] << ','
                << r.oracle_self_error[i] << '\n';
    const auto band = g.cfg.get_doubles("converge.slope_band", {});
    json models = json::object();
    bool failed = !r.failures.empty();
    for (const auto& m : r.models) {
        json j{{"errors", nums(r.errors.at(m))},
               {"errors_demodulated", nums(r.errors_demodulated.at(m))},
               {"runtime_seconds", nums(r.runtime.at(m))}};
        if (r.slopes.count(m)) j["slope"] = r.slopes.at(m);
        if (r.slopes_demodulated.count(m)) j["slope_demodulated"] = r.slopes_demodulated.at(m);
        if (band.size() == 2) {
            const bool ok = r.slopes.count(m) && r.slopes.at(m) >= band[0] && r.slopes.at(m) <= band[1];
            j["slope_in_band"] = ok;
            failed |= !ok;
        }
        models[m] = j;
    }
    json results{{"epsilons", r.epsilons},
                 {"models", models},
                 {"oracle_self_error", nums(r.oracle_self_error)},
                 {"oracle_runtime_seconds", nums(r.oracle_runtime)},
                 {"failures", r.failures},
                 {"medium", medium_json(opt.medium)}};
    if (band.size() == 2) results["slope_band"] = band;
    if (r.fit) results["fit"] = fit_json(*r.fit);
    const int code = failed ? kInvariant : kOk;
    write_report(g, "converge", code, results);
    for (const auto& m : r.models) {
        std::cout << std::left << std::setw(18) << m;
        for (double e : r.errors.at(m)) std::cout << ' ' << std::scientific << std::setprecision(3) << e;
        if (r.slopes.count(m)) std::cout << "  slope " << std::fixed << std::setprecision(3) << r.slopes.at(m);
        std::cout << '\n';
    }
    return code;
}

int cmd_compare(Globals& g) {
    const CompareOptions opt = compare_from_config(g.cfg);
    const auto rows = compare_models(opt);
    const auto expected = g.cfg.get_strings("compare.expect_blowup", {});
    auto csv = open_csv(g, "compare.csv");
    csv << "variant,status,t_final,mass,energy,max_abs,grad_norm,max_rho,mass_drift,energy_drift\n";
    json out = json::array();
    int code = kOk;
    for (const auto& r : rows) {
        const auto& rep = r.report;
        const SeriesRow last = rep.series.empty() ? SeriesRow{} : rep.series.back();
        csv << r.name << ',' << to_string(rep.status) << ',' << rep.t_final << ',' << last.mass << ',' << last.energy
            << ',' << last.max_abs << ',' << last.grad_norm << ',' << last.max_rho << ','
            << (rep.drift.count("mass") ? rep.drift.at("mass") : NAN) << ','
            << (rep.drift.count("energy") ? rep.drift.at("energy") : NAN) << '\n';
        json j = run_report_json(rep);
        j["variant"] = r.name;
        j["wall_time_seconds"] = r.wall_time;
        if (!r.error.empty()) j["error"] = r.error;
        out.push_back(j);
        const bool expect = std::find(expected.begin(), expected.end(), r.name) != expected.end();
        if (rep.status != RunStatus::completed && !expect) code = kBlowup;
    }
    write_report(g, "compare", code, {{"rows", out}});
    for (const auto& r : rows)
        std::cout << std::left << std::setw(28) << r.name << ' ' << to_string(r.report.status) << '\n';
    return code;
}

int cmd_diagnose(Globals& g, const std::string& series) {
    const RunReport r = read_series_csv(series);
    struct Check {
        std::string name;
        double value;
        double tol;
    };
    std::vector<Check> checks;
    const double mtol = g.cfg.get_double("diagnose.mass_tol", 1e-8);
    const double etol = g.cfg.get_double("diagnose.energy_tol", 1e-6);
    checks.push_back({"mass_drift", r.drift.at("mass"), mtol});
    if (std::isfinite(r.drift.at("energy"))) checks.push_back({"energy_drift", r.drift.at("energy"), etol});
    if (g.cfg.get_bool("diagnose.mass_nonincreasing", false)) {
        double worst = 0.0;
        for (std::size_t i = 1; i < r.series.size(); ++i)
            worst = std::max(worst, r.series[i].mass - r.series[i - 1].mass);
        checks.push_back({"mass_increase", worst, g.cfg.get_double("diagnose.monotone_tol", 1e-10)});
    }
    bool ok = true;
    json arr = json::array();
    std::cout << std::left << std::setw(16) << "invariant" << std::setw(14) << "value" << std::setw(12) << "tolerance"
              << "result\n";
    for (const auto& c : checks) {
        const bool pass = c.value <= c.tol;
        ok &= pass;
        std::cout << std::left << std::setw(16) << c.name << std::setw(14) << std::scientific << std::setprecision(3)
                  << c.value << std::setw(12) << c.tol << (pass ? "pass" : "FAIL") << '\n';
        arr.push_back({{"name", c.name}, {"value", num(c.value)}, {"tolerance", c.tol}, {"pass", pass}});
    }
    const RunStatus st = blowup_detect(r);
    std::cout << "status " << to_string(st) << '\n';
    const int code = ok ? kOk : kInvariant;
    write_report(g, "diagnose", code, {{"series", series}, {"checks", arr}, {"status", to_string(st)}});
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"filament-lab: Maxwell oracle and envelope-model laboratory"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config_path, "key=value config file with [section] headers");
    app.add_option("--out-dir", g.out_dir, "directory for report.json and CSV outputs");
    app.add_option("--threads", g.threads, "OpenMP threads (0 keeps the runtime default)");
    app.add_option("--seed", g.seed, "seed for randomized inputs");
    app.add_option("--set", g.overrides, "override a config entry, e.g. --set model.alpha1=-1");

    std::vector<double> krange;
    auto* disp = app.add_subcommand("dispersion", "tabulate the dispersion branches");
    disp->add_option("--k", krange, "kmin kmax count")->expected(3)->delimiter(',');
    auto* fit = app.add_subcommand("fit-dispersion", "fit the improved dispersion parameters");
    auto* sim = app.add_subcommand("simulate", "run the Maxwell oracle or an envelope model");
    std::string target;
    sim->add_option("target", target, "maxwell | envelope")->required()->check(CLI::IsMember({"maxwell", "envelope"}));
    auto* conv = app.add_subcommand("converge", "epsilon-convergence study against the Maxwell oracle");
    auto* cmp = app.add_subcommand("compare", "run several envelope models on shared data");
    std::string series;
    auto* diag = app.add_subcommand("diagnose", "recompute drifts from a series CSV");
    diag->add_option("--series", series, "series CSV written by simulate")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (!g.config_path.empty()) g.cfg = Config::load(g.config_path);
        for (const auto& o : g.overrides) {
            const auto eq = o.find('=');
            if (eq == std::string::npos) throw Error("--set expects key=value, got '" + o + "'");
            g.cfg.set(o.substr(0, eq), o.substr(eq + 1));
        }
        set_threads(g.threads);
        fs::create_directories(g.out_dir);
        if (*disp) return cmd_dispersion(g, krange);
        if (*fit) return cmd_fit(g);
        if (*sim) return target == "maxwell" ? simulate_maxwell(g) : simulate_envelope(g);
        if (*conv) return cmd_converge(g);
        if (*cmp) return cmd_compare(g);
        if (*diag) return cmd_diagnose(g, series);
    } catch (const std::exception& e) {
        std::cerr << "filament-lab: " << e.what() << '\n';
        return kUsage;
    }
    return kUsage;
}

#include "filament/harness.hpp"

#include <chrono>
#include <limits>
#include <cmath>
#include <numbers>
#include <sstream>

namespace filament {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Accepts plain numbers and multiples of pi written as "6pi".
double parse_scaled(const std::string& s, const std::string& key) {
    std::string t = s;
    double scale = 1.0;
    if (t.size() >= 2 && t.substr(t.size() - 2) == "pi") {
        scale = std::numbers::pi;
        t = t.substr(0, t.size() - 2);
        if (t.empty()) return scale;
    }
    try {
        std::size_t pos = 0;
        const double v = std::stod(t, &pos);
        if (pos != t.size()) throw std::invalid_argument("trailing");
        return v * scale;
    } catch (const std::exception&) {
        throw Error("config key '" + key + "': bad length '" + s + "'");
    }
}

std::vector<double> scaled_list(const Config& c, const std::string& key, const std::vector<double>& def) {
    if (!c.has(key)) return def;
    std::vector<double> out;
    for (const auto& tok : c.get_strings(key, {})) out.push_back(parse_scaled(tok, key));
    return out;
}

double max_difference(const SpectralField& a, const SpectralField& b) {
    if (a.data.size() != b.data.size()) throw Error("max_difference: shape mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) m = std::max(m, std::abs(a.data[i] - b.data[i]));
    return m;
}

}  // namespace

DimensionlessMedium build_medium_from_physical(const PhysicalInputs& in) {
    for (double v : {in.tbar, in.Tbar, in.Omega0, in.b_coupling, in.a3})
        if (!(v > 0.0)) throw Error("build_medium_from_physical: tbar, Tbar, Omega0, b and a3 must be > 0");
    if (!(in.Omega1 >= 0.0) || !(in.a5 >= 0.0)) throw Error("build_medium_from_physical: Omega1 and a5 must be >= 0");
    if (!(in.Tbar > in.tbar)) throw Error("build_medium_from_physical: need Tbar > tbar (epsilon < 1)");
    DimensionlessMedium out;
    const double eps = in.tbar / in.Tbar;
    out.epsilon = eps;
    MediumParams& m = out.medium;
    m.omega0 = in.tbar * in.Omega0;
    // Omega1 = eps^{(1+p)+1} omega1 / tbar
    m.omega1 = in.Omega1 * in.tbar / std::pow(eps, in.p + 2.0);
    m.p = in.p;
    m.gamma = in.b_coupling * in.tbar * in.tbar;
    m.r = in.r;
    m.nonlinearity = in.kind;
    // P0 = 1/(Tbar sqrt(a3)); a_tilde eps^r = a5 P0^2 / a3
    const double P0 = 1.0 / (in.Tbar * std::sqrt(in.a3));
    m.a_tilde = in.a5 * P0 * P0 / in.a3 / std::pow(eps, in.r);
    m.validate();
    return out;
}

PhysicalInputs physical_from_medium(double epsilon, const MediumParams& m, double tbar, double a3) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw Error("physical_from_medium: epsilon must lie in (0, 1)");
    if (!(tbar > 0.0) || !(a3 > 0.0)) throw Error("physical_from_medium: tbar and a3 must be > 0");
    PhysicalInputs in;
    in.tbar = tbar;
    in.Tbar = tbar / epsilon;
    in.Omega0 = m.omega0 / tbar;
    in.Omega1 = m.omega1 * std::pow(epsilon, m.p + 2.0) / tbar;
    in.b_coupling = m.gamma / (tbar * tbar);
    in.a3 = a3;
    const double P0 = 1.0 / (in.Tbar * std::sqrt(a3));
    in.a5 = m.a_tilde * std::pow(epsilon, m.r) * a3 / (P0 * P0);
    in.p = m.p;
    in.r = m.r;
    in.kind = m.nonlinearity;
    return in;
}

std::vector<cplx> make_profile(const GridSpec& g, const ProfileSpec& p) {
    std::vector<cplx> u(g.size());
    const int zd = g.z_dim();
    for (std::size_t i = 0; i < g.size(); ++i) {
        const WaveVec x = g.position(i);
        double v = p.amplitude;
        if (p.shape == "gaussian") {
            double a = 0.0;
            for (int d = 0; d < g.dims; ++d) {
                const double s = (x[d] - p.center[d]) / p.width[d];
                a += s * s;
            }
            v *= std::exp(-a);
        } else if (p.shape == "sech") {
            v /= std::cosh((x[zd] - p.center[zd]) / p.width[zd]);
            if (g.dims == 2) {
                const double s = (x[0] - p.center[0]) / p.width[0];
                v *= std::exp(-s * s);
            }
        } else if (p.shape != "constant") {
            throw Error("profile: unknown shape '" + p.shape + "'");
        }
        if (p.perturbation != 0.0) {
            double c = 1.0;
            for (int d = 0; d < g.dims; ++d)
                c *= std::cos(p.perturbation_modes[d] * (x[d] + 0.5 * g.length[d]) * 2.0 * std::numbers::pi / g.length[d]);
            v *= 1.0 + p.perturbation * c;
        }
        u[i] = v;
    }
    return u;
}

GridSpec grid_from_config(const Config& c, const std::string& prefix) {
    const int dims = c.get_int(prefix + ".dims", 1);
    std::vector<double> pts = c.get_doubles(prefix + ".points", std::vector<double>(dims, 256));
    std::vector<double> len = scaled_list(c, prefix + ".length", std::vector<double>(dims, 2.0 * std::numbers::pi));
    if (pts.size() == 1 && dims == 2) pts.push_back(pts[0]);
    if (len.size() == 1 && dims == 2) len.push_back(len[0]);
    std::vector<int> n;
    for (double v : pts) n.push_back(static_cast<int>(v));
    return make_grid(dims, n, len);
}

MediumParams medium_from_config(const Config& c, const std::string& prefix) {
    MediumParams m;
    m.gamma = c.get_double(prefix + ".gamma", m.gamma);
    m.omega0 = c.get_double(prefix + ".omega0", m.omega0);
    m.omega1 = c.get_double(prefix + ".omega1", m.omega1);
    m.p = c.get_double(prefix + ".p", m.p);
    m.nonlinearity = parse_nonlinearity(c.get_string(prefix + ".nonlinearity", "cubic"));
    m.r = c.get_double(prefix + ".r", m.r);
    m.a_tilde = c.get_double(prefix + ".a_tilde", m.a_tilde);
    const std::string io = prefix + ".ionization";
    if (c.get_bool(io + ".enabled", false)) {
        IonizationParams p;
        p.c = c.get_double(io + ".c", p.c);
        p.c0 = c.get_double(io + ".c0", p.c0);
        p.c1 = c.get_double(io + ".c1", p.c1);
        p.c2 = c.get_double(io + ".c2", p.c2);
        p.K = c.get_int(io + ".K", p.K);
        p.alpha4 = c.get_double(io + ".alpha4", p.alpha4);
        p.alpha5 = c.get_double(io + ".alpha5", p.alpha5);
        m.ionization = p;
    }
    return m;
}

ModelConfig model_from_config(const Config& c, int dims, const std::string& prefix) {
    ModelConfig m;
    m.model = parse_model(c.get_string(prefix + ".kind", "family_scalar"));
    m.alpha1 = c.get_int(prefix + ".alpha1", m.alpha1);
    m.alpha2 = c.get_double(prefix + ".alpha2", m.alpha2);
    m.alpha3 = c.get_doubles(prefix + ".alpha3", {});
    m.f_kind = parse_fkind(c.get_string(prefix + ".f_kind", "zero"));
    m.r = c.get_double(prefix + ".r", m.r);
    m.epsilon = c.get_double(prefix + ".epsilon", m.epsilon);
    m.dealias = c.get_bool(prefix + ".dealias", false);
    m.polarization_terms = c.get_bool(prefix + ".polarization_terms", true);
    const std::string fp = prefix + ".fit";
    if (c.has(fp + ".b") || c.has(fp + ".B")) {
        FitResult f = FitResult::zero(dims);
        const auto b = c.get_doubles(fp + ".b", std::vector<double>(dims, 0.0));
        const auto B = c.get_doubles(fp + ".B", std::vector<double>(dims * dims, 0.0));
        if (static_cast<int>(b.size()) != dims || static_cast<int>(B.size()) != dims * dims)
            throw Error("model.fit: b needs " + std::to_string(dims) + " entries and B " + std::to_string(dims * dims));
        for (int i = 0; i < dims; ++i) {
            f.b(i) = b[i];
            for (int j = 0; j < dims; ++j) f.B(i, j) = B[i * dims + j];
        }
        f.C3 = tied_c3(f.B, c.get_double(fp + ".omega_prime", 0.0), dims);
        m.fit = f;
    }
    const std::string io = prefix + ".ionization";
    if (c.has(io + ".c") || c.has(io + ".alpha4") || c.has(io + ".K")) {
        EnvelopeIonization e;
        e.c = c.get_double(io + ".c", e.c);
        e.alpha4 = c.get_double(io + ".alpha4", e.alpha4);
        e.alpha5 = c.get_double(io + ".alpha5", e.alpha5);
        e.K = c.get_int(io + ".K", e.K);
        e.c_g = c.get_double(io + ".c_g", e.c_g);
        m.ionization = e;
    }
    return m;
}

ProfileSpec profile_from_config(const Config& c, const std::string& prefix) {
    ProfileSpec p;
    p.shape = c.get_string(prefix + ".shape", p.shape);
    p.amplitude = c.get_double(prefix + ".amplitude", p.amplitude);
    auto w = c.get_doubles(prefix + ".width", {p.width[0], p.width[1]});
    auto ce = c.get_doubles(prefix + ".center", {p.center[0], p.center[1]});
    auto pm = c.get_doubles(prefix + ".perturbation_modes", {0.0, 0.0});
    if (w.size() == 1) w.push_back(w[0]);
    if (ce.size() == 1) ce.push_back(ce[0]);
    if (pm.size() == 1) pm.push_back(pm[0]);
    p.width = {w[0], w[1]};
    p.center = {ce[0], ce[1]};
    p.perturbation = c.get_double(prefix + ".perturbation", 0.0);
    p.perturbation_modes = {static_cast<int>(pm[0]), static_cast<int>(pm[1])};
    return p;
}

BlowupThresholds thresholds_from_config(const Config& c) {
    BlowupThresholds t;
    t.grad_growth = c.get_double("blowup.grad_growth", t.grad_growth);
    t.amplitude_growth = c.get_double("blowup.amplitude_growth", t.amplitude_growth);
    return t;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw Error("loglog_slope: need matching lists of length >= 2");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw Error("loglog_slope: values must be positive");
        const double a = std::log(x[i]), b = std::log(y[i]);
        sx += a;
        sy += b;
        sxx += a * a;
        sxy += a * b;
    }
    const double den = n * sxx - sx * sx;
    if (den == 0.0) throw Error("loglog_slope: degenerate abscissae");
    return (n * sxy - sx * sy) / den;
}

ConvergenceOptions convergence_from_config(const Config& c) {
    ConvergenceOptions o;
    o.medium = medium_from_config(c);
    o.k = c.get_double("converge.k", o.k);
    o.branch = parse_branch(c.get_string("converge.branch", "++"));
    o.epsilons = c.get_doubles("converge.epsilons", o.epsilons);
    o.T = c.get_double("converge.T", o.T);
    o.amplitude = c.get_double("converge.amplitude", o.amplitude);
    o.width = c.get_double("converge.width", o.width);
    o.points = c.get_int("converge.points", o.points);
    if (c.has("converge.length")) o.length = parse_scaled(c.get_string("converge.length", ""), "converge.length");
    o.dt_factor = c.get_double("converge.dt_factor", o.dt_factor);
    o.models = c.get_strings("converge.models", o.models);
    o.fit_half_width = c.get_double("converge.fit_half_width", o.fit_half_width);
    o.oracle_self_check = c.get_bool("converge.oracle_self_check", o.oracle_self_check);
    o.polarization_defect = c.get_double("converge.polarization_defect", o.polarization_defect);
    return o;
}

ConvergenceReport run_convergence(const ConvergenceOptions& opt) {
    opt.medium.validate();
    if (opt.epsilons.empty()) throw Error("run_convergence: empty epsilon list");
    for (std::size_t i = 1; i < opt.epsilons.size(); ++i)
        if (!(opt.epsilons[i] < opt.epsilons[i - 1])) throw Error("run_convergence: epsilons must be decreasing");
    if (!(opt.T > 0.0) || !(opt.dt_factor > 0.0)) throw Error("run_convergence: T and dt_factor must be > 0");
    std::vector<ModelKind> kinds;
    for (const auto& s : opt.models) {
        const ModelKind mk = parse_model(s);
        if (!is_dimensional(mk)) throw Error("run_convergence: model " + s + " is not tied to the Maxwell oracle");
        kinds.push_back(mk);
    }
    const double L = opt.length > 0.0 ? opt.length : 6.0 * std::numbers::pi;
    const GridSpec g = make_grid(1, {opt.points}, {L});
    for (double eps : opt.epsilons) check_carrier_on_lattice(opt.k, eps, g);

    ConvergenceReport rep;
    rep.epsilons = opt.epsilons;
    rep.models = opt.models;
    for (const auto& m : opt.models) {
        rep.errors[m].assign(opt.epsilons.size(), 0.0);
        rep.errors_demodulated[m].assign(opt.epsilons.size(), 0.0);
        rep.runtime[m].assign(opt.epsilons.size(), 0.0);
    }
    rep.oracle_runtime.assign(opt.epsilons.size(), 0.0);
    rep.oracle_self_error.assign(opt.epsilons.size(), 0.0);

    bool need_fit = false;
    for (ModelKind mk : kinds) need_fit |= mk == ModelKind::nls_improved || mk == ModelKind::nls_polarized;
    if (need_fit) rep.fit = fit_improved(opt.branch, opt.k, opt.fit_half_width, opt.medium, 1);

    ProfileSpec prof;
    prof.amplitude = opt.amplitude;
    prof.width = {opt.width, opt.width};
    const std::vector<cplx> u0 = make_profile(g, prof);
    const double omega = branch_omega(opt.branch, opt.k, opt.medium);
    const int nsnap = 4;

    const int ne = static_cast<int>(opt.epsilons.size());
    std::vector<std::vector<std::string>> cell_fail(ne);
    // Each epsilon is an independent cell; results land in preallocated slots.
#pragma omp parallel for schedule(dynamic) if (ne > 1)
    for (int ie = 0; ie < ne; ++ie) {
        const double eps = opt.epsilons[ie];
        const double dt = opt.dt_factor * eps;
        const double horizon = opt.T / eps;
        std::vector<long> snap_steps;
        for (int j = 1; j <= nsnap; ++j) snap_steps.push_back(std::lround(horizon * j / nsnap / dt));

        WavePacketSpec spec;
        spec.envelope = u0;
        spec.carrier_k = opt.k;
        spec.branch = opt.branch;
        if (opt.polarization_defect != 0.0) {
            SpectralField r(g, 4);
            for (std::size_t i = 0; i < g.size(); ++i) r.at(1, i) = opt.polarization_defect * u0[i];
            spec.polarization_defect = r;
        }
        std::vector<SpectralField> ref, ref_phys;
        std::vector<double> snap_times;
        SpectralField initial_env;
        try {
            auto t0 = std::chrono::steady_clock::now();
            auto run_oracle = [&](double h, int refine, std::vector<SpectralField>* phys) {
                MaxwellState U = init_wave_packet(spec, opt.medium, eps, g);
                MaxwellStepper st(g, opt.medium, eps, h);
                std::vector<SpectralField> out;
                long done = 0;
                for (long target : snap_steps) {
                    for (; done < target * refine; ++done) st.step(U);
                    out.push_back(demodulate(U.u, opt.k, omega, U.time, eps));
                    if (phys) {
                        phys->push_back(U.u);
                        snap_times.push_back(U.time);
                    }
                }
                return out;
            };
            // Unfiltered lifted envelope, plus the defect when present.
            initial_env = lift_envelope(u0, opt.k, opt.branch, opt.medium, eps, g);
            if (spec.polarization_defect)
                for (std::size_t j = 0; j < initial_env.data.size(); ++j)
                    initial_env.data[j] += eps * spec.polarization_defect->data[j];
            ref = run_oracle(dt, 1, &ref_phys);
            rep.oracle_runtime[ie] = seconds_since(t0);
            if (opt.oracle_self_check) {
                const auto fine = run_oracle(0.5 * dt, 2, nullptr);
                double d = 0.0;
                for (int j = 0; j < nsnap; ++j) d = std::max(d, max_difference(ref[j], fine[j]));
                rep.oracle_self_error[ie] = d;
            }
        } catch (const std::exception& e) {
            cell_fail[ie].push_back("oracle eps=" + std::to_string(eps) + ": " + e.what());
            continue;
        }

        for (std::size_t im = 0; im < kinds.size(); ++im) {
            const auto t0 = std::chrono::steady_clock::now();
            try {
                ModelConfig cfg;
                cfg.model = kinds[im];
                cfg.epsilon = eps;
                if (rep.fit) cfg.fit = *rep.fit;
                EnvelopeSolver solver(g, cfg, opt.medium, opt.k, opt.branch, dt);
                EnvelopeState s;
                if (cfg.model == ModelKind::envelope_exact)
                    s = EnvelopeState{initial_env, std::nullopt, 0.0};
                else
                    s = make_envelope_state(g, cfg, u0);
                double err = 0.0, err_d = 0.0;
                long done = 0;
                for (int j = 0; j < nsnap; ++j) {
                    for (; done < snap_steps[j]; ++done) solver.step(s);
                    const SpectralField env = solver.lift_to_maxwell(s.u);
                    err_d = std::max(err_d, max_difference(ref[j], env));
                    err = std::max(err, max_difference(ref_phys[j], modulate(env, opt.k, omega, snap_times[j], eps)));
                }
                if (!std::isfinite(err) || !std::isfinite(err_d)) throw Error("non-finite error");
                rep.errors[opt.models[im]][ie] = err;
                rep.errors_demodulated[opt.models[im]][ie] = err_d;
            } catch (const std::exception& e) {
                rep.errors[opt.models[im]][ie] = std::numeric_limits<double>::quiet_NaN();
                rep.errors_demodulated[opt.models[im]][ie] = std::numeric_limits<double>::quiet_NaN();
                cell_fail[ie].push_back(opt.models[im] + " eps=" + std::to_string(eps) + ": " + e.what());
            }
            rep.runtime[opt.models[im]][ie] = seconds_since(t0);
        }
    }
    for (const auto& f : cell_fail) rep.failures.insert(rep.failures.end(), f.begin(), f.end());

    for (const auto& m : opt.models) {
        const auto& e = rep.errors[m];
        bool ok = opt.epsilons.size() >= 3;
        for (double v : e) ok = ok && std::isfinite(v) && v > 0.0;
        if (ok) rep.slopes[m] = loglog_slope(opt.epsilons, e);
        const auto& d = rep.errors_demodulated[m];
        ok = opt.epsilons.size() >= 3;
        for (double v : d) ok = ok && std::isfinite(v) && v > 0.0;
        if (ok) rep.slopes_demodulated[m] = loglog_slope(opt.epsilons, d);
    }
    return rep;
}

CompareOptions compare_from_config(const Config& c) {
    CompareOptions o;
    o.grid = grid_from_config(c, "grid");
    o.profile = profile_from_config(c);
    o.base = model_from_config(c, o.grid.dims);
    o.variants = c.get_strings("compare.variants", {to_string(o.base.model)});
    o.medium = medium_from_config(c);
    o.k0 = c.get_double("compare.k0", o.k0);
    o.branch = parse_branch(c.get_string("compare.branch", "++"));
    o.tau_final = c.get_double("compare.tau_final", o.tau_final);
    o.dt_tau = c.get_double("compare.dt", o.dt_tau);
    o.sample_every = c.get_int("compare.sample_every", o.sample_every);
    o.thresholds = thresholds_from_config(c);
    return o;
}

std::vector<CompareRow> compare_models(const CompareOptions& opt) {
    std::vector<CompareRow> rows(opt.variants.size());
    const std::vector<cplx> u0 = make_profile(opt.grid, opt.profile);
    for (std::size_t iv = 0; iv < opt.variants.size(); ++iv) {
        CompareRow& row = rows[iv];
        row.name = opt.variants[iv];
        const auto t0 = std::chrono::steady_clock::now();
        try {
            ModelConfig cfg = opt.base;
            const auto colon = row.name.find(':');
            cfg.model = parse_model(row.name.substr(0, colon));
            if (colon != std::string::npos) cfg.f_kind = parse_fkind(row.name.substr(colon + 1));
            const bool slow = uses_slow_time(cfg.model);
            const double dt = slow ? opt.dt_tau : opt.dt_tau / cfg.epsilon;
            const double tf = slow ? opt.tau_final : opt.tau_final / cfg.epsilon;
            std::optional<EnvelopeSolver> solver;
            if (is_dimensional(cfg.model))
                solver.emplace(opt.grid, cfg, opt.medium, opt.k0, opt.branch, dt);
            else
                solver.emplace(opt.grid, cfg, dt);
            EnvelopeState s = make_envelope_state(opt.grid, cfg, u0);
            RunOptions ro;
            ro.t_final = tf;
            ro.sample_every = opt.sample_every;
            ro.thresholds = opt.thresholds;
            row.report = run_envelope(s, *solver, ro);
        } catch (const std::exception& e) {
            row.error = e.what();
            row.report.status = RunStatus::aborted;
            row.report.message = e.what();
        }
        row.wall_time = seconds_since(t0);
    }
    return rows;
}

}  // namespace filament

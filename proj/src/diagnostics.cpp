#include "filament/diagnostics.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "filament/kernels.hpp"

namespace filament {

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

// Sum over modes of w(xi) |u_hat|^2 scaled so that w = 1 gives the mass.
double spectral_sum(const SpectralField& u, const std::function<double(std::size_t, const WaveVec&)>& w) {
    const SpectralField hat = to_fourier(u);
    const GridSpec& g = u.grid;
    const double scale = g.cell_volume() / static_cast<double>(g.size());
    double s = 0.0;
    for (int c = 0; c < u.components; ++c)
        for (std::size_t i = 0; i < g.size(); ++i) s += w(i, g.xi(i)) * std::norm(hat.at(c, i));
    return s * scale;
}

double pointwise_intensity(const SpectralField& u, std::size_t i) {
    double a = 0.0;
    for (int c = 0; c < u.components; ++c) a += std::norm(u.at(c, i));
    return a;
}

// F(I) = int_0^I s (1 + f(eps^r s)) ds
double family_potential(double I, FKind f, double s) {
    switch (f) {
        case FKind::zero: return 0.5 * I * I;
        case FKind::quintic: return 0.5 * I * I - s * I * I * I / 3.0;
        case FKind::saturated: return s > 0.0 ? I / s - std::log1p(s * I) / (s * s) : 0.5 * I * I;
    }
    return 0.0;
}

}  // namespace

double mass(const EnvelopeState& s) {
    const double n = l2_norm(s.u);
    return n * n;
}

double mass_spectral(const EnvelopeState& s) {
    return spectral_sum(s.u, [](std::size_t, const WaveVec&) { return 1.0; });
}

std::vector<double> momentum(const EnvelopeState& s) {
    std::vector<double> p(s.u.grid.dims, 0.0);
    for (int d = 0; d < s.u.grid.dims; ++d)
        p[d] = spectral_sum(s.u, [d](std::size_t, const WaveVec& xi) { return xi[d]; });
    return p;
}

double grad_norm(const EnvelopeState& s) {
    return std::sqrt(spectral_sum(s.u, [](std::size_t, const WaveVec& xi) { return xi[0] * xi[0] + xi[1] * xi[1]; }));
}

double h1_norm(const EnvelopeState& s) {
    const double g = grad_norm(s);
    return std::sqrt(mass(s) + g * g);
}

double quadratic_form_p2(const EnvelopeState& s, const FitResult& fit, double epsilon) {
    return spectral_sum(s.u, [&](std::size_t, const WaveVec& xi) { return p2_symbol(xi, fit, epsilon); });
}

double energy(const EnvelopeState& s, const ModelConfig& cfg) {
    const GridSpec& g = s.u.grid;
    const int zd = g.z_dim();
    const ModelKind mk = cfg.model;
    if (mk != ModelKind::family_scalar && mk != ModelKind::family_vect)
        throw Error("energy: no normalized energy for model " + to_string(mk));
    const double kin = spectral_sum(s.u, [&](std::size_t, const WaveVec& xi) {
        const double perp = g.dims == 2 ? xi[0] * xi[0] : 0.0;
        return perp + cfg.alpha1 * xi[zd] * xi[zd];
    });
    double pot = 0.0;
    const double sr = std::pow(cfg.epsilon, cfg.r);
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (mk == ModelKind::family_vect) {
            const cplx a = s.u.at(0, i), b = s.u.at(1, i);
            const double I = std::norm(a) + std::norm(b);
            pot += std::norm(a * a + b * b) / 6.0 + I * I / 3.0;
        } else {
            pot += family_potential(std::norm(s.u.at(0, i)), cfg.f_kind, sr);
        }
    }
    pot *= g.cell_volume();
    return 0.5 * (kin - pot);
}

double energy(const EnvelopeState& s, const EnvelopeSolver& solver) {
    const ModelKind mk = solver.config().model;
    switch (mk) {
        case ModelKind::family_scalar:
        case ModelKind::family_vect: return energy(s, solver.config());
        case ModelKind::nls:
        case ModelKind::nls_improved:
        case ModelKind::nls_polarized: {
            const auto& lam = solver.dispersion_symbol();
            const auto& p2 = solver.p2_values();
            const double kin = spectral_sum(s.u, [&](std::size_t i, const WaveVec&) { return p2[i] * lam[i]; });
            double pot = 0.0;
            for (std::size_t i = 0; i < s.u.points(); ++i)
                pot += solver.dimensional_potential(pointwise_intensity(s.u, i));
            pot *= s.u.grid.cell_volume();
            return 0.5 * (kin - pot);
        }
        default: return kNaN;
    }
}

double h1_bound_cq(double mass0, double energy0, double epsilon, double r) {
    if (!(epsilon > 0.0) || !(r > 0.0)) throw Error("h1_bound_cq: epsilon and r must be > 0");
    const double rad = 2.0 * energy0 + (1.0 + 3.0 / (16.0 * std::pow(epsilon, r))) * mass0;
    if (rad < 0.0) throw Error("h1_bound_cq: negative radicand, inconsistent mass/energy inputs");
    return std::sqrt(rad);
}

std::string to_string(RunStatus s) {
    switch (s) {
        case RunStatus::completed: return "completed";
        case RunStatus::blowup_suspected: return "blowup_suspected";
        case RunStatus::aborted: return "aborted";
    }
    return "?";
}

RunStatus parse_status(const std::string& s) {
    for (RunStatus r : {RunStatus::completed, RunStatus::blowup_suspected, RunStatus::aborted})
        if (to_string(r) == s) return r;
    throw Error("unknown run status '" + s + "'");
}

SeriesRow sample(const EnvelopeState& s, const EnvelopeSolver& solver) {
    SeriesRow row;
    row.t = s.time;
    row.mass = mass(s);
    row.energy = energy(s, solver);
    row.momentum = momentum(s);
    row.max_abs = 0.0;
    for (std::size_t i = 0; i < s.u.points(); ++i) row.max_abs = std::max(row.max_abs, std::sqrt(pointwise_intensity(s.u, i)));
    row.grad_norm = grad_norm(s);
    row.max_rho = 0.0;
    if (s.density)
        for (double r : *s.density) row.max_rho = std::max(row.max_rho, r);
    return row;
}

RunStatus blowup_detect(const RunReport& r) {
    if (r.series.empty()) throw Error("blowup_detect: empty series");
    const SeriesRow& first = r.series.front();
    for (const auto& row : r.series) {
        if (!std::isfinite(row.grad_norm) || !std::isfinite(row.max_abs)) return RunStatus::blowup_suspected;
        if (row.grad_norm > r.thresholds.grad_growth * first.grad_norm) return RunStatus::blowup_suspected;
        if (row.max_abs > r.thresholds.amplitude_growth * first.max_abs) return RunStatus::blowup_suspected;
    }
    return RunStatus::completed;
}

void compute_drifts(RunReport& r) {
    r.drift.clear();
    if (r.series.empty()) return;
    auto rel = [&](const std::function<double(const SeriesRow&)>& get) {
        const double x0 = get(r.series.front());
        if (!std::isfinite(x0)) return kNaN;
        double worst = 0.0;
        for (const auto& row : r.series) worst = std::max(worst, std::abs(get(row) - x0));
        return std::abs(x0) > 1e-300 ? worst / std::abs(x0) : worst;
    };
    r.drift["mass"] = rel([](const SeriesRow& s) { return s.mass; });
    r.drift["energy"] = rel([](const SeriesRow& s) { return s.energy; });
    const std::size_t nd = r.series.front().momentum.size();
    for (std::size_t d = 0; d < nd; ++d) {
        // Momentum often starts at zero; report the drift scaled by the mass.
        const double m0 = std::max(r.series.front().mass, 1e-300);
        double worst = 0.0;
        for (const auto& row : r.series)
            if (d < row.momentum.size())
                worst = std::max(worst, std::abs(row.momentum[d] - r.series.front().momentum[d]));
        r.drift["momentum_" + std::to_string(d)] = worst / m0;
    }
}

RunReport run_envelope(EnvelopeState& s, const EnvelopeSolver& solver, const RunOptions& opt) {
    RunReport rep;
    rep.thresholds = opt.thresholds;
    const double dt = solver.dt();
    const long nsteps = std::max<long>(0, std::lround(opt.t_final / dt));
    const int every = std::max(1, opt.sample_every);
    rep.series.push_back(sample(s, solver));
    if (opt.on_sample) opt.on_sample(s, 0);
    const double amp0 = rep.series.front().max_abs;
    const double grad0 = rep.series.front().grad_norm;
    std::vector<std::pair<double, double>> history;
    history.emplace_back(s.time, amp0);
    for (long k = 1; k <= nsteps; ++k) {
        solver.step(s);
        ++rep.steps;
        double amp = 0.0;
        bool finite = true;
        for (const auto& v : s.u.data) {
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
                finite = false;
                break;
            }
            amp = std::max(amp, std::abs(v));
        }
        if (history.size() >= 8) history.erase(history.begin());
        history.emplace_back(s.time, amp);
        if (!finite) {
            std::ostringstream os;
            os << "non-finite field at t = " << s.time << "; recent max|u|:";
            for (const auto& h : history) os << " (" << h.first << ", " << h.second << ")";
            rep.status = RunStatus::aborted;
            rep.message = os.str();
            break;
        }
        const bool last = k == nsteps;
        const bool amp_cross = amp > opt.thresholds.amplitude_growth * amp0;
        if (k % every == 0 || last || amp_cross) {
            SeriesRow row = sample(s, solver);
            rep.series.push_back(row);
            if (opt.on_sample) opt.on_sample(s, k);
            if (amp_cross || row.grad_norm > opt.thresholds.grad_growth * grad0) {
                std::ostringstream os;
                os << "threshold crossed at t = " << row.t << ": grad_norm/initial = " << row.grad_norm / grad0
                   << ", max|u|/initial = " << row.max_abs / amp0;
                rep.status = RunStatus::blowup_suspected;
                rep.message = os.str();
                break;
            }
        }
    }
    rep.t_final = s.time;
    compute_drifts(rep);
    return rep;
}

void write_series_csv(const std::string& path, const RunReport& r) {
    std::ofstream f(path);
    if (!f) throw Error("cannot write " + path);
    const std::size_t nd = r.series.empty() ? 0 : r.series.front().momentum.size();
    f << "t,mass,energy";
    for (std::size_t d = 0; d < nd; ++d) f << ",momentum_" << d;
    f << ",max_abs,grad_norm,max_rho\n";
    f.precision(17);
    for (const auto& row : r.series) {
        f << row.t << ',' << row.mass << ',' << row.energy;
        for (std::size_t d = 0; d < nd; ++d) f << ',' << (d < row.momentum.size() ? row.momentum[d] : 0.0);
        f << ',' << row.max_abs << ',' << row.grad_norm << ',' << row.max_rho << '\n';
    }
}

RunReport read_series_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error("cannot read " + path);
    std::string line;
    if (!std::getline(f, line)) throw Error("empty series file " + path);
    std::vector<std::string> head;
    {
        std::stringstream ss(line);
        std::string c;
        while (std::getline(ss, c, ',')) head.push_back(c);
    }
    auto col = [&](const std::string& name) {
        for (std::size_t i = 0; i < head.size(); ++i)
            if (head[i] == name) return static_cast<int>(i);
        return -1;
    };
    const int ct = col("t"), cm = col("mass"), ce = col("energy"), ca = col("max_abs"), cg = col("grad_norm"),
              cr = col("max_rho");
    if (ct < 0 || cm < 0) throw Error("series file lacks t/mass columns: " + path);
    std::vector<int> cmom;
    for (int d = 0; col("momentum_" + std::to_string(d)) >= 0; ++d) cmom.push_back(col("momentum_" + std::to_string(d)));
    RunReport r;
    int lineno = 1;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<double> v;
        std::stringstream ss(line);
        std::string c;
        while (std::getline(ss, c, ',')) {
            try {
                v.push_back(c == "nan" || c == "-nan" ? kNaN : std::stod(c));
            } catch (const std::exception&) {
                throw Error("bad number '" + c + "' at line " + std::to_string(lineno) + " of " + path);
            }
        }
        if (v.size() != head.size()) throw Error("column count mismatch at line " + std::to_string(lineno));
        SeriesRow row;
        row.t = v[ct];
        row.mass = v[cm];
        row.energy = ce >= 0 ? v[ce] : kNaN;
        for (int c2 : cmom) row.momentum.push_back(v[c2]);
        row.max_abs = ca >= 0 ? v[ca] : 0.0;
        row.grad_norm = cg >= 0 ? v[cg] : 0.0;
        row.max_rho = cr >= 0 ? v[cr] : 0.0;
        if (!r.series.empty() && !(row.t > r.series.back().t))
            throw Error("series times are not strictly increasing at line " + std::to_string(lineno));
        r.series.push_back(row);
    }
    if (r.series.empty()) throw Error("series file has no rows: " + path);
    r.t_final = r.series.back().t;
    compute_drifts(r);
    r.status = blowup_detect(r);
    return r;
}

}  // namespace filament

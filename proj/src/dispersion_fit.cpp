#include "filament/dispersion_fit.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

namespace filament {

HypCheck check_hyp(const Eigen::VectorXd& b, const Eigen::MatrixXd& B) {
    const int d = static_cast<int>(b.size());
    if (B.rows() != d || B.cols() != d) return {false, "shape mismatch between b and B"};
    const double scale = std::max(1.0, B.cwiseAbs().maxCoeff());
    if ((B - B.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) return {false, "B is not symmetric"};
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (B + B.transpose()));
    const double tol = 1e-12 * scale;
    if (es.eigenvalues().minCoeff() < -tol) return {false, "B is not positive semidefinite"};
    // Pseudo-inverse quadratic form and range test in the eigenbasis.
    const Eigen::VectorXd c = es.eigenvectors().transpose() * b;
    double form = 0.0;
    for (int i = 0; i < d; ++i) {
        const double lam = es.eigenvalues()(i);
        if (lam > tol) {
            form += c(i) * c(i) / lam;
        } else if (std::abs(c(i)) > 1e-12 * std::max(1.0, b.norm())) {
            return {false, "b is not in Range(B)"};
        }
    }
    if (!(4.0 - form > 0.0)) return {false, "4 - b.(B^- b) <= 0"};
    return {true, ""};
}

std::vector<WaveVec> fit_window(double k0, double half_width, int dims, int points) {
    std::vector<WaveVec> w;
    if (points < 2) points = 2;
    if (dims == 1) {
        for (int i = 0; i < points; ++i) w.push_back({k0 - half_width + 2.0 * half_width * i / (points - 1), 0.0});
        return w;
    }
    for (int i = 0; i < points; ++i)
        for (int j = 0; j < points; ++j)
            w.push_back({-half_width + 2.0 * half_width * i / (points - 1),
                         k0 - half_width + 2.0 * half_width * j / (points - 1)});
    return w;
}

namespace {

// Shares the rational evaluation with omega_imp but hoists the branch data.
struct Evaluator {
    int dims;
    double k0;
    Derivatives d;
    std::vector<WaveVec> deltas;
    std::vector<double> exact_minus_base;

    Evaluator(const BranchId& br, double k0_, const MediumParams& m, int dims_, const std::vector<WaveVec>& window)
        : dims(dims_), k0(k0_), d(group_velocity_and_gvd(br, k0_, m)) {
        for (const auto& k : window) {
            WaveVec del = dims == 1 ? WaveVec{k[0] - k0, 0.0} : WaveVec{k[0], k[1] - k0};
            deltas.push_back(del);
            exact_minus_base.push_back(omega_exact(br, k, dims, m) - d.omega);
        }
    }

    double sup(const FitResult& f) const {
        double worst = 0.0;
        const int zd = dims - 1;
        for (std::size_t i = 0; i < deltas.size(); ++i) {
            const WaveVec& del = deltas[i];
            const double cg = d.d1 * del[zd];
            const double quad = dims == 1 ? d.d2 * del[0] * del[0]
                                          : d.d1 / k0 * del[0] * del[0] + d.d2 * del[1] * del[1];
            double bd = 0.0;
            for (int j = 0; j < dims; ++j) bd += f.b(j) * del[j];
            const double den = f.denominator(del);
            if (!(den > 0.0)) return std::numeric_limits<double>::infinity();
            const double val = (cg + 0.5 * quad + cg * bd - f.c3(del)) / den;
            worst = std::max(worst, std::abs(val - exact_minus_base[i]));
        }
        return worst;
    }
};

FitResult make_fit(int dims, double bz, double Bzz, double Bxx, double omega_prime) {
    FitResult f = FitResult::zero(dims);
    f.b(dims - 1) = bz;
    f.B(dims - 1, dims - 1) = Bzz;
    if (dims == 2) f.B(0, 0) = Bxx;
    f.C3 = tied_c3(f.B, omega_prime, dims);
    return f;
}

struct Candidate {
    double err = std::numeric_limits<double>::infinity();
    double bz = 0.0, lBzz = 0.0, lBxx = 0.0;
    bool zero = true;
};

bool better(const Candidate& a, const Candidate& b) {
    if (a.err != b.err) return a.err < b.err;
    if (a.bz != b.bz) return a.bz < b.bz;
    if (a.lBzz != b.lBzz) return a.lBzz < b.lBzz;
    return a.lBxx < b.lBxx;
}

}  // namespace

double window_sup_error(const FitResult& fit, const BranchId& branch, const MediumParams& m,
                        const std::vector<WaveVec>& window) {
    double worst = 0.0;
    for (const auto& k : window) {
        const double e = std::abs(omega_imp(k, fit.dims, fit.k0, branch, fit, m) - omega_exact(branch, k, fit.dims, m));
        worst = std::max(worst, e);
    }
    return worst;
}

double window_sup_error_nls(double k0, const BranchId& branch, const MediumParams& m, int dims,
                            const std::vector<WaveVec>& window) {
    double worst = 0.0;
    for (const auto& k : window)
        worst = std::max(worst, std::abs(omega_nls(k, dims, k0, branch, m) - omega_exact(branch, k, dims, m)));
    return worst;
}

FitResult fit_improved(const BranchId& branch, double k0, double half_width, const MediumParams& m, int dims,
                       const FitOptions& opt) {
    if (dims != 1 && dims != 2) throw Error("fit_improved: dims must be 1 or 2");
    if (!branch.is_curved()) throw Error("fit_improved: curved branch required");
    if (!(k0 > 0.0) || !(half_width >= 0.0)) throw Error("fit_improved: need k0 > 0 and half_width >= 0");
    m.validate();

    const auto window = fit_window(k0, half_width, dims, dims == 1 ? opt.window_points : 41);
    for (const auto& k : window) {
        const double w = omega_exact(branch, k, dims, m);
        if (std::abs(w * w - m.omega0 * m.omega0) < 1e-8) throw Error("fit_improved: window touches the resonance");
    }
    const Evaluator ev(branch, k0, m, dims, window);
    const double wp = ev.d.d1;

    const double lmin = std::log(opt.B_min), lmax = std::log(opt.B_max);
    auto bval = [&](int i) { return opt.grid_b > 1 ? opt.b_max * i / (opt.grid_b - 1) : 0.0; };
    auto lval = [&](int j) { return opt.grid_B > 1 ? lmin + (lmax - lmin) * j / (opt.grid_B - 1) : lmin; };

    auto evaluate = [&](double bz, double lBzz, double lBxx) {
        Candidate c{std::numeric_limits<double>::infinity(), bz, lBzz, lBxx, false};
        const FitResult f = make_fit(dims, bz, std::exp(lBzz), std::exp(lBxx), wp);
        if (!check_hyp(f.b, f.B).ok) return c;
        c.err = ev.sup(f);
        return c;
    };

    // Axis window for the (b, Bzz) stage in 2D.
    const auto axis_window = fit_window(k0, half_width, 1, opt.window_points);
    Evaluator axis_ev(branch, k0, m, 1, axis_window);
    auto evaluate_axis = [&](double bz, double lBzz) {
        Candidate c{std::numeric_limits<double>::infinity(), bz, lBzz, 0.0, false};
        const FitResult f = make_fit(1, bz, std::exp(lBzz), 0.0, wp);
        if (!check_hyp(f.b, f.B).ok) return c;
        c.err = axis_ev.sup(f);
        return c;
    };

    Candidate best;
    {
        const int nb = opt.grid_b, nB = opt.grid_B;
        std::vector<Candidate> row_best(nb);
#pragma omp parallel for schedule(dynamic)
        for (int i = 0; i < nb; ++i) {
            Candidate rb;
            for (int j = 0; j < nB; ++j) {
                const Candidate c = dims == 1 ? evaluate(bval(i), lval(j), 0.0) : evaluate_axis(bval(i), lval(j));
                if (better(c, rb)) rb = c;
            }
            row_best[i] = rb;
        }
        for (const auto& c : row_best)
            if (better(c, best)) best = c;
    }

    if (dims == 2 && !best.zero) {
        Candidate b2;
        for (int j = 0; j < opt.grid_B; ++j) {
            const Candidate c = evaluate(best.bz, best.lBzz, lval(j));
            if (better(c, b2)) b2 = c;
        }
        best = b2;
    }

    if (opt.refine && !best.zero && std::isfinite(best.err)) {
        double sb = opt.grid_b > 1 ? opt.b_max / (opt.grid_b - 1) : 0.1;
        double sl = opt.grid_B > 1 ? (lmax - lmin) / (opt.grid_B - 1) : 0.1;
        double sx = dims == 2 ? sl : 0.0;
        for (int it = 0; it < 60; ++it) {
            bool improved = false;
            const double moves[6][3] = {{sb, 0, 0}, {-sb, 0, 0}, {0, sl, 0}, {0, -sl, 0}, {0, 0, sx}, {0, 0, -sx}};
            for (const auto& mv : moves) {
                if (mv[0] == 0 && mv[1] == 0 && mv[2] == 0) continue;
                const Candidate c = evaluate(best.bz + mv[0], best.lBzz + mv[1], best.lBxx + mv[2]);
                if (c.err < best.err) {
                    best = c;
                    improved = true;
                }
            }
            if (!improved) {
                sb *= 0.5;
                sl *= 0.5;
                sx *= 0.5;
                if (sb < 1e-10 && sl < 1e-10) break;
            }
        }
    }

    FitResult out = FitResult::zero(dims);
    const double nls_err = ev.sup(out);
    if (!best.zero && std::isfinite(best.err) && best.err <= nls_err)
        out = make_fit(dims, best.bz, std::exp(best.lBzz), std::exp(best.lBxx), wp);
    out.k0 = k0;
    out.half_width = half_width;
    out.sup_error = ev.sup(out);
    out.nls_sup_error = nls_err;
    return out;
}

}  // namespace filament

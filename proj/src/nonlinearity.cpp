#include "filament/nonlinearity.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>

namespace filament {

std::string to_string(FKind f) {
    switch (f) {
        case FKind::zero: return "zero";
        case FKind::quintic: return "quintic";
        case FKind::saturated: return "saturated";
    }
    return "zero";
}

FKind parse_fkind(const std::string& s) {
    if (s == "zero" || s == "cubic") return FKind::zero;
    if (s == "quintic" || s == "cubic_quintic") return FKind::quintic;
    if (s == "saturated") return FKind::saturated;
    throw Error("unknown f_kind: " + s);
}

KerrShape kerr_shape(FKind f) {
    switch (f) {
        case FKind::zero: return KerrShape::cubic;
        case FKind::quintic: return KerrShape::quintic;
        case FKind::saturated: return KerrShape::saturated;
    }
    return KerrShape::cubic;
}

CVec filter_first_harmonic(const CVec& u, const std::function<RVec(const RVec&)>& F, int points) {
    CVec acc = CVec::Zero(u.size());
    for (int j = 0; j < points; ++j) {
        const double th = 2.0 * std::numbers::pi * j / points;
        const cplx e(std::cos(th), std::sin(th));
        const RVec w = 2.0 * (u * e).real();
        const RVec f = F(w);
        acc += std::conj(e) * f.cast<cplx>();
    }
    return acc / static_cast<double>(points);
}

CVec fenv_cubic(const CVec& u) {
    const cplx uu = (u.transpose() * u)(0, 0);
    const double n2 = u.squaredNorm();
    return uu * u.conjugate() + 2.0 * n2 * u;
}

CVec fenv_general(const CVec& u, FKind f_kind, double r, double epsilon) {
    if (f_kind == FKind::zero) return fenv_cubic(u);
    const double s = std::pow(epsilon, r);
    const KerrShape shape = kerr_shape(f_kind);
    return filter_first_harmonic(u, [&](const RVec& w) -> RVec {
        const double I = w.squaredNorm();
        return kernels::kerr_rate(I, s, shape) * w;
    });
}

CVec genv(const CVec& u, double w, const IonizationParams& io) {
    if (io.K < 1) throw Error("genv: K must be >= 1");
    if (io.K == 1) return io.c1 * u + io.c2 * w * u;
    if (io.K == 2) return io.c1 * fenv_cubic(u) + io.c2 * w * u;
    const int K = io.K;
    CVec g = filter_first_harmonic(u, [&](const RVec& E) -> RVec {
        const double e2 = E.squaredNorm();
        return io.c1 * std::pow(e2, K - 1) * E;
    });
    return g + io.c2 * w * u;
}

namespace {
double binom(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

double expansion(const CVec& u, double w, const IonizationParams& io, bool printed) {
    const int K = io.K;
    const double a = 2.0 * u.squaredNorm();
    const double uu2 = std::norm((u.transpose() * u)(0, 0));
    double s = std::pow(a, K);
    for (int k = 1; 2 * k <= K; ++k) {
        const double weight = printed ? 2.0 * binom(K - 1, k) * binom(K - k, k) : binom(K, k) * binom(K - k, k);
        s += weight * std::pow(a, K - 2 * k) * std::pow(uu2, k);
    }
    return io.c1 * s + 2.0 * io.c2 * w * u.squaredNorm();
}
}  // namespace

double genv_power_expansion(const CVec& u, double w, const IonizationParams& io) { return expansion(u, w, io, false); }

double genv_power_expansion_printed(const CVec& u, double w, const IonizationParams& io) {
    return expansion(u, w, io, true);
}

namespace {
double medium_strength(const MediumParams& m, double epsilon) {
    return m.a_tilde * m.gamma / (m.omega0 * m.omega0) * std::pow(epsilon, m.r);
}

double medium_factor(double x, NonlinearityKind kind) {
    switch (kind) {
        case NonlinearityKind::cubic: return 1.0;
        case NonlinearityKind::cubic_quintic: return 1.0 - x;
        case NonlinearityKind::saturated: {
            const double d = 1.0 + 2.0 * x / 3.0;
            return (1.0 + x / 3.0) / (d * d);
        }
    }
    return 1.0;
}
}  // namespace

RVec medium_nonlinearity(const RVec& p, const MediumParams& m, double epsilon) {
    const double s = medium_strength(m, epsilon);
    const double p2 = p.squaredNorm();
    const double pre = m.gamma / (m.omega0 * m.omega0 * m.omega0);
    return pre * medium_factor(s * p2, m.nonlinearity) * p2 * p;
}

double medium_envelope_factor(double q, const MediumParams& m, double epsilon) {
    const double pre = m.gamma / (m.omega0 * m.omega0 * m.omega0);
    const double s = medium_strength(m, epsilon);
    switch (m.nonlinearity) {
        case NonlinearityKind::cubic: return pre * 3.0 * q;
        case NonlinearityKind::cubic_quintic: return pre * (3.0 * q - 10.0 * s * q * q);
        case NonlinearityKind::saturated: {
            if (q <= 0.0) return 0.0;
            const double a = std::sqrt(q);
            const int pts = 128;
            double acc = 0.0;
            for (int j = 0; j < pts; ++j) {
                const double c = std::cos(2.0 * std::numbers::pi * j / pts);
                const double w = 2.0 * a * c;
                acc += c * pre * medium_factor(s * w * w, m.nonlinearity) * w * w * w;
            }
            return acc / pts / a;
        }
    }
    return 0.0;
}

double medium_envelope_potential(double intensity, double beta, const MediumParams& m, double epsilon) {
    const double pre = m.gamma / (m.omega0 * m.omega0 * m.omega0);
    const double b2 = beta * beta;
    const double s = medium_strength(m, epsilon);
    const double I = intensity;
    switch (m.nonlinearity) {
        case NonlinearityKind::cubic: return pre * 1.5 * b2 * I * I;
        case NonlinearityKind::cubic_quintic: return pre * (1.5 * b2 * I * I - 10.0 / 3.0 * s * b2 * b2 * I * I * I);
        case NonlinearityKind::saturated:
            if (I <= 0.0) return 0.0;
            return boost::math::quadrature::gauss<double, 30>::integrate(
                [&](double x) { return medium_envelope_factor(b2 * x, m, epsilon); }, 0.0, I);
    }
    return 0.0;
}

}  // namespace filament

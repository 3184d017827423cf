#include "doctest.h"

#include <cmath>
#include <numbers>

#include "filament/maxwell.hpp"

using namespace filament;

namespace {

constexpr double kPi = std::numbers::pi;

GridSpec grid_1d(int n = 512) { return make_grid(1, {n}, {6 * kPi}); }

std::vector<cplx> gaussian(const GridSpec& g, double a, double w) {
    std::vector<cplx> u(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double z = g.position(i)[0];
        u[i] = a * std::exp(-z * z / (w * w));
    }
    return u;
}

MaxwellState packet(const MediumParams& m, double eps, const GridSpec& g, double amp = 0.5) {
    WavePacketSpec spec;
    spec.envelope = gaussian(g, amp, 1.0);
    spec.carrier_k = 2.0;
    return init_wave_packet(spec, m, eps, g);
}

double max_diff(const SpectralField& a, const SpectralField& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) m = std::max(m, std::abs(a.data[i] - b.data[i]));
    return m;
}

}  // namespace

TEST_CASE("Hilbert symbol values") {
    CHECK(std::abs(hilbert_symbol(0.0)) == 0.0);
    CHECK(std::abs(hilbert_symbol(1.0) - cplx(0.0, 1.0)) < 1e-15);
    CHECK(std::abs(hilbert_symbol(1e9) - cplx(0.0, std::sqrt(2.0))) < 1e-9);
}

TEST_CASE("medium nonlinearity examples") {
    MediumParams m;
    Eigen::VectorXd p(3);
    p << 1.0, 0.0, 0.0;
    Eigen::VectorXd out = nonlinearity_eval(p, m, 0.1);
    CHECK((out - p).norm() < 1e-15);

    m.nonlinearity = NonlinearityKind::cubic_quintic;
    m.r = 1.0;
    m.a_tilde = 1.0 / 0.1;  // a_tilde eps^r = 1
    CHECK(nonlinearity_eval(p, m, 0.1).norm() < 1e-15);

    m.nonlinearity = NonlinearityKind::saturated;
    double sup = 0.0;
    for (double a = 0.0; a <= 1e3; a += 0.5) {
        p << a, 0.0, 0.0;
        sup = std::max(sup, nonlinearity_eval(p, m, 0.1).norm() / std::max(a, 1e-300));
    }
    CHECK(std::isfinite(sup));
    CHECK(sup <= 1.0 / (m.a_tilde * 0.1) + 1e-12);
}

TEST_CASE("carrier must sit on the lattice") {
    const GridSpec g = grid_1d();
    CHECK_NOTHROW(check_carrier_on_lattice(2.0, 0.1, g));
    CHECK_THROWS_AS(check_carrier_on_lattice(2.0, 0.07, g), Error);
}

TEST_CASE("wave packet initialization") {
    const MediumParams m;
    const GridSpec g = grid_1d(1024);
    WavePacketSpec zero;
    zero.envelope.assign(g.size(), 0.0);
    zero.carrier_k = 2.0;
    CHECK(max_abs(init_wave_packet(zero, m, 0.1, g).u) == 0.0);

    const MaxwellState s = packet(m, 0.1, g);
    CHECK(max_imag_residue(s) < 1e-14);
    const double peak = max_abs(s.u);
    for (int c = 0; c < 4; ++c) CHECK(std::abs(s.u.at(c, 0)) < 1e-8 * peak);
    CHECK_FALSE(s.rho.has_value());

    // Demodulation returns the per-mode polarized lift.
    const double w = branch_omega(BranchId::curved(1, 1), 2.0, m);
    const SpectralField env = demodulate(s.u, 2.0, w, 0.0, 0.1);
    const SpectralField lift = lift_envelope(gaussian(g, 0.5, 1.0), 2.0, BranchId::curved(1, 1), m, 0.1, g);
    CHECK(max_diff(env, lift) < 1e-9);
}

TEST_CASE("zero state is an equilibrium") {
    const MediumParams m;
    const GridSpec g = grid_1d(64);
    MaxwellState s;
    s.u = SpectralField(g, 4);
    s.epsilon = 0.1;
    const MaxwellStepper st(g, m, 0.1, 0.01);
    for (int i = 0; i < 10; ++i) st.step(s);
    CHECK(max_abs(s.u) == 0.0);
    CHECK(s.time == doctest::Approx(0.1));
}

TEST_CASE("linear flow is exact for any step size") {
    const MediumParams m;
    const double eps = 0.1;
    const GridSpec g = grid_1d(128);
    const BranchId b = BranchId::curved(1, 1);
    const double xi = 20.0;  // k = eps xi = 2
    const double w = branch_omega(b, eps * xi, m);
    const Vec4 v = polarization_lift_1d(w, eps * xi, m);
    MaxwellState s;
    s.epsilon = eps;
    s.u = SpectralField(g, 4);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const cplx ph = std::exp(cplx(0.0, xi * g.position(i)[0]));
        for (int c = 0; c < 4; ++c) s.u.at(c, i) = 1e-8 * (v(c) * ph + std::conj(v(c) * ph));
    }
    MaxwellOptions opt;
    opt.nonlinear = false;
    const double dt = 0.37;
    const MaxwellStepper st(g, m, eps, dt, opt);
    st.step(s);
    double err = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const cplx ph = std::exp(cplx(0.0, xi * g.position(i)[0] - w * dt / eps));
        for (int c = 0; c < 4; ++c)
            err = std::max(err, std::abs(s.u.at(c, i) - 1e-8 * (v(c) * ph + std::conj(v(c) * ph))));
    }
    CHECK(err < 1e-10 * 1e-8);
}

TEST_CASE("energy and reality over 1000 steps") {
    const MediumParams m;
    const GridSpec g = grid_1d(512);
    MaxwellState s = packet(m, 0.1, g);
    const MaxwellStepper st(g, m, 0.1, 0.0125);
    const double e0 = maxwell_energy(s, m);
    const double scale = max_abs(s.u);
    for (int i = 0; i < 1000; ++i) st.step(s);
    CHECK(std::abs(maxwell_energy(s, m) - e0) / std::abs(e0) < 1e-8);
    CHECK(max_imag_residue(s) < 1e-10 * scale);
}

TEST_CASE("L2 norm over 1000 steps") {
    const MediumParams m;
    const GridSpec g = grid_1d(512);
    MaxwellState s = packet(m, 0.1, g);
    const MaxwellStepper st(g, m, 0.1, 0.0125);
    const double l2 = maxwell_l2(s);
    for (int i = 0; i < 1000; ++i) st.step(s);
    CHECK(std::abs(maxwell_l2(s) - l2) / l2 < 1e-8);
}

TEST_CASE("Strang splitting is second order") {
    MediumParams m;
    m.omega1 = 1.0;
    const GridSpec g = grid_1d(256);
    const double eps = 0.2, T = 1.0;
    auto run = [&](double dt) {
        MaxwellState s = packet(m, eps, g, 1.0);
        const MaxwellStepper st(g, m, eps, dt);
        const long n = std::lround(T / dt);
        for (long i = 0; i < n; ++i) st.step(s);
        return s;
    };
    const double dt = 0.05;
    const MaxwellState ref = run(dt / 16);
    const double e1 = max_diff(run(dt).u, ref.u);
    const double e2 = max_diff(run(dt / 2).u, ref.u);
    const double order = std::log2(e1 / e2);
    CHECK(order > 1.8);
    CHECK(order < 2.2);
}

TEST_CASE("ionization keeps the density nonnegative and nondecreasing") {
    MediumParams m;
    IonizationParams io;
    io.c0 = 0.5;
    io.c1 = 0.3;
    io.c2 = 0.2;
    io.K = 2;
    m.ionization = io;
    const GridSpec g = grid_1d(256);
    MaxwellState s = packet(m, 0.1, g);
    REQUIRE(s.rho.has_value());
    MaxwellOptions opt;
    opt.carrier_k = 2.0;
    const MaxwellStepper st(g, m, 0.1, 0.0125, opt);
    std::vector<double> prev = *s.rho;
    bool monotone = true;
    for (int i = 0; i < 200; ++i) {
        st.step(s);
        for (std::size_t j = 0; j < prev.size(); ++j) monotone = monotone && (*s.rho)[j] >= prev[j] && (*s.rho)[j] >= 0.0;
        prev = *s.rho;
    }
    CHECK(monotone);
    double mx = 0.0;
    for (double r : prev) mx = std::max(mx, r);
    CHECK(mx > 0.0);

    MaxwellState z;
    z.epsilon = 0.1;
    z.u = SpectralField(g, 4);
    z.rho = std::vector<double>(g.size(), 0.25);
    st.step(z);
    for (double r : *z.rho) CHECK(r == 0.25);
}

TEST_CASE("ionization damping alone does not increase the field") {
    MediumParams m;
    IonizationParams io;
    io.c0 = 1.0;
    io.c1 = 0.5;
    io.c2 = 0.5;
    io.K = 2;
    m.ionization = io;
    const GridSpec g = grid_1d(256);
    MaxwellState s = packet(m, 0.1, g, 1.0);
    MaxwellOptions opt;
    opt.linear = false;
    opt.hilbert = false;
    opt.carrier_k = 2.0;
    const MaxwellStepper st(g, m, 0.1, 0.01, opt);
    auto e_l2 = [&]() {
        double sum = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) sum += std::norm(s.u.at(1, i));
        return sum;
    };
    double prev = e_l2();
    bool ok = true;
    for (int i = 0; i < 100; ++i) {
        st.step(s);
        const double cur = e_l2();
        ok = ok && cur <= prev * (1 + 1e-14);
        prev = cur;
    }
    CHECK(ok);
}

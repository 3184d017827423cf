#include "doctest.h"

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "filament/grid.hpp"
#include "filament/kernels.hpp"

using namespace filament;

namespace {

std::vector<cplx> random_field(std::size_t n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d;
    std::vector<cplx> v(n);
    for (auto& x : v) x = cplx(d(rng), d(rng));
    return v;
}

double max_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST_CASE("grid construction rejects bad shapes") {
    CHECK_THROWS_AS(make_grid(3, {8, 8, 8}, {1, 1, 1}), Error);
    CHECK_THROWS_AS(make_grid(1, {7}, {1.0}), Error);
    CHECK_THROWS_AS(make_grid(1, {8}, {-1.0}), Error);
    CHECK_THROWS_AS(make_grid(2, {8}, {1.0}), Error);
}

TEST_CASE("wavenumber layout and coordinates") {
    const GridSpec g = make_grid(2, {8, 16}, {2 * std::numbers::pi, 4 * std::numbers::pi});
    CHECK(g.size() == 128);
    CHECK(g.xi(0)[0] == 0.0);
    // flat index (i, j) = i*16 + j; z fastest
    CHECK(g.xi(1)[1] == doctest::Approx(0.5));
    CHECK(g.xi(16)[0] == doctest::Approx(1.0));
    CHECK(g.mode_label(15, 1) == -1);
    CHECK(g.mode_label(7 * 16, 0) == -1);
    CHECK(g.coord(0, 0) == doctest::Approx(-std::numbers::pi));
    CHECK(g.fundamental(1) == doctest::Approx(0.5));
}

TEST_CASE("FFT round trip and inverse normalization") {
    const GridSpec g = make_grid(2, {16, 32}, {3.0, 5.0});
    SpectralField f(g, 2);
    f.data = random_field(f.data.size(), 1);
    const auto orig = f.data;
    to_fourier_inplace(f);
    to_physical_inplace(f);
    CHECK(max_diff(f.data, orig) < 1e-13);

    SpectralField c(g, 1);
    for (auto& v : c.data) v = 2.5;
    to_fourier_inplace(c);
    CHECK(std::abs(c.data[0] - cplx(2.5 * g.size())) < 1e-10);
    for (std::size_t i = 1; i < g.size(); ++i) CHECK(std::abs(c.data[i]) < 1e-10);
}

TEST_CASE("spectral derivative of a resolved sine") {
    const double L = 2 * std::numbers::pi;
    const GridSpec g = make_grid(1, {64}, {L});
    SpectralField f(g, 1);
    for (std::size_t i = 0; i < g.size(); ++i) f.data[i] = std::sin(3 * g.position(i)[0]);
    const SpectralField d = apply_scalar_multiplier(f, [](const WaveVec& xi) { return cplx(0.0, xi[0]); });
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(d.data[i] - 3 * std::cos(3 * g.position(i)[0])) < 1e-12);
}

TEST_CASE("matrix multiplier acts per mode") {
    const GridSpec g = make_grid(1, {32}, {1.0});
    SpectralField f(g, 2);
    f.data = random_field(f.data.size(), 2);
    const auto swapped = apply_matrix_multiplier(f, [](const WaveVec&) {
        Eigen::MatrixXcd m(2, 2);
        m << 0, 1, 1, 0;
        return m;
    });
    for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(std::abs(swapped.at(0, i) - f.at(1, i)) < 1e-13);
        CHECK(std::abs(swapped.at(1, i) - f.at(0, i)) < 1e-13);
    }
}

TEST_CASE("symbol tables reject non-finite values") {
    const GridSpec g = make_grid(1, {8}, {1.0});
    CHECK_THROWS_AS(make_symbol_table(g, [](const WaveVec& xi) { return cplx(1.0 / xi[0], 0.0); }), Error);
}

TEST_CASE("dealias mask keeps two thirds") {
    const GridSpec g = make_grid(1, {12}, {1.0});
    const SymbolTable m = dealias_mask(g);
    int kept = 0;
    for (auto v : m.values) kept += v == 1.0;
    CHECK(kept == 7);  // labels -3..3
}

TEST_CASE("l2 norm of a constant field") {
    const GridSpec g = make_grid(2, {8, 8}, {2.0, 3.0});
    SpectralField f(g, 1);
    for (auto& v : f.data) v = cplx(0.0, 2.0);
    CHECK(l2_norm(f) == doctest::Approx(std::sqrt(4.0 * 6.0)));
    CHECK(max_abs(f) == doctest::Approx(2.0));
}

TEST_CASE("snapshot CSV layout") {
    const GridSpec g = make_grid(2, {4, 4}, {1.0, 1.0});
    SpectralField f(g, 1);
    const std::string path = "snapshot_test.csv";
    write_snapshot_csv(path, f, {"v"});
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "x,z,v_re,v_im");
    int rows = 0;
    for (std::string line; std::getline(in, line);) ++rows;
    CHECK(rows == 16);
}

TEST_CASE("parallel kernels match the serial reference") {
    const std::size_t n = 4099;
    const auto tab = random_field(n, 3);
    const auto mats = random_field(16 * n, 4);
    for (int comps : {1, 2, 4}) {
        auto a = random_field(comps * n, 5);
        auto b = a;
        kernels::serial::multiply_modes(a.data(), tab.data(), n, comps);
        kernels::parallel::multiply_modes(b.data(), tab.data(), n, comps);
        CHECK(max_diff(a, b) == 0.0);
    }
    for (int comps : {2, 4}) {
        auto a = random_field(comps * n, 6);
        auto b = a;
        kernels::serial::matvec_modes(a.data(), mats.data(), n, comps);
        kernels::parallel::matvec_modes(b.data(), mats.data(), n, comps);
        CHECK(max_diff(a, b) == 0.0);
    }
    for (KerrShape sh : {KerrShape::cubic, KerrShape::quintic, KerrShape::saturated}) {
        auto a = random_field(n, 7);
        auto b = a;
        kernels::serial::kerr_rotate(a.data(), n, 0.01, 0.3, sh);
        kernels::parallel::kerr_rotate(b.data(), n, 0.01, 0.3, sh);
        CHECK(max_diff(a, b) == 0.0);
    }
}

TEST_CASE("Kerr rotation preserves modulus and uses the shape rate") {
    std::vector<cplx> v{cplx(1.0, 0.0), cplx(0.0, 2.0)};
    const auto before = v;
    kernels::kerr_rotate(v.data(), v.size(), 0.5, 0.25, KerrShape::saturated);
    for (std::size_t i = 0; i < v.size(); ++i) {
        CHECK(std::abs(v[i]) == doctest::Approx(std::abs(before[i])));
        const double I = std::norm(before[i]);
        const double phase = std::arg(v[i] / before[i]);
        CHECK(phase == doctest::Approx(0.5 * I / (1 + 0.25 * I)));
    }
    CHECK(kernels::kerr_rate(2.0, 0.5, KerrShape::quintic) == doctest::Approx(0.0));
}

#include "filament/grid.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

#include <fftw3.h>

#include "filament/kernels.hpp"

namespace filament {

namespace {

struct PlanPair {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
};

// Plans are created once per shape under a lock and executed through the
// new-array interface, which FFTW documents as thread-safe.
const PlanPair& plans_for(const GridSpec& g) {
    static std::mutex mu;
    static std::map<std::pair<int, std::array<int, 2>>, PlanPair> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(g.dims, g.n);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    std::vector<cplx> scratch(g.size());
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    PlanPair p;
    p.forward = fftw_plan_dft(g.dims, g.n.data(), buf, buf, FFTW_FORWARD, flags);
    p.backward = fftw_plan_dft(g.dims, g.n.data(), buf, buf, FFTW_BACKWARD, flags);
    if (!p.forward || !p.backward) throw Error("fftw plan creation failed");
    return cache.emplace(key, p).first->second;
}

}  // namespace

GridSpec make_grid(int dims, const std::vector<int>& points_per_dim, const std::vector<double>& lengths) {
    if (dims != 1 && dims != 2) throw Error("grid dims must be 1 or 2");
    if (static_cast<int>(points_per_dim.size()) != dims || static_cast<int>(lengths.size()) != dims)
        throw Error("grid: points and lengths must have one entry per dimension");
    GridSpec g;
    g.dims = dims;
    for (int d = 0; d < dims; ++d) {
        const int n = points_per_dim[d];
        if (n < 4 || n % 2 != 0) throw Error("grid: point count must be even and >= 4, got " + std::to_string(n));
        if (!(lengths[d] > 0.0) || !std::isfinite(lengths[d])) throw Error("grid: length must be positive");
        g.n[d] = n;
        g.length[d] = lengths[d];
        g.spacing[d] = lengths[d] / n;
        g.wavenumbers[d].resize(n);
        const double base = 2.0 * std::numbers::pi / lengths[d];
        for (int j = 0; j < n; ++j) {
            const int m = j < n / 2 ? j : j - n;
            g.wavenumbers[d][j] = base * m;
        }
    }
    if (dims == 1) {
        g.n[1] = 1;
        g.length[1] = 1.0;
        g.spacing[1] = 1.0;
        g.wavenumbers[1] = {0.0};
    }
    return g;
}

WaveVec GridSpec::position(std::size_t flat) const {
    if (dims == 1) return {coord(0, static_cast<int>(flat)), 0.0};
    return {coord(0, static_cast<int>(flat / n[1])), coord(1, static_cast<int>(flat % n[1]))};
}

WaveVec GridSpec::xi(std::size_t flat) const {
    if (dims == 1) return {wavenumbers[0][flat], 0.0};
    return {wavenumbers[0][flat / n[1]], wavenumbers[1][flat % n[1]]};
}

int GridSpec::mode_label(std::size_t flat, int d) const {
    const int j = dims == 1 ? static_cast<int>(flat) : (d == 0 ? static_cast<int>(flat / n[1]) : static_cast<int>(flat % n[1]));
    return j < n[d] / 2 ? j : j - n[d];
}

double GridSpec::fundamental(int d) const { return 2.0 * std::numbers::pi / length[d]; }

SpectralField::SpectralField(const GridSpec& g, int c) : grid(g), components(c), data(g.size() * c, cplx(0.0)) {
    if (c < 1) throw Error("field must have at least one component");
}

void fft_forward(const GridSpec& g, cplx* data) {
    const auto& p = plans_for(g);
    auto* buf = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(p.forward, buf, buf);
}

void fft_inverse(const GridSpec& g, cplx* data) {
    const auto& p = plans_for(g);
    auto* buf = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(p.backward, buf, buf);
    const double s = 1.0 / static_cast<double>(g.size());
    const std::size_t n = g.size();
    for (std::size_t i = 0; i < n; ++i) data[i] *= s;
}

void to_fourier_inplace(SpectralField& f) {
    for (int c = 0; c < f.components; ++c) fft_forward(f.grid, f.comp(c));
}

void to_physical_inplace(SpectralField& f) {
    for (int c = 0; c < f.components; ++c) fft_inverse(f.grid, f.comp(c));
}

SpectralField to_fourier(const SpectralField& f) {
    SpectralField out = f;
    to_fourier_inplace(out);
    return out;
}

SpectralField to_physical(const SpectralField& f) {
    SpectralField out = f;
    to_physical_inplace(out);
    return out;
}

namespace {
std::string describe(const WaveVec& xi, int dims) {
    std::ostringstream os;
    os << std::setprecision(17) << "(" << xi[0];
    if (dims == 2) os << ", " << xi[1];
    os << ")";
    return os.str();
}
}  // namespace

SymbolTable make_symbol_table(const GridSpec& g, const ScalarSymbol& symbol) {
    SymbolTable t;
    t.values.resize(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const WaveVec xi = g.xi(i);
        const cplx v = symbol(xi);
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw Error("non-finite symbol value at wavenumber " + describe(xi, g.dims));
        t.values[i] = v;
    }
    return t;
}

MatrixSymbolTable make_matrix_table(const GridSpec& g, int dim, const MatrixSymbol& symbol) {
    MatrixSymbolTable t;
    t.dim = dim;
    t.values.resize(g.size() * dim * dim);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const WaveVec xi = g.xi(i);
        const Eigen::MatrixXcd m = symbol(xi);
        if (m.rows() != dim || m.cols() != dim)
            throw Error("matrix symbol size mismatch: expected " + std::to_string(dim) + "x" + std::to_string(dim));
        for (int r = 0; r < dim; ++r)
            for (int c = 0; c < dim; ++c) {
                const cplx v = m(r, c);
                if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
                    throw Error("non-finite matrix symbol at wavenumber " + describe(xi, g.dims));
                t.values[i * dim * dim + r * dim + c] = v;
            }
    }
    return t;
}

void multiply_fourier(SpectralField& fourier, const SymbolTable& t) {
    if (t.values.size() != fourier.points()) throw Error("symbol table size mismatch");
    kernels::multiply_modes(fourier.data.data(), t.values.data(), fourier.points(), fourier.components);
}

void multiply_fourier(SpectralField& fourier, const MatrixSymbolTable& t) {
    if (t.dim != fourier.components)
        throw Error("matrix symbol dimension " + std::to_string(t.dim) + " does not match component count " +
                    std::to_string(fourier.components));
    if (t.values.size() != fourier.points() * t.dim * t.dim) throw Error("matrix table size mismatch");
    kernels::matvec_modes(fourier.data.data(), t.values.data(), fourier.points(), fourier.components);
}

void apply_table_inplace(SpectralField& field, const SymbolTable& t) {
    to_fourier_inplace(field);
    multiply_fourier(field, t);
    to_physical_inplace(field);
}

void apply_table_inplace(SpectralField& field, const MatrixSymbolTable& t) {
    if (t.dim != field.components)
        throw Error("matrix symbol dimension " + std::to_string(t.dim) + " does not match component count " +
                    std::to_string(field.components));
    to_fourier_inplace(field);
    multiply_fourier(field, t);
    to_physical_inplace(field);
}

SpectralField apply_scalar_multiplier(const SpectralField& field, const ScalarSymbol& symbol) {
    SpectralField out = field;
    apply_table_inplace(out, make_symbol_table(field.grid, symbol));
    return out;
}

SpectralField apply_matrix_multiplier(const SpectralField& field, const MatrixSymbol& symbol) {
    SpectralField out = field;
    apply_table_inplace(out, make_matrix_table(field.grid, field.components, symbol));
    return out;
}

SymbolTable dealias_mask(const GridSpec& g) {
    SymbolTable t;
    t.values.resize(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        bool keep = true;
        for (int d = 0; d < g.dims; ++d) keep = keep && 3 * std::abs(g.mode_label(i, d)) < g.n[d];
        t.values[i] = keep ? 1.0 : 0.0;
    }
    return t;
}

double l2_norm(const SpectralField& f) {
    double s = 0.0;
    for (const auto& v : f.data) s += std::norm(v);
    return std::sqrt(s * f.grid.cell_volume());
}

double max_abs(const SpectralField& f) {
    double m = 0.0;
    for (const auto& v : f.data) m = std::max(m, std::abs(v));
    return m;
}

void write_snapshot_csv(const std::string& path, const SpectralField& f, const std::vector<std::string>& names) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open " + path);
    os << std::setprecision(17);
    os << (f.grid.dims == 2 ? "x,z" : "z");
    for (int c = 0; c < f.components; ++c) {
        const std::string nm = c < static_cast<int>(names.size()) ? names[c] : "comp" + std::to_string(c);
        os << "," << nm << "_re," << nm << "_im";
    }
    os << "\n";
    for (std::size_t i = 0; i < f.points(); ++i) {
        const WaveVec x = f.grid.position(i);
        os << x[0];
        if (f.grid.dims == 2) os << "," << x[1];
        for (int c = 0; c < f.components; ++c) os << "," << f.at(c, i).real() << "," << f.at(c, i).imag();
        os << "\n";
    }
}

}  // namespace filament

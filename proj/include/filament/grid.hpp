#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace filament {

using cplx = std::complex<double>;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Wavenumber vector of a grid mode; unused trailing entries are zero.
using WaveVec = std::array<double, 2>;

// Periodic uniform box in 1 or 2 dimensions. In 2D, dimension 0 is the
// transverse coordinate x and dimension 1 the propagation coordinate z;
// in 1D the single dimension is z. Nodes sit at x_i = -L/2 + i*dx and
// storage is row-major (last dimension fastest), matching FFTW.
struct GridSpec {
    int dims = 1;
    std::array<int, 2> n{1, 1};
    std::array<double, 2> length{1.0, 1.0};
    std::array<double, 2> spacing{1.0, 1.0};
    // Standard DFT layout: index j maps to 2*pi*m/L with m = j for j < N/2, else j - N.
    std::array<std::vector<double>, 2> wavenumbers;

    std::size_t size() const { return static_cast<std::size_t>(n[0]) * n[1]; }
    double cell_volume() const { return spacing[0] * (dims == 2 ? spacing[1] : 1.0); }
    double volume() const { return length[0] * (dims == 2 ? length[1] : 1.0); }
    int z_dim() const { return dims - 1; }
    double coord(int d, int i) const { return -0.5 * length[d] + i * spacing[d]; }
    // Coordinates of flat node index.
    WaveVec position(std::size_t flat) const;
    // Wavenumber vector of flat mode index.
    WaveVec xi(std::size_t flat) const;
    // Integer mode label (signed) of flat mode index along dimension d.
    int mode_label(std::size_t flat, int d) const;
    // Fundamental wavenumber 2*pi/L along dimension d.
    double fundamental(int d) const;
    bool same_shape(const GridSpec& o) const { return dims == o.dims && n == o.n && length == o.length; }
};

GridSpec make_grid(int dims, const std::vector<int>& points_per_dim, const std::vector<double>& lengths);

// Complex multi-component field on a grid, stored component-major.
struct SpectralField {
    GridSpec grid;
    int components = 1;
    std::vector<cplx> data;

    SpectralField() = default;
    SpectralField(const GridSpec& g, int c);

    std::size_t points() const { return grid.size(); }
    cplx* comp(int c) { return data.data() + static_cast<std::size_t>(c) * grid.size(); }
    const cplx* comp(int c) const { return data.data() + static_cast<std::size_t>(c) * grid.size(); }
    cplx& at(int c, std::size_t i) { return data[static_cast<std::size_t>(c) * grid.size() + i]; }
    const cplx& at(int c, std::size_t i) const { return data[static_cast<std::size_t>(c) * grid.size() + i]; }
};

// Unnormalized forward DFT of one component (in place).
void fft_forward(const GridSpec& g, cplx* data);
// Inverse DFT normalized by 1/N (in place), so inverse(forward(u)) = u.
void fft_inverse(const GridSpec& g, cplx* data);

SpectralField to_fourier(const SpectralField& f);
SpectralField to_physical(const SpectralField& f);
void to_fourier_inplace(SpectralField& f);
void to_physical_inplace(SpectralField& f);

using ScalarSymbol = std::function<cplx(const WaveVec&)>;
using MatrixSymbol = std::function<Eigen::MatrixXcd(const WaveVec&)>;

// Per-mode tabulated symbols. Construction checks finiteness.
struct SymbolTable {
    std::vector<cplx> values;
};
struct MatrixSymbolTable {
    int dim = 0;
    std::vector<cplx> values;  // per mode, dim*dim entries row-major
};

SymbolTable make_symbol_table(const GridSpec& g, const ScalarSymbol& symbol);
MatrixSymbolTable make_matrix_table(const GridSpec& g, int dim, const MatrixSymbol& symbol);

// Multiply Fourier coefficients of every component by the table (field already in Fourier space).
void multiply_fourier(SpectralField& fourier, const SymbolTable& t);
void multiply_fourier(SpectralField& fourier, const MatrixSymbolTable& t);

// Physical in, physical out.
SpectralField apply_scalar_multiplier(const SpectralField& field, const ScalarSymbol& symbol);
SpectralField apply_matrix_multiplier(const SpectralField& field, const MatrixSymbol& symbol);
void apply_table_inplace(SpectralField& field, const SymbolTable& t);
void apply_table_inplace(SpectralField& field, const MatrixSymbolTable& t);

// 2/3-rule mask: 1 on modes with |m_d| < N_d/3 in every dimension, 0 otherwise.
SymbolTable dealias_mask(const GridSpec& g);

// Discrete L2 norm sqrt(sum |u|^2 dV) over all components.
double l2_norm(const SpectralField& f);
// Max modulus over all components and nodes.
double max_abs(const SpectralField& f);

// Snapshot CSV: columns x[,y], comp0_re, comp0_im, ...
void write_snapshot_csv(const std::string& path, const SpectralField& f, const std::vector<std::string>& names = {});

}  // namespace filament

#pragma once

#include <complex>
#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "machansim/errors.hpp"

namespace machansim {

using cplx = std::complex<double>;

// Lattice of candidate antenna ports. Row/column indices are 1-based
// throughout the public API; the center port is the one aligned with the
// receiver boresight.
struct PortGrid {
    std::size_t rows = 32;
    std::size_t cols = 32;
    double spacing_m = 1e-3;
    std::size_t center_row = 16;
    std::size_t center_col = 16;

    void validate() const;

    // Offset of port (row, col) from the center port, in meters.
    // x is the horizontal axis (columns), z the vertical axis (rows).
    double dx_m(std::size_t col) const {
        return (static_cast<double>(col) - static_cast<double>(center_col)) * spacing_m;
    }
    double dz_m(std::size_t row) const {
        return (static_cast<double>(row) - static_cast<double>(center_row)) * spacing_m;
    }

    std::size_t port_count() const { return rows * cols; }

    bool operator==(const PortGrid&) const = default;
};

// Uniform frequency sweep grid.
struct FrequencyGrid {
    double f_start_hz = 260e9;
    double f_stop_hz = 320e9;
    std::size_t n_points = 1001;

    void validate() const;

    double spacing_hz() const {
        return (f_stop_hz - f_start_hz) / static_cast<double>(n_points - 1);
    }
    double bandwidth_hz() const { return f_stop_hz - f_start_hz; }
    double freq_at(std::size_t k) const { return f_start_hz + spacing_hz() * static_cast<double>(k); }

    // Index of the sample nearest to f; throws NumericError outside the band.
    std::size_t nearest_index(double f_hz) const;

    bool operator==(const FrequencyGrid&) const = default;
};

// Per-port wideband channel transfer function tensor, row-major
// [row][col][freq].
struct ChannelDataset {
    PortGrid grid;
    FrequencyGrid freq;
    std::vector<cplx> ctf;
    std::string label;

    void validate() const;

    std::size_t index(std::size_t row, std::size_t col, std::size_t k) const {
        return ((row - 1) * grid.cols + (col - 1)) * freq.n_points + k;
    }
    cplx at(std::size_t row, std::size_t col, std::size_t k) const {
        return ctf[index(row, col, k)];
    }
    // Contiguous CTF sweep of one port.
    const cplx* port_ctf(std::size_t row, std::size_t col) const {
        return ctf.data() + index(row, col, 0);
    }

    bool operator==(const ChannelDataset&) const = default;
};

enum class Normalization { raw, unit_mean_power };

// Narrowband per-port complex coefficients h[row][col], row-major.
struct PortCoefficientField {
    PortGrid grid;
    std::vector<cplx> h;
    Normalization normalization = Normalization::raw;

    cplx at(std::size_t row, std::size_t col) const {
        return h[(row - 1) * grid.cols + (col - 1)];
    }
    cplx& at(std::size_t row, std::size_t col) {
        return h[(row - 1) * grid.cols + (col - 1)];
    }
};

// On-disk format: one line of JSON metadata, newline, then the tensor as
// little-endian f64 pairs (real, imag), row-major [row][col][freq].
void write_dataset(const ChannelDataset& ds, const std::filesystem::path& path);
ChannelDataset read_dataset(const std::filesystem::path& path);

// Slice the CTF at the sweep sample nearest f_carrier and optionally rescale
// so that the grid mean of |h|^2 is 1.
PortCoefficientField narrowband_slice(const ChannelDataset& ds, double f_carrier_hz,
                                      Normalization norm);

const char* to_string(Normalization n);
Normalization normalization_from_string(const std::string& s);

}  // namespace machansim

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "machansim/chanstore.hpp"

namespace machansim {

// m x n movable-antenna layout. m and n are antenna counts along the grid's
// vertical (rows) and horizontal (cols) axes.
struct MAConfig {
    std::size_t m = 1;
    std::size_t n = 1;

    std::size_t antenna_count() const { return m * n; }
    bool planar() const { return m > 1 && n > 1; }
    std::string name() const { return std::to_string(m) + "x" + std::to_string(n); }
};

struct PortRef {
    std::size_t row = 0;
    std::size_t col = 0;
    bool operator==(const PortRef&) const = default;
    // Row-major order, used for all tie-breaking.
    auto operator<=>(const PortRef&) const = default;
};

// One rectangular movable region of candidate ports (1-based, inclusive).
struct Region {
    std::size_t row_lo, row_hi;
    std::size_t col_lo, col_hi;

    bool contains(const PortRef& p) const {
        return p.row >= row_lo && p.row <= row_hi && p.col >= col_lo && p.col <= col_hi;
    }
};

struct RegionMap {
    std::vector<Region> regions;      // one per antenna, row-major over (m, n)
    std::vector<PortRef> leftover;    // ports outside every region (floor division slack)
    std::size_t grid_rows = 0, grid_cols = 0;
};

enum class SelectionScheme { uniform_region, greedy, worst_region };

struct SelectionResult {
    std::vector<PortRef> positions;
    SelectionScheme scheme = SelectionScheme::uniform_region;
    std::vector<double> sinr;  // per selected position
};

// Floor-based uniform partition of an M x N grid for the given MA layout.
// Linear layouts (m == 1 or n == 1) span the full extent of the other axis.
RegionMap partition_regions(std::size_t M, std::size_t N, const MAConfig& cfg);

// Single-user SINR p*|h|^2 / sigma^2 (no interference term in this model).
double port_sinr(cplx h, double p_mw, double noise_mw);

// One port per region, maximizing SINR; ties go to the smallest row-major index.
SelectionResult select_uniform(const PortCoefficientField& field, const RegionMap& regions,
                               double p_mw, double noise_mw);

// The N_t globally best ports regardless of region structure.
SelectionResult select_greedy(const PortCoefficientField& field, std::size_t n_t, double p_mw,
                              double noise_mw);

// Per-region minimizer; baseline for improvement tables.
SelectionResult select_worst(const PortCoefficientField& field, const RegionMap& regions,
                             double p_mw, double noise_mw);

const char* to_string(SelectionScheme s);

}  // namespace machansim

#pragma once

#include <span>
#include <vector>

#include "machansim/chanstore.hpp"
#include "machansim/tworay.hpp"

namespace machansim {

enum class Window { none, hann };

// Inverse-transform of a CTF sweep. bins[n] corresponds to delay
// n * bin_spacing_s; delays alias with period max_excess_delay_s = 1/df.
struct ChannelImpulseResponse {
    std::vector<cplx> bins;
    double bin_spacing_s = 0.0;
    double max_excess_delay_s = 0.0;
    FrequencyGrid freq;
};

// Per-port ray property maps over the grid (row-major, 1-based accessors).
struct RayMap {
    PortGrid grid;
    std::vector<double> gain_db;
    std::vector<double> phase_rad;  // wrapped to (-pi, pi]
    std::vector<double> delay_s;
    std::vector<bool> warning;      // extraction came up short at this port
    RayKind kind = RayKind::los;

    std::size_t idx(std::size_t row, std::size_t col) const {
        return (row - 1) * grid.cols + (col - 1);
    }
};

struct ExtractionResult {
    std::vector<RayComponent> rays;  // sorted by delay; earliest classified LoS
    bool warning = false;            // fewer peaks found than requested
};

struct ExtractionOptions {
    std::size_t k = 2;
    double min_separation_s = 66.8e-12;  // ~4 delay bins at 60 GHz bandwidth
    double threshold_db = 25.0;          // below the global |CIR| maximum
};

// Inverse DFT over the frequency index (exponent +j2*pi*kn/N, 1/N scaling).
ChannelImpulseResponse ctf_to_cir(std::span<const cplx> ctf, const FrequencyGrid& freq,
                                  Window window = Window::none);

// Pick the k largest local maxima of |CIR| separated by at least
// min_separation, refine each peak's delay and complex gain off-bin by
// matched-filter correlation against the original CTF.
ExtractionResult extract_rays(const ChannelImpulseResponse& cir, std::span<const cplx> ctf,
                              const ExtractionOptions& opts = {});

// ctf_to_cir + extract_rays at every port, assembled into maps for one ray kind.
RayMap port_ray_maps(const ChannelDataset& ds, RayKind kind,
                     const ExtractionOptions& opts = {}, Window window = Window::none);

// Wrap an angle to (-pi, pi].
double wrap_phase(double phase_rad);

// Cumulative unwrap of a phase sequence (removes 2*pi jumps between
// consecutive entries).
std::vector<double> unwrap_phases(std::span<const double> wrapped);

void write_ray_map_csv(const RayMap& map, const std::filesystem::path& path);

}  // namespace machansim

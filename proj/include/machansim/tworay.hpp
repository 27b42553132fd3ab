#pragma once

#include <utility>

#include "machansim/chanstore.hpp"

namespace machansim {

inline constexpr double kSpeedOfLight = 299792458.0;

enum class HeightMode {
    // Use the stated chamber geometry as-is.
    as_stated,
    // Rescale the effective Tx+Rx height sum so the center-port reflected
    // path length matches the measured 1.0639 m. The stated geometry yields
    // 1.0768 m, so delay anchors only hold in this mode.
    match_measured,
};

// Chamber geometry mapped onto the classic two-ray picture: the metal side
// wall plays the role of the ground, x-offsets change the effective Tx
// "height", z-offsets tilt the horizontal separation.
struct TwoRayGeometry {
    double d0_m = 0.86;
    double h_r_m = 0.324;
    double h_t_offset_m = 0.324;
    HeightMode height_mode = HeightMode::match_measured;

    void validate() const;

    // Scale applied to (h_t + h_r) so the center reflected path hits the
    // measured length (1.0 in as-stated mode).
    double height_scale() const;
};

// Measured anchors for the synthetic channel.
struct RayCalibration {
    double g_los_center_db = -79.6;
    double g_ref_center_db = -89.95;
    double taper_corner_drop_db = 0.6686;
    double reflection_phase_rad = 3.14159265358979323846;

    void validate() const;
};

enum class RayKind { los, reflected, other };

struct RayComponent {
    double delay_s = 0.0;
    cplx gain;
    RayKind kind = RayKind::other;
};

// Quadratic directivity taper in dB, radially symmetric about the center
// port. Calibrated so the total LoS drop (distance spreading included) at the
// farthest grid corner equals taper_corner_drop_db exactly.
struct DirectivityTaper {
    double db_per_m2 = 0.0;

    double drop_db(double dx_m, double dz_m) const {
        return db_per_m2 * (dx_m * dx_m + dz_m * dz_m);
    }
};

DirectivityTaper make_taper(const PortGrid& grid, const TwoRayGeometry& geom,
                            const RayCalibration& calib);

// Path lengths (LoS, reflected) for a port offset (dx, dz) from center.
std::pair<double, double> geometry_paths(double dx_m, double dz_m, const TwoRayGeometry& geom);

// The two resolved rays at frequency f for one port. Gains carry the full
// propagation phase -2*pi*f*L/c (plus the reflection phase), so the CTF at f
// is simply the sum of the two gains.
std::pair<RayComponent, RayComponent> ray_components(double dx_m, double dz_m, double f_hz,
                                                     const TwoRayGeometry& geom,
                                                     const RayCalibration& calib,
                                                     const DirectivityTaper& taper);

// Deterministic two-ray CTF over the whole grid and sweep.
ChannelDataset synth_ctf(const PortGrid& grid, const FrequencyGrid& freq,
                         const TwoRayGeometry& geom, const RayCalibration& calib);

const char* to_string(HeightMode m);
HeightMode height_mode_from_string(const std::string& s);
const char* to_string(RayKind k);

}  // namespace machansim

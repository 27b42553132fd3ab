#include <cmath>
#include <cstring>

#include "doctest.h"
#include "machansim/tworay.hpp"

using namespace machansim;

namespace {

double gain_db(const cplx& g) { return 20.0 * std::log10(std::abs(g)); }

PortGrid default_grid() { return {}; }

}  // namespace

TEST_CASE("geometry paths, as-stated mode") {
    TwoRayGeometry geom;
    geom.height_mode = HeightMode::as_stated;
    const auto [l_los, l_ref] = geometry_paths(0.0, 0.0, geom);
    CHECK(l_los == doctest::Approx(0.86));
    CHECK(l_ref == doctest::Approx(1.0768026745880601));

    const auto [l_los2, l_ref2] = geometry_paths(0.0, 0.016, geom);
    CHECK(l_los2 == doctest::Approx(0.8601488243321617));
    CHECK(l_ref2 > l_los2);
}

TEST_CASE("geometry paths, match-measured mode pins the center reflected path") {
    TwoRayGeometry geom;  // match-measured is the default
    const auto [l_los, l_ref] = geometry_paths(0.0, 0.0, geom);
    CHECK(l_los == doctest::Approx(0.86));
    CHECK(l_ref == doctest::Approx(1.0639).epsilon(1e-12));
}

TEST_CASE("center-port gains hit the calibration anchors exactly") {
    TwoRayGeometry geom;
    RayCalibration calib;
    const auto taper = make_taper(default_grid(), geom, calib);
    const auto [los, ref] = ray_components(0.0, 0.0, 300e9, geom, calib, taper);
    CHECK(gain_db(los.gain) == doctest::Approx(-79.6).epsilon(1e-9));
    CHECK(gain_db(ref.gain) == doctest::Approx(-89.95).epsilon(1e-9));
    CHECK(los.delay_s == doctest::Approx(2.8686512187041076e-9));
    CHECK(ref.delay_s == doctest::Approx(1.0639 / kSpeedOfLight));
    CHECK(los.kind == RayKind::los);
    CHECK(ref.kind == RayKind::reflected);
}

TEST_CASE("farthest-corner LoS gain drops by the calibrated taper") {
    const PortGrid grid = default_grid();
    TwoRayGeometry geom;
    RayCalibration calib;
    const auto taper = make_taper(grid, geom, calib);
    // Corner (32, 32) is farthest from the (16, 16) center.
    const double dx = grid.dx_m(32);
    const double dz = grid.dz_m(32);
    const auto [los, ref] = ray_components(dx, dz, 300e9, geom, calib, taper);
    CHECK(gain_db(los.gain) == doctest::Approx(-79.6 - 0.6686).epsilon(1e-9));
}

TEST_CASE("LoS component is radially symmetric") {
    TwoRayGeometry geom;
    RayCalibration calib;
    const auto taper = make_taper(default_grid(), geom, calib);
    const auto a = ray_components(0.003, 0.004, 300e9, geom, calib, taper).first;
    const auto b = ray_components(0.004, -0.003, 300e9, geom, calib, taper).first;
    CHECK(std::abs(a.gain) == doctest::Approx(std::abs(b.gain)).epsilon(1e-12));
    CHECK(a.delay_s == doctest::Approx(b.delay_s).epsilon(1e-12));
}

TEST_CASE("reflected path exceeds LoS and the fading condition holds at all ports") {
    const PortGrid grid = default_grid();
    TwoRayGeometry geom;
    const double lambda = kSpeedOfLight / 300e9;
    for (std::size_t r = 1; r <= grid.rows; ++r) {
        for (std::size_t c = 1; c <= grid.cols; ++c) {
            const double dx = grid.dx_m(c);
            const double dz = grid.dz_m(r);
            const auto [l_los, l_ref] = geometry_paths(dx, dz, geom);
            CHECK(l_ref > l_los);
            const double d = std::sqrt(geom.d0_m * geom.d0_m + dz * dz);
            const double h_t = dx + geom.h_t_offset_m;
            CHECK(h_t < d);
            CHECK(d < 4.0 * h_t * geom.h_r_m / lambda);
        }
    }
}

TEST_CASE("synthesized CTF equals the scalar two-ray superposition") {
    const PortGrid grid{4, 4, 1e-3, 2, 2};
    const FrequencyGrid freq{260e9, 320e9, 11};
    TwoRayGeometry geom;
    RayCalibration calib;
    const auto ds = synth_ctf(grid, freq, geom, calib);

    // Independent scalar evaluation from the calibration constants.
    const auto taper = make_taper(grid, geom, calib);
    const auto [l_los_c, l_ref_c] = geometry_paths(0.0, 0.0, geom);
    for (std::size_t r = 1; r <= grid.rows; ++r) {
        for (std::size_t c = 1; c <= grid.cols; ++c) {
            const double dx = grid.dx_m(c);
            const double dz = grid.dz_m(r);
            const auto [l_los, l_ref] = geometry_paths(dx, dz, geom);
            for (std::size_t k = 0; k < freq.n_points; ++k) {
                const double f = freq.freq_at(k);
                const double a_los = std::pow(
                    10.0, (calib.g_los_center_db + 20.0 * std::log10(l_los_c / l_los) -
                           taper.drop_db(dx, dz)) / 20.0);
                const double a_ref = std::pow(
                    10.0, (calib.g_ref_center_db + 20.0 * std::log10(l_ref_c / l_ref) -
                           taper.drop_db(dx, dz)) / 20.0);
                const cplx expected =
                    std::polar(a_los, -2.0 * std::numbers::pi * f * l_los / kSpeedOfLight) +
                    std::polar(a_ref, -2.0 * std::numbers::pi * f * l_ref / kSpeedOfLight +
                                          calib.reflection_phase_rad);
                // The phase arguments are ~5e3 rad, so evaluation-order changes
                // cost a few ulps of the argument: allow ~1e-11 relative.
                CHECK(std::abs(ds.at(r, c, k) - expected) <= 1e-11 * std::abs(expected) + 1e-18);
            }
        }
    }
}

TEST_CASE("synthesis is deterministic") {
    const PortGrid grid{8, 8, 1e-3, 4, 4};
    const FrequencyGrid freq{260e9, 320e9, 101};
    const auto a = synth_ctf(grid, freq, {}, {});
    const auto b = synth_ctf(grid, freq, {}, {});
    REQUIRE(a.ctf.size() == b.ctf.size());
    CHECK(std::memcmp(a.ctf.data(), b.ctf.data(), a.ctf.size() * sizeof(cplx)) == 0);
}

TEST_CASE("silencing the reflected ray leaves a pure LoS channel") {
    const PortGrid grid{2, 2, 1e-3, 1, 1};
    const FrequencyGrid freq{260e9, 320e9, 5};
    RayCalibration calib;
    calib.g_ref_center_db = -std::numeric_limits<double>::infinity();
    const auto ds = synth_ctf(grid, freq, {}, calib);
    const auto taper = make_taper(grid, TwoRayGeometry{}, calib);
    for (std::size_t r = 1; r <= 2; ++r)
        for (std::size_t c = 1; c <= 2; ++c)
            for (std::size_t k = 0; k < 5; ++k) {
                const auto los = ray_components(grid.dx_m(c), grid.dz_m(r), freq.freq_at(k),
                                                {}, calib, taper).first;
                CHECK(ds.at(r, c, k) == los.gain);
            }
}

TEST_CASE("superposed power shows fringes along the horizontal axis") {
    const PortGrid grid = default_grid();
    TwoRayGeometry geom;
    RayCalibration calib;
    const FrequencyGrid freq{260e9, 320e9, 3};
    const double carrier = freq.freq_at(1);  // 290 GHz
    const auto ds = synth_ctf(grid, freq, geom, calib);

    std::vector<double> power;
    for (std::size_t c = 1; c <= grid.cols; ++c)
        power.push_back(std::norm(ds.at(grid.center_row, c, 1)));
    int maxima = 0;
    for (std::size_t i = 1; i + 1 < power.size(); ++i)
        if (power[i] > power[i - 1] && power[i] > power[i + 1]) ++maxima;
    CHECK(maxima >= 2);

    // Fringe spacing oracle: one fringe per wavelength of path difference,
    // via the finite-difference rate of (L_ref - L_los) along x.
    const double eps = 1e-6;
    const auto [l0, r0] = geometry_paths(0.0, 0.0, geom);
    const auto [l1, r1] = geometry_paths(eps, 0.0, geom);
    const double d_delta_dx = ((r1 - l1) - (r0 - l0)) / eps;
    const double lambda = kSpeedOfLight / carrier;
    const double predicted_period_ports = lambda / d_delta_dx / grid.spacing_m;
    const double expected_maxima = static_cast<double>(grid.cols - 1) / predicted_period_ports;
    CHECK(std::abs(maxima - expected_maxima) <= 4.0);
}

TEST_CASE("geometry and calibration validation") {
    TwoRayGeometry geom;
    geom.d0_m = 0.0;
    CHECK_THROWS_AS(geom.validate(), ConfigError);
    RayCalibration calib;
    calib.g_ref_center_db = -10.0;
    calib.g_los_center_db = -20.0;
    CHECK_THROWS_AS(calib.validate(), ConfigError);
}

#include <cmath>
#include <random>

#include "doctest.h"
#include "machansim/rayextract.hpp"

using namespace machansim;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Pure delay of complex gain g, sampled on the sweep grid.
std::vector<cplx> delayed_ctf(const FrequencyGrid& freq, double tau, cplx g) {
    std::vector<cplx> ctf(freq.n_points);
    for (std::size_t k = 0; k < freq.n_points; ++k)
        ctf[k] = g * std::polar(1.0, -kTwoPi * freq.freq_at(k) * tau);
    return ctf;
}

double energy(const std::vector<cplx>& v) {
    double e = 0.0;
    for (const cplx& x : v) e += std::norm(x);
    return e;
}

}  // namespace

TEST_CASE("on-bin exponential concentrates in one bin") {
    const FrequencyGrid freq{260e9, 320e9, 64};
    const double bin = 1.0 / (64.0 * freq.spacing_hz());
    const auto ctf = delayed_ctf(freq, 7.0 * bin, {1.0, 0.0});
    const auto cir = ctf_to_cir(ctf, freq);
    CHECK(cir.bin_spacing_s == doctest::Approx(bin).epsilon(1e-15));
    CHECK(std::norm(cir.bins[7]) / energy(cir.bins) >= 0.99);
}

TEST_CASE("all-ones CTF is an impulse at bin zero") {
    const FrequencyGrid freq{260e9, 320e9, 32};
    const std::vector<cplx> ctf(32, cplx{1.0, 0.0});
    const auto cir = ctf_to_cir(ctf, freq);
    CHECK(std::abs(cir.bins[0]) == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t n = 1; n < 32; ++n) CHECK(std::abs(cir.bins[n]) < 1e-12);
    CHECK(cir.max_excess_delay_s == doctest::Approx(1.0 / freq.spacing_hz()));
}

TEST_CASE("linearity: two on-bin rays with known relative level") {
    const FrequencyGrid freq{260e9, 320e9, 64};
    const double bin = 1.0 / (64.0 * freq.spacing_hz());
    auto ctf = delayed_ctf(freq, 5.0 * bin, {1.0, 0.0});
    const auto second = delayed_ctf(freq, 20.0 * bin, {0.3, 0.0});
    for (std::size_t k = 0; k < 64; ++k) ctf[k] += second[k];
    const auto cir = ctf_to_cir(ctf, freq);
    const double rel_db =
        20.0 * std::log10(std::abs(cir.bins[20]) / std::abs(cir.bins[5]));
    CHECK(rel_db == doctest::Approx(-10.457574905606752).epsilon(1e-9));
}

TEST_CASE("length mismatch raises a dimension error") {
    const FrequencyGrid freq{260e9, 320e9, 32};
    const std::vector<cplx> ctf(31, cplx{1.0, 0.0});
    CHECK_THROWS_AS(ctf_to_cir(ctf, freq), ConfigError);
}

TEST_CASE("Parseval consistency over random CTFs") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> val(-1.0, 1.0);
    const FrequencyGrid freq{260e9, 320e9, 101};
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<cplx> ctf(101);
        for (cplx& v : ctf) v = {val(rng), val(rng)};
        const auto cir = ctf_to_cir(ctf, freq);
        const double mean_ctf_energy = energy(ctf) / 101.0;
        CHECK(std::abs(energy(cir.bins) - mean_ctf_energy) <= 1e-10 * mean_ctf_energy);
    }
}

TEST_CASE("extraction recovers off-bin delay and gain") {
    const FrequencyGrid freq{260e9, 320e9, 256};
    const double bin = 1.0 / (256.0 * freq.spacing_hz());
    const double tau = 12.37 * bin;
    const cplx g = std::polar(2.5e-4, 0.8);
    const auto ctf = delayed_ctf(freq, tau, g);
    const auto cir = ctf_to_cir(ctf, freq);
    const auto res = extract_rays(cir, ctf, {.k = 1});
    REQUIRE(res.rays.size() == 1);
    CHECK_FALSE(res.warning);
    CHECK(std::abs(res.rays[0].delay_s - tau) < bin);
    CHECK(std::abs(res.rays[0].gain) == doctest::Approx(std::abs(g)).epsilon(1e-6));
}

TEST_CASE("single-ray CIR with k=2 returns one ray and a warning") {
    const FrequencyGrid freq{260e9, 320e9, 64};
    const double bin = 1.0 / (64.0 * freq.spacing_hz());
    const auto ctf = delayed_ctf(freq, 9.0 * bin, {1.0, 0.0});
    const auto cir = ctf_to_cir(ctf, freq);
    const auto res = extract_rays(cir, ctf, {.k = 2});
    CHECK(res.rays.size() == 1);
    CHECK(res.warning);
    CHECK(res.rays[0].kind == RayKind::los);
}

TEST_CASE("rays closer than min_separation merge into one reported peak") {
    const FrequencyGrid freq{260e9, 320e9, 64};
    const double bin = 1.0 / (64.0 * freq.spacing_hz());
    auto ctf = delayed_ctf(freq, 10.0 * bin, {1.0, 0.0});
    const auto second = delayed_ctf(freq, 11.0 * bin, {0.8, 0.0});
    for (std::size_t k = 0; k < 64; ++k) ctf[k] += second[k];
    const auto cir = ctf_to_cir(ctf, freq);
    const auto res = extract_rays(cir, ctf, {.k = 2, .min_separation_s = 2.0 * bin});
    CHECK(res.rays.size() == 1);
    CHECK(res.warning);
}

TEST_CASE("synthetic round-trip: extracted rays match synthesis at every port") {
    const PortGrid grid{4, 4, 1e-3, 2, 2};
    const FrequencyGrid freq{260e9, 320e9, 1001};
    TwoRayGeometry geom;
    RayCalibration calib;
    const auto ds = synth_ctf(grid, freq, geom, calib);
    const auto taper = make_taper(grid, geom, calib);
    const double bin = 1.0 / (1001.0 * freq.spacing_hz());

    for (std::size_t r = 1; r <= grid.rows; ++r) {
        for (std::size_t c = 1; c <= grid.cols; ++c) {
            std::span<const cplx> ctf{ds.port_ctf(r, c), freq.n_points};
            const auto cir = ctf_to_cir(ctf, freq);
            const auto res = extract_rays(cir, ctf);
            REQUIRE(res.rays.size() == 2);
            const auto [los, ref] =
                ray_components(grid.dx_m(c), grid.dz_m(r), 290e9, geom, calib, taper);
            CHECK(std::abs(res.rays[0].delay_s - los.delay_s) < bin);
            CHECK(std::abs(res.rays[1].delay_s - ref.delay_s) < bin);
            CHECK(std::abs(20.0 * std::log10(std::abs(res.rays[0].gain) / std::abs(los.gain))) <
                  0.5);
            CHECK(std::abs(20.0 * std::log10(std::abs(res.rays[1].gain) / std::abs(ref.gain))) <
                  0.5);
        }
    }
}

TEST_CASE("port ray maps: consistency, gain range, and missing-ray warnings") {
    const PortGrid grid{6, 6, 1e-3, 3, 3};
    const FrequencyGrid freq{260e9, 320e9, 501};
    TwoRayGeometry geom;
    RayCalibration calib;
    const auto ds = synth_ctf(grid, freq, geom, calib);

    const RayMap los_map = port_ray_maps(ds, RayKind::los);
    for (double g : los_map.gain_db) {
        CHECK(g <= -79.6 + 1e-6);
        CHECK(g >= -79.6 - calib.taper_corner_drop_db - 1e-6);
    }
    // Map entries agree with a direct per-port extraction.
    std::span<const cplx> ctf{ds.port_ctf(3, 3), freq.n_points};
    const auto direct = extract_rays(ctf_to_cir(ctf, freq), ctf);
    CHECK(los_map.gain_db[los_map.idx(3, 3)] ==
          doctest::Approx(20.0 * std::log10(std::abs(direct.rays[0].gain))).epsilon(1e-12));
    CHECK(los_map.delay_s[los_map.idx(3, 3)] == doctest::Approx(direct.rays[0].delay_s));

    // A LoS-only dataset has no reflected ray anywhere.
    RayCalibration los_only;
    los_only.g_ref_center_db = -std::numeric_limits<double>::infinity();
    const auto ds2 = synth_ctf(grid, freq, geom, los_only);
    const RayMap ref_map = port_ray_maps(ds2, RayKind::reflected);
    for (bool w : ref_map.warning) CHECK(w);
}

TEST_CASE("phase wrapping and unwrapping") {
    CHECK(wrap_phase(0.0) == 0.0);
    CHECK(wrap_phase(std::numbers::pi) == doctest::Approx(std::numbers::pi));
    CHECK(wrap_phase(-std::numbers::pi) == doctest::Approx(std::numbers::pi));
    CHECK(wrap_phase(3.0 * std::numbers::pi) == doctest::Approx(std::numbers::pi));
    CHECK(wrap_phase(7.5) == doctest::Approx(7.5 - kTwoPi));

    // A linear ramp survives a wrap/unwrap round trip up to a constant offset.
    std::vector<double> ramp, wrapped;
    for (int i = 0; i < 50; ++i) {
        ramp.push_back(0.7 * i);
        wrapped.push_back(wrap_phase(0.7 * i));
    }
    const auto unwrapped = unwrap_phases(wrapped);
    for (std::size_t i = 1; i < unwrapped.size(); ++i)
        CHECK(unwrapped[i] - unwrapped[i - 1] == doctest::Approx(0.7).epsilon(1e-9));
}

TEST_CASE("unwrapped LoS phase decreases monotonically away from the center") {
    const PortGrid grid{1, 16, 1e-3, 1, 1};  // single row, center at column 1
    const FrequencyGrid freq{260e9, 320e9, 501};
    const auto ds = synth_ctf(grid, freq, {}, {});
    const RayMap map = port_ray_maps(ds, RayKind::los);
    const auto unwrapped = unwrap_phases(map.phase_rad);
    // Delay grows with |offset| from the center column, so phase falls.
    for (std::size_t i = 1; i < unwrapped.size(); ++i) CHECK(unwrapped[i] <= unwrapped[i - 1]);
}

#include "machansim/rayextract.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <mutex>
#include <numbers>

#include <fftw3.h>

namespace machansim {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::mutex& fftw_plan_mutex() {
    static std::mutex m;
    return m;
}

// Matched-filter correlation of the CTF against a pure delay at tau,
// normalized so a single on-model ray of complex gain g returns exactly g
// (up to the e^{-j2*pi*f_start*tau} reference folded in by the caller).
cplx correlate_at_delay(std::span<const cplx> ctf, const FrequencyGrid& freq, double tau_s) {
    const cplx step = std::polar(1.0, kTwoPi * freq.spacing_hz() * tau_s);
    cplx rot = std::polar(1.0, kTwoPi * freq.f_start_hz * tau_s);
    cplx acc = 0.0;
    for (const cplx& v : ctf) {
        acc += v * rot;
        rot *= step;
    }
    return acc / static_cast<double>(ctf.size());
}

// Golden-section maximization of |correlation| within [lo, hi].
double refine_delay(std::span<const cplx> ctf, const FrequencyGrid& freq, double lo, double hi) {
    constexpr double kInvPhi = 0.61803398874989484820;
    double a = lo, b = hi;
    double c = b - (b - a) * kInvPhi;
    double d = a + (b - a) * kInvPhi;
    double fc = std::abs(correlate_at_delay(ctf, freq, c));
    double fd = std::abs(correlate_at_delay(ctf, freq, d));
    for (int it = 0; it < 40; ++it) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * kInvPhi;
            fc = std::abs(correlate_at_delay(ctf, freq, c));
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * kInvPhi;
            fd = std::abs(correlate_at_delay(ctf, freq, d));
        }
    }
    return 0.5 * (a + b);
}

}  // namespace

ChannelImpulseResponse ctf_to_cir(std::span<const cplx> ctf, const FrequencyGrid& freq,
                                  Window window) {
    freq.validate();
    if (ctf.size() != freq.n_points)
        throw ConfigError("ctf length does not match the frequency grid");
    const std::size_t n = ctf.size();

    std::vector<cplx> in(ctf.begin(), ctf.end());
    if (window == Window::hann) {
        for (std::size_t k = 0; k < n; ++k) {
            const double w =
                0.5 - 0.5 * std::cos(kTwoPi * static_cast<double>(k) / static_cast<double>(n - 1));
            in[k] *= w;
        }
    }

    ChannelImpulseResponse cir;
    cir.freq = freq;
    cir.bins.resize(n);
    cir.bin_spacing_s = 1.0 / (static_cast<double>(n) * freq.spacing_hz());
    cir.max_excess_delay_s = 1.0 / freq.spacing_hz();
    {
        std::lock_guard lock(fftw_plan_mutex());
        fftw_plan plan = fftw_plan_dft_1d(
            static_cast<int>(n), reinterpret_cast<fftw_complex*>(in.data()),
            reinterpret_cast<fftw_complex*>(cir.bins.data()), FFTW_BACKWARD, FFTW_ESTIMATE);
        fftw_execute(plan);
        fftw_destroy_plan(plan);
    }
    const double scale = 1.0 / static_cast<double>(n);
    for (cplx& v : cir.bins) v *= scale;
    return cir;
}

ExtractionResult extract_rays(const ChannelImpulseResponse& cir, std::span<const cplx> ctf,
                              const ExtractionOptions& opts) {
    if (opts.k < 1) throw ConfigError("extraction requires k >= 1");
    const std::size_t n = cir.bins.size();
    std::vector<double> mag(n);
    double peak = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mag[i] = std::abs(cir.bins[i]);
        peak = std::max(peak, mag[i]);
    }
    const double floor = peak * std::pow(10.0, -opts.threshold_db / 20.0);

    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < n; ++i) {
        if (mag[i] < floor || mag[i] <= 0.0) continue;
        const bool left_ok = (i == 0) || mag[i] >= mag[i - 1];
        const bool right_ok = (i + 1 == n) || mag[i] > mag[i + 1];
        if (left_ok && right_ok) candidates.push_back(i);
    }
    std::sort(candidates.begin(), candidates.end(),
              [&](std::size_t a, std::size_t b) { return mag[a] > mag[b]; });

    std::vector<std::size_t> picked;
    for (std::size_t bin : candidates) {
        if (picked.size() == opts.k) break;
        const double tau = static_cast<double>(bin) * cir.bin_spacing_s;
        const bool clashes = std::any_of(picked.begin(), picked.end(), [&](std::size_t p) {
            return std::abs(tau - static_cast<double>(p) * cir.bin_spacing_s) <
                   opts.min_separation_s;
        });
        if (!clashes) picked.push_back(bin);
    }

    ExtractionResult result;
    result.warning = picked.size() < opts.k;
    for (std::size_t bin : picked) {
        const double tau0 = static_cast<double>(bin) * cir.bin_spacing_s;
        const double tau =
            refine_delay(ctf, cir.freq, tau0 - cir.bin_spacing_s, tau0 + cir.bin_spacing_s);
        RayComponent ray;
        ray.delay_s = tau;
        // Phase reference matches the CIR bin value at on-bin delays.
        ray.gain = correlate_at_delay(ctf, cir.freq, tau) *
                   std::polar(1.0, -kTwoPi * cir.freq.f_start_hz * tau);
        result.rays.push_back(ray);
    }
    std::sort(result.rays.begin(), result.rays.end(),
              [](const RayComponent& a, const RayComponent& b) { return a.delay_s < b.delay_s; });
    for (std::size_t i = 0; i < result.rays.size(); ++i)
        result.rays[i].kind =
            i == 0 ? RayKind::los : (i == 1 ? RayKind::reflected : RayKind::other);
    return result;
}

RayMap port_ray_maps(const ChannelDataset& ds, RayKind kind, const ExtractionOptions& opts,
                     Window window) {
    ds.validate();
    RayMap map;
    map.grid = ds.grid;
    map.kind = kind;
    const std::size_t n = ds.grid.port_count();
    map.gain_db.assign(n, std::numeric_limits<double>::quiet_NaN());
    map.phase_rad.assign(n, 0.0);
    map.delay_s.assign(n, std::numeric_limits<double>::quiet_NaN());
    map.warning.assign(n, false);

    for (std::size_t r = 1; r <= ds.grid.rows; ++r) {
        for (std::size_t c = 1; c <= ds.grid.cols; ++c) {
            std::span<const cplx> ctf{ds.port_ctf(r, c), ds.freq.n_points};
            const auto cir = ctf_to_cir(ctf, ds.freq, window);
            const auto extracted = extract_rays(cir, ctf, opts);
            const auto it = std::find_if(
                extracted.rays.begin(), extracted.rays.end(),
                [&](const RayComponent& ray) { return ray.kind == kind; });
            const std::size_t i = map.idx(r, c);
            if (it == extracted.rays.end()) {
                map.warning[i] = true;
                continue;
            }
            map.warning[i] = extracted.warning;
            map.gain_db[i] = 20.0 * std::log10(std::abs(it->gain));
            map.phase_rad[i] = wrap_phase(std::arg(it->gain));
            map.delay_s[i] = it->delay_s;
        }
    }
    return map;
}

double wrap_phase(double phase_rad) {
    double w = std::remainder(phase_rad, kTwoPi);
    if (w <= -std::numbers::pi) w += kTwoPi;
    return w;
}

std::vector<double> unwrap_phases(std::span<const double> wrapped) {
    std::vector<double> out(wrapped.begin(), wrapped.end());
    for (std::size_t i = 1; i < out.size(); ++i) {
        const double jump = wrap_phase(wrapped[i] - wrapped[i - 1]);
        out[i] = out[i - 1] + jump;
    }
    return out;
}

void write_ray_map_csv(const RayMap& map, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << "row,col,gain_db,phase_rad,delay_ns\n";
    out.precision(17);
    for (std::size_t r = 1; r <= map.grid.rows; ++r) {
        for (std::size_t c = 1; c <= map.grid.cols; ++c) {
            const std::size_t i = map.idx(r, c);
            out << r << ',' << c << ',' << map.gain_db[i] << ',' << map.phase_rad[i] << ','
                << map.delay_s[i] * 1e9 << '\n';
        }
    }
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace machansim

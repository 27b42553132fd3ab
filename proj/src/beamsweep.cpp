#include "machansim/beamsweep.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace machansim {

void SweepSpec::validate() const {
    if (!(p_start_dbm <= p_stop_dbm)) throw ConfigError("sweep requires p_start <= p_stop");
    if (!(p_step_db > 0)) throw ConfigError("sweep step must be positive");
    if (!(noise_mw > 0)) throw ConfigError("noise power must be positive");
    if (!(carrier_hz > 0)) throw ConfigError("carrier frequency must be positive");
}

std::vector<double> SweepSpec::powers_dbm() const {
    validate();
    std::vector<double> out;
    for (double p = p_start_dbm; p <= p_stop_dbm + 1e-9; p += p_step_db) out.push_back(p);
    return out;
}

double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }

Precoder mrt_precoder(const Eigen::VectorXcd& h) {
    const double norm = h.norm();
    if (!(norm > 0)) throw NumericError("cannot precode a zero channel");
    return {h.conjugate() / norm, false};
}

Precoder project_constant_modulus(const Precoder& f_opt) {
    const auto n = f_opt.f.size();
    const double mod = 1.0 / std::sqrt(static_cast<double>(n));
    Precoder out;
    out.constrained = true;
    out.f.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const cplx v = f_opt.f(i);
        out.f(i) = (v == cplx{0.0, 0.0}) ? cplx{mod, 0.0} : std::polar(mod, std::arg(v));
    }
    return out;
}

double spectral_efficiency(const Eigen::VectorXcd& h, const Precoder& f, double p_mw,
                           double noise_mw) {
    if (!(noise_mw > 0)) throw NumericError("noise power must be positive");
    if (p_mw < 0) throw NumericError("transmit power must be nonnegative");
    if (h.size() != f.f.size()) throw ConfigError("channel and precoder dimensions differ");
    const cplx rx = (h.array() * f.f.array()).sum();
    return std::log2(1.0 + p_mw / noise_mw * std::norm(rx));
}

Eigen::VectorXcd gather_channel(const PortCoefficientField& field,
                                const std::vector<PortRef>& positions) {
    Eigen::VectorXcd h(static_cast<Eigen::Index>(positions.size()));
    for (std::size_t i = 0; i < positions.size(); ++i) {
        const PortRef& p = positions[i];
        if (p.row < 1 || p.row > field.grid.rows || p.col < 1 || p.col > field.grid.cols)
            throw ConfigError("selected port outside the field grid");
        h(static_cast<Eigen::Index>(i)) = field.at(p.row, p.col);
    }
    return h;
}

SweepCurve run_power_sweep(const PortCoefficientField& field, const SelectionResult& selection,
                           const SweepSpec& spec) {
    const Eigen::VectorXcd h = gather_channel(field, selection.positions);
    const Precoder f = project_constant_modulus(mrt_precoder(h));
    SweepCurve curve;
    for (double p_dbm : spec.powers_dbm()) {
        curve.p_dbm.push_back(p_dbm);
        curve.se_bits_per_hz.push_back(
            spectral_efficiency(h, f, dbm_to_mw(p_dbm), spec.noise_mw));
    }
    return curve;
}

PortCoefficientField centered_subfield(const PortCoefficientField& field, std::size_t area) {
    if (area < 1) throw ConfigError("candidate area must be at least 1x1");
    const std::size_t half_lo = (area - 1) / 2;
    const std::size_t half_hi = area / 2;
    if (field.grid.center_row <= half_lo || field.grid.center_col <= half_lo ||
        field.grid.center_row + half_hi > field.grid.rows ||
        field.grid.center_col + half_hi > field.grid.cols)
        throw ConfigError("centered " + std::to_string(area) + "x" + std::to_string(area) +
                          " area does not fit the grid");
    const std::size_t row0 = field.grid.center_row - half_lo;
    const std::size_t col0 = field.grid.center_col - half_lo;

    PortCoefficientField sub;
    sub.grid = field.grid;
    sub.grid.rows = sub.grid.cols = area;
    sub.grid.center_row = field.grid.center_row - row0 + 1;
    sub.grid.center_col = field.grid.center_col - col0 + 1;
    sub.normalization = field.normalization;
    sub.h.resize(area * area);
    for (std::size_t r = 1; r <= area; ++r)
        for (std::size_t c = 1; c <= area; ++c)
            sub.at(r, c) = field.at(row0 + r - 1, col0 + c - 1);
    return sub;
}

ExperimentReport improvement_table(const ChannelDataset& ds, const std::vector<MAConfig>& ma_list,
                                   const std::vector<std::size_t>& areas, const SweepSpec& spec) {
    spec.validate();
    const PortCoefficientField full =
        narrowband_slice(ds, spec.carrier_hz, spec.normalization);

    ExperimentReport report;
    report.mas = ma_list;
    report.areas = areas;
    report.spec = spec;

    for (const MAConfig& ma : ma_list) {
        for (std::size_t area : areas) {
            ReportEntry entry;
            entry.ma = ma;
            entry.area = area;
            entry.feasible = ma.m <= area && ma.n <= area;
            if (entry.feasible) {
                const PortCoefficientField field = centered_subfield(full, area);
                const RegionMap regions = partition_regions(area, area, ma);
                // Selection is power-invariant; 1 mW is arbitrary.
                entry.uniform_sel = select_uniform(field, regions, 1.0, spec.noise_mw);
                entry.worst_sel = select_worst(field, regions, 1.0, spec.noise_mw);
                entry.greedy_sel =
                    select_greedy(field, ma.antenna_count(), 1.0, spec.noise_mw);
                entry.uniform = run_power_sweep(field, entry.uniform_sel, spec);
                entry.worst = run_power_sweep(field, entry.worst_sel, spec);
                entry.greedy = run_power_sweep(field, entry.greedy_sel, spec);

                const Eigen::VectorXcd h_u = gather_channel(field, entry.uniform_sel.positions);
                const Eigen::VectorXcd h_w = gather_channel(field, entry.worst_sel.positions);
                const Eigen::VectorXcd h_g = gather_channel(field, entry.greedy_sel.positions);
                const double p0 = dbm_to_mw(0.0);
                const double se_u = spectral_efficiency(
                    h_u, project_constant_modulus(mrt_precoder(h_u)), p0, spec.noise_mw);
                const double se_w = spectral_efficiency(
                    h_w, project_constant_modulus(mrt_precoder(h_w)), p0, spec.noise_mw);
                const double se_g = spectral_efficiency(
                    h_g, project_constant_modulus(mrt_precoder(h_g)), p0, spec.noise_mw);
                entry.improvement_pct_0dbm = (se_u - se_w) / se_w * 100.0;
                entry.ratio_to_greedy_0dbm = se_u / se_g;
                entry.min_ratio_to_greedy = 1.0;
                for (std::size_t i = 0; i < entry.uniform.se_bits_per_hz.size(); ++i) {
                    const double g = entry.greedy.se_bits_per_hz[i];
                    if (g > 0)
                        entry.min_ratio_to_greedy = std::min(
                            entry.min_ratio_to_greedy, entry.uniform.se_bits_per_hz[i] / g);
                }
            }
            report.entries.push_back(std::move(entry));
        }
    }
    return report;
}

nlohmann::json selection_to_json(const SelectionResult& sel) {
    nlohmann::json positions = nlohmann::json::array();
    for (std::size_t i = 0; i < sel.positions.size(); ++i) {
        positions.push_back({{"row", sel.positions[i].row},
                             {"col", sel.positions[i].col},
                             {"sinr", sel.sinr[i]}});
    }
    return {{"scheme", to_string(sel.scheme)}, {"positions", positions}};
}

namespace {

nlohmann::json curve_to_json(const SweepCurve& curve) {
    return {{"p_dbm", curve.p_dbm}, {"se_bits_per_hz", curve.se_bits_per_hz}};
}

}  // namespace

nlohmann::json report_to_json(const ExperimentReport& report) {
    nlohmann::json entries = nlohmann::json::array();
    for (const ReportEntry& e : report.entries) {
        nlohmann::json j{{"ma", e.ma.name()}, {"area", e.area}, {"feasible", e.feasible}};
        if (e.feasible) {
            j["uniform"] = curve_to_json(e.uniform);
            j["greedy"] = curve_to_json(e.greedy);
            j["worst"] = curve_to_json(e.worst);
            j["uniform_selection"] = selection_to_json(e.uniform_sel);
            j["greedy_selection"] = selection_to_json(e.greedy_sel);
            j["worst_selection"] = selection_to_json(e.worst_sel);
            j["improvement_pct_0dbm"] = e.improvement_pct_0dbm;
            j["ratio_to_greedy_0dbm"] = e.ratio_to_greedy_0dbm;
            j["min_ratio_to_greedy"] = e.min_ratio_to_greedy;
        }
        entries.push_back(std::move(j));
    }
    return {{"spec",
             {{"p_start_dbm", report.spec.p_start_dbm},
              {"p_stop_dbm", report.spec.p_stop_dbm},
              {"p_step_db", report.spec.p_step_db},
              {"noise_mw", report.spec.noise_mw},
              {"carrier_hz", report.spec.carrier_hz},
              {"normalization", to_string(report.spec.normalization)}}},
            {"entries", entries}};
}

void write_sweep_csv(const ExperimentReport& report, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out.precision(17);
    out << "ma,area,scheme,p_dbm,se_bits_per_hz\n";
    for (const ReportEntry& e : report.entries) {
        if (!e.feasible) continue;
        const std::pair<const char*, const SweepCurve*> curves[] = {
            {"uniform-region", &e.uniform}, {"greedy", &e.greedy}, {"worst-region", &e.worst}};
        for (const auto& [name, curve] : curves)
            for (std::size_t i = 0; i < curve->p_dbm.size(); ++i)
                out << e.ma.name() << ',' << e.area << ',' << name << ',' << curve->p_dbm[i]
                    << ',' << curve->se_bits_per_hz[i] << '\n';
    }
    if (!out) throw IoError("write failed: " + path.string());
}

void write_table_csv(const ExperimentReport& report, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out.precision(6);
    out << "ma";
    for (std::size_t area : report.areas) out << ',' << area << 'x' << area;
    out << '\n';
    for (const MAConfig& ma : report.mas) {
        out << ma.name();
        for (std::size_t area : report.areas) {
            const auto it = std::find_if(
                report.entries.begin(), report.entries.end(), [&](const ReportEntry& e) {
                    return e.ma.m == ma.m && e.ma.n == ma.n && e.area == area;
                });
            out << ',';
            if (it == report.entries.end() || !it->feasible)
                out << '/';
            else
                out << it->improvement_pct_0dbm << '%';
        }
        out << '\n';
    }
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace machansim

#pragma once

#include <filesystem>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "machansim/chanstore.hpp"
#include "machansim/portselect.hpp"

namespace machansim {

struct Precoder {
    Eigen::VectorXcd f;
    bool constrained = false;
};

// Transmit power sweep and evaluation constants.
struct SweepSpec {
    double p_start_dbm = 0.0;
    double p_stop_dbm = 20.0;
    double p_step_db = 5.0;
    double noise_mw = 4.89e-6;
    double carrier_hz = 290e9;
    Normalization normalization = Normalization::unit_mean_power;

    void validate() const;
    std::vector<double> powers_dbm() const;
};

struct SweepCurve {
    std::vector<double> p_dbm;
    std::vector<double> se_bits_per_hz;
};

// One (MA layout, candidate area) evaluation cell.
struct ReportEntry {
    MAConfig ma;
    std::size_t area = 0;  // area x area centered candidate ports
    bool feasible = false;
    SweepCurve uniform, greedy, worst;
    SelectionResult uniform_sel, greedy_sel, worst_sel;
    double improvement_pct_0dbm = 0.0;  // (SE_uniform - SE_worst) / SE_worst * 100
    double ratio_to_greedy_0dbm = 0.0;
    double min_ratio_to_greedy = 0.0;   // over the sweep
};

struct ExperimentReport {
    std::vector<MAConfig> mas;
    std::vector<std::size_t> areas;
    std::vector<ReportEntry> entries;
    SweepSpec spec;
};

double dbm_to_mw(double dbm);

// Unconstrained maximum-ratio precoder f = conj(h) / ||h||.
Precoder mrt_precoder(const Eigen::VectorXcd& h);

// Nearest constant-modulus precoder: keep phases, set |f(i)| = 1/sqrt(N_t).
// Zero entries map to phase 0.
Precoder project_constant_modulus(const Precoder& f_opt);

// log2(1 + p/sigma^2 * |h.f|^2), with h.f the plain (unconjugated) product.
double spectral_efficiency(const Eigen::VectorXcd& h, const Precoder& f, double p_mw,
                           double noise_mw);

// Channel vector at the selected ports, in selection order.
Eigen::VectorXcd gather_channel(const PortCoefficientField& field,
                                const std::vector<PortRef>& positions);

// Constant-modulus MRT spectral efficiency of a fixed selection across the
// power sweep.
SweepCurve run_power_sweep(const PortCoefficientField& field, const SelectionResult& selection,
                           const SweepSpec& spec);

// Centered area x area sub-grid of a coefficient field (no renormalization,
// so areas share the parent field's scale).
PortCoefficientField centered_subfield(const PortCoefficientField& field, std::size_t area);

// Uniform-region / greedy / worst comparison over MA layouts and centered
// candidate areas.
ExperimentReport improvement_table(const ChannelDataset& ds, const std::vector<MAConfig>& ma_list,
                                   const std::vector<std::size_t>& areas, const SweepSpec& spec);

nlohmann::json report_to_json(const ExperimentReport& report);
nlohmann::json selection_to_json(const SelectionResult& sel);
void write_sweep_csv(const ExperimentReport& report, const std::filesystem::path& path);
// Improvement percentages, MA layouts as rows and areas as columns;
// infeasible combinations render as "/".
void write_table_csv(const ExperimentReport& report, const std::filesystem::path& path);

}  // namespace machansim

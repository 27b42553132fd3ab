#include <optional>

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "machansim/beamsweep.hpp"
#include "machansim/chanstore.hpp"
#include "machansim/portselect.hpp"
#include "machansim/rayextract.hpp"
#include "machansim/spatialcov.hpp"
#include "machansim/tworay.hpp"

namespace py = pybind11;
using namespace machansim;

PYBIND11_MODULE(_machansim, m) {
    m.doc() = "Movable-antenna channel simulation toolkit";

    py::register_exception<IoError>(m, "IoError", PyExc_OSError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

    m.attr("SPEED_OF_LIGHT") = kSpeedOfLight;

    py::enum_<Normalization>(m, "Normalization")
        .value("raw", Normalization::raw)
        .value("unit_mean_power", Normalization::unit_mean_power);
    py::enum_<HeightMode>(m, "HeightMode")
        .value("as_stated", HeightMode::as_stated)
        .value("match_measured", HeightMode::match_measured);
    py::enum_<RayKind>(m, "RayKind")
        .value("los", RayKind::los)
        .value("reflected", RayKind::reflected)
        .value("other", RayKind::other);
    py::enum_<Window>(m, "Window").value("none", Window::none).value("hann", Window::hann);
    py::enum_<SelectionScheme>(m, "SelectionScheme")
        .value("uniform_region", SelectionScheme::uniform_region)
        .value("greedy", SelectionScheme::greedy)
        .value("worst_region", SelectionScheme::worst_region);
    py::enum_<ComplexSource>(m, "ComplexSource")
        .value("circular_uniform_phase", ComplexSource::circular_uniform_phase)
        .value("empirical_rows", ComplexSource::empirical_rows);

    py::class_<PortGrid>(m, "PortGrid")
        .def(py::init<>())
        .def(py::init([](std::size_t rows, std::size_t cols, double spacing_m,
                         std::size_t center_row, std::size_t center_col) {
                 if (center_row == 0) center_row = (rows + 1) / 2;
                 if (center_col == 0) center_col = (cols + 1) / 2;
                 return PortGrid{rows, cols, spacing_m, center_row, center_col};
             }),
             py::arg("rows"), py::arg("cols"), py::arg("spacing_m") = 1e-3,
             py::arg("center_row") = 0, py::arg("center_col") = 0)
        .def_readwrite("rows", &PortGrid::rows)
        .def_readwrite("cols", &PortGrid::cols)
        .def_readwrite("spacing_m", &PortGrid::spacing_m)
        .def_readwrite("center_row", &PortGrid::center_row)
        .def_readwrite("center_col", &PortGrid::center_col)
        .def("validate", &PortGrid::validate)
        .def("dx_m", &PortGrid::dx_m)
        .def("dz_m", &PortGrid::dz_m)
        .def("port_count", &PortGrid::port_count)
        .def(py::self == py::self);

    py::class_<FrequencyGrid>(m, "FrequencyGrid")
        .def(py::init<>())
        .def(py::init([](double f_start_hz, double f_stop_hz, std::size_t n_points) {
                 return FrequencyGrid{f_start_hz, f_stop_hz, n_points};
             }),
             py::arg("f_start_hz"), py::arg("f_stop_hz"), py::arg("n_points"))
        .def_readwrite("f_start_hz", &FrequencyGrid::f_start_hz)
        .def_readwrite("f_stop_hz", &FrequencyGrid::f_stop_hz)
        .def_readwrite("n_points", &FrequencyGrid::n_points)
        .def("validate", &FrequencyGrid::validate)
        .def("spacing_hz", &FrequencyGrid::spacing_hz)
        .def("bandwidth_hz", &FrequencyGrid::bandwidth_hz)
        .def("freq_at", &FrequencyGrid::freq_at)
        .def("nearest_index", &FrequencyGrid::nearest_index)
        .def(py::self == py::self);

    py::class_<ChannelDataset>(m, "ChannelDataset")
        .def(py::init<>())
        .def_readwrite("grid", &ChannelDataset::grid)
        .def_readwrite("freq", &ChannelDataset::freq)
        .def_readwrite("ctf", &ChannelDataset::ctf)
        .def_readwrite("label", &ChannelDataset::label)
        .def("validate", &ChannelDataset::validate)
        .def("at", &ChannelDataset::at, py::arg("row"), py::arg("col"), py::arg("k"))
        .def("port_ctf",
             [](const ChannelDataset& ds, std::size_t row, std::size_t col) {
                 const cplx* p = ds.port_ctf(row, col);
                 return std::vector<cplx>(p, p + ds.freq.n_points);
             },
             py::arg("row"), py::arg("col"))
        .def(py::self == py::self);

    py::class_<PortCoefficientField>(m, "PortCoefficientField")
        .def(py::init<>())
        .def_readwrite("grid", &PortCoefficientField::grid)
        .def_readwrite("h", &PortCoefficientField::h)
        .def_readwrite("normalization", &PortCoefficientField::normalization)
        .def("at", [](const PortCoefficientField& f, std::size_t row, std::size_t col) {
            return f.at(row, col);
        });

    m.def("write_dataset", &write_dataset, py::arg("dataset"), py::arg("path"));
    m.def("read_dataset", &read_dataset, py::arg("path"));
    m.def("narrowband_slice", &narrowband_slice, py::arg("dataset"), py::arg("f_carrier_hz"),
          py::arg("normalization") = Normalization::raw);

    py::class_<TwoRayGeometry>(m, "TwoRayGeometry")
        .def(py::init<>())
        .def_readwrite("d0_m", &TwoRayGeometry::d0_m)
        .def_readwrite("h_r_m", &TwoRayGeometry::h_r_m)
        .def_readwrite("h_t_offset_m", &TwoRayGeometry::h_t_offset_m)
        .def_readwrite("height_mode", &TwoRayGeometry::height_mode)
        .def("validate", &TwoRayGeometry::validate)
        .def("height_scale", &TwoRayGeometry::height_scale);

    py::class_<RayCalibration>(m, "RayCalibration")
        .def(py::init<>())
        .def_readwrite("g_los_center_db", &RayCalibration::g_los_center_db)
        .def_readwrite("g_ref_center_db", &RayCalibration::g_ref_center_db)
        .def_readwrite("taper_corner_drop_db", &RayCalibration::taper_corner_drop_db)
        .def_readwrite("reflection_phase_rad", &RayCalibration::reflection_phase_rad)
        .def("validate", &RayCalibration::validate);

    py::class_<RayComponent>(m, "RayComponent")
        .def_readonly("delay_s", &RayComponent::delay_s)
        .def_readonly("gain", &RayComponent::gain)
        .def_readonly("kind", &RayComponent::kind);

    py::class_<DirectivityTaper>(m, "DirectivityTaper")
        .def(py::init<>())
        .def_readwrite("db_per_m2", &DirectivityTaper::db_per_m2)
        .def("drop_db", &DirectivityTaper::drop_db);

    m.def("make_taper", &make_taper, py::arg("grid"), py::arg("geometry"),
          py::arg("calibration"));
    m.def("geometry_paths", &geometry_paths, py::arg("dx_m"), py::arg("dz_m"),
          py::arg("geometry"));
    m.def("ray_components", &ray_components, py::arg("dx_m"), py::arg("dz_m"), py::arg("f_hz"),
          py::arg("geometry"), py::arg("calibration"), py::arg("taper"));
    m.def("synth_ctf", &synth_ctf, py::arg("grid") = PortGrid{},
          py::arg("freq") = FrequencyGrid{}, py::arg("geometry") = TwoRayGeometry{},
          py::arg("calibration") = RayCalibration{});

    py::class_<ChannelImpulseResponse>(m, "ChannelImpulseResponse")
        .def_readonly("bins", &ChannelImpulseResponse::bins)
        .def_readonly("bin_spacing_s", &ChannelImpulseResponse::bin_spacing_s)
        .def_readonly("max_excess_delay_s", &ChannelImpulseResponse::max_excess_delay_s)
        .def_readonly("freq", &ChannelImpulseResponse::freq);

    py::class_<ExtractionOptions>(m, "ExtractionOptions")
        .def(py::init<>())
        .def_readwrite("k", &ExtractionOptions::k)
        .def_readwrite("min_separation_s", &ExtractionOptions::min_separation_s)
        .def_readwrite("threshold_db", &ExtractionOptions::threshold_db);

    py::class_<ExtractionResult>(m, "ExtractionResult")
        .def_readonly("rays", &ExtractionResult::rays)
        .def_readonly("warning", &ExtractionResult::warning);

    py::class_<RayMap>(m, "RayMap")
        .def_readonly("grid", &RayMap::grid)
        .def_readonly("gain_db", &RayMap::gain_db)
        .def_readonly("phase_rad", &RayMap::phase_rad)
        .def_readonly("delay_s", &RayMap::delay_s)
        .def_readonly("warning", &RayMap::warning)
        .def_readonly("kind", &RayMap::kind)
        .def("idx", &RayMap::idx, py::arg("row"), py::arg("col"));

    m.def("ctf_to_cir",
          [](const std::vector<cplx>& ctf, const FrequencyGrid& freq, Window window) {
              return ctf_to_cir(ctf, freq, window);
          },
          py::arg("ctf"), py::arg("freq"), py::arg("window") = Window::none);
    m.def("extract_rays",
          [](const ChannelImpulseResponse& cir, const std::vector<cplx>& ctf,
             const ExtractionOptions& opts) { return extract_rays(cir, ctf, opts); },
          py::arg("cir"), py::arg("ctf"), py::arg("options") = ExtractionOptions{});
    m.def("port_ray_maps", &port_ray_maps, py::arg("dataset"), py::arg("kind"),
          py::arg("options") = ExtractionOptions{}, py::arg("window") = Window::none);
    m.def("wrap_phase", &wrap_phase);
    m.def("unwrap_phases",
          [](const std::vector<double>& wrapped) { return unwrap_phases(wrapped); });
    m.def("write_ray_map_csv", &write_ray_map_csv, py::arg("map"), py::arg("path"));

    py::class_<ComplexCovariance>(m, "ComplexCovariance")
        .def(py::init<>())
        .def_readwrite("sigma", &ComplexCovariance::sigma)
        .def_readwrite("mu", &ComplexCovariance::mu);
    py::class_<MagnitudeCovariance>(m, "MagnitudeCovariance")
        .def(py::init<>())
        .def_readwrite("sigma", &MagnitudeCovariance::sigma)
        .def_readwrite("mu", &MagnitudeCovariance::mu);
    py::class_<PeriodicCovParams>(m, "PeriodicCovParams")
        .def(py::init<>())
        .def_readwrite("a1", &PeriodicCovParams::a1)
        .def_readwrite("b1", &PeriodicCovParams::b1)
        .def_readwrite("c1", &PeriodicCovParams::c1)
        .def_readwrite("a2", &PeriodicCovParams::a2)
        .def_readwrite("b2", &PeriodicCovParams::b2)
        .def_readwrite("c2", &PeriodicCovParams::c2)
        .def_readwrite("lambda_m", &PeriodicCovParams::lambda_m)
        .def_readwrite("spacing_m", &PeriodicCovParams::spacing_m);
    py::class_<PeriodicFit>(m, "PeriodicFit")
        .def_readonly("params", &PeriodicFit::params)
        .def_readonly("residual_norm", &PeriodicFit::residual_norm)
        .def_readonly("relative_residual", &PeriodicFit::relative_residual);
    py::class_<MagnitudeSamples>(m, "MagnitudeSamples")
        .def_readonly("samples", &MagnitudeSamples::samples)
        .def_readonly("negative_count", &MagnitudeSamples::negative_count);

    m.def("row_samples_from_field", &row_samples_from_field, py::arg("field"));
    m.def("complex_cov", &complex_cov, py::arg("samples"));
    m.def("magnitude_cov", &magnitude_cov, py::arg("samples"));
    m.def("factorize",
          py::overload_cast<const Eigen::MatrixXcd&>(&factorize), py::arg("sigma"));
    m.def("factorize_real",
          py::overload_cast<const Eigen::MatrixXd&>(&factorize), py::arg("sigma"));
    m.def("gen_magnitudes", &gen_magnitudes, py::arg("model"), py::arg("count"),
          py::arg("seed"));
    m.def("gen_complex",
          [](const ComplexCovariance& model, ComplexSource source, std::size_t count,
             std::uint64_t seed, const std::optional<RowSamples>& empirical) {
              return gen_complex(model, source, count, seed,
                                 empirical ? &*empirical : nullptr);
          },
          py::arg("model"), py::arg("source"), py::arg("count"), py::arg("seed"),
          py::arg("empirical") = std::nullopt);
    m.def("normalize_rows", &normalize_rows, py::arg("samples"));
    m.def("cov_model_eval", &cov_model_eval, py::arg("i"), py::arg("j"), py::arg("params"));
    m.def("cov_model_fit", &cov_model_fit, py::arg("cov_sequence"), py::arg("lambda_m"),
          py::arg("spacing_m"));
    m.def("counter_uniform", &counter_uniform, py::arg("seed"), py::arg("stream"),
          py::arg("index"));

    py::class_<MAConfig>(m, "MAConfig")
        .def(py::init<>())
        .def(py::init([](std::size_t mm, std::size_t nn) { return MAConfig{mm, nn}; }),
             py::arg("m"), py::arg("n"))
        .def_readwrite("m", &MAConfig::m)
        .def_readwrite("n", &MAConfig::n)
        .def("antenna_count", &MAConfig::antenna_count)
        .def("planar", &MAConfig::planar)
        .def("name", &MAConfig::name);

    py::class_<PortRef>(m, "PortRef")
        .def(py::init<>())
        .def(py::init([](std::size_t row, std::size_t col) { return PortRef{row, col}; }),
             py::arg("row"), py::arg("col"))
        .def_readwrite("row", &PortRef::row)
        .def_readwrite("col", &PortRef::col)
        .def(py::self == py::self)
        .def("__repr__", [](const PortRef& p) {
            return "PortRef(" + std::to_string(p.row) + ", " + std::to_string(p.col) + ")";
        });

    py::class_<Region>(m, "Region")
        .def_readonly("row_lo", &Region::row_lo)
        .def_readonly("row_hi", &Region::row_hi)
        .def_readonly("col_lo", &Region::col_lo)
        .def_readonly("col_hi", &Region::col_hi)
        .def("contains", &Region::contains);

    py::class_<RegionMap>(m, "RegionMap")
        .def_readonly("regions", &RegionMap::regions)
        .def_readonly("leftover", &RegionMap::leftover)
        .def_readonly("grid_rows", &RegionMap::grid_rows)
        .def_readonly("grid_cols", &RegionMap::grid_cols);

    py::class_<SelectionResult>(m, "SelectionResult")
        .def_readonly("positions", &SelectionResult::positions)
        .def_readonly("scheme", &SelectionResult::scheme)
        .def_readonly("sinr", &SelectionResult::sinr);

    m.def("partition_regions", &partition_regions, py::arg("rows"), py::arg("cols"),
          py::arg("config"));
    m.def("port_sinr", &port_sinr, py::arg("h"), py::arg("p_mw"), py::arg("noise_mw"));
    m.def("select_uniform", &select_uniform, py::arg("field"), py::arg("regions"),
          py::arg("p_mw"), py::arg("noise_mw"));
    m.def("select_greedy", &select_greedy, py::arg("field"), py::arg("n_t"), py::arg("p_mw"),
          py::arg("noise_mw"));
    m.def("select_worst", &select_worst, py::arg("field"), py::arg("regions"), py::arg("p_mw"),
          py::arg("noise_mw"));

    py::class_<Precoder>(m, "Precoder")
        .def_readonly("f", &Precoder::f)
        .def_readonly("constrained", &Precoder::constrained);

    py::class_<SweepSpec>(m, "SweepSpec")
        .def(py::init<>())
        .def_readwrite("p_start_dbm", &SweepSpec::p_start_dbm)
        .def_readwrite("p_stop_dbm", &SweepSpec::p_stop_dbm)
        .def_readwrite("p_step_db", &SweepSpec::p_step_db)
        .def_readwrite("noise_mw", &SweepSpec::noise_mw)
        .def_readwrite("carrier_hz", &SweepSpec::carrier_hz)
        .def_readwrite("normalization", &SweepSpec::normalization)
        .def("validate", &SweepSpec::validate)
        .def("powers_dbm", &SweepSpec::powers_dbm);

    py::class_<SweepCurve>(m, "SweepCurve")
        .def_readonly("p_dbm", &SweepCurve::p_dbm)
        .def_readonly("se_bits_per_hz", &SweepCurve::se_bits_per_hz);

    py::class_<ReportEntry>(m, "ReportEntry")
        .def_readonly("ma", &ReportEntry::ma)
        .def_readonly("area", &ReportEntry::area)
        .def_readonly("feasible", &ReportEntry::feasible)
        .def_readonly("uniform", &ReportEntry::uniform)
        .def_readonly("greedy", &ReportEntry::greedy)
        .def_readonly("worst", &ReportEntry::worst)
        .def_readonly("uniform_sel", &ReportEntry::uniform_sel)
        .def_readonly("greedy_sel", &ReportEntry::greedy_sel)
        .def_readonly("worst_sel", &ReportEntry::worst_sel)
        .def_readonly("improvement_pct_0dbm", &ReportEntry::improvement_pct_0dbm)
        .def_readonly("ratio_to_greedy_0dbm", &ReportEntry::ratio_to_greedy_0dbm)
        .def_readonly("min_ratio_to_greedy", &ReportEntry::min_ratio_to_greedy);

    py::class_<ExperimentReport>(m, "ExperimentReport")
        .def_readonly("mas", &ExperimentReport::mas)
        .def_readonly("areas", &ExperimentReport::areas)
        .def_readonly("entries", &ExperimentReport::entries)
        .def_readonly("spec", &ExperimentReport::spec)
        .def("to_json", [](const ExperimentReport& r) { return report_to_json(r).dump(2); });

    m.def("dbm_to_mw", &dbm_to_mw);
    m.def("mrt_precoder", &mrt_precoder, py::arg("h"));
    m.def("project_constant_modulus", &project_constant_modulus, py::arg("precoder"));
    m.def("spectral_efficiency", &spectral_efficiency, py::arg("h"), py::arg("precoder"),
          py::arg("p_mw"), py::arg("noise_mw"));
    m.def("gather_channel", &gather_channel, py::arg("field"), py::arg("positions"));
    m.def("run_power_sweep", &run_power_sweep, py::arg("field"), py::arg("selection"),
          py::arg("spec"));
    m.def("centered_subfield", &centered_subfield, py::arg("field"), py::arg("area"));
    m.def("improvement_table", &improvement_table, py::arg("dataset"), py::arg("ma_list"),
          py::arg("areas"), py::arg("spec"));
    m.def("write_sweep_csv", &write_sweep_csv, py::arg("report"), py::arg("path"));
    m.def("write_table_csv", &write_table_csv, py::arg("report"), py::arg("path"));
}

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "machansim/beamsweep.hpp"
#include "machansim/chanstore.hpp"
#include "machansim/portselect.hpp"
#include "machansim/rayextract.hpp"
#include "machansim/spatialcov.hpp"
#include "machansim/tworay.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace machansim;

namespace {

struct RunConfig {
    PortGrid grid;
    FrequencyGrid freq;
    TwoRayGeometry geometry;
    RayCalibration calibration;
    SweepSpec sweep;
    double cov_lambda_m = 1e-3;
    bool cov_fit = false;
    std::vector<MAConfig> ma_list{{2, 1}, {4, 1}, {8, 1}, {16, 1}, {2, 2}, {1, 4}};
    std::vector<std::size_t> areas{32, 16, 8, 4, 2};
    std::string output_dir = "out";
};

void reject_unknown(const json& obj, const char* section,
                    std::initializer_list<const char*> known) {
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        bool ok = false;
        for (const char* k : known)
            if (key == k) ok = true;
        if (!ok)
            throw ConfigError(std::string("unknown config key '") + key + "' in section '" +
                              section + "'");
    }
}

template <typename T>
void load_field(const json& obj, const char* key, T& out) {
    if (obj.contains(key)) out = obj.at(key).get<T>();
}

MAConfig parse_ma(const std::string& s) {
    const auto x = s.find('x');
    if (x == std::string::npos || x == 0 || x + 1 == s.size())
        throw ConfigError("MA layout must look like '4x1': " + s);
    MAConfig cfg;
    try {
        cfg.m = std::stoul(s.substr(0, x));
        cfg.n = std::stoul(s.substr(x + 1));
    } catch (const std::exception&) {
        throw ConfigError("MA layout must look like '4x1': " + s);
    }
    return cfg;
}

RunConfig load_config(const std::optional<fs::path>& path) {
    RunConfig cfg;
    if (!path) return cfg;
    std::ifstream in(*path);
    if (!in) throw IoError("cannot open config file: " + path->string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("malformed config JSON in " + path->string() + ": " + e.what());
    }
    reject_unknown(doc, "<root>",
                   {"geometry", "calibration", "grid", "frequency", "covariance", "selection",
                    "sweep", "output_dir"});
    if (doc.contains("geometry")) {
        const json& g = doc["geometry"];
        reject_unknown(g, "geometry", {"d0_m", "h_r_m", "h_t_offset_m", "height_mode"});
        load_field(g, "d0_m", cfg.geometry.d0_m);
        load_field(g, "h_r_m", cfg.geometry.h_r_m);
        load_field(g, "h_t_offset_m", cfg.geometry.h_t_offset_m);
        if (g.contains("height_mode"))
            cfg.geometry.height_mode = height_mode_from_string(g["height_mode"].get<std::string>());
    }
    if (doc.contains("calibration")) {
        const json& c = doc["calibration"];
        reject_unknown(c, "calibration",
                       {"g_los_center_db", "g_ref_center_db", "taper_corner_drop_db",
                        "reflection_phase_rad"});
        load_field(c, "g_los_center_db", cfg.calibration.g_los_center_db);
        load_field(c, "g_ref_center_db", cfg.calibration.g_ref_center_db);
        load_field(c, "taper_corner_drop_db", cfg.calibration.taper_corner_drop_db);
        load_field(c, "reflection_phase_rad", cfg.calibration.reflection_phase_rad);
    }
    if (doc.contains("grid")) {
        const json& g = doc["grid"];
        reject_unknown(g, "grid", {"rows", "cols", "spacing_m", "center_row", "center_col"});
        load_field(g, "rows", cfg.grid.rows);
        load_field(g, "cols", cfg.grid.cols);
        load_field(g, "spacing_m", cfg.grid.spacing_m);
        cfg.grid.center_row = (cfg.grid.rows + 1) / 2;
        cfg.grid.center_col = (cfg.grid.cols + 1) / 2;
        load_field(g, "center_row", cfg.grid.center_row);
        load_field(g, "center_col", cfg.grid.center_col);
    }
    if (doc.contains("frequency")) {
        const json& f = doc["frequency"];
        reject_unknown(f, "frequency", {"f_start_hz", "f_stop_hz", "n_points"});
        load_field(f, "f_start_hz", cfg.freq.f_start_hz);
        load_field(f, "f_stop_hz", cfg.freq.f_stop_hz);
        load_field(f, "n_points", cfg.freq.n_points);
    }
    if (doc.contains("covariance")) {
        const json& c = doc["covariance"];
        reject_unknown(c, "covariance", {"lambda_m", "fit"});
        load_field(c, "lambda_m", cfg.cov_lambda_m);
        load_field(c, "fit", cfg.cov_fit);
    }
    if (doc.contains("selection")) {
        const json& s = doc["selection"];
        reject_unknown(s, "selection", {"ma_list", "areas"});
        if (s.contains("ma_list")) {
            cfg.ma_list.clear();
            for (const auto& e : s["ma_list"]) cfg.ma_list.push_back(parse_ma(e.get<std::string>()));
        }
        if (s.contains("areas")) cfg.areas = s["areas"].get<std::vector<std::size_t>>();
    }
    if (doc.contains("sweep")) {
        const json& s = doc["sweep"];
        reject_unknown(s, "sweep",
                       {"p_start_dbm", "p_stop_dbm", "p_step_db", "noise_mw", "carrier_hz",
                        "normalization"});
        load_field(s, "p_start_dbm", cfg.sweep.p_start_dbm);
        load_field(s, "p_stop_dbm", cfg.sweep.p_stop_dbm);
        load_field(s, "p_step_db", cfg.sweep.p_step_db);
        load_field(s, "noise_mw", cfg.sweep.noise_mw);
        load_field(s, "carrier_hz", cfg.sweep.carrier_hz);
        if (s.contains("normalization"))
            cfg.sweep.normalization =
                normalization_from_string(s["normalization"].get<std::string>());
    }
    load_field(doc, "output_dir", cfg.output_dir);
    return cfg;
}

json config_to_json(const RunConfig& cfg) {
    json ma = json::array();
    for (const MAConfig& m : cfg.ma_list) ma.push_back(m.name());
    return {
        {"geometry",
         {{"d0_m", cfg.geometry.d0_m},
          {"h_r_m", cfg.geometry.h_r_m},
          {"h_t_offset_m", cfg.geometry.h_t_offset_m},
          {"height_mode", to_string(cfg.geometry.height_mode)}}},
        {"calibration",
         {{"g_los_center_db", cfg.calibration.g_los_center_db},
          {"g_ref_center_db", cfg.calibration.g_ref_center_db},
          {"taper_corner_drop_db", cfg.calibration.taper_corner_drop_db},
          {"reflection_phase_rad", cfg.calibration.reflection_phase_rad}}},
        {"grid",
         {{"rows", cfg.grid.rows},
          {"cols", cfg.grid.cols},
          {"spacing_m", cfg.grid.spacing_m},
          {"center_row", cfg.grid.center_row},
          {"center_col", cfg.grid.center_col}}},
        {"frequency",
         {{"f_start_hz", cfg.freq.f_start_hz},
          {"f_stop_hz", cfg.freq.f_stop_hz},
          {"n_points", cfg.freq.n_points}}},
        {"covariance", {{"lambda_m", cfg.cov_lambda_m}, {"fit", cfg.cov_fit}}},
        {"selection", {{"ma_list", ma}, {"areas", cfg.areas}}},
        {"sweep",
         {{"p_start_dbm", cfg.sweep.p_start_dbm},
          {"p_stop_dbm", cfg.sweep.p_stop_dbm},
          {"p_step_db", cfg.sweep.p_step_db},
          {"noise_mw", cfg.sweep.noise_mw},
          {"carrier_hz", cfg.sweep.carrier_hz},
          {"normalization", to_string(cfg.sweep.normalization)}}},
        {"output_dir", cfg.output_dir},
    };
}

void write_json_file(const json& doc, const fs::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << doc.dump(2) << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

fs::path resolve_out_dir(const std::string& flag_out, const RunConfig& cfg) {
    // MA_CHANSIM_OUT wins over --out, which wins over the config file.
    if (const char* env = std::getenv("MA_CHANSIM_OUT"); env && *env) return fs::path(env);
    if (!flag_out.empty()) return fs::path(flag_out);
    return fs::path(cfg.output_dir);
}

fs::path prepare_out_dir(const std::string& flag_out, const RunConfig& cfg) {
    const fs::path dir = resolve_out_dir(flag_out, cfg);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    return dir;
}

void write_provenance(const fs::path& dir, const std::string& command, const RunConfig& cfg,
                      std::uint64_t seed) {
    write_json_file({{"command", command}, {"seed", seed}, {"config", config_to_json(cfg)}},
                    dir / "provenance.json");
}

void write_cdf_csv(const RowSamples& samples, const fs::path& path) {
    // Pooled and per-row empirical CDFs of |H| samples.
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out.precision(17);
    out << "scope,magnitude,cdf\n";
    auto emit = [&](const std::string& scope, std::vector<double> mags) {
        std::sort(mags.begin(), mags.end());
        for (std::size_t i = 0; i < mags.size(); ++i)
            out << scope << ',' << mags[i] << ','
                << static_cast<double>(i + 1) / static_cast<double>(mags.size()) << '\n';
    };
    std::vector<double> pooled;
    for (Eigen::Index i = 0; i < samples.rows(); ++i) {
        std::vector<double> row;
        for (Eigen::Index k = 0; k < samples.cols(); ++k) {
            row.push_back(std::abs(samples(i, k)));
            pooled.push_back(std::abs(samples(i, k)));
        }
        emit("row-" + std::to_string(i + 1), std::move(row));
    }
    emit("pooled", std::move(pooled));
    if (!out) throw IoError("write failed: " + path.string());
}

fs::path cmd_synth(const RunConfig& cfg, const fs::path& dir, std::uint64_t seed) {
    const ChannelDataset ds = synth_ctf(cfg.grid, cfg.freq, cfg.geometry, cfg.calibration);
    const fs::path path = dir / "dataset.bin";
    write_dataset(ds, path);
    write_provenance(dir, "synth", cfg, seed);
    return path;
}

void cmd_extract(const ChannelDataset& ds, const std::string& kind, const fs::path& dir) {
    if (kind == "los" || kind == "both")
        write_ray_map_csv(port_ray_maps(ds, RayKind::los), dir / "ray_map_los.csv");
    if (kind == "reflected" || kind == "both")
        write_ray_map_csv(port_ray_maps(ds, RayKind::reflected), dir / "ray_map_reflected.csv");
    if (kind != "los" && kind != "reflected" && kind != "both")
        throw ConfigError("unknown ray kind: " + kind);
}

void cmd_cov(const ChannelDataset& ds, const RunConfig& cfg, const fs::path& dir) {
    const PortCoefficientField field =
        narrowband_slice(ds, cfg.sweep.carrier_hz, cfg.sweep.normalization);
    const RowSamples rows = row_samples_from_field(field);
    const ComplexCovariance ccov = complex_cov(rows);
    const MagnitudeCovariance mcov = magnitude_cov(rows);
    write_matrix_csv(ccov.sigma, dir / "cov_complex");
    write_matrix_csv(mcov.sigma, dir / "cov_magnitude.csv");
    write_cdf_csv(rows, dir / "magnitude_cdf.csv");

    json summary{{"carrier_hz", cfg.sweep.carrier_hz},
                 {"normalization", to_string(cfg.sweep.normalization)},
                 {"rows", rows.rows()},
                 {"samples_per_row", rows.cols()}};
    if (cfg.cov_fit) {
        const Eigen::VectorXd seq = mcov.sigma.row(0).transpose();
        const PeriodicFit fit = cov_model_fit(seq, cfg.cov_lambda_m, ds.grid.spacing_m);
        summary["fit"] = {{"a1", fit.params.a1}, {"b1", fit.params.b1}, {"c1", fit.params.c1},
                          {"a2", fit.params.a2}, {"b2", fit.params.b2}, {"c2", fit.params.c2},
                          {"lambda_m", fit.params.lambda_m},
                          {"spacing_m", fit.params.spacing_m},
                          {"residual_norm", fit.residual_norm},
                          {"relative_residual", fit.relative_residual}};
    }
    write_json_file(summary, dir / "cov_summary.json");
}

void cmd_genchan(const ChannelDataset& ds, const RunConfig& cfg, const fs::path& dir,
                 std::size_t count, std::uint64_t seed, const std::string& kind,
                 const std::string& source) {
    const PortCoefficientField field =
        narrowband_slice(ds, cfg.sweep.carrier_hz, cfg.sweep.normalization);
    const RowSamples rows = row_samples_from_field(field);
    json diag{{"count", count}, {"seed", seed}, {"kind", kind}, {"source", source}};
    if (kind == "magnitude") {
        const MagnitudeSamples out = gen_magnitudes(magnitude_cov(rows), count, seed);
        write_matrix_csv(out.samples, dir / "generated_magnitude.csv");
        diag["negative_magnitudes"] = out.negative_count;
    } else if (kind == "complex") {
        const ComplexSource src = source == "empirical-rows"
                                      ? ComplexSource::empirical_rows
                                      : ComplexSource::circular_uniform_phase;
        if (source != "empirical-rows" && source != "circular-uniform-phase")
            throw ConfigError("unknown sample source: " + source);
        const Eigen::MatrixXcd out = gen_complex(complex_cov(rows), src, count, seed, &rows);
        write_matrix_csv(out, dir / "generated_complex");
    } else {
        throw ConfigError("unknown generation kind: " + kind);
    }
    write_json_file(diag, dir / "genchan_summary.json");
}

void cmd_select(const ChannelDataset& ds, const RunConfig& cfg, const fs::path& dir,
                const std::string& ma_spec, std::size_t area) {
    const MAConfig ma = parse_ma(ma_spec);
    PortCoefficientField field =
        narrowband_slice(ds, cfg.sweep.carrier_hz, cfg.sweep.normalization);
    if (area != 0) field = centered_subfield(field, area);
    const RegionMap regions = partition_regions(field.grid.rows, field.grid.cols, ma);
    if (!regions.leftover.empty())
        std::cerr << "warning: " << regions.leftover.size()
                  << " leftover ports excluded by floor partitioning\n";
    json doc{{"ma", ma.name()},
             {"area", area == 0 ? field.grid.rows : area},
             {"leftover_ports", regions.leftover.size()},
             {"uniform", selection_to_json(select_uniform(field, regions, 1.0, cfg.sweep.noise_mw))},
             {"greedy",
              selection_to_json(select_greedy(field, ma.antenna_count(), 1.0, cfg.sweep.noise_mw))},
             {"worst", selection_to_json(select_worst(field, regions, 1.0, cfg.sweep.noise_mw))}};
    write_json_file(doc, dir / "selection.json");
}

void cmd_evaluate(const ChannelDataset& ds, const RunConfig& cfg, const fs::path& dir) {
    for (const MAConfig& ma : cfg.ma_list) {
        if (ds.grid.cols % std::max<std::size_t>(ma.n, 1) != 0 ||
            ds.grid.rows % std::max<std::size_t>(ma.m, 1) != 0)
            std::cerr << "warning: " << ma.name()
                      << " leaves leftover ports under floor partitioning\n";
    }
    const ExperimentReport report = improvement_table(ds, cfg.ma_list, cfg.areas, cfg.sweep);
    write_sweep_csv(report, dir / "sweep.csv");
    write_table_csv(report, dir / "improvement_table.csv");
    write_json_file(report_to_json(report), dir / "report.json");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Movable-antenna channel simulation and evaluation toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_flag;
    std::uint64_t seed = 0;
    unsigned threads = 0;  // cap on worker threads; 0 = default
    app.add_option("--config", config_path, "JSON run configuration");
    app.add_option("--seed", seed, "RNG seed for generators");
    app.add_option("--out", out_flag, "output directory (MA_CHANSIM_OUT overrides)");
    app.add_option("--threads", threads, "max worker threads");

    auto* synth = app.add_subcommand("synth", "synthesize a two-ray channel dataset");
    std::string dataset_path;
    std::string kind = "both";
    std::string gen_kind = "complex";
    std::string gen_source = "circular-uniform-phase";
    std::string ma_spec = "2x1";
    std::size_t area = 0;
    std::size_t count = 1000;

    auto* extract = app.add_subcommand("extract", "extract per-port ray maps");
    extract->add_option("dataset", dataset_path, "dataset file")->required();
    extract->add_option("--kind", kind, "los, reflected, or both");

    auto* cov = app.add_subcommand("cov", "estimate spatial covariance matrices");
    cov->add_option("dataset", dataset_path, "dataset file")->required();
    bool fit_flag = false;
    cov->add_flag("--fit", fit_flag, "fit the periodic covariance model");

    auto* genchan = app.add_subcommand("genchan", "generate correlated channel samples");
    genchan->add_option("dataset", dataset_path, "dataset file")->required();
    genchan->add_option("--count", count, "number of samples");
    genchan->add_option("--kind", gen_kind, "complex or magnitude");
    genchan->add_option("--source", gen_source, "circular-uniform-phase or empirical-rows");

    auto* select = app.add_subcommand("select", "select MA port positions");
    select->add_option("dataset", dataset_path, "dataset file")->required();
    select->add_option("--ma", ma_spec, "MA layout, e.g. 4x1");
    select->add_option("--area", area, "centered candidate area (0 = full grid)");

    auto* evaluate = app.add_subcommand("evaluate", "run selection + beamforming sweeps");
    evaluate->add_option("dataset", dataset_path, "dataset file")->required();

    auto* report =
        app.add_subcommand("report", "full pipeline: synth, extract, cov, evaluate");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        RunConfig cfg = load_config(
            config_path.empty() ? std::nullopt : std::optional<fs::path>(config_path));
        if (fit_flag) cfg.cov_fit = true;
        const fs::path dir = prepare_out_dir(out_flag, cfg);

        if (synth->parsed()) {
            cmd_synth(cfg, dir, seed);
        } else if (report->parsed()) {
            const fs::path ds_path = cmd_synth(cfg, dir, seed);
            const ChannelDataset ds = read_dataset(ds_path);
            cmd_extract(ds, "both", dir);
            cmd_cov(ds, cfg, dir);
            cmd_evaluate(ds, cfg, dir);
            write_provenance(dir, "report", cfg, seed);
        } else {
            const ChannelDataset ds = read_dataset(dataset_path);
            if (extract->parsed()) {
                cmd_extract(ds, kind, dir);
                write_provenance(dir, "extract", cfg, seed);
            } else if (cov->parsed()) {
                cmd_cov(ds, cfg, dir);
                write_provenance(dir, "cov", cfg, seed);
            } else if (genchan->parsed()) {
                cmd_genchan(ds, cfg, dir, count, seed, gen_kind, gen_source);
                write_provenance(dir, "genchan", cfg, seed);
            } else if (select->parsed()) {
                cmd_select(ds, cfg, dir, ma_spec, area);
                write_provenance(dir, "select", cfg, seed);
            } else if (evaluate->parsed()) {
                cmd_evaluate(ds, cfg, dir);
                write_provenance(dir, "evaluate", cfg, seed);
            }
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return 1;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}

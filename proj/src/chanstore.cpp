#include "machansim/chanstore.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

namespace machansim {

namespace {

constexpr const char* kLayout = "row-major-real-imag-le-f64";
constexpr int kSchemaVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "dataset I/O assumes a little-endian host");

}  // namespace

void PortGrid::validate() const {
    if (rows < 1 || cols < 1) throw ConfigError("port grid must be at least 1x1");
    if (!(spacing_m > 0)) throw ConfigError("port spacing must be positive");
    if (center_row < 1 || center_row > rows || center_col < 1 || center_col > cols)
        throw ConfigError("grid center port out of range");
}

void FrequencyGrid::validate() const {
    if (!(f_stop_hz > f_start_hz)) throw ConfigError("frequency grid requires f_stop > f_start");
    if (n_points < 2) throw ConfigError("frequency grid requires at least 2 points");
}

std::size_t FrequencyGrid::nearest_index(double f_hz) const {
    if (f_hz < f_start_hz || f_hz > f_stop_hz)
        throw NumericError("carrier " + std::to_string(f_hz) + " Hz outside sweep band");
    double pos = (f_hz - f_start_hz) / spacing_hz();
    auto idx = static_cast<std::size_t>(std::llround(pos));
    return std::min(idx, n_points - 1);
}

void ChannelDataset::validate() const {
    grid.validate();
    freq.validate();
    if (ctf.size() != grid.port_count() * freq.n_points)
        throw ConfigError("ctf tensor size does not match grid and frequency dimensions");
    for (const cplx& v : ctf)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw NumericError("ctf tensor contains non-finite entries");
}

void write_dataset(const ChannelDataset& ds, const std::filesystem::path& path) {
    ds.validate();
    nlohmann::json header{
        {"schema_version", kSchemaVersion},
        {"rows", ds.grid.rows},
        {"cols", ds.grid.cols},
        {"spacing_m", ds.grid.spacing_m},
        {"center_row", ds.grid.center_row},
        {"center_col", ds.grid.center_col},
        {"f_start_hz", ds.freq.f_start_hz},
        {"f_stop_hz", ds.freq.f_stop_hz},
        {"n_points", ds.freq.n_points},
        {"layout", kLayout},
        {"label", ds.label},
    };
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << header.dump() << '\n';
    out.write(reinterpret_cast<const char*>(ds.ctf.data()),
              static_cast<std::streamsize>(ds.ctf.size() * sizeof(cplx)));
    if (!out) throw IoError("write failed: " + path.string());
}

ChannelDataset read_dataset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    std::string header_line;
    if (!std::getline(in, header_line))
        throw ConfigError("missing dataset header: " + path.string());

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(header_line);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("malformed dataset header in " + path.string() + ": " + e.what());
    }

    ChannelDataset ds;
    try {
        if (header.at("schema_version").get<int>() != kSchemaVersion)
            throw ConfigError("unsupported dataset schema version in " + path.string());
        if (header.at("layout").get<std::string>() != kLayout)
            throw ConfigError("unsupported dataset layout in " + path.string());
        ds.grid.rows = header.at("rows").get<std::size_t>();
        ds.grid.cols = header.at("cols").get<std::size_t>();
        ds.grid.spacing_m = header.at("spacing_m").get<double>();
        ds.grid.center_row = header.at("center_row").get<std::size_t>();
        ds.grid.center_col = header.at("center_col").get<std::size_t>();
        ds.freq.f_start_hz = header.at("f_start_hz").get<double>();
        ds.freq.f_stop_hz = header.at("f_stop_hz").get<double>();
        ds.freq.n_points = header.at("n_points").get<std::size_t>();
        ds.label = header.at("label").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("incomplete dataset header in " + path.string() + ": " + e.what());
    }
    ds.grid.validate();
    ds.freq.validate();

    const std::size_t n = ds.grid.port_count() * ds.freq.n_points;
    ds.ctf.resize(n);
    in.read(reinterpret_cast<char*>(ds.ctf.data()),
            static_cast<std::streamsize>(n * sizeof(cplx)));
    if (static_cast<std::size_t>(in.gcount()) != n * sizeof(cplx))
        throw ConfigError("truncated dataset payload in " + path.string());
    char extra;
    if (in.read(&extra, 1))
        throw ConfigError("dataset payload larger than header dimensions in " + path.string());
    return ds;
}

PortCoefficientField narrowband_slice(const ChannelDataset& ds, double f_carrier_hz,
                                      Normalization norm) {
    const std::size_t k = ds.freq.nearest_index(f_carrier_hz);
    PortCoefficientField field;
    field.grid = ds.grid;
    field.normalization = norm;
    field.h.resize(ds.grid.port_count());
    for (std::size_t r = 1; r <= ds.grid.rows; ++r)
        for (std::size_t c = 1; c <= ds.grid.cols; ++c)
            field.at(r, c) = ds.at(r, c, k);

    if (norm == Normalization::unit_mean_power) {
        double mean_power = 0.0;
        for (const cplx& v : field.h) mean_power += std::norm(v);
        mean_power /= static_cast<double>(field.h.size());
        if (!(mean_power > 0))
            throw NumericError("cannot normalize an all-zero coefficient field");
        const double scale = 1.0 / std::sqrt(mean_power);
        for (cplx& v : field.h) v *= scale;
    }
    return field;
}

const char* to_string(Normalization n) {
    return n == Normalization::raw ? "raw" : "unit-mean-power";
}

Normalization normalization_from_string(const std::string& s) {
    if (s == "raw") return Normalization::raw;
    if (s == "unit-mean-power") return Normalization::unit_mean_power;
    throw ConfigError("unknown normalization mode: " + s);
}

}  // namespace machansim

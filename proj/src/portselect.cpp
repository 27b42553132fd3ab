#include "machansim/portselect.hpp"

#include <algorithm>
#include <cmath>

namespace machansim {

RegionMap partition_regions(std::size_t M, std::size_t N, const MAConfig& cfg) {
    if (cfg.m < 1 || cfg.n < 1) throw ConfigError("MA layout must be at least 1x1");
    if (cfg.m > M || cfg.n > N)
        throw ConfigError("MA layout " + cfg.name() + " does not fit a " + std::to_string(M) +
                          "x" + std::to_string(N) + " grid");
    const std::size_t row_span = M / cfg.m;
    const std::size_t col_span = N / cfg.n;

    RegionMap map;
    map.grid_rows = M;
    map.grid_cols = N;
    map.regions.reserve(cfg.antenna_count());
    for (std::size_t j = 1; j <= cfg.m; ++j) {
        for (std::size_t i = 1; i <= cfg.n; ++i) {
            map.regions.push_back({(j - 1) * row_span + 1, j * row_span,
                                   (i - 1) * col_span + 1, i * col_span});
        }
    }
    for (std::size_t r = 1; r <= M; ++r)
        for (std::size_t c = 1; c <= N; ++c)
            if (r > cfg.m * row_span || c > cfg.n * col_span) map.leftover.push_back({r, c});
    return map;
}

double port_sinr(cplx h, double p_mw, double noise_mw) {
    if (!(noise_mw > 0)) throw NumericError("noise power must be positive");
    if (p_mw < 0) throw NumericError("transmit power must be nonnegative");
    return p_mw * std::norm(h) / noise_mw;
}

namespace {

SelectionResult select_per_region(const PortCoefficientField& field, const RegionMap& regions,
                                  double p_mw, double noise_mw, bool maximize) {
    if (regions.grid_rows != field.grid.rows || regions.grid_cols != field.grid.cols)
        throw ConfigError("region map does not match the field grid");
    SelectionResult result;
    result.scheme = maximize ? SelectionScheme::uniform_region : SelectionScheme::worst_region;
    for (const Region& region : regions.regions) {
        if (region.row_lo > region.row_hi || region.col_lo > region.col_hi)
            throw ConfigError("empty movable region in partition");
        PortRef best{};
        double best_sinr = 0.0;
        bool first = true;
        for (std::size_t r = region.row_lo; r <= region.row_hi; ++r) {
            for (std::size_t c = region.col_lo; c <= region.col_hi; ++c) {
                const double s = port_sinr(field.at(r, c), p_mw, noise_mw);
                const bool better = maximize ? s > best_sinr : s < best_sinr;
                if (first || better) {
                    best = {r, c};
                    best_sinr = s;
                    first = false;
                }
            }
        }
        result.positions.push_back(best);
        result.sinr.push_back(best_sinr);
    }
    return result;
}

}  // namespace

SelectionResult select_uniform(const PortCoefficientField& field, const RegionMap& regions,
                               double p_mw, double noise_mw) {
    return select_per_region(field, regions, p_mw, noise_mw, true);
}

SelectionResult select_worst(const PortCoefficientField& field, const RegionMap& regions,
                             double p_mw, double noise_mw) {
    return select_per_region(field, regions, p_mw, noise_mw, false);
}

SelectionResult select_greedy(const PortCoefficientField& field, std::size_t n_t, double p_mw,
                              double noise_mw) {
    if (n_t > field.grid.port_count())
        throw ConfigError("cannot select more antennas than candidate ports");
    struct Entry {
        double sinr;
        PortRef port;
    };
    std::vector<Entry> entries;
    entries.reserve(field.grid.port_count());
    for (std::size_t r = 1; r <= field.grid.rows; ++r)
        for (std::size_t c = 1; c <= field.grid.cols; ++c)
            entries.push_back({port_sinr(field.at(r, c), p_mw, noise_mw), {r, c}});
    std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        if (a.sinr != b.sinr) return a.sinr > b.sinr;
        return a.port < b.port;
    });

    SelectionResult result;
    result.scheme = SelectionScheme::greedy;
    for (std::size_t i = 0; i < n_t; ++i) {
        result.positions.push_back(entries[i].port);
        result.sinr.push_back(entries[i].sinr);
    }
    return result;
}

const char* to_string(SelectionScheme s) {
    switch (s) {
        case SelectionScheme::uniform_region: return "uniform-region";
        case SelectionScheme::greedy: return "greedy";
        default: return "worst-region";
    }
}

}  // namespace machansim

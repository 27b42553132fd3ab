#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <Eigen/Dense>

#include "machansim/chanstore.hpp"

namespace machansim {

// Samples of the per-row channel coefficients: row i holds the m samples of
// H_i (one horizontal position per row, vertical positions as columns).
using RowSamples = Eigen::MatrixXcd;

// Build RowSamples from a narrowband field: grid columns become rows of H,
// grid rows provide the samples (fading varies along the horizontal axis,
// vertical positions are treated as realizations).
RowSamples row_samples_from_field(const PortCoefficientField& field);

struct ComplexCovariance {
    Eigen::MatrixXcd sigma;  // Hermitian PSD
    Eigen::VectorXcd mu;
};

struct MagnitudeCovariance {
    Eigen::MatrixXd sigma;  // symmetric PSD
    Eigen::VectorXd mu;
};

// Two-sinusoid model of Cov{|H_1|,|H_j|} as a function of row separation,
// with the periodic equivalence rules for larger separations.
struct PeriodicCovParams {
    double a1 = 0.0, b1 = 0.0, c1 = 0.0;
    double a2 = 0.0, b2 = 0.0, c2 = 0.0;
    double lambda_m = 1e-3;
    double spacing_m = 1e-3;
};

struct PeriodicFit {
    PeriodicCovParams params;
    double residual_norm = 0.0;
    double relative_residual = 0.0;
};

struct MagnitudeSamples {
    Eigen::MatrixXd samples;  // n x count
    std::size_t negative_count = 0;  // generated magnitudes below zero (reported, not clamped)
};

enum class ComplexSource { circular_uniform_phase, empirical_rows };

// Population (1/m) covariance estimators.
ComplexCovariance complex_cov(const RowSamples& s);
MagnitudeCovariance magnitude_cov(const RowSamples& s);

// Sigma = C C^H via Cholesky, falling back to an eigendecomposition with the
// negative tail of the spectrum clamped at zero for near-singular inputs.
Eigen::MatrixXcd factorize(const Eigen::MatrixXcd& sigma);
Eigen::MatrixXd factorize(const Eigen::MatrixXd& sigma);

// |H| = mu + C X with X_i ~ U[-sqrt(3), sqrt(3)] (zero mean, unit variance).
// Deterministic per (seed, sample index, component) regardless of schedule.
MagnitudeSamples gen_magnitudes(const MagnitudeCovariance& model, std::size_t count,
                                std::uint64_t seed);

// H = mu + C Y. Y is either unit-modulus uniform-phase noise or columns of
// the normalized empirical rows (cycled when count exceeds the sample count).
Eigen::MatrixXcd gen_complex(const ComplexCovariance& model, ComplexSource source,
                             std::size_t count, std::uint64_t seed,
                             const RowSamples* empirical = nullptr);

// Per-row zero-mean unit-variance normalization (complex mean, population
// variance).
RowSamples normalize_rows(const RowSamples& g);

// Evaluate the periodic covariance model for 1-based row indices (i, j).
// Reduction to the base curve: the two stated equivalences (shift both rows
// by 6 wavelengths, shift one row by 12) collapse to separation mod 12.
double cov_model_eval(std::size_t i, std::size_t j, const PeriodicCovParams& p);

// Least-squares fit of the two-sinusoid base curve to a covariance sequence
// cov[j] sampled at separations (j)*spacing, j = 0..len-1. Initialized from
// the two dominant discrete-spectrum peaks, refined by variable projection.
PeriodicFit cov_model_fit(const Eigen::VectorXd& cov_sequence, double lambda_m,
                          double spacing_m);

// Counter-based uniform variate on [0,1); the per-sample stream used by the
// generators, exposed for tests.
double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

void write_matrix_csv(const Eigen::MatrixXd& m, const std::filesystem::path& path);
void write_matrix_csv(const Eigen::MatrixXcd& m, const std::filesystem::path& base_path_no_ext);

}  // namespace machansim

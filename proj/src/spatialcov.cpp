#include "machansim/spatialcov.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

namespace machansim {

namespace {

constexpr double kSqrt3 = 1.7320508075688772935;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

void check_samples(const RowSamples& s) {
    if (s.rows() < 1) throw NumericError("row samples must contain at least one row");
    if (s.cols() < 2) throw NumericError("covariance estimation needs at least 2 samples per row");
    if (!s.allFinite()) throw NumericError("row samples contain non-finite entries");
}

template <typename Matrix>
Matrix factorize_impl(const Matrix& sigma, const char* what) {
    if (sigma.rows() != sigma.cols())
        throw ConfigError(std::string(what) + " matrix must be square");
    const double scale = std::max(1.0, sigma.cwiseAbs().maxCoeff());
    if ((sigma - sigma.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw ConfigError(std::string(what) + " matrix is not Hermitian within tolerance");

    Eigen::LLT<Matrix> llt(sigma);
    if (llt.info() == Eigen::Success) {
        Matrix c = llt.matrixL();
        if ((sigma - c * c.adjoint()).norm() <= 1e-12 * std::max(1.0, sigma.norm())) return c;
    }

    // Cholesky declined (rank deficiency or tiny negative pivots from
    // rounding): fall back to an eigendecomposition with the negative tail of
    // the spectrum clamped at zero.
    Eigen::SelfAdjointEigenSolver<Matrix> es(sigma);
    if (es.info() != Eigen::Success)
        throw NumericError(std::string(what) + " matrix factorization failed");
    Eigen::VectorXd d = es.eigenvalues();
    const double trace = sigma.real().trace();
    const double neg_tol = 1e-10 * std::max(std::abs(trace), 0.0);
    for (Eigen::Index i = 0; i < d.size(); ++i) {
        if (d(i) < -neg_tol)
            throw NumericError(std::string(what) + " matrix is indefinite beyond tolerance");
        d(i) = std::max(d(i), 0.0);
    }
    return es.eigenvectors() * d.cwiseSqrt().asDiagonal();
}

// One sinusoid a*sin(b*u + c) from its linear-form coefficients
// A*sin(b*u) + B*cos(b*u).
void to_amplitude_phase(double A, double B, double& a, double& c) {
    a = std::hypot(A, B);
    c = (a > 0) ? std::atan2(B, A) : 0.0;
}

struct LinearFit {
    Eigen::Vector4d coeffs;
    double residual_norm;
};

LinearFit periodic_linear_fit(const Eigen::VectorXd& y, const Eigen::VectorXd& u, double b1,
                              double b2) {
    Eigen::MatrixXd design(y.size(), 4);
    design.col(0) = (b1 * u).array().sin();
    design.col(1) = (b1 * u).array().cos();
    design.col(2) = (b2 * u).array().sin();
    design.col(3) = (b2 * u).array().cos();
    Eigen::Vector4d coeffs = design.colPivHouseholderQr().solve(y);
    return {coeffs, (design * coeffs - y).norm()};
}

}  // namespace

RowSamples row_samples_from_field(const PortCoefficientField& field) {
    RowSamples s(field.grid.cols, field.grid.rows);
    for (std::size_t c = 1; c <= field.grid.cols; ++c)
        for (std::size_t r = 1; r <= field.grid.rows; ++r)
            s(static_cast<Eigen::Index>(c - 1), static_cast<Eigen::Index>(r - 1)) =
                field.at(r, c);
    return s;
}

ComplexCovariance complex_cov(const RowSamples& s) {
    check_samples(s);
    const auto m = static_cast<double>(s.cols());
    ComplexCovariance cov;
    cov.mu = s.rowwise().mean();
    RowSamples centered = s.colwise() - cov.mu;
    cov.sigma = (centered * centered.adjoint()) / m;
    // Enforce exact Hermitian symmetry against rounding in the product.
    cov.sigma = ((cov.sigma + cov.sigma.adjoint()) / 2.0).eval();
    return cov;
}

MagnitudeCovariance magnitude_cov(const RowSamples& s) {
    check_samples(s);
    const auto m = static_cast<double>(s.cols());
    MagnitudeCovariance cov;
    Eigen::MatrixXd mags = s.cwiseAbs();
    cov.mu = mags.rowwise().mean();
    Eigen::MatrixXd centered = mags.colwise() - cov.mu;
    cov.sigma = (centered * centered.transpose()) / m;
    cov.sigma = ((cov.sigma + cov.sigma.transpose()) / 2.0).eval();
    return cov;
}

Eigen::MatrixXcd factorize(const Eigen::MatrixXcd& sigma) {
    return factorize_impl(sigma, "complex covariance");
}

Eigen::MatrixXd factorize(const Eigen::MatrixXd& sigma) {
    return factorize_impl(sigma, "magnitude covariance");
}

double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    const std::uint64_t h = splitmix(splitmix(splitmix(seed) + stream) + index);
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

MagnitudeSamples gen_magnitudes(const MagnitudeCovariance& model, std::size_t count,
                                std::uint64_t seed) {
    const Eigen::MatrixXd c = factorize(model.sigma);
    const auto n = model.sigma.rows();
    MagnitudeSamples out;
    out.samples.resize(n, static_cast<Eigen::Index>(count));
    Eigen::VectorXd x(n);
    for (std::size_t s = 0; s < count; ++s) {
        for (Eigen::Index i = 0; i < n; ++i)
            x(i) = kSqrt3 * (2.0 * counter_uniform(seed, s, static_cast<std::uint64_t>(i)) - 1.0);
        out.samples.col(static_cast<Eigen::Index>(s)) = model.mu + c * x;
    }
    out.negative_count = static_cast<std::size_t>((out.samples.array() < 0.0).count());
    return out;
}

Eigen::MatrixXcd gen_complex(const ComplexCovariance& model, ComplexSource source,
                             std::size_t count, std::uint64_t seed,
                             const RowSamples* empirical) {
    const Eigen::MatrixXcd c = factorize(model.sigma);
    const auto n = model.sigma.rows();

    RowSamples y_rows;
    if (source == ComplexSource::empirical_rows) {
        if (empirical == nullptr)
            throw ConfigError("empirical-rows generation requires row samples");
        if (empirical->rows() != n)
            throw ConfigError("empirical row count does not match the covariance dimension");
        y_rows = normalize_rows(*empirical);
    }

    Eigen::MatrixXcd out(n, static_cast<Eigen::Index>(count));
    Eigen::VectorXcd y(n);
    for (std::size_t s = 0; s < count; ++s) {
        if (source == ComplexSource::circular_uniform_phase) {
            for (Eigen::Index i = 0; i < n; ++i)
                y(i) = std::polar(
                    1.0, kTwoPi * counter_uniform(seed, s, static_cast<std::uint64_t>(i)));
        } else {
            y = y_rows.col(static_cast<Eigen::Index>(s % static_cast<std::size_t>(y_rows.cols())));
        }
        out.col(static_cast<Eigen::Index>(s)) = model.mu + c * y;
    }
    return out;
}

RowSamples normalize_rows(const RowSamples& g) {
    check_samples(g);
    const auto m = static_cast<double>(g.cols());
    RowSamples out(g.rows(), g.cols());
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
        const cplx mean = g.row(i).mean();
        const double var = (g.row(i).array() - mean).abs2().sum() / m;
        if (!(var > 0)) throw NumericError("degenerate (zero-variance) sample row");
        out.row(i) = (g.row(i).array() - mean) / std::sqrt(var);
    }
    return out;
}

double cov_model_eval(std::size_t i, std::size_t j, const PeriodicCovParams& p) {
    if (i < 1 || j < 1) throw ConfigError("row indices are 1-based");
    // Shifting both rows by 6 wavelengths preserves the separation; shifting
    // one row by 12 changes it by 12. Together they reduce any pair to a
    // separation inside the first period.
    const std::size_t sep = (i > j ? i - j : j - i) % 12;
    const double d = static_cast<double>(sep) * p.spacing_m;
    const double u = d / p.lambda_m + 1.0;
    return p.a1 * std::sin(p.b1 * u + p.c1) + p.a2 * std::sin(p.b2 * u + p.c2);
}

PeriodicFit cov_model_fit(const Eigen::VectorXd& cov_sequence, double lambda_m,
                          double spacing_m) {
    if (cov_sequence.size() < 6)
        throw NumericError("periodic covariance fit needs at least 6 points");
    if (!(lambda_m > 0) || !(spacing_m > 0))
        throw ConfigError("wavelength and spacing must be positive");

    const auto len = cov_sequence.size();
    Eigen::VectorXd u(len);
    for (Eigen::Index j = 0; j < len; ++j)
        u(j) = static_cast<double>(j) * spacing_m / lambda_m + 1.0;

    const double u_step = spacing_m / lambda_m;
    const double b_max = std::numbers::pi / u_step;

    // Coarse scan of the two angular frequencies (discrete-spectrum peaks of
    // the residual objective), then variable-projection refinement.
    const int grid = 60;
    double best_b1 = b_max / grid, best_b2 = 2.0 * b_max / grid;
    double best_res = std::numeric_limits<double>::infinity();
    for (int p = 1; p <= grid; ++p) {
        for (int q = p; q <= grid; ++q) {
            const double b1 = b_max * p / grid;
            const double b2 = b_max * q / grid;
            const double res = periodic_linear_fit(cov_sequence, u, b1, b2).residual_norm;
            if (res < best_res) {
                best_res = res;
                best_b1 = b1;
                best_b2 = b2;
            }
        }
    }

    // Alternating golden-section refinement of (b1, b2).
    constexpr double kInvPhi = 0.61803398874989484820;
    double span = b_max / grid;
    for (int round = 0; round < 6; ++round) {
        for (int which = 0; which < 2; ++which) {
            double& b = which == 0 ? best_b1 : best_b2;
            double lo = std::max(b - span, 1e-9);
            double hi = std::min(b + span, b_max);
            auto objective = [&](double bv) {
                const double b1 = which == 0 ? bv : best_b1;
                const double b2 = which == 0 ? best_b2 : bv;
                return periodic_linear_fit(cov_sequence, u, b1, b2).residual_norm;
            };
            double c = hi - (hi - lo) * kInvPhi;
            double d = lo + (hi - lo) * kInvPhi;
            double fc = objective(c), fd = objective(d);
            for (int it = 0; it < 48; ++it) {
                if (fc < fd) {
                    hi = d;
                    d = c;
                    fd = fc;
                    c = hi - (hi - lo) * kInvPhi;
                    fc = objective(c);
                } else {
                    lo = c;
                    c = d;
                    fc = fd;
                    d = lo + (hi - lo) * kInvPhi;
                    fd = objective(d);
                }
            }
            b = 0.5 * (lo + hi);
        }
        span *= 0.25;
    }

    const LinearFit lin = periodic_linear_fit(cov_sequence, u, best_b1, best_b2);
    PeriodicFit fit;
    fit.params.lambda_m = lambda_m;
    fit.params.spacing_m = spacing_m;
    fit.params.b1 = best_b1;
    fit.params.b2 = best_b2;
    to_amplitude_phase(lin.coeffs(0), lin.coeffs(1), fit.params.a1, fit.params.c1);
    to_amplitude_phase(lin.coeffs(2), lin.coeffs(3), fit.params.a2, fit.params.c2);
    fit.residual_norm = lin.residual_norm;
    const double y_norm = cov_sequence.norm();
    fit.relative_residual = y_norm > 0 ? lin.residual_norm / y_norm : 0.0;
    return fit;
}

void write_matrix_csv(const Eigen::MatrixXd& m, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out.precision(17);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) out << ',';
            out << m(i, j);
        }
        out << '\n';
    }
    if (!out) throw IoError("write failed: " + path.string());
}

void write_matrix_csv(const Eigen::MatrixXcd& m, const std::filesystem::path& base_path_no_ext) {
    auto real_path = base_path_no_ext;
    auto imag_path = base_path_no_ext;
    real_path += "_real.csv";
    imag_path += "_imag.csv";
    write_matrix_csv(Eigen::MatrixXd(m.real()), real_path);
    write_matrix_csv(Eigen::MatrixXd(m.imag()), imag_path);
}

}  // namespace machansim

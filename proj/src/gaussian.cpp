#include "macroent/gaussian.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "macroent/errors.hpp"

namespace macroent {

namespace {

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

bool is_symmetric(const Matrix& m) {
  return max_abs(m - m.transpose()) <= kSymmetryTolerance * std::max(1.0, max_abs(m));
}

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

void check_dim(std::size_t expected, Eigen::Index actual, const char* what) {
  if (static_cast<Eigen::Index>(expected) != actual) {
    throw ConfigError(fmt::format("{}: dimension {} does not match state dimension {}", what,
                                  actual, expected));
  }
}

}  // namespace

Matrix symplectic_form(std::size_t modes) {
  Matrix omega = Matrix::Zero(2 * modes, 2 * modes);
  for (std::size_t k = 0; k < modes; ++k) {
    omega(x_index(k), p_index(k)) = 1.0;
    omega(p_index(k), x_index(k)) = -1.0;
  }
  return omega;
}

GaussianState GaussianState::from_moments(std::vector<std::string> mode_labels, Vector mean,
                                          Matrix cov) {
  if (mode_labels.empty()) throw ConfigError("Gaussian state needs at least one mode");
  const auto dim = static_cast<Eigen::Index>(2 * mode_labels.size());
  if (mean.size() != dim || cov.rows() != dim || cov.cols() != dim) {
    throw ConfigError(fmt::format("state with {} modes needs mean of length {} and a {}x{} "
                                  "covariance (got {} and {}x{})",
                                  mode_labels.size(), dim, dim, dim, mean.size(), cov.rows(),
                                  cov.cols()));
  }
  if (!mean.allFinite() || !cov.allFinite()) throw NumericalError("non-finite state moments");
  if (!is_symmetric(cov)) throw NumericalError("covariance matrix is not symmetric");
  cov = symmetrized(cov);
  const auto nu = symplectic_eigenvalues(cov);
  // Rounding the entries alone moves nu by about eps * lambda_max^2 / nu, so
  // strongly squeezed states get a proportionally wider margin.
  const double scale = static_cast<double>(dim) * cov.diagonal().maxCoeff();
  const double tolerance =
      kUncertaintyTolerance + 64.0 * std::numeric_limits<double>::epsilon() * scale * scale;
  if (nu.front() < kVacuumVariance - tolerance) {
    throw NumericalError(fmt::format(
        "uncertainty principle violated: smallest symplectic eigenvalue {:.17g} < 1/2", nu.front()));
  }
  return GaussianState(std::move(mode_labels), std::move(mean), std::move(cov));
}

GaussianState GaussianState::from_conditioned_moments(std::vector<std::string> mode_labels,
                                                      Vector mean, Matrix cov) {
  const auto dim = static_cast<Eigen::Index>(2 * mode_labels.size());
  if (mode_labels.empty() || mean.size() != dim || cov.rows() != dim || cov.cols() != dim) {
    throw ConfigError("conditioned state: inconsistent dimensions");
  }
  if (!mean.allFinite() || !cov.allFinite()) throw NumericalError("non-finite state moments");
  if (!is_symmetric(cov)) throw NumericalError("covariance matrix is not symmetric");
  cov = symmetrized(cov);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < kPsdFloor * std::max(1.0, max_abs(cov))) {
    throw NumericalError("conditioned covariance is not positive semidefinite");
  }
  return GaussianState(std::move(mode_labels), std::move(mean), std::move(cov));
}

std::size_t GaussianState::mode(std::string_view label) const {
  const auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) throw ConfigError(fmt::format("no mode labelled '{}'", label));
  return static_cast<std::size_t>(it - labels_.begin());
}

LinearMap LinearMap::unitary(Matrix symplectic) {
  const auto n = symplectic.rows();
  return channel(std::move(symplectic), Matrix::Zero(n, n));
}

LinearMap LinearMap::channel(Matrix matrix, Matrix added_noise) {
  if (matrix.rows() != matrix.cols() || matrix.rows() % 2 != 0 ||
      added_noise.rows() != matrix.rows() || added_noise.cols() != matrix.cols()) {
    throw ConfigError("linear map needs square, even-dimensional matrix and noise of equal shape");
  }
  if (max_abs(added_noise) == 0.0) {
    const auto omega = symplectic_form(static_cast<std::size_t>(matrix.rows() / 2));
    if (max_abs(matrix * omega * matrix.transpose() - omega) > 1e-9) {
      throw NumericalError("noiseless linear map is not symplectic");
    }
    return LinearMap{std::move(matrix), std::move(added_noise)};
  }
  return LinearMap{std::move(matrix), clip_psd(added_noise)};
}

Observable quadrature_observable(std::size_t dim,
                                 std::initializer_list<std::pair<std::size_t, double>> terms,
                                 double detector_noise_var) {
  Observable obs{Vector::Zero(static_cast<Eigen::Index>(dim)), detector_noise_var};
  for (const auto& [index, coefficient] : terms) {
    if (index >= dim) throw ConfigError("observable term outside the state dimension");
    obs.coefficients(static_cast<Eigen::Index>(index)) += coefficient;
  }
  return obs;
}

GaussianState vacuum_state(std::vector<std::string> mode_labels) {
  if (mode_labels.empty()) throw ConfigError("vacuum_state: empty mode label list");
  const auto dim = static_cast<Eigen::Index>(2 * mode_labels.size());
  return GaussianState::from_moments(std::move(mode_labels), Vector::Zero(dim),
                                     kVacuumVariance * Matrix::Identity(dim, dim));
}

GaussianState with_vacuum_modes(const GaussianState& state, std::vector<std::string> labels) {
  auto all = state.mode_labels();
  all.insert(all.end(), labels.begin(), labels.end());
  const auto old_dim = static_cast<Eigen::Index>(state.dim());
  const auto dim = static_cast<Eigen::Index>(2 * all.size());
  Vector mean = Vector::Zero(dim);
  mean.head(old_dim) = state.mean();
  Matrix cov = kVacuumVariance * Matrix::Identity(dim, dim);
  cov.topLeftCorner(old_dim, old_dim) = state.cov();
  return GaussianState::from_moments(std::move(all), std::move(mean), std::move(cov));
}

GaussianState reduced_state(const GaussianState& state, std::span<const std::string> keep) {
  std::vector<Eigen::Index> rows;
  std::vector<std::string> labels;
  for (const auto& label : keep) {
    const auto m = state.mode(label);
    rows.push_back(static_cast<Eigen::Index>(x_index(m)));
    rows.push_back(static_cast<Eigen::Index>(p_index(m)));
    labels.push_back(label);
  }
  const auto n = static_cast<Eigen::Index>(rows.size());
  Vector mean(n);
  Matrix cov(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    mean(i) = state.mean()(rows[i]);
    for (Eigen::Index j = 0; j < n; ++j) cov(i, j) = state.cov()(rows[i], rows[j]);
  }
  return GaussianState::from_moments(std::move(labels), std::move(mean), std::move(cov));
}

GaussianState apply_linear_map(const GaussianState& state, const LinearMap& map) {
  check_dim(state.dim(), map.matrix.rows(), "linear map");
  check_dim(state.dim(), map.added_noise.rows(), "linear map noise");
  const Matrix noise = clip_psd(map.added_noise);
  Vector mean = map.matrix * state.mean();
  Matrix cov = symmetrized(map.matrix * state.cov() * map.matrix.transpose() + noise);
  return GaussianState::from_moments(state.mode_labels(), std::move(mean), std::move(cov));
}

ObservableMoments observable_moments(const GaussianState& state, const Observable& obs) {
  check_dim(state.dim(), obs.coefficients.size(), "observable");
  if (obs.detector_noise_var < 0.0) throw ConfigError("negative detector noise variance");
  const auto& c = obs.coefficients;
  return {c.dot(state.mean()), c.dot(state.cov() * c) + obs.detector_noise_var};
}

std::pair<Vector, Matrix> joint_moments(const GaussianState& state,
                                        std::span<const Observable> observables) {
  const auto k = static_cast<Eigen::Index>(observables.size());
  Matrix coeffs(k, static_cast<Eigen::Index>(state.dim()));
  Vector noise(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    check_dim(state.dim(), observables[i].coefficients.size(), "observable");
    coeffs.row(i) = observables[i].coefficients.transpose();
    noise(i) = observables[i].detector_noise_var;
  }
  Matrix cov = symmetrized(coeffs * state.cov() * coeffs.transpose());
  cov.diagonal() += noise;
  return {coeffs * state.mean(), cov};
}

GaussianState condition_on_observable(const GaussianState& state, const Observable& obs,
                                      double measured_value) {
  if (obs.coefficients.size() > 0 && obs.coefficients.isZero(0.0)) {
    throw ConfigError("observable coefficients are all zero");
  }
  const auto moments = observable_moments(state, obs);
  const double scale = std::max(1.0, state.cov().diagonal().cwiseAbs().maxCoeff()) *
                       std::max(1.0, obs.coefficients.squaredNorm());
  const double innovation = measured_value - moments.mean;
  if (moments.variance <= 1e-14 * scale) {
    if (std::abs(innovation) <= 1e-9 * (1.0 + std::abs(moments.mean))) return state;
    throw DegenerateMeasurement(fmt::format(
        "observable has zero variance but outcome {:.17g} differs from its value {:.17g}",
        measured_value, moments.mean));
  }
  const Vector cross = state.cov() * obs.coefficients;
  const Vector gain = cross / moments.variance;
  Vector mean = state.mean() + gain * innovation;
  Matrix cov = symmetrized(state.cov() - cross * cross.transpose() / moments.variance);
  return GaussianState::from_conditioned_moments(state.mode_labels(), std::move(mean),
                                                 std::move(cov));
}

GaussianState condition_on_observables(const GaussianState& state,
                                       std::span<const Observable> observables,
                                       std::span<const double> values) {
  if (observables.size() != values.size()) {
    throw ConfigError("one measured value is needed per observable");
  }
  GaussianState out = state;
  for (std::size_t i = 0; i < observables.size(); ++i) {
    out = condition_on_observable(out, observables[i], values[i]);
  }
  return out;
}

std::vector<double> symplectic_eigenvalues(const Matrix& cov) {
  if (cov.rows() != cov.cols() || cov.rows() % 2 != 0 || cov.rows() == 0) {
    throw ConfigError("symplectic spectrum needs a nonempty, square, even-dimensional matrix");
  }
  if (!is_symmetric(cov)) throw NumericalError("covariance matrix is not symmetric");
  const auto modes = static_cast<std::size_t>(cov.rows() / 2);
  // For any factor cov = L L^T, L^T Omega L is antisymmetric and similar to
  // Omega cov, so its singular values are the nu's, each twice. A Cholesky
  // factor keeps this accurate for strongly squeezed states; a singular
  // covariance falls back to the symmetric square root.
  const Matrix sym = symmetrized(cov);
  Matrix factor;
  Eigen::LLT<Matrix> llt(sym);
  if (llt.info() == Eigen::Success) {
    factor = llt.matrixL();
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
    const Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    factor = eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
  }
  const Matrix m = factor.transpose() * symplectic_form(modes) * factor;
  Eigen::JacobiSVD<Matrix> svd(m);
  Vector lambda = svd.singularValues().reverse();
  std::vector<double> nu(modes);
  for (std::size_t k = 0; k < modes; ++k) {
    const auto i = static_cast<Eigen::Index>(2 * k);
    nu[k] = 0.5 * (lambda(i) + lambda(i + 1));
  }
  return nu;
}

std::vector<double> symplectic_eigenvalues(const GaussianState& state) {
  return symplectic_eigenvalues(state.cov());
}

double sample_observable(const GaussianState& state, const Observable& obs, std::uint64_t rng_seed) {
  Rng rng(rng_seed);
  return sample_observable(state, obs, rng);
}

double sample_observable(const GaussianState& state, const Observable& obs, Rng& rng) {
  const auto m = observable_moments(state, obs);
  return m.mean + std::sqrt(std::max(0.0, m.variance)) * rng.normal();
}

Vector sample_gaussian(const Vector& mean, const Matrix& cov, Rng& rng) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(clip_psd(cov));
  Vector z(mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
  const Vector scaled = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().cwiseProduct(z);
  return mean + eig.eigenvectors() * scaled;
}

Matrix clip_psd(const Matrix& m) {
  const Matrix sym = symmetrized(m);
  if (sym.size() == 0) return sym;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  const double scale = std::max(1.0, max_abs(sym));
  if (eig.eigenvalues().minCoeff() < kPsdFloor * scale) {
    throw NumericalError(fmt::format("matrix is not positive semidefinite (eigenvalue {:.6g})",
                                     eig.eigenvalues().minCoeff()));
  }
  if (eig.eigenvalues().minCoeff() >= 0.0) return sym;
  return eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).asDiagonal() *
         eig.eigenvectors().transpose();
}

Matrix phase_rotation(std::size_t modes, std::size_t mode, double angle) {
  Matrix r = Matrix::Identity(2 * modes, 2 * modes);
  const auto x = static_cast<Eigen::Index>(x_index(mode));
  const auto p = static_cast<Eigen::Index>(p_index(mode));
  r(x, x) = std::cos(angle);
  r(x, p) = std::sin(angle);
  r(p, x) = -std::sin(angle);
  r(p, p) = std::cos(angle);
  return r;
}

Matrix single_mode_squeezer(std::size_t modes, std::size_t mode, double r) {
  Matrix s = Matrix::Identity(2 * modes, 2 * modes);
  s(static_cast<Eigen::Index>(x_index(mode)), static_cast<Eigen::Index>(x_index(mode))) =
      std::exp(-r);
  s(static_cast<Eigen::Index>(p_index(mode)), static_cast<Eigen::Index>(p_index(mode))) =
      std::exp(r);
  return s;
}

Matrix beam_splitter(std::size_t modes, std::size_t a, std::size_t b, double theta) {
  Matrix bs = Matrix::Identity(2 * modes, 2 * modes);
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  for (std::size_t q = 0; q < 2; ++q) {
    const auto i = static_cast<Eigen::Index>(2 * a + q);
    const auto j = static_cast<Eigen::Index>(2 * b + q);
    bs(i, i) = c;
    bs(i, j) = s;
    bs(j, i) = -s;
    bs(j, j) = c;
  }
  return bs;
}

}  // namespace macroent

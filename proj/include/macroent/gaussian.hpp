#pragma once

// Multimode Gaussian states over real quadratures (x1, p1, ..., xM, pM).
//
// Convention: [x, p] = i, so the vacuum (and a coherent spin state after the
// X = Jz / sqrt(Jx) scaling) has Var(x) = Var(p) = 1/2.

#include <Eigen/Dense>

#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "macroent/rng.hpp"

namespace macroent {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kVacuumVariance = 0.5;
inline constexpr double kSymmetryTolerance = 1e-12;
inline constexpr double kUncertaintyTolerance = 1e-9;
inline constexpr double kPsdFloor = -1e-9;

inline std::size_t x_index(std::size_t mode) { return 2 * mode; }
inline std::size_t p_index(std::size_t mode) { return 2 * mode + 1; }

/// Block-diagonal canonical form Omega = diag([[0, 1], [-1, 0]], ...).
Matrix symplectic_form(std::size_t modes);

class GaussianState {
 public:
  /// Validating constructor. Throws ConfigError on shape problems and
  /// NumericalError on a non-symmetric or unphysical covariance. The
  /// uncertainty margin is kUncertaintyTolerance plus the rounding floor
  /// ~eps * lambda_max^2, which only matters for very strong squeezing.
  static GaussianState from_moments(std::vector<std::string> mode_labels, Vector mean,
                                    Matrix cov);

  /// Post-measurement moments: checked for symmetry and PSD only. A Kalman
  /// update leaves the measured combination with zero variance while its
  /// conjugate stays finite; the modes it did not touch are exact, and
  /// reduced_state re-checks the uncertainty relation once the measured modes
  /// are traced out.
  static GaussianState from_conditioned_moments(std::vector<std::string> mode_labels,
                                                Vector mean, Matrix cov);

  const std::vector<std::string>& mode_labels() const { return labels_; }
  std::size_t num_modes() const { return labels_.size(); }
  std::size_t dim() const { return 2 * labels_.size(); }
  const Vector& mean() const { return mean_; }
  const Matrix& cov() const { return cov_; }

  /// Index of the mode called `label`; throws ConfigError when absent.
  std::size_t mode(std::string_view label) const;

 private:
  GaussianState(std::vector<std::string> labels, Vector mean, Matrix cov)
      : labels_(std::move(labels)), mean_(std::move(mean)), cov_(std::move(cov)) {}

  std::vector<std::string> labels_;
  Vector mean_;
  Matrix cov_;
};

/// Quadrature transformation with admixed noise: q -> matrix q + noise.
struct LinearMap {
  Matrix matrix;
  Matrix added_noise;

  static LinearMap unitary(Matrix symplectic);
  static LinearMap channel(Matrix matrix, Matrix added_noise);
};

/// A measured linear combination of quadratures plus uncorrelated read-out
/// noise of variance `detector_noise_var`.
struct Observable {
  Vector coefficients;
  double detector_noise_var = 0.0;
};

/// Builds an observable from (quadrature index, coefficient) terms.
Observable quadrature_observable(std::size_t dim,
                                 std::initializer_list<std::pair<std::size_t, double>> terms,
                                 double detector_noise_var = 0.0);

GaussianState vacuum_state(std::vector<std::string> mode_labels);

/// Appends vacuum modes after the existing ones.
GaussianState with_vacuum_modes(const GaussianState& state, std::vector<std::string> labels);

/// Reduced state on the listed modes (in the listed order).
GaussianState reduced_state(const GaussianState& state, std::span<const std::string> keep);

GaussianState apply_linear_map(const GaussianState& state, const LinearMap& map);

/// Gaussian (Kalman) update on the outcome of one observable.
///
/// A zero-variance observable whose outcome equals its predicted mean is
/// already known, and the state is returned unchanged. Any other outcome of a
/// zero-variance observable throws DegenerateMeasurement.
GaussianState condition_on_observable(const GaussianState& state, const Observable& obs,
                                      double measured_value);

/// Sequential conditioning on several commuting observables.
GaussianState condition_on_observables(const GaussianState& state,
                                       std::span<const Observable> observables,
                                       std::span<const double> values);

struct ObservableMoments {
  double mean = 0.0;
  double variance = 0.0;
};

ObservableMoments observable_moments(const GaussianState& state, const Observable& obs);

/// Joint mean and covariance of several observables (detector noise on the
/// diagonal).
std::pair<Vector, Matrix> joint_moments(const GaussianState& state,
                                        std::span<const Observable> observables);

/// Ascending symplectic spectrum. Throws NumericalError on a non-symmetric
/// covariance.
std::vector<double> symplectic_eigenvalues(const Matrix& cov);
std::vector<double> symplectic_eigenvalues(const GaussianState& state);

double sample_observable(const GaussianState& state, const Observable& obs, std::uint64_t rng_seed);
double sample_observable(const GaussianState& state, const Observable& obs, Rng& rng);

/// One joint draw from N(mean, cov) for a small PSD covariance.
Vector sample_gaussian(const Vector& mean, const Matrix& cov, Rng& rng);

/// Symmetrizes and clips tiny negative eigenvalues. Throws NumericalError if
/// an eigenvalue lies below kPsdFloor (relative to the matrix scale).
Matrix clip_psd(const Matrix& m);

// Elementary symplectic maps on a `modes`-mode system.
Matrix phase_rotation(std::size_t modes, std::size_t mode, double angle);
Matrix single_mode_squeezer(std::size_t modes, std::size_t mode, double r);
Matrix beam_splitter(std::size_t modes, std::size_t a, std::size_t b, double theta);

}  // namespace macroent

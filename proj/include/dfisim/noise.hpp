#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dfisim/optics.hpp"
#include "dfisim/squeeze.hpp"

namespace dfisim {

// Tabulated Hermitian displacement cross-spectrum, interpolated linearly
// in log f. Rows of the backing CSV are (f, n*n entries row-major).
struct CorrelatedSpectrum {
  std::vector<double> freqs;            // ascending
  std::vector<Eigen::MatrixXcd> mats;   // n x n Hermitian PSD per frequency

  Eigen::MatrixXcd at(double f) const;
  static CorrelatedSpectrum from_csv(const std::string& path, int n_mirrors);
};

struct DisplacementNoise {
  enum class Kind { None, White, Thermal, Correlated };
  Kind kind = Kind::None;
  double delta = 0.0;          // White: m / sqrt(Hz)
  double coeff = 2.7e-30;      // Thermal: m^2/Hz at 1 Hz
  double exponent = 5.0;       // Thermal: delta^2(f) = coeff * f^-exponent
  bool infinite = false;       // delta -> infinity limit, handled by projection
  std::string spectrum_csv;    // Correlated: path, loaded once geometry is known
  std::optional<CorrelatedSpectrum> spectrum;
};

struct SagnacNoise {
  double variance = 0.0;       // scale on d_sagnac d_sagnac^dag
  bool infinite = false;
  double rotation_rate = kEarthRotationRate;
};

struct NoiseModel {
  DisplacementNoise displacement;
  SagnacNoise sagnac;
  bool rpn = false;            // carried from OpticalParams

  static NoiseModel none() { return {}; }
  static NoiseModel white(double delta);
  static NoiseModel thermal(double coeff = 2.7e-30, double exponent = 5.0);
};

// delta^2(f) of the thermal power law, in m^2/Hz.
double thermal_delta2(double f, const NoiseModel& model);

// delta^2(f) for white or thermal displacement kinds (0 for none).
double displacement_delta2(double f, const DisplacementNoise& n);

// Compact-form output covariance. sigma_q holds the finite part only;
// divergent noise directions are recorded in infinite_factor and consumed
// by the Fisher routines through kernel projection.
struct OutputCovariance {
  double frequency = 0.0;
  Eigen::MatrixXcd sigma_q;        // 2k x 2k Hermitian, finite part
  Eigen::MatrixXcd quantum;        // M Sigma_i M^dag
  Eigen::MatrixXcd displacement;   // displacement addend
  Eigen::MatrixXcd sagnac;         // rotation-noise addend

  // Structured pieces for numerically stable information computations:
  // sigma_q = Mtilde Mtilde^dag / 2 + W W^dag / 2, with Mtilde = M sqrt(2 Sigma_i).
  bool structured = false;
  Eigen::MatrixXcd m_int, m21;     // k x k
  Eigen::MatrixXcd pi1;            // antisqueezed projector (2k x 2k), identity share
  double squeeze_r = 0.0;
  Eigen::MatrixXcd noise_factor;   // 2k x r: W
  Eigen::MatrixXcd infinite_factor; // 2k x m: directions of divergent noise

  int k() const { return static_cast<int>(sigma_q.rows()) / 2; }
  bool has_infinite() const { return infinite_factor.cols() > 0; }

  // Mtilde^{-1} x and Mtilde^{-dag} x through the analytic block inverse.
  Eigen::MatrixXcd mtilde_inverse_apply(const Eigen::MatrixXcd& x) const;
  Eigen::MatrixXcd mtilde_inverse_adjoint_apply(const Eigen::MatrixXcd& x) const;

  static OutputCovariance from_dense(double f, Eigen::MatrixXcd sigma);
};

OutputCovariance output_covariance(const TransferSet& ts, const NoiseModel& model,
                                   const SqueezeConfig* squeeze = nullptr);

} // namespace dfisim

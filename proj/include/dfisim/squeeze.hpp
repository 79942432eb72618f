#pragma once

#include <Eigen/Dense>
#include <optional>

namespace dfisim {

// Input squeezing: the quadratures projected by Pi1 are antisqueezed by
// e^{+r}, their conjugates squeezed by e^{-r}. The input covariance is
// Sigma_i = (e^{2r} Pi1 + e^{-2r} (1 - Pi1)) / 2.
struct SqueezeConfig {
  enum class Strategy { Phase, OptimalForPhaseReadout, OptimalForOptimalReadout, Explicit };
  double r = 0.0;
  Strategy strategy = Strategy::Phase;
  std::optional<Eigen::MatrixXcd> explicit_pi1; // 2k x 2k projector

  bool active() const { return r > 0.0; }
};

struct SqueezeProjector {
  Eigen::MatrixXcd pi1;          // antisqueezed span, 2k x 2k
  Eigen::MatrixXcd squeezed_set; // 2k x k, orthonormal commuting columns
};

// Squeezing that keeps antisqueezed light out of the phase quadratures:
// A = arctan(-M_int^dag M21), squeezed set (sin A scaled) built from it.
SqueezeProjector optimal_squeeze_projector(const Eigen::MatrixXcd& m_int,
                                           const Eigen::MatrixXcd& m21);

// Resolve a config to its antisqueezed projector for a given transfer set.
Eigen::MatrixXcd resolve_pi1(const SqueezeConfig& cfg, const Eigen::MatrixXcd& m_int,
                             const Eigen::MatrixXcd& m21);

// Closed-form squeezed information bounds, phase-quadrature space.
double qfi_squeezed(const Eigen::VectorXcd& v_ph, const Eigen::MatrixXcd& a_ph, double delta2,
                    double r);
double fi_phase_squeezed(const Eigen::VectorXcd& v_ph, const Eigen::MatrixXcd& a_ph,
                         const Eigen::MatrixXcd& m21, double delta2, double r);

// Normalized gain from squeezing; defined only for r > 0.
double eta_gain(double f_squeezed, double f_unsqueezed, double r);

} // namespace dfisim

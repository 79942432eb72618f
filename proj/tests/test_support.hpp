#pragma once

#include <Eigen/Dense>

#include "dfisim/optics.hpp"

namespace dfisim::testing {

struct Setup {
  PolygonGeometry geometry;
  OpticalParams params;
  GwSource source;
};

// Default symmetric triangle: 4 km arms, 1064 nm, 5 kg mirrors, T = 0.1,
// 3.5 MW circulating, source at theta = pi/2, phi = 0.
inline Setup default_triangle(bool rpn = false, double T = 0.1) {
  Setup s;
  s.geometry = build_ngon(3, 4000.0 / std::sqrt(3.0));
  s.geometry.port_transmissivities.assign(3, T);
  s.params = OpticalParams::from_wavelength(1.064e-6);
  s.params.arm_length = s.geometry.arm_length;
  s.params.mirror_mass = 5.0;
  s.params.rpn_enabled = rpn;
  s.params.input_amplitude =
      input_amplitude_for_intracavity_power(3.5e6, T, s.params.omega0, 3);
  s.source = make_gw_source(1.5707963267948966, 0.0);
  return s;
}

inline Eigen::MatrixXcd commutation_form(int k) {
  Eigen::MatrixXcd j = Eigen::MatrixXcd::Zero(2 * k, 2 * k);
  j.topRightCorner(k, k) = std::complex<double>(0, 1) * Eigen::MatrixXcd::Identity(k, k);
  j.bottomLeftCorner(k, k) = std::complex<double>(0, -1) * Eigen::MatrixXcd::Identity(k, k);
  return j;
}

} // namespace dfisim::testing

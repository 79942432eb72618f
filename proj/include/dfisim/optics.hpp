#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "dfisim/constants.hpp"
#include "dfisim/geometry.hpp"

namespace dfisim {

using Complex = std::complex<double>;

// Carrier amplitudes are in photon-flux units: the power carried by a
// field of amplitude A is hbar * omega0 * A^2 watts. The carrier is
// assumed resonant, so one arm of propagation multiplies it by 1.
struct OpticalParams {
  double wavelength = 1.064e-6; // m
  double omega0 = 0.0;          // rad/s, derived as 2 pi c / wavelength
  double arm_length = 4000.0;   // m
  double mirror_mass = 5.0;     // kg
  double input_amplitude = 1.0; // sqrt(photons/s), per input port
  bool rpn_enabled = false;

  static OpticalParams from_wavelength(double wavelength_m);
};

// Sets input_amplitude so the circulating power (both directions) equals
// intracavity_power_w. Requires the symmetric preset relation
// p_hit = p_in * T / (1 - sqrt(R))^2; for general transmissivities
// rescale_to_intracavity_power() below works from a carrier solution.
double input_amplitude_for_intracavity_power(double intracavity_power_w, double T,
                                             double omega0, int n_mirrors);

struct CarrierSolution {
  // One entry per port, trajectory-major ordering (see PolygonGeometry).
  Eigen::VectorXd a_in, a_hit, a_ref, a_out;

  // Circulating power in |A|^2 flux units, summed over directions:
  // sum over ports of a_hit^2 / n_mirrors.
  double intracavity_flux(int n_mirrors) const;
};

CarrierSolution solve_carrier(const PolygonGeometry& geometry, const OpticalParams& params);

// Intracavity-to-total-input power ratio. Closed form for the symmetric
// triangle is T / (3 (1 - sqrt(1-T))^2).
double power_gain(const PolygonGeometry& geometry, const OpticalParams& params);
double power_gain_triangle_closed_form(double T);

// Frequency response of one arm to the GW strain: zeta -> L as f -> 0.
// eps = Omega L / (2 c); the phase factor references the arm midpoint.
Complex zeta_arm(const DirectedArm& arm, const GwSource& source, double f, double arm_length);

// Linear system for the sideband fields at one frequency. Variables are
// stacked in six blocks of k ports each:
//   [b1, b2, c_dep1, c_dep2, c_arr1, c_arr2]
// (b: outgoing external, c_dep: leaving a mirror inside the cavity,
//  c_arr: arriving at a mirror inside the cavity; 1 = amplitude
//  quadrature, 2 = phase quadrature). The system reads
//   L x = O a + K1 dx + K2 h + Ksag * 1,
// with a the 2k input quadratures, dx the n mirror displacements and
// h = (h_plus, h_cross).
struct SidebandSystem {
  double f = 0.0;
  Eigen::MatrixXcd L;    // 6k x 6k
  Eigen::MatrixXcd O;    // 6k x 2k
  Eigen::MatrixXcd K1;   // 6k x n
  Eigen::MatrixXcd K2;   // 6k x 2
  Eigen::VectorXcd Ksag; // 6k, rotation-induced phase source
};

SidebandSystem assemble_sideband_system(const PolygonGeometry& geometry,
                                        const OpticalParams& params,
                                        const CarrierSolution& carrier,
                                        const GwSource& source, double f,
                                        double omega_r = 0.0);

// Per-frequency transfer matrices restricted to open ports (k = k_fields).
struct TransferSet {
  double f = 0.0;
  Eigen::MatrixXcd m_int;      // k x k, unitary
  Eigen::MatrixXcd m21;        // k x k, amplitude->phase coupling from RPN
  Eigen::MatrixXcd a_ph;       // k x n, phase response per meter of mirror motion
  Eigen::MatrixXcd v_ph;       // k x 2, columns (plus, cross)
  Eigen::VectorXcd sagnac_vec; // k
  int n_mirrors = 0;

  int k() const { return static_cast<int>(m_int.rows()); }
  Eigen::MatrixXcd full_m() const;        // 2k x 2k block form
  Eigen::VectorXcd v_plus_embedded() const;  // (0; v_ph col 0)
  Eigen::MatrixXcd v_embedded() const;       // 2k x 2
};

TransferSet transfer_set(const PolygonGeometry& geometry, const OpticalParams& params,
                         const GwSource& source, double f,
                         double omega_r = kEarthRotationRate);

Eigen::VectorXcd sagnac_response(const PolygonGeometry& geometry, const OpticalParams& params,
                                 double omega_r, double f);

// Rotation-induced phase per directed arm, trajectory-major ordering.
// The sum around one trajectory is the Sagnac phase
// -2 (omega_r omega0 / c^2) * (signed enclosed area).
std::vector<double> sagnac_arm_phases(const PolygonGeometry& geometry,
                                      const OpticalParams& params, double omega_r);

// Closed-form GW response of the symmetric triangle, one entry per open
// port; valid at any frequency. Test oracle for transfer_set.
Eigen::VectorXcd analytic_gw_response_triangle(const PolygonGeometry& geometry,
                                               const OpticalParams& params,
                                               const GwSource& source, double f,
                                               Complex h_plus, Complex h_cross);
Eigen::MatrixXcd analytic_v_ph_triangle(const PolygonGeometry& geometry,
                                        const OpticalParams& params,
                                        const GwSource& source, double f);

// Closed-form displacement transfer matrix of the symmetric triangle.
Eigen::MatrixXcd analytic_a_ph_triangle(const PolygonGeometry& geometry,
                                        const OpticalParams& params, double f);

// Closed-form DC shot-noise-only standard deviation for h_plus,
// symmetric triangle. Returns +inf for theta = 0.
double analytic_dc_shotnoise_sigma(const OpticalParams& params, const GwSource& source, double T);

} // namespace dfisim

#include "dfisim/optics.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace dfisim {

namespace {

constexpr Complex kI{0.0, 1.0};

double sinc(double x) {
  if (std::abs(x) < 1e-8) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

void require_symmetric_triangle(const PolygonGeometry& g) {
  if (g.n_mirrors != 3 || g.trajectories.size() != 2)
    throw std::invalid_argument("closed form is defined for the triangle preset only");
  const double T0 = g.port_transmissivities[0];
  for (double T : g.port_transmissivities)
    if (std::abs(T - T0) > 1e-15)
      throw std::invalid_argument("closed form requires identical mirror transmissivities");
}

} // namespace

OpticalParams OpticalParams::from_wavelength(double wavelength_m) {
  OpticalParams p;
  p.wavelength = wavelength_m;
  p.omega0 = 2.0 * std::numbers::pi * kSpeedOfLight / wavelength_m;
  return p;
}

double input_amplitude_for_intracavity_power(double intracavity_power_w, double T,
                                             double omega0, int /*n_mirrors*/) {
  const double sqrt_r = std::sqrt(1.0 - T);
  const double p_in = intracavity_power_w * (1.0 - sqrt_r) * (1.0 - sqrt_r) / (2.0 * T);
  return std::sqrt(p_in / (kHbar * omega0));
}

double CarrierSolution::intracavity_flux(int n_mirrors) const {
  return a_hit.squaredNorm() / n_mirrors;
}

CarrierSolution solve_carrier(const PolygonGeometry& geometry, const OpticalParams& params) {
  const int n = geometry.n_mirrors;
  const int n_ports = geometry.n_ports();

  // Inputs are chosen per port so the circulating amplitude is uniform
  // along both trajectories: a_in,j = C (1 - sqrt(R_j)) / sqrt(T_j) and
  // a_hit = C everywhere. For identical transmissivities this is the
  // equal-input drive with A_hit = E sqrt(T)/(1 - sqrt(R)) and A_out = E.
  // A uniform circulating field keeps the static GW response inside the
  // span of the mirror-displacement columns for any port transmissivities.
  double t_ref = 0.0;
  for (double t : geometry.port_transmissivities) t_ref = std::max(t_ref, t);
  if (t_ref <= 0.0)
    throw std::runtime_error("solve_carrier: non-convergent cavity (no open port drives it)");
  const double circ = params.input_amplitude * std::sqrt(t_ref) / (1.0 - std::sqrt(1.0 - t_ref));

  CarrierSolution sol;
  sol.a_in.setZero(n_ports);
  sol.a_hit.setZero(n_ports);
  sol.a_ref.setZero(n_ports);
  sol.a_out.setZero(n_ports);
  for (size_t tau = 0; tau < geometry.trajectories.size(); ++tau) {
    const auto& traj = geometry.trajectories[tau];
    for (int t = 0; t < n; ++t) {
      const int p = geometry.port_index(static_cast<int>(tau), t);
      const int j = traj.mirrors[t];
      const double T = geometry.port_transmissivities[j];
      const double sq_r = std::sqrt(1.0 - T);
      const double sq_t = std::sqrt(T);
      const double e_in = T > 0.0 ? circ * (1.0 - sq_r) / sq_t : 0.0;
      sol.a_in(p) = e_in;
      sol.a_hit(p) = circ;
      sol.a_ref(p) = sq_t * e_in + sq_r * circ;
      sol.a_out(p) = -sq_r * e_in + sq_t * circ;
    }
  }
  return sol;
}

double power_gain_triangle_closed_form(double T) {
  if (T <= 0.0 || T > 1.0) throw std::invalid_argument("power_gain: T must be in (0, 1]");
  const double sq_r = std::sqrt(1.0 - T);
  return T / (3.0 * (1.0 - sq_r) * (1.0 - sq_r));
}

double power_gain(const PolygonGeometry& geometry, const OpticalParams& params) {
  const auto carrier = solve_carrier(geometry, params);
  const double in_flux = carrier.a_in.squaredNorm();
  if (in_flux <= 0.0) throw std::invalid_argument("power_gain: no driven port");
  return carrier.intracavity_flux(geometry.n_mirrors) / in_flux;
}

Complex zeta_arm(const DirectedArm& arm, const GwSource& source, double f, double arm_length) {
  // One-way response of an arm to a plane GW travelling along k_hat,
  // referenced to the arrival end. The retardation phase uses the arm
  // midpoint; its sign follows the e^{-i Omega L / c} delay convention of
  // the propagation equations (a wavefront at position x is delayed by
  // k_hat . x / c).
  const double omega = 2.0 * std::numbers::pi * f;
  const double eps = omega * arm_length / (2.0 * kSpeedOfLight);
  const double nk = arm.dir.dot(source.k_hat);
  const double midpoint_phase = arm.endpoint_sum.dot(source.k_hat) / arm_length;
  return arm_length * sinc(eps * (1.0 - nk)) * std::exp(-kI * eps * (midpoint_phase + 1.0));
}

SidebandSystem assemble_sideband_system(const PolygonGeometry& geometry,
                                        const OpticalParams& params,
                                        const CarrierSolution& carrier,
                                        const GwSource& source, double f,
                                        double omega_r) {
  if (f <= 0.0) {
    if (params.rpn_enabled)
      throw std::invalid_argument("assemble_sideband_system: RPN diverges as 1/(m Omega^2) at f = 0");
    throw std::invalid_argument("assemble_sideband_system: f must be positive");
  }
  const int n = geometry.n_mirrors;
  const int k = geometry.n_ports();
  const double omega = 2.0 * std::numbers::pi * f;
  const double w0_c = params.omega0 / kSpeedOfLight;

  SidebandSystem sys;
  sys.f = f;
  sys.L.setZero(6 * k, 6 * k);
  sys.O.setZero(6 * k, 2 * k);
  sys.K1.setZero(6 * k, n);
  sys.K2.setZero(6 * k, 2);
  sys.Ksag.setZero(6 * k);

  const auto ib1 = [&](int p) { return p; };
  const auto ib2 = [&](int p) { return k + p; };
  const auto idep1 = [&](int p) { return 2 * k + p; };
  const auto idep2 = [&](int p) { return 3 * k + p; };
  const auto iarr1 = [&](int p) { return 4 * k + p; };
  const auto iarr2 = [&](int p) { return 5 * k + p; };

  // Ports grouped by mirror: radiation pressure sums the momentum kicks
  // of every field meeting a mirror, across both trajectories.
  std::vector<std::vector<std::pair<int, int>>> ports_at(n); // (port, position)
  for (size_t tau = 0; tau < geometry.trajectories.size(); ++tau) {
    const auto& traj = geometry.trajectories[tau];
    for (int t = 0; t < n; ++t)
      ports_at[traj.mirrors[t]].emplace_back(geometry.port_index(static_cast<int>(tau), t), t);
  }

  for (size_t tau = 0; tau < geometry.trajectories.size(); ++tau) {
    const auto& traj = geometry.trajectories[tau];
    for (int t = 0; t < n; ++t) {
      const int p = geometry.port_index(static_cast<int>(tau), t);
      const int j = traj.mirrors[t];
      const double T = geometry.port_transmissivities[j];
      const double sq_r = std::sqrt(1.0 - T);
      const double sq_t = std::sqrt(T);
      const double cos_inc = traj.cos_incidence[t];

      // Amplitude quadratures see the bare mirror.
      sys.L(ib1(p), ib1(p)) = 1.0;
      sys.L(ib1(p), iarr1(p)) = -sq_t;
      sys.O(ib1(p), p) = -sq_r;
      sys.L(idep1(p), idep1(p)) = 1.0;
      sys.L(idep1(p), iarr1(p)) = -sq_r;
      sys.O(idep1(p), p) = sq_t;

      // Phase quadratures pick up the mirror-motion imprint, scaled by the
      // carrier amplitude of the reflected component.
      const double imprint_b = cos_inc * sq_r * w0_c * carrier.a_in(p);
      const double imprint_c = cos_inc * sq_r * w0_c * carrier.a_hit(p);

      sys.L(ib2(p), ib2(p)) = 1.0;
      sys.L(ib2(p), iarr2(p)) = -sq_t;
      sys.O(ib2(p), k + p) = -sq_r;
      sys.K1(ib2(p), j) = -imprint_b;

      sys.L(idep2(p), idep2(p)) = 1.0;
      sys.L(idep2(p), iarr2(p)) = -sq_r;
      sys.O(idep2(p), k + p) = sq_t;
      sys.K1(idep2(p), j) = -imprint_c;

      if (params.rpn_enabled) {
        // dx_j = -F_j / (m Omega^2), F_j driven by the amplitude
        // quadratures of every field at mirror j.
        const double g = -2.0 * kHbar * params.omega0 * cos_inc /
                         (params.mirror_mass * omega * omega * kSpeedOfLight);
        for (const auto& [q, tq] : ports_at[j]) {
          const double da = g * carrier.a_in(q);
          const double db = g * carrier.a_out(q);
          const double darr = -g * carrier.a_hit(q);
          const double ddep = -g * carrier.a_ref(q);
          sys.L(ib2(p), ib1(q)) += imprint_b * db;
          sys.L(ib2(p), iarr1(q)) += imprint_b * darr;
          sys.L(ib2(p), idep1(q)) += imprint_b * ddep;
          sys.O(ib2(p), q) += -imprint_b * da;
          sys.L(idep2(p), ib1(q)) += imprint_c * db;
          sys.L(idep2(p), iarr1(q)) += imprint_c * darr;
          sys.L(idep2(p), idep1(q)) += imprint_c * ddep;
          sys.O(idep2(p), q) += -imprint_c * da;
        }
      }

      // Propagation along arm t, from this port to the next one.
      const int p_next = geometry.port_index(static_cast<int>(tau), (t + 1) % n);
      const auto& arm = traj.arms[t];
      const Complex phase = std::exp(-kI * omega * arm.length / kSpeedOfLight);

      sys.L(iarr1(p_next), iarr1(p_next)) = 1.0;
      sys.L(iarr1(p_next), idep1(p)) = -phase;

      sys.L(iarr2(p_next), iarr2(p_next)) = 1.0;
      sys.L(iarr2(p_next), idep2(p)) = -phase;

      const Complex zeta = zeta_arm(arm, source, f, arm.length);
      const double proj_plus = arm.dir.dot(source.e_plus * arm.dir);
      const double proj_cross = arm.dir.dot(source.e_cross * arm.dir);
      const Complex gw_base = carrier.a_ref(p) * w0_c * zeta;
      sys.K2(iarr2(p_next), 0) = gw_base * proj_plus;
      sys.K2(iarr2(p_next), 1) = gw_base * proj_cross;

      if (omega_r != 0.0) {
        const Eigen::Vector3d& ra = geometry.mirror_positions[arm.from];
        const Eigen::Vector3d& rb = geometry.mirror_positions[arm.to];
        const double phi_arm = params.omega0 * omega_r / (kSpeedOfLight * kSpeedOfLight) *
                               (ra.x() * rb.y() - ra.y() * rb.x());
        sys.Ksag(iarr2(p_next)) = carrier.a_ref(p) * phi_arm;
      }
    }
  }
  return sys;
}

Eigen::MatrixXcd TransferSet::full_m() const {
  const int kk = k();
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(2 * kk, 2 * kk);
  m.topLeftCorner(kk, kk) = m_int;
  m.bottomLeftCorner(kk, kk) = m21;
  m.bottomRightCorner(kk, kk) = m_int;
  return m;
}

Eigen::VectorXcd TransferSet::v_plus_embedded() const {
  const int kk = k();
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(2 * kk);
  v.tail(kk) = v_ph.col(0);
  return v;
}

Eigen::MatrixXcd TransferSet::v_embedded() const {
  const int kk = k();
  Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(2 * kk, 2);
  v.bottomRows(kk) = v_ph;
  return v;
}

TransferSet transfer_set(const PolygonGeometry& geometry, const OpticalParams& params,
                         const GwSource& source, double f, double omega_r) {
  const auto carrier = solve_carrier(geometry, params);
  const auto sys = assemble_sideband_system(geometry, params, carrier, source, f, omega_r);
  const int k = geometry.n_ports();
  const int n = geometry.n_mirrors;

  // Row equilibration: the radiation-pressure rows mix scales that would
  // otherwise dominate the condition estimate without being singular.
  Eigen::VectorXd row_scale = sys.L.cwiseAbs().rowwise().maxCoeff();
  for (int i = 0; i < row_scale.size(); ++i)
    if (row_scale(i) <= 0.0) row_scale(i) = 1.0;
  const auto d_inv = row_scale.cwiseInverse().asDiagonal();

  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(d_inv * sys.L);
  const double rc = lu.rcond();
  if (!(rc > 1e-12)) {
    std::ostringstream msg;
    msg << "transfer_set: ill-conditioned sideband system at f = " << f << " Hz (rcond " << rc
        << ")";
    throw std::runtime_error(msg.str());
  }

  Eigen::MatrixXcd rhs(6 * k, 2 * k + n + 3);
  rhs << sys.O, sys.K1, sys.K2, sys.Ksag;
  const Eigen::MatrixXcd x = lu.solve(d_inv * rhs);

  const auto open = geometry.open_ports();
  const int ko = static_cast<int>(open.size());

  TransferSet ts;
  ts.f = f;
  ts.n_mirrors = n;
  ts.m_int.resize(ko, ko);
  ts.m21.resize(ko, ko);
  ts.a_ph.resize(ko, n);
  ts.v_ph.resize(ko, 2);
  ts.sagnac_vec.resize(ko);
  for (int r = 0; r < ko; ++r) {
    const int pr = open[r];
    for (int c = 0; c < ko; ++c) {
      const int pc = open[c];
      ts.m_int(r, c) = x(pr, pc);          // b1 row, a1 column
      ts.m21(r, c) = x(k + pr, pc);        // b2 row, a1 column
    }
    ts.a_ph.row(r) = x.row(k + pr).segment(2 * k, n);
    ts.v_ph.row(r) = x.row(k + pr).segment(2 * k + n, 2);
    ts.sagnac_vec(r) = x(k + pr, 2 * k + n + 2);
  }
  if (!params.rpn_enabled) ts.m21.setZero();
  return ts;
}

std::vector<double> sagnac_arm_phases(const PolygonGeometry& geometry,
                                      const OpticalParams& params, double omega_r) {
  std::vector<double> phases;
  phases.reserve(geometry.n_ports());
  const double scale = params.omega0 * omega_r / (kSpeedOfLight * kSpeedOfLight);
  for (const auto& traj : geometry.trajectories) {
    for (const auto& arm : traj.arms) {
      const Eigen::Vector3d& ra = geometry.mirror_positions[arm.from];
      const Eigen::Vector3d& rb = geometry.mirror_positions[arm.to];
      phases.push_back(scale * (ra.x() * rb.y() - ra.y() * rb.x()));
    }
  }
  return phases;
}

Eigen::VectorXcd sagnac_response(const PolygonGeometry& geometry, const OpticalParams& params,
                                 double omega_r, double f) {
  if (omega_r == 0.0) {
    return Eigen::VectorXcd::Zero(static_cast<int>(geometry.open_ports().size()));
  }
  return transfer_set(geometry, params, make_gw_source(0.0, 0.0), f, omega_r).sagnac_vec;
}

Eigen::VectorXcd analytic_gw_response_triangle(const PolygonGeometry& geometry,
                                               const OpticalParams& params,
                                               const GwSource& source, double f,
                                               Complex h_plus, Complex h_cross) {
  const Eigen::MatrixXcd v = analytic_v_ph_triangle(geometry, params, source, f);
  return v.col(0) * h_plus + v.col(1) * h_cross;
}

Eigen::MatrixXcd analytic_v_ph_triangle(const PolygonGeometry& geometry,
                                        const OpticalParams& params,
                                        const GwSource& source, double f) {
  require_symmetric_triangle(geometry);
  const int n = 3;
  const double T = geometry.port_transmissivities[0];
  const double sq_r = std::sqrt(1.0 - T);
  const double sq_t = std::sqrt(T);
  const double omega = 2.0 * std::numbers::pi * f;
  const double w0_c = params.omega0 / kSpeedOfLight;
  const Complex z = sq_r * std::exp(-kI * omega * geometry.arm_length / kSpeedOfLight);
  const Complex denom = 1.0 - z * z * z;
  const double a_ref = params.input_amplitude * sq_t / (1.0 - sq_r);

  Eigen::MatrixXcd v(geometry.n_ports(), 2);
  for (int tau = 0; tau < 2; ++tau) {
    const auto& traj = geometry.trajectories[tau];
    for (int m = 0; m < n; ++m) {
      Complex acc_p = 0.0, acc_c = 0.0;
      for (int b = 0; b < n; ++b) {
        // The arm ending at position m was injected b bounces ago.
        const auto& arm = traj.arms[(m - 1 - b + 2 * n) % n];
        const Complex w = std::pow(z, b) * zeta_arm(arm, source, f, arm.length);
        acc_p += w * arm.dir.dot(source.e_plus * arm.dir);
        acc_c += w * arm.dir.dot(source.e_cross * arm.dir);
      }
      const Complex pref = sq_t * a_ref * w0_c / denom;
      v(geometry.port_index(tau, m), 0) = pref * acc_p;
      v(geometry.port_index(tau, m), 1) = pref * acc_c;
    }
  }
  return v;
}

Eigen::MatrixXcd analytic_a_ph_triangle(const PolygonGeometry& geometry,
                                        const OpticalParams& params, double f) {
  require_symmetric_triangle(geometry);
  const int n = 3;
  const double T = geometry.port_transmissivities[0];
  const double sq_r = std::sqrt(1.0 - T);
  const double omega = 2.0 * std::numbers::pi * f;
  const double w0_c = params.omega0 / kSpeedOfLight;
  const Complex z = sq_r * std::exp(-kI * omega * geometry.arm_length / kSpeedOfLight);
  const Complex denom = 1.0 - z * z * z;
  const double e_in = params.input_amplitude;

  Eigen::MatrixXcd a(geometry.n_ports(), n);
  for (int tau = 0; tau < 2; ++tau) {
    const auto& traj = geometry.trajectories[tau];
    for (int m = 0; m < n; ++m) {
      const double cos_inc = traj.cos_incidence[m];
      for (int b = 0; b < n; ++b) {
        const int j = traj.mirrors[(m - b + n) % n];
        Complex coeff;
        if (b == 0)
          coeff = -e_in * w0_c * cos_inc * (sq_r + z * z * z) / denom;
        else
          coeff = -e_in * w0_c * cos_inc * (1.0 + sq_r) * std::pow(z, b) / denom;
        a(geometry.port_index(tau, m), j) = coeff;
      }
    }
  }
  return a;
}

double analytic_dc_shotnoise_sigma(const OpticalParams& params, const GwSource& source, double T) {
  const double sq_r = std::sqrt(1.0 - T);
  const double r = 1.0 - T;
  const double sin2 = std::sin(source.theta) * std::sin(source.theta);
  if (sin2 == 0.0) return std::numeric_limits<double>::infinity();
  const double r15 = std::pow(r, 1.5);
  const double enh = 13.5 * (1.0 + sq_r) * (1.0 + sq_r) * r / ((1.0 - r15) * (1.0 - r15));
  return 1.0 / (2.0 * params.input_amplitude * (params.omega0 / kSpeedOfLight) *
                params.arm_length * sin2 * std::sqrt(enh));
}

} // namespace dfisim

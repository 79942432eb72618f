#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

namespace dfisim {

// One directed cavity segment, traversed from mirror `from` to mirror `to`.
struct DirectedArm {
  int from = 0;
  int to = 0;
  Eigen::Vector3d dir = Eigen::Vector3d::Zero();          // unit vector
  Eigen::Vector3d endpoint_sum = Eigen::Vector3d::Zero(); // x_from + x_to
  double length = 0.0;
};

// A cyclic light path. mirrors[t] is the t-th mirror visited; arms[t]
// runs from mirrors[t] to mirrors[(t+1) % n]. cos_incidence[t] is the
// cosine of the angle of incidence at mirrors[t], derived from the turn
// the beam makes there.
struct Trajectory {
  std::vector<int> mirrors;
  std::vector<DirectedArm> arms;
  std::vector<double> cos_incidence;
};

// Mirror layout of a planar polygon cavity. Every (trajectory, mirror)
// pair is a port: ports are indexed trajectory-major, port = tau * n + t
// where t is the position of the mirror within the trajectory.
// Both ports of a mirror share its power transmissivity; a port is open
// iff its mirror has T > 0. k_fields counts open ports only.
struct PolygonGeometry {
  int n_mirrors = 0;
  std::vector<Eigen::Vector3d> mirror_positions;
  double arm_length = 0.0;
  std::vector<Trajectory> trajectories;
  std::vector<double> port_transmissivities; // one per mirror
  int k_fields = 0;

  int n_ports() const { return static_cast<int>(trajectories.size()) * n_mirrors; }
  int port_index(int trajectory, int position) const { return trajectory * n_mirrors + position; }
  int mirror_of_port(int port) const {
    return trajectories[port / n_mirrors].mirrors[port % n_mirrors];
  }
  bool port_open(int port) const { return port_transmissivities[mirror_of_port(port)] > 0.0; }
  std::vector<int> open_ports() const;

  PolygonGeometry rotated(const Eigen::Matrix3d& rot) const;
};

enum class TrajectorySelection { TwoMaximalCyclic, TrianglePair };

// Gravitational-wave source direction and polarization tensors.
// k_hat propagates the wave; (u_hat, v_hat, k_hat) is an orthonormal
// right-handed triad. e_plus = u u^T - v v^T, e_cross = u v^T + v u^T.
struct GwSource {
  double theta = 0.0;
  double phi = 0.0;
  Eigen::Vector3d k_hat, u_hat, v_hat;
  Eigen::Matrix3d e_plus, e_cross;

  GwSource rotated(const Eigen::Matrix3d& rot) const;
};

PolygonGeometry build_ngon(int n, double radius,
                           TrajectorySelection selection = TrajectorySelection::TwoMaximalCyclic);

PolygonGeometry standard_sagnac_preset(double radius, double open_port_T);

GwSource make_gw_source(double theta, double phi);

// Per directed arm, the pair (<n|e_+|n>, <n|e_x|n>), ordered like the
// ports (trajectory-major, arm t of trajectory tau at index tau*n + t).
std::vector<std::pair<double, double>>
gw_arm_projection(const PolygonGeometry& geometry, const GwSource& source);

// Signed area enclosed by one trajectory, from the shoelace sum along its
// arm sequence (winding-weighted for star polygons).
double trajectory_signed_area(const PolygonGeometry& geometry, int trajectory);

} // namespace dfisim

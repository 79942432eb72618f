#include "dfisim/geometry.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dfisim {

namespace {

Trajectory make_trajectory(const std::vector<Eigen::Vector3d>& pos, const std::vector<int>& order) {
  Trajectory traj;
  traj.mirrors = order;
  const int n = static_cast<int>(order.size());
  traj.arms.resize(n);
  traj.cos_incidence.resize(n);
  for (int t = 0; t < n; ++t) {
    const int a = order[t];
    const int b = order[(t + 1) % n];
    DirectedArm arm;
    arm.from = a;
    arm.to = b;
    const Eigen::Vector3d d = pos[b] - pos[a];
    arm.length = d.norm();
    arm.dir = d / arm.length;
    arm.endpoint_sum = pos[a] + pos[b];
    traj.arms[t] = arm;
  }
  for (int t = 0; t < n; ++t) {
    const Eigen::Vector3d& din = traj.arms[(t + n - 1) % n].dir;
    const Eigen::Vector3d& dout = traj.arms[t].dir;
    // Turn by angle delta at the mirror; incidence is (pi - delta)/2,
    // so cos(incidence) = sin(delta/2).
    const double cos_delta = std::clamp(din.dot(dout), -1.0, 1.0);
    traj.cos_incidence[t] = std::sqrt(0.5 * (1.0 - cos_delta));
  }
  return traj;
}

} // namespace

std::vector<int> PolygonGeometry::open_ports() const {
  std::vector<int> idx;
  for (int p = 0; p < n_ports(); ++p)
    if (port_open(p)) idx.push_back(p);
  return idx;
}

PolygonGeometry PolygonGeometry::rotated(const Eigen::Matrix3d& rot) const {
  PolygonGeometry g = *this;
  for (auto& x : g.mirror_positions) x = rot * x;
  for (auto& traj : g.trajectories) {
    for (auto& arm : traj.arms) {
      arm.dir = rot * arm.dir;
      arm.endpoint_sum = rot * arm.endpoint_sum;
    }
  }
  return g;
}

GwSource GwSource::rotated(const Eigen::Matrix3d& rot) const {
  GwSource s = *this;
  s.k_hat = rot * k_hat;
  s.u_hat = rot * u_hat;
  s.v_hat = rot * v_hat;
  s.e_plus = s.u_hat * s.u_hat.transpose() - s.v_hat * s.v_hat.transpose();
  s.e_cross = s.u_hat * s.v_hat.transpose() + s.v_hat * s.u_hat.transpose();
  return s;
}

PolygonGeometry build_ngon(int n, double radius, TrajectorySelection selection) {
  if (n < 3) throw std::invalid_argument("build_ngon: need at least 3 mirrors");
  if (radius <= 0.0) throw std::invalid_argument("build_ngon: radius must be positive");
  if (selection == TrajectorySelection::TrianglePair && n != 3)
    throw std::invalid_argument("build_ngon: triangle-pair selection requires n = 3");
  if (n % 2 == 0)
    throw std::invalid_argument(
        "build_ngon: maximal-length cyclic trajectory pair exists only for odd n");

  PolygonGeometry g;
  g.n_mirrors = n;
  g.mirror_positions.resize(n);
  for (int j = 0; j < n; ++j) {
    const double ang = 2.0 * std::numbers::pi * j / n; // vertex 0 on the +x axis
    g.mirror_positions[j] = radius * Eigen::Vector3d(std::cos(ang), std::sin(ang), 0.0);
  }

  // Maximal chords connect vertices (n-1)/2 steps apart. Trajectory 0 steps
  // backwards through the vertex angles (clockwise), trajectory 1 forwards.
  const int step = (n - 1) / 2;
  std::vector<int> cw(n), ccw(n);
  for (int t = 0; t < n; ++t) {
    cw[t] = ((n - step) * t) % n;
    ccw[t] = (step * t) % n;
  }
  g.trajectories.push_back(make_trajectory(g.mirror_positions, cw));
  g.trajectories.push_back(make_trajectory(g.mirror_positions, ccw));
  g.arm_length = g.trajectories[0].arms[0].length;
  g.port_transmissivities.assign(n, 0.1);
  g.k_fields = 2 * n;
  return g;
}

PolygonGeometry standard_sagnac_preset(double radius, double open_port_T) {
  if (open_port_T <= 0.0 || open_port_T > 1.0)
    throw std::invalid_argument("standard_sagnac_preset: open port transmissivity must be in (0, 1]");
  PolygonGeometry g = build_ngon(3, radius);
  g.port_transmissivities = {open_port_T, 0.0, 0.0};
  g.k_fields = 2; // one open mirror, two circulation directions
  return g;
}

GwSource make_gw_source(double theta, double phi) {
  GwSource s;
  s.theta = theta;
  s.phi = phi;
  const double st = std::sin(theta), ct = std::cos(theta);
  const double sp = std::sin(phi), cp = std::cos(phi);
  s.k_hat = Eigen::Vector3d(st * cp, st * sp, ct);
  s.u_hat = Eigen::Vector3d(-ct * cp, -ct * sp, st);
  s.v_hat = Eigen::Vector3d(sp, -cp, 0.0);
  s.e_plus = s.u_hat * s.u_hat.transpose() - s.v_hat * s.v_hat.transpose();
  s.e_cross = s.u_hat * s.v_hat.transpose() + s.v_hat * s.u_hat.transpose();
  return s;
}

std::vector<std::pair<double, double>>
gw_arm_projection(const PolygonGeometry& geometry, const GwSource& source) {
  std::vector<std::pair<double, double>> out;
  out.reserve(geometry.n_ports());
  for (const auto& traj : geometry.trajectories) {
    for (const auto& arm : traj.arms) {
      const double p = arm.dir.dot(source.e_plus * arm.dir);
      const double c = arm.dir.dot(source.e_cross * arm.dir);
      out.emplace_back(p, c);
    }
  }
  return out;
}

double trajectory_signed_area(const PolygonGeometry& geometry, int trajectory) {
  const auto& traj = geometry.trajectories.at(trajectory);
  double twice_area = 0.0;
  for (const auto& arm : traj.arms) {
    const Eigen::Vector3d& a = geometry.mirror_positions[arm.from];
    const Eigen::Vector3d& b = geometry.mirror_positions[arm.to];
    twice_area += a.x() * b.y() - a.y() * b.x();
  }
  return 0.5 * twice_area;
}

} // namespace dfisim

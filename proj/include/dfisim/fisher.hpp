#pragma once

#include <Eigen/Dense>
#include <string>

#include "dfisim/noise.hpp"

namespace dfisim {

// A set of l <= k commuting quadratures to measure, columns orthonormal.
struct HomodyneSelection {
  Eigen::MatrixXcd t_h; // 2k x l
  std::string label;
};

// Split of the k phase quadratures into the displacement-free subspace
// and eigenspaces of the noise operator with smallest/largest eigenvalue.
struct SubspaceDecomposition {
  Eigen::MatrixXcd pi_dfs, pi_c, pi_min, pi_max; // k x k projectors
  int dim_dfs = 0, dim_min = 0, dim_max = 0;
  double t_min = 0.0, t_max = 0.0;
};

struct FisherReport {
  double qfi = 0.0;
  double fi = 0.0;
  double f_min = 0.0, f_max = 0.0, f_dfs = 0.0;
  double eta = 0.0;
  double sigma = 0.0;
  Eigen::Vector2cd dominant_polarization = Eigen::Vector2cd::Zero();
};

// QFI about one complex signal amplitude: I = 2 v^dag Sigma^{-1} v, with
// the delta->infinity limit computed on the kernel of the divergent noise.
double qfi(const Eigen::VectorXcd& v_plus, const OutputCovariance& sigma);

struct Qfim {
  Eigen::Matrix2cd matrix;
  Eigen::Vector2cd dominant;
  double max_eigenvalue = 0.0;
};
Qfim qfim(const Eigen::MatrixXcd& v_matrix, const OutputCovariance& sigma);

double fi_homodyne(const HomodyneSelection& sel, const Eigen::VectorXcd& v_plus,
                   const OutputCovariance& sigma);

HomodyneSelection optimal_quadrature(const Eigen::VectorXcd& v_plus,
                                     const OutputCovariance& sigma);

// k quadratures immune to radiation pressure:
// (-M_int M21^dag; 1) (1 + M21 M21^dag)^{-1/2}.
HomodyneSelection decoupled_quadratures(const Eigen::MatrixXcd& m_int,
                                        const Eigen::MatrixXcd& m21);

// Projector onto ker(A_ph^dag) via SVD with relative threshold.
SubspaceDecomposition dfs_projector(const Eigen::MatrixXcd& a_ph, double tol = 1e-9);

// Phase-quadrature FI split over eigenspaces of the noise operator
// N = 2 sigma_ph / q - 1 (q = quantum scale, e^{-2r} when squeezed).
// Returns total FI, per-subspace parts, eta and the projectors used.
struct FiDecomposition {
  double f_total = 0.0, f_min = 0.0, f_max = 0.0, f_dfs = 0.0, eta = 0.0;
  SubspaceDecomposition subspaces;
};
FiDecomposition decompose_fi(const Eigen::VectorXcd& v_ph, const OutputCovariance& sigma,
                             double cluster_tol = 1e-8);

// Two-polarization Fisher matrix of a phase-quadrature readout,
// F = 2 V_ph^dag sigma_ph^{-1} V_ph, computed through the same noise
// factorization as decompose_fi.
Eigen::Matrix2cd phase_information_matrix(const Eigen::MatrixXcd& v_ph,
                                          const OutputCovariance& sigma);

// Independent oracle: QFI from the 4k-dimensional real quadrature
// representation. Test use only.
double real_form_qfi(const Eigen::VectorXcd& v_plus, const Eigen::MatrixXcd& m_full,
                     const Eigen::MatrixXcd& noise_factor);

// Real embedding helpers for the circular-symmetry checks.
Eigen::MatrixXd real_embed(const Eigen::MatrixXcd& m);

double sigma_from_information(double info);

} // namespace dfisim

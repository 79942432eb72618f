#include "dfisim/squeeze.hpp"

#include <cmath>
#include <stdexcept>

namespace dfisim {

SqueezeProjector optimal_squeeze_projector(const Eigen::MatrixXcd& m_int,
                                           const Eigen::MatrixXcd& m21) {
  const int k = static_cast<int>(m_int.rows());
  const Eigen::MatrixXcd x = -(m_int.adjoint() * m21);
  const double scale = std::max(1.0, x.cwiseAbs().maxCoeff());
  if ((x - x.adjoint()).cwiseAbs().maxCoeff() > 1e-9 * scale)
    throw std::invalid_argument("optimal_squeeze_projector: M_int^dag M21 is not Hermitian");

  // Matrix arctan of the Hermitian argument, by eigendecomposition.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (x + x.adjoint()));
  Eigen::VectorXd ang = es.eigenvalues().unaryExpr([](double t) { return std::atan(t); });
  const Eigen::MatrixXcd cos_a =
      es.eigenvectors() * ang.array().cos().matrix().asDiagonal() * es.eigenvectors().adjoint();
  const Eigen::MatrixXcd sin_a =
      es.eigenvectors() * ang.array().sin().matrix().asDiagonal() * es.eigenvectors().adjoint();

  SqueezeProjector out;
  Eigen::MatrixXcd anti(2 * k, k);
  anti.topRows(k) = cos_a;
  anti.bottomRows(k) = sin_a;
  out.pi1 = anti * anti.adjoint();
  out.squeezed_set.resize(2 * k, k);
  out.squeezed_set.topRows(k) = -sin_a;
  out.squeezed_set.bottomRows(k) = cos_a;
  return out;
}

Eigen::MatrixXcd resolve_pi1(const SqueezeConfig& cfg, const Eigen::MatrixXcd& m_int,
                             const Eigen::MatrixXcd& m21) {
  const int k = static_cast<int>(m_int.rows());
  switch (cfg.strategy) {
    case SqueezeConfig::Strategy::Phase:
    case SqueezeConfig::Strategy::OptimalForOptimalReadout: {
      // Squeeze the phase quadratures; the amplitude block is antisqueezed.
      Eigen::MatrixXcd pi = Eigen::MatrixXcd::Zero(2 * k, 2 * k);
      pi.topLeftCorner(k, k).setIdentity();
      return pi;
    }
    case SqueezeConfig::Strategy::OptimalForPhaseReadout:
      return optimal_squeeze_projector(m_int, m21).pi1;
    case SqueezeConfig::Strategy::Explicit: {
      if (!cfg.explicit_pi1) throw std::invalid_argument("explicit squeeze projector missing");
      const Eigen::MatrixXcd& pi = *cfg.explicit_pi1;
      if ((pi * pi - pi).cwiseAbs().maxCoeff() > 1e-9)
        throw std::invalid_argument("explicit squeeze matrix is not a projector");
      return pi;
    }
  }
  throw std::logic_error("unreachable squeeze strategy");
}

double qfi_squeezed(const Eigen::VectorXcd& v_ph, const Eigen::MatrixXcd& a_ph, double delta2,
                    double r) {
  if (r < 0.0) throw std::invalid_argument("qfi_squeezed: r must be >= 0");
  const double e2r = std::exp(2.0 * r);
  // 4 v^dag (e^{-2r} + delta^2 A A^dag)^{-1} v = 4 e^{2r} v^dag (1 + e^{2r} delta^2 A A^dag)^{-1} v
  Eigen::MatrixXcd g = std::sqrt(e2r * delta2) * a_ph;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(g, Eigen::ComputeThinU);
  const Eigen::MatrixXcd& u = svd.matrixU();
  const Eigen::VectorXcd a = u.adjoint() * v_ph;
  const Eigen::VectorXcd perp = v_ph - u * a;
  double acc = perp.squaredNorm();
  for (int i = 0; i < a.size(); ++i)
    acc += std::norm(a(i)) / (1.0 + svd.singularValues()(i) * svd.singularValues()(i));
  return 4.0 * e2r * acc;
}

double fi_phase_squeezed(const Eigen::VectorXcd& v_ph, const Eigen::MatrixXcd& a_ph,
                         const Eigen::MatrixXcd& m21, double delta2, double r) {
  if (r < 0.0) throw std::invalid_argument("fi_phase_squeezed: r must be >= 0");
  const double e2r = std::exp(2.0 * r);
  // 4 v^dag (e^{-2r}(1 + M21 M21^dag) + delta^2 A A^dag)^{-1} v
  Eigen::MatrixXcd h(v_ph.size(), m21.cols() + a_ph.cols());
  h << m21, std::sqrt(e2r * delta2) * a_ph;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(h, Eigen::ComputeThinU);
  const Eigen::MatrixXcd& u = svd.matrixU();
  const Eigen::VectorXcd a = u.adjoint() * v_ph;
  const Eigen::VectorXcd perp = v_ph - u * a;
  double acc = perp.squaredNorm();
  for (int i = 0; i < a.size(); ++i)
    acc += std::norm(a(i)) / (1.0 + svd.singularValues()(i) * svd.singularValues()(i));
  return 4.0 * e2r * acc;
}

double eta_gain(double f_squeezed, double f_unsqueezed, double r) {
  if (r <= 0.0)
    throw std::invalid_argument("eta_gain: defined only for r > 0");
  if (f_unsqueezed <= 0.0)
    throw std::invalid_argument("eta_gain: unsqueezed information must be positive");
  return (f_squeezed / f_unsqueezed - 1.0) / (std::exp(2.0 * r) - 1.0);
}

} // namespace dfisim

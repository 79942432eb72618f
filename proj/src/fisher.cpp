#include "dfisim/fisher.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dfisim {

namespace {

// Orthonormal basis of the orthogonal complement of range(K).
Eigen::MatrixXcd kernel_complement_basis(const Eigen::MatrixXcd& k_factor, double tol = 1e-9) {
  const int dim = static_cast<int>(k_factor.rows());
  if (k_factor.cols() == 0) return Eigen::MatrixXcd::Identity(dim, dim);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(k_factor, Eigen::ComputeFullU);
  const auto& s = svd.singularValues();
  const double smax = s.size() ? s(0) : 0.0;
  int rank = 0;
  while (rank < s.size() && s(rank) > tol * smax) ++rank;
  return svd.matrixU().rightCols(dim - rank);
}

Eigen::MatrixXcd mtilde_dense(const OutputCovariance& cov) {
  const int k = cov.k();
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(2 * k, 2 * k);
  m.topLeftCorner(k, k) = cov.m_int;
  m.bottomLeftCorner(k, k) = cov.m21;
  m.bottomRightCorner(k, k) = cov.m_int;
  if (cov.squeeze_r != 0.0) {
    const double ep = std::exp(cov.squeeze_r), em = std::exp(-cov.squeeze_r);
    m = em * m + (ep - em) * (m * cov.pi1);
  }
  return m;
}

// Spectral decomposition of G G^dag with columns of wildly different
// magnitudes. A single SVD loses the small singular values once the
// column scales span more than ~1e8, so the columns are peeled in groups
// of commensurate norm; each group is decomposed on its own and deflated
// from the rest. Cross-group couplings perturb the eigenvalues only at
// relative order gap^-2, below double precision for the gap used here.
struct GradedGram {
  Eigen::MatrixXcd u; // orthonormal columns
  Eigen::VectorXd s2; // eigenvalues of G G^dag, descending
};

GradedGram graded_gram(Eigen::MatrixXcd g, double gap = 1e6) {
  const int dim = static_cast<int>(g.rows());
  std::vector<Eigen::VectorXcd> basis;
  std::vector<double> values;
  while (g.cols() > 0) {
    const Eigen::VectorXd norms = g.colwise().norm();
    const double mu = norms.maxCoeff();
    if (!(mu > 0.0)) break;
    std::vector<int> big, rest;
    for (int c = 0; c < g.cols(); ++c) (norms(c) >= mu / gap ? big : rest).push_back(c);
    Eigen::MatrixXcd gb(dim, big.size());
    for (size_t i = 0; i < big.size(); ++i) gb.col(i) = g.col(big[i]);

    // Confirm only the group's top decade of singular values. Smaller ones
    // can fall below the deflated columns and must rejoin the pool so the
    // next round treats the mixing exactly.
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(gb, Eigen::ComputeThinU);
    const auto& s = svd.singularValues();
    int confirmed = 0;
    while (confirmed < s.size() && s(confirmed) >= mu / 10.0) ++confirmed;
    int rank = confirmed;
    while (rank < s.size() && s(rank) > 1e-14 * mu) ++rank;
    for (int i = 0; i < confirmed; ++i) {
      basis.push_back(svd.matrixU().col(i));
      values.push_back(s(i) * s(i));
    }

    Eigen::MatrixXcd next(dim, (rank - confirmed) + rest.size());
    int kept = 0;
    for (int i = confirmed; i < rank; ++i) next.col(kept++) = s(i) * svd.matrixU().col(i);
    const Eigen::MatrixXcd uc = svd.matrixU().leftCols(confirmed);
    for (int c : rest) {
      Eigen::VectorXcd col = g.col(c);
      const double before = col.norm();
      col -= uc * (uc.adjoint() * col);
      col -= uc * (uc.adjoint() * col);
      // columns living inside the confirmed span already contributed there
      if (col.norm() > 1e-10 * before) next.col(kept++) = col;
    }
    g = next.leftCols(kept);
  }
  GradedGram out;
  std::vector<int> order(values.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return values[a] > values[b]; });
  out.u.resize(dim, static_cast<int>(basis.size()));
  out.s2.resize(static_cast<int>(basis.size()));
  for (size_t i = 0; i < order.size(); ++i) {
    out.u.col(static_cast<int>(i)) = basis[order[i]];
    out.s2(static_cast<int>(i)) = values[order[i]];
  }
  return out;
}

// Information of a Gaussian mean vector y against covariance
// (1 + G G^dag) / 2, evaluated without forming the inverse:
// 2 y^dag ((1 + G G^dag)/2)^{-1} y = 4 (|y_perp|^2 + sum |a_i|^2/(1+s2_i)).
double info_identity_plus_gram(const Eigen::VectorXcd& y, const Eigen::MatrixXcd& g) {
  if (g.cols() == 0) return 4.0 * y.squaredNorm();
  const GradedGram gg = graded_gram(g);
  const Eigen::VectorXcd a = gg.u.adjoint() * y;
  const Eigen::VectorXcd y_perp = y - gg.u * a;
  double info = y_perp.squaredNorm();
  for (int i = 0; i < a.size(); ++i) info += std::norm(a(i)) / (1.0 + gg.s2(i));
  return 4.0 * info;
}

// ((1 + G G^dag)/2)^{-1} y, same decomposition.
Eigen::VectorXcd solve_identity_plus_gram(const Eigen::VectorXcd& y, const Eigen::MatrixXcd& g) {
  if (g.cols() == 0) return 2.0 * y;
  const GradedGram gg = graded_gram(g);
  const Eigen::VectorXcd a = gg.u.adjoint() * y;
  Eigen::VectorXcd scaled = a;
  for (int i = 0; i < a.size(); ++i) scaled(i) = a(i) * (gg.s2(i) / (1.0 + gg.s2(i)));
  return 2.0 * (y - gg.u * scaled);
}

double info_restricted(const Eigen::VectorXcd& v, const OutputCovariance& cov) {
  // delta -> infinity: invert the finite covariance on the kernel of the
  // divergent noise directions.
  const Eigen::MatrixXcd b = kernel_complement_basis(cov.infinite_factor);
  if (b.cols() == 0) return 0.0;
  const Eigen::VectorXcd vb = b.adjoint() * v;
  Eigen::MatrixXcd sb;
  if (cov.structured) {
    const Eigen::MatrixXcd mb = mtilde_dense(cov).adjoint() * b;
    const Eigen::MatrixXcd wb = cov.noise_factor.adjoint() * b;
    sb = 0.5 * (mb.adjoint() * mb + wb.adjoint() * wb);
  } else {
    sb = b.adjoint() * cov.sigma_q * b;
  }
  Eigen::LLT<Eigen::MatrixXcd> llt(sb);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("qfi: restricted covariance is not positive definite");
  return 2.0 * vb.dot(llt.solve(vb)).real();
}

Eigen::VectorXcd solve_covariance(const Eigen::VectorXcd& v, const OutputCovariance& cov) {
  if (cov.has_infinite())
    throw std::runtime_error("covariance solve undefined with divergent noise directions");
  if (cov.structured) {
    const Eigen::VectorXcd y = cov.mtilde_inverse_apply(v);
    const Eigen::MatrixXcd g = cov.mtilde_inverse_apply(cov.noise_factor);
    return cov.mtilde_inverse_adjoint_apply(solve_identity_plus_gram(y, g));
  }
  Eigen::LLT<Eigen::MatrixXcd> llt(cov.sigma_q);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("covariance is singular; flag the divergent noise instead");
  return llt.solve(v);
}

bool near_identity(const Eigen::MatrixXcd& m, double& scale) {
  scale = m.diagonal().real().mean();
  if (scale <= 0.0) return false;
  return (m - scale * Eigen::MatrixXcd::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff() <
         1e-10 * scale;
}

} // namespace

double sigma_from_information(double info) {
  if (!(info > 1e-300)) return std::numeric_limits<double>::infinity();
  return 1.0 / std::sqrt(info);
}

double qfi(const Eigen::VectorXcd& v_plus, const OutputCovariance& sigma) {
  if (sigma.has_infinite()) return info_restricted(v_plus, sigma);
  if (sigma.structured) {
    const Eigen::VectorXcd y = sigma.mtilde_inverse_apply(v_plus);
    const Eigen::MatrixXcd g = sigma.mtilde_inverse_apply(sigma.noise_factor);
    return info_identity_plus_gram(y, g);
  }
  Eigen::LLT<Eigen::MatrixXcd> llt(sigma.sigma_q);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("qfi: covariance is singular; flag the divergent noise instead");
  return 2.0 * v_plus.dot(llt.solve(v_plus)).real();
}

Qfim qfim(const Eigen::MatrixXcd& v_matrix, const OutputCovariance& sigma) {
  Qfim out;
  Eigen::Matrix2cd m;
  if (sigma.has_infinite()) {
    const Eigen::MatrixXcd b = kernel_complement_basis(sigma.infinite_factor);
    const Eigen::MatrixXcd vb = b.adjoint() * v_matrix;
    Eigen::MatrixXcd sb;
    if (sigma.structured) {
      const Eigen::MatrixXcd mb = mtilde_dense(sigma).adjoint() * b;
      const Eigen::MatrixXcd wb = sigma.noise_factor.adjoint() * b;
      sb = 0.5 * (mb.adjoint() * mb + wb.adjoint() * wb);
    } else {
      sb = b.adjoint() * sigma.sigma_q * b;
    }
    Eigen::LLT<Eigen::MatrixXcd> llt(sb);
    if (llt.info() != Eigen::Success) throw std::runtime_error("qfim: singular restricted covariance");
    m = 2.0 * (vb.adjoint() * llt.solve(vb));
  } else {
    Eigen::MatrixXcd solved(v_matrix.rows(), 2);
    for (int c = 0; c < 2; ++c) solved.col(c) = solve_covariance(v_matrix.col(c), sigma);
    m = 2.0 * (v_matrix.adjoint() * solved);
  }
  out.matrix = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(out.matrix);
  out.max_eigenvalue = es.eigenvalues()(1);
  out.dominant = es.eigenvectors().col(1);
  return out;
}

double fi_homodyne(const HomodyneSelection& sel, const Eigen::VectorXcd& v_plus,
                   const OutputCovariance& sigma) {
  const Eigen::MatrixXcd& t = sel.t_h;
  const Eigen::VectorXcd vt = t.adjoint() * v_plus;

  if (sigma.has_infinite()) {
    // Quadratures overlapping a divergent noise direction carry no
    // information; keep the part of the selection in its kernel.
    const Eigen::MatrixXcd kt = sigma.infinite_factor.adjoint() * t; // c x l
    const Eigen::MatrixXcd bh = kernel_complement_basis(kt.adjoint());
    if (bh.cols() == 0) return 0.0;
    Eigen::MatrixXcd tb = t * bh;
    OutputCovariance finite = sigma;
    finite.infinite_factor.resize(2 * sigma.k(), 0);
    return fi_homodyne({tb, sel.label}, v_plus, finite);
  }

  if (t.cols() == 1) {
    const Eigen::VectorXcd u = t.col(0);
    double denom;
    if (sigma.structured) {
      const Eigen::MatrixXcd mt = mtilde_dense(sigma).adjoint() * u;
      const Eigen::MatrixXcd wt = sigma.noise_factor.adjoint() * u;
      denom = 0.5 * (mt.squaredNorm() + wt.squaredNorm());
    } else {
      denom = (u.adjoint() * sigma.sigma_q * u)(0, 0).real();
    }
    if (!(denom > 0.0)) throw std::runtime_error("fi_homodyne: degenerate measured variance");
    return 2.0 * std::norm(vt(0)) / denom;
  }

  if (sigma.structured) {
    const Eigen::MatrixXcd q = t.adjoint() * mtilde_dense(sigma); // l x 2k
    const Eigen::MatrixXcd wt = t.adjoint() * sigma.noise_factor; // l x r
    const Eigen::MatrixXcd qq = q * q.adjoint();
    double scale = 0.0;
    if (near_identity(qq, scale)) {
      // Quantum part is white on this selection (e.g. RPN-decoupled sets).
      return (1.0 / scale) * info_identity_plus_gram(vt, wt / std::sqrt(scale));
    }
    // Work on the Gram factor so widely separated noise scales do not get
    // squared before the decomposition.
    Eigen::MatrixXcd factor(t.cols(), q.cols() + wt.cols());
    factor << q, wt;
    const GradedGram gg = graded_gram(factor);
    const Eigen::VectorXcd a = gg.u.adjoint() * vt;
    if ((vt - gg.u * a).norm() > 1e-7 * vt.norm())
      throw std::runtime_error("fi_homodyne: measured covariance not positive definite");
    double f = 0.0;
    for (int i = 0; i < a.size(); ++i) f += std::norm(a(i)) / (0.5 * gg.s2(i));
    return 2.0 * f;
  }

  Eigen::MatrixXcd sh = t.adjoint() * sigma.sigma_q * t;
  Eigen::LLT<Eigen::MatrixXcd> llt(sh);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("fi_homodyne: measured covariance not positive definite");
  return 2.0 * vt.dot(llt.solve(vt)).real();
}

HomodyneSelection optimal_quadrature(const Eigen::VectorXcd& v_plus,
                                     const OutputCovariance& sigma) {
  if (v_plus.norm() == 0.0)
    throw std::invalid_argument("optimal_quadrature: zero signal vector");
  Eigen::VectorXcd u = solve_covariance(v_plus, sigma);
  u /= u.norm();
  HomodyneSelection sel;
  sel.t_h = u;
  sel.label = "optimal";
  return sel;
}

HomodyneSelection decoupled_quadratures(const Eigen::MatrixXcd& m_int,
                                        const Eigen::MatrixXcd& m21) {
  const int k = static_cast<int>(m_int.rows());
  const Eigen::MatrixXcd x = m_int.adjoint() * m21;
  if ((x - x.adjoint()).cwiseAbs().maxCoeff() >
      1e-9 * std::max(1.0, x.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("decoupled_quadratures: M_int^dag M21 is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
      Eigen::MatrixXcd::Identity(k, k) + m21 * m21.adjoint());
  const Eigen::MatrixXcd inv_sqrt = es.eigenvectors() *
                                    es.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() *
                                    es.eigenvectors().adjoint();
  HomodyneSelection sel;
  sel.t_h.resize(2 * k, k);
  sel.t_h.topRows(k) = -m_int * m21.adjoint() * inv_sqrt;
  sel.t_h.bottomRows(k) = inv_sqrt;
  sel.label = "rpn-decoupled";
  return sel;
}

SubspaceDecomposition dfs_projector(const Eigen::MatrixXcd& a_ph, double tol) {
  if (tol <= 0.0) throw std::invalid_argument("dfs_projector: tolerance must be positive");
  const int k = static_cast<int>(a_ph.rows());
  SubspaceDecomposition d;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a_ph, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  const double smax = s.size() ? s(0) : 0.0;
  int rank = 0;
  while (rank < s.size() && smax > 0.0 && s(rank) > tol * smax) ++rank;
  const Eigen::MatrixXcd u = svd.matrixU().leftCols(rank);
  d.pi_c = u * u.adjoint();
  d.pi_dfs = Eigen::MatrixXcd::Identity(k, k) - d.pi_c;
  d.dim_dfs = k - rank;
  d.pi_min = Eigen::MatrixXcd::Zero(k, k);
  d.pi_max = Eigen::MatrixXcd::Zero(k, k);
  return d;
}

namespace {

// sigma_ph = (q/2)(1 + H H^dag): the scalar quantum floor q and the noise
// factor H, for the squeeze placements whose phase block keeps that shape.
void phase_block_structure(const OutputCovariance& sigma, double& q, Eigen::MatrixXcd& h) {
  const int k = sigma.k();
  const Eigen::MatrixXcd w_ph = sigma.noise_factor.bottomRows(k);
  q = 1.0;
  Eigen::MatrixXcd m21_part = sigma.m21;
  double noise_scale = 1.0;
  if (sigma.squeeze_r != 0.0) {
    const double er = std::exp(sigma.squeeze_r);
    q = std::exp(-2.0 * sigma.squeeze_r);
    noise_scale = er;
    Eigen::MatrixXcd amp_proj = Eigen::MatrixXcd::Zero(2 * k, 2 * k);
    amp_proj.topLeftCorner(k, k).setIdentity();
    if ((sigma.pi1 - amp_proj).cwiseAbs().maxCoeff() < 1e-12)
      m21_part = (er * er) * sigma.m21; // phase quadratures squeezed
  }
  h.resize(k, k + w_ph.cols());
  h << m21_part, noise_scale * w_ph;

  // Verify the assumed shape against the actual quantum phase block.
  const Eigen::MatrixXcd mt_ph = mtilde_dense(sigma).bottomRows(k);
  const Eigen::MatrixXcd d = mt_ph * mt_ph.adjoint();
  const Eigen::MatrixXcd expect =
      q * (Eigen::MatrixXcd::Identity(k, k) + m21_part * m21_part.adjoint());
  const double scale = std::max(1.0, d.cwiseAbs().maxCoeff());
  if ((d - expect).cwiseAbs().maxCoeff() > 1e-8 * scale)
    throw std::invalid_argument("decompose_fi: squeeze placement without a scalar quantum floor");
}

} // namespace

FiDecomposition decompose_fi(const Eigen::VectorXcd& v_ph, const OutputCovariance& sigma,
                             double cluster_tol) {
  if (!sigma.structured)
    throw std::invalid_argument("decompose_fi: needs a structured covariance");
  const int k = sigma.k();

  double q = 1.0;
  Eigen::MatrixXcd h;
  phase_block_structure(sigma, q, h);

  // Divergent noise restricts the readout to its kernel; the restriction
  // preserves the (q/2)(1 + H H^dag) shape.
  Eigen::MatrixXcd basis = Eigen::MatrixXcd::Identity(k, k);
  Eigen::VectorXcd v = v_ph;
  if (sigma.has_infinite()) {
    basis = kernel_complement_basis(sigma.infinite_factor.bottomRows(k));
    v = basis.adjoint() * v_ph;
    const Eigen::MatrixXcd h_full = h;
    h = basis.adjoint() * h_full;
    // Columns inside the divergent span restrict to round-off; zero them
    // so they cannot masquerade as coupled noise directions.
    for (int c = 0; c < h.cols(); ++c)
      if (h.col(c).norm() < 1e-10 * h_full.col(c).norm()) h.col(c).setZero();
  }
  const int m = static_cast<int>(basis.cols());

  FiDecomposition out;
  const GradedGram gg = graded_gram(h);
  const int rank = static_cast<int>(gg.s2.size());
  const Eigen::MatrixXcd& u = gg.u;
  const Eigen::VectorXcd a = u.adjoint() * v;
  const Eigen::VectorXcd v_perp = v - u * a;

  out.f_dfs = (4.0 / q) * v_perp.squaredNorm();
  out.subspaces.pi_max.setZero(m, m);
  out.subspaces.pi_min.setZero(m, m);

  // Cluster the noise eigenvalues t_i (sorted descending); runs within the
  // relative tolerance merge into one eigenspace.
  std::vector<std::pair<int, int>> clusters; // [begin, end)
  int begin = 0;
  for (int i = 1; i <= rank; ++i) {
    if (i == rank || (gg.s2(begin) - gg.s2(i)) > cluster_tol * gg.s2(begin)) {
      clusters.emplace_back(begin, i);
      begin = i;
    }
  }
  for (size_t ci = 0; ci < clusters.size(); ++ci) {
    const auto [b0, b1] = clusters[ci];
    double fc = 0.0;
    Eigen::MatrixXcd proj = Eigen::MatrixXcd::Zero(m, m);
    for (int i = b0; i < b1; ++i) {
      fc += (4.0 / q) * std::norm(a(i)) / (1.0 + gg.s2(i));
      proj += u.col(i) * u.col(i).adjoint();
    }
    if (ci == 0) {
      out.f_max += fc;
      out.subspaces.pi_max += proj;
      out.subspaces.dim_max += b1 - b0;
      out.subspaces.t_max = gg.s2(b0);
    } else {
      out.f_min += fc;
      out.subspaces.pi_min += proj;
      out.subspaces.dim_min += b1 - b0;
      out.subspaces.t_min = gg.s2(b1 - 1);
    }
  }
  out.subspaces.pi_max = basis * out.subspaces.pi_max * basis.adjoint();
  out.subspaces.pi_min = basis * out.subspaces.pi_min * basis.adjoint();
  out.subspaces.pi_c = out.subspaces.pi_max + out.subspaces.pi_min;
  if (sigma.has_infinite()) {
    // Directions carrying divergent noise are coupled as well.
    out.subspaces.pi_c += Eigen::MatrixXcd::Identity(k, k) - basis * basis.adjoint();
  }
  out.subspaces.pi_dfs = Eigen::MatrixXcd::Identity(k, k) - out.subspaces.pi_c;
  out.subspaces.dim_dfs = m - rank;
  out.f_total = out.f_dfs + out.f_min + out.f_max;
  out.eta = out.f_total > 0.0 ? out.f_dfs / out.f_total : 0.0;
  return out;
}

Eigen::Matrix2cd phase_information_matrix(const Eigen::MatrixXcd& v_ph,
                                          const OutputCovariance& sigma) {
  if (!sigma.structured)
    throw std::invalid_argument("phase_information_matrix: needs a structured covariance");
  const int k = sigma.k();
  double q = 1.0;
  Eigen::MatrixXcd h;
  phase_block_structure(sigma, q, h);

  Eigen::MatrixXcd v = v_ph;
  if (sigma.has_infinite()) {
    const Eigen::MatrixXcd basis = kernel_complement_basis(sigma.infinite_factor.bottomRows(k));
    v = basis.adjoint() * v_ph;
    const Eigen::MatrixXcd h_full = h;
    h = basis.adjoint() * h_full;
    for (int c = 0; c < h.cols(); ++c)
      if (h.col(c).norm() < 1e-10 * h_full.col(c).norm()) h.col(c).setZero();
  }

  const GradedGram gg = graded_gram(h);
  const Eigen::MatrixXcd a = gg.u.adjoint() * v; // rank x 2
  const Eigen::MatrixXcd v_perp = v - gg.u * a;

  Eigen::Matrix2cd f = (4.0 / q) * (v_perp.adjoint() * v_perp);
  for (int i = 0; i < gg.s2.size(); ++i)
    f += (4.0 / q) * a.row(i).adjoint() * a.row(i) / (1.0 + gg.s2(i));
  return 0.5 * (f + f.adjoint());
}

double real_form_qfi(const Eigen::VectorXcd& v_plus, const Eigen::MatrixXcd& m_full,
                     const Eigen::MatrixXcd& noise_factor) {
  const Eigen::MatrixXd mr = real_embed(m_full);
  const Eigen::MatrixXd wr = real_embed(noise_factor);
  const Eigen::MatrixXd sigma = 0.5 * (mr * mr.transpose() + wr * wr.transpose());
  Eigen::VectorXd v(2 * v_plus.size());
  v << v_plus.real(), v_plus.imag();
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("real_form_qfi: covariance not positive definite");
  return 2.0 * v.dot(llt.solve(v));
}

Eigen::MatrixXd real_embed(const Eigen::MatrixXcd& m) {
  Eigen::MatrixXd out(2 * m.rows(), 2 * m.cols());
  out << m.real(), -m.imag(), m.imag(), m.real();
  return out;
}

} // namespace dfisim

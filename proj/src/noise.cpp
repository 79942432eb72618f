#include "dfisim/noise.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dfisim {

NoiseModel NoiseModel::white(double delta) {
  NoiseModel m;
  m.displacement.kind = DisplacementNoise::Kind::White;
  m.displacement.delta = delta;
  return m;
}

NoiseModel NoiseModel::thermal(double coeff, double exponent) {
  NoiseModel m;
  m.displacement.kind = DisplacementNoise::Kind::Thermal;
  m.displacement.coeff = coeff;
  m.displacement.exponent = exponent;
  return m;
}

double thermal_delta2(double f, const NoiseModel& model) {
  if (f <= 0.0) throw std::invalid_argument("thermal_delta2: f must be positive");
  return model.displacement.coeff * std::pow(f, -model.displacement.exponent);
}

double displacement_delta2(double f, const DisplacementNoise& n) {
  switch (n.kind) {
    case DisplacementNoise::Kind::White:
      return n.delta * n.delta;
    case DisplacementNoise::Kind::Thermal:
      if (f <= 0.0) throw std::invalid_argument("displacement_delta2: f must be positive");
      return n.coeff * std::pow(f, -n.exponent);
    default:
      return 0.0;
  }
}

Eigen::MatrixXcd CorrelatedSpectrum::at(double f) const {
  if (freqs.empty()) throw std::runtime_error("correlated spectrum is empty");
  if (f <= freqs.front()) return mats.front();
  if (f >= freqs.back()) return mats.back();
  size_t hi = 1;
  while (freqs[hi] < f) ++hi;
  const double lf = std::log(f);
  const double l0 = std::log(freqs[hi - 1]);
  const double l1 = std::log(freqs[hi]);
  const double w = (lf - l0) / (l1 - l0);
  return (1.0 - w) * mats[hi - 1] + w * mats[hi];
}

CorrelatedSpectrum CorrelatedSpectrum::from_csv(const std::string& path, int n_mirrors) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open correlated-noise CSV: " + path);
  CorrelatedSpectrum spec;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
    if (static_cast<int>(vals.size()) != 1 + n_mirrors * n_mirrors)
      throw std::runtime_error("correlated-noise CSV row needs 1 + n^2 columns");
    Eigen::MatrixXcd m(n_mirrors, n_mirrors);
    for (int r = 0; r < n_mirrors; ++r)
      for (int c = 0; c < n_mirrors; ++c) m(r, c) = vals[1 + r * n_mirrors + c];
    spec.freqs.push_back(vals[0]);
    spec.mats.push_back(m);
  }
  for (size_t i = 1; i < spec.freqs.size(); ++i)
    if (spec.freqs[i] <= spec.freqs[i - 1])
      throw std::runtime_error("correlated-noise CSV frequencies must be ascending");
  return spec;
}

Eigen::MatrixXcd OutputCovariance::mtilde_inverse_apply(const Eigen::MatrixXcd& x) const {
  const int kk = k();
  const Eigen::MatrixXcd yt = m_int.adjoint() * x.topRows(kk);
  Eigen::MatrixXcd y(2 * kk, x.cols());
  y.topRows(kk) = yt;
  y.bottomRows(kk) = m_int.adjoint() * (x.bottomRows(kk) - m21 * yt);
  if (squeeze_r != 0.0) {
    const double ep = std::exp(squeeze_r), em = std::exp(-squeeze_r);
    y = ep * y - (ep - em) * (pi1 * y);
  }
  return y;
}

Eigen::MatrixXcd OutputCovariance::mtilde_inverse_adjoint_apply(const Eigen::MatrixXcd& x) const {
  const int kk = k();
  Eigen::MatrixXcd z = x;
  if (squeeze_r != 0.0) {
    const double ep = std::exp(squeeze_r), em = std::exp(-squeeze_r);
    z = ep * z - (ep - em) * (pi1 * z);
  }
  const Eigen::MatrixXcd zb = m_int * z.bottomRows(kk);
  Eigen::MatrixXcd y(2 * kk, x.cols());
  y.topRows(kk) = m_int * (z.topRows(kk) - m21.adjoint() * zb);
  y.bottomRows(kk) = zb;
  return y;
}

OutputCovariance OutputCovariance::from_dense(double f, Eigen::MatrixXcd sigma) {
  OutputCovariance cov;
  cov.frequency = f;
  cov.quantum = sigma;
  cov.displacement.setZero(sigma.rows(), sigma.cols());
  cov.sagnac.setZero(sigma.rows(), sigma.cols());
  cov.sigma_q = std::move(sigma);
  cov.structured = false;
  cov.noise_factor.resize(cov.sigma_q.rows(), 0);
  cov.infinite_factor.resize(cov.sigma_q.rows(), 0);
  return cov;
}

OutputCovariance output_covariance(const TransferSet& ts, const NoiseModel& model,
                                   const SqueezeConfig* squeeze) {
  const int k = ts.k();
  const int n = ts.n_mirrors;
  const Eigen::MatrixXcd m = ts.full_m();

  OutputCovariance cov;
  cov.frequency = ts.f;
  cov.structured = true;
  cov.m_int = ts.m_int;
  cov.m21 = ts.m21;

  Eigen::MatrixXcd sigma_i = 0.5 * Eigen::MatrixXcd::Identity(2 * k, 2 * k);
  if (squeeze && squeeze->active()) {
    cov.squeeze_r = squeeze->r;
    cov.pi1 = resolve_pi1(*squeeze, ts.m_int, ts.m21);
    const double e2p = std::exp(2.0 * squeeze->r), e2m = std::exp(-2.0 * squeeze->r);
    sigma_i = 0.5 * (e2m * Eigen::MatrixXcd::Identity(2 * k, 2 * k) + (e2p - e2m) * cov.pi1);
  }
  cov.quantum = m * sigma_i * m.adjoint();

  // Embed the phase-space factors used by the noise terms.
  Eigen::MatrixXcd a_embed = Eigen::MatrixXcd::Zero(2 * k, n);
  a_embed.bottomRows(k) = ts.a_ph;
  Eigen::VectorXcd d_sag = Eigen::VectorXcd::Zero(2 * k);
  d_sag.tail(k) = ts.sagnac_vec;

  std::vector<Eigen::MatrixXcd> finite_factors;
  std::vector<Eigen::MatrixXcd> infinite_factors;

  cov.displacement.setZero(2 * k, 2 * k);
  const auto& disp = model.displacement;
  if (disp.infinite) {
    infinite_factors.push_back(a_embed);
  } else if (disp.kind == DisplacementNoise::Kind::White ||
             disp.kind == DisplacementNoise::Kind::Thermal) {
    const double d2 = displacement_delta2(ts.f, disp);
    if (d2 > 0.0) {
      finite_factors.push_back(std::sqrt(d2) * a_embed);
      cov.displacement = 0.5 * d2 * (a_embed * a_embed.adjoint());
    }
  } else if (disp.kind == DisplacementNoise::Kind::Correlated) {
    if (!disp.spectrum) throw std::invalid_argument("correlated noise requires a spectrum");
    const Eigen::MatrixXcd sx = disp.spectrum->at(ts.f);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(sx);
    const double top = std::max(1.0e-300, es.eigenvalues().cwiseAbs().maxCoeff());
    if (es.eigenvalues().minCoeff() < -1e-10 * top)
      throw std::invalid_argument("correlated displacement spectrum is not positive semidefinite");
    const Eigen::VectorXd clipped = es.eigenvalues().cwiseMax(0.0);
    const Eigen::MatrixXcd root =
        es.eigenvectors() * clipped.cwiseSqrt().asDiagonal() * es.eigenvectors().adjoint();
    finite_factors.push_back(a_embed * root);
    cov.displacement = 0.5 * (a_embed * sx * a_embed.adjoint());
  }

  cov.sagnac.setZero(2 * k, 2 * k);
  if (model.sagnac.infinite) {
    infinite_factors.push_back(d_sag);
  } else if (model.sagnac.variance > 0.0) {
    finite_factors.push_back(std::sqrt(model.sagnac.variance) * d_sag);
    cov.sagnac = 0.5 * model.sagnac.variance * (d_sag * d_sag.adjoint());
  }

  int nf = 0, ni = 0;
  for (const auto& w : finite_factors) nf += static_cast<int>(w.cols());
  for (const auto& w : infinite_factors) ni += static_cast<int>(w.cols());
  cov.noise_factor.resize(2 * k, nf);
  cov.infinite_factor.resize(2 * k, ni);
  int c = 0;
  for (const auto& w : finite_factors) {
    cov.noise_factor.middleCols(c, w.cols()) = w;
    c += static_cast<int>(w.cols());
  }
  c = 0;
  for (const auto& w : infinite_factors) {
    cov.infinite_factor.middleCols(c, w.cols()) = w;
    c += static_cast<int>(w.cols());
  }

  cov.sigma_q = cov.quantum + cov.displacement + cov.sagnac;
  return cov;
}

} // namespace dfisim

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "dfisim/fisher.hpp"
#include "dfisim/scenario.hpp"
#include "test_support.hpp"

using namespace dfisim;
using dfisim::testing::default_triangle;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;

namespace {

std::mt19937 rng(7);

MatrixXcd random_matrix(int r, int c) {
  std::normal_distribution<double> g;
  MatrixXcd m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = Complex(g(rng), g(rng));
  return m;
}

MatrixXcd random_unitary(int n) {
  Eigen::HouseholderQR<MatrixXcd> qr(random_matrix(n, n));
  return qr.householderQ() * MatrixXcd::Identity(n, n);
}

// A random lossless transfer matrix with the resonant block structure:
// M = [[U, 0], [U X, U]] with X Hermitian, so M_int^dag M21 = X.
struct RandomInstance {
  MatrixXcd m_full;     // 2k x 2k
  MatrixXcd a_embed;    // 2k x n, phase rows only
  VectorXcd v;          // 2k, phase rows only
  double delta;
};

RandomInstance random_instance(int k, int n, double delta_max) {
  RandomInstance inst;
  const MatrixXcd u = random_unitary(k);
  MatrixXcd x = random_matrix(k, k);
  x = 0.5 * (x + x.adjoint());
  inst.m_full = MatrixXcd::Zero(2 * k, 2 * k);
  inst.m_full.topLeftCorner(k, k) = u;
  inst.m_full.bottomRightCorner(k, k) = u;
  inst.m_full.bottomLeftCorner(k, k) = u * x;
  inst.a_embed = MatrixXcd::Zero(2 * k, n);
  inst.a_embed.bottomRows(k) = random_matrix(k, n);
  inst.v = VectorXcd::Zero(2 * k);
  inst.v.tail(k) = random_matrix(k, 1);
  inst.delta = std::uniform_real_distribution<double>(0.0, delta_max)(rng);
  return inst;
}

OutputCovariance covariance_of(const RandomInstance& inst) {
  const MatrixXcd sigma = 0.5 * (inst.m_full * inst.m_full.adjoint() +
                                 inst.delta * inst.delta * inst.a_embed * inst.a_embed.adjoint());
  return OutputCovariance::from_dense(0.0, sigma);
}

} // namespace

TEST_CASE("shot-noise limit of the qfi") {
  auto s = default_triangle();
  const auto ts = transfer_set(s.geometry, s.params, s.source, 5.0);
  const auto cov = output_covariance(ts, NoiseModel::none());
  const double i = qfi(ts.v_plus_embedded(), cov);
  const double shot = 4.0 * ts.v_ph.col(0).squaredNorm();
  CHECK(i == doctest::Approx(shot).epsilon(1e-12));
}

TEST_CASE("infinite displacement noise annihilates coupled signal") {
  auto s = default_triangle();
  const auto ts = transfer_set(s.geometry, s.params, s.source, 2.0);
  NoiseModel m;
  m.displacement.kind = DisplacementNoise::Kind::White;
  m.displacement.infinite = true;
  const auto cov = output_covariance(ts, m);

  // a signal living in the coupled space yields zero information
  VectorXcd v = VectorXcd::Zero(12);
  v.tail(6) = ts.a_ph.col(0) + 0.5 * ts.a_ph.col(2);
  const double scale = 4.0 * v.squaredNorm();
  CHECK(qfi(v, cov) < 1e-18 * scale);

  // and the physical response keeps only its displacement-free part
  const double i_inf = qfi(ts.v_plus_embedded(), cov);
  const auto d = dfs_projector(ts.a_ph);
  const double expect = 4.0 * (d.pi_dfs * ts.v_ph.col(0)).squaredNorm();
  CHECK(i_inf == doctest::Approx(expect).epsilon(1e-8));
}

TEST_CASE("compact form agrees with the real-form oracle") {
  for (int trial = 0; trial < 20; ++trial) {
    const auto inst = random_instance(6, 3, 10.0);
    const auto cov = covariance_of(inst);
    const double compact = qfi(inst.v, cov);
    const double real = real_form_qfi(inst.v, inst.m_full, inst.delta * inst.a_embed);
    CHECK(std::abs(compact / real - 1.0) < 1e-10);
  }
  // vacuum case reduces to the shot-noise formula
  RandomInstance inst = random_instance(6, 3, 0.0);
  inst.m_full.bottomLeftCorner(6, 6).setZero();
  inst.delta = 0.0;
  const double real = real_form_qfi(inst.v, inst.m_full, MatrixXcd::Zero(12, 0));
  CHECK(real == doctest::Approx(4.0 * inst.v.squaredNorm()).epsilon(1e-12));
}

TEST_CASE("example instance: random a_ph with delta = 0.7") {
  const auto inst = [] {
    RandomInstance i = random_instance(6, 3, 0.0);
    i.delta = 0.7;
    return i;
  }();
  const double compact = qfi(inst.v, covariance_of(inst));
  const double real = real_form_qfi(inst.v, inst.m_full, 0.7 * inst.a_embed);
  CHECK(std::abs(compact / real - 1.0) < 1e-10);
}

TEST_CASE("qfim structure") {
  auto s = default_triangle();

  SUBCASE("dominant polarization is plus at theta = pi/2") {
    const auto ts = transfer_set(s.geometry, s.params, s.source, 1.0);
    const auto cov = output_covariance(ts, NoiseModel::white(1e-19));
    const auto im = qfim(ts.v_embedded(), cov);
    CHECK(std::abs(im.dominant(0)) > 0.999);
  }

  SUBCASE("diagonal at dc in the (plus, cross) basis") {
    const auto src = make_gw_source(1.1, 0.6);
    const auto ts = transfer_set(s.geometry, s.params, src, 1e-3);
    const auto cov = output_covariance(ts, NoiseModel::none());
    const auto im = qfim(ts.v_embedded(), cov);
    const double diag = std::max(std::abs(im.matrix(0, 0)), std::abs(im.matrix(1, 1)));
    CHECK(std::abs(im.matrix(0, 1)) < 1e-4 * diag);
  }

  SUBCASE("orthogonal columns under the covariance metric give a diagonal qfim") {
    MatrixXcd v = MatrixXcd::Zero(12, 2);
    v(6, 0) = 1.0;
    v(7, 1) = 2.0;
    const auto cov = OutputCovariance::from_dense(0.0, 0.5 * MatrixXcd::Identity(12, 12));
    const auto im = qfim(v, cov);
    CHECK(std::abs(im.matrix(0, 1)) < 1e-12);
  }
}

TEST_CASE("homodyne fisher information") {
  auto s = default_triangle(true);
  const auto ts = transfer_set(s.geometry, s.params, s.source, 150.0);
  const int k = 6;

  SUBCASE("phase quadratures under radiation pressure") {
    const auto cov = output_covariance(ts, NoiseModel::none());
    HomodyneSelection phase;
    phase.t_h = MatrixXcd::Zero(2 * k, k);
    phase.t_h.bottomRows(k).setIdentity();
    phase.label = "phase";
    const double f = fi_homodyne(phase, ts.v_plus_embedded(), cov);
    const MatrixXcd gram = MatrixXcd::Identity(k, k) + ts.m21 * ts.m21.adjoint();
    const VectorXcd vp = ts.v_ph.col(0);
    const double expect = 4.0 * vp.dot(gram.llt().solve(vp)).real();
    CHECK(f == doctest::Approx(expect).epsilon(1e-10));
    CHECK(f <= qfi(ts.v_plus_embedded(), cov) * (1.0 + 1e-9));
  }

  SUBCASE("spanning the optimal quadrature saturates the qfi") {
    const auto cov = output_covariance(ts, NoiseModel::white(2e-21));
    const auto sel = optimal_quadrature(ts.v_plus_embedded(), cov);
    CHECK(sel.t_h.cols() == 1);
    CHECK(std::abs(sel.t_h.col(0).norm() - 1.0) < 1e-10);
    const double f = fi_homodyne(sel, ts.v_plus_embedded(), cov);
    const double i = qfi(ts.v_plus_embedded(), cov);
    CHECK(std::abs(f / i - 1.0) < 1e-9);
  }

  SUBCASE("selection orthogonal to the signal sees nothing") {
    const auto cov = output_covariance(ts, NoiseModel::none());
    VectorXcd u = VectorXcd::Zero(2 * k);
    u(0) = 1.0; // amplitude quadrature, signal is phase-only
    const double f = fi_homodyne({u, "amp"}, ts.v_plus_embedded(), cov);
    CHECK(f < 1e-18 * qfi(ts.v_plus_embedded(), cov));
  }
}

TEST_CASE("optimal quadrature forms") {
  auto s = default_triangle(true);
  const auto ts = transfer_set(s.geometry, s.params, s.source, 120.0);
  const int k = 6;
  const VectorXcd vp = ts.v_ph.col(0);

  SUBCASE("vacuum covariance returns the signal direction") {
    const auto cov = OutputCovariance::from_dense(0.0, 0.5 * MatrixXcd::Identity(12, 12));
    const auto sel = optimal_quadrature(ts.v_plus_embedded(), cov);
    const VectorXcd expect = ts.v_plus_embedded().normalized();
    CHECK((sel.t_h.col(0) - expect).norm() < 1e-10);
    CHECK_THROWS_AS(optimal_quadrature(VectorXcd::Zero(12), cov), std::invalid_argument);
  }

  SUBCASE("radiation pressure only") {
    const auto cov = output_covariance(ts, NoiseModel::none());
    const auto sel = optimal_quadrature(ts.v_plus_embedded(), cov);
    VectorXcd expect(2 * k);
    expect.head(k) = -ts.m_int * ts.m21.adjoint() * vp;
    expect.tail(k) = vp;
    expect.normalize();
    CHECK((sel.t_h.col(0) - expect).norm() < 1e-9);
  }

  SUBCASE("thermal plus radiation pressure uses the filtered signal") {
    const double delta = 3e-21;
    const auto cov = output_covariance(ts, NoiseModel::white(delta));
    const auto sel = optimal_quadrature(ts.v_plus_embedded(), cov);
    const MatrixXcd filt = MatrixXcd::Identity(k, k) +
                           delta * delta * ts.a_ph * ts.a_ph.adjoint();
    const VectorXcd vtilde = filt.llt().solve(vp);
    VectorXcd expect(2 * k);
    expect.head(k) = -ts.m_int * ts.m21.adjoint() * vtilde;
    expect.tail(k) = vtilde;
    expect.normalize();
    CHECK((sel.t_h.col(0) - expect).norm() < 1e-9);
  }
}

TEST_CASE("rpn-decoupled quadratures") {
  auto s = default_triangle(true);
  const auto ts = transfer_set(s.geometry, s.params, s.source, 90.0);
  const int k = 6;
  const auto sel = decoupled_quadratures(ts.m_int, ts.m21);
  REQUIRE(sel.t_h.cols() == k);

  CHECK((sel.t_h.adjoint() * sel.t_h - MatrixXcd::Identity(k, k)).cwiseAbs().maxCoeff() < 1e-10);
  const MatrixXcd j = dfisim::testing::commutation_form(k);
  CHECK((sel.t_h.adjoint() * j * sel.t_h).cwiseAbs().maxCoeff() < 1e-10);

  // zero coupling reduces to the plain phase quadratures
  const auto plain = decoupled_quadratures(ts.m_int, MatrixXcd::Zero(k, k));
  CHECK((plain.t_h.topRows(k)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((plain.t_h.bottomRows(k) - MatrixXcd::Identity(k, k)).cwiseAbs().maxCoeff() < 1e-14);

  // measuring them under radiation pressure recovers the shot noise limit
  const auto cov = output_covariance(ts, NoiseModel::none());
  const double f = fi_homodyne(sel, ts.v_plus_embedded(), cov);
  CHECK(std::abs(f / (4.0 * ts.v_ph.col(0).squaredNorm()) - 1.0) < 1e-10);
}

TEST_CASE("dfs projector") {
  SUBCASE("zero coupling matrix gives the identity projector") {
    const auto d = dfs_projector(MatrixXcd::Zero(6, 3));
    CHECK(d.dim_dfs == 6);
    CHECK((d.pi_dfs - MatrixXcd::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("triangle has a three-dimensional dfs at every frequency") {
    auto s = default_triangle();
    for (double f = 1e-2; f < 2e5; f *= 31.0) {
      const auto ts = transfer_set(s.geometry, s.params, s.source, f);
      const auto d = dfs_projector(ts.a_ph);
      CHECK(d.dim_dfs == 3);
      CHECK((d.pi_dfs * ts.a_ph).cwiseAbs().maxCoeff() <
            1e-10 * ts.a_ph.cwiseAbs().maxCoeff());
      CHECK((d.pi_dfs + d.pi_c - MatrixXcd::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-10);
      CHECK((d.pi_dfs * d.pi_c).cwiseAbs().maxCoeff() < 1e-10);
    }
  }

  SUBCASE("standard sagnac drops to rank one at dc") {
    Scenario def;
    def.geometry_preset = "standard-sagnac";
    const auto g = def.make_geometry();
    const auto p = def.make_params(g);
    const auto ts = transfer_set(g, p, make_gw_source(1.5707963267948966, 0.0), 1e-3);
    const auto d = dfs_projector(ts.a_ph, 1e-6);
    CHECK(ts.k() == 2);
    CHECK(d.dim_dfs == 1);
    CHECK_THROWS_AS(dfs_projector(ts.a_ph, 0.0), std::invalid_argument);
  }
}

TEST_CASE("phase-readout decomposition") {
  auto s = default_triangle(true);

  SUBCASE("no noise labels everything displacement-free") {
    auto clean = default_triangle();
    const auto ts = transfer_set(clean.geometry, clean.params, clean.source, 10.0);
    const auto cov = output_covariance(ts, NoiseModel::none());
    const auto d = decompose_fi(ts.v_ph.col(0), cov);
    CHECK(d.eta == doctest::Approx(1.0));
    CHECK(d.f_min == 0.0);
    CHECK(d.f_max == 0.0);
    CHECK(d.f_total == doctest::Approx(4.0 * ts.v_ph.col(0).squaredNorm()).epsilon(1e-12));
  }

  SUBCASE("parts add up to the independently computed phase information") {
    const auto ts = transfer_set(s.geometry, s.params, s.source, 250.0);
    const auto cov = output_covariance(ts, NoiseModel::white(5e-21));
    const auto d = decompose_fi(ts.v_ph.col(0), cov);
    HomodyneSelection phase;
    phase.t_h = MatrixXcd::Zero(12, 6);
    phase.t_h.bottomRows(6).setIdentity();
    const double f_direct = fi_homodyne(phase, ts.v_plus_embedded(), cov);
    CHECK(std::abs((d.f_dfs + d.f_min + d.f_max) / f_direct - 1.0) < 1e-8);
    CHECK(d.subspaces.dim_dfs == 3);
    CHECK((d.subspaces.pi_dfs + d.subspaces.pi_min + d.subspaces.pi_max -
           MatrixXcd::Identity(6, 6))
              .cwiseAbs()
              .maxCoeff() < 1e-10);
    CHECK((d.subspaces.pi_dfs * ts.a_ph).cwiseAbs().maxCoeff() <
          1e-10 * ts.a_ph.cwiseAbs().maxCoeff());
    CHECK(d.eta >= 0.0);
    CHECK(d.eta <= 1.0);
    CHECK(d.subspaces.t_min <= d.subspaces.t_max);
  }

  SUBCASE("eta goes to one under infinite displacement noise") {
    const auto ts = transfer_set(s.geometry, s.params, s.source, 5.0);
    NoiseModel m;
    m.displacement.kind = DisplacementNoise::Kind::White;
    m.displacement.infinite = true;
    const auto cov = output_covariance(ts, m);
    const auto d = decompose_fi(ts.v_ph.col(0), cov);
    CHECK(d.eta == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(d.f_dfs > 0.0);
  }
}

TEST_CASE("information-ordering properties") {
  auto s = default_triangle(true);
  const auto ts = transfer_set(s.geometry, s.params, s.source, 35.0);

  SUBCASE("qfi is non-increasing in the noise level") {
    double prev = std::numeric_limits<double>::infinity();
    for (double delta : {0.0, 1e-22, 1e-21, 1e-20, 1e-19}) {
      const auto cov = output_covariance(
          ts, delta > 0 ? NoiseModel::white(delta) : NoiseModel::none());
      const double i = qfi(ts.v_plus_embedded(), cov);
      CHECK(i <= prev * (1.0 + 1e-12));
      prev = i;
    }
  }

  SUBCASE("radiation pressure alone saturates the shot-noise limit") {
    for (double f = 1e-2; f < 2e5; f *= 23.0) {
      const auto tsf = transfer_set(s.geometry, s.params, s.source, f);
      const auto cov = output_covariance(tsf, NoiseModel::none());
      const double i = qfi(tsf.v_plus_embedded(), cov);
      CHECK(std::abs(i / (4.0 * tsf.v_ph.col(0).squaredNorm()) - 1.0) < 1e-10);
    }
  }

  SUBCASE("thermal noise dominates the qfi with or without radiation pressure") {
    auto norp = default_triangle(false);
    for (double f = 1e-2; f < 2e5; f *= 23.0) {
      const auto t1 = transfer_set(s.geometry, s.params, s.source, f);
      const auto t0 = transfer_set(norp.geometry, norp.params, norp.source, f);
      const double i1 = qfi(t1.v_plus_embedded(), output_covariance(t1, NoiseModel::thermal()));
      const double i0 = qfi(t0.v_plus_embedded(), output_covariance(t0, NoiseModel::thermal()));
      CHECK(std::abs(i1 / i0 - 1.0) < 1e-8);
    }
  }

  SUBCASE("optimal multi-parameter quadratures commute for symplectic covariances") {
    const auto src = make_gw_source(1.0, 0.5); // both polarizations respond
    const auto tsb = transfer_set(s.geometry, s.params, src, 35.0);
    const auto cov = output_covariance(tsb, NoiseModel::none());
    MatrixXcd solved(12, 2);
    for (int c = 0; c < 2; ++c)
      solved.col(c) = optimal_quadrature(tsb.v_embedded().col(c), cov).t_h.col(0);
    const MatrixXcd j = dfisim::testing::commutation_form(6);
    CHECK((solved.adjoint() * j * solved).cwiseAbs().maxCoeff() < 1e-10);
  }
}

#include "dfisim/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace dfisim {

namespace {

std::string fmt(double x) {
  if (std::isnan(x)) return "";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

double parse_field(const std::string& s) {
  if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  return std::stod(s);
}

std::string sanitize(std::string s) {
  for (auto& c : s)
    if (c == ',' || c == '\n') c = ';';
  return s;
}

void parallel_for(int count, int threads, const std::function<void(int)>& body) {
  threads = std::max(1, threads);
  if (threads == 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) body(i);
    });
  for (auto& th : pool) th.join();
}

double readout_information(const Scenario& scenario, const TransferSet& ts,
                           const OutputCovariance& cov, const FiDecomposition& phase_decomp) {
  switch (scenario.readout) {
    case Readout::Optimal:
      return qfi(ts.v_plus_embedded(), cov);
    case Readout::Phase:
      return phase_decomp.f_total;
    case Readout::MaxSignal: {
      Eigen::VectorXcd u = ts.v_plus_embedded();
      const double n = u.norm();
      if (n == 0.0) return 0.0;
      u /= n;
      return fi_homodyne({u, "max-signal"}, ts.v_plus_embedded(), cov);
    }
  }
  return 0.0;
}

// Information about the dominant polarization, the figure of merit for
// configuration comparisons (independent of the polarization frame).
double readout_information_dominant(const Scenario& scenario, const TransferSet& ts,
                                    const OutputCovariance& cov) {
  switch (scenario.readout) {
    case Readout::Optimal:
      return qfim(ts.v_embedded(), cov).max_eigenvalue;
    case Readout::Phase: {
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(phase_information_matrix(ts.v_ph, cov));
      return es.eigenvalues()(1);
    }
    case Readout::MaxSignal: {
      Eigen::VectorXcd u = ts.v_plus_embedded();
      const double n = u.norm();
      if (n == 0.0) return 0.0;
      u /= n;
      return fi_homodyne({u, "max-signal"}, ts.v_plus_embedded(), cov);
    }
  }
  return 0.0;
}

} // namespace

SensitivitySample evaluate_frequency(const Scenario& scenario, const PolygonGeometry& geometry,
                                     const OpticalParams& params, const GwSource& source,
                                     double f) {
  SensitivitySample row;
  row.f = f;
  try {
    const TransferSet ts =
        transfer_set(geometry, params, source, f, scenario.noise.sagnac.rotation_rate);
    const SqueezeConfig* squeeze = scenario.squeeze.active() ? &scenario.squeeze : nullptr;
    const OutputCovariance cov = output_covariance(ts, scenario.noise, squeeze);

    row.qfi = qfi(ts.v_plus_embedded(), cov);
    const FiDecomposition decomp = decompose_fi(ts.v_ph.col(0), cov);
    row.f_min = decomp.f_min;
    row.f_max = decomp.f_max;
    row.f_dfs = decomp.f_dfs;
    row.eta = decomp.eta;
    row.fi = readout_information(scenario, ts, cov, decomp);
    row.dfs_dim = dfs_projector(ts.a_ph).dim_dfs;
    row.dominant_polarization = qfim(ts.v_embedded(), cov).dominant;

    const double info = scenario.readout == Readout::Optimal ? row.qfi : row.fi;
    if (squeeze) {
      const OutputCovariance cov0 = output_covariance(ts, scenario.noise, nullptr);
      const FiDecomposition decomp0 = decompose_fi(ts.v_ph.col(0), cov0);
      const double info0 = scenario.readout == Readout::Optimal
                               ? qfi(ts.v_plus_embedded(), cov0)
                               : readout_information(scenario, ts, cov0, decomp0);
      if (info0 > 0.0) row.eta_gain = eta_gain(info, info0, scenario.squeeze.r);
    }
    row.sigma = sigma_from_information(info);
  } catch (const std::exception& e) {
    row.status = std::string("error: ") + e.what();
    row.sigma = std::numeric_limits<double>::quiet_NaN();
    row.qfi = row.fi = row.f_min = row.f_max = row.f_dfs = row.eta =
        std::numeric_limits<double>::quiet_NaN();
  }
  return row;
}

std::vector<SensitivitySample> run_sweep(const Scenario& scenario, int threads) {
  const PolygonGeometry geometry = scenario.make_geometry();
  const OpticalParams params = scenario.make_params(geometry);
  const GwSource source = scenario.make_source();
  const std::vector<double> freqs = scenario.sweep.frequencies();
  std::vector<SensitivitySample> rows(freqs.size());
  parallel_for(static_cast<int>(freqs.size()), threads, [&](int i) {
    rows[i] = evaluate_frequency(scenario, geometry, params, source, freqs[i]);
  });
  return rows;
}

NoiseBudget noise_budget(const Scenario& scenario, int threads) {
  NoiseBudget budget;
  budget.frequencies = scenario.sweep.frequencies();

  std::vector<std::pair<std::string, Scenario>> runs;
  Scenario shot = scenario;
  shot.noise = NoiseModel::none();
  shot.noise_sources.clear();
  shot.rpn = false;
  runs.emplace_back("shot", shot);
  if (scenario.rpn) {
    Scenario rpn_only = scenario;
    rpn_only.noise = NoiseModel::none();
    rpn_only.noise.rpn = true;
    rpn_only.noise_sources.clear();
    runs.emplace_back("rpn", rpn_only);
  }
  for (const auto& src : scenario.noise_sources) {
    Scenario iso = scenario;
    iso.noise = src;
    iso.noise.rpn = scenario.rpn;
    std::string name;
    switch (src.displacement.kind) {
      case DisplacementNoise::Kind::White: name = "white"; break;
      case DisplacementNoise::Kind::Thermal: name = "thermal"; break;
      case DisplacementNoise::Kind::Correlated: name = "correlated"; break;
      case DisplacementNoise::Kind::None:
        name = (src.sagnac.variance > 0.0 || src.sagnac.infinite) ? "sagnac" : "none";
        break;
    }
    runs.emplace_back(name, iso);
  }
  runs.emplace_back("combined", scenario);

  for (const auto& [name, sc] : runs) {
    const auto rows = run_sweep(sc, threads);
    budget.columns.push_back(name);
    std::vector<double> col(rows.size());
    for (size_t i = 0; i < rows.size(); ++i) col[i] = rows[i].sigma;
    budget.sigma.push_back(std::move(col));
  }
  return budget;
}

TransmissivityResult optimize_transmissivity(const Scenario& scenario,
                                             std::array<double, 2> bounds, int grid,
                                             const std::vector<double>& eval_frequencies) {
  if (grid < 1) throw std::invalid_argument("optimize_transmissivity: empty grid");
  if (!(bounds[0] >= 0.0 && bounds[1] <= 1.0 && bounds[0] < bounds[1]))
    throw std::invalid_argument("optimize_transmissivity: bounds must satisfy 0 <= lo < hi <= 1");
  std::vector<double> eval = eval_frequencies;
  if (eval.empty()) eval = {0.1, 0.31622776601683794, 1.0};

  std::vector<double> ticks(grid);
  for (int i = 0; i < grid; ++i)
    ticks[i] = grid == 1 ? bounds[0]
                         : bounds[0] + (bounds[1] - bounds[0]) * i / (grid - 1);

  TransmissivityResult result;
  result.best_objective = std::numeric_limits<double>::infinity();
  for (double ta : ticks)
    for (double tb : ticks)
      for (double tc : ticks) {
        Scenario sc = scenario;
        sc.transmissivities = {ta, tb, tc};
        double objective = std::numeric_limits<double>::infinity();
        try {
          const PolygonGeometry g = sc.make_geometry();
          const OpticalParams p = sc.make_params(g);
          const GwSource src = sc.make_source();
          const SqueezeConfig* squeeze = sc.squeeze.active() ? &sc.squeeze : nullptr;
          double acc = 0.0;
          for (double f : eval) {
            const TransferSet ts = transfer_set(g, p, src, f, sc.noise.sagnac.rotation_rate);
            const OutputCovariance cov = output_covariance(ts, sc.noise, squeeze);
            const double info = readout_information_dominant(sc, ts, cov);
            const double sigma = sigma_from_information(info);
            if (!(sigma > 0.0) || std::isinf(sigma)) {
              acc = std::numeric_limits<double>::infinity();
              break;
            }
            acc += std::log(sigma);
          }
          objective = acc / static_cast<double>(eval.size());
        } catch (const std::exception&) {
          objective = std::numeric_limits<double>::infinity();
        }
        result.surface.push_back({ta, tb, tc, objective});
        if (objective < result.best_objective) {
          result.best_objective = objective;
          result.best = {ta, tb, tc};
        }
      }
  return result;
}

NgonComparison compare_ngons(const std::vector<int>& n_list, const Scenario& scenario,
                             int threads) {
  NgonComparison cmp;
  cmp.n_values = n_list;
  cmp.frequencies = scenario.sweep.frequencies();
  for (int n : n_list) {
    if (n < 3 || n % 2 == 0)
      throw std::invalid_argument("compare_ngons: two-cyclic selection needs odd n >= 3");
    Scenario sc = scenario;
    sc.geometry_preset = "ngon:" + std::to_string(n);
    sc.radius.reset(); // keep the configured arm length across n
    const auto rows = run_sweep(sc, threads);
    std::vector<double> col(rows.size());
    for (size_t i = 0; i < rows.size(); ++i) col[i] = rows[i].sigma;
    cmp.sigma.push_back(std::move(col));
    cmp.dc_qfi.push_back(rows.front().qfi);
  }
  return cmp;
}

SagnacComparison compare_sagnac(const Scenario& scenario, int threads) {
  SagnacComparison cmp;
  cmp.frequencies = scenario.sweep.frequencies();

  Scenario dfi = scenario;
  dfi.geometry_preset = "triangle-dfi";
  const auto rows_dfi = run_sweep(dfi, threads);

  Scenario sag = scenario;
  sag.geometry_preset = "standard-sagnac";
  sag.open_port_T = scenario.transmissivities.empty() ? 0.1 : scenario.transmissivities[0];
  const auto rows_sag = run_sweep(sag, threads);

  cmp.sigma_dfi.resize(rows_dfi.size());
  cmp.sigma_sagnac.resize(rows_sag.size());
  for (size_t i = 0; i < rows_dfi.size(); ++i) cmp.sigma_dfi[i] = rows_dfi[i].sigma;
  for (size_t i = 0; i < rows_sag.size(); ++i) cmp.sigma_sagnac[i] = rows_sag[i].sigma;
  return cmp;
}

std::string to_csv(const std::vector<SensitivitySample>& samples) {
  std::ostringstream out;
  out << "f_hz,sigma,qfi,fi,f_min,f_max,f_dfs,eta,eta_gain,status\n";
  for (const auto& s : samples) {
    out << fmt(s.f) << ',' << fmt(s.sigma) << ',' << fmt(s.qfi) << ',' << fmt(s.fi) << ','
        << fmt(s.f_min) << ',' << fmt(s.f_max) << ',' << fmt(s.f_dfs) << ',' << fmt(s.eta) << ','
        << fmt(s.eta_gain) << ',' << sanitize(s.status) << '\n';
  }
  return out.str();
}

std::vector<SensitivitySample> parse_csv(const std::string& text) {
  std::vector<SensitivitySample> out;
  std::istringstream in(text);
  std::string line;
  std::getline(in, line); // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    cells.resize(10);
    SensitivitySample s;
    s.f = parse_field(cells[0]);
    s.sigma = parse_field(cells[1]);
    s.qfi = parse_field(cells[2]);
    s.fi = parse_field(cells[3]);
    s.f_min = parse_field(cells[4]);
    s.f_max = parse_field(cells[5]);
    s.f_dfs = parse_field(cells[6]);
    s.eta = parse_field(cells[7]);
    s.eta_gain = parse_field(cells[8]);
    s.status = cells[9];
    out.push_back(std::move(s));
  }
  return out;
}

std::string to_json(const std::vector<SensitivitySample>& samples) {
  std::ostringstream out;
  out << "[\n";
  for (size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    auto num = [](double x) -> std::string {
      if (std::isnan(x)) return "null";
      if (std::isinf(x)) return x > 0 ? "\"inf\"" : "\"-inf\"";
      return fmt(x);
    };
    out << "  {\"f_hz\": " << num(s.f) << ", \"sigma\": " << num(s.sigma)
        << ", \"qfi\": " << num(s.qfi) << ", \"fi\": " << num(s.fi)
        << ", \"f_min\": " << num(s.f_min) << ", \"f_max\": " << num(s.f_max)
        << ", \"f_dfs\": " << num(s.f_dfs) << ", \"eta\": " << num(s.eta)
        << ", \"eta_gain\": " << num(s.eta_gain) << ", \"dfs_dim\": " << s.dfs_dim
        << ", \"dominant_polarization\": [" << num(s.dominant_polarization(0).real()) << ", "
        << num(s.dominant_polarization(0).imag()) << ", " << num(s.dominant_polarization(1).real())
        << ", " << num(s.dominant_polarization(1).imag()) << "]"
        << ", \"status\": \"" << sanitize(s.status) << "\"}" << (i + 1 < samples.size() ? "," : "")
        << "\n";
  }
  out << "]\n";
  return out.str();
}

std::string to_csv(const NoiseBudget& budget) {
  std::ostringstream out;
  out << "f_hz";
  for (const auto& c : budget.columns) out << ',' << c;
  out << '\n';
  for (size_t i = 0; i < budget.frequencies.size(); ++i) {
    out << fmt(budget.frequencies[i]);
    for (const auto& col : budget.sigma) out << ',' << fmt(col[i]);
    out << '\n';
  }
  return out.str();
}

} // namespace dfisim

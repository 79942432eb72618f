#pragma once

#include <array>
#include <string>
#include <vector>

#include "dfisim/fisher.hpp"
#include "dfisim/scenario.hpp"

namespace dfisim {

struct SensitivitySample {
  double f = 0.0;
  double sigma = 0.0;
  double qfi = 0.0;
  double fi = 0.0;
  double f_min = 0.0, f_max = 0.0, f_dfs = 0.0;
  double eta = 0.0;
  double eta_gain = std::numeric_limits<double>::quiet_NaN(); // only when squeezed
  Eigen::Vector2cd dominant_polarization = Eigen::Vector2cd::Zero();
  int dfs_dim = 0;
  std::string status = "ok";
};

std::vector<SensitivitySample> run_sweep(const Scenario& scenario, int threads = 1);

SensitivitySample evaluate_frequency(const Scenario& scenario, const PolygonGeometry& geometry,
                                     const OpticalParams& params, const GwSource& source,
                                     double f);

// Per-source sigma columns: "shot", one per configured source, "combined".
struct NoiseBudget {
  std::vector<double> frequencies;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> sigma; // sigma[col][row]
};
NoiseBudget noise_budget(const Scenario& scenario, int threads = 1);

struct TransmissivityResult {
  std::array<double, 3> best{};
  double best_objective = 0.0;
  std::vector<std::array<double, 4>> surface; // T_A, T_B, T_C, objective
};
// Grid search over mirror transmissivities at fixed intracavity power;
// objective is the mean of log sigma over eval_frequencies.
TransmissivityResult optimize_transmissivity(const Scenario& scenario,
                                             std::array<double, 2> bounds, int grid,
                                             const std::vector<double>& eval_frequencies = {});

struct NgonComparison {
  std::vector<int> n_values;
  std::vector<double> frequencies;
  std::vector<std::vector<double>> sigma;  // sigma[n-index][row]
  std::vector<double> dc_qfi;              // QFI at the lowest frequency per n
};
// Arm length and intracavity power held fixed across n.
NgonComparison compare_ngons(const std::vector<int>& n_list, const Scenario& scenario,
                             int threads = 1);

struct SagnacComparison {
  std::vector<double> frequencies;
  std::vector<double> sigma_dfi;
  std::vector<double> sigma_sagnac;
};
SagnacComparison compare_sagnac(const Scenario& scenario, int threads = 1);

// CSV round-trip for sweep tables. Doubles are emitted with %.17g so the
// parse is exact; infinities serialize as "inf".
std::string to_csv(const std::vector<SensitivitySample>& samples);
std::vector<SensitivitySample> parse_csv(const std::string& text);
std::string to_json(const std::vector<SensitivitySample>& samples);
std::string to_csv(const NoiseBudget& budget);

} // namespace dfisim

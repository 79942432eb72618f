#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "dfisim/sweep.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

struct CommonOpts {
  std::string scenario_path;
  std::string out_path;
  std::string format = "csv";
  int threads = 1;
  double fmin = 0.0, fmax = 0.0;
  int points = 0;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--scenario", o.scenario_path, "Scenario JSON file");
  cmd->add_option("--out", o.out_path, "Output path (stdout when omitted)");
  cmd->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--fmin", o.fmin, "Override sweep start frequency [Hz]");
  cmd->add_option("--fmax", o.fmax, "Override sweep end frequency [Hz]");
  cmd->add_option("--points", o.points, "Override sweep point count");
}

dfisim::Scenario load(const CommonOpts& o) {
  dfisim::Scenario s =
      o.scenario_path.empty() ? dfisim::Scenario{} : dfisim::load_scenario(o.scenario_path);
  if (o.fmin > 0.0) s.sweep.f_min = o.fmin;
  if (o.fmax > 0.0) s.sweep.f_max = o.fmax;
  if (o.points > 0) s.sweep.points = o.points;
  dfisim::validate(s);
  return s;
}

void emit(const CommonOpts& o, const std::string& text) {
  if (o.out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(o.out_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + o.out_path);
  out << text;
}

int failed_rows(const std::vector<dfisim::SensitivitySample>& rows) {
  int bad = 0;
  for (const auto& r : rows) bad += r.status == "ok" ? 0 : 1;
  return bad;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frequency-domain sensitivity analysis for multichannel cavity interferometers"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string n_list_arg = "3,5,9";
  std::array<double, 2> t_bounds{0.0, 0.1};
  int t_grid = 3;

  auto* sweep_cmd = app.add_subcommand("sweep", "Sensitivity curve over frequency");
  add_common(sweep_cmd, opts);
  auto* budget_cmd = app.add_subcommand("budget", "Per-source noise budget");
  add_common(budget_cmd, opts);
  auto* opt_cmd = app.add_subcommand("optimize-t", "Grid search over mirror transmissivities");
  add_common(opt_cmd, opts);
  opt_cmd->add_option("--tmin", t_bounds[0], "Lower transmissivity bound");
  opt_cmd->add_option("--tmax", t_bounds[1], "Upper transmissivity bound");
  opt_cmd->add_option("--grid", t_grid, "Grid points per axis");
  auto* ngon_cmd = app.add_subcommand("ngons", "Compare polygon sizes");
  add_common(ngon_cmd, opts);
  ngon_cmd->add_option("--n", n_list_arg, "Comma-separated odd polygon sizes");
  auto* sagnac_cmd = app.add_subcommand("sagnac", "Compare against the single-port Sagnac");
  add_common(sagnac_cmd, opts);

  CLI11_PARSE(app, argc, argv);

  try {
    const dfisim::Scenario scenario = load(opts);

    if (sweep_cmd->parsed()) {
      const auto rows = dfisim::run_sweep(scenario, opts.threads);
      if (failed_rows(rows) == static_cast<int>(rows.size())) {
        std::cerr << "all rows failed: " << rows.front().status << "\n";
        return kExitNumerical;
      }
      emit(opts, opts.format == "json" ? dfisim::to_json(rows) : dfisim::to_csv(rows));
    } else if (budget_cmd->parsed()) {
      emit(opts, dfisim::to_csv(dfisim::noise_budget(scenario, opts.threads)));
    } else if (opt_cmd->parsed()) {
      const auto res = dfisim::optimize_transmissivity(scenario, t_bounds, t_grid);
      std::ostringstream out;
      out << "t_a,t_b,t_c,mean_log_sigma\n";
      for (const auto& row : res.surface) {
        out << row[0] << ',' << row[1] << ',' << row[2] << ',';
        if (std::isinf(row[3]))
          out << "inf";
        else
          out << row[3];
        out << '\n';
      }
      out << "# best," << res.best[0] << ',' << res.best[1] << ',' << res.best[2] << '\n';
      emit(opts, out.str());
    } else if (ngon_cmd->parsed()) {
      std::vector<int> ns;
      std::stringstream ss(n_list_arg);
      std::string cell;
      while (std::getline(ss, cell, ',')) ns.push_back(std::stoi(cell));
      const auto cmp = dfisim::compare_ngons(ns, scenario, opts.threads);
      std::ostringstream out;
      out << "f_hz";
      for (int n : cmp.n_values) out << ",sigma_n" << n;
      out << '\n';
      for (size_t i = 0; i < cmp.frequencies.size(); ++i) {
        out << cmp.frequencies[i];
        for (const auto& col : cmp.sigma) out << ',' << col[i];
        out << '\n';
      }
      emit(opts, out.str());
    } else if (sagnac_cmd->parsed()) {
      const auto cmp = dfisim::compare_sagnac(scenario, opts.threads);
      std::ostringstream out;
      out << "f_hz,sigma_dfi,sigma_sagnac\n";
      for (size_t i = 0; i < cmp.frequencies.size(); ++i)
        out << cmp.frequencies[i] << ',' << cmp.sigma_dfi[i] << ',' << cmp.sigma_sagnac[i] << '\n';
      emit(opts, out.str());
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "scenario error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return 0;
}

#include "dfisim/scenario.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace dfisim {

using nlohmann::json;

std::vector<double> SweepGrid::frequencies() const {
  std::vector<double> f(points);
  if (points == 1) {
    f[0] = f_min;
    return f;
  }
  for (int i = 0; i < points; ++i) {
    const double w = static_cast<double>(i) / (points - 1);
    f[i] = log_spaced ? f_min * std::pow(f_max / f_min, w)
                      : f_min + w * (f_max - f_min);
  }
  return f;
}

PolygonGeometry Scenario::make_geometry() const {
  PolygonGeometry g;
  int n = 3;
  if (geometry_preset == "triangle-dfi") {
    n = 3;
  } else if (geometry_preset == "standard-sagnac") {
    const double r = radius ? *radius : arm_length / std::sqrt(3.0);
    return standard_sagnac_preset(r, open_port_T);
  } else if (geometry_preset.rfind("ngon:", 0) == 0) {
    n = std::stoi(geometry_preset.substr(5));
  } else {
    throw std::invalid_argument("unknown geometry preset: " + geometry_preset);
  }
  // Radius chosen so the chord length equals arm_length unless given.
  const int step = (n - 1) / 2;
  const double chord = 2.0 * std::sin(std::numbers::pi * step / n);
  const double r = radius ? *radius : arm_length / chord;
  g = build_ngon(n, r);
  if (!transmissivities.empty()) {
    if (transmissivities.size() == 1)
      g.port_transmissivities.assign(n, transmissivities[0]);
    else if (static_cast<int>(transmissivities.size()) == n)
      g.port_transmissivities = transmissivities;
    else
      throw std::invalid_argument("transmissivities must have 1 or n entries");
  }
  int open = 0;
  for (double t : g.port_transmissivities) open += t > 0.0 ? 1 : 0;
  g.k_fields = 2 * open;
  return g;
}

OpticalParams Scenario::make_params(const PolygonGeometry& geometry) const {
  OpticalParams p = OpticalParams::from_wavelength(wavelength);
  p.arm_length = geometry.arm_length;
  p.mirror_mass = mirror_mass;
  p.rpn_enabled = rpn;
  // Scale the drive so the circulating power matches the request.
  p.input_amplitude = 1.0;
  const auto carrier = solve_carrier(geometry, p);
  const double flux = carrier.intracavity_flux(geometry.n_mirrors);
  if (flux <= 0.0) throw std::invalid_argument("scenario has no driven cavity mode");
  p.input_amplitude = std::sqrt(intracavity_power / (kHbar * p.omega0 * flux));
  return p;
}

namespace {

NoiseModel parse_noise_entry(const json& j) {
  NoiseModel m;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "none") {
  } else if (kind == "white") {
    m.displacement.kind = DisplacementNoise::Kind::White;
    if (j.contains("infinite") && j["infinite"].get<bool>())
      m.displacement.infinite = true;
    else
      m.displacement.delta = j.at("delta").get<double>();
  } else if (kind == "thermal") {
    m.displacement.kind = DisplacementNoise::Kind::Thermal;
    m.displacement.coeff = j.value("coeff", 2.7e-30);
    m.displacement.exponent = j.value("exponent", 5.0);
  } else if (kind == "correlated") {
    m.displacement.kind = DisplacementNoise::Kind::Correlated;
    m.displacement.spectrum_csv = j.at("csv").get<std::string>();
  } else if (kind == "sagnac_ac") {
    if (j.contains("infinite") && j["infinite"].get<bool>())
      m.sagnac.infinite = true;
    else
      m.sagnac.variance = j.value("variance", 1.0);
    m.sagnac.rotation_rate = j.value("rotation_rate", kEarthRotationRate);
  } else {
    throw std::invalid_argument("unknown noise kind: " + kind);
  }
  return m;
}

NoiseModel merge_noise(const std::vector<NoiseModel>& sources) {
  NoiseModel merged;
  for (const auto& s : sources) {
    if (s.displacement.kind != DisplacementNoise::Kind::None) {
      if (merged.displacement.kind != DisplacementNoise::Kind::None)
        throw std::invalid_argument("only one displacement-noise component is supported");
      merged.displacement = s.displacement;
    }
    if (s.sagnac.variance > 0.0 || s.sagnac.infinite) merged.sagnac = s.sagnac;
  }
  return merged;
}

Scenario parse_scenario_fields(const json& j) {
  Scenario s;
  if (j.contains("geometry")) {
    const auto& g = j["geometry"];
    s.geometry_preset = g.value("preset", s.geometry_preset);
    s.arm_length = g.value("arm_length_m", s.arm_length);
    if (g.contains("radius_m")) s.radius = g["radius_m"].get<double>();
    s.open_port_T = g.value("open_port_transmissivity", s.open_port_T);
    if (g.contains("transmissivity")) {
      if (g["transmissivity"].is_array())
        s.transmissivities = g["transmissivity"].get<std::vector<double>>();
      else
        s.transmissivities = {g["transmissivity"].get<double>()};
    }
  }
  if (j.contains("optics")) {
    const auto& o = j["optics"];
    s.wavelength = o.value("wavelength_m", s.wavelength);
    s.mirror_mass = o.value("mirror_mass_kg", s.mirror_mass);
    s.intracavity_power = o.value("intracavity_power_w", s.intracavity_power);
    s.rpn = o.value("rpn", s.rpn);
  }
  if (j.contains("source")) {
    s.theta = j["source"].value("theta", s.theta);
    s.phi = j["source"].value("phi", s.phi);
  }
  if (j.contains("noise")) {
    for (const auto& entry : j["noise"]) s.noise_sources.push_back(parse_noise_entry(entry));
    s.noise = merge_noise(s.noise_sources);
    s.noise.rpn = s.rpn;
  }
  if (j.contains("squeeze")) {
    const auto& q = j["squeeze"];
    s.squeeze.r = q.value("r", 0.0);
    const std::string strat = q.value("strategy", std::string("optimal_for_phase_readout"));
    if (strat == "phase")
      s.squeeze.strategy = SqueezeConfig::Strategy::Phase;
    else if (strat == "optimal_for_phase_readout")
      s.squeeze.strategy = SqueezeConfig::Strategy::OptimalForPhaseReadout;
    else if (strat == "optimal_for_optimal_readout")
      s.squeeze.strategy = SqueezeConfig::Strategy::OptimalForOptimalReadout;
    else
      throw std::invalid_argument("unknown squeeze strategy: " + strat);
  }
  if (j.contains("readout")) {
    const std::string r = j["readout"].get<std::string>();
    if (r == "optimal")
      s.readout = Readout::Optimal;
    else if (r == "phase")
      s.readout = Readout::Phase;
    else if (r == "max_signal")
      s.readout = Readout::MaxSignal;
    else
      throw std::invalid_argument("unknown readout: " + r);
  }
  if (j.contains("sweep")) {
    const auto& w = j["sweep"];
    s.sweep.f_min = w.value("fmin", s.sweep.f_min);
    s.sweep.f_max = w.value("fmax", s.sweep.f_max);
    s.sweep.points = w.value("points", s.sweep.points);
    s.sweep.log_spaced = w.value("log", true);
  }
  s.noise.rpn = s.rpn;
  validate(s);
  const int n = s.make_geometry().n_mirrors;
  auto resolve = [&](NoiseModel& m) {
    if (m.displacement.kind == DisplacementNoise::Kind::Correlated && !m.displacement.spectrum)
      m.displacement.spectrum = CorrelatedSpectrum::from_csv(m.displacement.spectrum_csv, n);
  };
  resolve(s.noise);
  for (auto& src : s.noise_sources) resolve(src);
  return s;
}

} // namespace

Scenario parse_scenario_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("scenario is not valid JSON: ") + e.what());
  }
  try {
    return parse_scenario_fields(j);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed scenario field: ") + e.what());
  }
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open scenario file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario_json(ss.str());
}

void validate(const Scenario& s) {
  if (!(s.sweep.f_min > 0.0)) throw std::invalid_argument("sweep fmin must be positive");
  if (!(s.sweep.f_max >= s.sweep.f_min)) throw std::invalid_argument("sweep fmax < fmin");
  if (s.sweep.points < 2) throw std::invalid_argument("sweep needs at least 2 points");
  if (s.wavelength <= 0.0) throw std::invalid_argument("wavelength must be positive");
  if (s.mirror_mass <= 0.0 && s.rpn) throw std::invalid_argument("mirror mass must be positive");
  if (s.intracavity_power <= 0.0) throw std::invalid_argument("intracavity power must be positive");
  if (s.squeeze.r < 0.0) throw std::invalid_argument("squeeze r must be >= 0");
  for (double t : s.transmissivities)
    if (t < 0.0 || t > 1.0) throw std::invalid_argument("transmissivity out of [0, 1]");
  s.make_geometry(); // preset/transmissivity consistency
}

} // namespace dfisim

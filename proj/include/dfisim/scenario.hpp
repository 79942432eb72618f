#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dfisim/geometry.hpp"
#include "dfisim/noise.hpp"
#include "dfisim/optics.hpp"
#include "dfisim/squeeze.hpp"

namespace dfisim {

enum class Readout { Optimal, Phase, MaxSignal };

struct SweepGrid {
  double f_min = 1e-2;
  double f_max = 1e5;
  int points = 200;
  bool log_spaced = true;

  std::vector<double> frequencies() const;
};

struct Scenario {
  std::string geometry_preset = "triangle-dfi"; // triangle-dfi | standard-sagnac | ngon:<n>
  double arm_length = 4000.0;                   // m
  std::optional<double> radius;                 // overrides arm-length-derived radius
  std::vector<double> transmissivities;         // per mirror; single value broadcast
  double open_port_T = 0.1;                     // standard-sagnac preset

  double wavelength = 1.064e-6;   // m
  double mirror_mass = 5.0;       // kg
  double intracavity_power = 3.5e6; // W, total circulating both directions
  bool rpn = false;

  double theta = 1.5707963267948966; // GW source angles
  double phi = 0.0;

  NoiseModel noise;
  std::vector<NoiseModel> noise_sources; // isolated components for budgets
  SqueezeConfig squeeze;
  Readout readout = Readout::Optimal;
  SweepGrid sweep;

  PolygonGeometry make_geometry() const;
  OpticalParams make_params(const PolygonGeometry& geometry) const;
  GwSource make_source() const { return make_gw_source(theta, phi); }
};

// Throws std::invalid_argument with a description on any malformed field.
Scenario load_scenario(const std::string& path);
Scenario parse_scenario_json(const std::string& text);
void validate(const Scenario& s);

} // namespace dfisim

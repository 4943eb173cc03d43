#pragma once

#include "puo/core.hpp"
#include "puo/embedding.hpp"

#include <json.hpp>

#include <optional>
#include <string>

namespace puo::app {

using Json = nlohmann::ordered_json;

enum class OutputFormat { csv, json };

/// Everything a run depends on. Serialized into every output.
struct RunConfig {
  double omega1 = 1.0;
  double omega2 = 2.0;
  double lambda = 0.0;
  /// Initial state in `chart` coordinates: (q, q', q'', q''') or (x1, x2, p1, p2).
  Chart chart = Chart::ostrogradsky;
  Vec4 initial = Vec4(0.0, 0.0, 0.5, -0.5);
  double t_end = 200.0;
  double tol = 1e-10;
  double sample_rate = 10.0;
  std::optional<double> escape_radius;
  unsigned long long seed = kDefaultSeed;
  std::string out;
  /// Unset: csv for simulate, json elsewhere.
  std::optional<OutputFormat> format;

  // scan
  double lambda_min = 0.0;
  double lambda_max = 10.0;
  int grid_points = 32;
  int bisection_steps = 40;

  // embed
  std::string family;
  std::string branch = "+";
  std::optional<double> a_x;
  std::optional<double> a_y;
  std::optional<double> b_x;
  std::optional<double> b_y;
  std::optional<double> g;
};

/// Usage-level problems: bad values, missing or conflicting options.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

const char* to_string(OutputFormat f);

Json to_json(const RunConfig& c);
/// Missing keys keep their defaults; throws ConfigError on wrong types or unknown enums.
RunConfig from_json(const Json& j);

/// Range checks shared by every command (tol, t_end, sample_rate, escape radius).
void validate(const RunConfig& c);

JetState initial_jet(const RunConfig& c, const PUParams& params);

/// Free parameters for the requested family. Throws ConfigError naming a missing one.
embedding::FreeParameters free_parameters(const RunConfig& c, embedding::Family family);

}  // namespace puo::app

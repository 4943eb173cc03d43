#include "puo/app/config.hpp"

#include <cmath>

namespace puo::app {

const char* to_string(OutputFormat f) { return f == OutputFormat::csv ? "csv" : "json"; }

namespace {

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

template <typename T>
void read(const Json& j, const char* key, T& target) {
  if (!j.contains(key) || j.at(key).is_null()) return;
  try {
    target = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config field '") + key + "': " + e.what());
  }
}

void read(const Json& j, const char* key, std::optional<double>& target) {
  if (!j.contains(key)) return;
  if (j.at(key).is_null()) {
    target.reset();
    return;
  }
  double v = 0.0;
  read(j, key, v);
  target = v;
}

}  // namespace

Json to_json(const RunConfig& c) {
  Json j;
  j["omega1"] = c.omega1;
  j["omega2"] = c.omega2;
  j["lambda"] = c.lambda;
  j["chart"] = c.chart == Chart::jet ? "jet" : "ostro";
  j["initial"] = {c.initial[0], c.initial[1], c.initial[2], c.initial[3]};
  j["t_end"] = c.t_end;
  j["tol"] = c.tol;
  j["sample_rate"] = c.sample_rate;
  j["escape_radius"] = optional_number(c.escape_radius);
  j["seed"] = c.seed;
  j["out"] = c.out;
  j["format"] = c.format ? Json(to_string(*c.format)) : Json(nullptr);
  j["lambda_min"] = c.lambda_min;
  j["lambda_max"] = c.lambda_max;
  j["grid_points"] = c.grid_points;
  j["bisection_steps"] = c.bisection_steps;
  j["family"] = c.family;
  j["branch"] = c.branch;
  j["a_x"] = optional_number(c.a_x);
  j["a_y"] = optional_number(c.a_y);
  j["b_x"] = optional_number(c.b_x);
  j["b_y"] = optional_number(c.b_y);
  j["g"] = optional_number(c.g);
  return j;
}

RunConfig from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig c;
  read(j, "omega1", c.omega1);
  read(j, "omega2", c.omega2);
  read(j, "lambda", c.lambda);
  std::string chart = c.chart == Chart::jet ? "jet" : "ostro";
  read(j, "chart", chart);
  if (chart == "jet") c.chart = Chart::jet;
  else if (chart == "ostro" || chart == "ostrogradsky") c.chart = Chart::ostrogradsky;
  else throw ConfigError("chart must be jet or ostro");
  if (j.contains("initial")) {
    std::vector<double> v;
    read(j, "initial", v);
    if (v.size() != 4) throw ConfigError("initial must hold 4 numbers");
    c.initial = Vec4(v[0], v[1], v[2], v[3]);
  }
  read(j, "t_end", c.t_end);
  read(j, "tol", c.tol);
  read(j, "sample_rate", c.sample_rate);
  read(j, "escape_radius", c.escape_radius);
  read(j, "seed", c.seed);
  read(j, "out", c.out);
  std::string format;
  read(j, "format", format);
  if (format == "csv") c.format = OutputFormat::csv;
  else if (format == "json") c.format = OutputFormat::json;
  else if (!format.empty()) throw ConfigError("format must be csv or json");
  read(j, "lambda_min", c.lambda_min);
  read(j, "lambda_max", c.lambda_max);
  read(j, "grid_points", c.grid_points);
  read(j, "bisection_steps", c.bisection_steps);
  read(j, "family", c.family);
  read(j, "branch", c.branch);
  read(j, "a_x", c.a_x);
  read(j, "a_y", c.a_y);
  read(j, "b_x", c.b_x);
  read(j, "b_y", c.b_y);
  read(j, "g", c.g);
  return c;
}

void validate(const RunConfig& c) {
  auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(c.omega1) || !finite(c.omega2)) throw ConfigError("frequencies must be finite");
  if (!finite(c.lambda) || c.lambda < 0.0) throw ConfigError("lambda must be a non-negative number");
  if (!c.initial.allFinite()) throw ConfigError("initial state must be finite");
  if (!(c.t_end > 0.0) || !finite(c.t_end)) throw ConfigError("t-end must be positive");
  if (!(c.tol >= 1e-13 && c.tol <= 1e-3)) throw ConfigError("tol must lie in [1e-13, 1e-3]");
  if (!(c.sample_rate > 0.0) || !finite(c.sample_rate)) throw ConfigError("sample-rate must be positive");
  if (c.escape_radius && !(*c.escape_radius > 0.0)) throw ConfigError("escape-radius must be positive");
  if (!finite(c.lambda_min) || !finite(c.lambda_max) || c.lambda_min < 0.0 || c.lambda_max < c.lambda_min) {
    throw ConfigError("lambda range must satisfy 0 <= lambda-min <= lambda-max");
  }
  if (c.grid_points < 2) throw ConfigError("grid-points must be at least 2");
  if (c.bisection_steps < 0) throw ConfigError("bisection-steps must be non-negative");
}

JetState initial_jet(const RunConfig& c, const PUParams& params) {
  if (c.chart == Chart::jet) return JetState::from(c.initial);
  return ostro_to_jet(params, OstroState::from(c.initial));
}

embedding::FreeParameters free_parameters(const RunConfig& c, embedding::Family family) {
  using embedding::Family;
  auto need = [](const std::optional<double>& v, const char* name) {
    if (!v) throw ConfigError(std::string("missing --") + name);
    if (!std::isfinite(*v)) throw ConfigError(std::string("--") + name + " must be finite");
    return *v;
  };
  embedding::FreeParameters p;
  p.a_x = need(c.a_x, "ax");
  p.g = need(c.g, "g");
  switch (family) {
    case Family::Ta1:
    case Family::Ta2: p.a_y = need(c.a_y, "ay"); break;
    case Family::Tb1: p.b_x = need(c.b_x, "bx"); break;
    case Family::Tb2: p.b_y = need(c.b_y, "by"); break;
  }
  return p;
}

}  // namespace puo::app

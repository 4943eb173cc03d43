#include "puo/app/report.hpp"

#include <cstdio>

namespace puo::app {

Json matrix_json(const Mat4& m) {
  Json rows = Json::array();
  for (int i = 0; i < 4; ++i) rows.push_back({m(i, 0), m(i, 1), m(i, 2), m(i, 3)});
  return rows;
}

Json vector_json(const Vec4& v) { return {v[0], v[1], v[2], v[3]}; }

namespace {

Json params_json(const PUParams& p) {
  return {{"omega1", p.omega1}, {"omega2", p.omega2}, {"alpha", p.alpha}, {"beta", p.beta}};
}

Json eom_json(const embedding::EomCheck& c) {
  Json coeffs = Json::array();
  for (int i = 0; i < 5; ++i) coeffs.push_back(c.coeffs[i]);
  return {{"class", embedding::to_string(c.kind)},
          {"coefficients", coeffs},
          {"factor", c.factor},
          {"proportional_residual", c.proportional_residual},
          {"zero_residual", c.zero_residual},
          {"linearity_residual", c.linearity_residual}};
}

Json positivity_json(const embedding::Positivity& p) {
  return {{"positive_definite", p.positive_definite}, {"eigenvalues", vector_json(p.eigenvalues)}};
}

Json blend_json(const std::optional<embedding::BlendCoefficients>& b) {
  if (!b) return nullptr;
  return {{"c1", b->c1}, {"c2", b->c2}};
}

}  // namespace

Json map_json(const embedding::TransformMap& m) {
  return {{"family", embedding::to_string(m.family)},
          {"branch", embedding::to_string(m.branch)},
          {"model", {{"a_x", m.model.a_x}, {"a_y", m.model.a_y}, {"b_x", m.model.b_x},
                     {"b_y", m.model.b_y}, {"g", m.model.g}}},
          {"mu0", m.mu0},
          {"mu2", m.mu2},
          {"nu0", m.nu0},
          {"nu2", m.nu2},
          {"jacobian", matrix_json(m.jac)},
          {"singular", m.singular},
          {"degenerate", m.degenerate},
          {"note", m.note}};
}

Json verification_json(const embedding::MapVerification& v) {
  return {{"phi1", eom_json(v.phi1)},
          {"phi2", eom_json(v.phi2)},
          {"meets_contract", v.meets_contract},
          {"contract_residual", v.contract_residual},
          {"rank_deficient", v.rank_deficient},
          {"note", v.note}};
}

Json reconciliation_json(const embedding::Reconciliation& r) {
  Json j;
  j["family"] = embedding::to_string(r.family);
  j["branch"] = embedding::to_string(r.branch);
  j["free"] = {{"a_x", r.free.a_x}, {"a_y", r.free.a_y}, {"b_x", r.free.b_x},
               {"b_y", r.free.b_y}, {"g", r.free.g}};
  j["params"] = params_json(r.params);
  j["printed"] = r.printed ? map_json(*r.printed) : Json(nullptr);
  j["printed_error"] = r.printed_error;
  j["printed_check"] = r.printed_check ? verification_json(*r.printed_check) : Json(nullptr);
  j["derived"] = r.derived ? map_json(*r.derived) : Json(nullptr);
  j["derived_error"] = r.derived_error;
  j["derived_check"] = r.derived_check ? verification_json(*r.derived_check) : Json(nullptr);
  Json deltas = Json::array();
  for (const auto& d : r.deltas) {
    deltas.push_back({{"field", d.name}, {"printed", d.printed}, {"derived", d.derived}, {"delta", d.delta}});
  }
  j["deltas"] = deltas;
  j["printed_discrepant"] = r.printed_discrepant;
  if (r.pushforward) {
    j["pushforward"] = {{"tensor", matrix_json(r.pushforward->tensor.matrix())},
                        {"position_velocity", r.pushforward->position_velocity},
                        {"position_velocity_closed_form", r.pushforward->position_velocity_closed_form},
                        {"singular", false}};
  } else {
    j["pushforward"] = {{"singular", true}, {"error", r.pushforward_error}};
  }
  if (r.pullback) {
    const auto& p = *r.pullback;
    Json pb;
    pb["hessian"] = matrix_json(p.hamiltonian.coeffs());
    pb["fit"] = {{"c1", p.fit.c1}, {"c2", p.fit.c2}, {"relative_residual", p.fit.relative_residual}};
    pb["coefficients"] = blend_json(p.coeffs);
    pb["fitted_charge_normalized"] = blend_json(p.fitted_charge_normalized);
    pb["table_prediction"] = blend_json(p.table_prediction);
    if (p.fitted_charge_normalized && p.table_prediction) {
      pb["table_delta"] = {{"c1", p.fitted_charge_normalized->c1 - p.table_prediction->c1},
                           {"c2", p.fitted_charge_normalized->c2 - p.table_prediction->c2}};
    } else {
      pb["table_delta"] = nullptr;
    }
    pb["note"] = p.note;
    j["pullback"] = pb;
  } else {
    j["pullback"] = {{"error", r.pullback_error}};
  }
  j["first_order_positivity"] =
      r.first_order_positivity ? positivity_json(*r.first_order_positivity) : Json(nullptr);
  j["pulled_back_positivity"] =
      r.pulled_back_positivity ? positivity_json(*r.pulled_back_positivity) : Json(nullptr);
  return j;
}

Json trajectory_summary(const dynamics::Trajectory& tr) {
  const auto& m = tr.meta;
  return {{"bounded", !tr.escaped},
          {"escape_time", tr.escape_time ? Json(*tr.escape_time) : Json(nullptr)},
          {"max_norm", tr.max_norm},
          {"samples", tr.times.size()},
          {"t_final", tr.times.back()},
          {"params", params_json(m.params)},
          {"potential", m.potential},
          {"lambda", m.lambda},
          {"interaction_sign", m.interaction_sign},
          {"chart", to_string(m.chart)},
          {"tol", m.tol},
          {"sample_rate", m.sample_rate},
          {"escape_radius", m.escape_radius},
          {"accepted_steps", m.accepted_steps},
          {"rejected_steps", m.rejected_steps},
          {"h1_drift", m.h1_drift},
          {"h2_drift", m.h2_drift},
          {"hint_drift", m.hint_drift},
          {"h1_relative_drift", m.h1_relative_drift},
          {"h2_relative_drift", m.h2_relative_drift},
          {"drift_tolerance", m.drift_tolerance}};
}

Json trajectory_json(const dynamics::Trajectory& tr) {
  Json samples = Json::array();
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    samples.push_back({{"t", tr.times[i]},
                       {"z", vector_json(tr.states[i].vec())},
                       {"H1", tr.h1_series[i]},
                       {"H2", tr.h2_series[i]},
                       {"Hint", tr.hint_series[i]}});
  }
  return {{"summary", trajectory_summary(tr)}, {"samples", samples}};
}

Json threshold_json(const dynamics::ThresholdReport& r) {
  Json grid = Json::array();
  for (const auto& g : r.grid) {
    grid.push_back({{"lambda", g.lambda},
                    {"bounded", g.verdict.bounded},
                    {"escape_time", g.verdict.escape_time ? Json(*g.verdict.escape_time) : Json(nullptr)},
                    {"max_norm", g.verdict.max_norm}});
  }
  return {{"lambda_star", r.lambda_star},
          {"lambda_bounded", r.lambda_bounded},
          {"lambda_unbounded", r.lambda_unbounded},
          {"non_monotone", r.non_monotone},
          {"t_end", r.t_end},
          {"escape_radius", r.escape_radius},
          {"lambda_min", r.lambda_min},
          {"lambda_max", r.lambda_max},
          {"grid", grid}};
}

Json envelope(const std::string& command, const RunConfig& config) {
  return {{"version", kVersion}, {"command", command}, {"config", to_json(config)}};
}

void write_csv(std::ostream& os, const dynamics::Trajectory& tr, const RunConfig& config) {
  const Json head = {{"version", kVersion}, {"config", to_json(config)}};
  os << "# " << head.dump() << '\n' << kCsvHeader << '\n';
  const Mat4 to_ostro = jet_to_ostro_matrix(tr.meta.params);
  char buf[32];
  auto put = [&](double v, char sep) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << buf << sep;
  };
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    const Vec4 z = tr.states[i].vec();
    const Vec4 s = to_ostro * z;
    put(tr.times[i], ',');
    for (int k = 0; k < 4; ++k) put(z[k], ',');
    for (int k = 0; k < 4; ++k) put(s[k], ',');
    put(tr.h1_series[i], ',');
    put(tr.h2_series[i], ',');
    put(tr.hint_series[i], '\n');
  }
}

}  // namespace puo::app

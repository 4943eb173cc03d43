#include "puo/app/commands.hpp"

#include "puo/app/report.hpp"
#include "puo/dynamics.hpp"
#include "puo/embedding.hpp"
#include "puo/symmetry.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace puo::app {

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DegenerateFrequencies: return kExitInvariantFailure;
    case ErrorKind::InvalidArgument:
    case ErrorKind::PreconditionViolated: return kExitUsage;
    case ErrorKind::AllBounded:
    case ErrorKind::AllUnbounded: return kExitScanDegenerate;
    default: return kExitNumerical;
  }
}

namespace {

Json error_json(const Error& e) { return {{"kind", to_string(e.kind())}, {"message", e.what()}}; }

class Suite {
 public:
  void check(const std::string& name, double value, double tolerance, const std::string& detail = {}) {
    const bool ok = std::isfinite(value) && value <= tolerance;
    checks_.push_back({{"name", name}, {"passed", ok}, {"value", value}, {"tolerance", tolerance},
                       {"detail", detail}});
    if (!ok && first_failure_.empty()) first_failure_ = name;
  }
  void require(const std::string& name, bool ok, const std::string& detail = {}) {
    checks_.push_back({{"name", name}, {"passed", ok}, {"value", nullptr}, {"tolerance", nullptr},
                       {"detail", detail}});
    if (!ok && first_failure_.empty()) first_failure_ = name;
  }
  void fail(const std::string& name, const Error& e) { require(name, false, e.what()); }

  bool passed() const { return first_failure_.empty(); }
  const std::string& first_failure() const { return first_failure_; }
  const Json& checks() const { return checks_; }

 private:
  Json checks_ = Json::array();
  std::string first_failure_;
};

double rel_maxabs(const Mat4& diff, const Mat4& ref) {
  return diff.cwiseAbs().maxCoeff() / std::max(1.0, ref.cwiseAbs().maxCoeff());
}

std::string fmt(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

}  // namespace

CommandResult cmd_verify(const RunConfig& config) {
  CommandResult result;
  result.report = envelope("verify", config);
  Suite suite;
  PUParams p;
  try {
    p = make_params(config.omega1, config.omega2);
  } catch (const Error& e) {
    suite.fail(to_string(e.kind()), e);
    result.report["passed"] = false;
    result.report["first_failure"] = suite.first_failure();
    result.report["checks"] = suite.checks();
    result.exit_code = exit_code_for(e.kind());
    return result;
  }
  const Mat4 a = flow_matrix(p);
  const QuadraticObservable f1 = h1(p), f2 = h2(p);

  suite.check("hamilton_identity", rel_maxabs(j1(p).matrix() * f1.coeffs() - a, a), EPS_ALGEBRA, "J1 S1 = A");
  try {
    suite.check("bihamilton_identity", rel_maxabs(j2(p).matrix() * f2.coeffs() - a, a), EPS_ALGEBRA, "J2 S2 = A");
  } catch (const Error& e) {
    suite.fail("bihamilton_identity", e);
  }
  {
    int consistent = 0;
    for (const auto& s : symmetry::sign_search(p)) consistent += s.residual <= EPS_ALGEBRA * std::max(1.0, p.beta);
    suite.require("sign_search_unique", consistent == 1, fmt(consistent) + " consistent sign pairs");
  }
  suite.check("chart_roundtrip",
              (ostro_to_jet_matrix(p) * jet_to_ostro_matrix(p) - Mat4::Identity()).cwiseAbs().maxCoeff(),
              EPS_ALGEBRA);
  suite.check("j1_canonical_in_ostrogradsky",
              (to_ostrogradsky(p, j1(p)).matrix() - j1(p, Chart::ostrogradsky).matrix()).cwiseAbs().maxCoeff(),
              EPS_ALGEBRA);

  const auto basis = symmetry::commutant_basis(a);
  suite.require("commutant_dimension", basis.dimension == 4, "dimension " + fmt(basis.dimension));
  const auto gens = symmetry::printed_generators(p);
  const double gscale = std::max(1.0, p.beta * p.beta);
  suite.check("symmetries_abelian", gens.max_pairwise_commutator() / gscale, EPS_ALGEBRA);
  double span = 0.0;
  for (const auto& x : gens.generators) span = std::max(span, basis.projection_residual(x.xi));
  suite.check("generators_in_commutant", span, EPS_ALGEBRA);

  const double hscale = std::max(1.0, linalg::scale_of(f1.coeffs()));
  const auto act = [&](int i) { return symmetry::apply_symmetry(gens.generators[i], f1).coeffs(); };
  suite.check("x1_h1_zero", linalg::scale_of(act(0)) / hscale, EPS_ALGEBRA);
  suite.check("x2_h1_equals_h1", linalg::scale_of(act(1) - f1.coeffs()) / hscale, EPS_ALGEBRA);
  suite.check("x4_h1_zero", linalg::scale_of(act(3)) / hscale, EPS_ALGEBRA);
  {
    const auto fit = symmetry::fit_proportional(QuadraticObservable(act(2)), f2);
    suite.check("x3_h1_charge", std::max(std::abs(fit.factor + p.beta) / p.beta, fit.relative_residual), 1e-10,
                "factor " + fmt(fit.factor) + " vs -beta");
  }
  try {
    const auto solved = symmetry::solve_bihamiltonian(p, f2);
    suite.check("bihamiltonian_solve",
                rel_maxabs(solved.matrix() - j2_with_sign(p, kJ2PositionVelocitySign).matrix(), solved.matrix()),
                EPS_ALGEBRA);
    const auto blend = blend_j(p, -1.0, 2.0);
    suite.check("blend_tensor_derived_form", blend.derived_form_residual, EPS_ALGEBRA);
    suite.check("blend_tensor_charge_normalized", blend.charge_normalized_residual, EPS_ALGEBRA);
  } catch (const Error& e) {
    suite.fail("bihamiltonian_solve", e);
  }

  // Embedding contracts on seeded draws.
  {
    using namespace embedding;
    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> mag(0.5, 2.0), gd(-0.5, 0.5), bxd(0.3, 3.0);
    std::bernoulli_distribution coin(0.5);
    auto signed_mag = [&] { return (coin(rng) ? -1.0 : 1.0) * mag(rng); };
    int solved = 0, skipped = 0;
    double worst = 0.0;
    bool flags_ok = true;
    double table_delta = 0.0;
    std::string flag_detail;
    for (Family fam : {Family::Ta1, Family::Ta2, Family::Tb1, Family::Tb2}) {
      for (Branch br : {Branch::plus, Branch::minus}) {
        FreeParameters free{signed_mag(), signed_mag(), bxd(rng), signed_mag(), gd(rng)};
        if (fam == Family::Ta2) free.a_y = std::copysign(free.a_y, free.a_x);
        try {
          const TransformMap map = solve_family(fam, br, free, p);
          const MapVerification v = verify_map(map);
          ++solved;
          worst = std::max(worst, v.meets_contract ? v.contract_residual : 1.0);
          const bool expect_singular = fam == Family::Ta1 || fam == Family::Tb2;
          if (map.singular != expect_singular) {
            flags_ok = false;
            flag_detail += std::string(to_string(fam)) + to_string(br) + " ";
          }
          if (fam == Family::Tb1) {
            const Pullback pb = pullback_hamiltonian(map);
            table_delta = std::max({table_delta,
                                    std::abs(pb.fitted_charge_normalized->c1 - pb.table_prediction->c1),
                                    std::abs(pb.fitted_charge_normalized->c2 - pb.table_prediction->c2)});
          }
        } catch (const Error& e) {
          if (e.kind() == ErrorKind::ComplexBranch || e.kind() == ErrorKind::PreconditionViolated) {
            ++skipped;
          } else {
            suite.fail(std::string("embedding_") + to_string(fam), e);
          }
        }
      }
    }
    suite.check("embedding_contracts", worst, 1e-12,
                fmt(solved) + " maps solved, " + fmt(skipped) + " draws outside the family domain");
    suite.require("embedding_singular_flags", flags_ok, flag_detail.empty() ? "Ta1, Tb2 singular; Ta2, Tb1 invertible" : flag_detail);
    suite.check("tb1_blend_table", table_delta, 1e-9);
  }

  // Constant Poisson tensors preserved by the free and interacting flows.
  {
    const auto free_space = symmetry::invariant_tensor_space(free_vector_field(p));
    suite.require("free_tensor_space", free_space.size() == 2, "dimension " + fmt(free_space.size()));
    const double lambda = config.lambda > 0.0 ? config.lambda : 0.1;
    const auto field = interacting_vector_field(p, Potential::quartic(lambda));
    const auto samples = symmetry::sample_points(config.seed, 12);
    try {
      const auto space = symmetry::invariant_tensor_space(field, samples);
      result.report["interacting_tensor_dimension"] = space.size();
      std::vector<Mat4> mats;
      for (const auto& t : space) mats.push_back(t.matrix());
      suite.require("interacting_tensor_collapse", space.size() == 1, "dimension " + fmt(space.size()));
      if (space.size() == 1) {
        suite.check("interacting_tensor_is_j1", linalg::projection_residual(mats, j1(p).matrix()), 1e-10);
        const double r2 = linalg::projection_residual(mats, j2(p).matrix());
        suite.require("interacting_excludes_j2", r2 > 1e-3, "J2 residual " + fmt(r2));
      }
    } catch (const InsufficientSamplesError& e) {
      result.report["interacting_tensor_dimension"] = e.dimension();
      suite.fail("interacting_tensor_collapse", e);
    }
  }

  // Normal modes.
  {
    double energy = 0.0, roundtrip = 0.0;
    for (const auto& z : symmetry::sample_points(config.seed + 1, 50)) {
      const auto m = dynamics::mode_decompose(p, z);
      const double scale = std::max(1.0, 0.5 * linalg::scale_of(f1.coeffs()) * z.vec().squaredNorm());
      energy = std::max(energy, std::abs(dynamics::mode_energy(p, m).total - f1(z)) / scale);
      roundtrip = std::max(roundtrip, (dynamics::reconstruct(p, m).vec() - z.vec()).norm() /
                                          std::max(1.0, z.vec().norm()));
    }
    suite.check("mode_energy_identity", energy, 1e-10);
    suite.check("mode_roundtrip", roundtrip, 1e-12);
  }

  result.report["passed"] = suite.passed();
  result.report["first_failure"] = suite.passed() ? Json(nullptr) : Json(suite.first_failure());
  result.report["checks"] = suite.checks();
  result.exit_code = suite.passed() ? kExitOk : kExitInvariantFailure;
  return result;
}

CommandResult cmd_modes(const RunConfig& config) {
  CommandResult result;
  result.report = envelope("modes", config);
  const PUParams p = make_params(config.omega1, config.omega2);
  const JetState z = initial_jet(config, p);
  const auto m = dynamics::mode_decompose(p, z);
  const auto e = dynamics::mode_energy(p, m);
  const double s1 = p.omega1 * p.omega1, s2 = p.omega2 * p.omega2;
  result.report["state"] = vector_json(z.vec());
  result.report["a1"] = {{"re", m.a1.real()}, {"im", m.a1.imag()}};
  result.report["a2"] = {{"re", m.a2.real()}, {"im", m.a2.imag()}};
  result.report["R1"] = s1 * (s1 - s2);
  result.report["R2"] = s2 * (s1 - s2);
  result.report["e1"] = e.e1;
  result.report["e2"] = e.e2;
  result.report["total"] = e.total;
  result.report["H1"] = h1(p)(z);
  result.report["H2"] = h2(p)(z);
  result.report["reconstruction_error"] = (dynamics::reconstruct(p, m).vec() - z.vec()).norm();
  return result;
}

CommandResult cmd_embed(const RunConfig& config) {
  using namespace embedding;
  CommandResult result;
  result.report = envelope("embed", config);
  if (config.family.empty()) throw ConfigError("missing --family (Ta1, Ta2, Tb1, Tb2)");
  Family family;
  Branch branch;
  try {
    family = family_from_string(config.family);
    branch = branch_from_string(config.branch);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  const FreeParameters free = free_parameters(config, family);
  const PUParams p = make_params(config.omega1, config.omega2);
  const Reconciliation r = reconcile(family, branch, free, p);
  result.report["reconciliation"] = reconciliation_json(r);
  try {
    (void)solve_family(family, branch, free, p);
  } catch (const Error& e) {
    result.report["error"] = error_json(e);
    const bool domain = e.kind() == ErrorKind::PreconditionViolated || e.kind() == ErrorKind::ComplexBranch ||
                        e.kind() == ErrorKind::NoSolution;
    result.exit_code = domain ? kExitUsage : kExitNumerical;
  }
  return result;
}

CommandResult cmd_scan(const RunConfig& config) {
  CommandResult result;
  result.report = envelope("scan", config);
  const PUParams p = make_params(config.omega1, config.omega2);
  const JetState z0 = initial_jet(config, p);
  dynamics::ThresholdOptions opt;
  opt.grid_points = config.grid_points;
  opt.bisection_steps = config.bisection_steps;
  opt.tol = config.tol;
  opt.escape_radius = config.escape_radius;
  try {
    result.report["threshold"] =
        threshold_json(dynamics::threshold_search(p, z0, config.t_end, config.lambda_min, config.lambda_max, opt));
  } catch (const Error& e) {
    result.report["threshold"] = nullptr;
    result.report["error"] = error_json(e);
    result.exit_code = exit_code_for(e.kind());
  }
  return result;
}

CommandResult cmd_simulate(const RunConfig& config, std::ostream& data) {
  CommandResult result;
  result.report = envelope("simulate", config);
  const PUParams p = make_params(config.omega1, config.omega2);
  const JetState z0 = initial_jet(config, p);
  const VectorField field =
      config.lambda > 0.0 ? interacting_vector_field(p, Potential::quartic(config.lambda)) : free_vector_field(p);
  dynamics::RunOptions opt;
  opt.tol = config.tol;
  opt.sample_rate = config.sample_rate;
  opt.escape_radius = config.escape_radius;
  const auto tr = dynamics::integrate(p, field, z0, config.t_end, opt);
  if (config.format.value_or(OutputFormat::csv) == OutputFormat::csv) {
    write_csv(data, tr, config);
  } else {
    Json doc = envelope("simulate", config);
    doc["trajectory"] = trajectory_json(tr);
    data << doc.dump(2) << '\n';
  }
  result.report["summary"] = trajectory_summary(tr);
  return result;
}

namespace {

struct CliState {
  std::string config_path;
  std::optional<double> omega1, omega2, lambda, t_end, tol, sample_rate, escape_radius;
  std::optional<unsigned long long> seed;
  std::optional<std::string> out, format, chart;
  std::optional<double> q0, qd0, qdd0, qddd0, x1, x2, p1, p2;
  std::optional<double> lambda_min, lambda_max;
  std::optional<int> grid_points, bisection_steps;
  std::optional<std::string> family, branch;
  std::optional<double> ax, ay, bx, by, g;
};

void add_common(CLI::App* sub, CliState& s) {
  sub->add_option("--config", s.config_path, "JSON run config; flags override its fields");
  sub->add_option("--omega1", s.omega1, "first frequency");
  sub->add_option("--omega2", s.omega2, "second frequency");
  sub->add_option("--lambda", s.lambda, "quartic coupling");
  sub->add_option("--chart", s.chart, "chart of the initial state")->check(CLI::IsMember({"jet", "ostro"}));
  sub->add_option("--q0", s.q0);
  sub->add_option("--qd0", s.qd0);
  sub->add_option("--qdd0", s.qdd0);
  sub->add_option("--qddd0", s.qddd0);
  sub->add_option("--x1", s.x1);
  sub->add_option("--x2", s.x2);
  sub->add_option("--p1", s.p1);
  sub->add_option("--p2", s.p2);
  sub->add_option("--t-end", s.t_end);
  sub->add_option("--tol", s.tol);
  sub->add_option("--sample-rate", s.sample_rate);
  sub->add_option("--escape-radius", s.escape_radius);
  sub->add_option("--seed", s.seed);
  sub->add_option("--out", s.out, "output path (stdout when absent)");
  sub->add_option("--format", s.format)->check(CLI::IsMember({"csv", "json"}));
}

RunConfig build_config(const CliState& s) {
  RunConfig c;
  if (!s.config_path.empty()) {
    std::ifstream in(s.config_path);
    if (!in) throw ConfigError("cannot read config file " + s.config_path);
    Json j;
    try {
      j = Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("config file: ") + e.what());
    }
    c = from_json(j.contains("config") ? j.at("config") : j);
  }
  auto set = [](auto& target, const auto& v) {
    if (v) target = *v;
  };
  set(c.omega1, s.omega1);
  set(c.omega2, s.omega2);
  set(c.lambda, s.lambda);
  set(c.t_end, s.t_end);
  set(c.tol, s.tol);
  set(c.sample_rate, s.sample_rate);
  if (s.escape_radius) c.escape_radius = *s.escape_radius;
  set(c.seed, s.seed);
  set(c.out, s.out);
  if (s.format) c.format = *s.format == "csv" ? OutputFormat::csv : OutputFormat::json;
  set(c.lambda_min, s.lambda_min);
  set(c.lambda_max, s.lambda_max);
  set(c.grid_points, s.grid_points);
  set(c.bisection_steps, s.bisection_steps);
  set(c.family, s.family);
  set(c.branch, s.branch);
  if (s.ax) c.a_x = *s.ax;
  if (s.ay) c.a_y = *s.ay;
  if (s.bx) c.b_x = *s.bx;
  if (s.by) c.b_y = *s.by;
  if (s.g) c.g = *s.g;

  const bool jet_given = s.q0 || s.qd0 || s.qdd0 || s.qddd0;
  const bool ostro_given = s.x1 || s.x2 || s.p1 || s.p2;
  if (jet_given && ostro_given) throw ConfigError("give either --q0.. or --x1.. initial data, not both");
  Chart chart = c.chart;
  if (s.chart) chart = *s.chart == "jet" ? Chart::jet : Chart::ostrogradsky;
  else if (jet_given) chart = Chart::jet;
  else if (ostro_given) chart = Chart::ostrogradsky;
  if (chart == Chart::jet && ostro_given) throw ConfigError("--chart jet conflicts with --x1/--x2/--p1/--p2");
  if (chart == Chart::ostrogradsky && jet_given) throw ConfigError("--chart ostro conflicts with --q0/--qd0/--qdd0/--qddd0");
  if (chart != c.chart && !jet_given && !ostro_given) {
    throw ConfigError(std::string("--chart ") + (chart == Chart::jet ? "jet" : "ostro") + " needs initial data in that chart");
  }
  c.chart = chart;
  if (jet_given) c.initial = Vec4(s.q0.value_or(0.0), s.qd0.value_or(0.0), s.qdd0.value_or(0.0), s.qddd0.value_or(0.0));
  if (ostro_given) c.initial = Vec4(s.x1.value_or(0.0), s.x2.value_or(0.0), s.p1.value_or(0.0), s.p2.value_or(0.0));
  validate(c);
  return c;
}

void emit(const Json& report, const RunConfig& config, std::ostream& out) {
  if (config.out.empty()) {
    out << report.dump(2) << '\n';
    return;
  }
  std::ofstream file(config.out, std::ios::binary);
  if (!file) throw std::runtime_error("cannot write " + config.out);
  file << report.dump(2) << '\n';
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Numerics for the fourth-order Pais-Uhlenbeck oscillator", "puo"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  CliState s;
  auto* verify = app.add_subcommand("verify", "run the invariant suite");
  auto* simulate = app.add_subcommand("simulate", "integrate one trajectory");
  auto* embed = app.add_subcommand("embed", "solve and reconcile a two-dimensional embedding");
  auto* scan = app.add_subcommand("scan", "search the coupling threshold for runaway");
  auto* modes = app.add_subcommand("modes", "normal-mode amplitudes and energies of the initial state");
  for (auto* sub : {verify, simulate, embed, scan, modes}) add_common(sub, s);
  scan->add_option("--lambda-min", s.lambda_min);
  scan->add_option("--lambda-max", s.lambda_max);
  scan->add_option("--grid-points", s.grid_points);
  scan->add_option("--bisection-steps", s.bisection_steps);
  embed->add_option("--family", s.family, "Ta1, Ta2, Tb1 or Tb2");
  embed->add_option("--branch", s.branch, "+ or -");
  embed->add_option("--ax", s.ax);
  embed->add_option("--ay", s.ay);
  embed->add_option("--bx", s.bx);
  embed->add_option("--by", s.by);
  embed->add_option("--g", s.g);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    RunConfig config = build_config(s);
    const bool csv = config.format && *config.format == OutputFormat::csv;
    if (csv && !simulate->parsed()) throw ConfigError("--format csv is only available for simulate");
    CommandResult result;
    if (verify->parsed()) {
      result = cmd_verify(config);
    } else if (modes->parsed()) {
      result = cmd_modes(config);
    } else if (embed->parsed()) {
      result = cmd_embed(config);
    } else if (scan->parsed()) {
      result = cmd_scan(config);
    } else {
      if (config.out.empty()) {
        result = cmd_simulate(config, out);
        err << result.report.dump(2) << '\n';
      } else {
        std::ofstream file(config.out, std::ios::binary);
        if (!file) throw std::runtime_error("cannot write " + config.out);
        result = cmd_simulate(config, file);
        out << result.report.dump(2) << '\n';
      }
      return result.exit_code;
    }
    emit(result.report, config, out);
    if (result.exit_code != kExitOk && result.report.contains("error")) {
      err << "error: " << result.report["error"]["message"].get<std::string>() << '\n';
    } else if (result.exit_code != kExitOk && result.report.contains("first_failure")) {
      err << "invariant failed: " << result.report["first_failure"].dump() << '\n';
    }
    return result.exit_code;
  } catch (const ConfigError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace puo::app

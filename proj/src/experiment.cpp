#include "cylint/experiment.hpp"

#include <chrono>
#include <cmath>
#include <complex>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>

#include "cylint/integrator.hpp"
#include "cylint/parallel.hpp"

namespace cylint {

namespace {

const std::set<std::string> kKinds = {
    "cf-test",     "refine",          "gauss-dom",   "decouple",
    "conditioning", "prokhorov-suite", "probe-image", "boundedness"};

// kinds whose assertions are statistical estimates (minimum replica count)
const std::set<std::string> kStatisticalKinds = {
    "cf-test",  "refine",      "gauss-dom",  "decouple",
    "conditioning", "probe-image", "boundedness"};

const std::set<std::string> kModelKinds = {"cf-test", "refine", "gauss-dom",
                                           "probe-image", "boundedness"};

const std::set<std::string> kFixtureNames = {
    "iid-gaussian", "two-state-multiplicative", "gaussian-exact",
    "history-variance", "point-mass"};

bool is_number(const json& j) { return j.is_number(); }
bool is_pos(const json& j) { return j.is_number() && j.get<double>() > 0.0; }
bool is_int_ge(const json& j, long long lo) {
  return j.is_number_integer() && j.get<long long>() >= lo;
}

void require(std::vector<FieldError>& errs, bool ok, const std::string& path,
             const std::string& msg) {
  if (!ok) errs.push_back({path, msg});
}

void validate_operator_block(std::vector<FieldError>& errs, const json& block,
                             const std::string& path) {
  if (!block.is_object()) {
    errs.push_back({path, "must be an operator object"});
    return;
  }
  std::string kind = block.value("kind", "");
  if (kind == "identity") {
    if (block.contains("scale"))
      require(errs, is_number(block["scale"]), path + ".scale",
              "must be a number");
  } else if (kind == "dense") {
    require(errs, block.contains("shape") && block.contains("entries"),
            path, "dense operator needs shape and entries");
  } else if (kind == "random-gaussian") {
    require(errs, block.contains("seed") && is_int_ge(block["seed"], 0),
            path + ".seed", "must be a nonnegative integer");
    if (block.contains("scale"))
      require(errs, is_number(block["scale"]), path + ".scale",
              "must be a number");
  } else if (kind == "rank-one") {
    require(errs, block.contains("row") && is_int_ge(block["row"], 0),
            path + ".row", "must be a nonnegative integer");
    require(errs, block.contains("col") && is_int_ge(block["col"], 0),
            path + ".col", "must be a nonnegative integer");
    require(errs, block.contains("value") && is_number(block["value"]),
            path + ".value", "must be a number");
  } else {
    errs.push_back({path + ".kind",
                    "must be one of identity, dense, random-gaussian, "
                    "rank-one"});
  }
}

void validate_integrand_block(std::vector<FieldError>& errs, const json& block,
                              const std::string& path) {
  if (!block.is_object()) {
    errs.push_back({path, "must be an integrand object"});
    return;
  }
  std::string name = block.value("name", "");
  if (name != "constant" && name != "poly" && name != "exp-decay" &&
      name != "noise-adapted-clamp") {
    errs.push_back({path + ".name",
                    "must be one of constant, poly, exp-decay, "
                    "noise-adapted-clamp"});
    return;
  }
  if (!block.contains("phi"))
    errs.push_back({path + ".phi", "required operator block"});
  else
    validate_operator_block(errs, block["phi"], path + ".phi");
  if (name == "poly")
    require(errs,
            block.contains("coeffs") && block["coeffs"].is_array() &&
                !block["coeffs"].empty(),
            path + ".coeffs", "nonempty number array required");
  if (name == "exp-decay")
    require(errs, block.contains("rate") && is_number(block["rate"]),
            path + ".rate", "must be a number");
  if (name == "noise-adapted-clamp")
    require(errs, block.contains("cap") && is_pos(block["cap"]), path + ".cap",
            "must be > 0");
}

void validate_model_block(std::vector<FieldError>& errs, const json& config) {
  if (!config.contains("model")) {
    errs.push_back({"$.model", "required"});
    return;
  }
  const json& m = config["model"];
  if (!m.is_object()) {
    errs.push_back({"$.model", "must be an object"});
    return;
  }
  std::string family = m.value("family", "");
  if (family != "gaussian" && family != "diagonal" &&
      family != "canonical-stable") {
    errs.push_back({"$.model.family",
                    "must be one of gaussian, diagonal, canonical-stable"});
    return;
  }
  json params = m.value("params", json::object());
  if (family == "gaussian") {
    if (params.contains("variance"))
      require(errs, is_pos(params["variance"]), "$.model.params.variance",
              "must be > 0");
  } else if (family == "diagonal") {
    std::string law = params.value("law", "brownian");
    require(errs,
            law == "brownian" || law == "compound-poisson" ||
                law == "symmetric-stable",
            "$.model.params.law",
            "must be one of brownian, compound-poisson, symmetric-stable");
    if (params.contains("rate"))
      require(errs, is_pos(params["rate"]), "$.model.params.rate",
              "must be > 0");
    if (params.contains("scale"))
      require(errs, is_pos(params["scale"]), "$.model.params.scale",
              "must be > 0");
    if (params.contains("jump_dist")) {
      std::string jd = params["jump_dist"].get<std::string>();
      require(errs, jd == "rademacher" || jd == "std-normal",
              "$.model.params.jump_dist",
              "must be rademacher or std-normal");
    }
    if (law == "symmetric-stable" || params.contains("alpha"))
      require(errs,
              params.contains("alpha") && params["alpha"].is_number() &&
                  params["alpha"].get<double>() > 0.0 &&
                  params["alpha"].get<double>() < 2.0,
              "$.model.params.alpha", "must be in (0,2)");
  } else {  // canonical-stable
    require(errs,
            params.contains("alpha") && params["alpha"].is_number() &&
                params["alpha"].get<double>() > 0.0 &&
                params["alpha"].get<double>() < 2.0,
            "$.model.params.alpha", "must be in (0,2)");
    if (params.contains("c"))
      require(errs, is_pos(params["c"]), "$.model.params.c", "must be > 0");
  }
}

std::string iso_timestamp() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct AssertLog {
  ordered_json entries = ordered_json::array();
  bool all_passed = true;

  void add(const std::string& name, bool pass, double value, double bound) {
    ordered_json e;
    e["name"] = name;
    e["pass"] = pass;
    e["value"] = value;
    e["bound"] = bound;
    entries.push_back(e);
    all_passed = all_passed && pass;
  }
  void check_le(const std::string& name, double value, double bound) {
    add(name, value <= bound, value, bound);
  }
  void check_eq(const std::string& name, double value, double target,
                double tol = 0.0) {
    ordered_json e;
    bool pass = std::abs(value - target) <= tol;
    e["name"] = name;
    e["pass"] = pass;
    e["value"] = value;
    e["target"] = target;
    e["tolerance"] = tol;
    entries.push_back(e);
    all_passed = all_passed && pass;
  }
};

Vector probe_vector(std::uint64_t seed, int index, Eigen::Index dim) {
  Rng rng(derive_seed(seed, 101, static_cast<std::uint64_t>(index)));
  Vector v(dim);
  for (Eigen::Index k = 0; k < dim; ++k) v[k] = rng.gaussian();
  double len = 0.4 + 0.4 * index;
  return v * (len / v.norm());
}

Matrix random_gaussian_operator(std::uint64_t seed, Eigen::Index d_v,
                                Eigen::Index d_u, double scale) {
  Rng rng(seed);
  Matrix phi(d_v, d_u);
  for (Eigen::Index i = 0; i < d_v; ++i)
    for (Eigen::Index k = 0; k < d_u; ++k)
      phi(i, k) = scale * rng.gaussian() / std::sqrt(static_cast<double>(d_u));
  return phi;
}

std::vector<double> uniform_partition(int n, double horizon) {
  std::vector<double> p(n + 1);
  for (int i = 0; i <= n; ++i) p[i] = horizon * i / n;
  p.back() = horizon;
  return p;
}

double std_normal_upper_tail(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

}  // namespace

std::vector<FieldError> validate_config(const json& config) {
  std::vector<FieldError> errs;
  if (!config.is_object()) {
    errs.push_back({"$", "config must be a JSON object"});
    return errs;
  }
  std::string kind = config.value("kind", "");
  if (!kKinds.count(kind)) {
    errs.push_back({"$.kind",
                    "must be one of cf-test, refine, gauss-dom, decouple, "
                    "conditioning, prokhorov-suite, probe-image, boundedness"});
    return errs;
  }
  require(errs, config.contains("seed") && is_int_ge(config["seed"], 0),
          "$.seed", "explicit nonnegative integer seed required");

  if (kStatisticalKinds.count(kind))
    require(errs, config.contains("replicas") && is_int_ge(config["replicas"], 100),
            "$.replicas", "statistical experiments need replicas >= 100");

  if (kModelKinds.count(kind)) {
    if (!config.contains("dims") || !config["dims"].is_object() ||
        !is_int_ge(config["dims"].value("d_U", json()), 1) ||
        !is_int_ge(config["dims"].value("d_V", json()), 1)) {
      errs.push_back({"$.dims", "object with integer d_U >= 1 and d_V >= 1"});
    }
    validate_model_block(errs, config);
  }

  if (kind == "cf-test") {
    if (!config.contains("phi"))
      errs.push_back({"$.phi", "required operator block"});
    else
      validate_operator_block(errs, config["phi"], "$.phi");
    require(errs,
            config.contains("dt") && config["dt"].is_array() &&
                !config["dt"].empty(),
            "$.dt", "nonempty array of positive time steps");
    if (config.contains("dt") && config["dt"].is_array())
      for (const auto& v : config["dt"])
        require(errs, is_pos(v), "$.dt", "entries must be > 0");
    if (config.contains("probes"))
      require(errs, is_int_ge(config["probes"], 1), "$.probes", "must be >= 1");
  } else if (kind == "refine") {
    if (!config.contains("integrand"))
      errs.push_back({"$.integrand", "required integrand block"});
    else
      validate_integrand_block(errs, config["integrand"], "$.integrand");
    bool levels_ok = config.contains("levels") && config["levels"].is_array() &&
                     config["levels"].size() >= 2;
    if (levels_ok) {
      long long prev = 0;
      for (const auto& v : config["levels"]) {
        if (!is_int_ge(v, 2) ||
            (prev > 0 && (v.get<long long>() <= prev ||
                          v.get<long long>() % prev != 0)))
          levels_ok = false;
        else
          prev = v.get<long long>();
      }
    }
    require(errs, levels_ok, "$.levels",
            "increasing integer partition sizes, each dividing the next");
    require(errs, config.contains("horizon") && is_pos(config["horizon"]),
            "$.horizon", "must be > 0");
    require(errs, config.contains("t") && is_pos(config["t"]), "$.t",
            "must be > 0");
    std::string mode = config.value("assert", "decreasing");
    require(errs, mode == "decreasing" || mode == "exact-zero", "$.assert",
            "must be decreasing or exact-zero");
  } else if (kind == "gauss-dom") {
    require(errs, config.contains("dt") && is_pos(config["dt"]), "$.dt",
            "must be > 0");
    if (config.contains("phi_count"))
      require(errs, is_int_ge(config["phi_count"], 1), "$.phi_count",
              "must be >= 1");
  } else if (kind == "decouple" || kind == "conditioning") {
    require(errs,
            config.contains("fixture") && config["fixture"].is_string() &&
                kFixtureNames.count(config["fixture"].get<std::string>()) > 0,
            "$.fixture",
            "must name a bundled array fixture");
    bool rows_ok = config.contains("rows") && config["rows"].is_array() &&
                   !config["rows"].empty();
    if (rows_ok)
      for (const auto& v : config["rows"])
        if (!is_int_ge(v, 1)) rows_ok = false;
    require(errs, rows_ok, "$.rows", "nonempty array of positive integers");
    if (kind == "conditioning") {
      require(errs,
              config.contains("betas") && config["betas"].is_array() &&
                  !config["betas"].empty(),
              "$.betas", "nonempty number array required");
      std::string mode = config.value("assert", "decreasing");
      require(errs, mode == "decreasing" || mode == "exact", "$.assert",
              "must be decreasing or exact");
    }
  } else if (kind == "prokhorov-suite") {
    require(errs, config.contains("pairs") && is_int_ge(config["pairs"], 1),
            "$.pairs", "must be >= 1");
    if (config.contains("max_atoms"))
      require(errs,
              is_int_ge(config["max_atoms"], 1) &&
                  config["max_atoms"].get<long long>() <= 6,
              "$.max_atoms", "must be in [1,6] for the exact regime");
    if (config.contains("dim"))
      require(errs, is_int_ge(config["dim"], 1), "$.dim", "must be >= 1");
  } else if (kind == "probe-image") {
    bool scales_ok = config.contains("scales") && config["scales"].is_array() &&
                     !config["scales"].empty();
    if (scales_ok)
      for (const auto& v : config["scales"])
        if (!is_pos(v)) scales_ok = false;
    require(errs, scales_ok, "$.scales", "nonempty array of positive numbers");
    require(errs, config.contains("dt") && is_pos(config["dt"]), "$.dt",
            "must be > 0");
    require(errs,
            config.contains("r_grid") && config["r_grid"].is_array() &&
                !config["r_grid"].empty(),
            "$.r_grid", "nonempty array of radii");
  } else if (kind == "boundedness") {
    if (!config.contains("integrand"))
      errs.push_back({"$.integrand", "required integrand block"});
    else
      validate_integrand_block(errs, config["integrand"], "$.integrand");
    require(errs,
            config.contains("partition_size") &&
                is_int_ge(config["partition_size"], 2),
            "$.partition_size", "must be >= 2");
    require(errs, config.contains("horizon") && is_pos(config["horizon"]),
            "$.horizon", "must be > 0");
    require(errs,
            config.contains("theta_members") &&
                is_int_ge(config["theta_members"], 1),
            "$.theta_members", "must be >= 1");
    bool tps_ok = config.contains("theta_partition_size") &&
                  is_int_ge(config["theta_partition_size"], 1);
    if (tps_ok && config.contains("partition_size") &&
        is_int_ge(config["partition_size"], 2))
      tps_ok = config["partition_size"].get<long long>() %
                   config["theta_partition_size"].get<long long>() ==
               0;
    require(errs, tps_ok, "$.theta_partition_size",
            "must divide partition_size");
    require(errs,
            (config.contains("bound") && is_pos(config["bound"])) ||
                (config.contains("fixture") && config["fixture"].is_string()),
            "$.bound", "numeric bound or fixture file name required");
    if (config.contains("bound_tolerance"))
      require(errs, is_pos(config["bound_tolerance"]), "$.bound_tolerance",
              "must be > 0");
  }
  return errs;
}

LevyModel model_from_config(const json& config) {
  const Eigen::Index d_u = config["dims"]["d_U"].get<Eigen::Index>();
  const json& m = config["model"];
  std::string family = m["family"].get<std::string>();
  json params = m.value("params", json::object());
  LevyModel model;
  if (family == "gaussian") {
    model = LevyModel::gaussian(d_u, params.value("variance", 1.0));
  } else if (family == "diagonal") {
    DiagonalJumps dj;
    if (params.contains("scales"))
      dj.scales = params["scales"].get<std::vector<double>>();
    else
      dj.scales.assign(d_u, params.value("scale", 1.0));
    std::string law = params.value("law", "brownian");
    dj.law = law == "brownian" ? CoordLaw::Brownian
             : law == "compound-poisson" ? CoordLaw::CompoundPoisson
                                         : CoordLaw::SymmetricStable;
    dj.rate = params.value("rate", 1.0);
    dj.jump_dist = params.value("jump_dist", std::string("rademacher")) ==
                           "std-normal"
                       ? JumpDist::StdNormal
                       : JumpDist::Rademacher;
    dj.alpha = params.value("alpha", 1.5);
    model = LevyModel::diagonal(std::move(dj));
  } else {
    model = LevyModel::canonical_stable(d_u, params["alpha"].get<double>(),
                                        params.value("c", 1.0));
  }
  if (m.contains("drift")) model.drift = vector_from_json(m["drift"]);
  model.validate();
  return model;
}

Matrix operator_from_config(const json& block, Eigen::Index d_v,
                            Eigen::Index d_u) {
  std::string kind = block.value("kind", "");
  if (kind == "identity") {
    double s = block.value("scale", 1.0);
    Matrix phi = Matrix::Zero(d_v, d_u);
    for (Eigen::Index i = 0; i < std::min(d_v, d_u); ++i) phi(i, i) = s;
    return phi;
  }
  if (kind == "dense") {
    Matrix phi = operator_from_json(block);
    if (phi.rows() != d_v || phi.cols() != d_u)
      throw std::invalid_argument("operator_from_config: shape mismatch");
    return phi;
  }
  if (kind == "random-gaussian")
    return random_gaussian_operator(block["seed"].get<std::uint64_t>(), d_v,
                                    d_u, block.value("scale", 1.0));
  if (kind == "rank-one") {
    Matrix phi = Matrix::Zero(d_v, d_u);
    phi(block["row"].get<Eigen::Index>(), block["col"].get<Eigen::Index>()) =
        block["value"].get<double>();
    return phi;
  }
  throw std::invalid_argument("operator_from_config: unknown kind " + kind);
}

IntegrandRule rule_from_config(const json& block, Eigen::Index d_v,
                               Eigen::Index d_u) {
  std::string name = block.value("name", "");
  Matrix phi = operator_from_config(block["phi"], d_v, d_u);
  if (name == "constant") return constant_rule(std::move(phi));
  if (name == "poly")
    return poly_rule(std::move(phi), block["coeffs"].get<std::vector<double>>());
  if (name == "exp-decay")
    return exp_decay_rule(std::move(phi), block["rate"].get<double>());
  if (name == "noise-adapted-clamp")
    return noise_adapted_clamp_rule(std::move(phi), block["cap"].get<double>());
  throw std::invalid_argument("rule_from_config: unknown name " + name);
}

TangentRow tangent_row_fixture(const std::string& name, int n) {
  if (n < 1) throw std::invalid_argument("tangent_row_fixture: n must be >= 1");
  TangentRow row;
  row.steps = n;
  row.dim = 1;
  row.initial_state = 0;
  const double a = 1.0 / std::sqrt(static_cast<double>(n));

  if (name == "iid-gaussian" || name == "gaussian-exact") {
    // deterministic conditional variances summing to 1 (no state dependence)
    row.law = [a](int, int) {
      ConditionalLaw law;
      law.kind = ConditionalLaw::Kind::Gaussian;
      law.sigma = a;
      return law;
    };
    row.transition = [](int, int) { return 0; };
    return row;
  }
  if (name == "two-state-multiplicative") {
    // X_k = +/- a; sign persists with probability 0.7
    row.initial_state = 1;
    row.law = [a](int, int state) {
      ConditionalLaw law;
      law.kind = ConditionalLaw::Kind::Finite;
      double p_up = state == 1 ? 0.7 : 0.3;
      law.probs = {p_up, 1.0 - p_up};
      Vector up(1), down(1);
      up[0] = a;
      down[0] = -a;
      law.values = {up, down};
      return law;
    };
    // outcome 0 = up-move -> state 1, outcome 1 = down-move -> state 0
    row.transition = [](int, int outcome) { return outcome == 0 ? 1 : 0; };
    return row;
  }
  if (name == "history-variance") {
    // conditional variance depends on the previous draw's sign; the summed
    // variance concentrates at 1 as n grows
    double base = 1.0 / static_cast<double>(n);
    row.law = [base](int, int state) {
      ConditionalLaw law;
      law.kind = ConditionalLaw::Kind::Gaussian;
      law.sigma = std::sqrt(base * (state == 1 ? 1.5 : 0.5));
      return law;
    };
    row.transition = [](int, int outcome) { return outcome; };
    return row;
  }
  if (name == "point-mass") {
    double step = 1.0 / static_cast<double>(n);
    row.law = [step](int, int) {
      ConditionalLaw law;
      law.kind = ConditionalLaw::Kind::Finite;
      law.probs = {1.0};
      Vector v(1);
      v[0] = step;
      law.values = {v};
      return law;
    };
    row.transition = [](int, int) { return 0; };
    return row;
  }
  throw std::invalid_argument("tangent_row_fixture: unknown fixture " + name);
}

namespace {

void run_cf_test(const json& config, const std::string& out_dir,
                 int threads, AssertLog& log, ordered_json& seeds) {
  const std::uint64_t seed = config["seed"].get<std::uint64_t>();
  const int n = config["replicas"].get<int>();
  const Eigen::Index d_u = config["dims"]["d_U"].get<Eigen::Index>();
  const Eigen::Index d_v = config["dims"]["d_V"].get<Eigen::Index>();
  LevyModel model = model_from_config(config);
  Matrix phi = operator_from_config(config["phi"], d_v, d_u);
  const int probes = config.value("probes", 5);
  const double tol = 3.0 * std::sqrt(2.0 / n);

  std::vector<std::vector<double>> csv_rows;
  std::vector<double> dts = config["dt"].get<std::vector<double>>();
  for (std::size_t di = 0; di < dts.size(); ++di) {
    double dt = dts[di];
    seeds["cf_draws_dt" + std::to_string(di)] =
        derive_seed(seed, 7, static_cast<std::uint64_t>(di), 0);
    std::vector<Vector> samples(n);
    parallel_for(n, threads, [&](int i) {
      Rng rng(derive_seed(seed, 7, static_cast<std::uint64_t>(di),
                          static_cast<std::uint64_t>(i)));
      samples[i] = radonify_increment(model, phi, dt, rng);
    });
    for (int p = 0; p < probes; ++p) {
      Vector v = probe_vector(seed, p, d_v);
      CfEstimate emp = empirical_cf(samples, v);
      std::complex<double> exact = increment_cf(model, phi, dt, v);
      double dev = std::abs(emp.value - exact);
      log.check_le("cf/dt=" + std::to_string(dt) + "/probe=" +
                       std::to_string(p),
                   dev, tol);
      csv_rows.push_back({dt, static_cast<double>(p), emp.value.real(),
                          emp.value.imag(), exact.real(), exact.imag(), dev,
                          tol});
    }
  }
  write_csv(out_dir + "/cf_detail.csv",
            {"dt", "probe", "emp_re", "emp_im", "exact_re", "exact_im",
             "abs_dev", "tolerance"},
            csv_rows);
}

void run_refine(const json& config, const std::string& out_dir, int threads,
                AssertLog& log, ordered_json& seeds) {
  const std::uint64_t seed = config["seed"].get<std::uint64_t>();
  const Eigen::Index d_u = config["dims"]["d_U"].get<Eigen::Index>();
  const Eigen::Index d_v = config["dims"]["d_V"].get<Eigen::Index>();
  LevyModel model = model_from_config(config);
  IntegrandRule rule = rule_from_config(config["integrand"], d_v, d_u);
  std::vector<int> levels = config["levels"].get<std::vector<int>>();
  const double horizon = config["horizon"].get<double>();
  const double t = config["t"].get<double>();
  const int replicas = config["replicas"].get<int>();
  seeds["panel"] = derive_seed(seed, 3, 0);

  RefinementReport rep =
      refine_and_integrate(model, rule, levels, horizon, t, replicas,
                           derive_seed(seed, 3, 0), threads);

  std::string mode = config.value("assert", "decreasing");
  if (mode == "exact-zero") {
    for (std::size_t i = 0; i < rep.pairwise_p.size(); ++i)
      log.check_eq("refine/pairwise-zero/level=" +
                       std::to_string(rep.levels[i]),
                   rep.pairwise_p[i], 0.0, 0.0);
  } else {
    for (std::size_t i = 0; i + 2 < rep.levels.size(); ++i) {
      double slack = 2.0 * (rep.final_se[i] + rep.final_se[i + 1]);
      log.check_le("refine/decreasing/" + std::to_string(rep.levels[i]) +
                       "-to-" + std::to_string(rep.levels[i + 1]),
                   rep.final_p[i + 1], rep.final_p[i] + slack);
    }
    if (config.contains("final_gap_max"))
      log.check_le("refine/final-gap",
                   rep.final_p[rep.levels.size() - 2],
                   config["final_gap_max"].get<double>());
  }

  std::vector<std::vector<double>> csv_rows;
  for (std::size_t i = 0; i < rep.levels.size(); ++i)
    csv_rows.push_back({static_cast<double>(rep.levels[i]), rep.pairwise_p[i],
                        rep.pairwise_se[i], rep.final_p[i], rep.final_se[i]});
  write_csv(out_dir + "/refine_detail.csv",
            {"level", "pairwise_p", "pairwise_se", "final_p", "final_se"},
            csv_rows);
}

void run_gauss_dom(const json& config, const std::string& out_dir,
                   AssertLog& log, ordered_json& seeds) {
  const std::uint64_t seed = config["seed"].get<std::uint64_t>();
  const Eigen::Index d_u = config["dims"]["d_U"].get<Eigen::Index>();
  const Eigen::Index d_v = config["dims"]["d_V"].get<Eigen::Index>();
  LevyModel model = model_from_config(config);
  const double dt = config["dt"].get<double>();
  const int n = config["replicas"].get<int>();
  const int phi_count = config.value("phi_count", 5);

  std::vector<std::vector<double>> csv_rows;
  for (int i = 0; i < phi_count; ++i) {
    std::uint64_t phi_seed = derive_seed(seed, 55, static_cast<std::uint64_t>(i));
    std::uint64_t mc_seed = derive_seed(seed, 56, static_cast<std::uint64_t>(i));
    seeds["phi" + std::to_string(i)] = phi_seed;
    Matrix phi = random_gaussian_operator(phi_seed, d_v, d_u, 1.0);
    GaussDomReport rep = gauss_dom_check(model, phi, dt, n, mc_seed);
    double slack = 3.0 * (rep.lhs_se + rep.rhs_se);
    log.check_le("gauss-dom/phi=" + std::to_string(i), rep.lhs,
                 rep.rhs + slack);
    csv_rows.push_back({static_cast<double>(i), rep.lhs, rep.lhs_se, rep.rhs,
                        rep.rhs_se, rep.c});
  }
  write_csv(out_dir + "/gauss_dom_detail.csv",
            {"phi", "lhs", "lhs_se", "rhs", "rhs_se", "c"}, csv_rows);
}

void run_decouple(const json& config, const std::string& out_dir,
                  AssertLog& log, ordered_json& seeds) {
  const std::uint64_t seed = config["seed"].get<std::uint64_t>();
  const std::string fixture = config["fixture"].get<std::string>();
  const int replicas = config["replicas"].get<int>();
  const double factor = config.value("tightness_factor", 10.0);
  const bool iid = fixture == "iid-gaussian" || fixture == "gaussian-exact";

  std::vector<std::vector<double>> radius_rows, freq_rows;
  for (const auto& jn : config["rows"]) {
    int n = jn.get<int>();
    std::uint64_t row_seed = derive_seed(seed, 11, static_cast<std::uint64_t>(n));
    seeds["row_n" + std::to_string(n)] = row_seed;
    TangentRow row = tangent_row_fixture(fixture, n);
    DecoupleResult res = decoupled_tangent(row, replicas, row_seed);

    // (a) per-state conditional frequency tables (finite fixtures only)
    if (!res.original_counts.empty()) {
      std::map<int, long long> orig_total, dec_total;
      for (const auto& [key, c] : res.original_counts) orig_total[key.first] += c;
      for (const auto& [key, c] : res.decoupled_counts) dec_total[key.first] += c;
      for (const auto& [key, oc] : res.original_counts) {
        long long no = orig_total[key.first];
        long long nd = dec_total[key.first];
        long long dc = res.decoupled_counts.count(key)
                           ? res.decoupled_counts.at(key)
                           : 0;
        double po = static_cast<double>(oc) / no;
        double pd = nd > 0 ? static_cast<double>(dc) / nd : 0.0;
        double se = std::sqrt(po * (1.0 - po) / no +
                              (nd > 0 ? pd * (1.0 - pd) / nd : 0.0));
        log.check_le("decouple/freq/n=" + std::to_string(n) + "/state=" +
                         std::to_string(key.first) + "/outcome=" +
                         std::to_string(key.second),
                     std::abs(po - pd), 3.0 * se + 1e-12);
        freq_rows.push_back({static_cast<double>(n),
                             static_cast<double>(key.first),
                             static_cast<double>(key.second), po, pd,
                             3.0 * se});
      }
    }

    // (b) tightness transfer within the committed factor
    double r_orig = tightness_radius(res.original, 0.01);
    double r_dec = tightness_radius(res.decoupled, 0.01);
    log.check_le("decouple/tightness/n=" + std::to_string(n), r_orig,
                 factor * r_dec);
    radius_rows.push_back({static_cast<double>(n), r_orig, r_dec});

    // (c) i.i.d. rows: decoupling is a no-op in law
    if (iid) {
      double tol = 3.0 * std::sqrt(2.0 / replicas);
      for (double beta : {0.5, 1.0, 2.0}) {
        Vector v(1);
        v[0] = beta;
        CfEstimate co = empirical_cf(res.original, v);
        CfEstimate cd = empirical_cf(res.decoupled, v);
        log.check_le("decouple/iid-cf/n=" + std::to_string(n) + "/beta=" +
                         std::to_string(beta),
                     std::abs(co.value - cd.value), tol);
      }
    }
  }
  write_csv(out_dir + "/decouple_radius.csv",
            {"n", "original_radius", "decoupled_radius"}, radius_rows);
  if (!freq_rows.empty())
    write_csv(out_dir + "/decouple_freq.csv",
              {"n", "state", "outcome", "orig_freq", "dec_freq", "tolerance"},
              freq_rows);
}

void run_conditioning(const json& config, const std::string& out_dir,
                      AssertLog& log, ordered_json& seeds) {
  const std::uint64_t seed = config["seed"].get<std::uint64_t>();
  const std::string fixture = config["fixture"].get<std::string>();
  const int replicas = config["replicas"].get<int>();
  std::vector<double> betas = config["betas"].get<std::vector<double>>();
  std::string mode = config.value(
      "assert", fixture == "gaussian-exact" || fixture == "iid-gaussian"
                    ? "exact"
                    : "decreasing");
  // all bundled fixtures normalize the summed conditional variance to 1
  auto target = [](double beta) {
    return std::complex<double>(std::exp(-0.5 * beta * beta), 0.0);
  };

  std::vector<int> rows = config["rows"].get<std::vector<int>>();
  std::vector<ConditioningReport> reports;
  std::vector<std::vector<double>> csv_rows;
  for (int n : rows) {
    std::uint64_t row_seed = derive_seed(seed, 13, static_cast<std::uint64_t>(n));
    seeds["row_n" + std::to_string(n)] = row_seed;
    TangentRow row = tangent_row_fixture(fixture, n);
    reports.push_back(conditioning_test(row, betas, target, replicas, row_seed));
    for (std::size_t b = 0; b < betas.size(); ++b)
      csv_rows.push_back({static_cast<double>(n), betas[b],
                          reports.back().product_dev[b],
                          reports.back().sum_cf_dev[b]});
  }

  const double cf_se = std::sqrt(2.0 / replicas);
  const double prod_se = 2.0 / std::sqrt(static_cast<double>(replicas));
  if (mode == "exact") {
    const ConditioningReport& rep = reports.back();
    for (std::size_t b = 0; b < betas.size(); ++b) {
      log.check_le("conditioning/exact-product/beta=" +
                       std::to_string(betas[b]),
                   rep.product_dev[b], 3.0 * cf_se);
      log.check_le("conditioning/exact-cf/beta=" + std::to_string(betas[b]),
                   rep.sum_cf_dev[b], 3.0 * cf_se);
    }
  } else {
    for (std::size_t i = 0; i + 1 < rows.size(); ++i)
      for (std::size_t b = 0; b < betas.size(); ++b) {
        std::string tag = std::to_string(rows[i]) + "-to-" +
                          std::to_string(rows[i + 1]) + "/beta=" +
                          std::to_string(betas[b]);
        log.check_le("conditioning/product-decreasing/" + tag,
                     reports[i + 1].product_dev[b],
                     reports[i].product_dev[b] + 2.0 * (prod_se + prod_se));
        log.check_le("conditioning/cf-decreasing/" + tag,
                     reports[i + 1].sum_cf_dev[b],
                     reports[i].sum_cf_dev[b] + 2.0 * (cf_se + cf_se));
      }
  }
  write_csv(out_dir + "/conditioning_detail.csv",
            {"n", "beta", "product_dev", "sum_cf_dev"}, csv_rows);
}

EmpiricalMeasure random_measure(Rng& rng, int max_atoms, Eigen::Index dim) {
  int n = 1 + static_cast<int>(rng.next_u64() % max_atoms);
  EmpiricalMeasure m;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    Vector a(dim);
    for (Eigen::Index k = 0; k < dim; ++k) a[k] = rng.gaussian();
    m.atoms.push_back(a);
    double w = rng.uniform();
    m.weights.push_back(w);
    total += w;
  }
  for (double& w : m.weights) w /= total;
  // renormalize exactly: absorb rounding into the last weight
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < m.weights.size(); ++i) sum += m.weights[i];
  m.weights.back() = 1.0 - sum;
  return m;
}

void run_prokhorov_suite(const json& config, const std::string& out_dir,
                         AssertLog& log, ordered_json& seeds) {
  const std::uint64_t seed = config["seed"].get<std::uint64_t>();
  const int pairs = config["pairs"].get<int>();
  const int max_atoms = config.value("max_atoms", 6);
  const Eigen::Index dim = config.value("dim", 3);
  seeds["measures"] = derive_seed(seed, 17, 0);

  double max_self = 0.0, max_asym = 0.0, max_triangle = 0.0;
  std::vector<std::vector<double>> csv_rows;
  for (int p = 0; p < pairs; ++p) {
    Rng rng(derive_seed(seed, 17, static_cast<std::uint64_t>(p)));
    EmpiricalMeasure mu = random_measure(rng, max_atoms, dim);
    EmpiricalMeasure nu = random_measure(rng, max_atoms, dim);
    EmpiricalMeasure om = random_measure(rng, max_atoms, dim);
    double d_mn = prokhorov_distance(mu, nu);
    double d_nm = prokhorov_distance(nu, mu);
    double d_mo = prokhorov_distance(mu, om);
    double d_no = prokhorov_distance(nu, om);
    max_self = std::max({max_self, prokhorov_distance(mu, mu),
                         prokhorov_distance(nu, nu)});
    max_asym = std::max(max_asym, std::abs(d_mn - d_nm));
    max_triangle = std::max(max_triangle, d_mo - (d_mn + d_no));
    csv_rows.push_back({static_cast<double>(p), d_mn, d_nm, d_mo, d_no});
  }
  log.check_eq("prokhorov/identity", max_self, 0.0, 0.0);
  log.check_eq("prokhorov/symmetry", max_asym, 0.0, 0.0);
  log.check_le("prokhorov/triangle", max_triangle, 1e-12);

  // closed cases
  auto delta = [dim](double norm) {
    EmpiricalMeasure m;
    Vector a = Vector::Zero(dim);
    a[0] = norm;
    m.atoms = {a};
    m.weights = {1.0};
    return m;
  };
  log.check_eq("prokhorov/point-mass-near", prokhorov_distance(delta(0.0), delta(0.3)),
               0.3, 1e-12);
  log.check_eq("prokhorov/point-mass-far", prokhorov_distance(delta(0.0), delta(2.0)),
               1.0, 1e-12);
  EmpiricalMeasure half;
  Vector z = Vector::Zero(dim), x = Vector::Zero(dim);
  x[0] = 2.0;
  half.atoms = {z, x};
  half.weights = {0.5, 0.5};
  log.check_eq("prokhorov/half-mass", prokhorov_distance(half, delta(0.0)),
               0.5, 1e-12);
  write_csv(out_dir + "/prokhorov_detail.csv",
            {"pair", "d_mu_nu", "d_nu_mu", "d_mu_om", "d_nu_om"}, csv_rows);
}

void run_probe_image(const json& config, const std::string& out_dir,
                     AssertLog& log, ordered_json& seeds) {
  const std::uint64_t seed = config["seed"].get<std::uint64_t>();
  const Eigen::Index d_u = config["dims"]["d_U"].get<Eigen::Index>();
  const Eigen::Index d_v = config["dims"]["d_V"].get<Eigen::Index>();
  LevyModel model = model_from_config(config);
  const double dt = config["dt"].get<double>();
  const int n = config["replicas"].get<int>();
  std::vector<double> scales = config["scales"].get<std::vector<double>>();
  std::vector<double> r_grid = config["r_grid"].get<std::vector<double>>();
  seeds["probe"] = derive_seed(seed, 21, 0);

  std::vector<Matrix> family;
  for (double c : scales) {
    Matrix phi = Matrix::Zero(d_v, d_u);
    phi(0, 0) = c;
    family.push_back(phi);
  }
  ImageTailReport rep = image_measure_tail_probe(model, family, dt, r_grid, n,
                                                 derive_seed(seed, 21, 0));

  for (std::size_t g = 0; g + 1 < r_grid.size(); ++g)
    log.check_le("probe-image/tail-decay/r=" + std::to_string(r_grid[g + 1]),
                 rep.tail_prob[g + 1], rep.tail_prob[g]);
  log.check_eq("probe-image/coord-tail-beyond-dv",
               rep.coord_tail[static_cast<std::size_t>(d_v)], 0.0, 0.0);

  std::vector<std::vector<double>> csv_rows, gauss_rows;
  for (std::size_t g = 0; g < r_grid.size(); ++g)
    csv_rows.push_back({r_grid[g], rep.tail_prob[g]});
  write_csv(out_dir + "/probe_image_tail.csv", {"r", "sup_tail_prob"},
            csv_rows);

  // closed-form cross-check for the rank-one Gaussian family
  bool is_plain_gaussian =
      config["model"]["family"] == "gaussian" &&
      std::holds_alternative<std::monostate>(model.jumps);
  if (is_plain_gaussian) {
    double variance = config["model"].contains("params")
                          ? config["model"]["params"].value("variance", 1.0)
                          : 1.0;
    for (std::size_t f = 0; f < scales.size(); ++f) {
      ImageTailReport one = image_measure_tail_probe(
          model, {family[f]}, dt, r_grid, n, derive_seed(seed, 21, 0));
      for (std::size_t g = 0; g < r_grid.size(); ++g) {
        double sd = scales[f] * std::sqrt(variance * dt);
        double exact = 2.0 * std_normal_upper_tail(r_grid[g] / sd);
        double se = std::sqrt(std::max(exact * (1.0 - exact),
                                       one.tail_prob[g] *
                                           (1.0 - one.tail_prob[g])) /
                              n);
        log.check_le("probe-image/gaussian-tail/scale=" +
                         std::to_string(scales[f]) + "/r=" +
                         std::to_string(r_grid[g]),
                     std::abs(one.tail_prob[g] - exact), 3.0 * se + 2.0 / n);
        gauss_rows.push_back({scales[f], r_grid[g], one.tail_prob[g], exact});
      }
    }
    write_csv(out_dir + "/probe_image_gaussian.csv",
              {"scale", "r", "empirical", "exact"}, gauss_rows);
  }
}

void run_boundedness(const json& config, const std::string& out_dir,
                     int threads, AssertLog& log, ordered_json& seeds,
                     const std::string& fixture_dir) {
  const std::uint64_t seed = config["seed"].get<std::uint64_t>();
  const Eigen::Index d_u = config["dims"]["d_U"].get<Eigen::Index>();
  const Eigen::Index d_v = config["dims"]["d_V"].get<Eigen::Index>();
  LevyModel model = model_from_config(config);
  IntegrandRule rule = rule_from_config(config["integrand"], d_v, d_u);
  const int psize = config["partition_size"].get<int>();
  const int tsize = config["theta_partition_size"].get<int>();
  const double horizon = config["horizon"].get<double>();
  const int members = config["theta_members"].get<int>();
  const int replicas = config["replicas"].get<int>();

  std::vector<double> partition = uniform_partition(psize, horizon);
  std::vector<double> theta_partition;
  for (int k = 0; k <= tsize; ++k)
    theta_partition.push_back(partition[static_cast<std::size_t>(k) *
                                        (psize / tsize)]);

  SimpleProcess sp = discretize(rule, partition);
  std::uint64_t panel_seed = derive_seed(seed, 31, 0);
  seeds["panel"] = panel_seed;
  NoisePanel panel =
      generate_noise_panel(model, partition, replicas, panel_seed, threads);

  // contraction family: per-interval random signed diagonals with operator
  // norm in (0.25, 1]
  std::vector<std::vector<Matrix>> theta(members);
  for (int m = 0; m < members; ++m) {
    theta[m].resize(tsize);
    for (int k = 0; k < tsize; ++k) {
      Rng rng(derive_seed(seed, 32, static_cast<std::uint64_t>(m),
                          static_cast<std::uint64_t>(k)));
      Vector diag(d_v);
      double s = 0.25 + 0.75 * rng.uniform();
      for (Eigen::Index i = 0; i < d_v; ++i)
        diag[i] = (rng.next_u64() & 1u ? s : -s);
      theta[m][k] = diag.asDiagonal();
    }
  }

  TailReport tail =
      elementary_integral_probe(sp, theta, theta_partition, panel, {0.01});
  double q = tail.quantiles[0];

  double bound;
  if (config.contains("bound")) {
    bound = config["bound"].get<double>();
  } else {
    std::string path =
        fixture_dir + "/" + config["fixture"].get<std::string>();
    std::ifstream is(path);
    if (!is)
      throw std::runtime_error("boundedness: cannot open fixture " + path);
    json fx = json::parse(is);
    bound = fx.at("quantile_0_99").get<double>();
  }
  double frac = config.value("bound_tolerance", 0.1);
  log.check_le("boundedness/quantile-vs-fixture", std::abs(q - bound),
               frac * bound);

  write_csv(out_dir + "/boundedness_detail.csv",
            {"eps", "quantile", "fixture_bound"},
            {{tail.eps[0], q, bound}});
}

}  // namespace

RunOutcome run_experiment(const json& config, const std::string& out_dir,
                          int threads, const std::string& fixture_dir) {
  auto errs = validate_config(config);
  if (!errs.empty())
    throw std::invalid_argument("invalid config: " + errs.front().path + ": " +
                                errs.front().message);
  if (threads < 1) threads = 1;
  std::filesystem::create_directories(out_dir);

  std::string kind = config["kind"].get<std::string>();
  AssertLog log;
  ordered_json seeds;
  seeds["master"] = config["seed"].get<std::uint64_t>();

  if (kind == "cf-test")
    run_cf_test(config, out_dir, threads, log, seeds);
  else if (kind == "refine")
    run_refine(config, out_dir, threads, log, seeds);
  else if (kind == "gauss-dom")
    run_gauss_dom(config, out_dir, log, seeds);
  else if (kind == "decouple")
    run_decouple(config, out_dir, log, seeds);
  else if (kind == "conditioning")
    run_conditioning(config, out_dir, log, seeds);
  else if (kind == "prokhorov-suite")
    run_prokhorov_suite(config, out_dir, log, seeds);
  else if (kind == "probe-image")
    run_probe_image(config, out_dir, log, seeds);
  else if (kind == "boundedness")
    run_boundedness(config, out_dir, threads, log, seeds, fixture_dir);

  int passed = 0, failed = 0;
  for (const auto& e : log.entries)
    (e["pass"].get<bool>() ? passed : failed) += 1;

  RunOutcome out;
  out.all_passed = log.all_passed;
  out.report["schema_version"] = 1;
  out.report["kind"] = kind;
  out.report["config"] = ordered_json::parse(config.dump());
  out.report["seeds"] = seeds;
  out.report["assertions"] = log.entries;
  out.report["summary"] = ordered_json{{"passed", passed}, {"failed", failed}};
  out.report["timestamp"] = iso_timestamp();

  std::ofstream os(out_dir + "/report.json");
  if (!os) throw std::runtime_error("cannot write " + out_dir + "/report.json");
  os << out.report.dump(2) << "\n";
  return out;
}

}  // namespace cylint

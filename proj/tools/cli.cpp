#include "cli.hpp"

#include "idexp/container.hpp"
#include "idexp/errors.hpp"
#include "idexp/experiments.hpp"
#include "idexp/projection.hpp"
#include "idexp/subspace.hpp"
#include "idexp/synthetic.hpp"

#if __has_include(<CLI11.hpp>)
#include <CLI11.hpp>
#else
#include <CLI/CLI.hpp>
#endif
#include <nlohmann/json.hpp>

#include <cmath>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace idexp::cli {
namespace {

namespace fs = std::filesystem;

struct GlobalOptions {
  double tolerance = kDefaultRankTolerance;
  std::string format = "csv";
  std::uint64_t seed = 0;
  bool raw_coefficients = false;
};

struct GenOptions {
  std::string config;
  std::optional<Index> n, m, k;
  std::vector<double> angles, id_spectrum, exp_spectrum;
  std::optional<std::string> name;
  std::optional<double> mean_scale;
  std::string out;
};

struct ModelArg {
  std::string model;
};

struct AnglesOptions {
  std::string model;
  std::optional<Index> max_components;
  std::string out;
};

struct ProjectOptions {
  std::string model;
  std::string shape;
  std::string which = "full";
  std::string out;
};

struct ExperimentOptions {
  std::string name;
  std::string model;
  std::optional<std::int64_t> trials;
  double epsilon = 1.0;
  std::int64_t samples = 1'000'000;
  unsigned workers = 1;
  Index n_active = 2;
  std::string out;
};

nlohmann::json finite_or_text(double x) {
  if (std::isfinite(x)) return x;
  return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
}

ShapeModel load(const std::string& path, const GlobalOptions& g) {
  ShapeModel model = load_model(path);
  return g.raw_coefficients ? model.with_raw_coefficients() : model;
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
  } else {
    write_file_atomic(path, text);
  }
}

std::string render(const ExperimentReport& report, const GlobalOptions& g) {
  return g.format == "json" ? to_json_text(report) : to_csv(report);
}

SyntheticSpec spec_from(const GenOptions& o, const GlobalOptions& g, bool seed_given) {
  SyntheticSpec spec;
  if (!o.config.empty()) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_file(o.config));
      spec.n = j.value("n", Index{0});
      spec.m = j.value("m", Index{0});
      spec.k = j.value("k", Index{0});
      if (j.contains("angles")) spec.prescribed_angles = j.at("angles").get<std::vector<double>>();
      spec.id_spectrum = j.value("id_spectrum", std::vector<double>{});
      spec.exp_spectrum = j.value("exp_spectrum", std::vector<double>{});
      spec.seed = j.value("seed", std::uint64_t{0});
      spec.name = j.value("name", std::string("synthetic"));
      spec.mean_scale = j.value("mean_scale", spec.mean_scale);
    } catch (const nlohmann::json::exception& e) {
      throw Error("invalid config " + o.config + ": " + e.what());
    }
  }
  if (o.n) spec.n = *o.n;
  if (o.m) spec.m = *o.m;
  if (o.k) spec.k = *o.k;
  if (!o.angles.empty()) spec.prescribed_angles = o.angles;
  if (!o.id_spectrum.empty()) spec.id_spectrum = o.id_spectrum;
  if (!o.exp_spectrum.empty()) spec.exp_spectrum = o.exp_spectrum;
  if (o.name) spec.name = *o.name;
  if (o.mean_scale) spec.mean_scale = *o.mean_scale;
  if (seed_given || o.config.empty()) spec.seed = g.seed;
  return spec;
}

int cmd_gen(const GenOptions& o, const GlobalOptions& g, bool seed_given, std::ostream& out) {
  const ShapeModel model = generate(spec_from(o, g, seed_given));
  save_model(model, o.out);
  out << "wrote " << o.out << " (n=" << model.n() << ", m=" << model.m() << ", k=" << model.k() << ")\n";
  return kExitOk;
}

int cmd_info(const ModelArg& a, const GlobalOptions& g, std::ostream& out) {
  const ShapeModel model = load(a.model, g);
  nlohmann::ordered_json j;
  j["name"] = model.name();
  j["n"] = model.n();
  j["vertices"] = model.vertex_count();
  j["m"] = model.m();
  j["k"] = model.k();
  j["id_stddev"] = std::vector<double>(model.id_stddev().begin(), model.id_stddev().end());
  j["exp_stddev"] = std::vector<double>(model.exp_stddev().begin(), model.exp_stddev().end());

  std::optional<OrthonormalBasis> id, exp;
  if (model.m() > 0) id = orthonormalize(model.id_basis(), g.tolerance);
  if (model.k() > 0) exp = orthonormalize(model.exp_basis(), g.tolerance);
  j["id_rank"] = id ? id->rank() : 0;
  j["exp_rank"] = exp ? exp->rank() : 0;
  j["combined_rank"] = orthonormalize(model.basis(Block::Full), g.tolerance).rank();
  if (id && exp) {
    const auto angles = principal_angles(*id, *exp);
    j["principal_angles_rad"] = angles.angles;
    j["smallest_angle_rad"] = angles.size() ? finite_or_text(angles.smallest()) : nlohmann::json(nullptr);
    j["log_amplification"] = finite_or_text(angles.log_amplification);
  }
  j["fingerprint"] = config_to_json(default_config(model, ExperimentId::AngleCurve))["model_fingerprint"];

  if (g.format == "json") {
    out << j.dump(2) << '\n';
  } else {
    for (const auto& [key, value] : j.items()) out << key << ": " << value.dump() << '\n';
  }
  return kExitOk;
}

int cmd_angles(const AnglesOptions& o, const GlobalOptions& g, std::ostream& out) {
  const ShapeModel model = load(o.model, g);
  ExperimentReport report = run_angle_curve(model, g.tolerance);
  if (o.max_components) {
    if (*o.max_components < 1 || *o.max_components > static_cast<Index>(report.rows.size()))
      throw RangeError("--max-components outside [1, " + std::to_string(report.rows.size()) + "]");
    report.rows.resize(static_cast<std::size_t>(*o.max_components));
    summarize(report);
  }
  report.config.raw_coefficients = g.raw_coefficients;
  emit(render(report, g), o.out, out);
  return kExitOk;
}

int cmd_project(const ProjectOptions& o, const GlobalOptions& g, std::ostream& out) {
  const ShapeModel model = load(o.model, g);
  const FaceShape shape = load_shape(o.shape);
  const Block which = parse_block(o.which);
  const ProjectionResult res = project(model, shape, which, g.tolerance);

  std::string text;
  if (g.format == "csv") {
    text = "projection,mean_vertex_error_mm,param_magnitude,residual_norm_mm\n" + std::string(to_string(which)) +
           "," + finite_or_text(res.mean_vertex_error).dump() + "," + finite_or_text(res.param_magnitude).dump() +
           "," + finite_or_text(res.residual_norm).dump() + "\n";
  } else {
    nlohmann::ordered_json j;
    j["projection"] = std::string(to_string(which));
    j["latents"] = {{"identity", std::vector<double>(res.latents.id.begin(), res.latents.id.end())},
                    {"expression", std::vector<double>(res.latents.exp.begin(), res.latents.exp.end())}};
    j["gamma"] = std::vector<double>(res.gamma.begin(), res.gamma.end());
    j["residual_norm_mm"] = res.residual_norm;
    j["mean_vertex_error_mm"] = res.mean_vertex_error;
    j["param_magnitude"] = res.param_magnitude;
    j["reconstruction"] =
        std::vector<double>(res.reconstruction.coords.begin(), res.reconstruction.coords.end());
    text = j.dump(2) + "\n";
  }
  emit(text, o.out, out);
  return kExitOk;
}

int cmd_experiment(const ExperimentOptions& o, const GlobalOptions& g, std::ostream& out) {
  const ExperimentId id = parse_experiment(o.name);
  const ShapeModel stored = load_model(o.model);

  ExperimentConfig config = default_config(stored, id);
  config.raw_coefficients = g.raw_coefficients;
  config.trials = o.trials.value_or(id == ExperimentId::MeasureCheck ? 1 : 100);
  config.seed = g.seed;
  config.epsilon = o.epsilon;
  config.samples = o.samples;
  config.workers = o.workers;
  config.tolerance = g.tolerance;
  config.n_active = o.n_active;

  const ExperimentReport report = run_experiment(stored, config);
  if (o.out.empty()) {
    out << render(report, g);
    return kExitOk;
  }
  fs::create_directories(o.out);
  const fs::path base = fs::path(o.out) / std::string(to_string(id));
  write_file_atomic(fs::path(base).replace_extension(".csv"), to_csv(report));
  write_file_atomic(fs::path(base).replace_extension(".json"), to_json_text(report));
  out << "wrote " << base.string() << ".csv and .json (" << report.rows.size() << " rows)\n";
  return kExitOk;
}

std::string one_line(std::string s) {
  for (char& c : s)
    if (c == '\n' || c == '\r') c = ' ';
  while (!s.empty() && s.back() == ' ') s.pop_back();
  return s;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Identity/expression subspace analysis for linear 3D morphable models", "idexp"};
  app.require_subcommand(1);

  GlobalOptions g;
  app.add_option("--tolerance", g.tolerance, "Relative rank tolerance")->check(CLI::PositiveNumber);
  app.add_option("--format", g.format, "Output format for stdout")->check(CLI::IsMember({"csv", "json"}));
  auto* seed_opt = app.add_option("--seed", g.seed, "Seed for all randomness (default 0)");
  app.add_flag("--raw-coefficients", g.raw_coefficients,
               "Treat coefficients in raw basis units instead of stddev-scaled units");

  GenOptions gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic model");
  gen_cmd->add_option("--config", gen.config, "JSON file with n, m, k, angles, id_spectrum, exp_spectrum, seed, name")
      ->check(CLI::ExistingFile);
  gen_cmd->add_option("--n", gen.n, "Ambient dimension (3 x vertices)");
  gen_cmd->add_option("--m", gen.m, "Identity components");
  gen_cmd->add_option("--k", gen.k, "Expression components");
  gen_cmd->add_option("--angles", gen.angles, "Prescribed principal angles (radians)")->delimiter(',');
  gen_cmd->add_option("--id-spectrum", gen.id_spectrum, "Identity stddevs (mm)")->delimiter(',');
  gen_cmd->add_option("--exp-spectrum", gen.exp_spectrum, "Expression stddevs (mm)")->delimiter(',');
  gen_cmd->add_option("--name", gen.name, "Model name");
  gen_cmd->add_option("--mean-scale", gen.mean_scale, "Stddev of the random mean (mm)");
  gen_cmd->add_option("--out,-o", gen.out, "Output model file")->required();

  ModelArg info;
  auto* info_cmd = app.add_subcommand("info", "Print dimensions, spectra and rank diagnostics");
  info_cmd->add_option("model", info.model, "Model file")->required()->check(CLI::ExistingFile);

  AnglesOptions angles;
  auto* angles_cmd = app.add_subcommand("angles", "Smallest principal angle vs. number of components");
  angles_cmd->add_option("model", angles.model, "Model file")->required()->check(CLI::ExistingFile);
  angles_cmd->add_option("--max-components", angles.max_components, "Last component count");
  angles_cmd->add_option("--out,-o", angles.out, "Output file (default stdout)");

  ProjectOptions proj;
  auto* project_cmd = app.add_subcommand("project", "Recover latents for a shape file");
  project_cmd->add_option("model", proj.model, "Model file")->required()->check(CLI::ExistingFile);
  project_cmd->add_option("shape", proj.shape, "Shape file")->required()->check(CLI::ExistingFile);
  project_cmd->add_option("--which", proj.which, "id, exp or full")->check(CLI::IsMember({"id", "exp", "full"}));
  project_cmd->add_option("--out,-o", proj.out, "Output file (default stdout)");

  ExperimentOptions exp;
  auto* exp_cmd = app.add_subcommand("experiment", "Run an experiment and write CSV + JSON reports");
  exp_cmd->add_option("name", exp.name, "cross-explain, pc-cross, angle-curve, error-vs-params or measure")
      ->required()
      ->check(CLI::IsMember({"cross-explain", "pc-cross", "angle-curve", "error-vs-params", "measure"}));
  exp_cmd->add_option("model", exp.model, "Model file")->required()->check(CLI::ExistingFile);
  exp_cmd->add_option("--trials", exp.trials, "Trials (default 100; 1 for measure)")->check(CLI::PositiveNumber);
  exp_cmd->add_option("--epsilon", exp.epsilon, "Noise ball radius (mm)")->check(CLI::PositiveNumber);
  exp_cmd->add_option("--samples", exp.samples, "Monte Carlo samples")->check(CLI::Range(std::int64_t{1000}, std::int64_t{1} << 40));
  exp_cmd->add_option("--workers", exp.workers, "Sampling threads")->check(CLI::Range(1u, 256u));
  exp_cmd->add_option("--n-active", exp.n_active, "Active components for pc-cross")->check(CLI::PositiveNumber);
  exp_cmd->add_option("--out,-o", exp.out, "Output directory (default: print to stdout)");

  for (auto* sub : {gen_cmd, info_cmd, angles_cmd, project_cmd, exp_cmd}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "idexp: " << one_line(e.what()) << '\n';
    return kExitUsage;
  }

  try {
    if (gen_cmd->parsed()) return cmd_gen(gen, g, seed_opt->count() > 0, out);
    if (info_cmd->parsed()) return cmd_info(info, g, out);
    if (angles_cmd->parsed()) return cmd_angles(angles, g, out);
    if (project_cmd->parsed()) return cmd_project(proj, g, out);
    if (exp_cmd->parsed()) return cmd_experiment(exp, g, out);
  } catch (const std::exception& e) {
    err << "idexp: " << one_line(e.what()) << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace idexp::cli

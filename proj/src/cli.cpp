#include "roughflow/cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "roughflow/analytic_flows.hpp"
#include "roughflow/circle_maps.hpp"
#include "roughflow/csv_io.hpp"
#include "roughflow/experiments.hpp"
#include "roughflow/field.hpp"
#include "roughflow/measure.hpp"
#include "roughflow/parallel.hpp"

namespace roughflow::cli {
namespace {

using nlohmann::json;

enum class ParamType { Number, Integer, NumberList, Point, Text, Flag };

struct ParamSpec {
  std::string key;
  ParamType type;
  json fallback;  // null: required
  std::string help;
};

struct CommandSpec {
  std::string name;
  std::string help;
  std::vector<ParamSpec> params;
};

const std::vector<CommandSpec>& commands() {
  static const std::vector<CommandSpec> specs{
      {"eval-field",
       "Evaluate b (or b_eps with --smooth) and its divergence at a point",
       {{"point", ParamType::Point, nullptr, "x,y,z"},
        {"smooth", ParamType::Flag, false, "use the smooth field b_eps"},
        {"eps", ParamType::Number, 0.1, "core size of b_eps"},
        {"theta", ParamType::Number, kPi, "target rotation of b_eps (radians)"},
        {"mollify-width", ParamType::Number, -1.0, "transition width (default eps/4)"},
        {"step", ParamType::Number, 1e-4, "finite-difference step for the divergence"}}},
      {"eval-flow",
       "Evaluate an analytic flow X(t, x)",
       {{"kind", ParamType::Text, "rotation", "rotation|psi1|psi2|identity|constant"},
        {"theta", ParamType::Number, kPi, "rotation angle (radians)"},
        {"alpha", ParamType::Number, kPi, "constant-map angle (radians)"},
        {"t", ParamType::Number, nullptr, "time"},
        {"point", ParamType::Point, nullptr, "x,y,z"}}},
      {"psi",
       "Inspect a circle map and test measure preservation",
       {{"map", ParamType::Text, "psi1", "rotation|psi1|psi2|identity|constant"},
        {"theta", ParamType::Number, kPi, "rotation angle (radians)"},
        {"alpha", ParamType::Number, kPi, "constant-map angle (radians)"},
        {"check", ParamType::Flag, false, "run the push-forward histogram test"},
        {"export", ParamType::Flag, false, "write the map tabulated on the 4096-grid"},
        {"bins", ParamType::Integer, 32, "histogram bins"},
        {"samples", ParamType::Integer, 1000000, "histogram samples"},
        {"tol", ParamType::Number, 0.05, "maximal relative bin deviation"}}},
      {"measure",
       "Estimate the compression constant of a flow",
       {{"flow", ParamType::Text, "rotation", "rotation|psi1|psi2|identity|constant|none"},
        {"theta", ParamType::Number, kPi, "rotation angle (radians)"},
        {"alpha", ParamType::Number, kPi, "constant-map angle (radians)"},
        {"t", ParamType::Number, 0.4, "time"},
        {"cell", ParamType::Number, 0.2, "binning cell size"},
        {"samples", ParamType::Integer, 1000000, "number of samples"},
        {"sign", ParamType::Integer, 1, "+1 for a P+ slice, -1 for P-"},
        {"z-min", ParamType::Number, 0.5, "lower z of the slice"},
        {"z-max", ParamType::Number, 1.0, "upper z of the slice"}}},
      {"two-subsequence",
       "Smooth approximations converging to two different flows",
       {{"eps", ParamType::NumberList, json::array({0.4, 0.2, 0.1, 0.05}), "decreasing eps list"},
        {"theta", ParamType::Number, kPi, "target of even rows (radians)"},
        {"phi", ParamType::Number, kPi / 2.0, "target of odd rows (radians)"},
        {"samples", ParamType::Integer, 20000, "particles"},
        {"horizon", ParamType::Number, 1.0, "time horizon"},
        {"time-steps", ParamType::Integer, 20, "distance evaluation intervals"}}},
      {"psi-gallery",
       "Measure preservation, Jacobian signs and self-intersections of X_psi",
       {{"samples", ParamType::Integer, 100000, "samples per statistical test"}}},
      {"interpolant-demo",
       "Piecewise interpolant approaching X_psi1",
       {{"eps", ParamType::NumberList, json::array({0.4, 0.2, 0.1}), "eps list"},
        {"samples", ParamType::Integer, 20000, "points"},
        {"time-steps", ParamType::Integer, 200, "distance evaluation intervals"}}},
      {"figures",
       "Trajectory CSVs for the figures",
       {{"which", ParamType::Text, "all", "fig1|fig2|all"},
        {"samples", ParamType::Integer, 1000, "rows per figure"}}},
  };
  return specs;
}

const CommandSpec* find_command(const std::string& name) {
  for (const auto& c : commands()) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

std::string usage_text() {
  std::ostringstream out;
  out << "usage: roughflow <command> [options]\n\ncommands:\n";
  for (const auto& c : commands()) {
    out << "  " << std::left << std::setw(18) << c.name << c.help << '\n';
  }
  out << "\ncommon options: --seed N, --out-dir DIR, --threads N, --config FILE\n"
         "angles are in radians; run `roughflow <command> --help` for details\n";
  return out.str();
}

double parse_number(const std::string& text, const std::string& key) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw UsageError("--" + key + ": not a number: '" + text + "'", usage_text());
  }
  return v;
}

json convert(const ParamSpec& spec, const json& raw) {
  const auto fail = [&](const std::string& why) -> json {
    throw UsageError("--" + spec.key + ": " + why, usage_text());
  };
  switch (spec.type) {
    case ParamType::Number:
      if (raw.is_number()) return raw.get<double>();
      if (raw.is_string()) return parse_number(raw.get<std::string>(), spec.key);
      return fail("expected a number");
    case ParamType::Integer: {
      double v = 0.0;
      if (raw.is_number()) {
        v = raw.get<double>();
      } else if (raw.is_string()) {
        v = parse_number(raw.get<std::string>(), spec.key);
      } else {
        return fail("expected an integer");
      }
      if (v != std::floor(v)) return fail("expected an integer");
      return static_cast<std::int64_t>(v);
    }
    case ParamType::NumberList:
    case ParamType::Point: {
      std::vector<double> values;
      try {
        if (raw.is_string()) {
          values = parse_number_list(raw.get<std::string>());
        } else if (raw.is_array()) {
          values = raw.get<std::vector<double>>();
        } else {
          return fail("expected a comma-separated list");
        }
      } catch (const std::exception& e) {
        return fail(e.what());
      }
      if (spec.type == ParamType::Point && values.size() != 3) {
        return fail("expected three coordinates x,y,z");
      }
      if (values.empty()) return fail("expected at least one value");
      return values;
    }
    case ParamType::Text:
      if (raw.is_string()) return raw;
      return fail("expected text");
    case ParamType::Flag:
      if (raw.is_boolean()) return raw;
      return fail("expected true or false");
  }
  return raw;
}

std::string normalize_key(std::string key) {
  for (char& c : key) {
    if (c == '_') c = '-';
  }
  return key;
}

json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path, usage_text());
  try {
    json j = json::parse(in);
    if (!j.is_object()) throw UsageError("config file must hold a JSON object", usage_text());
    return j;
  } catch (const json::parse_error& e) {
    throw UsageError("invalid JSON in " + path + ": " + e.what(), usage_text());
  }
}

}  // namespace

RunConfig parse_args(const std::vector<std::string>& argv) {
  if (argv.empty()) throw UsageError("no command given", usage_text());
  if (argv.front() == "--help" || argv.front() == "-h") throw HelpRequested{usage_text()};
  const CommandSpec* spec = find_command(argv.front());
  if (spec == nullptr) throw UsageError("unknown command '" + argv.front() + "'", usage_text());

  CLI::App app{spec->help, "roughflow " + spec->name};
  std::map<std::string, std::string> text_values;
  std::map<std::string, bool> flag_values;
  std::map<std::string, CLI::Option*> options;
  for (const auto& p : spec->params) {
    if (p.type == ParamType::Flag) {
      options[p.key] = app.add_flag("--" + p.key, flag_values[p.key], p.help);
    } else {
      options[p.key] = app.add_option("--" + p.key, text_values[p.key], p.help);
    }
  }
  std::string seed_text;
  std::string threads_text;
  std::string out_dir_text;
  std::string config_path;
  auto* seed_opt = app.add_option("--seed", seed_text, "random seed (default 0)");
  auto* threads_opt = app.add_option("--threads", threads_text, "worker cap");
  auto* out_opt = app.add_option("--out-dir", out_dir_text, "output directory (default out)");
  app.add_option("--config", config_path, "JSON file with default option values");

  std::vector<std::string> storage{"roughflow"};
  storage.insert(storage.end(), argv.begin() + 1, argv.end());
  std::vector<char*> raw;
  for (auto& s : storage) raw.push_back(s.data());
  try {
    app.parse(static_cast<int>(raw.size()), raw.data());
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested{app.help()};
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what(), app.help());
  }

  // Defaults, then the config file, then explicit flags.
  json merged = json::object();
  for (const auto& p : spec->params) {
    if (!p.fallback.is_null()) merged[p.key] = p.fallback;
  }
  json common = {{"seed", 0}, {"out-dir", "out"}, {"threads", 0}};
  if (!config_path.empty()) {
    const json file = load_config_file(config_path);
    for (const auto& [raw_key, value] : file.items()) {
      const std::string key = normalize_key(raw_key);
      if (common.contains(key)) {
        common[key] = value;
        continue;
      }
      const auto it = std::find_if(spec->params.begin(), spec->params.end(),
                                   [&](const ParamSpec& p) { return p.key == key; });
      if (it == spec->params.end()) {
        throw UsageError("unknown key '" + raw_key + "' for command " + spec->name,
                         app.help());
      }
      merged[key] = convert(*it, value);
    }
  }
  for (const auto& p : spec->params) {
    if (options[p.key]->count() == 0) continue;
    merged[p.key] = p.type == ParamType::Flag ? json(flag_values[p.key])
                                              : convert(p, json(text_values[p.key]));
  }
  for (const auto& p : spec->params) {
    if (!merged.contains(p.key)) {
      throw UsageError("missing required option --" + p.key, app.help());
    }
  }

  const ParamSpec seed_spec{"seed", ParamType::Integer, 0, ""};
  const ParamSpec threads_spec{"threads", ParamType::Integer, 0, ""};
  if (seed_opt->count() > 0) common["seed"] = seed_text;
  if (threads_opt->count() > 0) common["threads"] = threads_text;
  if (out_opt->count() > 0) common["out-dir"] = out_dir_text;

  RunConfig config;
  config.command = spec->name;
  config.params = std::move(merged);
  const auto seed = convert(seed_spec, common["seed"]).get<std::int64_t>();
  const auto threads = convert(threads_spec, common["threads"]).get<std::int64_t>();
  if (seed < 0) throw UsageError("--seed must be non-negative", app.help());
  if (threads < 0) throw UsageError("--threads must be non-negative", app.help());
  if (!common["out-dir"].is_string()) throw UsageError("out-dir must be text", app.help());
  config.seed = static_cast<std::uint64_t>(seed);
  config.threads = static_cast<unsigned>(threads);
  config.out_dir = common["out-dir"].get<std::string>();
  return config;
}

namespace {

json to_array(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

Point3 to_point(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return {v.at(0), v.at(1), v.at(2)};
}

FlowSpec select_flow(const std::string& kind, double theta, double alpha) {
  if (kind == "rotation") return FlowSpec::rotation(theta);
  return build_flow_from_psi(builtin(parse_builtin_map(kind), alpha));
}

std::filesystem::path command_dir(const RunConfig& config) {
  auto dir = config.out_dir / config.command;
  std::filesystem::create_directories(dir);
  return dir;
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

// Doubles are printed with round-trip precision.
std::string dump(const json& j) { return j.dump(2); }

int cmd_eval_field(const RunConfig& c, std::ostream& out) {
  const auto& p = c.params;
  const Point3 point = to_point(p["point"]);
  const double h = p["step"].get<double>();
  json result{{"point", to_array(point)}, {"region", std::string(to_string(classify(point)))}};
  FieldFn field;
  if (p["smooth"].get<bool>()) {
    const double width = p["mollify-width"].get<double>();
    const auto params = SmoothFieldParams::make(
        p["eps"].get<double>(), p["theta"].get<double>(),
        width > 0.0 ? std::optional<double>(width) : std::nullopt);
    const auto smooth = std::make_shared<SmoothField>(params);
    field = [smooth](const Point3& q) { return (*smooth)(q); };
    result["params"] = params;
  } else {
    field = eval_b;
  }
  result["b"] = to_array(field(point));
  try {
    result["divergence"] = divergence_fd(field, point, h);
  } catch (const SingularityError&) {
    result["divergence"] = nullptr;
  }
  result["step"] = h;
  write_json(command_dir(c) / "result.json", result);
  out << dump(result) << '\n';
  return kExitOk;
}

int cmd_eval_flow(const RunConfig& c, std::ostream& out) {
  const auto& p = c.params;
  const FlowSpec spec = select_flow(p["kind"].get<std::string>(), p["theta"].get<double>(),
                                    p["alpha"].get<double>());
  const Point3 point = to_point(p["point"]);
  const double t = p["t"].get<double>();
  const Point3 image = flow_eval(spec, t, point);
  write_json(command_dir(c) / "result.json",
             {{"flow", spec.label()}, {"t", t}, {"point", to_array(point)},
              {"image", to_array(image)}});
  out << format_double(image.x) << ',' << format_double(image.y) << ','
      << format_double(image.z) << '\n';
  return kExitOk;
}

int cmd_psi(const RunConfig& c, std::ostream& out) {
  const auto& p = c.params;
  const std::string name = p["map"].get<std::string>();
  const double angle = name == "constant" ? p["alpha"].get<double>() : p["theta"].get<double>();
  const CircleMap map = builtin(parse_builtin_map(name), angle);
  json result{{"map", map.name()}, {"invertible", map.invertible()},
              {"breakpoints", map.breakpoints()}};
  const auto dir = command_dir(c);
  if (p["check"].get<bool>()) {
    const auto bins = static_cast<std::size_t>(p["bins"].get<std::int64_t>());
    const auto samples = static_cast<std::size_t>(p["samples"].get<std::int64_t>());
    const double tol = p["tol"].get<double>();
    const Histogram hist = pushforward_histogram(map, bins, samples, c.seed);
    const double deviation = max_relative_deviation(hist);
    result["measure_preserving"] = deviation <= tol;
    result["max_deviation"] = deviation;
    result["bins"] = bins;
    result["samples"] = samples;
    result["tol"] = tol;
    result["seed"] = c.seed;
    result["counts"] = hist.counts;
  }
  if (p["export"].get<bool>()) {
    const auto path = dir / (name + ".csv");
    std::ofstream csv(path);
    write_circle_map_csv(csv, map);
    result["export"] = path.string();
  }
  write_json(dir / (name + ".json"), result);
  out << dump(result) << '\n';
  return kExitOk;
}

int cmd_measure(const RunConfig& c, std::ostream& out) {
  const auto& p = c.params;
  const std::string kind = p["flow"].get<std::string>();
  const FlowMap flow = kind == "none"
                           ? identity_flow()
                           : as_flow_map(select_flow(kind, p["theta"].get<double>(),
                                                     p["alpha"].get<double>()));
  RegionSpec region{static_cast<int>(p["sign"].get<std::int64_t>()), p["z-min"].get<double>(),
                    p["z-max"].get<double>()};
  const MeasureReport report = compression_constant(
      flow, region, p["t"].get<double>(), p["cell"].get<double>(),
      static_cast<std::size_t>(p["samples"].get<std::int64_t>()), c.seed);
  json result = report;
  result["flow"] = kind;
  result["region"] = region;
  result["seed"] = c.seed;
  write_json(command_dir(c) / (kind + ".json"), result);
  out << dump(result) << '\n';
  return kExitOk;
}

int cmd_two_subsequence(const RunConfig& c, std::ostream& out) {
  const auto& p = c.params;
  TwoSubsequenceConfig config;
  config.eps_list = p["eps"].get<std::vector<double>>();
  config.theta = p["theta"].get<double>();
  config.phi = p["phi"].get<double>();
  config.samples = static_cast<std::size_t>(p["samples"].get<std::int64_t>());
  config.horizon = p["horizon"].get<double>();
  config.time_steps = static_cast<std::size_t>(p["time-steps"].get<std::int64_t>());
  config.seed = c.seed;
  const TwoSubsequenceReport report = run_two_subsequence(config);

  const auto dir = command_dir(c);
  const auto log = dir / "distances.csv";
  std::filesystem::remove(log);
  for (const auto& row : report.rows) {
    append_experiment_log(log, "two-subsequence", row.eps, row.theta_target,
                          config.horizon, row.distance_to_target);
  }
  json j = report;
  write_json(dir / "report.json", j);
  out << dump(j) << '\n';
  return report.passed() ? kExitOk : kExitAssertion;
}

int cmd_psi_gallery(const RunConfig& c, std::ostream& out) {
  GalleryConfig config;
  config.samples = static_cast<std::size_t>(c.params["samples"].get<std::int64_t>());
  config.seed = c.seed;
  const GalleryReport report = run_psi_gallery(config);
  json j = report;
  const bool passed = report.psi2_gap <= 1e-10 && report.rotation_coincidences == 0 &&
                      report.psi1_det_min_lower_half > 0.0 &&
                      report.psi1_det_max_upper_half < 0.0 && report.rotation_det_min > 0.0;
  j["passed"] = passed;
  write_json(command_dir(c) / "report.json", j);
  out << dump(j) << '\n';
  return passed ? kExitOk : kExitAssertion;
}

int cmd_interpolant_demo(const RunConfig& c, std::ostream& out) {
  InterpolantConfig config;
  config.eps_list = c.params["eps"].get<std::vector<double>>();
  config.samples = static_cast<std::size_t>(c.params["samples"].get<std::int64_t>());
  config.time_steps = static_cast<std::size_t>(c.params["time-steps"].get<std::int64_t>());
  config.seed = c.seed;
  const InterpolantReport report = run_interpolant_demo(config);
  json j = report;
  write_json(command_dir(c) / "report.json", j);
  out << dump(j) << '\n';
  return report.passed() ? kExitOk : kExitAssertion;
}

int cmd_figures(const RunConfig& c, std::ostream& out) {
  const std::string which = c.params["which"].get<std::string>();
  if (which != "fig1" && which != "fig2" && which != "all") {
    throw UsageError("--which must be fig1, fig2 or all", usage_text());
  }
  const auto samples = static_cast<std::size_t>(c.params["samples"].get<std::int64_t>());
  const auto dir = command_dir(c);
  json result = json::object();
  if (which != "fig2") {
    const auto r = emit_figure_data(Figure::Fig1, dir / "fig1.csv", samples);
    result["fig1"] = {{"path", r.path.string()}, {"rows", r.rows}};
  }
  if (which != "fig1") {
    const auto r = emit_figure_data(Figure::Fig2, dir / "fig2.csv", samples);
    result["fig2"] = {{"path", r.path.string()}, {"rows", r.rows}, {"winding", *r.winding}};
  }
  write_json(dir / "figures.json", result);
  out << dump(result) << '\n';
  return kExitOk;
}

}  // namespace

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  set_thread_count(config.threads);
  try {
    if (config.command == "eval-field") return cmd_eval_field(config, out);
    if (config.command == "eval-flow") return cmd_eval_flow(config, out);
    if (config.command == "psi") return cmd_psi(config, out);
    if (config.command == "measure") return cmd_measure(config, out);
    if (config.command == "two-subsequence") return cmd_two_subsequence(config, out);
    if (config.command == "psi-gallery") return cmd_psi_gallery(config, out);
    if (config.command == "interpolant-demo") return cmd_interpolant_demo(config, out);
    if (config.command == "figures") return cmd_figures(config, out);
    throw UsageError("unknown command '" + config.command + "'", usage_text());
  } catch (const Error& e) {
    json report{{"error", e.kind()}, {"message", e.what()}, {"command", config.command}};
    err << report.dump() << '\n';
    if (dynamic_cast<const ExperimentError*>(&e) != nullptr) return kExitAssertion;
    return e.numerical() ? kExitNumerical : kExitUsage;
  } catch (const std::exception& e) {
    json report{{"error", "internal"}, {"message", e.what()}, {"command", config.command}};
    err << report.dump() << '\n';
    return kExitNumerical;
  }
}

int main_entry(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  RunConfig config;
  try {
    config = parse_args(argv);
  } catch (const HelpRequested& help) {
    out << help.text;
    return kExitOk;
  } catch (const UsageError& e) {
    err << json{{"error", "usage"}, {"message", e.what()}}.dump() << '\n' << e.usage();
    return kExitUsage;
  }
  return run(config, out, err);
}

}  // namespace roughflow::cli

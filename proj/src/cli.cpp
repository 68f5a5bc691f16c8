#include "farf/cli.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "farf/evalharness.hpp"

namespace farf {

namespace {

using nlohmann::json;

struct Overrides {
  std::string config_file;
  std::string data_file;
  std::optional<std::string> learner;
  std::optional<std::size_t> m;
  std::optional<double> alpha;
  std::optional<std::string> mode;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> window;
  std::optional<double> delta;
  std::optional<double> tie;
  std::optional<double> grace;
  std::optional<int> bins;
  std::optional<std::string> out;
  bool dump_predictions = false;
};

void add_run_flags(CLI::App& cmd, Overrides& o) {
  cmd.add_option("--config", o.config_file, "Run config JSON (flags override its values)");
  cmd.add_option("--data", o.data_file, "Dataset config JSON");
  cmd.add_option("--learner", o.learner, "farf | ht | rf");
  cmd.add_option("--m", o.m, "Ensemble size");
  cmd.add_option("--alpha", o.alpha, "Custom sampling ratio for unprotected positives");
  cmd.add_option("--mode", o.mode, "plain | fair | custom | oversample | overunder");
  cmd.add_option("--seed", o.seed, "Random seed");
  cmd.add_option("--window", o.window, "Instances per logged window");
  cmd.add_option("--delta", o.delta, "Hoeffding bound confidence");
  cmd.add_option("--tie", o.tie, "Tie threshold");
  cmd.add_option("--grace", o.grace, "Leaf weight between split attempts");
  cmd.add_option("--bins", o.bins, "Numeric histogram bins");
  cmd.add_option("--out", o.out, "Output directory");
  cmd.add_flag("--dump-predictions", o.dump_predictions, "Write per-instance predictions");
}

RunConfig resolve(const Overrides& o) {
  RunConfig c;
  if (!o.config_file.empty()) {
    std::ifstream in(o.config_file);
    if (!in) throw ConfigError("cannot open config '" + o.config_file + "'");
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw ConfigError("config '" + o.config_file + "': " + e.what());
    }
    c = run_config_from_json(j, std::filesystem::path(o.config_file).parent_path());
  }
  if (!o.data_file.empty()) c.dataset = load_dataset_config(o.data_file);
  if (o.learner) c.learner = parse_learner(*o.learner);
  if (o.m) c.ensemble_size = *o.m;
  if (o.alpha) c.alpha = *o.alpha;
  if (o.mode) c.mode = parse_sampling_mode(*o.mode);
  if (o.seed) c.seed = *o.seed;
  if (o.window) c.window = *o.window;
  if (o.delta) c.split.delta = *o.delta;
  if (o.tie) c.split.tie_threshold = *o.tie;
  if (o.grace) c.split.grace_period = *o.grace;
  if (o.bins) c.split.numeric_bins = *o.bins;
  if (o.out) c.out = *o.out;
  if (o.dump_predictions) c.dump_predictions = true;
  if (c.dataset.path.empty() && c.dataset.format == DatasetConfig::Format::kCsv)
    throw ConfigError("no dataset: pass --data or a config with a dataset");
  if (c.out.empty()) throw ConfigError("no output directory: pass --out");
  c.validate();
  return c;
}

void echo(const RunConfig& c, std::ostream& out) {
  const std::string text = run_config_to_json(c).dump(2) + "\n";
  out << text;
  std::filesystem::create_directories(c.out);
  std::ofstream(c.out / "config.json", std::ios::binary) << text;
}

void print_summary(const RunSummary& s, std::ostream& out) {
  out << "learner=" << s.learner << " mode=" << s.mode << " instances=" << s.instances << " disc%=" << s.disc_pct
      << " acc%=" << s.acc_pct << " kappa%=" << s.kappa_pct << " drifts=" << s.drifts
      << " replacements=" << s.replacements << "\n";
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + p.string() + "'");
  f << text;
}

std::string summary_row(const RunSummary& s) {
  std::ostringstream os;
  os.precision(17);
  os << s.instances << ',' << s.disc_pct << ',' << s.acc_pct << ',' << s.kappa_pct << ',' << s.drifts << ','
     << s.standbys_created << ',' << s.replacements;
  return os.str();
}

constexpr const char* kSummaryColumns = "instances,disc_pct,acc_pct,kappa_pct,drifts,standbys_created,replacements";

std::string alpha_dir(double a) {
  std::ostringstream os;
  os << "alpha_" << a;
  return os.str();
}

int cmd_run(const Overrides& o, std::ostream& out) {
  const RunConfig c = resolve(o);
  echo(c, out);
  const PrequentialLog log = run(c);
  write_run_outputs(c, log);
  print_summary(log.summary, out);
  return 0;
}

int cmd_sweep(const Overrides& o, std::vector<double> alphas, unsigned jobs, std::ostream& out) {
  RunConfig c = resolve(o);
  c.learner = LearnerKind::kFarf;
  echo(c, out);
  const LoadResult data = load_stream(c.dataset);
  const auto rows = sweep_alpha(c, alphas, data.instances, jobs);
  std::string csv = std::string("alpha,") + kSummaryColumns + "\n";
  for (const auto& [a, s] : rows) {
    std::ostringstream os;
    os << a;
    csv += os.str() + "," + summary_row(s) + "\n";
    write_text(c.out / alpha_dir(a) / "summary.json", summary_to_json(s).dump(2) + "\n");
    out << "alpha=" << a << " ";
    print_summary(s, out);
  }
  write_text(c.out / "sweep.csv", csv);
  return 0;
}

int cmd_ablate(const Overrides& o, unsigned jobs, std::ostream& out) {
  const RunConfig c = resolve(o);
  echo(c, out);
  const LoadResult data = load_stream(c.dataset);
  const auto rows = ablate(c, data.instances, jobs);
  std::string csv = std::string("variant,") + kSummaryColumns + "\n";
  for (const auto& r : rows) {
    csv += r.name + "," + summary_row(r.summary) + "\n";
    write_text(c.out / r.name / "summary.json", summary_to_json(r.summary).dump(2) + "\n");
    out << r.name << " ";
    print_summary(r.summary, out);
  }
  write_text(c.out / "ablation.csv", csv);
  return 0;
}

struct InferArgs {
  std::string csv;
  std::string sensitive;
  std::string sensitive_value;
  std::string class_attribute;
  std::string positive;
  std::string missing = "?";
  bool no_header = false;
  std::string out;
};

int cmd_infer(const InferArgs& a, std::ostream& out) {
  DatasetConfig d;
  d.path = std::filesystem::absolute(a.csv);
  d.header = !a.no_header;
  d.missing_token = a.missing;
  d.schema = infer_schema(d.path, d.header, d.missing_token, a.sensitive, a.sensitive_value, a.class_attribute,
                          a.positive);
  const std::string text = dataset_to_json(d).dump(2) + "\n";
  if (a.out.empty()) {
    out << text;
  } else {
    write_text(a.out, text);
    out << "wrote " << a.out << "\n";
  }
  return 0;
}

}  // namespace

int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fair and adaptive random forest for discriminated data streams", "farf"};
  app.require_subcommand(1);

  Overrides run_o;
  auto* run_cmd = app.add_subcommand("run", "Prequential run of one learner");
  add_run_flags(*run_cmd, run_o);

  Overrides sweep_o;
  std::vector<double> alphas{0.3, 0.6, 0.9, 1.2, 1.5};
  unsigned sweep_jobs = 0;
  auto* sweep_cmd = app.add_subcommand("sweep", "One run per alpha under the same seed");
  add_run_flags(*sweep_cmd, sweep_o);
  sweep_cmd->add_option("--alphas", alphas, "Comma-separated alpha grid")->delimiter(',');
  sweep_cmd->add_option("--jobs", sweep_jobs, "Parallel runs (0 = hardware threads)");

  Overrides ablate_o;
  unsigned ablate_jobs = 0;
  auto* ablate_cmd = app.add_subcommand("ablate", "Compare sampling strategies");
  add_run_flags(*ablate_cmd, ablate_o);
  ablate_cmd->add_option("--jobs", ablate_jobs, "Parallel runs (0 = hardware threads)");

  InferArgs infer;
  auto* infer_cmd = app.add_subcommand("infer-schema", "Write a dataset config with an inferred schema");
  infer_cmd->add_option("--csv", infer.csv, "Input CSV")->required();
  infer_cmd->add_option("--sensitive", infer.sensitive, "Sensitive attribute")->required();
  infer_cmd->add_option("--sensitive-value", infer.sensitive_value, "Protected value")->required();
  infer_cmd->add_option("--class", infer.class_attribute, "Class attribute")->required();
  infer_cmd->add_option("--positive", infer.positive, "Positive label")->required();
  infer_cmd->add_option("--missing", infer.missing, "Missing-value token");
  infer_cmd->add_flag("--no-header", infer.no_header, "First row is data");
  infer_cmd->add_option("--out", infer.out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "farf: " << e.what() << "\n" << app.help();
    return 2;
  }

  try {
    if (*run_cmd) return cmd_run(run_o, out);
    if (*sweep_cmd) return cmd_sweep(sweep_o, alphas, sweep_jobs, out);
    if (*ablate_cmd) return cmd_ablate(ablate_o, ablate_jobs, out);
    if (*infer_cmd) return cmd_infer(infer, out);
  } catch (const ConfigError& e) {
    err << "farf: config error: " << e.what() << "\n";
    return 2;
  } catch (const ArgumentError& e) {
    err << "farf: argument error: " << e.what() << "\n";
    return 2;
  } catch (const SchemaError& e) {
    err << "farf: schema error: " << e.what() << "\n";
    return 2;
  } catch (const LoadError& e) {
    err << "farf: load error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "farf: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace farf

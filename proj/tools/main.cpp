// Command-line driver: executes landscape plans and parameter sweeps,
// inspects states, and re-exports graphs.
//
// Exit codes: 0 success, 2 validation/usage error, 3 at least one
// sub-search diverged (artifacts are still written).

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ghisd/errors.hpp"
#include "ghisd/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitDiverged = 3;

struct RunResult {
  int exit_code = kExitOk;
  std::map<int, int> index_histogram;
  std::size_t nodes = 0;
  std::size_t edges = 0;
  std::size_t warnings = 0;
};

void apply_seed_label(ghisd::RunSpec& run, const std::string& seed_label) {
  if (seed_label.empty() || run.plan.empty()) return;
  ghisd::PlanDirective& first = run.plan.front();
  if (first.op == ghisd::DirectiveOp::kFindParent)
    first.seed = seed_label;
  else
    first.from = seed_label;
}

RunResult execute_run(const fs::path& config_path, const fs::path& out_dir, int threads_override,
                      const std::string& seed_label) {
  ghisd::RunSpec run = ghisd::load_run_spec(config_path);
  apply_seed_label(run, seed_label);
  if (threads_override > 0) run.threads = threads_override;

  ghisd::SystemPtr system = ghisd::make_system(run.system);
  const auto t0 = std::chrono::steady_clock::now();
  ghisd::LandscapeGraph graph =
      ghisd::build_landscape(*system, run.system, run.seeds, run.plan, run.search, run.symmetry,
                             ghisd::ExecPolicy{run.threads});
  const double wall_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  fs::create_directories(out_dir);
  ghisd::atomic_write(out_dir / "landscape.json",
                      ghisd::export_graph(graph, ghisd::GraphFormat::kJson));
  ghisd::atomic_write(out_dir / "landscape.dot",
                      ghisd::export_graph(graph, ghisd::GraphFormat::kDot));

  if (system->grid()) {
    fs::create_directories(out_dir / "states");
    for (const auto& node : graph.nodes()) {
      const fs::path base = out_dir / "states" / node.record.label;
      fs::path f64 = base;
      f64 += ".f64";
      fs::path tmp = f64;
      tmp += ".tmp";
      ghisd::write_state_f64(tmp, node.record.x);
      fs::rename(tmp, f64);
      fs::path pgm = base;
      pgm += ".pgm";
      ghisd::write_state_pgm(pgm, node.record.x);
    }
  }

  json manifest;
  manifest["command"] = "run";
  manifest["config_path"] = config_path.string();
  manifest["output_dir"] = out_dir.string();
  manifest["wall_time_s"] = wall_s;
  manifest["nodes"] = graph.node_count();
  manifest["edges"] = graph.edges().size();
  json per_index = json::object();
  for (const auto& [idx, count] : graph.index_histogram())
    per_index[std::to_string(idx)] = count;
  manifest["nodes_per_index"] = per_index;
  json warn = json::array();
  for (const auto& w : graph.warnings()) warn.push_back(w.context + ": " + w.message);
  manifest["warnings"] = warn;
  manifest["diverged_runs"] = graph.diverged_runs();
  json provenance = json::object();
  for (const auto& node : graph.nodes())
    provenance[node.record.label] = ghisd::to_string(node.provenance);
  manifest["node_provenance"] = provenance;
  ghisd::atomic_write(out_dir / "manifest.json", manifest.dump(2) + "\n");

  RunResult result;
  result.index_histogram = graph.index_histogram();
  result.nodes = graph.node_count();
  result.edges = graph.edges().size();
  result.warnings = graph.warnings().size();
  result.exit_code = graph.diverged_runs() > 0 ? kExitDiverged : kExitOk;
  return result;
}

int cmd_run(const fs::path& config, const fs::path& out, int threads,
            const std::string& seed_label) {
  try {
    RunResult result = execute_run(config, out, threads, seed_label);
    std::cout << "landscape: " << result.nodes << " nodes, " << result.edges << " edges, "
              << result.warnings << " warnings\n";
    return result.exit_code;
  } catch (const ghisd::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
}

int cmd_sweep(const fs::path& config, const std::string& param, const std::string& values_csv,
              const fs::path& out, int threads) {
  if (param != "kappa" && param != "gamma") {
    std::cerr << "error: sweep.param: must be kappa or gamma\n";
    return kExitValidation;
  }
  std::vector<std::string> tokens;
  {
    std::stringstream ss(values_csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (!tok.empty()) tokens.push_back(tok);
    }
  }
  if (tokens.empty()) {
    std::cerr << "error: sweep.values: empty value list\n";
    return kExitValidation;
  }

  std::string base_text;
  try {
    std::ifstream in(config);
    if (!in) throw ghisd::ValidationError("config", "cannot read " + config.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    base_text = ss.str();
    ghisd::parse_run_spec(base_text);  // validate the base config up front
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }

  for (const std::string& tok : tokens) {
    double v = 0;
    try {
      v = std::stod(tok);
    } catch (...) {
      std::cerr << "error: sweep.values: '" << tok << "' is not a number\n";
      return kExitValidation;
    }
    if (param == "kappa" && !(v > 0)) {
      std::cerr << "error: sweep.values: kappa must be > 0\n";
      return kExitValidation;
    }
    if (param == "gamma" && v < 0) {
      std::cerr << "error: sweep.values: gamma must be >= 0\n";
      return kExitValidation;
    }
  }

  fs::create_directories(out);
  struct Row {
    std::string value;
    bool ok = false;
    std::map<int, int> hist;
    std::size_t warnings = 0;
  };
  std::vector<Row> rows;
  bool any_failed = false;

  for (const std::string& tok : tokens) {
    Row row;
    row.value = tok;
    const fs::path sub = out / (param + "_" + tok);
    try {
      json doc = json::parse(base_text);
      doc["system"][param] = std::stod(tok);
      const fs::path patched = out / (param + "_" + tok + ".config.json");
      ghisd::atomic_write(patched, doc.dump(2) + "\n");
      RunResult r = execute_run(patched, sub, threads, "");
      row.ok = r.exit_code == kExitOk;
      row.hist = r.index_histogram;
      row.warnings = r.warnings;
      if (r.exit_code != kExitOk) any_failed = true;
    } catch (const std::exception& e) {
      std::cerr << "sweep " << param << "=" << tok << " failed: " << e.what() << "\n";
      row.ok = false;
      any_failed = true;
    }
    rows.push_back(std::move(row));
  }

  int max_index = 0;
  for (const auto& row : rows)
    for (const auto& [idx, n] : row.hist) max_index = std::max(max_index, idx);

  std::ostringstream csv;
  csv << "parameter_value";
  for (int i = 0; i <= max_index; ++i) csv << ",n_index" << i;
  csv << ",warnings\n";
  for (const auto& row : rows) {
    csv << row.value;
    for (int i = 0; i <= max_index; ++i) {
      auto it = row.hist.find(i);
      csv << "," << (it == row.hist.end() ? 0 : it->second);
    }
    csv << "," << (row.ok ? std::to_string(row.warnings) : "failed") << "\n";
  }
  ghisd::atomic_write(out / "summary.csv", csv.str());
  std::cout << csv.str();
  return any_failed ? kExitDiverged : kExitOk;
}

int cmd_inspect(const fs::path& config, const fs::path& state_path, int probes) {
  try {
    ghisd::RunSpec run = ghisd::load_run_spec(config);
    ghisd::SystemPtr system = ghisd::make_system(run.system);
    ghisd::StateVector state = ghisd::load_state_file(state_path);
    if (state.size() != system->dimension()) {
      std::cerr << "error: state has dimension " << state.size() << ", system needs "
                << system->dimension() << "\n";
      return kExitValidation;
    }
    if (system->grid()) state.grid = system->grid();

    const double residual =
        ghisd::weighted_norm(system->eval_field(state), system->inner_weight());
    const int k = std::min(probes > 0 ? probes : 8, system->dimension());
    ghisd::IndexReport report =
        ghisd::estimate_index(*system, state, k, run.search, /*require_stationary=*/false);

    std::cout << "residual " << residual << "\n";
    std::cout << "index " << report.index << "\n";
    std::cout << "zero-count " << report.zero_count << "\n";
    std::cout << "rayleigh";
    for (double r : report.rayleigh) std::cout << " " << ghisd::format_float(r);
    std::cout << "\n";
    if (report.possibly_truncated)
      std::cout << "note: all probed directions unstable; index may be truncated (raise --probes)\n";
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
}

int cmd_export(const fs::path& in_path, const std::string& format, const fs::path& out_path) {
  try {
    std::ifstream in(in_path);
    if (!in) throw ghisd::ValidationError("export.in", "cannot read " + in_path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    ghisd::LandscapeGraph graph = ghisd::import_graph_json(ss.str(), in_path.parent_path());
    ghisd::GraphFormat f;
    if (format == "json")
      f = ghisd::GraphFormat::kJson;
    else if (format == "dot")
      f = ghisd::GraphFormat::kDot;
    else
      throw ghisd::ValidationError("export.format", "must be json or dot");
    const std::string text = ghisd::export_graph(graph, f);
    if (out_path.empty())
      std::cout << text;
    else
      ghisd::atomic_write(out_path, text);
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"any-index saddle search and solution landscapes for dynamical systems"};
  app.require_subcommand(1);

  std::string config, out = "out", seed_label, param, values, state_file, in_file;
  std::string format = "json";
  std::string export_out;
  int threads = 0;
  int probes = 0;

  CLI::App* run = app.add_subcommand("run", "execute a landscape plan from a config file");
  run->add_option("--config", config, "JSON config file")->required();
  run->add_option("--out", out, "output directory");
  run->add_option("--threads", threads, "worker threads for per-direction searches");
  run->add_option("--seed-label", seed_label, "override the first directive's seed/from label");

  CLI::App* sweep = app.add_subcommand("sweep", "re-run the landscape over parameter values");
  sweep->add_option("--config", config, "JSON config file")->required();
  sweep->add_option("--param", param, "kappa or gamma")->required();
  sweep->add_option("--values", values, "comma-separated parameter values")->required();
  sweep->add_option("--out", out, "output directory");
  sweep->add_option("--threads", threads, "worker threads");

  CLI::App* inspect = app.add_subcommand("inspect", "report residual and index of a state file");
  inspect->add_option("--config", config, "JSON config file (system definition)")->required();
  inspect->add_option("--state", state_file, "state file (.f64 or .json)")->required();
  inspect->add_option("--probes", probes, "probe directions for index estimation");

  CLI::App* exp = app.add_subcommand("export", "re-export a landscape.json");
  exp->add_option("--in", in_file, "landscape.json produced by run")->required();
  exp->add_option("--format", format, "json or dot");
  exp->add_option("--out", export_out, "output file (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitValidation;
  }

  if (run->parsed()) return cmd_run(config, out, threads, seed_label);
  if (sweep->parsed()) return cmd_sweep(config, param, values, out, threads);
  if (inspect->parsed()) return cmd_inspect(config, state_file, probes);
  if (exp->parsed()) return cmd_export(in_file, format, export_out);
  return kExitValidation;
}

#include "ghisd/io.hpp"

#include <bit>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ghisd/errors.hpp"

namespace ghisd {

namespace {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "f64 dumps are defined little-endian");

std::string escape_json(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

void write_values_array(std::ostringstream& os, const Eigen::VectorXd& v) {
  os << '[';
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) os << ',';
    os << format_float(v[i]);
  }
  os << ']';
}

// Keys emitted in alphabetical order everywhere so output is byte-stable.
void write_config_object(std::ostringstream& os, const SearchConfig& c) {
  os << "{\"alpha\":" << format_float(c.alpha) << ",\"beta\":" << format_float(c.beta)
     << ",\"dimer_at_updated_x\":" << (c.dimer_at_updated_x ? "true" : "false")
     << ",\"dimer_l\":" << format_float(c.dimer_l)
     << ",\"divergence_bound\":" << format_float(c.divergence_bound)
     << ",\"downward_prose_directions\":" << (c.downward_prose_directions ? "true" : "false")
     << ",\"eps_perturb\":" << format_float(c.eps_perturb)
     << ",\"max_eigen_iters\":" << c.max_eigen_iters << ",\"max_iters\":" << c.max_iters
     << ",\"residual_tol\":" << format_float(c.residual_tol)
     << ",\"subspace_tol\":" << format_float(c.subspace_tol)
     << ",\"x_tol\":" << format_float(c.x_tol) << ",\"zero_tol\":" << format_float(c.zero_tol)
     << '}';
}

void write_system_object(std::ostringstream& os, const SystemSpec& s) {
  os << "{\"gamma\":" << format_float(s.gamma) << ",\"grid_n\":" << s.grid_n
     << ",\"kappa\":" << format_float(s.kappa) << ",\"kind\":\"" << to_string(s.kind) << '"'
     << ",\"reversed\":" << (s.reversed ? "true" : "false") << '}';
}

void write_state_object(std::ostringstream& os, const SaddleRecord& rec,
                        std::size_t inline_limit) {
  if (!rec.x.grid) {
    os << "{\"kind\":\"dense\",\"values\":";
    write_values_array(os, rec.x.values);
    os << '}';
    return;
  }
  const GridMeta& g = *rec.x.grid;
  if (static_cast<std::size_t>(rec.x.size()) > inline_limit) {
    os << "{\"cols\":" << g.cols << ",\"file\":\"states/" << escape_json(rec.label)
       << ".f64\",\"h\":" << format_float(g.spacing) << ",\"kind\":\"grid\",\"rows\":" << g.rows
       << '}';
  } else {
    os << "{\"cols\":" << g.cols << ",\"h\":" << format_float(g.spacing)
       << ",\"kind\":\"grid\",\"rows\":" << g.rows << ",\"values\":";
    write_values_array(os, rec.x.values);
    os << '}';
  }
}

std::string export_json_text(const LandscapeGraph& graph, std::size_t inline_limit) {
  std::ostringstream os;
  os << "{\n  \"config\": ";
  write_config_object(os, graph.config());
  os << ",\n  \"edges\": [";
  const auto& edges = graph.edges();
  for (std::size_t i = 0; i < edges.size(); ++i) {
    os << (i ? ",\n    " : "\n    ");
    os << "{\"child\":\"" << escape_json(edges[i].child) << "\",\"direction\":" << edges[i].direction
       << ",\"parent\":\"" << escape_json(edges[i].parent) << "\",\"sign\":" << edges[i].sign
       << '}';
  }
  os << (edges.empty() ? "]" : "\n  ]");
  os << ",\n  \"nodes\": [";
  const auto& nodes = graph.nodes();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const SaddleRecord& rec = nodes[i].record;
    os << (i ? ",\n    " : "\n    ");
    os << "{\"index\":" << rec.index << ",\"label\":\"" << escape_json(rec.label)
       << "\",\"residual\":" << format_float(rec.residual) << ",\"state\":";
    write_state_object(os, rec, inline_limit);
    os << ",\"zero_count\":" << rec.zero_count << '}';
  }
  os << (nodes.empty() ? "]" : "\n  ]");
  os << ",\n  \"system\": ";
  write_system_object(os, graph.system_spec());
  os << "\n}\n";
  return os.str();
}

std::string export_dot_text(const LandscapeGraph& graph) {
  std::ostringstream os;
  os << "digraph landscape {\n";
  for (const auto& n : graph.nodes()) {
    os << "  \"" << n.record.label << "\" [label=\"" << n.record.label << " (index "
       << n.record.index << ")\"];\n";
  }
  for (const auto& e : graph.edges()) {
    os << "  \"" << e.parent << "\" -> \"" << e.child << "\";\n";
  }
  os << "}\n";
  return os.str();
}

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw ValidationError(field, what);
}

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed)
      if (it.key() == a) ok = true;
    if (!ok) fail(where + "." + it.key(), "unknown field");
  }
}

double get_number(const json& obj, const std::string& where, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) fail(where + "." + key, "must be a number");
  return obj[key].get<double>();
}

std::int64_t get_int(const json& obj, const std::string& where, const char* key,
                     std::int64_t fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number_integer()) fail(where + "." + key, "must be an integer");
  return obj[key].get<std::int64_t>();
}

bool get_bool(const json& obj, const std::string& where, const char* key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_boolean()) fail(where + "." + key, "must be a boolean");
  return obj[key].get<bool>();
}

std::string get_string(const json& obj, const std::string& where, const char* key,
                       const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_string()) fail(where + "." + key, "must be a string");
  return obj[key].get<std::string>();
}

SystemSpec parse_system(const json& obj) {
  check_keys(obj, "system", {"kind", "kappa", "gamma", "grid_n", "reversed"});
  if (!obj.contains("kind")) fail("system.kind", "required");
  SystemSpec spec;
  spec.kind = system_kind_from_string(get_string(obj, "system", "kind", ""));
  spec.kappa = get_number(obj, "system", "kappa", spec.kappa);
  spec.gamma = get_number(obj, "system", "gamma", spec.gamma);
  spec.grid_n = static_cast<int>(get_int(obj, "system", "grid_n", spec.grid_n));
  spec.reversed = get_bool(obj, "system", "reversed", spec.reversed);
  spec.validate();
  return spec;
}

SearchConfig parse_search(const json& obj, SearchConfig cfg) {
  check_keys(obj, "search",
             {"alpha", "beta", "dimer_l", "eps_perturb", "residual_tol", "x_tol", "zero_tol",
              "subspace_tol", "max_iters", "max_eigen_iters", "divergence_bound",
              "dimer_at_updated_x", "downward_prose_directions"});
  cfg.alpha = get_number(obj, "search", "alpha", cfg.alpha);
  cfg.beta = get_number(obj, "search", "beta", cfg.beta);
  cfg.dimer_l = get_number(obj, "search", "dimer_l", cfg.dimer_l);
  cfg.eps_perturb = get_number(obj, "search", "eps_perturb", cfg.eps_perturb);
  cfg.residual_tol = get_number(obj, "search", "residual_tol", cfg.residual_tol);
  cfg.x_tol = get_number(obj, "search", "x_tol", cfg.x_tol);
  cfg.zero_tol = get_number(obj, "search", "zero_tol", cfg.zero_tol);
  cfg.subspace_tol = get_number(obj, "search", "subspace_tol", cfg.subspace_tol);
  cfg.max_iters = get_int(obj, "search", "max_iters", cfg.max_iters);
  cfg.max_eigen_iters = get_int(obj, "search", "max_eigen_iters", cfg.max_eigen_iters);
  cfg.divergence_bound = get_number(obj, "search", "divergence_bound", cfg.divergence_bound);
  cfg.dimer_at_updated_x = get_bool(obj, "search", "dimer_at_updated_x", cfg.dimer_at_updated_x);
  cfg.downward_prose_directions =
      get_bool(obj, "search", "downward_prose_directions", cfg.downward_prose_directions);
  cfg.validate();
  return cfg;
}

SymmetrySpec parse_symmetry(const json& obj, SymmetrySpec sym) {
  check_keys(obj, "symmetry", {"translations", "sign_flip"});
  if (obj.contains("translations")) {
    const std::string t = get_string(obj, "symmetry", "translations", "");
    if (t == "none")
      sym.translations = TranslationSymmetry::kNone;
    else if (t == "x")
      sym.translations = TranslationSymmetry::kXOnly;
    else if (t == "xy")
      sym.translations = TranslationSymmetry::kXY;
    else
      fail("symmetry.translations", "must be one of none|x|xy");
  }
  sym.sign_flip = get_bool(obj, "symmetry", "sign_flip", sym.sign_flip);
  return sym;
}

}  // namespace

std::string format_float(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::string export_graph(const LandscapeGraph& graph, GraphFormat format,
                         std::size_t inline_state_limit) {
  return format == GraphFormat::kJson ? export_json_text(graph, inline_state_limit)
                                      : export_dot_text(graph);
}

LandscapeGraph import_graph_json(const std::string& text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError("landscape", std::string("parse error: ") + e.what());
  }
  if (!doc.is_object()) fail("landscape", "top level must be an object");
  check_keys(doc, "landscape", {"config", "edges", "nodes", "system"});

  SystemSpec spec = parse_system(doc.at("system"));
  SearchConfig cfg = parse_search(doc.at("config"), SearchConfig{});
  const SymmetrySpec sym = make_system(spec)->symmetry();
  LandscapeGraph graph(spec, cfg, sym);

  for (const auto& jn : doc.at("nodes")) {
    check_keys(jn, "node", {"index", "label", "residual", "state", "zero_count"});
    SaddleRecord rec;
    rec.label = get_string(jn, "node", "label", "");
    rec.index = static_cast<int>(get_int(jn, "node", "index", 0));
    rec.zero_count = static_cast<int>(get_int(jn, "node", "zero_count", 0));
    rec.residual = get_number(jn, "node", "residual", 0.0);
    const json& js = jn.at("state");
    const std::string kind = get_string(js, "node.state", "kind", "");
    if (kind == "dense") {
      const auto& vals = js.at("values");
      rec.x.values.resize(static_cast<Eigen::Index>(vals.size()));
      for (std::size_t i = 0; i < vals.size(); ++i)
        rec.x.values[static_cast<Eigen::Index>(i)] = vals[i].get<double>();
    } else if (kind == "grid") {
      GridMeta g;
      g.rows = static_cast<int>(get_int(js, "node.state", "rows", 0));
      g.cols = static_cast<int>(get_int(js, "node.state", "cols", 0));
      g.spacing = get_number(js, "node.state", "h", 0.0);
      if (js.contains("file")) {
        StateVector loaded = read_state_f64(base_dir / js.at("file").get<std::string>());
        rec.x.values = std::move(loaded.values);
      } else {
        const auto& vals = js.at("values");
        rec.x.values.resize(static_cast<Eigen::Index>(vals.size()));
        for (std::size_t i = 0; i < vals.size(); ++i)
          rec.x.values[static_cast<Eigen::Index>(i)] = vals[i].get<double>();
      }
      if (rec.x.size() != static_cast<Eigen::Index>(g.rows) * g.cols)
        fail("node.state", "values size does not match rows*cols");
      rec.x.grid = g;
    } else {
      fail("node.state.kind", "must be dense|grid");
    }
    graph.restore_node(LandscapeNode{std::move(rec), NodeProvenance::kSeed});
  }
  for (const auto& je : doc.at("edges")) {
    check_keys(je, "edge", {"child", "direction", "parent", "sign"});
    LandscapeEdge e;
    e.parent = get_string(je, "edge", "parent", "");
    e.child = get_string(je, "edge", "child", "");
    e.direction = static_cast<int>(get_int(je, "edge", "direction", 0));
    e.sign = static_cast<int>(get_int(je, "edge", "sign", 1));
    graph.restore_edge(std::move(e));
  }
  return graph;
}

RunSpec parse_run_spec(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError("config", std::string("parse error: ") + e.what());
  }
  if (!doc.is_object()) fail("config", "top level must be an object");
  check_keys(doc, "config", {"system", "search", "symmetry", "seeds", "plan", "threads"});
  if (!doc.contains("system")) fail("config.system", "required");

  RunSpec run;
  run.system = parse_system(doc.at("system"));
  run.search = make_default_config(run.system);
  if (doc.contains("search")) run.search = parse_search(doc.at("search"), run.search);

  SystemPtr system = make_system(run.system);
  run.symmetry = system->symmetry();
  if (doc.contains("symmetry")) run.symmetry = parse_symmetry(doc.at("symmetry"), run.symmetry);
  if (run.symmetry.translations != TranslationSymmetry::kNone && !system->grid())
    fail("symmetry.translations", "only valid for grid systems");

  if (doc.contains("seeds")) {
    if (!doc["seeds"].is_array()) fail("seeds", "must be an array");
    for (std::size_t i = 0; i < doc["seeds"].size(); ++i) {
      const json& js = doc["seeds"][i];
      const std::string where = "seeds[" + std::to_string(i) + "]";
      check_keys(js, where, {"name", "values", "constant", "file"});
      Seed seed;
      seed.name = get_string(js, where, "name", "");
      if (seed.name.empty()) fail(where + ".name", "required");
      const int sources =
          int(js.contains("values")) + int(js.contains("constant")) + int(js.contains("file"));
      if (sources != 1) fail(where, "exactly one of values|constant|file required");
      if (js.contains("values")) {
        if (!js["values"].is_array()) fail(where + ".values", "must be an array");
        seed.state.values.resize(static_cast<Eigen::Index>(js["values"].size()));
        for (std::size_t v = 0; v < js["values"].size(); ++v)
          seed.state.values[static_cast<Eigen::Index>(v)] = js["values"][v].get<double>();
      } else if (js.contains("constant")) {
        seed.state = system->make_constant_state(get_number(js, where, "constant", 0.0));
      } else {
        seed.state = load_state_file(js["file"].get<std::string>());
      }
      if (seed.state.size() != system->dimension())
        fail(where, "seed dimension " + std::to_string(seed.state.size()) +
                        " != system dimension " + std::to_string(system->dimension()));
      if (system->grid()) seed.state.grid = system->grid();
      run.seeds.push_back(std::move(seed));
    }
  }

  if (doc.contains("plan")) {
    if (!doc["plan"].is_array()) fail("plan", "must be an array");
    for (std::size_t i = 0; i < doc["plan"].size(); ++i) {
      const json& jd = doc["plan"][i];
      const std::string where = "plan[" + std::to_string(i) + "]";
      check_keys(jd, where, {"op", "seed", "from", "as", "k", "probes", "max_index"});
      PlanDirective d;
      const std::string op = get_string(jd, where, "op", "");
      if (op == "find_parent")
        d.op = DirectiveOp::kFindParent;
      else if (op == "downward")
        d.op = DirectiveOp::kDownward;
      else if (op == "upward")
        d.op = DirectiveOp::kUpward;
      else
        fail(where + ".op", "must be find_parent|downward|upward");
      d.seed = get_string(jd, where, "seed", "");
      d.from = get_string(jd, where, "from", "");
      d.as = get_string(jd, where, "as", "parent");
      d.ghisd_k = static_cast<int>(get_int(jd, where, "k", 0));
      d.probes = static_cast<int>(get_int(jd, where, "probes", 0));
      d.max_index = static_cast<int>(get_int(jd, where, "max_index", 0));
      if (d.op == DirectiveOp::kFindParent && d.seed.empty()) fail(where + ".seed", "required");
      if (d.op != DirectiveOp::kFindParent && d.from.empty()) fail(where + ".from", "required");
      run.plan.push_back(std::move(d));
    }
  }

  run.threads = static_cast<int>(get_int(doc, "config", "threads", 1));
  if (run.threads < 1) fail("config.threads", "must be >= 1");
  return run;
}

RunSpec load_run_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config", "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_spec(ss.str());
}

void write_state_f64(const std::filesystem::path& path, const StateVector& state) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("state_file", "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(state.values.data()),
            static_cast<std::streamsize>(sizeof(double)) * state.values.size());
}

StateVector read_state_f64(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw ValidationError("state_file", "cannot read " + path.string());
  const std::streamsize bytes = in.tellg();
  if (bytes % sizeof(double) != 0)
    throw ValidationError("state_file", path.string() + " is not a whole number of float64s");
  in.seekg(0);
  StateVector s(Eigen::VectorXd(bytes / static_cast<std::streamsize>(sizeof(double))));
  in.read(reinterpret_cast<char*>(s.values.data()), bytes);
  return s;
}

void write_state_pgm(const std::filesystem::path& path, const StateVector& state) {
  if (!state.grid) throw ContractError("write_state_pgm: missing grid metadata");
  std::ostringstream os;
  os << "P5\n" << state.grid->cols << " " << state.grid->rows << "\n255\n";
  for (int i = 0; i < state.grid->rows; ++i) {
    for (int j = 0; j < state.grid->cols; ++j) {
      const double v = state.at(i, j);
      const double mapped = (v + 1.2) / 2.4 * 255.0;
      const int px = std::max(0, std::min(255, static_cast<int>(mapped + 0.5)));
      os.put(static_cast<char>(px));
    }
  }
  atomic_write(path, os.str());
}

StateVector load_state_file(const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".f64") return read_state_f64(path);
  if (ext == ".json") {
    std::ifstream in(path);
    if (!in) throw ValidationError("state_file", "cannot read " + path.string());
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ValidationError("state_file", std::string("parse error: ") + e.what());
    }
    if (!doc.is_array()) throw ValidationError("state_file", "JSON state must be a flat array");
    StateVector s(Eigen::VectorXd(static_cast<Eigen::Index>(doc.size())));
    for (std::size_t i = 0; i < doc.size(); ++i)
      s.values[static_cast<Eigen::Index>(i)] = doc[i].get<double>();
    return s;
  }
  throw ValidationError("state_file", "unsupported extension '" + ext + "' (use .f64 or .json)");
}

void atomic_write(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("output", "cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw ValidationError("output", "short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace ghisd

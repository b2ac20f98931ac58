#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include "symtyler/symtyler.hpp"

namespace symtyler::cli {
namespace {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Config schema: every subcommand accepts a JSON document (--config) whose
// keys mirror its flags; flags win over environment, environment over file.
// ---------------------------------------------------------------------------

enum class Kind { string, integer, real, boolean, int_list, string_list };

struct Key {
  std::string name;
  Kind kind;
  std::string help;
};

std::string flag_of(const std::string& key) {
  std::string f = "--" + key;
  std::replace(f.begin(), f.end(), '_', '-');
  return f;
}

std::vector<std::string> split(const std::string& text, char sep = ',') {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

long long parse_int(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  require(used == text.size() && !text.empty(), ErrorKind::InvalidArgument,
          "'" + key + "' expects an integer, got '" + text + "'");
  return v;
}

double parse_real(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  require(used == text.size() && !text.empty(), ErrorKind::InvalidArgument,
          "'" + key + "' expects a number, got '" + text + "'");
  return v;
}

json from_text(const Key& k, const std::string& text) {
  switch (k.kind) {
    case Kind::string: return text;
    case Kind::integer: return parse_int(k.name, text);
    case Kind::real: return parse_real(k.name, text);
    case Kind::boolean:
      if (text == "true" || text == "1") return true;
      if (text == "false" || text == "0") return false;
      throw Error(ErrorKind::InvalidArgument, "'" + k.name + "' expects true or false");
    case Kind::int_list: {
      json out = json::array();
      for (const auto& item : split(text)) out.push_back(parse_int(k.name, item));
      return out;
    }
    case Kind::string_list: {
      json out = json::array();
      for (const auto& item : split(text)) out.push_back(item);
      return out;
    }
  }
  return nullptr;
}

/// Checks a config-file value against the schema, normalizing list shorthands.
json from_document(const Key& k, const json& v) {
  const std::string bad = "config key '" + k.name + "' has the wrong type";
  switch (k.kind) {
    case Kind::string: require(v.is_string(), ErrorKind::InvalidArgument, bad); return v;
    case Kind::integer: require(v.is_number_integer(), ErrorKind::InvalidArgument, bad); return v;
    case Kind::real: require(v.is_number(), ErrorKind::InvalidArgument, bad); return v.get<double>();
    case Kind::boolean: require(v.is_boolean(), ErrorKind::InvalidArgument, bad); return v;
    case Kind::int_list:
      if (v.is_string()) return from_text(k, v.get<std::string>());
      require(v.is_array() && std::all_of(v.begin(), v.end(),
                                          [](const json& e) { return e.is_number_integer(); }),
              ErrorKind::InvalidArgument, bad);
      return v;
    case Kind::string_list:
      if (v.is_string()) return from_text(k, v.get<std::string>());
      require(v.is_array() && std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_string(); }),
              ErrorKind::InvalidArgument, bad);
      return v;
  }
  return v;
}

/// Flag storage for one subcommand plus its schema.
struct Command {
  std::string name;
  std::vector<Key> keys;
  json defaults = json::object();
  CLI::App* app = nullptr;
  std::string config_path;
  std::map<std::string, std::string> text;
  std::map<std::string, bool> flags;

  Command(std::string command, std::vector<Key> schema) : name(std::move(command)), keys(std::move(schema)) {}

  void attach(CLI::App& parent, const std::string& description) {
    app = parent.add_subcommand(name, description);
    app->add_option("--config", config_path, "JSON config document (flags win)");
    for (const auto& k : keys) {
      if (k.kind == Kind::boolean)
        app->add_flag(flag_of(k.name), flags[k.name], k.help);
      else
        app->add_option(flag_of(k.name), text[k.name], k.help);
    }
  }

  const Key* find(const std::string& key) const {
    for (const auto& k : keys)
      if (k.name == key) return &k;
    return nullptr;
  }

  /// defaults < config file < environment < flags
  json resolve() const {
    json cfg = defaults;
    if (!config_path.empty()) {
      const json doc = read_json_file(config_path);
      require(doc.is_object(), ErrorKind::InvalidArgument, "config document must be a JSON object");
      for (const auto& [key, value] : doc.items()) {
        const Key* k = find(key);
        require(k != nullptr, ErrorKind::InvalidArgument,
                "unknown config key '" + key + "' for '" + name + "'");
        cfg[key] = from_document(*k, value);
      }
    }
    auto env = [&](const char* var, const std::string& key) {
      const Key* k = find(key);
      if (!k) return;
      if (const char* v = std::getenv(var); v && *v) cfg[key] = from_text(*k, v);
    };
    env("SYMTYLER_OUTPUT_DIR", "output_dir");
    env("SYMTYLER_WORKERS", "workers");
    for (const auto& k : keys) {
      const CLI::Option* opt = app->get_option(flag_of(k.name));
      if (opt->count() == 0) continue;
      cfg[k.name] = k.kind == Kind::boolean ? json(flags.at(k.name)) : from_text(k, text.at(k.name));
    }
    return cfg;
  }
};

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

bool has(const json& cfg, const char* key) { return cfg.contains(key) && !cfg[key].is_null(); }

template <class T>
T need(const json& cfg, const char* key) {
  require(has(cfg, key), ErrorKind::InvalidArgument, std::string("missing required '") + key + "'");
  return cfg[key].get<T>();
}

struct ResolvedGroup {
  GroupSpec group;
  StructureInfo structure;
  std::string label;
};

/// Built-in kind + p, or a generator file closed and analysed numerically.
ResolvedGroup resolve_group(const json& cfg, std::optional<Index> p_hint = std::nullopt,
                            double discovery_tol = 1e-9) {
  if (has(cfg, "generators")) {
    const auto path = cfg["generators"].get<std::string>();
    auto [dim, gens] = generators_from_json(read_json_file(path));
    if (has(cfg, "p"))
      require(cfg["p"].get<Index>() == dim, ErrorKind::DimMismatch,
              "--p disagrees with the generator dimension " + std::to_string(dim));
    const auto max_order = static_cast<std::size_t>(cfg.value("max_order", 5040LL));
    GroupSpec g = close_group(gens, dim, max_order, "generators");
    const auto seed = cfg.value("seed", std::uint64_t{1});
    StructureInfo s = discover_structure(g, seed, discovery_tol);
    return {std::move(g), std::move(s), "generators:" + path};
  }
  const GroupKind kind = GroupKind::parse(cfg.value("group", std::string("trivial")));
  Index p = 0;
  if (has(cfg, "p"))
    p = cfg["p"].get<Index>();
  else if (p_hint)
    p = *p_hint;
  require(p >= 1, ErrorKind::InvalidArgument, "missing required 'p'");
  if (p_hint)
    require(p == *p_hint, ErrorKind::DimMismatch,
            "--p " + std::to_string(p) + " disagrees with sample dimension " + std::to_string(*p_hint));
  return {builtin_group(kind, p), builtin_structure(kind, p), kind.to_string()};
}

std::optional<Texture> parse_texture(const std::string& text) {
  const auto colon = text.find(':');
  const std::string base = text.substr(0, colon);
  const double param = colon == std::string::npos ? 0.0 : parse_real("texture", text.substr(colon + 1));
  std::optional<Texture> t;
  if (base == "cae") {
    require(colon == std::string::npos, ErrorKind::InvalidArgument, "cae texture takes no parameter");
    return std::nullopt;
  }
  if (base == "gaussian")
    t = Texture::gaussian();
  else if (base == "student_t")
    t = Texture::student_t(param);
  else if (base == "k_dist")
    t = Texture::k_dist(param);
  else
    throw Error(ErrorKind::InvalidArgument,
                "unknown texture '" + text + "' (cae, gaussian, student_t:nu, k_dist:shape)");
  t->validate();
  return t;
}

void write_output(const json& cfg, const std::string& text, std::ostream& out) {
  if (has(cfg, "output"))
    write_text_file(cfg["output"].get<std::string>(), text);
  else
    out << text;
}

std::string config_comment(const std::string& command, json cfg) {
  return "symtyler " + command + "\nconfig: " + cfg.dump();
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

int cmd_estimate(const json& cfg, std::ostream& out, std::ostream& err) {
  const SampleSet x = samples_from_json(read_json_file(need<std::string>(cfg, "input")));
  const std::string which = cfg.value("estimator", std::string("styler"));
  require(which == "tyler" || which == "styler", ErrorKind::InvalidArgument,
          "estimator must be tyler or styler, got '" + which + "'");
  EstimatorConfig ec;
  ec.tol = cfg.value("tol", ec.tol);
  ec.max_iter = static_cast<int>(cfg.value("max_iter", static_cast<long long>(ec.max_iter)));

  EstimatorReport report;
  std::string group_label = "trivial";
  if (which == "tyler") {
    if (has(cfg, "p"))
      require(cfg["p"].get<Index>() == x.dim(), ErrorKind::DimMismatch,
              "--p disagrees with sample dimension " + std::to_string(x.dim()));
    report = tyler_estimate(x, ec);
  } else {
    const ResolvedGroup rg = resolve_group(cfg, x.dim());
    group_label = rg.label;
    report = styler_estimate(x, rg.group, rg.structure, ec);
  }

  json doc = report_to_json(report);
  doc["estimator"] = which;
  doc["group"] = group_label;
  doc["p"] = x.dim();
  doc["n"] = x.size();
  doc["config"] = cfg;
  write_output(cfg, doc.dump(2) + "\n", out);

  if (has(cfg, "trace")) {
    std::ostringstream trace;
    write_comment(trace, config_comment("estimate", cfg));
    write_trace_csv(trace, report);
    write_text_file(cfg["trace"].get<std::string>(), trace.str());
  }
  if (!report.converged()) {
    err << "estimate: " << to_string(report.status) << " after " << report.iterations << " iterations"
        << (report.diagnostic.empty() ? "" : " (" + report.diagnostic + ")") << '\n';
    return kNotConverged;
  }
  return kOk;
}

int cmd_structure(const json& cfg, std::ostream& out, std::ostream& err) {
  std::optional<ResolvedGroup> rg;
  try {
    rg = resolve_group(cfg, std::nullopt, cfg.value("tol", 1e-9));
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::DegenerateSpectrum) throw;
    err << "error: " << e.what() << '\n'
        << "hint: the random projections were ambiguous at this tolerance; rerun with a different "
           "--seed (current "
        << cfg.value("seed", std::uint64_t{1}) << ")\n";
    return kValidation;
  }
  const StructureInfo& s = rg->structure;
  out << "group " << rg->label << "  p=" << s.dim() << "  |G|=" << rg->group.order() << "  m=" << s.m()
      << '\n';
  out << std::setw(4) << "i" << std::setw(6) << "p_i" << std::setw(6) << "s_i" << '\n';
  for (std::size_t i = 0; i < s.m(); ++i)
    out << std::setw(4) << i + 1 << std::setw(6) << s.components()[i].replication << std::setw(6)
        << s.components()[i].block_size << '\n';
  out << "rho = " << format_double(s.rho()) << '\n'
      << "delta = " << format_double(s.delta()) << '\n'
      << "min_samples = " << min_samples(s) << '\n';
  if (has(cfg, "output")) {
    json doc = structure_to_json(s);
    doc["group"] = rg->label;
    doc["order"] = rg->group.order();
    doc["min_samples"] = min_samples(s);
    doc["config"] = cfg;
    write_text_file(cfg["output"].get<std::string>(), doc.dump(2) + "\n");
  }
  return kOk;
}

int cmd_sample(const json& cfg, std::ostream& out, std::ostream&) {
  const ResolvedGroup rg = resolve_group(cfg);
  const auto n = need<long long>(cfg, "n");
  require(n >= 1, ErrorKind::InvalidArgument, "n must be positive");
  const auto seed = cfg.value("seed", std::uint64_t{1});
  const std::string shape = cfg.value("shape", std::string("random"));
  const Index p = rg.structure.dim();
  ShapeMatrix truth = ShapeMatrix::normalized(CMatrix::Identity(p, p));
  if (shape == "random")
    truth = random_invariant_shape(rg.structure, cfg.value("cond_target", 10.0), derive_seed(seed, 0));
  else
    require(shape == "identity", ErrorKind::InvalidArgument, "shape must be random or identity");
  const auto texture = parse_texture(cfg.value("texture", std::string("cae")));
  const SampleSet x = texture ? sample_elliptical(truth, *texture, n, seed) : sample_cae(truth, n, seed);
  json doc = samples_to_json(x);
  doc["config"] = cfg;
  write_output(cfg, doc.dump() + "\n", out);
  return kOk;
}

int cmd_bound(const json& cfg, std::ostream& out, std::ostream& err) {
  double rho = 0, delta = 0;
  Index p = 0;
  if (has(cfg, "rho") || has(cfg, "delta")) {
    rho = need<double>(cfg, "rho");
    delta = need<double>(cfg, "delta");
    p = need<Index>(cfg, "p");
  } else {
    const ResolvedGroup rg = resolve_group(cfg);
    rho = rg.structure.rho();
    delta = rg.structure.delta();
    p = rg.structure.dim();
  }
  CMatrix theta0 = CMatrix::Identity(p, p);
  if (has(cfg, "theta0")) {
    theta0 = matrix_from_json(read_json_file(cfg["theta0"].get<std::string>()));
    require(theta0.rows() == p && theta0.cols() == p, ErrorKind::DimMismatch,
            "theta0 must be " + std::to_string(p) + "x" + std::to_string(p));
  }
  const auto n = need<long long>(cfg, "n");
  require(!(has(cfg, "theta") && has(cfg, "target_failure")), ErrorKind::InvalidArgument,
          "give either --theta or --target-failure, not both");
  BoundInputs b = BoundInputs::make(theta0, rho, delta, n, cfg.value("theta", 0.0));

  json doc = {{"p", p}, {"n", n}, {"rho", rho}, {"delta", delta}, {"lambda_min", b.lambda_min},
              {"cos_phi0", b.cos_phi0}};
  if (!has(cfg, "theta")) {
    const double target = cfg.value("target_failure", 0.05);
    const auto theta = theta_for_failure(b, target);
    doc["target_failure"] = target;
    if (!theta) {
      b.theta = 0.0;
      const BoundResult floor = evaluate_bound(b);
      doc["theta"] = nullptr;
      doc["attainable"] = false;
      doc["concentration_term"] = floor.concentration_term;
      doc["config"] = cfg;
      write_output(cfg, doc.dump(2) + "\n", out);
      err << "bound: failure probability " << target << " is unattainable at n=" << n
          << "; the theta-independent term alone is " << format_double(floor.concentration_term) << '\n';
      return kValidation;
    }
    b.theta = *theta;
    doc["attainable"] = true;
  }
  const BoundResult r = evaluate_bound(b);
  doc["theta"] = b.theta;
  doc["error_bound"] = r.error_bound;
  doc["failure_prob"] = r.failure_prob;
  doc["deviation_term"] = r.deviation_term;
  doc["concentration_term"] = r.concentration_term;
  doc["config"] = cfg;
  write_output(cfg, doc.dump(2) + "\n", out);
  return kOk;
}

/// CSV of estimator,n,value rows; '#' lines are comments.
BaselineHook load_baseline(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::Io, "cannot open baseline '" + path + "'");
  auto table = std::make_shared<std::map<std::pair<std::string, int>, double>>();
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      require(line.rfind("estimator,n,value", 0) == 0, ErrorKind::InvalidArgument,
              "baseline header must be 'estimator,n,value'");
      continue;
    }
    const auto cells = split(line);
    require(cells.size() == 3, ErrorKind::InvalidArgument, "bad baseline row '" + line + "'");
    (*table)[{cells[0], static_cast<int>(parse_int("n", cells[1]))}] = parse_real("value", cells[2]);
  }
  return [table](EstimatorKind e, int n) -> std::optional<double> {
    auto it = table->find({std::string(to_string(e)), n});
    if (it == table->end()) return std::nullopt;
    return it->second;
  };
}

int cmd_simulate(const json& cfg, std::ostream& out, std::ostream& err, const std::atomic<bool>* cancel) {
  ExperimentSpec spec;
  spec.group = GroupKind::parse(need<std::string>(cfg, "group"));
  spec.p = need<Index>(cfg, "p");
  spec.n_grid = need<std::vector<int>>(cfg, "n_grid");
  spec.trials = static_cast<int>(cfg.value("trials", 200LL));
  spec.estimators.clear();
  for (const auto& e : cfg.value("estimators", json::array({"tyler", "styler"})))
    spec.estimators.push_back(parse_estimator(e.get<std::string>()));
  spec.texture = parse_texture(cfg.value("texture", std::string("cae")));
  spec.master_seed = cfg.value("seed", std::uint64_t{1});
  spec.cond_target = cfg.value("cond_target", spec.cond_target);
  spec.truth_per_trial = cfg.value("truth_per_trial", false);
  spec.tol = cfg.value("tol", spec.tol);
  spec.max_iter = static_cast<int>(cfg.value("max_iter", static_cast<long long>(spec.max_iter)));
  spec.validate();

  RunOptions options;
  options.workers = static_cast<int>(cfg.value("workers", 1LL));
  require(options.workers >= 1, ErrorKind::InvalidArgument, "workers must be at least 1");
  options.cancel = cancel;
  if (has(cfg, "baseline")) options.baseline = load_baseline(cfg["baseline"].get<std::string>());

  const fs::path dir = cfg.value("output_dir", std::string("."));
  std::error_code ec;
  fs::create_directories(dir, ec);
  require(!ec, ErrorKind::Io, "cannot create output directory '" + dir.string() + "'");

  // The CSVs must not depend on where or how wide the run was.
  json echo = cfg;
  echo.erase("workers");
  echo.erase("output_dir");
  json resolved = {{"group", spec.group.to_string()},
                   {"p", spec.p},
                   {"n_grid", spec.n_grid},
                   {"trials", spec.trials},
                   {"estimators", json::array()},
                   {"texture", spec.texture ? spec.texture->name() : "cae"},
                   {"seed", spec.master_seed},
                   {"cond_target", spec.cond_target},
                   {"truth_per_trial", spec.truth_per_trial},
                   {"tol", spec.tol},
                   {"max_iter", spec.max_iter}};
  for (auto e : spec.estimators) resolved["estimators"].push_back(std::string(to_string(e)));
  if (spec.texture && spec.texture->kind != Texture::Kind::gaussian)
    resolved["texture_param"] = spec.texture->param;
  echo["resolved"] = resolved;
  const std::string comment = config_comment("simulate", echo);

  const ExperimentResult result = run_experiment(spec, options);

  std::vector<std::string> written;
  auto emit = [&](const std::string& file, auto&& writer) {
    std::ostringstream text;
    writer(text);
    write_text_file((dir / file).string(), text.str());
    written.push_back(file);
  };
  emit("trials.csv", [&](std::ostream& o) { write_trials_csv(o, result, comment); });
  emit("summary.csv", [&](std::ostream& o) { write_summary_csv(o, result, comment); });
  if (cfg.value("wide", false))
    emit("summary_wide.csv", [&](std::ostream& o) { write_wide_summary_csv(o, result, comment); });
  emit("spec.json", [&](std::ostream& o) {
    json side = {{"config", cfg}, {"resolved", resolved}, {"complete", result.complete},
                 {"completed_units", result.completed_units}, {"total_units", result.total_units}};
    o << side.dump(2) << '\n';
  });
  {
    std::ostringstream manifest;
    manifest << "status: " << (result.complete ? "complete" : "incomplete") << '\n'
             << "completed_units: " << result.completed_units << '/' << result.total_units << '\n';
    for (const auto& f : written) manifest << "file: " << f << '\n';
    write_text_file((dir / "MANIFEST").string(), manifest.str());
  }

  out << std::setw(6) << "n" << std::setw(14) << "estimator" << std::setw(24) << "median_mse"
      << std::setw(8) << "fails" << '\n';
  for (const auto& row : result.summary)
    out << std::setw(6) << row.n << std::setw(14) << to_string(row.estimator) << std::setw(24)
        << format_double(row.median_mse) << std::setw(8) << row.fail_count << '\n';
  out << "wrote " << written.size() + 1 << " files to " << dir.string() << '\n';

  if (!result.complete) {
    err << "simulate: interrupted after " << result.completed_units << " of " << result.total_units
        << " units; partial results flushed\n";
    return kInterrupted;
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        const std::atomic<bool>* cancel) {
  CLI::App app{"Tyler and group-symmetric Tyler shape estimation", "symtyler"};
  app.require_subcommand(1);

  const Key group{"group", Kind::string,
                  "trivial, circulant, block_circulant:d, permutation, perhermitian, "
                  "proper_quaternion, equicorrelation:k"};
  const Key p{"p", Kind::integer, "dimension"};
  const Key gens{"generators", Kind::string, "JSON file of generator matrices (instead of --group)"};
  const Key seed{"seed", Kind::integer, "seed"};
  const Key output{"output", Kind::string, "output file (stdout when omitted)"};
  const Key texture{"texture", Kind::string, "cae, gaussian, student_t:nu or k_dist:shape"};

  Command estimate{"estimate",
                   {group, p, gens, seed,
                    {"input", Kind::string, "SampleSet JSON file"},
                    {"estimator", Kind::string, "tyler or styler"},
                    {"tol", Kind::real, "relative step tolerance"},
                    {"max_iter", Kind::integer, "iteration budget"},
                    {"max_order", Kind::integer, "closure cap for --generators"},
                    output,
                    {"trace", Kind::string, "per-iteration CSV"}}};
  Command simulate{"simulate",
                   {group, p, seed, texture,
                    {"n_grid", Kind::int_list, "ascending sample sizes, e.g. 2,4,8"},
                    {"trials", Kind::integer, "trials per n"},
                    {"estimators", Kind::string_list, "subset of tyler,styler,scm,scm_reynolds"},
                    {"cond_target", Kind::real, "condition number of random truths"},
                    {"truth_per_trial", Kind::boolean, "redraw the truth for every trial"},
                    {"tol", Kind::real, "estimator tolerance"},
                    {"max_iter", Kind::integer, "estimator iteration budget"},
                    {"output_dir", Kind::string, "directory for CSVs, sidecar and MANIFEST"},
                    {"workers", Kind::integer, "worker threads"},
                    {"wide", Kind::boolean, "also write summary_wide.csv"},
                    {"baseline", Kind::string, "CSV (estimator,n,value) overlaid in the summary"}}};
  Command structure{"structure",
                    {group, p, gens, seed,
                     {"tol", Kind::real, "eigenvalue clustering tolerance for discovery"},
                     {"max_order", Kind::integer, "closure cap for --generators"},
                     output}};
  Command sample{"sample",
                 {group, p, seed, texture,
                  {"n", Kind::integer, "number of samples"},
                  {"shape", Kind::string, "random (group-invariant) or identity"},
                  {"cond_target", Kind::real, "condition number of the random shape"},
                  output}};
  Command bound{"bound",
                {group, p,
                 {"rho", Kind::real, "sparsity factor (with --delta, instead of --group)"},
                 {"delta", Kind::real, "degrees-of-freedom factor"},
                 {"n", Kind::integer, "sample size"},
                 {"theta", Kind::real, "deviation parameter"},
                 {"target_failure", Kind::real, "solve for theta at this failure probability"},
                 {"theta0", Kind::string, "true shape matrix JSON (identity when omitted)"},
                 output}};

  estimate.attach(app, "Run Tyler or STyler on a SampleSet file");
  simulate.attach(app, "Monte Carlo MSE experiment");
  structure.attach(app, "Commutant block structure of a group");
  sample.attach(app, "Draw a seeded SampleSet");
  bound.attach(app, "Evaluate the high-probability error bound");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kValidation;
  }

  try {
    if (estimate.app->parsed()) return cmd_estimate(estimate.resolve(), out, err);
    if (simulate.app->parsed()) return cmd_simulate(simulate.resolve(), out, err, cancel);
    if (structure.app->parsed()) return cmd_structure(structure.resolve(), out, err);
    if (sample.app->parsed()) return cmd_sample(sample.resolve(), out, err);
    if (bound.app->parsed()) return cmd_bound(bound.resolve(), out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const json::exception& e) {
    err << "error: InvalidArgument: " << e.what() << '\n';
    return kValidation;
  }
  return kValidation;
}

}  // namespace symtyler::cli

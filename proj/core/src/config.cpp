#include "wclab/config.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

namespace wclab {

namespace {

using nlohmann::json;

class Issues {
 public:
  void add(const std::string& path, const std::string& msg) {
    items_.push_back(path + ": " + msg);
  }
  bool empty() const { return items_.empty(); }
  std::vector<std::string> take() { return std::move(items_); }

 private:
  std::vector<std::string> items_;
};

void reject_unknown_keys(const json& j, const std::string& path,
                         const std::set<std::string>& allowed, Issues& issues) {
  if (!j.is_object()) return;
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) issues.add(path + "." + key, "unknown key");
}

std::vector<std::int64_t> parse_int_vector(const json& j, const std::string& path,
                                           Issues& issues) {
  std::vector<std::int64_t> out;
  if (!j.is_array()) {
    issues.add(path, "expected an integer array");
    return out;
  }
  for (const auto& v : j) {
    if (!v.is_number_integer()) {
      issues.add(path, "expected integers");
      return {};
    }
    out.push_back(v.get<std::int64_t>());
  }
  return out;
}

GroupPtr parse_group(const json& j, const std::string& path, Issues& issues) {
  reject_unknown_keys(j, path, {"lattice_dim", "finite_table"}, issues);
  int dim = 0;
  if (j.contains("lattice_dim")) {
    if (!j["lattice_dim"].is_number_integer() || j["lattice_dim"].get<int>() < 0) {
      issues.add(path + ".lattice_dim", "expected a nonnegative integer");
      return nullptr;
    }
    dim = j["lattice_dim"].get<int>();
  }
  std::optional<FiniteGroup> fin;
  if (j.contains("finite_table") && !j["finite_table"].is_null()) {
    if (!j["finite_table"].is_array()) {
      issues.add(path + ".finite_table", "expected a nested integer array");
      return nullptr;
    }
    std::vector<std::vector<int>> table;
    for (const auto& row : j["finite_table"]) {
      std::vector<int> r;
      for (const auto& v : row) r.push_back(v.get<int>());
      table.push_back(std::move(r));
    }
    try {
      fin = FiniteGroup(std::move(table));
    } catch (const std::exception& e) {
      issues.add(path + ".finite_table", e.what());
      return nullptr;
    }
  }
  try {
    return std::make_shared<Group>(dim, std::move(fin));
  } catch (const std::exception& e) {
    issues.add(path, e.what());
    return nullptr;
  }
}

SubgroupPtr parse_subgroup(const json& j, const std::string& path,
                           const GroupPtr& g, Issues& issues) {
  reject_unknown_keys(j, path, {"lattice_basis", "finite_subset"}, issues);
  std::vector<std::vector<std::int64_t>> basis;
  if (j.contains("lattice_basis")) {
    if (!j["lattice_basis"].is_array()) {
      issues.add(path + ".lattice_basis", "expected an array of integer rows");
      return nullptr;
    }
    for (std::size_t i = 0; i < j["lattice_basis"].size(); ++i) {
      auto row = parse_int_vector(j["lattice_basis"][i],
                                  path + ".lattice_basis[" + std::to_string(i) + "]",
                                  issues);
      if (static_cast<int>(row.size()) != g->lattice_dim()) {
        issues.add(path + ".lattice_basis[" + std::to_string(i) + "]",
                   "row length must equal the lattice dimension");
        return nullptr;
      }
      basis.push_back(std::move(row));
    }
  }
  std::optional<std::vector<int>> subset;
  if (j.contains("finite_subset") && !j["finite_subset"].is_null()) {
    std::vector<int> s;
    for (const auto& v : j["finite_subset"]) s.push_back(v.get<int>());
    subset = std::move(s);
  }
  try {
    return std::make_shared<Subgroup>(g, std::move(basis), std::move(subset));
  } catch (const std::exception& e) {
    issues.add(path, e.what());
    return nullptr;
  }
}

Alphabet parse_alphabet(const json& j, const std::string& path, Issues& issues) {
  Alphabet a;
  if (!j.is_array()) {
    issues.add(path, "expected an array of weights");
    return Alphabet::coin();
  }
  for (const auto& v : j) a.weights.push_back(v.get<double>());
  try {
    a.validate();
  } catch (const std::exception& e) {
    issues.add(path, e.what());
    return Alphabet::coin();
  }
  return a;
}

Site parse_site(const json& j, const std::string& path, const GroupPtr& g,
                Issues& issues);

Site parse_site(const json& j, const std::string& path, const GroupPtr& g,
                Issues& issues) {
  if (!j.is_object() || !j.contains("kind")) {
    issues.add(path, "expected a site object with a kind");
    return Site::unit();
  }
  const std::string kind = j["kind"].get<std::string>();
  if (kind == "elem") {
    reject_unknown_keys(j, path, {"kind", "lattice", "finite"}, issues);
    GroupElement e;
    e.lattice = parse_int_vector(j.value("lattice", json::array()), path + ".lattice",
                                 issues);
    e.finite = j.value("finite", 0);
    return Site::of_elem(std::move(e));
  }
  if (kind == "coset") {
    reject_unknown_keys(j, path, {"kind", "residue", "finite_rep"}, issues);
    CosetId c;
    c.residue = parse_int_vector(j.value("residue", json::array()), path + ".residue",
                                 issues);
    c.finite_rep = j.value("finite_rep", 0);
    return Site::of_coset(std::move(c));
  }
  if (kind == "unit") {
    reject_unknown_keys(j, path, {"kind"}, issues);
    return Site::unit();
  }
  if (kind == "axis") {
    reject_unknown_keys(j, path, {"kind", "n"}, issues);
    return Site::of_axis(j.value("n", 0));
  }
  if (kind == "coset_axis") {
    reject_unknown_keys(j, path, {"kind", "n", "residue", "finite_rep"}, issues);
    CosetId c;
    c.residue = parse_int_vector(j.value("residue", json::array()), path + ".residue",
                                 issues);
    c.finite_rep = j.value("finite_rep", 0);
    return Site::of_coset_axis(j.value("n", 0), std::move(c));
  }
  if (kind == "pair") {
    reject_unknown_keys(j, path, {"kind", "factor", "sub"}, issues);
    if (!j.contains("sub")) {
      issues.add(path + ".sub", "pair sites need a sub site");
      return Site::unit();
    }
    return Site::of_pair(j.value("factor", 0),
                         parse_site(j["sub"], path + ".sub", g, issues));
  }
  issues.add(path + ".kind", "unknown site kind '" + kind + "'");
  return Site::unit();
}

std::vector<Observable::Probe> parse_probes(const json& j, const std::string& path,
                                            const GroupPtr& g, Issues& issues) {
  std::vector<Observable::Probe> probes;
  if (!j.is_array() || j.empty()) {
    issues.add(path, "expected a nonempty probe array");
    return probes;
  }
  for (std::size_t i = 0; i < j.size(); ++i) {
    const json& pj = j[i];
    const std::string pp = path + "[" + std::to_string(i) + "]";
    reject_unknown_keys(pj, pp, {"site", "inner", "thresholds", "cardinality"},
                        issues);
    Observable::Probe p;
    if (!pj.contains("site")) {
      issues.add(pp, "probe needs a site");
      continue;
    }
    p.site = parse_site(pj["site"], pp + ".site", g, issues);
    if (pj.contains("inner"))
      for (std::size_t k = 0; k < pj["inner"].size(); ++k)
        p.inner_path.push_back(parse_site(pj["inner"][k],
                                          pp + ".inner[" + std::to_string(k) + "]",
                                          g, issues));
    if (pj.contains("thresholds"))
      for (const auto& t : pj["thresholds"]) p.thresholds.push_back(t.get<double>());
    p.cardinality = pj.value("cardinality", 0);
    probes.push_back(std::move(p));
  }
  return probes;
}

ActionPtr parse_action(const json& j, const std::string& path, const GroupPtr& g,
                       const SubgroupPtr& h, Issues& issues) {
  if (!j.is_object() || !j.contains("kind")) {
    issues.add(path, "expected an action object with a kind");
    return nullptr;
  }
  const std::string kind = j["kind"].get<std::string>();
  try {
    if (kind == "bernoulli") {
      reject_unknown_keys(j, path, {"kind", "weights", "on_subgroup"}, issues);
      Alphabet a = j.contains("weights")
                       ? parse_alphabet(j["weights"], path + ".weights", issues)
                       : Alphabet::coin();
      if (j.value("on_subgroup", false)) return bernoulli_shift_subgroup(h, a);
      return bernoulli_shift(g, a);
    }
    if (kind == "generalized_shift") {
      reject_unknown_keys(j, path, {"kind", "weights"}, issues);
      Alphabet a = j.contains("weights")
                       ? parse_alphabet(j["weights"], path + ".weights", issues)
                       : Alphabet::coin();
      return generalized_coset_shift(h, a);
    }
    if (kind == "trivial") {
      reject_unknown_keys(j, path, {"kind", "weights", "on_subgroup"}, issues);
      Alphabet a = j.contains("weights")
                       ? parse_alphabet(j["weights"], path + ".weights", issues)
                       : Alphabet::coin();
      if (j.value("on_subgroup", false)) return trivial_action_subgroup(h, a);
      return trivial_action(g, a);
    }
    if (kind == "restrict") {
      reject_unknown_keys(j, path, {"kind", "base"}, issues);
      ActionPtr base = parse_action(j.at("base"), path + ".base", g, h, issues);
      if (!base) return nullptr;
      return restrict_action(base, h);
    }
    if (kind == "coinduced") {
      reject_unknown_keys(j, path, {"kind", "cell"}, issues);
      ActionPtr cell = parse_action(j.at("cell"), path + ".cell", g, h, issues);
      if (!cell) return nullptr;
      return coinduce(cell, h);
    }
    if (kind == "product") {
      reject_unknown_keys(j, path, {"kind", "factors"}, issues);
      const json& f = j.at("factors");
      if (!f.is_array() || f.size() != 2) {
        issues.add(path + ".factors", "expected exactly two factors");
        return nullptr;
      }
      ActionPtr a = parse_action(f[0], path + ".factors[0]", g, h, issues);
      ActionPtr b = parse_action(f[1], path + ".factors[1]", g, h, issues);
      if (!a || !b) return nullptr;
      return product_action(a, b);
    }
    if (kind == "quotient_lift") {
      reject_unknown_keys(j, path, {"kind", "base"}, issues);
      const GroupPtr q = h->quotient_group();
      ActionPtr base = parse_action(j.at("base"), path + ".base", q, h, issues);
      if (!base) return nullptr;
      return quotient_lift(base, h);
    }
    if (kind == "finite") {
      reject_unknown_keys(j, path, {"kind", "table", "gen_images", "finite_images"},
                          issues);
      std::vector<std::vector<int>> table;
      for (const auto& row : j.at("table")) {
        std::vector<int> r;
        for (const auto& v : row) r.push_back(v.get<int>());
        table.push_back(std::move(r));
      }
      FiniteHom hom;
      for (const auto& v : j.value("gen_images", json::array()))
        hom.lattice_gen_images.push_back(v.get<int>());
      for (const auto& v : j.value("finite_images", json::array()))
        hom.finite_images.push_back(v.get<int>());
      return finite_action(g, FiniteGroup(std::move(table)), std::move(hom));
    }
    if (kind == "gaussian") {
      reject_unknown_keys(j, path, {"kind", "kernel", "radius"}, issues);
      const json& kj = j.at("kernel");
      reject_unknown_keys(kj, path + ".kernel", {"kind", "lambda", "variance"},
                          issues);
      const std::string kk = kj.value("kind", "white_noise");
      KernelPtr kernel;
      if (kk == "white_noise")
        kernel = white_noise_kernel(group_sites(g), kj.value("variance", 1.0));
      else if (kk == "exp_decay")
        kernel = exp_decay_kernel(g, kj.value("lambda", 0.5));
      else {
        issues.add(path + ".kernel.kind", "unknown kernel kind '" + kk + "'");
        return nullptr;
      }
      std::vector<Site> window;
      for (const auto& e : g->box(j.value("radius", 1)))
        window.push_back(Site::of_elem(e));
      return gaussian_shift(kernel, g, std::move(window));
    }
  } catch (const std::exception& e) {
    issues.add(path, e.what());
    return nullptr;
  }
  issues.add(path + ".kind", "unknown action kind '" + kind + "'");
  return nullptr;
}

Window parse_window(const json& j, const std::string& path, const GroupPtr& g,
                    Issues& issues) {
  Window w;
  if (j.is_object() && j.contains("radius")) {
    reject_unknown_keys(j, path, {"radius"}, issues);
    return box_window(*g, j["radius"].get<int>());
  }
  if (j.is_object() && j.contains("elements")) {
    reject_unknown_keys(j, path, {"elements"}, issues);
    for (std::size_t i = 0; i < j["elements"].size(); ++i) {
      GroupElement e;
      e.lattice = parse_int_vector(j["elements"][i],
                                   path + ".elements[" + std::to_string(i) + "]",
                                   issues);
      e.finite = g->has_finite() ? g->finite().identity() : 0;
      w.push_back(std::move(e));
    }
    return w;
  }
  issues.add(path, "expected {\"radius\": r} or {\"elements\": [...]}");
  return w;
}

const std::set<std::string> kKinds = {
    "theorem_main",      "corollary_cind", "shift_identification",
    "lemma9_product",    "theorem_gaussian", "tiling_defect"};

}  // namespace

ConfigError::ConfigError(std::vector<std::string> issues)
    : std::runtime_error("config validation failed:\n  " +
                         [&issues] {
                           std::string s;
                           for (std::size_t i = 0; i < issues.size(); ++i) {
                             if (i) s += "\n  ";
                             s += issues[i];
                           }
                           return s;
                         }()),
      issues_(std::move(issues)) {}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError({std::string("$: ") + e.what()});
  }
  Issues issues;
  ExperimentConfig cfg;

  reject_unknown_keys(j, "$",
                      {"seed", "samples", "workers", "group", "subgroup",
                       "experiment", "output"},
                      issues);

  if (!j.contains("seed") || !j["seed"].is_number_unsigned())
    issues.add("$.seed", "a nonnegative integer seed is mandatory");
  else
    cfg.seed = j["seed"].get<std::uint64_t>();

  if (j.contains("samples")) {
    if (!j["samples"].is_number_integer() || j["samples"].get<std::int64_t>() < 1)
      issues.add("$.samples", "expected a positive integer");
    else
      cfg.samples = j["samples"].get<std::int64_t>();
  }
  if (j.contains("workers")) {
    if (!j["workers"].is_number_integer() || j["workers"].get<int>() < 1)
      issues.add("$.workers", "expected a positive integer");
    else
      cfg.workers = j["workers"].get<int>();
  }

  cfg.group = parse_group(j.value("group", json::object()), "$.group", issues);
  if (cfg.group)
    cfg.subgroup = parse_subgroup(j.value("subgroup", json::object()), "$.subgroup",
                                  cfg.group, issues);

  if (!j.contains("experiment") || !j["experiment"].is_object()) {
    issues.add("$.experiment", "an experiment stanza is mandatory");
  } else if (cfg.group && cfg.subgroup) {
    const json& e = j["experiment"];
    reject_unknown_keys(e, "$.experiment",
                        {"kind", "epsilon", "window", "l1_window", "action",
                         "observable", "marker", "alphabet", "rotation_angles",
                         "bins", "pilot_samples"},
                        issues);
    cfg.kind = e.value("kind", "");
    if (!kKinds.count(cfg.kind))
      issues.add("$.experiment.kind", "unknown experiment kind '" + cfg.kind + "'");
    cfg.epsilon = e.value("epsilon", 0.05);
    if (!(cfg.epsilon > 0.0))
      issues.add("$.experiment.epsilon", "epsilon must be positive");
    cfg.bins = e.value("bins", 4);
    cfg.pilot_samples = e.value("pilot_samples", std::int64_t{4000});

    if (e.contains("window"))
      cfg.window = parse_window(e["window"], "$.experiment.window", cfg.group, issues);
    else
      cfg.window = box_window(*cfg.group, 1);
    if (e.contains("l1_window"))
      cfg.l1_window =
          parse_window(e["l1_window"], "$.experiment.l1_window", cfg.group, issues);

    if (e.contains("alphabet"))
      cfg.alphabet = parse_alphabet(e["alphabet"], "$.experiment.alphabet", issues);

    if (e.contains("marker")) {
      const json& m = e["marker"];
      reject_unknown_keys(m, "$.experiment.marker", {"pattern", "radius"}, issues);
      MarkerRule rule;
      for (const auto& v : m.value("pattern", json::array()))
        rule.pattern.push_back(v.get<int>());
      rule.radius = m.value("radius", 0);
      try {
        rule.validate();
        cfg.marker = std::move(rule);
      } catch (const std::exception& ex) {
        issues.add("$.experiment.marker", ex.what());
      }
    }

    if (e.contains("rotation_angles"))
      for (const auto& v : e["rotation_angles"])
        cfg.rotation_angles.push_back(v.get<double>());

    if (e.contains("action"))
      cfg.action = parse_action(e["action"], "$.experiment.action", cfg.group,
                                cfg.subgroup, issues);
    if (e.contains("observable")) {
      reject_unknown_keys(e["observable"], "$.experiment.observable", {"probes"},
                          issues);
      if (e["observable"].contains("probes"))
        cfg.phi_probes = parse_probes(e["observable"]["probes"],
                                      "$.experiment.observable.probes", cfg.group,
                                      issues);
      else
        issues.add("$.experiment.observable.probes", "probes are mandatory");
    }

    const bool needs_action =
        cfg.kind == "theorem_main" || cfg.kind == "corollary_cind";
    if (needs_action && !cfg.action)
      issues.add("$.experiment.action", "this experiment kind needs an action");
    if (needs_action && cfg.phi_probes.empty())
      issues.add("$.experiment.observable", "this experiment kind needs an observable");
    if (cfg.kind == "theorem_gaussian" &&
        static_cast<int>(cfg.rotation_angles.size()) != cfg.group->lattice_dim())
      issues.add("$.experiment.rotation_angles",
                 "need one rotation angle per lattice generator");
  }

  if (j.contains("output")) {
    reject_unknown_keys(j["output"], "$.output", {"dir"}, issues);
    cfg.out_dir = j["output"].value("dir", "out");
  }

  if (!issues.empty()) throw ConfigError(issues.take());
  cfg.resolved = j;
  return cfg;
}

// ---------------------------------------------------------------------------
// Execution

namespace {

json stage_to_json(const Stage& s) {
  json j;
  j["name"] = s.name;
  j["pass"] = s.pass;
  j["metrics"] = json(s.metrics);
  if (!s.note.empty()) j["note"] = s.note;
  return j;
}

void write_distributions(const ExperimentReport& rep,
                         const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  for (const auto& [name, dist] : rep.distributions) {
    std::ofstream os(dir / (name + ".csv"), std::ios::binary);
    dist.to_csv(os);
  }
}

}  // namespace

json report_to_json(const ExperimentReport& rep, const ExperimentConfig& cfg) {
  json j;
  j["kind"] = rep.kind;
  j["pass"] = rep.pass;
  j["seed"] = cfg.seed;
  j["samples"] = cfg.samples;
  j["epsilon"] = cfg.epsilon;
  j["stages"] = json::array();
  for (const auto& s : rep.stages) j["stages"].push_back(stage_to_json(s));
  json cfg_echo = cfg.resolved;
  cfg_echo["seed"] = cfg.seed;
  cfg_echo["samples"] = cfg.samples;
  j["config"] = std::move(cfg_echo);
  j["version"] = "wclab-0.1.0";
  return j;
}

int run_experiment(ExperimentConfig cfg, const RunFlags& flags, std::ostream& log) {
  if (flags.seed) cfg.seed = *flags.seed;
  if (flags.samples) cfg.samples = *flags.samples;
  if (flags.workers) cfg.workers = *flags.workers;
  if (const char* env = std::getenv("WCLAB_OUT")) cfg.out_dir = env;
  if (flags.out_dir) cfg.out_dir = *flags.out_dir;

  if (flags.verify_invariants)
    return run_invariant_suites(log, cfg.seed) ? 0 : 1;

  ExperimentReport rep;
  if (cfg.kind == "theorem_main" || cfg.kind == "corollary_cind") {
    TheoremInstance inst;
    inst.group = cfg.group;
    inst.subgroup = cfg.subgroup;
    inst.action = cfg.action;
    inst.phi_probes = cfg.phi_probes;
    inst.window = cfg.window;
    inst.epsilon = cfg.epsilon;
    inst.samples = cfg.samples;
    inst.seed = cfg.seed;
    inst.workers = cfg.workers;
    inst.marker_alphabet = cfg.alphabet;
    inst.marker = cfg.marker;
    inst.pilot_samples = cfg.pilot_samples;
    rep = cfg.kind == "theorem_main" ? run_theorem_main(inst)
                                     : run_corollary_cind(inst);
  } else if (cfg.kind == "shift_identification") {
    ShiftIdentificationInstance inst;
    inst.subgroup = cfg.subgroup;
    inst.alphabet = cfg.alphabet;
    inst.window = cfg.window;
    inst.samples = cfg.samples;
    inst.seed = cfg.seed;
    inst.workers = cfg.workers;
    rep = verify_shift_identification(inst);
  } else if (cfg.kind == "lemma9_product") {
    Lemma9Instance inst;
    inst.subgroup = cfg.subgroup;
    inst.alphabet_a = cfg.alphabet;
    inst.alphabet_b = cfg.alphabet;
    inst.window = cfg.window;
    inst.samples = cfg.samples;
    inst.seed = cfg.seed;
    inst.workers = cfg.workers;
    rep = run_lemma9_product(inst);
  } else if (cfg.kind == "theorem_gaussian") {
    GaussianInstance inst;
    inst.subgroup = cfg.subgroup;
    inst.rotation_angles = cfg.rotation_angles;
    inst.window = cfg.window;
    inst.l1_window = cfg.l1_window.empty() ? generator_ball_window(*cfg.group)
                                           : cfg.l1_window;
    inst.epsilon = cfg.epsilon;
    inst.bins = cfg.bins;
    inst.samples = cfg.samples;
    inst.seed = cfg.seed;
    inst.workers = cfg.workers;
    rep = run_theorem_gaussian(inst);
  } else if (cfg.kind == "tiling_defect") {
    rep.kind = "tiling_defect";
    const GroupPtr q = cfg.subgroup->quotient_group();
    ActionPtr b = bernoulli_shift(q, cfg.alphabet);
    const Window fq = generator_ball_window(*q);
    MarkerRule rule;
    Stage cal;
    cal.name = "marker_calibration";
    if (cfg.marker) {
      rule = *cfg.marker;
      cal.note = "fixed rule from the config";
    } else {
      const MarkerCalibration mc =
          calibrate_marker_rule(b, cfg.alphabet, fq, cfg.epsilon,
                                chain(cfg.seed, 0xca11), cfg.pilot_samples,
                                cfg.workers);
      rule = mc.rule;
      cal.pass = mc.achieved;
      cal.metrics["pilot_fraction"] = mc.pilot_fraction;
    }
    cal.metrics["pattern_length"] = static_cast<double>(rule.pattern.size());
    cal.metrics["radius"] = rule.radius;
    rep.stages.push_back(std::move(cal));

    Stage full;
    full.name = "equivariance";
    const LabelingReport lr = equivariance_defect(b, rule, fq, cfg.samples,
                                                  chain(cfg.seed, 0xe1), cfg.workers);
    full.metrics["fraction"] = lr.fraction;
    full.metrics["halfwidth"] = lr.halfwidth;
    full.metrics["bottoms"] = static_cast<double>(lr.bottoms);
    full.pass = lr.fraction >= 1.0 - cfg.epsilon;
    rep.stages.push_back(std::move(full));
    rep.pass = rep.stages[0].pass && rep.stages[1].pass;
  } else {
    throw std::runtime_error("unhandled experiment kind: " + cfg.kind);
  }

  namespace fs = std::filesystem;
  const fs::path out(cfg.out_dir);
  fs::create_directories(out);
  {
    std::ofstream os(out / "report.json", std::ios::binary);
    os << report_to_json(rep, cfg).dump(2) << "\n";
  }
  write_distributions(rep, out / "distributions");

  log << "experiment: " << rep.kind << "\n";
  for (const auto& s : rep.stages) {
    log << "  [" << (s.pass ? "PASS" : "FAIL") << "] " << s.name;
    for (const auto& [k, v] : s.metrics) log << "  " << k << "=" << v;
    if (!s.note.empty()) log << "  (" << s.note << ")";
    log << "\n";
  }
  log << (rep.pass ? "RESULT: pass" : "RESULT: fail") << "\n";
  return rep.pass ? 0 : 1;
}

}  // namespace wclab

#include "cli.hpp"

#include <chrono>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "hanf/corpus.hpp"
#include "hanf/errors.hpp"
#include "hanf/eval.hpp"
#include "hanf/formula.hpp"
#include "hanf/hnf.hpp"
#include "hanf/sphere.hpp"
#include "hanf/structure.hpp"
#include "json.hpp"

namespace hanf::cli {

namespace {

using Json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  if (!out) throw IoError("cannot write " + path);
}

/// FNV-1a over every input file in order, each prefixed by its length.
class Digest {
 public:
  void add(const std::string& bytes) {
    mix(std::to_string(bytes.size()) + ":");
    mix(bytes);
  }
  std::string hex() const {
    std::ostringstream ss;
    ss << "fnv1a64:" << std::hex << std::setw(16) << std::setfill('0') << h_;
    return ss.str();
  }

 private:
  void mix(const std::string& s) {
    for (unsigned char c : s) h_ = (h_ ^ c) * 0x100000001b3ull;
  }
  std::uint64_t h_ = 0xcbf29ce484222325ull;
};

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

/// Parses `x=3,y=0`. A variable may appear once.
Assignment parse_assignment(const std::string& text) {
  Assignment asg;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == item.size()) {
      throw CLI::ValidationError("--assign", "expected name=index, got '" + item + "'");
    }
    const auto name = item.substr(0, eq);
    const auto value = item.substr(eq + 1);
    if (value.find_first_not_of("0123456789") != std::string::npos || value.size() > 9) {
      throw CLI::ValidationError("--assign", "bad element index '" + value + "'");
    }
    if (!asg.emplace(var(name), static_cast<Element>(std::stoul(value))).second) {
      throw CLI::ValidationError("--assign", "variable " + name + " assigned twice");
    }
  }
  return asg;
}

Json names(const std::vector<Var>& vs) {
  Json out = Json::array();
  for (auto v : vs) out.push_back(var_name(v));
  return out;
}

Json metrics_of(const Formula& f) {
  const auto size = formula_size(f);
  Json m;
  m["hanf_atoms"] = hanf_atom_count(f);
  m["max_radius"] = max_radius(f);
  m["max_threshold"] = max_threshold(f);
  m["ast_size"] = size.ast;
  m["expanded_size"] = size.expanded;
  return m;
}

Json budget_json(const EquivBudget& b) {
  Json j;
  j["exhaustive_max_size"] = b.exhaustive_max_size;
  j["samples"] = b.sample_count;
  j["sample_min_size"] = b.sample_min_size;
  j["sample_max_size"] = b.sample_max_size;
  j["seed"] = b.seed;
  return j;
}

std::string print_assignment(const Assignment& asg) {
  std::vector<std::pair<std::string, Element>> items;
  for (const auto& [v, e] : asg) items.emplace_back(var_name(v), e);
  std::sort(items.begin(), items.end());
  std::string out;
  for (const auto& [n, e] : items) {
    if (!out.empty()) out += ',';
    out += n + "=" + std::to_string(e);
  }
  return out;
}

struct Streams {
  std::ostream& out;
  std::ostream& err;
};

// ---------------------------------------------------------------- normalize

struct NormalizeArgs {
  std::string sig, formula, out, report;
  std::uint32_t degree = 1;
  std::size_t budget_spheres = EnumerationBudget{}.max_spheres;
  std::uint32_t budget_size = EnumerationBudget{}.max_carrier;
  std::size_t budget_disjuncts = NormalizationConfig{}.max_disjuncts;
  bool trace = false;
  bool timing = false;
  bool pretty = false;
};

int cmd_normalize(const NormalizeArgs& a, Streams io) {
  const auto t0 = Clock::now();
  const auto sig_text = read_file(a.sig);
  const auto formula_text = read_file(a.formula);
  Digest digest;
  digest.add(sig_text);
  digest.add(formula_text);

  Json report;
  report["command"] = "normalize";
  report["input"]["digest"] = digest.hex();

  const auto sig = parse_signature(sig_text);
  const auto phi = parse_formula(formula_text, sig);
  const auto parse_seconds = seconds_since(t0);
  report["input"]["free_variables"] = names(free_variables(phi));
  report["input"]["quantifier_rank"] = quantifier_rank(phi);
  report["input"]["ast_size"] = formula_size(phi).ast;

  NormalizationConfig cfg;
  cfg.f = a.degree;
  cfg.spheres.max_spheres = a.budget_spheres;
  cfg.spheres.max_carrier = a.budget_size;
  cfg.max_disjuncts = a.budget_disjuncts;
  if (a.trace) cfg.trace = &io.err;
  report["config"]["degree"] = cfg.f;
  report["config"]["budget_spheres"] = cfg.spheres.max_spheres;
  report["config"]["budget_size"] = cfg.spheres.max_carrier;
  report["config"]["budget_disjuncts"] = cfg.max_disjuncts;

  Normalizer normalizer(sig, cfg);
  const auto t1 = Clock::now();
  auto finish = [&](int code) {
    Json elims = Json::array();
    for (const auto& e : normalizer.stats().eliminations) {
      Json j;
      j["context_size"] = e.context_size;
      j["input_radius"] = e.input_radius;
      j["output_radius"] = e.output_radius;
      j["outer_spheres"] = e.outer_spheres;
      j["disjuncts"] = e.disjuncts;
      j["atoms_in"] = e.atoms_in;
      j["atoms_out"] = e.atoms_out;
      if (a.timing) j["seconds"] = e.seconds;
      elims.push_back(std::move(j));
    }
    report["eliminations"] = std::move(elims);
    report["base_cases"] = normalizer.stats().base_cases;
    if (a.timing) {
      report["timing"]["parse_seconds"] = parse_seconds;
      report["timing"]["normalize_seconds"] = seconds_since(t1);
      report["timing"]["total_seconds"] = seconds_since(t0);
    }
    const auto text = dump(report);
    if (a.report.empty()) {
      io.out << text;
    } else {
      write_file(a.report, text);
    }
    return code;
  };

  HnfFormula psi;
  try {
    psi = normalizer.normalize(phi);
  } catch (const BudgetExceeded& e) {
    report["status"] = "budget_exceeded";
    report["error"] = e.what();
    report["partial"] = e.partial();
    io.err << "hanfc: budget exceeded: " << e.what() << "\n";
    return finish(kBudgetExceeded);
  }

  write_file(a.out, print_formula(psi.formula, a.pretty) + "\n");

  const auto q = normalizer.stats().eliminations.size();
  std::uint64_t bound = 1;
  for (std::size_t i = 0; i < q; ++i) bound *= 3;
  report["status"] = "ok";
  report["output"]["context"] = names(psi.context);
  report["output"]["metrics"] = metrics_of(psi.formula);
  report["checks"]["radius_bound"]["eliminations"] = q;
  report["checks"]["radius_bound"]["bound"] = bound;
  report["checks"]["radius_bound"]["holds"] = max_radius(psi.formula) <= bound;
  return finish(kOk);
}

// --------------------------------------------------------------------- eval

struct EvalArgs {
  std::string sig, structure, formula, assign;
  std::string engine = "auto";
};

int cmd_eval(const EvalArgs& a, Streams io) {
  const auto sig = parse_signature(read_file(a.sig));
  const auto structure = parse_structure(read_file(a.structure), sig);
  const auto phi = parse_formula(read_file(a.formula), sig);
  const auto asg = parse_assignment(a.assign);
  for (auto v : free_variables(phi)) {
    if (!asg.count(v)) throw Error("free variable " + var_name(v) + " has no assignment");
  }
  bool value = false;
  auto hnf = as_hnf(phi);
  if (a.engine == "hnf" && !hnf) throw Error("formula is not in Hanf normal form");
  if (a.engine != "fo" && hnf) {
    value = eval_hnf(structure, asg, *hnf);
  } else {
    value = eval_fo(structure, asg, phi);
  }
  io.out << (value ? "true" : "false") << "\n";
  return kOk;
}

// -------------------------------------------------------------------- equiv

struct EquivArgs {
  std::string sig, a, b, report, counterexample;
  std::uint32_t degree = 1;
  EquivBudget budget;
};

int cmd_equiv(const EquivArgs& a, Streams io) {
  const auto sig_text = read_file(a.sig);
  const auto a_text = read_file(a.a);
  const auto b_text = read_file(a.b);
  Digest digest;
  digest.add(sig_text);
  digest.add(a_text);
  digest.add(b_text);
  const auto sig = parse_signature(sig_text);
  const auto lhs = parse_formula(a_text, sig);
  const auto rhs = parse_formula(b_text, sig);
  const auto verdict = check_f_equiv(lhs, rhs, sig, a.degree, a.budget);
  const bool equivalent = verdict.status == EquivStatus::Equivalent;

  Json report;
  report["command"] = "equiv";
  report["input"]["digest"] = digest.hex();
  report["config"]["degree"] = a.degree;
  report["config"]["budget"] = budget_json(a.budget);
  report["verdict"] = equivalent ? "Equivalent" : "Counterexample";
  report["structures_checked"] = verdict.structures_checked;
  report["assignments_checked"] = verdict.assignments_checked;

  io.out << report["verdict"].get<std::string>() << "\n";
  if (!equivalent) {
    const auto text = print_structure(*verdict.structure);
    report["counterexample"]["assignment"] = print_assignment(verdict.assignment);
    report["counterexample"]["structure"] = text;
    io.out << "# assignment " << print_assignment(verdict.assignment) << "\n" << text;
    if (!a.counterexample.empty()) write_file(a.counterexample, text);
  }
  if (!a.report.empty()) write_file(a.report, dump(report));
  return equivalent ? kOk : kCounterexample;
}

// ------------------------------------------------------------------ spheres

struct SpheresArgs {
  std::string sig;
  std::uint32_t radius = 1, centers = 1, degree = 1;
  std::size_t budget_spheres = EnumerationBudget{}.max_spheres;
  bool full = false;
};

int cmd_spheres(const SpheresArgs& a, Streams io) {
  const auto sig = parse_signature(read_file(a.sig));
  EnumerationBudget budget;
  budget.max_spheres = a.budget_spheres;
  const auto spheres = enumerate_spheres(sig, a.radius, a.centers, a.degree, budget);
  for (const auto& s : spheres) {
    if (a.full) {
      io.out << print_sphere(s) << "\n";
    } else {
      io.out << canonical_form(s) << "\n";
    }
  }
  return kOk;
}

// ---------------------------------------------------------------- histogram

struct HistogramArgs {
  std::string sig, structure;
  std::uint32_t radius = 1;
  std::size_t cap = 1;
};

int cmd_histogram(const HistogramArgs& a, Streams io) {
  const auto sig = parse_signature(read_file(a.sig));
  const auto structure = parse_structure(read_file(a.structure), sig);
  for (const auto& [code, count] : sphere_histogram(structure, a.radius, a.cap)) {
    io.out << code << " " << count << "\n";
  }
  return kOk;
}

// ---------------------------------------------------------------------- gen

struct GenArgs {
  std::string kind;
  std::uint32_t size = 3;
  std::vector<std::uint32_t> heights;
  std::vector<std::string> colors;
  std::optional<std::uint64_t> seed;
  std::string out, sig_out;
};

int cmd_gen(const GenArgs& a, Streams io) {
  std::optional<Structure> s;
  if (a.kind == "cycle") {
    s = make_cycle(a.size);
  } else {
    if (a.heights.empty()) throw CLI::ValidationError("--height", "required for " + a.kind);
    if (a.kind == "tree" && a.heights.size() != 1) {
      throw CLI::ValidationError("--height", "a tree takes one height");
    }
    std::vector<TreeSpec> specs;
    for (std::size_t i = 0; i < a.heights.size(); ++i) {
      TreeSpec spec;
      spec.height = a.heights[i];
      if (a.seed) {
        spec.coloring = random_coloring(*a.seed + i);
      } else if (i < a.colors.size()) {
        std::set<std::string> addrs;
        std::stringstream ss(a.colors[i]);
        std::string addr;
        while (std::getline(ss, addr, '.')) {
          if (addr == "-") continue;
          if (addr == "r") addr.clear();
          if (addr.find_first_not_of("01") != std::string::npos) {
            throw CLI::ValidationError("--color", "bad node address '" + addr + "'");
          }
          addrs.insert(addr);
        }
        spec.coloring = color_addresses(std::move(addrs));
      }
      specs.push_back(std::move(spec));
    }
    s = a.kind == "tree" ? make_tree(specs[0]) : make_forest(specs);
  }
  const auto text = print_structure(*s);
  if (a.out.empty()) {
    io.out << text;
  } else {
    write_file(a.out, text);
  }
  if (!a.sig_out.empty()) write_file(a.sig_out, print_signature(s->signature()));
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Streams io{out, err};
  CLI::App app{"Compile first-order formulas into Hanf normal form", "hanfc"};
  app.require_subcommand(1);
  std::function<int()> action;

  NormalizeArgs na;
  auto* normalize = app.add_subcommand("normalize", "Compile a formula into Hanf normal form");
  normalize->add_option("--sig", na.sig, "Signature file")->required();
  normalize->add_option("--formula", na.formula, "Formula file")->required();
  normalize->add_option("--degree", na.degree, "Degree bound f")->required();
  normalize->add_option("--out", na.out, "Output HNF file")->required();
  normalize->add_option("--report", na.report, "Write the JSON report here instead of stdout");
  normalize->add_option("--budget-spheres", na.budget_spheres, "Cap on spheres per enumeration")
      ->check(CLI::PositiveNumber);
  normalize->add_option("--budget-size", na.budget_size, "Cap on sphere carrier size")
      ->check(CLI::PositiveNumber);
  normalize->add_option("--budget-disjuncts", na.budget_disjuncts,
                        "Cap on disjuncts per elimination")
      ->check(CLI::PositiveNumber);
  normalize->add_flag("--trace", na.trace, "One line per construction step on stderr");
  normalize->add_flag("--timing", na.timing, "Add wall-clock timings to the report");
  normalize->add_flag("--pretty", na.pretty, "One And/Or child per line");
  normalize->callback([&] { action = [&] { return cmd_normalize(na, io); }; });

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "Evaluate a formula on a structure");
  eval->add_option("--sig", ea.sig, "Signature file")->required();
  eval->add_option("--structure", ea.structure, "Structure file")->required();
  eval->add_option("--formula", ea.formula, "Formula file")->required();
  eval->add_option("--assign", ea.assign, "Assignment, e.g. x=3,y=0");
  eval->add_option("--engine", ea.engine, "fo, hnf or auto")
      ->check(CLI::IsMember({"auto", "fo", "hnf"}));
  eval->callback([&] { action = [&] { return cmd_eval(ea, io); }; });

  EquivArgs qa;
  auto* equiv = app.add_subcommand("equiv", "Bounded f-equivalence check of two formulas");
  equiv->add_option("--sig", qa.sig, "Signature file")->required();
  equiv->add_option("--a", qa.a, "First formula file")->required();
  equiv->add_option("--b", qa.b, "Second formula file")->required();
  equiv->add_option("--degree", qa.degree, "Degree bound f")->required();
  equiv->add_option("--exhaustive-size", qa.budget.exhaustive_max_size,
                    "Check every structure up to this size");
  equiv->add_option("--samples", qa.budget.sample_count, "Number of sampled structures");
  equiv->add_option("--sample-min-size", qa.budget.sample_min_size)->check(CLI::PositiveNumber);
  equiv->add_option("--sample-max-size", qa.budget.sample_max_size)->check(CLI::PositiveNumber);
  equiv->add_option("--seed", qa.budget.seed, "Seed for sampled structures");
  equiv->add_option("--jobs", qa.budget.jobs, "Worker threads")->check(CLI::PositiveNumber);
  equiv->add_option("--report", qa.report, "Write a JSON report");
  equiv->add_option("--counterexample", qa.counterexample,
                    "Write the counterexample structure file");
  equiv->callback([&] { action = [&] { return cmd_equiv(qa, io); }; });

  SpheresArgs sa;
  auto* spheres = app.add_subcommand("spheres", "List spheres up to isomorphism");
  spheres->add_option("--sig", sa.sig, "Signature file")->required();
  spheres->add_option("--radius", sa.radius, "Radius d")->required()->check(CLI::PositiveNumber);
  spheres->add_option("--centers", sa.centers, "Number of centers")
      ->required()
      ->check(CLI::PositiveNumber);
  spheres->add_option("--degree", sa.degree, "Degree bound f")->required();
  spheres->add_option("--budget-spheres", sa.budget_spheres, "Cap on the sphere count")
      ->check(CLI::PositiveNumber);
  spheres->add_flag("--full", sa.full, "Print sphere blocks instead of canonical codes");
  spheres->callback([&] { action = [&] { return cmd_spheres(sa, io); }; });

  HistogramArgs ha;
  auto* histogram = app.add_subcommand("histogram", "Tally the d-spheres of a structure");
  histogram->add_option("--sig", ha.sig, "Signature file")->required();
  histogram->add_option("--structure", ha.structure, "Structure file")->required();
  histogram->add_option("--radius", ha.radius, "Radius d")->required()->check(CLI::PositiveNumber);
  histogram->add_option("--cap", ha.cap, "Truncate counts here")->check(CLI::PositiveNumber);
  histogram->callback([&] { action = [&] { return cmd_histogram(ha, io); }; });

  GenArgs ga;
  auto* gen = app.add_subcommand("gen", "Generate a test structure");
  gen->add_option("kind", ga.kind, "cycle, tree or forest")
      ->required()
      ->check(CLI::IsMember({"cycle", "tree", "forest"}));
  gen->add_option("--size", ga.size, "Cycle length");
  gen->add_option("--height", ga.heights, "Tree height, repeated for forests")->delimiter(',');
  gen->add_option("--color", ga.colors,
                  "U-nodes per tree as dot-separated addresses, 'r' for the root, '-' for none")
      ->delimiter(',');
  gen->add_option("--seed", ga.seed, "Random U-coloring");
  gen->add_option("--out", ga.out, "Structure file (stdout when absent)");
  gen->add_option("--sig-out", ga.sig_out, "Also write the signature file");
  gen->callback([&] { action = [&] { return cmd_gen(ga, io); }; });

  std::vector<std::string> argv_store{"hanfc"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
    return action();
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::Error& e) {
    app.exit(e, out, err);
    return kUsage;
  } catch (const IoError& e) {
    err << "hanfc: " << e.what() << "\n";
    return kIoError;
  } catch (const ParseError& e) {
    err << "hanfc: parse error: " << e.what() << "\n";
    return kParseError;
  } catch (const BudgetExceeded& e) {
    err << "hanfc: budget exceeded: " << e.what() << "\n";
    if (!e.partial().empty()) err << "hanfc: partial: " << e.partial() << "\n";
    return kBudgetExceeded;
  } catch (const Error& e) {
    err << "hanfc: " << e.what() << "\n";
    return kInvalidInput;
  }
}

}  // namespace hanf::cli

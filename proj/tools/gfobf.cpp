// gfobf: generate, verify and attack GF(2^m) multipliers whose reduction
// modulus is camouflaged among several candidate polynomials.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "gfobf/attack.hpp"
#include "gfobf/explore.hpp"
#include "gfobf/rng.hpp"

using namespace gfobf;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;   // verification or attack failure
constexpr int kExitUsage = 2;    // usage / config error

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DesignConfig {
  unsigned m = 0;
  Poly true_poly;
  std::vector<Poly> obf_polys;
  bool optimize_design = true;
  std::uint64_t seed = 1;
  std::vector<bool> invert;
  CostModel model;
  std::string module_name;
};

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in.good()) throw UsageError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw UsageError(path + ": " + e.what());
  }
  return j;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out.good()) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in.good()) throw UsageError("cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

CostModel model_from_json(const json& j) {
  CostModel m;
  const auto get = [&](const char* key, double& slot) {
    if (j.contains(key)) slot = j.at(key).get<double>();
  };
  get("area_and", m.area_and);
  get("area_or", m.area_or);
  get("area_not", m.area_not);
  get("area_xor", m.area_xor);
  get("delay_and", m.delay_and);
  get("delay_or", m.delay_or);
  get("delay_not", m.delay_not);
  get("delay_xor", m.delay_xor);
  return m;
}

DesignConfig parse_config(const std::string& path) {
  const json j = load_json(path);
  static const std::vector<std::string> known = {
      "m",         "true_poly", "obfuscation_polys", "optimize",
      "seed",      "invert_keys", "cost_model",      "module_name"};
  for (const auto& [key, value] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw UsageError("config: unknown field '" + key + "'");
  if (!j.contains("m") || !j.contains("true_poly"))
    throw UsageError("config: 'm' and 'true_poly' are required");

  DesignConfig cfg;
  try {
    cfg.m = j.at("m").get<unsigned>();
    cfg.true_poly = Poly::parse(j.at("true_poly").get<std::string>());
    for (const auto& s :
         j.value("obfuscation_polys", std::vector<std::string>{}))
      cfg.obf_polys.push_back(Poly::parse(s));
    cfg.optimize_design = j.value("optimize", true);
    cfg.seed = j.value("seed", std::uint64_t{1});
    for (bool b : j.value("invert_keys", std::vector<bool>{}))
      cfg.invert.push_back(b);
    if (j.contains("cost_model")) cfg.model = model_from_json(j["cost_model"]);
    cfg.module_name =
        j.value("module_name", "gfmult_m" + std::to_string(cfg.m));
  } catch (const json::exception& e) {
    throw UsageError(std::string("config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("config: ") + e.what());
  }

  if (cfg.m < 2) throw UsageError("config: m must be >= 2");
  if (cfg.true_poly.degree() != static_cast<int>(cfg.m))
    throw UsageError("config: true_poly degree does not match m");
  for (const Poly& p : cfg.obf_polys) {
    if (p == cfg.true_poly)
      throw UsageError("config: true_poly listed among obfuscation_polys");
    if (p.degree() != static_cast<int>(cfg.m))
      throw UsageError("config: obfuscation polynomial degree mismatch: " +
                       p.to_string());
  }
  return cfg;
}

PolyFilter filter_from_name(const std::string& name) {
  if (name == "all") return PolyFilter::all;
  if (name == "trinomial_pentanomial") return PolyFilter::trinomial_pentanomial;
  if (name == "nist") return PolyFilter::nist_shape;
  throw UsageError("unknown filter '" + name + "'");
}

std::vector<unsigned> parse_list(const std::string& csv) {
  std::vector<unsigned> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ','))
    out.push_back(static_cast<unsigned>(std::stoul(item)));
  if (out.empty()) throw UsageError("empty list");
  return out;
}

struct BuiltDesign {
  ObfMatrix matrix;
  Netlist netlist;
  CostReport report;
};

BuiltDesign build_design(const DesignConfig& cfg) {
  ChainOptions opts;
  opts.invert = cfg.invert;
  BuiltDesign d{obfuscate_chain(cfg.true_poly, cfg.obf_polys, cfg.m, opts),
                {},
                {}};
  if (cfg.optimize_design) d.matrix = optimize(d.matrix);
  const SumVector sums =
      gen_structure(FieldSpec::make(cfg.true_poly)).sums;
  d.netlist = lower(d.matrix, sums);
  d.report = cost(d.netlist, cfg.model);
  d.report.delta_count = d.matrix.mux_count();
  d.report.reduced_delta_count = d.matrix.fused_count();
  return d;
}

json keyspec_json(const DesignConfig& cfg, const ObfMatrix& mx) {
  json j;
  j["m"] = cfg.m;
  j["key_bits"] = mx.key.rounds;
  j["key_names"] = mx.key.names;
  json invert = json::array();
  json true_key = json::array();
  for (unsigned r = 0; r < mx.key.rounds; ++r) {
    invert.push_back(mx.key.invert.empty() ? false : (bool)mx.key.invert[r]);
    true_key.push_back(mx.key.true_key[r] ? 1 : 0);
  }
  j["invert"] = invert;
  j["true_key"] = true_key;  // index i = round i+1
  json classes = json::array();
  for (const Poly& p : mx.key.class_polys) classes.push_back(p.to_string());
  j["classes"] = classes;
  j["class_map"] = mx.key.class_map;
  return j;
}

int cmd_build(const std::string& config_path, const std::string& out_dir) {
  const DesignConfig cfg = parse_config(config_path);
  const BuiltDesign d = build_design(cfg);

  fs::create_directories(out_dir);
  const fs::path out(out_dir);

  if (d.netlist.locked())
    write_file(out / "design.locked.v",
               emit_verilog(d.netlist, cfg.module_name));
  write_file(out / "design.resolved.v",
             emit_verilog_resolved(d.netlist, d.matrix.key.true_key,
                                   cfg.module_name));
  if (d.netlist.locked())
    write_file(out / "keyspec.json", keyspec_json(cfg, d.matrix).dump(2) + "\n");
  write_file(out / "cost.json", d.report.to_json());

  json report;
  report["m"] = cfg.m;
  report["true_poly"] = cfg.true_poly.to_string();
  json obf = json::array();
  for (const Poly& p : cfg.obf_polys) obf.push_back(p.to_string());
  report["obfuscation_polys"] = obf;
  report["optimized"] = cfg.optimize_design;
  report["seed"] = cfg.seed;
  report["module_name"] = cfg.module_name;
  report["key_bits"] = d.netlist.key_bits;
  report["area"] = d.report.area;
  report["delay"] = d.report.delay;
  report["delta_count"] = d.report.delta_count;
  report["reduced_delta_count"] = d.report.reduced_delta_count;
  json files;
  if (d.netlist.locked()) {
    files["locked"] = "design.locked.v";
    files["keyspec"] = "keyspec.json";
  }
  files["resolved"] = "design.resolved.v";
  files["cost"] = "cost.json";
  report["files"] = files;
  write_file(out / "report.json", report.dump(2) + "\n");

  std::cout << "wrote " << out_dir << " (area " << d.report.area << ", delay "
            << d.report.delay << ", key bits " << d.netlist.key_bits << ")\n";
  return kExitOk;
}

std::vector<bool> key_from_json(const json& arr) {
  std::vector<bool> key;
  for (const auto& v : arr) key.push_back(v.get<int>() != 0);
  return key;
}

int cmd_verify(const std::string& bundle, const std::string& plan_name,
               std::uint64_t count, std::uint64_t seed) {
  const fs::path dir(bundle);
  const json report = load_json((dir / "report.json").string());
  const Poly true_poly = Poly::parse(report.at("true_poly").get<std::string>());
  const unsigned m = report.at("m").get<unsigned>();

  StimulusPlan plan;
  if (plan_name == "exhaustive") {
    if (2 * m > kExhaustiveInputBitCap)
      throw UsageError("exhaustive plan exceeds the input-bit cap; use "
                       "--plan random");
    plan = StimulusPlan::exhaustive();
  } else if (plan_name == "random") {
    plan = StimulusPlan::random(count, seed);
  } else {
    throw UsageError("unknown plan '" + plan_name + "'");
  }

  bool all_pass = true;
  json out;

  const Netlist resolved =
      read_verilog_subset(read_file(dir / "design.resolved.v"));
  const EquivReport r1 = verify_equiv(resolved, {}, true_poly, plan);
  out["resolved"] = json::parse(r1.to_json());
  all_pass = all_pass && r1.pass();

  if (fs::exists(dir / "design.locked.v")) {
    const json keyspec = load_json((dir / "keyspec.json").string());
    const std::vector<bool> true_key = key_from_json(keyspec.at("true_key"));
    const Netlist locked =
        read_verilog_subset(read_file(dir / "design.locked.v"));
    const EquivReport r2 = verify_equiv(locked, true_key, true_poly, plan);
    out["locked_true_key"] = json::parse(r2.to_json());
    all_pass = all_pass && r2.pass();
  }

  out["verdict"] = all_pass ? "pass" : "fail";
  std::cout << out.dump(2) << "\n";
  return all_pass ? kExitOk : kExitFailed;
}

std::vector<Poly> default_candidates(unsigned m, const json* keyspec) {
  if (m <= 12) return enumerate_irreducible(m);
  // large fields: the classes recorded in the bundle, as the harness's
  // stand-in for a public polynomial table
  std::vector<Poly> polys;
  if (keyspec && keyspec->contains("classes"))
    for (const auto& s : keyspec->at("classes"))
      polys.push_back(Poly::parse(s.get<std::string>()));
  if (polys.empty()) polys = first_irreducible(m, 10);
  return polys;
}

std::vector<Poly> candidates_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in.good()) throw UsageError("cannot open " + path);
  std::vector<Poly> polys;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    polys.push_back(Poly::parse(line));
  }
  if (polys.empty()) throw UsageError("no candidates in " + path);
  return polys;
}

int cmd_attack(const std::string& bundle, const std::string& verilog,
               const std::string& oracle_cmd, const std::string& mode,
               unsigned m_flag, const std::string& candidates_path,
               std::uint64_t budget, double time_budget, std::uint64_t seed,
               const std::string& out_path) {
  std::optional<SubprocessOracle> subprocess;
  OracleFn oracle;
  std::vector<Poly> candidates;
  Netlist locked;
  unsigned m = m_flag;

  if (!bundle.empty()) {
    const fs::path dir(bundle);
    const json report = load_json((dir / "report.json").string());
    m = report.at("m").get<unsigned>();
    const Poly truth = Poly::parse(report.at("true_poly").get<std::string>());
    oracle = [truth](const Poly& a, const Poly& b) {
      return poly_mulmod(a, b, truth);
    };
    json keyspec;
    if (fs::exists(dir / "keyspec.json"))
      keyspec = load_json((dir / "keyspec.json").string());
    candidates = candidates_path.empty()
                     ? default_candidates(m, keyspec.is_null() ? nullptr
                                                               : &keyspec)
                     : candidates_from_file(candidates_path);
    const fs::path netlist_file = fs::exists(dir / "design.locked.v")
                                      ? dir / "design.locked.v"
                                      : dir / "design.resolved.v";
    locked = read_verilog_subset(read_file(netlist_file));
  } else {
    if (oracle_cmd.empty())
      throw UsageError("attack needs --bundle or --oracle-cmd");
    if (m == 0) throw UsageError("--m is required with --oracle-cmd");
    subprocess.emplace(oracle_cmd);
    oracle = subprocess->fn();
    candidates = candidates_path.empty()
                     ? default_candidates(m, nullptr)
                     : candidates_from_file(candidates_path);
    if (mode == "di") {
      if (verilog.empty())
        throw UsageError("--mode di needs --verilog with --oracle-cmd");
      locked = read_verilog_subset(read_file(verilog));
    }
  }

  AttackResult result;
  if (mode == "di") {
    AttackProblem problem;
    problem.locked = std::move(locked);
    problem.oracle = std::move(oracle);
    problem.candidates = std::move(candidates);
    problem.query_budget = budget;
    problem.time_budget_seconds = time_budget;
    problem.seed = seed;
    result = di_attack(problem);
  } else if (mode == "hypothesis") {
    result = poly_hypothesis_attack(oracle, m, candidates, budget, seed);
  } else {
    throw UsageError("unknown mode '" + mode + "'");
  }

  const std::string text = result.to_json();
  std::cout << text;
  if (!out_path.empty()) write_file(out_path, text);
  return result.verdict == AttackVerdict::solved ? kExitOk : kExitFailed;
}

int cmd_sweep(const std::string& m_list, const std::string& k_list,
              const std::string& filter_name, const std::string& out_path) {
  const auto ms = parse_list(m_list);
  const auto ks = parse_list(k_list);
  const PolyFilter filter = filter_from_name(filter_name);

  std::string csv =
      "m,k,area,delay,area_overhead,delay_overhead,delta_count\n";
  for (unsigned m : ms) {
    const std::size_t max_k =
        *std::max_element(ks.begin(), ks.end());
    const auto polys = first_irreducible(m, max_k, filter);
    double base_area = 0.0, base_delay = 0.0;
    for (unsigned k : ks) {
      if (k == 0) throw UsageError("k must be >= 1");
      DesignConfig cfg;
      cfg.m = m;
      cfg.true_poly = polys[0];
      cfg.obf_polys.assign(polys.begin() + 1, polys.begin() + k);
      cfg.module_name = "sweep";
      const BuiltDesign d = build_design(cfg);
      if (k == 1) {
        base_area = d.report.area;
        base_delay = d.report.delay;
      }
      const double ao =
          base_area > 0 ? (d.report.area - base_area) / base_area : 0.0;
      const double dd =
          base_delay > 0 ? (d.report.delay - base_delay) / base_delay : 0.0;
      char line[160];
      std::snprintf(line, sizeof line, "%u,%u,%.6g,%.6g,%.4f,%.4f,%zu\n", m,
                    k, d.report.area, d.report.delay, ao, dd,
                    d.report.delta_count);
      csv += line;
    }
  }
  if (out_path.empty())
    std::cout << csv;
  else
    write_file(out_path, csv);
  return kExitOk;
}

int cmd_orders(const std::string& config_path, const std::string& mode_name,
               std::size_t samples, std::uint64_t check_vectors,
               const std::string& out_dir) {
  const DesignConfig cfg = parse_config(config_path);
  ExploreOptions opts;
  if (mode_name == "exhaustive") {
    opts.mode = ExploreOptions::Mode::exhaustive;
  } else if (mode_name == "sample") {
    opts.mode = ExploreOptions::Mode::sample;
    opts.sample_count = samples;
  } else {
    throw UsageError("unknown mode '" + mode_name + "'");
  }
  opts.seed = cfg.seed;
  opts.optimize_designs = cfg.optimize_design;
  opts.model = cfg.model;
  opts.check_vectors = check_vectors;

  const auto results =
      explore_orders(cfg.true_poly, cfg.obf_polys, cfg.m, opts);
  const OrderSummary summary = summarize_orders(results);

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_file(fs::path(out_dir) / "orders.csv", orders_csv(results));
    write_file(fs::path(out_dir) / "summary.json", summary.to_json());
  }
  std::cout << summary.to_json();
  return summary.equiv_failures == 0 ? kExitOk : kExitFailed;
}

int cmd_polys(unsigned m, const std::string& filter_name, long limit,
              bool hex) {
  const PolyFilter filter = filter_from_name(filter_name);
  std::vector<Poly> polys;
  if (limit > 0) {
    polys = first_irreducible(m, static_cast<std::size_t>(limit), filter);
  } else {
    if (m > 24)
      throw UsageError(
          "full enumeration above degree 24 is infeasible; pass --limit");
    polys = enumerate_irreducible(m, filter);
  }
  for (const Poly& p : polys) {
    std::cout << p.to_string();
    if (hex) std::cout << "  " << p.to_hex();
    std::cout << "\n";
  }
  return kExitOk;
}

int cmd_oracle(unsigned m, const std::string& poly_text) {
  const Poly p = Poly::parse(poly_text);
  if (p.degree() != static_cast<int>(m))
    throw UsageError("oracle: polynomial degree does not match --m");
  const FieldSpec field = FieldSpec::make(p);
  std::string line;
  while (std::getline(std::cin, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string ah, bh;
    if (!(ss >> ah >> bh)) throw UsageError("oracle: malformed request");
    const Poly a = Poly::parse("0x" + ah);
    const Poly b = Poly::parse("0x" + bh);
    const Poly z = poly_mulmod(a, b, field.p);
    std::cout << z.to_hex().substr(2) << "\n" << std::flush;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"camouflaged GF(2^m) multiplier generator and attack harness"};
  app.require_subcommand(1);

  // polys
  auto* polys = app.add_subcommand("polys", "list irreducible polynomials");
  unsigned polys_m = 0;
  std::string polys_filter = "all";
  long polys_limit = 0;
  bool polys_hex = false;
  polys->add_option("m", polys_m, "field degree")->required();
  polys->add_option("--filter", polys_filter,
                    "all | trinomial_pentanomial | nist");
  polys->add_option("--limit", polys_limit, "stop after this many");
  polys->add_flag("--hex", polys_hex, "also print hex form");

  // build
  auto* build = app.add_subcommand("build", "generate a design bundle");
  std::string build_config, build_out;
  build->add_option("--config", build_config, "design config JSON")
      ->required();
  build->add_option("--out", build_out, "output directory")->required();

  // verify
  auto* verify = app.add_subcommand("verify", "check a bundle's function");
  std::string verify_bundle, verify_plan = "random";
  std::uint64_t verify_count = 10000, verify_seed = 1;
  verify->add_option("--bundle", verify_bundle, "bundle directory")
      ->required();
  verify->add_option("--plan", verify_plan, "exhaustive | random");
  verify->add_option("--count", verify_count, "random vector count");
  verify->add_option("--seed", verify_seed, "stimulus seed");

  // attack
  auto* attack = app.add_subcommand("attack", "recover the true function");
  std::string attack_bundle, attack_verilog, attack_oracle, attack_mode = "di";
  std::string attack_candidates, attack_out;
  unsigned attack_m = 0;
  std::uint64_t attack_budget = 1000, attack_seed = 1;
  double attack_time = 10.0;
  attack->add_option("--bundle", attack_bundle, "self-built bundle to attack");
  attack->add_option("--verilog", attack_verilog, "locked netlist file");
  attack->add_option("--oracle-cmd", attack_oracle,
                     "external oracle command (line protocol on stdio)");
  attack->add_option("--mode", attack_mode, "di | hypothesis");
  attack->add_option("--m", attack_m, "field degree (external oracle mode)");
  attack->add_option("--candidates", attack_candidates,
                     "candidate polynomial file, one per line");
  attack->add_option("--budget", attack_budget, "oracle query budget");
  attack->add_option("--time-budget", attack_time, "seconds before timeout");
  attack->add_option("--seed", attack_seed, "attack seed");
  attack->add_option("--out", attack_out, "write the result JSON here");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "cost trend over m and k");
  std::string sweep_m, sweep_k, sweep_filter = "all", sweep_out;
  sweep->add_option("--m", sweep_m, "comma list of degrees")->required();
  sweep->add_option("--k", sweep_k, "comma list of function counts")
      ->required();
  sweep->add_option("--filter", sweep_filter, "polynomial filter");
  sweep->add_option("--out", sweep_out, "CSV path (default stdout)");

  // orders
  auto* orders = app.add_subcommand("orders", "explore obfuscation orders");
  std::string orders_config, orders_mode = "exhaustive", orders_out;
  std::size_t orders_samples = 0;
  std::uint64_t orders_check = 0;
  orders->add_option("--config", orders_config, "design config JSON")
      ->required();
  orders->add_option("--mode", orders_mode, "exhaustive | sample");
  orders->add_option("--samples", orders_samples, "sample count");
  orders->add_option("--check-vectors", orders_check,
                     "random equivalence vectors per design (0 = skip)");
  orders->add_option("--out", orders_out, "directory for CSV and summary");

  // oracle
  auto* oracle = app.add_subcommand("oracle", "serve the line protocol");
  unsigned oracle_m = 0;
  std::string oracle_poly;
  oracle->add_option("--m", oracle_m, "field degree")->required();
  oracle->add_option("--poly", oracle_poly, "modulus polynomial")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (polys->parsed())
      return cmd_polys(polys_m, polys_filter, polys_limit, polys_hex);
    if (build->parsed()) return cmd_build(build_config, build_out);
    if (verify->parsed())
      return cmd_verify(verify_bundle, verify_plan, verify_count, verify_seed);
    if (attack->parsed())
      return cmd_attack(attack_bundle, attack_verilog, attack_oracle,
                        attack_mode, attack_m, attack_candidates,
                        attack_budget, attack_time, attack_seed, attack_out);
    if (sweep->parsed())
      return cmd_sweep(sweep_m, sweep_k, sweep_filter, sweep_out);
    if (orders->parsed())
      return cmd_orders(orders_config, orders_mode, orders_samples,
                        orders_check, orders_out);
    if (oracle->parsed()) return cmd_oracle(oracle_m, oracle_poly);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const VerilogParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailed;
  }
  return kExitUsage;
}

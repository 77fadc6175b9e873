// Command-line front end: generate / validate / solve / bench.
// Exit codes: 0 success, 1 validation failure, 2 I/O failure, 3 infeasible.
#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dcmndp/dcmndp.hpp"

namespace {

namespace fs = std::filesystem;

const std::vector<std::string> kVariantNames{"sg1", "sg2", "sg3", "sg4", "sg5", "sg6"};
const std::vector<std::string> kRuleNames{"r1", "r2", "r3", "r4", "r5", "r6"};

bool glob_match(std::string_view pattern, std::string_view text) {
  std::size_t p = 0, t = 0, star = std::string_view::npos, mark = 0;
  while (t < text.size()) {
    if (p < pattern.size() && (pattern[p] == '?' || pattern[p] == text[t])) {
      ++p;
      ++t;
    } else if (p < pattern.size() && pattern[p] == '*') {
      star = p++;
      mark = t;
    } else if (star != std::string_view::npos) {
      p = star + 1;
      t = ++mark;
    } else {
      return false;
    }
  }
  while (p < pattern.size() && pattern[p] == '*') ++p;
  return p == pattern.size();
}

// Expands '*'/'?' patterns against the pattern's own directory (sorted for
// deterministic ordering); plain paths pass through untouched.
std::vector<std::string> expand_inputs(const std::vector<std::string>& args) {
  std::vector<std::string> out;
  for (const std::string& arg : args) {
    if (arg.find_first_of("*?") == std::string::npos) {
      out.push_back(arg);
      continue;
    }
    const fs::path p(arg);
    const bool bare = p.parent_path().empty();
    const std::string pattern = p.filename().string();
    std::vector<std::string> matched;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(bare ? fs::path(".") : p.parent_path(), ec)) {
      if (!entry.is_regular_file()) continue;
      const std::string leaf = entry.path().filename().string();
      if (glob_match(pattern, leaf))
        matched.push_back(bare ? leaf : (p.parent_path() / leaf).string());
    }
    std::sort(matched.begin(), matched.end());
    out.insert(out.end(), matched.begin(), matched.end());
  }
  return out;
}

std::string file_stem(const std::string& path) { return fs::path(path).stem().string(); }

int io_error(const std::string& msg) {
  std::cerr << msg << '\n';
  return 2;
}

std::vector<dcmndp::Variant> pick_variants(const std::vector<std::string>& names) {
  std::vector<dcmndp::Variant> out;
  const auto all = std::find(names.begin(), names.end(), "all") != names.end();
  for (const std::string& s : all ? kVariantNames : names) {
    const dcmndp::Variant v = *dcmndp::variant_from_string(s);
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  }
  return out;
}

std::vector<dcmndp::StepTag> pick_rules(const std::vector<std::string>& names) {
  std::vector<dcmndp::StepTag> out;
  const auto all = std::find(names.begin(), names.end(), "all") != names.end();
  for (const std::string& s : all ? kRuleNames : names) {
    const dcmndp::StepTag r = *dcmndp::rule_from_string(s);
    if (std::find(out.begin(), out.end(), r) == out.end()) out.push_back(r);
  }
  return out;
}

int run_generate(int nodes, int edges, int facilities, std::uint64_t seed,
                 const std::string& name, const std::string& out_path) {
  dcmndp::GeneratorParams params;
  params.node_count = nodes;
  params.edge_count = edges;
  params.facility_count = facilities;
  params.seed = seed;
  params.name = name;
  const dcmndp::Instance inst = dcmndp::generate_random(params);
  std::ofstream out(out_path);
  if (!out) return io_error("cannot open " + out_path);
  out << dcmndp::serialize_instance(inst);
  out.flush();
  if (!out) return io_error("cannot write " + out_path);
  return 0;
}

int run_validate(const std::string& path) {
  std::ifstream in(path);
  if (!in) return io_error("cannot open " + path);
  try {
    dcmndp::parse_instance(in, file_stem(path));
  } catch (const dcmndp::ValidationError& ex) {
    for (const std::string& v : ex.violations()) std::cout << v << '\n';
    return 1;
  }
  std::cout << "OK\n";
  return 0;
}

int run_solve(const std::string& path, dcmndp::Variant variant, dcmndp::StepTag rule, double alpha,
              int max_stall, std::optional<double> ub, std::uint64_t seed, bool trace, bool pretty,
              const std::string& out_path) {
  std::ifstream in(path);
  if (!in) return io_error("cannot open " + path);
  const dcmndp::Instance inst = dcmndp::parse_instance(in, file_stem(path));

  dcmndp::SolverConfig config;
  config.direction.variant = variant;
  config.direction.alpha = alpha;
  config.step = rule;
  config.max_stall = max_stall;
  config.upper_bound = ub;
  config.record_trajectory = false;
  if (trace) {
    std::cout << "q,theta,best_theta,beta,lambda,grad_norm,dir_norm\n";
    config.observer = [](const dcmndp::IterationView& view) {
      const dcmndp::IterationRecord& r = view.record;
      std::cout << r.q << ',' << dcmndp::format_number(r.theta) << ','
                << dcmndp::format_number(r.best_theta) << ',' << dcmndp::format_number(r.beta)
                << ',' << dcmndp::format_number(r.lambda) << ','
                << dcmndp::format_number(r.grad_norm) << ',' << dcmndp::format_number(r.dir_norm)
                << '\n';
    };
  }

  const dcmndp::SolverReport report = dcmndp::run(inst, config);

  dcmndp::BenchRow row;
  row.instance = inst.name;
  row.variant = variant;
  row.rule = rule;
  row.best_lb = report.best_theta;
  row.ub = report.upper_bound;
  row.gap_pct = 0.0;  // a lone run is its own best bound
  row.iterations = report.iterations;
  row.wall_time = report.wall_time;
  row.stop_reason = dcmndp::to_string(report.stop_reason);
  row.all_y_exact = report.all_y_exact;
  row.seed = seed;

  std::ofstream file;
  std::ostream* os = &std::cout;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) return io_error("cannot open " + out_path);
    os = &file;
  }
  if (pretty) {
    *os << "instance:     " << row.instance << '\n'
        << "variant:      " << dcmndp::to_string(row.variant) << '\n'
        << "rule:         " << dcmndp::to_string(row.rule) << '\n'
        << "best_lb:      " << dcmndp::format_number(row.best_lb) << '\n'
        << "ub:           " << dcmndp::format_number(row.ub) << '\n'
        << "ub_feasible:  " << (report.ub_feasible ? "true" : "false") << '\n'
        << "gap_pct:      " << dcmndp::format_number(row.gap_pct) << '\n'
        << "iterations:   " << row.iterations << '\n'
        << "wall_time_s:  " << dcmndp::format_number(row.wall_time) << '\n'
        << "stop_reason:  " << row.stop_reason << '\n'
        << "all_y_exact:  " << (row.all_y_exact ? "true" : "false") << '\n'
        << "seed:         " << row.seed << '\n';
  } else {
    *os << dcmndp::csv_header() << '\n' << dcmndp::to_csv(row) << '\n';
  }
  if (os == &file) {
    file.flush();
    if (!file) return io_error("cannot write " + out_path);
  }
  return 0;
}

int run_bench_cmd(const std::vector<std::string>& inputs,
                  const std::vector<std::string>& variant_names,
                  const std::vector<std::string>& rule_names, double alpha, int max_stall,
                  std::uint64_t seed, int jobs, bool timing, const std::string& out_path) {
  const std::vector<std::string> paths = expand_inputs(inputs);
  if (paths.empty()) return io_error("no instance files match");

  dcmndp::BenchConfig config;
  config.variants = pick_variants(variant_names);
  config.rules = pick_rules(rule_names);
  config.solver.direction.alpha = alpha;
  config.solver.max_stall = max_stall;
  config.jobs = jobs;
  config.seed = seed;

  std::vector<std::string> used;
  for (const std::string& p : paths) {
    dcmndp::BenchInstance bi;
    std::string name = file_stem(p);
    if (std::find(used.begin(), used.end(), name) != used.end()) name = p;
    used.push_back(name);
    bi.name = name;
    std::ifstream in(p);
    if (!in) {
      bi.load_error = "cannot open " + p;
    } else {
      try {
        bi.instance = dcmndp::parse_instance(in, name);
      } catch (const std::exception& ex) {
        bi.load_error = ex.what();
      }
    }
    config.instances.push_back(std::move(bi));
  }

  const std::vector<dcmndp::BenchRow> rows = dcmndp::run_bench(config);

  std::ofstream csv(out_path);
  if (!csv) return io_error("cannot open " + out_path);
  csv << dcmndp::csv_header() << '\n';
  for (const dcmndp::BenchRow& row : rows) csv << dcmndp::to_csv(row, timing) << '\n';
  csv.flush();
  if (!csv) return io_error("cannot write " + out_path);

  std::string md;
  const auto emit = [&md](const dcmndp::ComparisonTable& t) {
    md += dcmndp::to_markdown_gap(t);
    md += '\n';
    md += dcmndp::to_markdown_time(t);
    md += '\n';
  };
  if (config.variants.size() >= 2 || config.rules.size() == 1)
    for (dcmndp::StepTag r : config.rules) emit(dcmndp::compare_variants(rows, r, config.variants));
  if (config.rules.size() >= 2)
    for (dcmndp::Variant v : config.variants) emit(dcmndp::compare_rules(rows, v, config.rules));
  std::cout << md;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lagrangian lower bounds for discrete cost multicommodity network design"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("generate", "Write a random instance file");
  int gen_nodes = 10, gen_edges = 15, gen_facilities = 3;
  std::uint64_t gen_seed = 0;
  std::string gen_name, gen_out;
  gen->add_option("--nodes", gen_nodes, "node count")->capture_default_str();
  gen->add_option("--edges", gen_edges, "edge count")->capture_default_str();
  gen->add_option("--facilities", gen_facilities, "facilities per edge")->capture_default_str();
  gen->add_option("--seed", gen_seed, "generator seed")->capture_default_str();
  gen->add_option("--name", gen_name, "instance name override");
  gen->add_option("--out", gen_out, "output path")->required();

  auto* val = app.add_subcommand("validate", "Check an instance file");
  std::string val_path;
  val->add_option("instance", val_path, "instance file")->required();

  auto* sol = app.add_subcommand("solve", "Compute a lower bound for one instance");
  std::string sol_path, sol_variant = "sg1", sol_rule = "r1", sol_out;
  double sol_alpha = 0.7;
  int sol_stall = 100;
  std::optional<double> sol_ub;
  std::uint64_t sol_seed = 0;
  bool sol_trace = false, sol_pretty = false;
  sol->add_option("instance", sol_path, "instance file")->required();
  sol->add_option("--variant", sol_variant, "direction variant")
      ->check(CLI::IsMember(kVariantNames))
      ->capture_default_str();
  sol->add_option("--rule", sol_rule, "step-length rule")
      ->check(CLI::IsMember(kRuleNames))
      ->capture_default_str();
  sol->add_option("--alpha", sol_alpha, "sg6 blend weight")->capture_default_str();
  sol->add_option("--max-stall", sol_stall, "non-improving iterations before stopping")
      ->capture_default_str();
  sol->add_option("--ub", sol_ub, "upper bound override");
  sol->add_option("--seed", sol_seed, "seed recorded in the output row")->capture_default_str();
  sol->add_flag("--trace", sol_trace, "stream per-iteration records as CSV");
  sol->add_flag("--pretty", sol_pretty, "human-readable report instead of CSV");
  sol->add_option("--out", sol_out, "write the report here instead of stdout");

  auto* ben = app.add_subcommand("bench", "Run the (instance, variant, rule) cross product");
  std::vector<std::string> ben_inputs, ben_variants{"all"}, ben_rules{"all"};
  double ben_alpha = 0.7;
  int ben_stall = 100, ben_jobs = 1;
  std::uint64_t ben_seed = 0;
  bool ben_timing = false;
  std::string ben_out;
  std::vector<std::string> variant_choices = kVariantNames, rule_choices = kRuleNames;
  variant_choices.emplace_back("all");
  rule_choices.emplace_back("all");
  ben->add_option("instances", ben_inputs, "instance files (supports * and ? patterns)")
      ->required();
  ben->add_option("--variants,--variant", ben_variants, "variants to run, or 'all'")
      ->delimiter(',')
      ->check(CLI::IsMember(variant_choices));
  ben->add_option("--rules,--rule", ben_rules, "rules to run, or 'all'")
      ->delimiter(',')
      ->check(CLI::IsMember(rule_choices));
  ben->add_option("--alpha", ben_alpha, "sg6 blend weight")->capture_default_str();
  ben->add_option("--max-stall", ben_stall, "non-improving iterations before stopping")
      ->capture_default_str();
  ben->add_option("--seed", ben_seed, "seed recorded in every row")->capture_default_str();
  ben->add_option("--jobs", ben_jobs, "worker threads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  ben->add_flag("--timing", ben_timing,
                "write measured wall times into the CSV (default writes 0 so repeated "
                "runs are byte-identical)");
  ben->add_option("--out", ben_out, "CSV output path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed())
      return run_generate(gen_nodes, gen_edges, gen_facilities, gen_seed, gen_name, gen_out);
    if (val->parsed()) return run_validate(val_path);
    if (sol->parsed())
      return run_solve(sol_path, *dcmndp::variant_from_string(sol_variant),
                       *dcmndp::rule_from_string(sol_rule), sol_alpha, sol_stall, sol_ub, sol_seed,
                       sol_trace, sol_pretty, sol_out);
    if (ben->parsed())
      return run_bench_cmd(ben_inputs, ben_variants, ben_rules, ben_alpha, ben_stall, ben_seed,
                           ben_jobs, ben_timing, ben_out);
  } catch (const dcmndp::InfeasibleError& ex) {
    std::cerr << "infeasible: " << ex.what() << '\n';
    return 3;
  } catch (const dcmndp::ParseError& ex) {
    std::cerr << ex.what() << '\n';
    return 1;
  } catch (const dcmndp::ValidationError& ex) {
    std::cerr << ex.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& ex) {
    std::cerr << ex.what() << '\n';
    return 1;
  } catch (const std::exception& ex) {
    std::cerr << ex.what() << '\n';
    return 2;
  }
  return 0;
}

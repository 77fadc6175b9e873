// Benchmark harness: run the (instance, variant, rule) cross product, emit
// stable CSV rows, and aggregate per-class mean gaps / wall times into
// markdown comparison tables (variants across columns for a fixed rule,
// rules across columns for a fixed variant).
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "dcmndp/instance.hpp"
#include "dcmndp/solver.hpp"

namespace dcmndp {

struct BenchRow {
  std::string instance;
  Variant variant = Variant::sg1;
  StepTag rule = StepTag::r1;
  double best_lb = 0.0;
  double ub = 0.0;
  double gap_pct = 0.0;
  long iterations = 0;
  double wall_time = 0.0;  // measured seconds, regardless of CSV emission mode
  std::string stop_reason;
  bool all_y_exact = true;
  std::uint64_t seed = 0;
  bool failed = false;  // stop_reason carries the error text
};

// Locale-proof "%.6g".
inline std::string format_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  for (char* p = buf; *p; ++p)
    if (*p == ',') *p = '.';
  return buf;
}

inline std::string csv_header() {
  return "instance,variant,rule,best_lb,ub,gap_pct,iterations,wall_time_s,stop_reason,"
         "all_y_exact,seed";
}

namespace detail {

inline std::string csv_field(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c == ',') c = ';';
    if (c == '\n' || c == '\r') c = ' ';
  }
  return out;
}

}  // namespace detail

// One CSV line matching csv_header(). With measured_time=false the
// wall_time_s field is written as 0 so repeated runs are byte-identical;
// failed rows leave the numeric fields empty.
inline std::string to_csv(const BenchRow& row, bool measured_time = true) {
  std::string out = detail::csv_field(row.instance);
  out += ',';
  out += to_string(row.variant);
  out += ',';
  out += to_string(row.rule);
  out += ',';
  if (row.failed) {
    out += ",,,,,";  // best_lb, ub, gap_pct, iterations, wall_time_s
  } else {
    out += format_number(row.best_lb);
    out += ',';
    out += format_number(row.ub);
    out += ',';
    out += format_number(row.gap_pct);
    out += ',';
    out += std::to_string(row.iterations);
    out += ',';
    out += measured_time ? format_number(row.wall_time) : std::string("0");
    out += ',';
  }
  out += detail::csv_field(row.stop_reason);
  out += ',';
  if (!row.failed) out += row.all_y_exact ? "true" : "false";
  out += ',';
  out += std::to_string(row.seed);
  return out;
}

// Per-instance gap against the best lower bound over all rows of that
// instance in this batch: 100 (LB_best - LB) / LB_best, or the absolute
// difference LB_best - LB when LB_best <= 0 (degenerate instances; tables
// flag such rows).
inline void fill_gap_percentages(std::vector<BenchRow>& rows) {
  std::map<std::string_view, double> best;
  for (const BenchRow& r : rows) {
    if (r.failed) continue;
    auto [it, fresh] = best.emplace(r.instance, r.best_lb);
    if (!fresh) it->second = std::max(it->second, r.best_lb);
  }
  for (BenchRow& r : rows) {
    if (r.failed) continue;
    const double lb_best = best.at(r.instance);
    r.gap_pct = lb_best > 0.0 ? 100.0 * (lb_best - r.best_lb) / lb_best : lb_best - r.best_lb;
  }
}

inline std::string_view instance_class(std::string_view name) {
  const auto digit = [](char c) { return c >= '0' && c <= '9'; };
  if (name.substr(0, 4) == "rand") return "Rand.";
  if (name.size() >= 2 && (name[0] == 'D' || name[0] == 'd') &&
      (digit(name[1]) || (name[1] == '.' && name.size() >= 3 && digit(name[2]))))
    return "Rand.";
  return "Real.";
}

struct BenchInstance {
  std::string name;
  std::optional<Instance> instance;  // unset -> load_error says why
  std::string load_error;
};

struct BenchConfig {
  std::vector<BenchInstance> instances;
  std::vector<Variant> variants = {Variant::sg1, Variant::sg2, Variant::sg3,
                                   Variant::sg4, Variant::sg5, Variant::sg6};
  std::vector<StepTag> rules = {StepTag::r1, StepTag::r2, StepTag::r3,
                                StepTag::r4, StepTag::r5, StepTag::r6};
  SolverConfig solver;  // variant/step overridden per triple
  int jobs = 1;
  std::uint64_t seed = 0;  // run label copied into every row
};

// One row per (instance, variant, rule), in that nesting order. Solver
// failures become error rows; the batch keeps going. Workers fill disjoint
// row slots, so results are identical for any job count.
inline std::vector<BenchRow> run_bench(const BenchConfig& config) {
  if (config.instances.empty() || config.variants.empty() || config.rules.empty())
    throw std::invalid_argument("run_bench: need at least one instance, variant and rule");
  if (config.jobs < 1) throw std::invalid_argument("run_bench: jobs must be >= 1");

  const std::size_t per_instance = config.variants.size() * config.rules.size();
  std::vector<BenchRow> rows(config.instances.size() * per_instance);

  auto work = [&](std::size_t t) {
    const std::size_t i = t / per_instance;
    const std::size_t v = t % per_instance / config.rules.size();
    const std::size_t r = t % config.rules.size();
    const BenchInstance& bi = config.instances[i];
    BenchRow row;
    row.instance = bi.name;
    row.variant = config.variants[v];
    row.rule = config.rules[r];
    row.seed = config.seed;
    if (!bi.instance) {
      row.failed = true;
      row.stop_reason = "error: " + bi.load_error;
    } else {
      SolverConfig sc = config.solver;
      sc.direction.variant = row.variant;
      sc.step = row.rule;
      sc.record_trajectory = false;
      sc.observer = nullptr;
      try {
        const SolverReport rep = run(*bi.instance, sc);
        row.best_lb = rep.best_theta;
        row.ub = rep.upper_bound;
        row.iterations = rep.iterations;
        row.wall_time = rep.wall_time;
        row.stop_reason = to_string(rep.stop_reason);
        row.all_y_exact = rep.all_y_exact;
      } catch (const std::exception& ex) {
        row.failed = true;
        row.stop_reason = std::string("error: ") + ex.what();
      }
    }
    rows[t] = std::move(row);
  };

  if (config.jobs == 1 || rows.size() == 1) {
    for (std::size_t t = 0; t < rows.size(); ++t) work(t);
  } else {
    std::atomic<std::size_t> next{0};
    const std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(config.jobs), rows.size());
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t p = 0; p < workers; ++p)
      pool.emplace_back([&] {
        for (std::size_t t = next.fetch_add(1); t < rows.size(); t = next.fetch_add(1)) work(t);
      });
    for (std::thread& th : pool) th.join();
  }

  fill_gap_percentages(rows);
  return rows;
}

// Aggregated comparison: one column per algorithm, one row per instance
// class plus a macro-average row. Gaps are recomputed against the best
// lower bound within this table's columns. NaN cells mean "no data".
struct ComparisonTable {
  std::string caption;  // e.g. "rule r1" or "variant sg3"
  std::vector<std::string> columns;
  std::vector<std::string> row_labels;
  std::vector<char> row_flagged;  // gap cells are absolute differences
  std::vector<std::vector<double>> mean_gap;
  std::vector<std::vector<double>> mean_time;
};

namespace detail {

inline ComparisonTable build_table(const std::vector<BenchRow>& rows,
                                   std::vector<std::string> columns,
                                   const std::function<int(const BenchRow&)>& column_of,
                                   std::string caption) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  ComparisonTable table;
  table.caption = std::move(caption);
  table.columns = std::move(columns);
  const std::size_t ncol = table.columns.size();

  struct Cell {
    double lb = 0.0, time = 0.0;
    bool present = false;
  };
  std::vector<std::string> order;  // instances, first appearance
  std::map<std::string, std::vector<Cell>, std::less<>> data;
  for (const BenchRow& r : rows) {
    if (r.failed) continue;
    const int col = column_of(r);
    if (col < 0) continue;
    auto it = data.find(r.instance);
    if (it == data.end()) {
      order.push_back(r.instance);
      it = data.emplace(r.instance, std::vector<Cell>(ncol)).first;
    }
    Cell& cell = it->second[static_cast<std::size_t>(col)];
    if (!cell.present) cell = {r.best_lb, r.wall_time, true};
  }

  struct Accum {
    std::vector<double> gap_sum, time_sum;
    std::vector<long> count;
    bool flagged = false;
    explicit Accum(std::size_t n) : gap_sum(n, 0.0), time_sum(n, 0.0), count(n, 0) {}
  };
  std::map<std::string_view, Accum> classes;
  for (const std::string& name : order) {
    const std::vector<Cell>& cells = data.at(name);
    double lb_best = -std::numeric_limits<double>::infinity();
    for (const Cell& c : cells)
      if (c.present) lb_best = std::max(lb_best, c.lb);
    if (!std::isfinite(lb_best)) continue;
    auto [it, _] = classes.try_emplace(instance_class(name), ncol);
    Accum& acc = it->second;
    if (lb_best <= 0.0) acc.flagged = true;
    for (std::size_t col = 0; col < ncol; ++col) {
      if (!cells[col].present) continue;
      acc.gap_sum[col] += lb_best > 0.0 ? 100.0 * (lb_best - cells[col].lb) / lb_best
                                        : lb_best - cells[col].lb;
      acc.time_sum[col] += cells[col].time;
      ++acc.count[col];
    }
  }

  std::vector<double> aver_gap(ncol, 0.0), aver_time(ncol, 0.0);
  std::vector<long> aver_n(ncol, 0);
  bool aver_flagged = false;
  for (std::string_view label : {std::string_view("Rand."), std::string_view("Real.")}) {
    const auto it = classes.find(label);
    if (it == classes.end()) continue;
    const Accum& acc = it->second;
    table.row_labels.emplace_back(label);
    table.row_flagged.push_back(acc.flagged);
    aver_flagged = aver_flagged || acc.flagged;
    std::vector<double> gaps(ncol, nan), times(ncol, nan);
    for (std::size_t col = 0; col < ncol; ++col) {
      if (acc.count[col] == 0) continue;
      gaps[col] = acc.gap_sum[col] / static_cast<double>(acc.count[col]);
      times[col] = acc.time_sum[col] / static_cast<double>(acc.count[col]);
      aver_gap[col] += gaps[col];
      aver_time[col] += times[col];
      ++aver_n[col];
    }
    table.mean_gap.push_back(std::move(gaps));
    table.mean_time.push_back(std::move(times));
  }

  table.row_labels.emplace_back("Aver.");
  table.row_flagged.push_back(aver_flagged);
  std::vector<double> gaps(ncol, nan), times(ncol, nan);
  for (std::size_t col = 0; col < ncol; ++col) {
    if (aver_n[col] == 0) continue;
    gaps[col] = aver_gap[col] / static_cast<double>(aver_n[col]);
    times[col] = aver_time[col] / static_cast<double>(aver_n[col]);
  }
  table.mean_gap.push_back(std::move(gaps));
  table.mean_time.push_back(std::move(times));
  return table;
}

}  // namespace detail

inline ComparisonTable compare_variants(const std::vector<BenchRow>& rows, StepTag rule,
                                        const std::vector<Variant>& variants) {
  std::vector<std::string> columns;
  for (Variant v : variants) columns.emplace_back(to_string(v));
  return detail::build_table(
      rows, std::move(columns),
      [rule, &variants](const BenchRow& r) -> int {
        if (r.rule != rule) return -1;
        const auto it = std::find(variants.begin(), variants.end(), r.variant);
        return it == variants.end() ? -1 : static_cast<int>(it - variants.begin());
      },
      std::string("rule ") + to_string(rule));
}

inline ComparisonTable compare_rules(const std::vector<BenchRow>& rows, Variant variant,
                                     const std::vector<StepTag>& rules) {
  std::vector<std::string> columns;
  for (StepTag r : rules) columns.emplace_back(to_string(r));
  return detail::build_table(
      rows, std::move(columns),
      [variant, &rules](const BenchRow& r) -> int {
        if (r.variant != variant) return -1;
        const auto it = std::find(rules.begin(), rules.end(), r.rule);
        return it == rules.end() ? -1 : static_cast<int>(it - rules.begin());
      },
      std::string("variant ") + to_string(variant));
}

namespace detail {

inline std::string markdown_matrix(const ComparisonTable& t,
                                   const std::vector<std::vector<double>>& matrix,
                                   const std::string& title, bool mark_flagged) {
  std::string out = "**" + title + " — " + t.caption + "**\n\n| Instances |";
  for (const std::string& c : t.columns) out += " " + c + " |";
  out += "\n|---|";
  for (std::size_t i = 0; i < t.columns.size(); ++i) out += "---|";
  out += "\n";
  bool any_flag = false;
  for (std::size_t row = 0; row < t.row_labels.size(); ++row) {
    const bool flag = mark_flagged && t.row_flagged[row];
    any_flag = any_flag || flag;
    out += "| " + t.row_labels[row] + (flag ? "\\*" : "") + " |";
    for (double x : matrix[row]) {
      if (std::isnan(x)) {
        out += " - |";
      } else {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.2f", x);
        for (char* p = buf; *p; ++p)
          if (*p == ',') *p = '.';
        out += std::string(" ") + buf + " |";
      }
    }
    out += "\n";
  }
  if (any_flag)
    out += "\n\\* best lower bound was nonpositive; cells are absolute differences\n";
  return out;
}

}  // namespace detail

inline std::string to_markdown_gap(const ComparisonTable& t) {
  return detail::markdown_matrix(t, t.mean_gap, "Average gap (%)", true);
}

inline std::string to_markdown_time(const ComparisonTable& t) {
  return detail::markdown_matrix(t, t.mean_time, "Average wall time (s)", false);
}

}  // namespace dcmndp

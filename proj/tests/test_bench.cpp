// Benchmark harness: CSV shape, gap computation, batch orchestration, and
// the aggregated comparison tables.
#include <catch2/catch_amalgamated.hpp>

#include <string>
#include <vector>

#include "dcmndp/bench.hpp"
#include "dcmndp/oracle.hpp"

using namespace dcmndp;

namespace {

BenchRow make_row(const std::string& inst, Variant v, StepTag r, double lb) {
  BenchRow row;
  row.instance = inst;
  row.variant = v;
  row.rule = r;
  row.best_lb = lb;
  row.ub = 120.0;
  row.iterations = 42;
  row.wall_time = 0.5;
  row.stop_reason = "stall";
  return row;
}

const std::vector<double>* table_row(const ComparisonTable& t, const std::string& label,
                                     bool time) {
  for (std::size_t i = 0; i < t.row_labels.size(); ++i)
    if (t.row_labels[i] == label) return time ? &t.mean_time[i] : &t.mean_gap[i];
  return nullptr;
}

}  // namespace

TEST_CASE("CSV header names every column", "[bench][csv]") {
  CHECK(csv_header() ==
        "instance,variant,rule,best_lb,ub,gap_pct,iterations,wall_time_s,stop_reason,"
        "all_y_exact,seed");
}

TEST_CASE("CSV rows match the header", "[bench][csv]") {
  BenchRow row = make_row("demo", Variant::sg3, StepTag::r4, 100.0);
  row.gap_pct = 12.5;
  row.seed = 9;

  SECTION("with measured time") {
    CHECK(to_csv(row) == "demo,sg3,r4,100,120,12.5,42,0.5,stall,true,9");
  }
  SECTION("timing suppressed for byte-identical reruns") {
    CHECK(to_csv(row, false) == "demo,sg3,r4,100,120,12.5,42,0,stall,true,9");
  }
  SECTION("failed rows keep the shape with empty numeric fields") {
    BenchRow err;
    err.instance = "broken";
    err.failed = true;
    err.stop_reason = "error: cannot open broken";
    CHECK(to_csv(err) == "broken,sg1,r1,,,,,,error: cannot open broken,,0");
  }
  SECTION("field values never leak extra separators") {
    BenchRow odd = make_row("has,comma\nand newline", Variant::sg1, StepTag::r1, 1.0);
    const std::string line = to_csv(odd);
    CHECK(line.find('\n') == std::string::npos);
    CHECK(std::count(line.begin(), line.end(), ',') == 10);
  }
}

TEST_CASE("gap is measured against the best bound per instance", "[bench][gap]") {
  std::vector<BenchRow> rows{make_row("a", Variant::sg1, StepTag::r1, 90.0),
                             make_row("a", Variant::sg3, StepTag::r1, 100.0),
                             make_row("b", Variant::sg1, StepTag::r1, 50.0)};
  fill_gap_percentages(rows);
  CHECK(rows[0].gap_pct == Catch::Approx(10.0));  // 100 (100-90)/100
  CHECK(rows[1].gap_pct == Catch::Approx(0.0));
  CHECK(rows[2].gap_pct == Catch::Approx(0.0));  // alone in its group
}

TEST_CASE("nonpositive best bounds fall back to absolute differences", "[bench][gap]") {
  std::vector<BenchRow> rows{make_row("z", Variant::sg1, StepTag::r1, -4.0),
                             make_row("z", Variant::sg3, StepTag::r1, -1.0)};
  fill_gap_percentages(rows);
  CHECK(rows[0].gap_pct == Catch::Approx(3.0));  // -1 - (-4)
  CHECK(rows[1].gap_pct == Catch::Approx(0.0));
}

TEST_CASE("instance names sort into the two table classes", "[bench]") {
  CHECK(instance_class("rand-n10-m15-L3-s0") == "Rand.");
  CHECK(instance_class("D1") == "Rand.");
  CHECK(instance_class("d7") == "Rand.");
  CHECK(instance_class("pdh") == "Real.");
  CHECK(instance_class("newyork") == "Real.");
}

TEST_CASE("batch runs the full cross product in a stable order", "[bench][run]") {
  BenchConfig config;
  config.instances.push_back({"tri3", make_tri3(), ""});
  config.variants = {Variant::sg1, Variant::sg3};
  config.rules = {StepTag::r1, StepTag::r4};
  config.seed = 77;

  const std::vector<BenchRow> rows = run_bench(config);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].variant == Variant::sg1);
  CHECK(rows[0].rule == StepTag::r1);
  CHECK(rows[1].variant == Variant::sg1);
  CHECK(rows[1].rule == StepTag::r4);
  CHECK(rows[2].variant == Variant::sg3);
  CHECK(rows[3].variant == Variant::sg3);
  for (const BenchRow& r : rows) {
    CHECK_FALSE(r.failed);
    CHECK(r.instance == "tri3");
    CHECK(r.seed == 77);
    CHECK(r.best_lb >= 10.0 - 1e-9);
    CHECK(r.ub == Catch::Approx(18.0));
    CHECK(r.gap_pct >= 0.0);
    CHECK(r.wall_time >= 0.0);
  }
}

TEST_CASE("unloadable instances become error rows without stopping the batch", "[bench][run]") {
  BenchConfig config;
  config.instances.push_back({"good", make_tri3(), ""});
  config.instances.push_back({"bad", std::nullopt, "cannot open bad"});
  config.variants = {Variant::sg1};
  config.rules = {StepTag::r1};

  const std::vector<BenchRow> rows = run_bench(config);
  REQUIRE(rows.size() == 2);
  CHECK_FALSE(rows[0].failed);
  CHECK(rows[1].failed);
  CHECK(rows[1].stop_reason == "error: cannot open bad");
}

TEST_CASE("identical job results regardless of worker count", "[bench][run]") {
  BenchConfig config;
  config.instances.push_back({"tri3", make_tri3(), ""});
  GeneratorParams p;
  p.seed = 12;
  config.instances.push_back({"r12", generate_random(p), ""});
  config.variants = {Variant::sg1, Variant::sg5};
  config.rules = {StepTag::r1};

  const std::vector<BenchRow> serial = run_bench(config);
  config.jobs = 3;
  const std::vector<BenchRow> parallel = run_bench(config);
  REQUIRE(serial.size() == parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].instance == parallel[i].instance);
    CHECK(serial[i].variant == parallel[i].variant);
    CHECK(serial[i].best_lb == parallel[i].best_lb);
    CHECK(serial[i].iterations == parallel[i].iterations);
  }
}

TEST_CASE("comparison tables aggregate by class with a macro average", "[bench][table]") {
  // Two synthetic instances, one per class, two variants under one rule.
  std::vector<BenchRow> rows{
      make_row("rand-n5-m7-L2-s1", Variant::sg1, StepTag::r1, 90.0),
      make_row("rand-n5-m7-L2-s1", Variant::sg3, StepTag::r1, 100.0),
      make_row("pdh", Variant::sg1, StepTag::r1, 60.0),
      make_row("pdh", Variant::sg3, StepTag::r1, 50.0),
  };
  const ComparisonTable t =
      compare_variants(rows, StepTag::r1, {Variant::sg1, Variant::sg3});
  REQUIRE(t.columns == std::vector<std::string>{"sg1", "sg3"});
  REQUIRE(t.row_labels == std::vector<std::string>{"Rand.", "Real.", "Aver."});

  const auto* rand_gap = table_row(t, "Rand.", false);
  const auto* real_gap = table_row(t, "Real.", false);
  const auto* aver_gap = table_row(t, "Aver.", false);
  REQUIRE(rand_gap);
  REQUIRE(real_gap);
  REQUIRE(aver_gap);
  CHECK((*rand_gap)[0] == Catch::Approx(10.0));
  CHECK((*rand_gap)[1] == Catch::Approx(0.0));
  CHECK((*real_gap)[0] == Catch::Approx(0.0));
  CHECK((*real_gap)[1] == Catch::Approx(100.0 * 10.0 / 60.0));
  CHECK((*aver_gap)[0] == Catch::Approx(5.0));
}

TEST_CASE("rows outside the compared rule are ignored", "[bench][table]") {
  std::vector<BenchRow> rows{
      make_row("a", Variant::sg1, StepTag::r1, 90.0),
      make_row("a", Variant::sg1, StepTag::r4, 5.0),  // other rule: must not matter
  };
  const ComparisonTable t = compare_variants(rows, StepTag::r1, {Variant::sg1});
  const auto* aver = table_row(t, "Aver.", false);
  REQUIRE(aver);
  CHECK((*aver)[0] == Catch::Approx(0.0));
}

TEST_CASE("markdown rendering shows dashes for missing cells", "[bench][table]") {
  std::vector<BenchRow> rows{make_row("a", Variant::sg1, StepTag::r1, 90.0)};
  const ComparisonTable t =
      compare_variants(rows, StepTag::r1, {Variant::sg1, Variant::sg2});
  const std::string gap_md = to_markdown_gap(t);
  CHECK(gap_md.find("| sg1 |") != std::string::npos);
  CHECK(gap_md.find(" - |") != std::string::npos);  // sg2 has no data
  CHECK(gap_md.find("Aver.") != std::string::npos);

  const std::string time_md = to_markdown_time(t);
  CHECK(time_md.find("0.50") != std::string::npos);
}

TEST_CASE("rule comparison columns follow the requested order", "[bench][table]") {
  std::vector<BenchRow> rows{
      make_row("a", Variant::sg3, StepTag::r1, 90.0),
      make_row("a", Variant::sg3, StepTag::r4, 99.0),
      make_row("a", Variant::sg1, StepTag::r4, 70.0),  // other variant: ignored
  };
  const ComparisonTable t = compare_rules(rows, Variant::sg3, {StepTag::r4, StepTag::r1});
  REQUIRE(t.columns == std::vector<std::string>{"r4", "r1"});
  const auto* aver = table_row(t, "Aver.", false);
  REQUIRE(aver);
  CHECK((*aver)[0] == Catch::Approx(0.0));
  CHECK((*aver)[1] == Catch::Approx(100.0 * 9.0 / 99.0));
}

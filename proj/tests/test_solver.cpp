// Dual-ascent engine: deflection coefficients, direction assembly, step
// lengths, beta schedules, multiplier projection, the feasible-design
// upper bound, and the full solve loop.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "dcmndp/instance.hpp"
#include "dcmndp/oracle.hpp"
#include "dcmndp/solver.hpp"

using namespace dcmndp;

namespace {

DirectionRule make_rule(Variant v, double alpha = 0.7) {
  DirectionRule r;
  r.variant = v;
  r.alpha = alpha;
  return r;
}

Instance infeasible_pair() {
  Instance inst;
  inst.node_count = 2;
  Edge e;
  e.u = 0;
  e.v = 1;
  e.facilities = {{5, 10}};  // largest capacity 5 < demand 7
  inst.edges.push_back(e);
  inst.commodities.push_back(Commodity{0, 1, 7});
  inst.name = "too-small";
  return inst;
}

}  // namespace

TEST_CASE("deflection coefficient per variant", "[solver][direction]") {
  const std::vector<double> d{2.0, 0.0};

  SECTION("plain subgradient never deflects") {
    CHECK(deflection_sigma(make_rule(Variant::sg1), {-1.0, 0.0}, d) == 0.0);
    CHECK(deflection_sigma(make_rule(Variant::sg1), {3.0, 4.0}, d) == 0.0);
  }
  SECTION("obtuse-angle correction activates only against the previous direction") {
    // g.d = -2, |d|^2 = 4: coefficient 1.5 * 2 / 4
    CHECK(deflection_sigma(make_rule(Variant::sg2), {-1.0, 0.0}, d) == Catch::Approx(0.75));
    CHECK(deflection_sigma(make_rule(Variant::sg2), {1.0, 5.0}, d) == 0.0);
  }
  SECTION("norm-ratio correction activates only against the previous direction") {
    // g.d = +1 >= 0: no deflection
    CHECK(deflection_sigma(make_rule(Variant::sg3), {0.5, 1.0}, d) == 0.0);
    // g.d = -2 < 0: |g|/|d| = 1/2
    CHECK(deflection_sigma(make_rule(Variant::sg3), {-1.0, 0.0}, d) == Catch::Approx(0.5));
  }
  SECTION("constant deflection") {
    CHECK(deflection_sigma(make_rule(Variant::sg4), {-1.0, 0.0}, d) == Catch::Approx(0.8));
    CHECK(deflection_sigma(make_rule(Variant::sg4), {9.0, 9.0}, d) == Catch::Approx(0.8));
  }
  SECTION("average-direction ratio applies unconditionally") {
    // |g| = 3, |d| = 2
    CHECK(deflection_sigma(make_rule(Variant::sg5), {3.0, 0.0}, d) == Catch::Approx(1.5));
    CHECK(deflection_sigma(make_rule(Variant::sg5), {0.0, 3.0}, d) == Catch::Approx(1.5));
  }
  SECTION("degenerate inputs are rejected") {
    CHECK_THROWS_AS(deflection_sigma(make_rule(Variant::sg6), {1.0, 0.0}, d),
                    std::invalid_argument);
    CHECK_THROWS_AS(deflection_sigma(make_rule(Variant::sg1), {1.0, 0.0}, {0.0, 0.0}),
                    std::invalid_argument);
  }
}

TEST_CASE("direction assembly", "[solver][direction]") {
  const std::vector<double> g{1.0, 0.0};
  const std::vector<double> g_prev{0.0, 1.0};
  const std::vector<double> d_prev{0.0, 1.0};

  SECTION("first iteration always uses the raw subgradient") {
    for (Variant v : {Variant::sg1, Variant::sg3, Variant::sg6})
      CHECK(direction(make_rule(v), 0, g, {}, {}) == g);
  }
  SECTION("convex combination of successive subgradients") {
    const std::vector<double> d = direction(make_rule(Variant::sg6, 0.7), 1, g, g_prev, d_prev);
    REQUIRE(d.size() == 2);
    CHECK(d[0] == Catch::Approx(0.7));
    CHECK(d[1] == Catch::Approx(0.3));
  }
  SECTION("constant deflection adds the scaled previous direction") {
    const std::vector<double> d = direction(make_rule(Variant::sg4), 1, g, g_prev, d_prev);
    CHECK(d[0] == Catch::Approx(1.0));
    CHECK(d[1] == Catch::Approx(0.8));
  }
  SECTION("vanishing combined direction falls back to the subgradient") {
    // d = g + 0.8 * d_prev = 0 exactly
    const std::vector<double> tiny_g{-0.8, 0.0};
    const std::vector<double> prev{1.0, 0.0};
    const std::vector<double> d = direction(make_rule(Variant::sg4), 1, tiny_g, prev, prev);
    CHECK(d == tiny_g);
  }
}

TEST_CASE("step length is the scaled remaining gap over the squared direction",
          "[solver][step]") {
  SECTION("textbook values") {
    CHECK(step_length(2.0, 100.0, 60.0, {4.0, 0.0}) == Catch::Approx(5.0));
    CHECK(step_length(0.01, 18.0, 10.0, {2.0, 0.0}) == Catch::Approx(0.02));
  }
  SECTION("closed gap gives a zero step") {
    CHECK(step_length(2.0, 50.0, 50.0, {1.0, 1.0}) == 0.0);
  }
  SECTION("zero direction is rejected") {
    CHECK_THROWS_AS(step_length(2.0, 100.0, 60.0, {0.0, 0.0}), std::invalid_argument);
  }
}

TEST_CASE("beta schedules", "[solver][step]") {
  SECTION("initial values") {
    CHECK(make_step_rule(StepTag::r1, 10, 15).beta == 2.0);
    CHECK(make_step_rule(StepTag::r2, 10, 15).beta == 2.0);
    CHECK(make_step_rule(StepTag::r3, 10, 15).beta == 2.0);
    CHECK(make_step_rule(StepTag::r4, 10, 15).beta == 0.01);
    CHECK(make_step_rule(StepTag::r5, 10, 15).beta == 0.1);
    CHECK(make_step_rule(StepTag::r6, 10, 15).beta == 1.99);
  }
  SECTION("halving on failure to improve") {
    StepRule r = make_step_rule(StepTag::r1, 10, 15);
    CHECK(beta_update(r, true, 0) == 2.0);
    CHECK(beta_update(r, false, 1) == 1.0);
    CHECK(beta_update(r, false, 2) == 0.5);
    CHECK(beta_update(r, true, 3) == 0.5);  // improvement holds beta
  }
  SECTION("halving every two-n iterations") {
    StepRule r = make_step_rule(StepTag::r2, 10, 15);
    for (long q = 0; q < 20; ++q) CHECK(beta_update(r, false, q) == 2.0);
    CHECK(beta_update(r, false, 20) == 1.0);
    for (long q = 21; q < 40; ++q) CHECK(beta_update(r, false, q) == 1.0);
    CHECK(beta_update(r, false, 40) == 0.5);
  }
  SECTION("halving every two-m iterations") {
    StepRule r = make_step_rule(StepTag::r3, 10, 15);
    for (long q = 0; q < 30; ++q) CHECK(beta_update(r, false, q) == 2.0);
    CHECK(beta_update(r, false, 30) == 1.0);
  }
  SECTION("constant rules ignore the improvement signal") {
    for (StepTag tag : {StepTag::r4, StepTag::r5, StepTag::r6}) {
      StepRule r = make_step_rule(tag, 10, 15);
      const double initial = r.beta;
      for (long q = 0; q < 100; ++q) CHECK(beta_update(r, false, q) == initial);
    }
  }
  SECTION("halving never goes below the floor") {
    StepRule r = make_step_rule(StepTag::r1, 10, 15);
    for (long q = 0; q < 200; ++q) beta_update(r, false, q);
    CHECK(r.beta == 1e-12);
  }
}

TEST_CASE("multiplier update projects onto the nonnegative orthant", "[solver][step]") {
  const MultiplierVector w{0.0, 0.0, 2.0};
  const std::vector<double> d{0.0, -6.0, 2.0};
  const MultiplierVector next = update_multipliers(w, 0.5, d);
  REQUIRE(next.size() == 3);
  CHECK(next[0] == 0.0);
  CHECK(next[1] == 0.0);  // 0 - 3 clamps to 0
  CHECK(next[2] == Catch::Approx(3.0));
}

TEST_CASE("feasible-design upper bound", "[solver][ub]") {
  SECTION("triangle instance installs one large facility") {
    const UpperBound ub = compute_upper_bound(make_tri3());
    CHECK(ub.feasible);
    CHECK(ub.value == Catch::Approx(18.0));
  }
  SECTION("no demand costs nothing") {
    Instance inst;
    inst.node_count = 2;
    Edge e;
    e.u = 0;
    e.v = 1;
    e.facilities = {{5, 10}};
    inst.edges.push_back(e);
    CHECK(compute_upper_bound(inst).value == 0.0);
  }
  SECTION("oversized single demand is reported as infeasible") {
    CHECK_THROWS_AS(compute_upper_bound(infeasible_pair()), InfeasibleError);
  }
  SECTION("bound never undercuts the exhaustive optimum") {
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 4ULL}) {
      GeneratorParams p;
      p.node_count = 5;
      p.edge_count = 7;
      p.facility_count = 2;
      p.seed = seed;
      p.demand_max = 4;  // small demands keep two commodities routable
      Instance inst = generate_random(p);
      inst.commodities.resize(2);  // exhaustive search handles few commodities
      const UpperBound ub = compute_upper_bound(inst);
      const double opt = brute_force_opt(inst);
      INFO("seed " << seed);
      REQUIRE(std::isfinite(opt));
      REQUIRE(ub.feasible);
      REQUIRE(ub.value >= opt - 1e-9);
    }
  }
}

TEST_CASE("solve loop on the triangle instance", "[solver][run]") {
  SolverConfig config;

  SECTION("bounds bracket between the root dual value and the optimum") {
    const SolverReport report = run(make_tri3(), config);
    CHECK(report.upper_bound == Catch::Approx(18.0));
    CHECK(report.ub_feasible);
    CHECK(report.best_theta >= 10.0 - 1e-9);
    CHECK(report.best_theta <= 18.0 + 1e-6);
    CHECK(report.stop_reason != StopReason::iteration_cap);
    CHECK(report.all_y_exact);
    CHECK(report.iterations > 0);
    CHECK(static_cast<long>(report.trajectory.size()) == report.iterations);
  }
  SECTION("every variant and rule stays within the same bracket") {
    for (Variant v : {Variant::sg1, Variant::sg2, Variant::sg3, Variant::sg4, Variant::sg5,
                      Variant::sg6})
      for (StepTag r : {StepTag::r1, StepTag::r2, StepTag::r3, StepTag::r4, StepTag::r5,
                        StepTag::r6}) {
        config.direction.variant = v;
        config.step = r;
        const SolverReport report = run(make_tri3(), config);
        INFO(to_string(v) << "/" << to_string(r));
        REQUIRE(report.best_theta >= 10.0 - 1e-9);
        REQUIRE(report.best_theta <= report.upper_bound + 1e-6);
      }
  }
  SECTION("matching bound override stops immediately with a closed gap") {
    config.upper_bound = 10.0;  // equals the dual value at the zero multipliers
    const SolverReport report = run(make_tri3(), config);
    CHECK(report.stop_reason == StopReason::gap_closed);
    CHECK(report.iterations == 1);
  }
}

TEST_CASE("solve loop handles degenerate inputs", "[solver][run]") {
  SECTION("no commodities stop on the zero subgradient") {
    Instance inst;
    inst.node_count = 2;
    Edge e;
    e.u = 0;
    e.v = 1;
    e.facilities = {{5, 10}};
    inst.edges.push_back(e);

    const SolverReport report = run(inst, SolverConfig{});
    CHECK(report.stop_reason == StopReason::zero_gradient);
    CHECK(report.best_theta == 0.0);
    CHECK(report.iterations == 1);
  }
  SECTION("infeasible demand surfaces from the bound heuristic") {
    CHECK_THROWS_AS(run(infeasible_pair(), SolverConfig{}), InfeasibleError);
  }
  SECTION("invalid configuration is rejected") {
    SolverConfig bad;
    bad.max_stall = 0;
    CHECK_THROWS_AS(run(make_tri3(), bad), std::invalid_argument);
    bad = SolverConfig{};
    bad.direction.alpha = 0.0;
    CHECK_THROWS_AS(run(make_tri3(), bad), std::invalid_argument);
    bad = SolverConfig{};
    bad.direction.alpha = 1.5;
    CHECK_THROWS_AS(run(make_tri3(), bad), std::invalid_argument);
  }
}

TEST_CASE("solver is deterministic", "[solver][run]") {
  GeneratorParams p;
  p.node_count = 10;
  p.edge_count = 15;
  p.seed = 6;
  const Instance inst = generate_random(p);

  SolverConfig config;
  config.direction.variant = Variant::sg3;
  config.step = StepTag::r2;
  const SolverReport a = run(inst, config);
  const SolverReport b = run(inst, config);
  CHECK(a.best_theta == b.best_theta);
  CHECK(a.iterations == b.iterations);
  CHECK(a.stop_reason == b.stop_reason);
  REQUIRE(a.trajectory.size() == b.trajectory.size());
  for (std::size_t i = 0; i < a.trajectory.size(); ++i) {
    CHECK(a.trajectory[i].theta == b.trajectory[i].theta);
    CHECK(a.trajectory[i].lambda == b.trajectory[i].lambda);
  }
}

TEST_CASE("plain variant walks exactly along the subgradient", "[solver][run]") {
  GeneratorParams p;
  p.node_count = 8;
  p.edge_count = 12;
  p.seed = 14;
  const Instance inst = generate_random(p);

  SolverConfig config;
  config.direction.variant = Variant::sg1;
  long checked = 0;
  config.observer = [&](const IterationView& view) {
    if (view.direction.empty()) return;  // stopping iteration records no direction
    REQUIRE(view.direction == view.evaluation.subgradient);
    ++checked;
  };
  run(inst, config);
  CHECK(checked > 0);
}

TEST_CASE("best dual value never decreases along the trajectory", "[solver][run]") {
  GeneratorParams p;
  p.node_count = 9;
  p.edge_count = 14;
  p.seed = 25;
  const Instance inst = generate_random(p);

  for (StepTag tag : {StepTag::r1, StepTag::r4}) {
    SolverConfig config;
    config.step = tag;
    const SolverReport report = run(inst, config);
    double best = -1e300;
    for (const IterationRecord& rec : report.trajectory) {
      REQUIRE(rec.best_theta >= best - 1e-12);
      best = rec.best_theta;
      REQUIRE(rec.best_theta >= rec.theta - 1e-12);
    }
    REQUIRE(best == Catch::Approx(report.best_theta));
  }
}

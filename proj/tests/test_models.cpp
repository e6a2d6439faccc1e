#include <doctest.h>

#include "robusthedge/models.hpp"
#include "robusthedge/simulation.hpp"
#include "support.hpp"

#include <numeric>

using namespace robusthedge;

namespace {

Vector v1(double x) { return Vector::Constant(1, x); }

TreeFamily binomial(int periods, std::vector<Vector> probs = {Eigen::Vector2d(0.5, 0.5)}) {
  return lattice_family(v1(100.0), {v1(1.1), v1(0.9)}, periods, probs);
}

}  // namespace

TEST_SUITE("models") {
  TEST_CASE("one-period binomial") {
    const TreeFamily fam = binomial(1);
    REQUIRE(fam.size() == 3);
    CHECK(fam.node(1).S(0) == doctest::Approx(110.0));
    CHECK(fam.node(2).S(0) == doctest::Approx(90.0));
    CHECK(fam.model_count() == 1);
    CHECK(fam.horizon() == 1);
    CHECK(fam.reach_probability(0, 1) == 0.5);
    CHECK(fam.find("0.1") == 2);
    CHECK(fam.find("missing") == kNoNode);
  }

  TEST_CASE("trinomial with two models shares supports") {
    const TreeFamily fam = lattice_family(v1(100.0), {v1(1.1), v1(1.0), v1(0.9)}, 2,
                                          {Eigen::Vector3d(0.2, 0.5, 0.3), Eigen::Vector3d(0.3, 0.4, 0.3)});
    CHECK(fam.model_count() == 2);
    CHECK(fam.size() == 13);
    for (NodeIndex v = 0; v < fam.size(); ++v)
      if (!fam.is_terminal(v)) CHECK(model_support(fam, 0, v) == model_support(fam, 1, v));
  }

  TEST_CASE("three periods of three children") {
    const TreeFamily fam = lattice_family(v1(1.0), {v1(1.2), v1(1.0), v1(0.8)}, 3, {Eigen::Vector3d::Constant(1.0 / 3)});
    CHECK(fam.size() == 40);
    CHECK(fam.terminal_nodes().size() == 27);
    CHECK(fam.level(2).size() == 9);
  }

  TEST_CASE("volatility lattice") {
    const double dt = 0.25;
    const TreeFamily bin = volatility_lattice(100.0, 0.1, 0.2, dt, 2, 2);
    CHECK(bin.node(1).S(0) == doctest::Approx(100.0 * std::exp(0.2 * 0.5)));
    const TreeFamily tri = volatility_lattice(100.0, 0.1, 0.2, dt, 1, 3);
    CHECK(tri.model_count() == 2);
    const double u = 0.2 * std::sqrt(dt);
    for (std::size_t k = 0; k < 2; ++k) {
      const Vector& p = tri.model(k).transitions[0];
      double var = 0.0;
      for (Index c = 0; c < 3; ++c) {
        const double x = std::log(tri.node(tri.node(0).children[c]).S(0) / 100.0);
        var += p(c) * x * x;
      }
      const double sigma = k == 0 ? 0.1 : 0.2;
      CHECK(var == doctest::Approx(sigma * sigma * dt));
      CHECK(p.sum() == doctest::Approx(1.0));
      CHECK(u > 0.0);
    }
    CHECK_THROWS_AS(volatility_lattice(100.0, 0.3, 0.2, dt, 1, 3), std::invalid_argument);
  }

  TEST_CASE("build_tree_family rejects malformed specs") {
    TreeSpec spec;
    spec.nodes = {{"r", 0, v1(1.0)}, {"u", 1, v1(1.1)}, {"d", 1, v1(0.9)}};
    spec.edges = {{"r", "u"}, {"r", "d"}};
    spec.models = {{"P", {{"r->u", 0.5}, {"r->d", 0.5}}}};
    CHECK(build_tree_family(spec).size() == 3);

    TreeSpec sums = spec;
    sums.models[0].probabilities["r->d"] = 0.6;
    CHECK_THROWS_AS(build_tree_family(sums), std::invalid_argument);

    TreeSpec dangling = spec;
    dangling.edges.pop_back();
    CHECK_THROWS_AS(build_tree_family(dangling), std::invalid_argument);

    TreeSpec negative = spec;
    negative.nodes[2].S = v1(-1.0);
    negative.require_nonnegative_S = true;
    CHECK_THROWS_AS(build_tree_family(negative), std::invalid_argument);
    negative.require_nonnegative_S = false;
    CHECK_NOTHROW(build_tree_family(negative));

    TreeSpec unknown = spec;
    unknown.edges.push_back({"r", "x"});
    CHECK_THROWS_AS(build_tree_family(unknown), std::invalid_argument);
  }

  TEST_CASE("condition") {
    const TreeFamily fam = binomial(2, {Eigen::Vector2d(0.2, 0.8)});
    const TreeFamily same = condition(fam, 0);
    CHECK(same.size() == fam.size());
    for (NodeIndex v = 0; v < fam.size(); ++v) CHECK(same.node(v).S == fam.node(v).S);

    const TreeFamily up = condition(fam, 1);
    CHECK(up.size() == 3);
    CHECK(up.horizon() == 1);
    CHECK(up.node(0).S(0) == doctest::Approx(110.0));
    CHECK(up.model(0).transitions[0](0) == doctest::Approx(0.2));

    const TreeFamily half = lattice_family(v1(100.0), {v1(1.1), v1(0.9)}, 2, {Eigen::Vector2d(0.5, 0.5)});
    CHECK(condition(half, 1).model(0).transitions[0](1) == 0.5);

    const TreeFamily dead = lattice_family(v1(100.0), {v1(1.1), v1(0.9)}, 2, {Eigen::Vector2d(1.0, 0.0)});
    CHECK_THROWS_AS(condition(dead, 2), std::invalid_argument);
  }

  TEST_CASE("conditioning equals Bayes renormalization of cylinder probabilities") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
      const TreeFamily fam = testsupport::random_family(rng, {});
      for (NodeIndex v = 0; v < fam.size(); ++v) {
        std::vector<std::size_t> alive;
        for (std::size_t k = 0; k < fam.model_count(); ++k)
          if (fam.reach_probability(k, v) > 0.0) alive.push_back(k);
        if (alive.empty()) continue;
        const TreeFamily sub = condition(fam, v);
        REQUIRE(sub.model_count() == alive.size());
        for (std::size_t j = 0; j < alive.size(); ++j)
          for (NodeIndex u = 0; u < sub.size(); ++u) {
            const double bayes = fam.reach_probability(alive[j], sub.node(u).origin) / fam.reach_probability(alive[j], v);
            CHECK(std::abs(sub.reach_probability(j, u) - bayes) <= 1e-12);
          }
      }
    }
  }

  TEST_CASE("truncate") {
    const TreeFamily fam = binomial(3);
    const TreeFamily t1 = truncate(fam, 1);
    CHECK(t1.size() == 3);
    CHECK(t1.horizon() == 1);
    CHECK(truncate(fam, 3).size() == fam.size());
  }

  TEST_CASE("paste") {
    const TreeFamily fam = lattice_family(v1(100.0), {v1(1.1), v1(0.9)}, 2,
                                          {Eigen::Vector2d(0.5, 0.5), Eigen::Vector2d(0.2, 0.8)});
    // Original conditionals reproduce the law.
    std::map<NodeIndex, ConditionalLaw> own;
    for (NodeIndex v : fam.level(1)) {
      const TreeFamily sub = condition(fam, v);
      own.emplace(v, ConditionalLaw{sub, sub.model(0)});
    }
    CHECK(paste(fam, fam.model(0), 1, own).transitions == fam.model(0).transitions);

    // Model-2 conditionals after a model-1 prefix: products by hand.
    std::map<NodeIndex, ConditionalLaw> other;
    for (NodeIndex v : fam.level(1)) {
      const TreeFamily sub = condition(fam, v);
      other.emplace(v, ConditionalLaw{sub, sub.model(1)});
    }
    const ModelLaw glued = paste(fam, fam.model(0), 1, other);
    const NodeIndex uu = fam.find("0.0.0"), ud = fam.find("0.0.1"), du = fam.find("0.1.0");
    CHECK(path_probability(fam, glued, uu) == doctest::Approx(0.5 * 0.2));
    CHECK(path_probability(fam, glued, ud) == doctest::Approx(0.5 * 0.8));
    CHECK(path_probability(fam, glued, du) == doctest::Approx(0.5 * 0.2));
    for (NodeIndex v : fam.level(1))
      CHECK(path_probability(fam, glued, v) == path_probability(fam, fam.model(0), v));

    const TreeFamily elsewhere = lattice_family(v1(100.0), {v1(1.2), v1(0.8)}, 3, {Eigen::Vector2d(0.5, 0.5)});
    std::map<NodeIndex, ConditionalLaw> foreign;
    const TreeFamily wrong = condition(elsewhere, 2);
    foreign.emplace(1, ConditionalLaw{wrong, wrong.model(0)});
    CHECK_THROWS_AS(paste(fam, fam.model(0), 1, foreign), std::invalid_argument);
  }

  TEST_CASE("supports") {
    TreeSpec spec;
    spec.nodes = {{"r", 0, v1(1.0)}, {"u", 1, v1(1.1)}, {"m", 1, v1(1.0)}, {"d", 1, v1(0.9)}, {"x", 1, v1(2.0)}};
    spec.edges = {{"r", "u"}, {"r", "m"}, {"r", "d"}, {"r", "x"}};
    spec.models = {{"A", {{"r->u", 0.5}, {"r->m", 0.5}, {"r->d", 0.0}, {"r->x", 0.0}}},
                   {"B", {{"r->u", 0.0}, {"r->m", 0.5}, {"r->d", 0.5}, {"r->x", 0.0}}}};
    const TreeFamily fam = build_tree_family(spec);
    CHECK(supports(fam, 0) == std::vector<NodeIndex>{1, 2, 3});
    CHECK(model_support(fam, 0, 0) == std::vector<NodeIndex>{1, 2});
    CHECK(supports(binomial(1), 0) == std::vector<NodeIndex>{1, 2});
  }

  TEST_CASE("expectations") {
    const TreeFamily fam = binomial(2, {Eigen::Vector2d(0.3, 0.7)});
    std::vector<double> S(fam.size());
    for (NodeIndex v = 0; v < fam.size(); ++v) S[v] = fam.node(v).S(0);
    const double e = expectation(fam, fam.model(0), S);
    const double m = 0.3 * 1.1 + 0.7 * 0.9;
    CHECK(e == doctest::Approx(100.0 * m * m));
    const auto ce = conditional_expectation(fam, fam.model(0), S, 1);
    REQUIRE(ce.size() == 2);
    CHECK(ce[0] == doctest::Approx(110.0 * m));
    CHECK(ce[1] == doctest::Approx(90.0 * m));
  }

  TEST_CASE("simulate_paths") {
    auto spec = UncertaintySpec::scalar(100.0, 0.04, 0.04, 1.0, 50);
    SUBCASE("degenerate diffusion is a straight line") {
      auto drifting = UncertaintySpec::scalar(100.0, 0.0, 0.04, 1.0, 50);
      drifting.drift_hi = v1(2.0);
      const auto paths = simulate_paths(drifting, constant_policy(v1(2.0), Matrix::Zero(1, 1)), 3, 1);
      for (std::size_t i = 0; i < paths[0].size(); ++i)
        CHECK(paths[0].value(i)(0) == doctest::Approx(100.0 + 2.0 * paths[0].grid()[i]));
      CHECK(lifetime(paths[0]).is_infinite());
    }
    SUBCASE("deterministic in the seed") {
      const auto band = UncertaintySpec::scalar(100.0, 0.01, 0.04, 1.0, 50);
      const auto policy = random_volatility_policy(band, 5);
      const auto a = simulate_paths(band, policy, 20, 42);
      const auto b = simulate_paths(band, policy, 20, 42);
      CHECK(a == b);
      CHECK_FALSE(a == simulate_paths(band, policy, 20, 43));
    }
    SUBCASE("driftless terminal mean") {
      const auto paths = simulate_paths(spec, constant_policy(v1(0.0), Matrix::Constant(1, 1, 0.2)), 100000, 9);
      double sum = 0.0, sum2 = 0.0;
      for (const auto& p : paths) {
        const double x = p.value(p.size() - 1)(0);
        sum += x;
        sum2 += x * x;
      }
      const double n = static_cast<double>(paths.size());
      const double mean = sum / n;
      const double se = std::sqrt((sum2 / n - mean * mean) / n);
      CHECK(std::abs(mean - 100.0) <= 3.0 * se);
    }
    SUBCASE("random volatility stays in the band") {
      const auto band = UncertaintySpec::scalar(100.0, 0.01, 0.04, 1.0, 10);
      const auto policy = random_volatility_policy(band, 3);
      Vector s = v1(100.0);
      for (std::size_t k = 0; k < 10; ++k) {
        PolicyContext ctx;
        ctx.path_index = 1;
        ctx.step = k;
        ctx.state = &s;
        CHECK(band.admits_volatility(policy(ctx).sigma));
      }
    }
    CHECK_THROWS_AS(UncertaintySpec::scalar(100.0, 0.04, 0.01, 1.0, 10).validate(), std::invalid_argument);
  }
}

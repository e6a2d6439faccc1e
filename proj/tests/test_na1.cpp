#include <doctest.h>

#include "robusthedge/na1.hpp"
#include "support.hpp"

using namespace robusthedge;

namespace {

Vector v1(double x) { return Vector::Constant(1, x); }

TreeFamily one_step(std::vector<double> children, std::vector<std::vector<double>> models, double root = 1.0) {
  TreeSpec spec;
  spec.nodes.push_back({"r", 0, v1(root)});
  for (std::size_t c = 0; c < children.size(); ++c) {
    spec.nodes.push_back({"c" + std::to_string(c), 1, v1(children[c])});
    spec.edges.push_back({"r", "c" + std::to_string(c)});
  }
  for (std::size_t k = 0; k < models.size(); ++k) {
    TreeSpec::ModelSpec m{"M" + std::to_string(k), {}};
    for (std::size_t c = 0; c < children.size(); ++c) m.probabilities["r->c" + std::to_string(c)] = models[k][c];
    spec.models.push_back(m);
  }
  return build_tree_family(spec);
}

}  // namespace

TEST_SUITE("na1") {
  TEST_CASE("node feasibility examples") {
    const auto sym = node_feasibility(v1(1.0), {v1(1.1), v1(0.9)});
    REQUIRE(sym);
    CHECK((*sym)(0) == doctest::Approx(0.5));
    CHECK((*sym)(1) == doctest::Approx(0.5));

    CHECK_FALSE(node_feasibility(v1(1.0), {v1(0.5), v1(0.8)}));
    CHECK(testsupport::grid_feasibility({v1(-0.5), v1(-0.2)}, 1e-3) == testsupport::Decision::kInfeasible);

    const auto flat = node_feasibility(v1(1.0), {v1(1.0), v1(1.0), v1(1.0)});
    REQUIRE(flat);
    CHECK(flat->minCoeff() > 0.0);
    CHECK(flat->sum() == doctest::Approx(1.0));

    // Boundary: zero reachable only with a vanishing weight.
    CHECK_FALSE(node_feasibility(v1(1.0), {v1(1.0), v1(1.5)}));
    const auto lp = node_feasibility_lp(v1(1.0), {v1(1.0), v1(1.5)});
    CHECK(lp.margin <= kFeasibilityThreshold);
  }

  TEST_CASE("two-dimensional feasibility") {
    const Vector s = Eigen::Vector2d(1.0, 1.0);
    const auto q = node_feasibility(s, {Eigen::Vector2d(2.0, 1.0), Eigen::Vector2d(0.5, 2.0), Eigen::Vector2d(0.5, 0.0)});
    REQUIRE(q);
    Vector mean = Vector::Zero(2);
    mean += (*q)(0) * Eigen::Vector2d(2.0, 1.0) + (*q)(1) * Eigen::Vector2d(0.5, 2.0) + (*q)(2) * Eigen::Vector2d(0.5, 0.0);
    CHECK((mean - s).norm() <= 1e-12);
    CHECK_FALSE(node_feasibility(s, {Eigen::Vector2d(2.0, 2.0), Eigen::Vector2d(1.5, 3.0)}));
  }

  TEST_CASE("binomial lattice holds with the risk-neutral weights") {
    const TreeFamily fam = lattice_family(v1(100.0), {v1(1.1), v1(0.9)}, 3,
                                          {Eigen::Vector2d(0.3, 0.7), Eigen::Vector2d(0.6, 0.4)});
    const Na1Report rep = na1_check(fam);
    CHECK(rep.holds);
    CHECK_FALSE(rep.certificate);
    REQUIRE(rep.measures.size() == 2);
    for (const auto& Q : rep.measures) {
      CHECK(martingale_defect(fam, Q) <= 1e-10);
      for (NodeIndex v = 0; v < fam.size(); ++v) {
        if (fam.is_terminal(v)) continue;
        const double su = fam.node(fam.node(v).children[0]).S(0), sd = fam.node(fam.node(v).children[1]).S(0);
        CHECK(Q.weights[v](0) == doctest::Approx((fam.node(v).S(0) - sd) / (su - sd)).epsilon(1e-12));
        CHECK(Q.cemetery[v] == 0.0);
      }
    }
  }

  TEST_CASE("both children below the node") {
    const TreeFamily fam = one_step({0.5, 0.8}, {{0.5, 0.5}});
    const Na1Report rep = na1_check(fam);
    CHECK_FALSE(rep.holds);
    REQUIRE(rep.certificate);
    const auto& cert = *rep.certificate;
    CHECK(cert.node == 0);
    CHECK(cert.h(0) == doctest::Approx(-1.0));
    CHECK(cert.capital == 0.0);
    CHECK(cert.claim[1] == doctest::Approx(0.5));
    CHECK(cert.claim[2] == doctest::Approx(0.2));
    CHECK(certificate_validate(fam, cert));

    ArbitrageCertificate zero = cert;
    zero.h.setZero();
    std::fill(zero.claim.begin(), zero.claim.end(), 0.0);
    CHECK_FALSE(certificate_validate(fam, zero));

    ArbitrageCertificate tampered = cert;
    tampered.claim[1] += 0.1;
    CHECK_FALSE(certificate_validate(fam, tampered));

    const TreeFamily repaired = one_step({0.5, 1.3}, {{0.5, 0.5}});
    CHECK(na1_check(repaired).holds);
    CHECK_FALSE(certificate_validate(repaired, cert));
  }

  TEST_CASE("disjoint model supports") {
    const TreeFamily fam = one_step({1.1, 0.9, 1.2, 0.8}, {{0.5, 0.5, 0.0, 0.0}, {0.0, 0.0, 0.5, 0.5}});
    const Na1Report rep = na1_check(fam);
    REQUIRE(rep.holds);
    REQUIRE(rep.measures.size() == 2);
    CHECK(rep.measures[0].weights[0](2) == 0.0);
    CHECK(rep.measures[1].weights[0](0) == 0.0);
    CHECK(rep.measures[0].weights[0](0) == doctest::Approx(0.5));
    CHECK(rep.measures[1].weights[0](2) == doctest::Approx(0.5));
  }

  TEST_CASE("model-wise failure still produces a certificate") {
    // Union support contains 1 in its hull, model 0 alone does not.
    const TreeFamily fam = one_step({0.5, 0.8, 1.5}, {{0.5, 0.5, 0.0}, {0.0, 0.5, 0.5}});
    const Na1Report rep = na1_check(fam);
    CHECK_FALSE(rep.holds);
    REQUIRE(rep.certificate);
    CHECK_FALSE(rep.certificate->quasi_sure);
    CHECK(rep.certificate->model == 0);
    CHECK(certificate_support(fam, *rep.certificate) == std::vector<NodeIndex>{1, 2});
    CHECK(certificate_validate(fam, *rep.certificate));
  }

  TEST_CASE("random families round trip") {
    std::mt19937_64 rng(99);
    int holds = 0, fails = 0;
    for (int trial = 0; trial < 100; ++trial) {
      testsupport::FamilyOptions opt;
      opt.feasible = trial % 2 == 0;
      opt.dimension = 1 + trial % 3 % 2;
      const TreeFamily fam = testsupport::random_family(rng, opt);
      const Na1Report rep = na1_check(fam);
      if (rep.holds) {
        ++holds;
        REQUIRE(rep.measures.size() == fam.model_count());
        for (std::size_t k = 0; k < fam.model_count(); ++k) {
          const auto& Q = rep.measures[k];
          CHECK_NOTHROW(Q.validate(fam));
          CHECK(martingale_defect(fam, Q) <= 1e-10);
          for (NodeIndex v = 0; v < fam.size(); ++v) {
            if (fam.is_terminal(v) || fam.reach_probability(k, v) == 0.0) continue;
            for (Index c = 0; c < Q.weights[v].size(); ++c)
              CHECK((Q.weights[v](c) > 0.0) == (fam.model(k).transitions[v](c) > 0.0));
          }
        }
      } else {
        ++fails;
        REQUIRE(rep.certificate);
        CHECK(certificate_validate(fam, *rep.certificate));
      }
      if (opt.feasible) CHECK(rep.holds);
    }
    CHECK(holds > 0);
    CHECK(fails > 0);
  }
}

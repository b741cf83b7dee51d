#include <doctest.h>

#include <cmath>

#include "dagsmooth/errors.hpp"
#include "dagsmooth/rng.hpp"
#include "dagsmooth/smoothing.hpp"
#include "dagsmooth/validation.hpp"
#include "testutil.hpp"

using namespace dagsmooth;
using testutil::make_dag;

namespace {

// Silence clamp warnings for the whole translation unit.
struct Quiet {
  Quiet() {
    set_warning_handler([](const std::string&) {});
  }
} quiet;

Dag two_node_chain() { return testutil::chain(2); }

}  // namespace

TEST_CASE("spec parsing round-trips and rejects junk") {
  for (const char* text : {"none", "fisher", "stouffer", "tippett", "ruger:2", "genmean:0.5",
                           "genmean:1", "cons-stouffer:children", "cons-stouffer:descendants"}) {
    CHECK(SmoothingSpec::parse(text).name() == text);
  }
  CHECK(SmoothingSpec::parse("cons-stouffer").name() == "cons-stouffer:children");
  CHECK_THROWS_AS(SmoothingSpec::parse("ruger"), SpecMismatch);
  CHECK_THROWS_AS(SmoothingSpec::parse("genmean:0"), SpecMismatch);
  CHECK_THROWS_AS(SmoothingSpec::parse("genmean:1.5"), SpecMismatch);
  CHECK_THROWS_AS(SmoothingSpec::parse("fisher:3"), SpecMismatch);
  CHECK_THROWS_AS(SmoothingSpec::parse("bogus"), SpecMismatch);
  CHECK_THROWS_AS(SmoothingSpec::parse("cons-stouffer:sideways"), SpecMismatch);
}

TEST_CASE("method none is the exact identity") {
  Dag d = testutil::chain(3);
  PValueVector p = {0.0, 0.5, 1.0};
  SmoothingSpec spec;  // none
  CHECK(smooth(d, p, spec) == p);
}

TEST_CASE("single-node graph: every method reduces to the identity") {
  Dag d = make_dag(1, {});
  PValueVector p = {0.37};
  for (const char* text : {"fisher", "stouffer", "tippett", "ruger:3", "genmean:1", "genmean:0.5"})
    CHECK(smooth(d, p, SmoothingSpec::parse(text))[0] == doctest::Approx(0.37).epsilon(1e-12));
  // Conservative Stouffer keeps small values and truncates the rest to one.
  CHECK(smooth_conservative_stouffer(d, {0.3}, ConsWeightScheme::self_plus_children)[0] ==
        doctest::Approx(0.3).epsilon(1e-9));
  CHECK(smooth_conservative_stouffer(d, {0.7}, ConsWeightScheme::self_plus_children)[0] == 1.0);
}

TEST_CASE("fisher: frozen two-node value and leaf identity") {
  Dag d = two_node_chain();
  auto pt = smooth_fisher(d, {0.5, 0.5});
  CHECK(std::abs(pt[0] - 0.5965735903) < 1e-9);
  CHECK(pt[1] == doctest::Approx(0.5).epsilon(1e-12));  // leaf closure is a singleton

  auto ones = smooth_fisher(d, {1.0, 1.0});
  CHECK(ones[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("fisher dispatch equals the direct function") {
  Dag d = testutil::chain(3);
  PValueVector p = {0.01, 0.02, 0.9};
  CHECK(smooth(d, p, SmoothingSpec::parse("fisher")) == smooth_fisher(d, p));
}

TEST_CASE("stouffer: frozen example against the normal oracle") {
  Dag d = two_node_chain();
  auto pt = smooth_stouffer(d, {0.025, 0.025});
  // Oracle: Phi(2 * Phi^-1(0.025) / sqrt(2)).
  double z = std_normal_quantile(0.025);
  double want = testutil::oracle_normal_cdf(2.0 * z / std::sqrt(2.0));
  CHECK(std::abs(pt[0] - 0.0027873) < 1e-6);
  CHECK(pt[0] == doctest::Approx(want).epsilon(1e-10));
  CHECK(pt[1] == doctest::Approx(0.025).epsilon(1e-12));

  auto half = smooth_stouffer(d, {0.5, 0.5});
  CHECK(half[0] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("order smoothing: tippett closed form and ruger oracle") {
  // Root with closure {0,1,2}; minimum 0.1 -> 1 - 0.9^3.
  Dag star = make_dag(3, {{0, 1}, {0, 2}});
  auto pt = smooth_order(star, {0.5, 0.1, 0.9}, 1);
  CHECK(pt[0] == doctest::Approx(0.271).epsilon(1e-12));
  CHECK(pt[1] == doctest::Approx(0.1).epsilon(1e-12));

  // Closure of size 5, k=2: second smallest is 0.3.
  Dag fan = make_dag(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}});
  auto p2 = smooth_order(fan, {0.35, 0.3, 0.55, 0.2, 0.9}, 2);
  CHECK(p2[0] == doctest::Approx(beta_cdf(0.3, 2, 4)).epsilon(1e-14));

  // Order clamps to the closure size.
  auto p9 = smooth_order(fan, {0.35, 0.3, 0.55, 0.2, 0.9}, 9);
  CHECK(p9[0] == doctest::Approx(beta_cdf(0.9, 5, 1)).epsilon(1e-14));
}

TEST_CASE("generalized mean r=1: irwin-hall closed form") {
  Dag d = two_node_chain();
  auto pt = smooth_generalized_mean(d, {0.5, 0.5}, 1.0, 100000, 1);
  CHECK(pt[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(pt[1] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("generalized mean r=0.5: within Monte Carlo error of a fresh oracle") {
  Dag star = make_dag(3, {{0, 1}, {0, 2}});
  PValueVector p = {0.1, 0.2, 0.3};
  const double r = 0.5;
  auto pt = smooth_generalized_mean(star, p, r, 100000, 42);

  // Independent estimate with a different seed and a bigger budget.
  double stat = std::pow((std::pow(0.1, r) + std::pow(0.2, r) + std::pow(0.3, r)) / 3.0, 1.0 / r);
  RngStream rng(777777);
  const int big = 1000000;
  int count = 0;
  for (int i = 0; i < big; ++i) {
    double s = std::pow(rng.uniform(), r) + std::pow(rng.uniform(), r) + std::pow(rng.uniform(), r);
    count += std::pow(s / 3.0, 1.0 / r) <= stat;
  }
  double est = static_cast<double>(count) / big;
  double se = std::sqrt(est * (1.0 - est) / big + est * (1.0 - est) / 100000.0);
  CHECK(std::abs(pt[0] - est) < 3.0 * se + 1e-4);
}

TEST_CASE("conservative stouffer: branch behavior") {
  Dag leaf = make_dag(1, {});
  CHECK(smooth_conservative_stouffer(leaf, {0.3}, ConsWeightScheme::self_plus_children)[0] ==
        doctest::Approx(0.3).epsilon(1e-9));
  CHECK(smooth_conservative_stouffer(leaf, {0.7}, ConsWeightScheme::self_plus_children)[0] == 1.0);

  Dag d = two_node_chain();
  // Equal and opposite z-scores sum to zero: the boundary goes to one.
  CHECK(smooth_conservative_stouffer(d, {0.5, 0.5}, ConsWeightScheme::self_plus_children)[0] ==
        1.0);

  // all_descendants uses the closure; on a chain of 2 they coincide.
  auto a = smooth_conservative_stouffer(d, {0.2, 0.3}, ConsWeightScheme::self_plus_children);
  auto b = smooth_conservative_stouffer(d, {0.2, 0.3}, ConsWeightScheme::all_descendants);
  CHECK(a[0] == doctest::Approx(b[0]).epsilon(1e-14));
}

TEST_CASE("singleton closures are identities on random graphs") {
  for (int rep = 0; rep < 5; ++rep) {
    Dag d = random_dag(derive_seed(31, static_cast<std::uint64_t>(rep)), 10, 40);
    PValueVector p = random_pvalues(d, derive_seed(32, static_cast<std::uint64_t>(rep)));
    for (const char* text : {"fisher", "stouffer", "tippett", "ruger:2", "genmean:1"}) {
      auto pt = smooth(d, p, SmoothingSpec::parse(text));
      for (int v = 0; v < d.node_count(); ++v)
        if (d.descendant_closure(v).size() == 1)
          CHECK(pt[static_cast<size_t>(v)] ==
                doctest::Approx(p[static_cast<size_t>(v)]).epsilon(1e-12));
    }
  }
}

TEST_CASE("raising one input never lowers any smoothed value") {
  RngStream rng(909);
  for (int rep = 0; rep < 10; ++rep) {
    Dag d = random_dag(derive_seed(33, static_cast<std::uint64_t>(rep)), 8, 25);
    PValueVector p = random_pvalues(d, derive_seed(34, static_cast<std::uint64_t>(rep)));
    int bump = rng.uniform_int(0, d.node_count() - 1);
    PValueVector q = p;
    q[static_cast<size_t>(bump)] =
        q[static_cast<size_t>(bump)] + (1.0 - q[static_cast<size_t>(bump)]) * rng.uniform();
    for (const char* text :
         {"fisher", "stouffer", "tippett", "ruger:2", "genmean:1", "genmean:0.5",
          "cons-stouffer:children", "cons-stouffer:descendants"}) {
      SmoothingSpec spec = SmoothingSpec::parse(text);
      spec.seed = 5;
      Smoother sm(d, spec);
      auto pa = sm.apply(p);
      auto pb = sm.apply(q);
      for (int v = 0; v < d.node_count(); ++v)
        CHECK(pb[static_cast<size_t>(v)] >= pa[static_cast<size_t>(v)] - 1e-12);
    }
  }
}

TEST_CASE("identical spec and seed give bit-identical output") {
  Dag d = gen_graph(GraphRecipe::deep_tree(4, 2));
  PValueVector p = random_pvalues(d, 5150);
  SmoothingSpec spec = SmoothingSpec::parse("genmean:0.5");
  spec.seed = 99;
  auto a = smooth(d, p, spec);
  auto b = smooth(d, p, spec);
  CHECK(a == b);
}

TEST_CASE("output stays in [0,1] and handles boundary inputs") {
  Dag d = testutil::chain(4);
  PValueVector p = {0.0, 1.0, 1e-300, 1.0 - 1e-16};
  for (const char* text : {"fisher", "stouffer", "tippett", "genmean:1", "cons-stouffer:children"}) {
    auto pt = smooth(d, p, SmoothingSpec::parse(text));
    for (double x : pt) {
      CHECK(x >= 0.0);
      CHECK(x <= 1.0);
    }
  }
}

TEST_CASE("alignment and spec validation errors") {
  Dag d = testutil::chain(3);
  CHECK_THROWS_AS(smooth_fisher(d, {0.1, 0.2}), AlignmentError);
  SmoothingSpec bad;
  bad.method = SmoothMethod::generalized_mean;
  bad.mean_exponent = 2.0;
  CHECK_THROWS_AS(Smoother(d, bad), SpecMismatch);
  SmoothingSpec bad_k;
  bad_k.method = SmoothMethod::ruger;
  bad_k.order_k = 0;
  CHECK_THROWS_AS(Smoother(d, bad_k), SpecMismatch);
}

TEST_CASE("null smoothing keeps super-uniformity at unit scale") {
  Dag d = testutil::chain(3);
  const double grid[] = {0.05, 0.1, 0.25};
  for (const char* text : {"fisher", "stouffer"}) {
    auto report = check_superuniformity(d, SmoothingSpec::parse(text), 50000, 314, grid);
    CHECK(report.pass);
  }
}

#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fixtures.hpp"
#include "sparsemix/baseline_em.hpp"
#include "sparsemix/random.hpp"
#include "sparsemix/sparse_em.hpp"

using namespace sparsemix;

TEST_SUITE("baseline_em") {

TEST_CASE("log-likelihood agrees with the self-regression form at indicator betas") {
  oracle::Gen g(51);
  const SampleSet Y = fixture::random_sample(g, 3, 8);
  const std::vector<int> idx{2, 5, 7};
  const double floor = default_variance_floor(Y);
  const SphericalParams sp = point_initialization(Y, idx, floor);
  const MixtureParams mp = indicator_initialization(Y, idx, floor);
  CHECK(spherical_log_likelihood(sp, Y) ==
        doctest::Approx(self_regression_log_likelihood(mp, Y)).epsilon(1e-13));
}

TEST_CASE("M-step is the weighted mean and variance") {
  oracle::Gen g(52);
  const SampleSet Y = fixture::random_sample(g, 2, 6);
  Responsibilities t{Matrix(6, 2)};
  for (int i = 0; i < 6; ++i) {
    const double a = g.unif(0.05, 0.95);
    t.tau(i, 0) = a;
    t.tau(i, 1) = 1 - a;
  }
  const SphericalParams p = spherical_m_step(t, Y, 1e-12);
  for (int k = 0; k < 2; ++k) {
    double s = 0.0;
    Vector mu = Vector::Zero(2);
    for (int i = 0; i < 6; ++i) {
      s += t.tau(i, k);
      mu += t.tau(i, k) * Y.data().col(i);
    }
    mu /= s;
    double v = 0.0;
    for (int i = 0; i < 6; ++i) v += t.tau(i, k) * (Y.data().col(i) - mu).squaredNorm();
    CHECK(p.weights[k] == doctest::Approx(s / 6));
    CHECK((p.means.col(k) - mu).norm() < 1e-12);
    CHECK(p.variances[k] == doctest::Approx(v / (2 * s)));
  }
}

TEST_CASE("log-likelihood is monotone per iteration") {
  oracle::Gen g(53);
  for (int rep = 0; rep < 20; ++rep) {
    const SampleSet Y = fixture::random_sample(g, g.pick(2, 5), 10, 3.0);
    Hyperparams hp;
    hp.seed = static_cast<std::uint64_t>(rep);
    hp.restarts = 1;
    const BaselineReport fit = fit_baseline(Y, g.pick(2, 3), hp);
    const auto& tr = fit.loglik_trace;
    for (std::size_t i = 1; i < tr.size(); ++i) {
      if (std::find(fit.reseed_points.begin(), fit.reseed_points.end(), i) != fit.reseed_points.end())
        continue;
      CHECK(tr[i] >= tr[i - 1] - 1e-7 * (1 + std::abs(tr[i - 1])));
    }
  }
}

TEST_CASE("restart r starts from the same points as the sparse fit") {
  oracle::Gen g(54);
  const SampleSet Y = fixture::random_sample(g, 2, 10);
  Rng a(derive_seed({8, 0})), b(derive_seed({8, 0}));
  CHECK(draw_initial_indices(10, 3, a) == draw_initial_indices(10, 3, b));
}

TEST_CASE("well-separated clusters are recovered") {
  oracle::Gen g(55);
  const SampleSet Y(fixture::separated_points(g, 3, {5, 5, 5}, 25.0, 1.0));
  Hyperparams hp;
  hp.seed = 2;
  const BaselineReport fit = fit_baseline(Y, 3, hp);
  CHECK(fit.converged);
  for (int c = 0; c < 3; ++c)
    for (int i = 1; i < 5; ++i) CHECK(fit.assignments[c * 5 + i] == fit.assignments[c * 5]);
}

TEST_CASE("variance floor holds") {
  Matrix pts(1, 4);
  pts << 0, 0, 10, 10;
  const SampleSet Y(pts);
  Hyperparams hp;
  hp.variance_floor = 0.5;
  const BaselineReport fit = fit_baseline(Y, 2, hp);
  CHECK(fit.params.variances.minCoeff() >= 0.5);
  CHECK(std::isfinite(fit.final_loglik()));
}

TEST_CASE("shape errors") {
  oracle::Gen g(56);
  const SampleSet Y = fixture::random_sample(g, 2, 4);
  SphericalParams bad;
  bad.weights = Vector::Constant(2, 0.5);
  bad.means = Matrix::Zero(3, 2);
  bad.variances = Vector::Ones(2);
  CHECK_THROWS_AS(fit_baseline(Y, 2, Hyperparams{}, bad), std::invalid_argument);
  CHECK_THROWS_AS(fit_baseline(Y, 5, Hyperparams{}), std::invalid_argument);
}

}  // TEST_SUITE

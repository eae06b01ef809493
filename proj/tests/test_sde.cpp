#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "stoclab/sde.hpp"

using namespace stoclab;

namespace {

LangevinSpec ou_spec(double K, double D) {
  LangevinSpec s;
  s.k_relax = K;
  s.noise_strength = D;
  s.noise_poly = Polynomial{1.0};
  s.interpretation = Interpretation::Ito;
  return s;
}

LangevinSpec linear_noise_spec(double K, double D, Interpretation interp) {
  LangevinSpec s;
  s.k_relax = K;
  s.noise_strength = D;
  s.noise_poly = Polynomial{0.0, 1.0};  // b(phi) = phi
  s.interpretation = interp;
  return s;
}

double ou_variance(double K, double D, double t) {
  return D * (1.0 - std::exp(-2.0 * K * t)) / (2.0 * K);
}

}  // namespace

TEST_CASE("euler-maruyama step") {
  SECTION("deterministic decay step") {
    LangevinSpec s = ou_spec(1.0, 0.0);
    CHECK(step_euler_maruyama(s, 1.0, 0.1, 123.0) == Catch::Approx(0.9));
  }
  SECTION("pure diffusion step") {
    LangevinSpec s = ou_spec(1.0, 1.0);
    s.k_relax = 0.0;  // step itself does not validate K
    CHECK(step_euler_maruyama(s, 0.0, 1.0, 1.0) == Catch::Approx(1.0));
  }
  SECTION("wrong interpretation rejected") {
    LangevinSpec s = ou_spec(1.0, 1.0);
    s.interpretation = Interpretation::Stratonovich;
    try {
      step_euler_maruyama(s, 0.0, 0.1, 0.0);
      FAIL("expected WrongInterpretation");
    } catch (const Error& e) {
      CHECK(e.code() == errc::wrong_interpretation);
    }
  }
  SECTION("OU ensemble variance matches the closed form") {
    LangevinSpec s = ou_spec(1.0, 2.0);
    TimeGrid grid = make_time_grid(0.0, 1.0, 1000);
    EnsembleMoments m = simulate_ensemble(s, SdeScheme::EulerMaruyama, grid, 0.0, 20000, 11);
    const double expected = ou_variance(1.0, 2.0, 1.0);  // 1 - e^{-2}
    const std::size_t last = grid.size() - 1;
    CHECK(std::abs(m.variance[last] - expected) < 3.0 * m.variance_stderr[last]);
  }
}

TEST_CASE("stratonovich heun step") {
  SECTION("additive noise has no interpretation ambiguity in the noise term") {
    LangevinSpec heun = ou_spec(0.0, 1.0);
    heun.interpretation = Interpretation::Stratonovich;
    LangevinSpec em = ou_spec(0.0, 1.0);
    const double xi = 0.7315;
    // zero drift isolates the noise increments
    CHECK(step_stratonovich_heun(heun, 0.4, 0.01, xi) ==
          Catch::Approx(step_euler_maruyama(em, 0.4, 0.01, xi)).epsilon(1e-15));
  }
  SECTION("trapezoidal drift corrector") {
    LangevinSpec s = ou_spec(1.0, 0.0);
    s.interpretation = Interpretation::Stratonovich;
    CHECK(step_stratonovich_heun(s, 1.0, 0.1, 0.0) == Catch::Approx(0.905));
  }
  SECTION("linear multiplicative noise grows the mean at rate -K + D/2") {
    LangevinSpec s = linear_noise_spec(1.0, 1.0, Interpretation::Stratonovich);
    TimeGrid grid = make_time_grid(0.0, 1.0, 2000);
    EnsembleMoments m = simulate_ensemble(s, SdeScheme::StratonovichHeun, grid, 1.0, 20000, 5);
    const double expected = std::exp(-0.5);
    const std::size_t last = grid.size() - 1;
    CHECK(std::abs(m.m1.mean_estimates[last] - expected) < 3.0 * m.m1.std_errors[last]);
  }
}

TEST_CASE("simulate_ensemble") {
  SECTION("noiseless limit reproduces exponential decay up to scheme error") {
    LangevinSpec s = ou_spec(1.0, 0.0);
    TimeGrid grid = make_time_grid(0.0, 1.0, 1000);
    EnsembleMoments m = simulate_ensemble(s, SdeScheme::EulerMaruyama, grid, 1.0, 16, 3);
    const double dt = grid.dt();
    for (std::size_t i = 0; i < grid.size(); i += 100) {
      const double exact = std::exp(-grid.points[i]);
      CHECK(std::abs(m.m1.mean_estimates[i] - exact) < 2.0 * dt);
      CHECK(m.m1.std_errors[i] < 1e-8);  // identical paths; roundoff in the power sums
    }
  }
  SECTION("stationary start keeps the stationary variance") {
    const double K = 1.0, D = 2.0;
    LangevinSpec s = ou_spec(K, D);
    TimeGrid grid = make_time_grid(0.0, 2.0, 2000);
    const double stat_sd = std::sqrt(D / (2.0 * K));
    EnsembleMoments m = simulate_ensemble(
        s, SdeScheme::EulerMaruyama, grid,
        [stat_sd](RngStream& rng) { return stat_sd * rng.normal(); }, 20000, 17);
    for (std::size_t i = 0; i < grid.size(); i += 500)
      CHECK(std::abs(m.variance[i] - D / (2.0 * K)) <
            3.0 * m.variance_stderr[i] + 0.01);  // small O(dt) scheme bias allowance
  }
  SECTION("single trajectory cannot estimate spread") {
    LangevinSpec s = ou_spec(1.0, 1.0);
    TimeGrid grid = make_time_grid(0.0, 1.0, 10);
    try {
      simulate_ensemble(s, SdeScheme::EulerMaruyama, grid, 0.0, 1, 3);
      FAIL("expected TooFewSamples");
    } catch (const Error& e) {
      CHECK(e.code() == errc::too_few_samples);
    }
  }
  SECTION("bit-identical repetition and thread independence") {
    LangevinSpec s = ou_spec(1.0, 1.0);
    TimeGrid grid = make_time_grid(0.0, 0.5, 100);
    EnsembleMoments a = simulate_ensemble(s, SdeScheme::EulerMaruyama, grid, 0.3, 4096, 99);
    EnsembleMoments b = simulate_ensemble(s, SdeScheme::EulerMaruyama, grid, 0.3, 4096, 99);
    SdeOptions threaded;
    threaded.n_threads = 4;
    EnsembleMoments c =
        simulate_ensemble(s, SdeScheme::EulerMaruyama, grid, 0.3, 4096, 99, threaded);
    CHECK(a.m1.mean_estimates == b.m1.mean_estimates);
    CHECK(a.variance == b.variance);
    CHECK(a.m1.mean_estimates == c.m1.mean_estimates);
    CHECK(a.variance == c.variance);
  }
}

TEST_CASE("weak convergence of the OU mean is first order in dt") {
  // common random numbers: coarse increments are pair sums of fine ones
  const double K = 1.0, D = 0.1, phi0 = 2.0, t = 1.0;
  LangevinSpec s = ou_spec(K, D);
  const int fine_steps = 20;
  const double dtf = t / fine_steps;
  const double dtc = 2.0 * dtf;
  const std::size_t n_traj = 20000;
  double sum_c = 0.0, sum_f = 0.0;
  for (std::size_t traj = 0; traj < n_traj; ++traj) {
    RngStream rng(1234, traj);
    double pc = phi0, pf = phi0;
    for (int i = 0; i < fine_steps; i += 2) {
      const double xa = rng.normal();
      const double xb = rng.normal();
      pf = step_euler_maruyama(s, pf, dtf, xa);
      pf = step_euler_maruyama(s, pf, dtf, xb);
      pc = step_euler_maruyama(s, pc, dtc, (xa + xb) / std::sqrt(2.0));
    }
    sum_c += pc;
    sum_f += pf;
  }
  const double exact = phi0 * std::exp(-K * t);
  const double err_c = std::abs(sum_c / n_traj - exact);
  const double err_f = std::abs(sum_f / n_traj - exact);
  const double ratio = err_c / err_f;
  CHECK(ratio > 1.6);
  CHECK(ratio < 2.5);
}

TEST_CASE("interpretation discrimination for linear multiplicative noise") {
  const double K = 1.0, D = 1.0, phi0 = 1.0, t = 1.0;
  TimeGrid grid = make_time_grid(0.0, t, 2000);
  const std::size_t n_traj = 10000;
  const std::size_t last = grid.size() - 1;

  LangevinSpec ito = linear_noise_spec(K, D, Interpretation::Ito);
  EnsembleMoments em = simulate_ensemble(ito, SdeScheme::EulerMaruyama, grid, phi0, n_traj, 21);
  const double ito_mean = phi0 * std::exp(-K * t);
  CHECK(std::abs(em.m1.mean_estimates[last] - ito_mean) < 3.0 * em.m1.std_errors[last]);

  LangevinSpec strat = linear_noise_spec(K, D, Interpretation::Stratonovich);
  EnsembleMoments heun =
      simulate_ensemble(strat, SdeScheme::StratonovichHeun, grid, phi0, n_traj, 22);
  const double strat_mean = phi0 * std::exp((-K + 0.5 * D) * t);
  CHECK(std::abs(heun.m1.mean_estimates[last] - strat_mean) < 3.0 * heun.m1.std_errors[last]);

  // the two predictions themselves differ by many sigma
  CHECK(std::abs(ito_mean - strat_mean) > 20.0 * em.m1.std_errors[last]);
}

TEST_CASE("multi-time moments") {
  const double K = 1.0, D = 1.0, eta = 1.0;
  LangevinSpec s = ou_spec(K, D);
  TimeGrid grid = make_time_grid(0.0, 1.0, 1000);

  SECTION("m = 1 reduces to the ensemble mean") {
    EnsembleMoments m = simulate_ensemble(s, SdeScheme::EulerMaruyama, grid, eta, 4096, 77);
    MultiTimeEstimate est =
        sample_multitime_moment(s, SdeScheme::EulerMaruyama, grid, eta, {0.5}, 4096, 77);
    CHECK(est.value == Catch::Approx(m.m1.mean_estimates[500]).epsilon(1e-14));
  }
  SECTION("OU two-time moment matches the kernel-chaining closed form") {
    const double t1 = 1.0, t2 = 0.5;
    MultiTimeEstimate est =
        sample_multitime_moment(s, SdeScheme::EulerMaruyama, grid, eta, {t1, t2}, 40000, 78);
    const double expected = std::exp(-K * (t1 - t2)) * ou_variance(K, D, t2) +
                            eta * eta * std::exp(-K * (t1 + t2));
    CHECK(std::abs(est.value - expected) < 3.0 * est.std_error + 2e-3);
  }
  SECTION("deterministic limit factorizes") {
    LangevinSpec det = ou_spec(K, 0.0);
    MultiTimeEstimate est =
        sample_multitime_moment(det, SdeScheme::EulerMaruyama, grid, eta, {1.0, 0.5}, 4, 5);
    CHECK(est.value == Catch::Approx(eta * eta * std::exp(-K * 1.5)).epsilon(2e-3));
  }
  SECTION("times outside the grid are rejected") {
    try {
      sample_multitime_moment(s, SdeScheme::EulerMaruyama, grid, eta, {2.0, 0.5}, 4, 5);
      FAIL("expected TimesOutOfRange");
    } catch (const Error& e) {
      CHECK(e.code() == errc::times_out_of_range);
    }
  }
  SECTION("non-descending times are rejected") {
    try {
      sample_multitime_moment(s, SdeScheme::EulerMaruyama, grid, eta, {0.5, 0.5}, 4, 5);
      FAIL("expected NonDescendingTimes");
    } catch (const Error& e) {
      CHECK(e.code() == errc::non_descending_times);
    }
  }
}

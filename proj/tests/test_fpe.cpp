#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "stoclab/fpe.hpp"
#include "stoclab/sde.hpp"

using namespace stoclab;

namespace {

LangevinSpec ou_spec(double K, double D, Interpretation interp = Interpretation::Ito) {
  LangevinSpec s;
  s.k_relax = K;
  s.noise_strength = D;
  s.noise_poly = Polynomial{1.0};
  s.interpretation = interp;
  return s;
}

double ou_variance(double K, double D, double t) {
  return D * (1.0 - std::exp(-2.0 * K * t)) / (2.0 * K);
}

double max_entry_diff(const FpeGenerator& a, const FpeGenerator& b) {
  double m = 0.0;
  for (std::size_t f = 0; f < a.up_rates().size(); ++f) {
    m = std::max(m, std::abs(a.up_rates()[f] - b.up_rates()[f]));
    m = std::max(m, std::abs(a.down_rates()[f] - b.down_rates()[f]));
  }
  return m;
}

double max_rate_scale(const FpeGenerator& g) {
  return std::max(g.max_rate(), 1.0);
}

/// Cell-averaged Gaussian exp(-K phi^2 / D), Simpson per cell, normalized.
PdfGrid cell_averaged_gaussian(const PdfGeometry& geom, double K, double D) {
  PdfGrid p;
  p.geom = geom;
  p.values.resize(static_cast<std::size_t>(geom.n_cells));
  auto f = [&](double x) { return std::exp(-K * x * x / D); };
  for (int i = 0; i < geom.n_cells; ++i) {
    const double a = geom.phi_min + i * geom.dphi();
    const double b = a + geom.dphi();
    p.values[static_cast<std::size_t>(i)] = (f(a) + 4.0 * f(0.5 * (a + b)) + f(b)) / 6.0;
  }
  p.normalize();
  return p;
}

}  // namespace

TEST_CASE("generator construction") {
  PdfGeometry geom{-6.0, 6.0, 64};

  SECTION("additive noise makes the interpretations coincide entry-wise") {
    LangevinSpec s = ou_spec(1.0, 1.5);
    FpeGenerator ito = build_fpe_generator(s, geom, Interpretation::Ito);
    FpeGenerator strat = build_fpe_generator(s, geom, Interpretation::Stratonovich);
    CHECK(max_entry_diff(ito, strat) == 0.0);
  }

  SECTION("linear noise: stratonovich equals ito with the shifted drift") {
    LangevinSpec s = ou_spec(1.0, 1.0);
    s.noise_poly = Polynomial{0.0, 1.0};
    PdfGeometry g32{-4.0, 4.0, 32};
    FpeGenerator strat = build_fpe_generator(s, g32, Interpretation::Stratonovich);
    LangevinSpec shifted = s;
    // U + D b b' / 2 with b = phi
    shifted.drift_poly = s.drift_poly + Polynomial{0.0, 0.5 * s.noise_strength};
    FpeGenerator ito = build_fpe_generator(shifted, g32, Interpretation::Ito);
    CHECK(max_entry_diff(strat, ito) <= 1e-12 * max_rate_scale(strat));
  }

  SECTION("column sums vanish (probability conservation)") {
    LangevinSpec s = ou_spec(0.7, 1.3);
    s.drift_poly = Polynomial{0.1, 0.0, 0.0, -0.2};
    FpeGenerator gen = build_fpe_generator(s, geom);
    auto [sub, diag, super] = gen.tridiagonal();
    const double dphi = geom.dphi();
    for (int j = 0; j < geom.n_cells; ++j) {
      double col = diag[static_cast<std::size_t>(j)];
      if (j > 0) col += super[static_cast<std::size_t>(j - 1)];
      if (j < geom.n_cells - 1) col += sub[static_cast<std::size_t>(j + 1)];
      CHECK(std::abs(col * dphi) <= 1e-12 * max_rate_scale(gen) * dphi);
    }
  }

  SECTION("cell-averaged stationary gaussian leaves an O(dphi^2) residual") {
    const double K = 1.0, D = 1.0;
    LangevinSpec s = ou_spec(K, D);
    auto residual = [&](int cells) {
      PdfGeometry g{-6.0, 6.0, cells};
      FpeGenerator gen = build_fpe_generator(s, g);
      PdfGrid p = cell_averaged_gaussian(g, K, D);
      std::vector<double> r;
      gen.apply(p.values, r);
      double m = 0.0;
      for (double v : r) m = std::max(m, std::abs(v));
      return m;
    };
    const double r32 = residual(32);
    const double r64 = residual(64);
    CHECK(r32 / r64 > 2.5);
    CHECK(r32 / r64 < 6.5);
  }

  SECTION("too coarse grids and empty widths are rejected") {
    LangevinSpec s = ou_spec(1.0, 1.0);
    try {
      build_fpe_generator(s, PdfGeometry{-1.0, 1.0, 8});
      FAIL("expected GridTooCoarse");
    } catch (const Error& e) {
      CHECK(e.code() == errc::grid_too_coarse);
    }
    try {
      build_fpe_generator(s, PdfGeometry{1.0, 1.0, 32});
      FAIL("expected NonPositiveWidth");
    } catch (const Error& e) {
      CHECK(e.code() == errc::non_positive_width);
    }
  }
}

TEST_CASE("pdf evolution") {
  const double K = 1.0, D = 1.0;
  LangevinSpec s = ou_spec(K, D);
  PdfGeometry geom{-6.0, 6.0, 256};
  FpeGenerator gen = build_fpe_generator(s, geom);

  SECTION("t = 0 returns the initial density unchanged") {
    PdfGrid p0 = PdfGrid::delta(geom, 0.5);
    PdfGrid p = evolve_pdf(gen, p0, 0.0);
    CHECK(p.values == p0.values);
  }

  SECTION("delta initial data reproduces the exact relaxing moments") {
    const double eta_req = 1.0;
    PdfGrid p0 = PdfGrid::delta(geom, eta_req);
    const double eta = geom.center(geom.cell_of(eta_req));  // snapped start
    for (double t : {0.25, 0.5, 1.0, 2.0}) {
      PdfGrid p = evolve_pdf(gen, p0, t);
      CHECK(p.mean() == Catch::Approx(eta * std::exp(-K * t)).margin(2e-3));
      CHECK(p.variance() == Catch::Approx(ou_variance(K, D, t)).margin(4e-3));
    }
  }

  SECTION("mass conservation and positivity along the evolution") {
    PdfGrid p = PdfGrid::delta(geom, -0.5);
    for (int i = 0; i < 5; ++i) {
      p = evolve_pdf(gen, std::move(p), 2.0);
      CHECK(std::abs(p.mass() - 1.0) < 1e-9);
      double minv = 0.0;
      for (double v : p.values) minv = std::min(minv, v);
      CHECK(minv >= -1e-12);
    }
  }

  SECTION("any start relaxes to the stationary density") {
    PdfGrid uniform;
    uniform.geom = geom;
    uniform.values.assign(static_cast<std::size_t>(geom.n_cells), 1.0);
    uniform.normalize();
    PdfGrid relaxed = evolve_pdf(gen, uniform, 20.0);
    PdfGrid stat = stationary_pdf(gen);
    double l1 = 0.0;
    for (int i = 0; i < geom.n_cells; ++i)
      l1 += std::abs(relaxed.values[static_cast<std::size_t>(i)] -
                     stat.values[static_cast<std::size_t>(i)]) *
            geom.dphi();
    CHECK(l1 < 1e-6);
  }
}

TEST_CASE("conditional pdf") {
  PdfGeometry geom{-6.0, 6.0, 256};

  SECTION("t = 0 keeps all mass in one cell") {
    LangevinSpec s = ou_spec(1.0, 1.0);
    FpeGenerator gen = build_fpe_generator(s, geom);
    PdfGrid p = conditional_pdf(gen, 0.7, 0.0);
    int nonzero = 0;
    for (double v : p.values)
      if (v != 0.0) ++nonzero;
    CHECK(nonzero == 1);
    CHECK(p.mass() == Catch::Approx(1.0));
  }

  SECTION("OU fundamental solution matches the gaussian kernel") {
    const double K = 1.0, D = 1.0, t = 0.5;
    LangevinSpec s = ou_spec(K, D);
    FpeGenerator gen = build_fpe_generator(s, geom);
    const double phi0 = geom.center(geom.cell_of(1.0));
    PdfGrid p = conditional_pdf(gen, phi0, t);
    const double mu = phi0 * std::exp(-K * t);
    const double var = ou_variance(K, D, t);
    double l1 = 0.0;
    for (int i = 0; i < geom.n_cells; ++i) {
      const double x = geom.center(i);
      const double exact =
          std::exp(-0.5 * (x - mu) * (x - mu) / var) / std::sqrt(2.0 * M_PI * var);
      l1 += std::abs(p.values[static_cast<std::size_t>(i)] - exact) * geom.dphi();
    }
    CHECK(l1 < 0.02);
  }

  SECTION("noiseless flow transports the delta with bounded numerical spread") {
    LangevinSpec s = ou_spec(1.0, 0.0);
    PdfGeometry g{-4.0, 4.0, 256};
    FpeGenerator gen = build_fpe_generator(s, g);
    const double phi0 = g.center(g.cell_of(2.0));
    const double t = 1.0;
    PdfGrid p = conditional_pdf(gen, phi0, t);
    const double target = phi0 * std::exp(-t);
    CHECK(std::abs(p.mean() - target) < 0.05);
    // upwind numerical diffusion: variance grows like dphi * travel distance
    CHECK(p.variance() < 4.0 * g.dphi() * (phi0 - target));
  }

  SECTION("points outside the grid are rejected") {
    LangevinSpec s = ou_spec(1.0, 1.0);
    FpeGenerator gen = build_fpe_generator(s, geom);
    try {
      conditional_pdf(gen, 7.5, 0.1);
      FAIL("expected OutOfGrid");
    } catch (const Error& e) {
      CHECK(e.code() == errc::out_of_grid);
    }
  }
}

TEST_CASE("stationary pdf") {
  SECTION("OU stationary state is the discrete gaussian") {
    const double K = 0.8, D = 1.6;
    LangevinSpec s = ou_spec(K, D);
    PdfGeometry geom{-6.0, 6.0, 128};
    FpeGenerator gen = build_fpe_generator(s, geom);
    PdfGrid stat = stationary_pdf(gen);
    // center-sampled gaussian has exactly the face ratios of the scheme
    PdfGrid gauss;
    gauss.geom = geom;
    gauss.values.resize(static_cast<std::size_t>(geom.n_cells));
    for (int i = 0; i < geom.n_cells; ++i) {
      const double x = geom.center(i);
      gauss.values[static_cast<std::size_t>(i)] = std::exp(-K * x * x / D);
    }
    gauss.normalize();
    for (int i = 0; i < geom.n_cells; ++i) {
      const double x = geom.center(i);
      if (std::abs(x) > 4.0) continue;  // skip underflowing tail cells
      CHECK(stat.values[static_cast<std::size_t>(i)] ==
            Catch::Approx(gauss.values[static_cast<std::size_t>(i)]).epsilon(1e-10));
    }
  }

  SECTION("reflected pure diffusion is uniform") {
    LangevinSpec s = ou_spec(1.0, 1.0);
    s.k_relax = 0.0;  // generator build does not enforce K > 0
    PdfGeometry geom{-1.0, 1.0, 32};
    FpeGenerator gen = build_fpe_generator(s, geom);
    PdfGrid stat = stationary_pdf(gen);
    for (double v : stat.values) CHECK(v == Catch::Approx(0.5).epsilon(1e-12));
  }

  SECTION("disconnected blocks are refused") {
    // b(phi) = phi with zero drift at the origin: the central face carries no
    // coupling, so the chain splits at phi = 0
    LangevinSpec s;
    s.k_relax = 1.0;
    s.noise_strength = 1.0;
    s.noise_poly = Polynomial{0.0, 1.0};
    s.drift_poly = Polynomial{0.0, 1.0};  // cancels -K phi exactly
    PdfGeometry geom{-2.0, 2.0, 32};
    FpeGenerator gen = build_fpe_generator(s, geom, Interpretation::Stratonovich);
    try {
      stationary_pdf(gen);
      FAIL("expected DegenerateNullSpace");
    } catch (const Error& e) {
      CHECK(e.code() == errc::degenerate_null_space);
    }
  }
}

TEST_CASE("green function chaining") {
  const double K = 1.0, D = 1.0;
  LangevinSpec s = ou_spec(K, D);
  PdfGeometry geom{-6.0, 6.0, 256};
  FpeGenerator gen = build_fpe_generator(s, geom);
  PdfGrid p0 = PdfGrid::delta(geom, 1.0);
  const double eta = geom.center(geom.cell_of(1.0));

  SECTION("single time reduces to the evolved mean") {
    const double g1 = green_function_chain(gen, p0, {0.7}, {1});
    PdfGrid p = evolve_pdf(gen, p0, 0.7);
    CHECK(g1 == Catch::Approx(p.mean()).epsilon(1e-9));
  }

  SECTION("two-time OU moment matches the kernel algebra") {
    const double t1 = 1.0, t2 = 0.5;
    const double g2 = green_function_chain(gen, p0, {t1, t2}, {1, 1});
    const double expected =
        std::exp(-K * (t1 - t2)) * ou_variance(K, D, t2) + eta * eta * std::exp(-K * (t1 + t2));
    CHECK(g2 == Catch::Approx(expected).epsilon(3e-3));
  }

  SECTION("all powers zero returns unit normalization") {
    const double g3 = green_function_chain(gen, p0, {1.5, 1.0, 0.5}, {0, 0, 0});
    CHECK(g3 == Catch::Approx(1.0).margin(1e-9));
  }

  SECTION("too many or non-descending times are rejected") {
    try {
      green_function_chain(gen, p0, {2.0, 1.5, 1.0, 0.5}, {1, 1, 1, 1});
      FAIL("expected TooManyTimes");
    } catch (const Error& e) {
      CHECK(e.code() == errc::too_many_times);
    }
    try {
      green_function_chain(gen, p0, {1.0, 1.0}, {1, 1});
      FAIL("expected NonDescendingTimes");
    } catch (const Error& e) {
      CHECK(e.code() == errc::non_descending_times);
    }
  }
}

TEST_CASE("representation equivalence: FPE moments match SDE moments") {
  const double K = 1.0, D = 1.0, phi0 = 0.5, t = 1.0;
  LangevinSpec s = ou_spec(K, D);
  PdfGeometry geom{-6.0, 6.0, 256};
  FpeGenerator gen = build_fpe_generator(s, geom);
  PdfGrid p = conditional_pdf(gen, phi0, t);

  TimeGrid grid = make_time_grid(0.0, t, 1000);
  const double start = geom.center(geom.cell_of(phi0));
  EnsembleMoments m = simulate_ensemble(s, SdeScheme::EulerMaruyama, grid, start, 20000, 314);
  const std::size_t last = grid.size() - 1;
  CHECK(std::abs(p.mean() - m.m1.mean_estimates[last]) < 3.0 * m.m1.std_errors[last] + 2e-3);
  CHECK(std::abs(p.variance() - m.variance[last]) < 3.0 * m.variance_stderr[last] + 4e-3);
}

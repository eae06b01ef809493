#include <catch2/catch_amalgamated.hpp>

#include "stoclab/config.hpp"
#include "stoclab/langevin.hpp"
#include "stoclab/master.hpp"
#include "stoclab/parallel.hpp"
#include "stoclab/polynomial.hpp"
#include "stoclab/rng.hpp"
#include "stoclab/time_grid.hpp"

using namespace stoclab;

TEST_CASE("polynomial evaluation and derivative") {
  Polynomial p{1.0, -2.0, 0.0, 3.0};  // 1 - 2x + 3x^3
  CHECK(p(0.0) == 1.0);
  CHECK(p(2.0) == Catch::Approx(1.0 - 4.0 + 24.0));
  Polynomial d = p.derivative();
  CHECK(d(2.0) == Catch::Approx(-2.0 + 9.0 * 4.0));
  CHECK(p.degree() == 3);
  CHECK(Polynomial{}.is_zero());
  Polynomial trimmed{1.0, 0.0, 0.0};
  CHECK(trimmed.degree() == 0);
}

TEST_CASE("langevin spec validation") {
  LangevinSpec ou;
  ou.k_relax = 1.0;
  ou.noise_strength = 1.0;
  ou.interpretation = Interpretation::Ito;
  CHECK_NOTHROW(validate_langevin_spec(ou));

  SECTION("K = 0 rejected") {
    LangevinSpec bad = ou;
    bad.k_relax = 0.0;
    try {
      validate_langevin_spec(bad);
      FAIL("expected NonPositiveK");
    } catch (const Error& e) {
      CHECK(e.code() == errc::non_positive_k);
    }
  }
  SECTION("negative D rejected") {
    LangevinSpec bad = ou;
    bad.noise_strength = -1.0;
    try {
      validate_langevin_spec(bad);
      FAIL("expected NegativeD");
    } catch (const Error& e) {
      CHECK(e.code() == errc::negative_d);
    }
  }
  SECTION("cubic drift with linear noise accepted") {
    LangevinSpec s = ou;
    s.drift_poly = Polynomial{0.0, 0.0, 0.0, -2.0};  // -g phi^3
    s.noise_poly = Polynomial{0.0, 1.0};
    s.noise_strength = 2.0;
    s.interpretation = Interpretation::Stratonovich;
    CHECK_NOTHROW(validate_langevin_spec(s));
  }
  SECTION("degree cap enforced") {
    LangevinSpec bad = ou;
    bad.drift_poly = Polynomial{0, 0, 0, 0, 0, 1.0};
    try {
      validate_langevin_spec(bad);
      FAIL("expected DegreeTooHigh");
    } catch (const Error& e) {
      CHECK(e.code() == errc::degree_too_high);
    }
  }
  SECTION("validation is idempotent") {
    LangevinSpec s = validate_langevin_spec(ou);
    LangevinSpec twice = validate_langevin_spec(s);
    CHECK(twice.k_relax == s.k_relax);
    CHECK(twice.drift_poly == s.drift_poly);
  }
}

TEST_CASE("verhulst preset expands to the three elementary channels") {
  const double beta = 1.0, lambda = 2.0, gamma = 0.1;
  MasterSpec spec = validate_master_spec(MasterSpec::verhulst_preset(beta, lambda, gamma));
  REQUIRE(spec.channels.size() == 3);

  // loss at n, gain-from-above at n+1, gain-from-below at n-1
  for (long n = 0; n <= 50; ++n) {
    double loss = 0.0, gain_above = 0.0, gain_below = 0.0;
    for (const auto& c : spec.channels) {
      loss += c.rate(n);
      if (c.delta == -1) gain_above += c.rate(n + 1);
      if (c.delta == +1 && n >= 1) gain_below += c.rate(n - 1);
    }
    const double dn = static_cast<double>(n);
    CHECK(loss == Catch::Approx(beta * dn + lambda * dn + gamma * dn * dn));
    CHECK(gain_above == Catch::Approx(beta * (dn + 1) + gamma * (dn + 1) * (dn + 1)));
    if (n >= 1) CHECK(gain_below == Catch::Approx(lambda * (dn - 1)));
  }
}

TEST_CASE("master spec validation") {
  SECTION("pair annihilation cannot underflow") {
    MasterSpec s = MasterSpec::annihilation_to_zero(0.7);
    CHECK_NOTHROW(validate_master_spec(s));
    CHECK(s.channels[0].rate(0) == 0.0);
    CHECK(s.channels[0].rate(1) == 0.0);
  }
  SECTION("constant death rate escapes below zero") {
    MasterSpec s;
    s.channels.push_back({-1, Polynomial{1.0}});
    try {
      validate_master_spec(s);
      FAIL("expected EscapeBelowZero");
    } catch (const Error& e) {
      CHECK(e.code() == errc::escape_below_zero);
    }
  }
  SECTION("negative rate rejected") {
    MasterSpec s;
    s.channels.push_back({+1, Polynomial{0.0, -1.0}});
    try {
      validate_master_spec(s);
      FAIL("expected NegativeRate");
    } catch (const Error& e) {
      CHECK(e.code() == errc::negative_rate);
    }
  }
}

TEST_CASE("time grid construction") {
  TimeGrid g = make_time_grid(0.0, 1.0, 4);
  REQUIRE(g.points.size() == 5);
  CHECK(g.points[0] == 0.0);
  CHECK(g.points[1] == Catch::Approx(0.25));
  CHECK(g.points[2] == Catch::Approx(0.5));
  CHECK(g.points[3] == Catch::Approx(0.75));
  CHECK(g.points[4] == 1.0);

  TimeGrid two = make_time_grid(1.0, 3.0, 1);
  REQUIRE(two.points.size() == 2);
  CHECK(two.points[0] == 1.0);
  CHECK(two.points[1] == 3.0);

  try {
    make_time_grid(0.0, 0.0, 4);
    FAIL("expected EmptyInterval");
  } catch (const Error& e) {
    CHECK(e.code() == errc::empty_interval);
  }
}

TEST_CASE("rng streams are reproducible and schedule independent") {
  SECTION("same pair gives identical draws") {
    RngStream a(42, 0), b(42, 0);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  }
  SECTION("different stream ids differ") {
    RngStream a(42, 0), b(42, 1);
    int same = 0;
    for (int i = 0; i < 100; ++i)
      if (a.next_u64() == b.next_u64()) ++same;
    CHECK(same == 0);
  }
  SECTION("draws are independent of the thread schedule") {
    std::vector<std::uint64_t> single(64), multi(64);
    parallel_blocks(64, 4, 1, [&](std::size_t, std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        RngStream r(42, i);
        for (int k = 0; k < 7; ++k) r.next_u64();
        single[i] = r.next_u64();
      }
    });
    parallel_blocks(64, 4, 8, [&](std::size_t, std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        RngStream r(42, i);
        for (int k = 0; k < 7; ++k) r.next_u64();
        multi[i] = r.next_u64();
      }
    });
    CHECK(single == multi);
  }
  SECTION("normals have roughly unit variance") {
    RngStream r(7, 3);
    double s = 0.0, s2 = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
      const double x = r.normal();
      s += x;
      s2 += x * x;
    }
    CHECK(std::abs(s / n) < 0.01);
    CHECK(s2 / n == Catch::Approx(1.0).margin(0.02));
  }
}

TEST_CASE("model specs round-trip through the config format") {
  SECTION("langevin field names") {
    LangevinSpec s;
    s.k_relax = 1.5;
    s.drift_poly = Polynomial{0.0, 0.0, 0.0, -0.3};
    s.noise_poly = Polynomial{0.0, 1.0};
    s.noise_strength = 2.0;
    s.interpretation = Interpretation::Stratonovich;
    json j = langevin_to_json(s);
    CHECK(j.contains("k_relax"));
    CHECK(j.contains("drift_poly"));
    CHECK(j.contains("noise_poly"));
    CHECK(j.contains("noise_strength"));
    CHECK(j.contains("interpretation"));
    LangevinSpec back = langevin_from_json(j);
    CHECK(back.k_relax == s.k_relax);
    CHECK(back.drift_poly == s.drift_poly);
    CHECK(back.noise_poly == s.noise_poly);
    CHECK(back.noise_strength == s.noise_strength);
    CHECK(back.interpretation == s.interpretation);
  }
  SECTION("master channels") {
    MasterSpec s = MasterSpec::verhulst_preset(1.0, 2.0, 0.1);
    json j = master_to_json(s);
    REQUIRE(j.contains("channels"));
    CHECK(j["channels"][0].contains("delta"));
    CHECK(j["channels"][0].contains("rate_poly"));
    MasterSpec back = master_from_json(j);
    REQUIRE(back.channels.size() == 3);
    for (long n = 0; n < 10; ++n) CHECK(back.total_rate(n) == s.total_rate(n));
    REQUIRE(back.verhulst.has_value());
    CHECK(back.verhulst->beta == 1.0);
  }
  SECTION("bad config throws ConfigParseError") {
    try {
      langevin_from_json(json{{"k_relax", 1.0}});
      FAIL("expected ConfigParseError");
    } catch (const Error& e) {
      CHECK(e.code() == errc::config_parse_error);
    }
  }
}

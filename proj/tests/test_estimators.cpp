#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "vfi/estimators.hpp"

using namespace vfi;
using std::numbers::pi;

TEST_CASE("triangulate: frozen reference values") {
  double vx = 0, vz = 0;
  triangulate(500.0, -300.0, 15.0 * pi / 180.0, 1540.0, 8e6, &vx, &vz);
  CHECK(vx == Catch::Approx(0.2975051544970331).epsilon(1e-12));
  CHECK(vz == Catch::Approx(0.009791824158664617).epsilon(1e-12));
  CHECK_THROWS_AS(triangulate(1.0, 1.0, 0.0, 1540.0, 8e6, &vx, &vz), ValidationError);
  CHECK_THROWS_AS(triangulate(1.0, 1.0, 0.5 * pi, 1540.0, 8e6, &vx, &vz), ValidationError);
}

TEST_CASE("triangulate: forward/backward round trip") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> uv(-1.0, 1.0), ua(0.05, 1.4);
  for (int i = 0; i < 1000; ++i) {
    const double vx = uv(rng), vz = uv(rng), a = ua(rng);
    double fl = 0, fr = 0, rx = 0, rz = 0;
    triangulate_forward(vx, vz, a, 1540.0, 8e6, &fl, &fr);
    triangulate(fl, fr, a, 1540.0, 8e6, &rx, &rz);
    CHECK(rx == Catch::Approx(vx).margin(1e-12));
    CHECK(rz == Catch::Approx(vz).margin(1e-12));
  }
}

TEST_CASE("kasai: pure phasor ramp is recovered exactly") {
  const double f_prf = 15.6e3;
  for (int K : {2, 8, 16}) {
    for (double f : {1950.0, -3200.0, 120.5}) {
      std::vector<cdouble> s(static_cast<size_t>(K));
      for (int k = 0; k < K; ++k)
        s[static_cast<size_t>(k)] = std::polar(1.0, 2.0 * pi * f / f_prf * k);
      const auto est = kasai_frequency(s, f_prf);
      CHECK(est.f_hz == Catch::Approx(f).epsilon(1e-9));
      CHECK(est.quality == Catch::Approx(1.0).margin(1e-12));
    }
  }
}

TEST_CASE("kasai: aliases outside the Nyquist band") {
  const double f_prf = 15.6e3;
  const double f = 9000.0;  // > f_prf / 2
  std::vector<cdouble> s(16);
  for (int k = 0; k < 16; ++k)
    s[static_cast<size_t>(k)] = std::polar(1.0, 2.0 * pi * f / f_prf * k);
  const auto est = kasai_frequency(s, f_prf);
  CHECK(est.f_hz == Catch::Approx(f - f_prf).epsilon(1e-9));
}

TEST_CASE("kasai: degenerate inputs") {
  CHECK_THROWS_AS(kasai_frequency(std::vector<cdouble>(1), 1e3), ValidationError);
  const auto est = kasai_frequency(std::vector<cdouble>(8, cdouble{0.0, 0.0}), 1e3);
  CHECK(est.f_hz == 0.0);
  CHECK(est.quality == 0.0);
}

TEST_CASE("stdmr: consistent pairs recover the velocity") {
  const double vx = 0.42, vz = -0.07, c = 1540.0, f0 = 8e6;
  std::vector<FrequencyPair> pairs;
  for (double a_deg : {6.0, 9.0, 12.0, 15.0}) {
    FrequencyPair p;
    p.alpha_deg = a_deg;
    triangulate_forward(vx, vz, a_deg * pi / 180.0, c, f0, &p.f_left_hz, &p.f_right_hz);
    p.quality = 0.9;
    pairs.push_back(p);
  }
  const auto est = stdmr_estimate(pairs, c, f0);
  REQUIRE(est.has_value());
  CHECK(est->vx == Catch::Approx(vx).margin(1e-12));
  CHECK(est->vz == Catch::Approx(vz).margin(1e-12));
  CHECK(est->method == EstMethod::Triangulation);
  CHECK(est->quality == Catch::Approx(0.9).margin(1e-12));
}

TEST_CASE("stdmr: quality gating") {
  const double c = 1540.0, f0 = 8e6;
  std::vector<FrequencyPair> pairs(2);
  pairs[0].alpha_deg = 9.0;
  triangulate_forward(0.5, 0.0, 9.0 * pi / 180.0, c, f0, &pairs[0].f_left_hz,
                      &pairs[0].f_right_hz);
  pairs[0].quality = 0.8;
  pairs[1].alpha_deg = 15.0;
  pairs[1].f_left_hz = 1e5;  // garbage, but below threshold
  pairs[1].f_right_hz = -1e5;
  pairs[1].quality = 0.1;
  const auto est = stdmr_estimate(pairs, c, f0, 0.3);
  REQUIRE(est.has_value());
  CHECK(est->vx == Catch::Approx(0.5).margin(1e-12));

  pairs[0].quality = 0.1;
  CHECK_FALSE(stdmr_estimate(pairs, c, f0, 0.3).has_value());
}

TEST_CASE("xcorr_lag: exact integer shift") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> a(256);
  for (auto& v : a) v = n(rng);
  for (int shift : {-5, -1, 0, 2, 7}) {
    std::vector<double> b(a.size(), 0.0);
    for (size_t i = 0; i < a.size(); ++i) {
      const long j = static_cast<long>(i) - shift;
      if (j >= 0 && j < static_cast<long>(a.size())) b[i] = a[static_cast<size_t>(j)];
    }
    const auto est = xcorr_lag(a, b, 10);
    CHECK(est.lag_samples == Catch::Approx(static_cast<double>(shift)).margin(0.02));
    CHECK(est.quality > 0.9);
  }
}

TEST_CASE("xcorr_lag: fractional shift of a smooth line") {
  // band-limited line sampled twice with a known sub-sample offset
  auto line = [](double u) {
    return std::exp(-u * u / 800.0) * std::cos(2.0 * pi * u / 10.0) +
           0.4 * std::sin(2.0 * pi * u / 23.0);
  };
  for (double delta : {0.25, -0.4, 0.7, 1.3}) {
    std::vector<double> a(301), b(301);
    for (int i = 0; i < 301; ++i) {
      const double u = i - 150.0;
      a[static_cast<size_t>(i)] = line(u);
      b[static_cast<size_t>(i)] = line(u - delta);
    }
    const auto est = xcorr_lag(a, b, 6);
    CHECK(est.lag_samples == Catch::Approx(delta).margin(0.1));
  }
}

TEST_CASE("xcorr_lag: complex lines and symmetry") {
  auto env = [](double u) { return std::exp(-u * u / 500.0); };
  std::vector<cdouble> a(200), b(200);
  for (int i = 0; i < 200; ++i) {
    const double u = i - 100.0;
    a[static_cast<size_t>(i)] = env(u) * std::polar(1.0, 0.4 * u);
    b[static_cast<size_t>(i)] = env(u - 3.0) * std::polar(1.0, 0.4 * (u - 3.0));
  }
  const auto fwd = xcorr_lag(a, b, 8);
  const auto rev = xcorr_lag(b, a, 8);
  CHECK(fwd.lag_samples == Catch::Approx(3.0).margin(0.05));
  CHECK(rev.lag_samples == Catch::Approx(-3.0).margin(0.05));
}

TEST_CASE("xcorr_lag: errors") {
  std::vector<double> flat(64, 1.0), a(64), b(16);
  for (size_t i = 0; i < a.size(); ++i) a[i] = std::sin(0.3 * static_cast<double>(i));
  CHECK_THROWS_AS(xcorr_lag(flat, flat, 4), NumericalError);
  CHECK_THROWS_AS(xcorr_lag(a, std::vector<double>(32, 0.0), 4), ValidationError);
  CHECK_THROWS_AS(xcorr_lag(b, b, 8), ValidationError);
}

TEST_CASE("directional_velocity: drifting speckle line") {
  // synthetic line ensemble: complex speckle translating a known fraction of
  // a sample per frame
  const double f_prf = 15.6e3, spacing = 19.25e-6;
  const double vx_true = 0.35;
  const double lag_per_frame = vx_true / (f_prf * spacing);

  BeamformedEnsemble lines;
  lines.branch = Branch::DirectionalLine;
  lines.frames = 8;
  lines.line_depths_m = {8e-3};
  lines.line_spacing_m = spacing;
  lines.line_x0_m = 0.0;
  lines.line_nx = 240;
  lines.n_samples = 240;
  lines.values.assign(static_cast<size_t>(lines.frames) * 240, cdouble{});

  // smooth band-limited speckle from a few random tones
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> uph(0.0, 2.0 * pi), ufr(0.05, 0.45);
  std::vector<double> phase(12), freq(12), amp(12);
  std::normal_distribution<double> na(0.0, 1.0);
  for (int m = 0; m < 12; ++m) {
    phase[static_cast<size_t>(m)] = uph(rng);
    freq[static_cast<size_t>(m)] = ufr(rng);
    amp[static_cast<size_t>(m)] = na(rng);
  }
  auto speckle = [&](double u) {
    cdouble s{0.0, 0.0};
    for (int m = 0; m < 12; ++m)
      s += amp[static_cast<size_t>(m)] *
           std::polar(1.0, 2.0 * pi * freq[static_cast<size_t>(m)] * u +
                               phase[static_cast<size_t>(m)]);
    return s;
  };
  for (int k = 0; k < lines.frames; ++k)
    for (int i = 0; i < lines.line_nx; ++i)
      lines.at(k, i) = speckle(i - k * lag_per_frame);

  const auto prof = directional_velocity(lines, f_prf, 6);
  REQUIRE(prof.valid[0] == 1);
  CHECK(prof.estimate[0].vx == Catch::Approx(vx_true).epsilon(0.05));
  CHECK(prof.estimate[0].vz == 0.0);
  CHECK(prof.estimate[0].method == EstMethod::DirectionalXCorr);
  CHECK(prof.estimate[0].quality > 0.8);
}

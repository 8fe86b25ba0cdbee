#include <doctest.h>

#include <cmath>

#include "osa/iir.hpp"
#include "osa/errors.hpp"

using namespace osa;

namespace {

constexpr double kPi = 3.14159265358979323846;

double rms(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s / static_cast<double>(x.size()));
}

std::vector<double> sine(double f, double fs, double seconds) {
  std::vector<double> x(static_cast<std::size_t>(seconds * fs));
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(2.0 * kPi * f * i / fs);
  return x;
}

}  // namespace

TEST_CASE("notch magnitude response: deep null at f0, flat elsewhere") {
  auto notch = design_notch(60.0, 512.0, 30.0);
  CHECK(notch.stable());
  CHECK(to_db(magnitude_response(notch, 60.0, 512.0)) <= -40.0);
  CHECK(to_db(magnitude_response(notch, 10.0, 512.0)) >= -0.5);
  CHECK(magnitude_response(notch, 1e-9, 512.0) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("bandpass hits -3 dB at both cutoffs and passes the geometric mean") {
  auto bp = design_butter_bandpass(5.0, 35.0, 512.0);
  CHECK(bp.stable());
  CHECK(bp.sections.size() == 2);
  CHECK(to_db(magnitude_response(bp, 5.0, 512.0)) == doctest::Approx(-3.0).epsilon(0.2 / 3.0));
  CHECK(to_db(magnitude_response(bp, 35.0, 512.0)) == doctest::Approx(-3.0).epsilon(0.2 / 3.0));
  double mid_db = to_db(magnitude_response(bp, std::sqrt(5.0 * 35.0), 512.0));
  CHECK(std::abs(mid_db) <= 0.5);
  CHECK(magnitude_response(bp, 1e-12, 512.0) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(to_db(magnitude_response(bp, 60.0, 512.0)) <= -12.0);
}

TEST_CASE("out-of-band design frequencies are rejected") {
  try {
    design_notch(300.0, 512.0, 30.0);
    FAIL("expected InvalidFrequency");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidFrequency);
  }
  CHECK_THROWS_AS(design_butter_bandpass(35.0, 5.0, 512.0), Error);
  CHECK_THROWS_AS(design_butter_bandpass(5.0, 300.0, 512.0), Error);
}

TEST_CASE("apply_filter basics") {
  auto notch = design_notch(60.0, 512.0, 30.0);

  SUBCASE("zero input stays zero") {
    std::vector<double> zeros(1024, 0.0);
    auto y = apply_filter(notch, zeros);
    for (double v : y) CHECK(v == 0.0);
  }
  SUBCASE("empty input raises EmptyInput") {
    std::vector<double> empty;
    try {
      apply_filter(notch, empty);
      FAIL("expected EmptyInput");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::EmptyInput);
    }
  }
  SUBCASE("output length equals input length") {
    auto x = sine(20.0, 512.0, 3.0);
    CHECK(apply_filter(notch, x).size() == x.size());
  }
}

TEST_CASE("zero-phase notch crushes a 60 Hz tone") {
  auto notch = design_notch(60.0, 512.0, 30.0);
  auto x = sine(60.0, 512.0, 10.0);
  auto y = apply_filter(notch, x);
  std::span<const double> core_in(x.data() + 512, x.size() - 1024);
  std::span<const double> core_out(y.data() + 512, y.size() - 1024);
  CHECK(rms(core_out) <= 0.01 * rms(core_in));
}

TEST_CASE("zero-phase bandpass passes 20 Hz nearly untouched") {
  auto bp = design_butter_bandpass(5.0, 35.0, 512.0);
  auto x = sine(20.0, 512.0, 10.0);
  auto y = apply_filter(bp, x);
  std::span<const double> core_in(x.data() + 512, x.size() - 1024);
  std::span<const double> core_out(y.data() + 512, y.size() - 1024);
  CHECK(rms(core_out) == doctest::Approx(rms(core_in)).epsilon(0.05));
}

TEST_CASE("zero-phase application preserves pulse symmetry") {
  auto bp = design_butter_bandpass(5.0, 35.0, 512.0);
  std::vector<double> x(2049, 0.0);
  const std::size_t c = 1024;
  for (int k = -30; k <= 30; ++k)
    x[c + k] = std::exp(-0.5 * (k / 8.0) * (k / 8.0));
  auto y = apply_filter(bp, x);
  for (std::size_t k = 1; k < 900; ++k)
    CHECK(std::abs(y[c + k] - y[c - k]) < 1e-6);
  double max_asym = 0.0;
  for (std::size_t k = 1; k < 900; ++k) max_asym = std::max(max_asym, std::abs(y[c + k] - y[c - k]));
  CHECK(max_asym < 1e-6);
}

TEST_CASE("filtering is linear") {
  auto bp = design_butter_bandpass(5.0, 35.0, 512.0);
  auto x1 = sine(8.0, 512.0, 2.0);
  auto x2 = sine(25.0, 512.0, 2.0);
  const double a = 2.5, b = -1.25;
  std::vector<double> mix(x1.size());
  for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = a * x1[i] + b * x2[i];

  auto y1 = apply_filter(bp, x1);
  auto y2 = apply_filter(bp, x2);
  auto ym = apply_filter(bp, mix);
  for (std::size_t i = 0; i < ym.size(); ++i)
    CHECK(std::abs(ym[i] - (a * y1[i] + b * y2[i])) < 1e-9 * (1.0 + std::abs(ym[i])));
  double worst = 0.0;
  for (std::size_t i = 0; i < ym.size(); ++i) worst = std::max(worst, std::abs(ym[i] - (a * y1[i] + b * y2[i])));
  CHECK(worst < 1e-9);
}

TEST_CASE("designed sections keep poles strictly inside the unit circle") {
  for (double f0 : {50.0, 60.0}) CHECK(design_notch(f0, 512.0, 30.0).stable());
  for (double lo : {0.5, 5.0, 10.0})
    for (double hi : {30.0, 35.0, 100.0}) CHECK(design_butter_bandpass(lo, hi, 512.0).stable());
  Biquad unstable{1.0, 0.0, 0.0, -2.1, 1.2};
  CHECK(!unstable.stable());
}

/// @file test_numerics.cpp
/// @brief Validates the FFT and quadrature plumbing against independent
///        references (naive DFT, closed-form integrals) before any module
///        builds on them.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "logspiral/fft.hpp"
#include "logspiral/quadrature.hpp"

using namespace logspiral;

namespace {

std::vector<std::complex<double>> naive_dft(const std::vector<std::complex<double>>& x, int sign) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n);
  for (std::size_t j = 0; j < n; ++j) {
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t k = 0; k < n; ++k)
      acc += x[k] * std::polar(1.0, sign * two_pi * double(j) * double(k) / double(n));
    out[j] = acc;
  }
  return out;
}

}  // namespace

TEST_CASE("fft matches a naive DFT") {
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (std::size_t n : {8u, 64u, 128u}) {
    std::vector<std::complex<double>> x(n);
    for (auto& v : x) v = {u(rng), u(rng)};
    auto ref = naive_dft(x, -1);
    auto got = x;
    detail::fft_inplace(got, -1);
    for (std::size_t j = 0; j < n; ++j)
      REQUIRE(std::abs(got[j] - ref[j]) < 1e-11);
  }
}

TEST_CASE("fft round trip is the identity") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const std::size_t n = 1024;
  std::vector<std::complex<double>> x(n);
  for (auto& v : x) v = {u(rng), 0.0};
  auto y = x;
  detail::fft_inplace(y, -1);
  detail::fft_inplace(y, +1);
  for (std::size_t j = 0; j < n; ++j)
    REQUIRE(std::abs(y[j] / double(n) - x[j]) < 1e-13);
}

TEST_CASE("fft rejects non power-of-two sizes") {
  std::vector<std::complex<double>> x(24);
  REQUIRE_THROWS_AS(detail::fft_inplace(x, -1), std::invalid_argument);
}

TEST_CASE("signed frequency layout") {
  REQUIRE(detail::signed_frequency(0, 8) == 0);
  REQUIRE(detail::signed_frequency(3, 8) == 3);
  REQUIRE(detail::signed_frequency(4, 8) == -4);
  REQUIRE(detail::signed_frequency(7, 8) == -1);
}

TEST_CASE("gauss rule integrates polynomials and smooth functions") {
  const GaussRule rule = gauss_legendre(16);
  double w = 0.0;
  for (double v : rule.weights) w += v;
  REQUIRE(std::abs(w - 2.0) < 1e-14);

  auto x8 = [](double x) { return std::pow(x, 8); };
  REQUIRE(std::abs(integrate_panels(x8, 0.0, 1.0, 1, rule) - 1.0 / 9.0) < 1e-14);

  auto s = [](double x) { return std::sin(x); };
  REQUIRE(std::abs(integrate_panels(s, 0.0, pi, 2, rule) - 2.0) < 1e-13);
}

TEST_CASE("adaptive quadrature handles interior kinks via breakpoints") {
  auto f = [](double x) { return std::abs(x - 1.0); };
  const double v = integrate_adaptive(f, 0.0, 2.0, {1.0}, 1e-12);
  REQUIRE(std::abs(v - 1.0) < 1e-12);

  auto g = [](double x) { return std::exp(x); };
  const double ref = std::exp(1.0) - std::exp(-1.0);
  REQUIRE(std::abs(integrate_adaptive(g, -1.0, 1.0, {}, 1e-12) - ref) < 1e-12);
}

#include <doctest.h>

#include <cmath>

#include "placeorigin/kernels/kernels.hpp"
#include "placeorigin/rng.hpp"
#include "support/helpers.hpp"
#include "support/oracles.hpp"

using namespace placeorigin;

namespace {

std::vector<float> random_vec(Rng& rng, std::size_t n) {
  std::vector<float> v(n);
  for (auto& x : v) x = static_cast<float>(rng.normal());
  return v;
}

double naive_dot(const std::vector<float>& a, const std::vector<float>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += double(a[i]) * double(b[i]);
  return s;
}

}  // namespace

TEST_CASE("scalar kernels are always available and listed first") {
  const auto all = kernels::available();
  REQUIRE_FALSE(all.empty());
  CHECK(all.front()->name == "scalar");
  bool active_listed = false;
  for (const auto* k : all) active_listed |= (k == &kernels::active());
  CHECK(active_listed);
}

TEST_CASE("every variant matches the scalar reference") {
  Rng rng(2024);
  const auto& ref = kernels::scalar();
  for (const auto* k : kernels::available()) {
    CAPTURE(k->name);
    // Lengths straddle every vector width and remainder path.
    for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 8u, 9u, 15u, 16u, 17u, 31u, 64u, 129u}) {
      const auto a = random_vec(rng, n), b = random_vec(rng, n);
      const double d_ref = ref.dot(a.data(), b.data(), n);
      CHECK(k->dot(a.data(), b.data(), n) == doctest::Approx(d_ref).epsilon(1e-12));
      CHECK(std::abs(d_ref - naive_dot(a, b)) < 1e-9);
      double sq = 0.0;
      for (std::size_t i = 0; i < n; ++i) sq += (double(a[i]) - b[i]) * (double(a[i]) - b[i]);
      CHECK(k->squared_distance(a.data(), b.data(), n) == doctest::Approx(sq).epsilon(1e-12));
    }
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t dim = 1 + rng.below(40);
      const std::size_t qr = 1 + rng.below(12), dr = 1 + rng.below(12);
      const auto q = testsupport::random_matrix(rng, qr, dim);
      const auto d = testsupport::random_matrix(rng, dr, dim);
      const double expect = oracle::maxsim(q, d);
      CHECK(std::abs(k->maxsim(q.data.data(), qr, d.data.data(), dr, dim) - expect) < 1e-9);
    }
  }
}

TEST_CASE("maxsim of a matrix against itself counts its rows") {
  Rng rng(5);
  const auto m = testsupport::random_matrix(rng, 9, 16);
  for (const auto* k : kernels::available()) {
    CHECK(k->maxsim(m.data.data(), 9, m.data.data(), 9, 16) == doctest::Approx(9.0).epsilon(1e-6));
  }
}

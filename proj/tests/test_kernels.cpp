#include "heatdens/kernels.hpp"

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <vector>

using namespace heatdens;
using simd::Level;
using simd::Profile;

namespace {

struct Data {
  std::vector<double> k, s, w;
  simd::Nodes nodes() const { return {k, s, w}; }
};

Data random_nodes(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Data d;
  for (std::size_t j = 0; j < n; ++j) {
    d.k.push_back(std::exp(8.0 * unit(eng) - 4.0));
    d.s.push_back(2.0 * unit(eng) - 1.0);
    d.w.push_back(unit(eng));
  }
  return d;
}

std::vector<Level> levels() {
  std::vector<Level> out{Level::scalar};
  for (Level l : {Level::avx2, Level::avx512})
    if (simd::level_available(l)) out.push_back(l);
  return out;
}

std::uint64_t bits(double v) {
  std::uint64_t b;
  std::memcpy(&b, &v, sizeof b);
  return b;
}

}  // namespace

TEST_CASE("SIMD kernels agree with the scalar reference") {
  MESSAGE("detected level: " << simd::to_string(simd::detected_level()));
  for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 8u, 9u, 15u, 16u, 17u, 31u, 1000u, 4099u}) {
    const Data d = random_nodes(n, 1234 + n);
    for (Profile p : {Profile::gaussian, Profile::quartic, Profile::box}) {
      for (double u : {-1.3, -0.2, 0.0, 0.05, 0.77, 4.0}) {
        const double ref = simd::profile_sum(p, d.nodes(), u, Level::scalar);
        double mag = 0.0;
        for (double w : d.w) mag += w;
        for (Level l : levels()) {
          const double got = simd::profile_sum(p, d.nodes(), u, l);
          CAPTURE(simd::to_string(l));
          CAPTURE(n);
          CHECK(std::abs(got - ref) <= 1e-14 * (mag + 1.0));
        }
      }
    }
  }
}

TEST_CASE("box profile boundary is inclusive at every level") {
  Data d{{1.0, 1.0, 1.0, 1.0, 1.0}, {0.0, 1.0, -1.0, 2.0, 0.5}, {1.0, 2.0, 4.0, 8.0, 16.0}};
  for (Level l : levels()) {
    // u = 1: |z| = 1, 0, 2, 1, 0.5 -> nodes 0, 1, 3, 4 count.
    CHECK(simd::profile_sum(Profile::box, d.nodes(), 1.0, l) == 1.0 + 2.0 + 8.0 + 16.0);
  }
}

TEST_CASE("polynomial exponential") {
  std::mt19937_64 eng(7);
  std::uniform_real_distribution<double> dist(-707.0, 0.0);
  for (int i = 0; i < 20000; ++i) {
    const double x = dist(eng);
    const double ref = std::exp(x);
    CHECK(std::abs(simd::exp_reference(x) - ref) <= 4e-16 * ref);
  }
  CHECK(simd::exp_reference(0.0) == 1.0);
  CHECK(simd::exp_reference(-708.5) == 0.0);
  CHECK(simd::exp_reference(-1e300) == 0.0);
}

TEST_CASE("single gaussian node reproduces the reference exponential bit for bit") {
  for (Level l : levels()) {
    if (l == Level::scalar) continue;
    for (double z : {0.0, 0.3, 1.0, 2.5, 7.0, 30.0, 37.6}) {
      // Pad to a full vector and a remainder so both code paths are hit.
      for (std::size_t n : {1u, 8u, 9u}) {
        Data d{std::vector<double>(n, 1.0), std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
        d.w[n - 1] = 1.0;
        const double got = simd::profile_sum(Profile::gaussian, d.nodes(), z, l);
        CAPTURE(simd::to_string(l));
        CAPTURE(z);
        CHECK(bits(got) == bits(simd::exp_reference(-0.5 * z * z)));
      }
    }
  }
}

TEST_CASE("level parsing and override") {
  CHECK(simd::parse_level("scalar") == Level::scalar);
  CHECK(simd::parse_level("avx2") == Level::avx2);
  CHECK(simd::parse_level("avx512") == Level::avx512);
  CHECK_FALSE(simd::parse_level("neon").has_value());
  simd::set_level_override(Level::scalar);
  CHECK(simd::active_level() == Level::scalar);
  simd::set_level_override(std::nullopt);
  CHECK(simd::active_level() == simd::detected_level());
}

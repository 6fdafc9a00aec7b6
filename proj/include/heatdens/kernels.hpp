#pragma once

// Inner loops of every density evaluation. A density value is a weighted sum
// over precomputed quadrature (or Monte Carlo) nodes
//
//     f(u) = sum_j w_j * g(k_j * (u - s_j))
//
// where g is the standardized profile of the pivot law. Each profile has a
// scalar reference kernel and SIMD variants; the variant is picked once at
// runtime from the CPU features and can be overridden for testing.

#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace heatdens::simd {

enum class Level { scalar, avx2, avx512 };

// Unnormalized standardized profiles; normalizing constants live in w_j.
enum class Profile {
  gaussian,  // exp(-z^2 / 2)
  quartic,   // 1 / (1 + z^4)
  box,       // 1 on |z| <= 1, else 0
};

struct Nodes {
  std::span<const double> k;
  std::span<const double> s;
  std::span<const double> w;
};

// Highest level supported by this CPU and build.
Level detected_level();

// Level used when none is passed explicitly: the override if set (API or the
// HEATDENS_SIMD environment variable), else detected_level().
Level active_level();

void set_level_override(std::optional<Level> level);

bool level_available(Level level);

std::string_view to_string(Level level);
std::optional<Level> parse_level(std::string_view name);

double profile_sum(Profile profile, const Nodes& nodes, double u, Level level);

inline double profile_sum(Profile profile, const Nodes& nodes, double u) {
  return profile_sum(profile, nodes, u, active_level());
}

// Exponential used by the SIMD gaussian kernels, exposed for testing.
// Returns exactly 0 below -708.
double exp_reference(double x);

namespace detail {
using SumFn = double (*)(const double* k, const double* s, const double* w, std::size_t n, double u);

struct KernelTable {
  SumFn gaussian;
  SumFn quartic;
  SumFn box;
};

const KernelTable& scalar_table();
#if defined(HEATDENS_HAVE_X86_SIMD)
const KernelTable& avx2_table();
const KernelTable& avx512_table();
#endif
}  // namespace detail

}  // namespace heatdens::simd

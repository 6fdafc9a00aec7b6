#include "heatdens/kernels.hpp"

#include <cmath>
#include <cstddef>

namespace heatdens::simd::detail {
namespace {

double gaussian_sum(const double* k, const double* s, const double* w, std::size_t n, double u) {
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double z = k[j] * (u - s[j]);
    acc += w[j] * std::exp(-0.5 * z * z);
  }
  return acc;
}

double quartic_sum(const double* k, const double* s, const double* w, std::size_t n, double u) {
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double z = k[j] * (u - s[j]);
    const double z2 = z * z;
    acc += w[j] / (1.0 + z2 * z2);
  }
  return acc;
}

double box_sum(const double* k, const double* s, const double* w, std::size_t n, double u) {
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double z = k[j] * (u - s[j]);
    if (std::abs(z) <= 1.0) acc += w[j];
  }
  return acc;
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{gaussian_sum, quartic_sum, box_sum};
  return table;
}

}  // namespace heatdens::simd::detail

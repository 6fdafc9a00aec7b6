#include "exp_poly.hpp"
#include "heatdens/kernels.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace heatdens::simd {
namespace {

// -1: no override; otherwise the Level value.
std::atomic<int> g_override{-1};

std::optional<Level> env_override() {
  static const std::optional<Level> value = [] {
    const char* env = std::getenv("HEATDENS_SIMD");
    return env ? parse_level(env) : std::nullopt;
  }();
  return value;
}

const detail::KernelTable& table_for(Level level) {
  switch (level) {
#if defined(HEATDENS_HAVE_X86_SIMD)
    case Level::avx2:
      return detail::avx2_table();
    case Level::avx512:
      return detail::avx512_table();
#endif
    default:
      return detail::scalar_table();
  }
}

}  // namespace

Level detected_level() {
#if defined(HEATDENS_HAVE_X86_SIMD)
  static const Level level = [] {
    __builtin_cpu_init();
    if (__builtin_cpu_supports("avx512f") && __builtin_cpu_supports("avx512dq")) return Level::avx512;
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return Level::avx2;
    return Level::scalar;
  }();
  return level;
#else
  return Level::scalar;
#endif
}

bool level_available(Level level) {
  switch (level) {
    case Level::scalar:
      return true;
    case Level::avx2:
      return detected_level() == Level::avx2 || detected_level() == Level::avx512;
    case Level::avx512:
      return detected_level() == Level::avx512;
  }
  return false;
}

Level active_level() {
  const int o = g_override.load(std::memory_order_relaxed);
  if (o >= 0) return static_cast<Level>(o);
  if (auto env = env_override(); env && level_available(*env)) return *env;
  return detected_level();
}

void set_level_override(std::optional<Level> level) {
  if (level && !level_available(*level))
    throw std::invalid_argument("SIMD level not available on this CPU: " + std::string(to_string(*level)));
  g_override.store(level ? static_cast<int>(*level) : -1, std::memory_order_relaxed);
}

std::string_view to_string(Level level) {
  switch (level) {
    case Level::scalar:
      return "scalar";
    case Level::avx2:
      return "avx2";
    case Level::avx512:
      return "avx512";
  }
  return "unknown";
}

std::optional<Level> parse_level(std::string_view name) {
  if (name == "scalar") return Level::scalar;
  if (name == "avx2") return Level::avx2;
  if (name == "avx512") return Level::avx512;
  return std::nullopt;
}

double profile_sum(Profile profile, const Nodes& nodes, double u, Level level) {
  if (nodes.k.size() != nodes.s.size() || nodes.k.size() != nodes.w.size())
    throw std::invalid_argument("profile_sum: node arrays differ in length");
  if (!level_available(level)) level = Level::scalar;
  const auto& t = table_for(level);
  const detail::SumFn fn = profile == Profile::gaussian ? t.gaussian : profile == Profile::quartic ? t.quartic : t.box;
  return fn(nodes.k.data(), nodes.s.data(), nodes.w.data(), nodes.k.size(), u);
}

double exp_reference(double x) {
  namespace c = detail::expc;
  if (!(x >= c::lower_cut)) return 0.0;
  const double n = std::nearbyint(x * c::log2e);
  double r = std::fma(-n, c::ln2_hi, x);
  r = std::fma(-n, c::ln2_lo, r);
  double p = c::c[13];
  for (int i = 12; i >= 0; --i) p = std::fma(p, r, c::c[i]);
  return std::ldexp(p, static_cast<int>(n));
}

}  // namespace heatdens::simd

#include "dagsmooth/rng.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "dagsmooth/errors.hpp"

namespace dagsmooth {

namespace {

// splitmix64; used only to spread seeds, never as the main generator.
std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  return splitmix64(splitmix64(seed) ^ (0x9e3779b97f4a7c15ULL * (stream + 1)));
}

RngStream::RngStream(std::uint64_t seed) : engine_(splitmix64(seed)) {}

std::uint64_t RngStream::next_u64() { return engine_(); }

double RngStream::uniform() {
  // 53-bit mantissa, centered so neither endpoint is reachable.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

int RngStream::uniform_int(int lo, int hi) {
  if (hi < lo) throw DomainError("uniform_int: empty range");
  auto width = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo) + 1;
  std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % width + 1) % width;
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x > limit);
  return lo + static_cast<int>(x % width);
}

double RngStream::normal() { return std_normal_quantile(uniform()); }

double RngStream::log_gamma_variate(double shape) {
  if (!(shape > 0.0)) throw DomainError("gamma shape must be positive");
  if (shape < 1.0) {
    // Boost: G(a) = G(a+1) * U^(1/a), kept as a log so tiny shapes never
    // underflow to zero.
    double lg = log_gamma_variate(shape + 1.0);
    return lg + std::log(uniform()) / shape;
  }
  // Marsaglia-Tsang squeeze.
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = normal();
    double t = 1.0 + c * x;
    if (t <= 0.0) continue;
    double v = t * t * t;
    double u = uniform();
    double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return std::log(d * v);
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return std::log(d * v);
  }
}

double RngStream::beta(double a, double b) {
  double lx = log_gamma_variate(a);
  double ly = log_gamma_variate(b);
  // X/(X+Y) in log space.
  double m = std::max(lx, ly);
  double lsum = m + std::log(std::exp(lx - m) + std::exp(ly - m));
  return std::exp(lx - lsum);
}

std::vector<int> RngStream::sample_without_replacement(int n, int k) {
  if (k > n || k < 0) throw DomainError("cannot sample " + std::to_string(k) + " of " +
                                        std::to_string(n) + " items");
  std::vector<int> pool(static_cast<size_t>(n));
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = 0; i < k; ++i) {
    int j = uniform_int(i, n - 1);
    std::swap(pool[static_cast<size_t>(i)], pool[static_cast<size_t>(j)]);
  }
  pool.resize(static_cast<size_t>(k));
  return pool;
}

}  // namespace dagsmooth

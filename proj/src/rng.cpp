#include "declqr/rng.hpp"

namespace declqr {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b,
                          std::uint64_t c) {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ splitmix64(a + 1));
  h = splitmix64(h ^ splitmix64(b + 0x100));
  h = splitmix64(h ^ splitmix64(c + 0x10000));
  return h;
}

VectorXd gaussian_vector(Rng& rng, int n, double sigma) {
  std::normal_distribution<double> normal(0.0, 1.0);
  VectorXd v(n);
  for (int k = 0; k < n; ++k) v(k) = normal(rng);
  return sigma * v;
}

}  // namespace declqr

#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace hof {

// std::mt19937_64's output sequence is fixed by the standard, but the std
// distributions are not, so sampling is done here to keep runs
// bit-identical across standard library implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }
  double uniform01();
  uint64_t uniform_index(uint64_t bound);
  double normal(double mean, double stddev);

  template <typename T>
  void shuffle(std::span<T> items) {
    for (size_t i = items.size(); i > 1; --i) {
      const size_t j = static_cast<size_t>(uniform_index(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  std::vector<size_t> permutation(size_t n);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace hof

#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace hatescan {

// Seeded generator whose output sequence is fully specified by the standard
// (mt19937_64), so shuffles reproduce across standard library vendors.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);
  // Uniform double in [0, 1).
  double uniform();

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      using std::swap;
      swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// Independent substream seed for a named consumer ("split", "folds",
// "svm-order", ...) of a single run seed.
std::uint64_t derive_seed(std::uint64_t run_seed, std::string_view stream);

}  // namespace hatescan

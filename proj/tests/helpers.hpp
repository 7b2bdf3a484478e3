#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ccdos/dataset.hpp"
#include "ccdos/rng.hpp"

namespace testing {

// Uniform points in [0, scale]^d.
inline ccdos::PointSet random_points(std::uint64_t seed, std::size_t n, std::size_t d,
                                     double scale = 1.0) {
  ccdos::CounterRng rng(seed);
  std::vector<double> c(n * d);
  for (auto& v : c) v = scale * rng.uniform();
  return ccdos::PointSet(n, d, std::move(c));
}

inline ccdos::PointSet line(std::vector<double> xs) {
  const std::size_t n = xs.size();
  return ccdos::PointSet(n, 1, std::move(xs));
}

// Fresh directory under the system temp dir, removed on destruction.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           ("ccdos_test_" + tag + "_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

}  // namespace testing

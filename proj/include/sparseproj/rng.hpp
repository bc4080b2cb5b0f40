#pragma once

#include "sparseproj/core.hpp"

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>

namespace sparseproj {

using Rng = std::mt19937_64;

/// 64-bit FNV-1a over raw bytes.
inline std::uint64_t fnv1a(std::string_view bytes,
                           std::uint64_t state = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    state ^= c;
    state *= 0x100000001b3ULL;
  }
  return state;
}

/// Trial seed: FNV-1a over the decimal rendering of the master seed, the
/// experiment id and the grid/trial indices, joined with '/'.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view experiment,
                                 std::initializer_list<std::uint64_t> indices) {
  std::string key = std::to_string(master);
  key += '/';
  key += experiment;
  for (auto i : indices) {
    key += '/';
    key += std::to_string(i);
  }
  return fnv1a(key);
}

inline DenseVector gaussian_vector(Eigen::Index n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  DenseVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

inline Eigen::MatrixXd gaussian_matrix_entries(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  // Column-major fill keeps the stream order independent of Eigen internals.
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  return m;
}

/// k distinct indices from {0..n-1}, uniformly, in draw order. Partial
/// Fisher-Yates over a virtual identity array; only displaced slots are stored.
inline IndexSet sample_without_replacement(std::size_t n, std::size_t k, Rng& rng) {
  if (k > n) throw DomainError("sample_without_replacement: k > n");
  std::unordered_map<std::size_t, std::size_t> moved;
  auto at = [&](std::size_t i) {
    const auto it = moved.find(i);
    return it == moved.end() ? i : it->second;
  };
  IndexSet out(k);
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    const std::size_t j = pick(rng);
    out[i] = at(j);
    moved[j] = at(i);
  }
  return out;
}

}  // namespace sparseproj

#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace stepeval {

std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temp file, then renames over `path`. Throws IoError.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string csv_field(std::string_view value);
std::string format_double(double value);

/// Stable across platforms and runs, unlike std::hash.
std::uint64_t fnv1a(std::string_view text, std::uint64_t basis = 0xcbf29ce484222325ULL);
std::uint64_t mix_seed(std::uint64_t seed, std::string_view key, std::uint64_t salt = 0);

/// Fisher-Yates with an explicit bounded draw; std::shuffle's use of the
/// engine is implementation-defined.
template <typename T>
void stable_shuffle(std::vector<T>& items, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::uint64_t bound = i;
    const std::uint64_t limit = std::mt19937_64::max() - std::mt19937_64::max() % bound;
    std::uint64_t draw;
    do {
      draw = rng();
    } while (draw >= limit);
    std::swap(items[i - 1], items[draw % bound]);
  }
}

}  // namespace stepeval

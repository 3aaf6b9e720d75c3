#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "freebnd/grid_function.hpp"

namespace freebnd {

inline constexpr int kGridFormatVersion = 1;

/// On-disk layout: one line of JSON
///   {"version", "dim", "origin", "spacing", "shape", "exterior", "checksum", "meta"}
/// then '\n', then the values as little-endian IEEE-754 doubles in storage
/// order. The checksum is FNV-1a (64 bit) of the payload bytes, in hex.
void save_grid_function(const std::string& path, const GridFunction& u, const nlohmann::json& meta = {});

struct LoadedGrid {
  GridFunction function;
  nlohmann::json meta;
};
LoadedGrid load_grid_function_with_meta(const std::string& path);
GridFunction load_grid_function(const std::string& path);

std::uint64_t fnv1a64(const unsigned char* data, std::size_t n);

}  // namespace freebnd

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "birdcall/aligned.hpp"

namespace birdcall {

struct NamedArray {
  std::string name;
  std::vector<std::size_t> shape;
  AlignedVector data;

  std::size_t element_count() const;
};

// Versioned binary container of named float64 arrays with a JSON header.
//
//   "BIRDCALL" | u32 version | u64 header bytes | header JSON |
//   little-endian float64 payload | u32 CRC-32 of everything before it
//
// The header records the archive kind, free-form metadata and, per array, its
// name, shape and payload offset.
struct Archive {
  static constexpr std::uint32_t kVersion = 1;

  std::string kind;
  nlohmann::json metadata = nlohmann::json::object();
  std::vector<NamedArray> arrays;

  const NamedArray& get(std::string_view name) const;
  const NamedArray* find(std::string_view name) const;
};

std::vector<std::uint8_t> encode_archive(const Archive& archive);
Archive decode_archive(std::span<const std::uint8_t> bytes);

void write_archive(const std::filesystem::path& path, const Archive& archive);
Archive read_archive(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it over the target.
void atomic_write(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void atomic_write(const std::filesystem::path& path, std::string_view text);

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes);

}  // namespace birdcall

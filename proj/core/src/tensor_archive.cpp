#include "birdcall/tensor_archive.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <functional>
#include <iterator>
#include <numeric>

#include <zlib.h>

#include "birdcall/error.hpp"

namespace birdcall {
namespace {

constexpr char kMagic[8] = {'B', 'I', 'R', 'D', 'C', 'A', 'L', 'L'};
constexpr std::size_t kPrefix = sizeof kMagic + 4 + 8;

static_assert(std::endian::native == std::endian::little,
              "archive payloads are written in host byte order");

template <typename T>
void put(std::vector<std::uint8_t>& out, T value) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(&value);
  out.insert(out.end(), p, p + sizeof(T));
}

template <typename T>
T get_at(std::span<const std::uint8_t> bytes, std::size_t at) {
  T value;
  std::memcpy(&value, bytes.data() + at, sizeof(T));
  return value;
}

}  // namespace

std::size_t NamedArray::element_count() const {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

const NamedArray* Archive::find(std::string_view name) const {
  for (const auto& a : arrays) {
    if (a.name == name) return &a;
  }
  return nullptr;
}

const NamedArray& Archive::get(std::string_view name) const {
  if (const auto* a = find(name)) return *a;
  throw FormatError("archive has no array named '" + std::string(name) + "'");
}

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  std::size_t done = 0;
  while (done < bytes.size()) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(bytes.size() - done, 1u << 30));
    crc = crc32(crc, bytes.data() + done, chunk);
    done += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

std::vector<std::uint8_t> encode_archive(const Archive& archive) {
  nlohmann::json header;
  header["kind"] = archive.kind;
  header["metadata"] = archive.metadata;
  header["arrays"] = nlohmann::json::array();
  std::size_t offset = 0;
  for (const auto& a : archive.arrays) {
    if (a.element_count() != a.data.size()) {
      throw ShapeError("array '" + a.name + "' shape does not match its data");
    }
    header["arrays"].push_back({{"name", a.name}, {"shape", a.shape}, {"offset", offset}});
    offset += a.data.size();
  }
  const std::string text = header.dump();

  std::vector<std::uint8_t> out;
  out.reserve(kPrefix + text.size() + offset * sizeof(double) + 4);
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put<std::uint32_t>(out, Archive::kVersion);
  put<std::uint64_t>(out, text.size());
  out.insert(out.end(), text.begin(), text.end());
  for (const auto& a : archive.arrays) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(a.data.data());
    out.insert(out.end(), p, p + a.data.size() * sizeof(double));
  }
  put<std::uint32_t>(out, crc32_of(out));
  return out;
}

Archive decode_archive(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kPrefix + 4) throw ChecksumError("archive truncated");
  const auto stored = get_at<std::uint32_t>(bytes, bytes.size() - 4);
  const auto body = bytes.first(bytes.size() - 4);
  if (crc32_of(body) != stored) throw ChecksumError("archive checksum mismatch (corrupt or truncated)");
  if (std::memcmp(body.data(), kMagic, sizeof kMagic) != 0) throw FormatError("not a birdcall archive");
  const auto version = get_at<std::uint32_t>(body, sizeof kMagic);
  if (version != Archive::kVersion) {
    throw VersionError("archive version " + std::to_string(version) + " is not supported (expected " +
                       std::to_string(Archive::kVersion) + ")");
  }
  const auto header_len = get_at<std::uint64_t>(body, sizeof kMagic + 4);
  if (kPrefix + header_len > body.size()) throw FormatError("archive header overruns the file");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(body.begin() + kPrefix, body.begin() + static_cast<std::ptrdiff_t>(kPrefix + header_len));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("archive header is not valid JSON: ") + e.what());
  }

  Archive archive;
  archive.kind = header.at("kind").get<std::string>();
  archive.metadata = header.at("metadata");
  const std::size_t payload = kPrefix + header_len;
  const std::size_t payload_doubles = (body.size() - payload) / sizeof(double);
  for (const auto& entry : header.at("arrays")) {
    NamedArray a;
    a.name = entry.at("name").get<std::string>();
    a.shape = entry.at("shape").get<std::vector<std::size_t>>();
    const auto offset = entry.at("offset").get<std::size_t>();
    const std::size_t n = a.element_count();
    if (offset + n > payload_doubles) throw FormatError("array '" + a.name + "' overruns the payload");
    a.data.resize(n);
    std::memcpy(a.data.data(), body.data() + payload + offset * sizeof(double), n * sizeof(double));
    archive.arrays.push_back(std::move(a));
  }
  return archive;
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string(), Error::Kind::user);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void atomic_write(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string(), Error::Kind::user);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void atomic_write(const std::filesystem::path& path, std::string_view text) {
  atomic_write(path, std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

void write_archive(const std::filesystem::path& path, const Archive& archive) {
  atomic_write(path, encode_archive(archive));
}

Archive read_archive(const std::filesystem::path& path) {
  return decode_archive(read_bytes(path));
}

}  // namespace birdcall

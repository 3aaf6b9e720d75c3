#include "freebnd/grid_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

namespace freebnd {
namespace {

std::vector<unsigned char> encode(std::span<const double> values) {
  std::vector<unsigned char> out(values.size() * 8);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto bits = std::bit_cast<std::uint64_t>(values[i]);
    for (int b = 0; b < 8; ++b) out[i * 8 + b] = static_cast<unsigned char>(bits >> (8 * b));
  }
  return out;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

}  // namespace

std::uint64_t fnv1a64(const unsigned char* data, std::size_t n) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= data[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

void save_grid_function(const std::string& path, const GridFunction& u, const nlohmann::json& meta) {
  if (u.exterior().kind() == Exterior::Kind::closed_form && !u.exterior().form().serializable()) {
    throw Error(ErrorCode::InvalidArgument, "exterior closed form '" + u.exterior().form().tag() +
                                                "' cannot be written to a grid file");
  }
  const auto payload = encode(u.values());
  nlohmann::json header = u.grid().to_json();
  header["version"] = kGridFormatVersion;
  header["exterior"] = u.exterior().to_json();
  header["checksum"] = hex64(fnv1a64(payload.data(), payload.size()));
  if (!meta.is_null()) header["meta"] = meta;

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for writing");
  out << header.dump() << '\n';
  out.write(reinterpret_cast<const char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
  if (!out) throw Error(ErrorCode::IoError, "write to '" + path + "' failed");
}

LoadedGrid load_grid_function_with_meta(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::ChecksumMismatch, "'" + path + "' has no header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ChecksumMismatch, "'" + path + "' header is not valid JSON: " + e.what());
  }
  const int version = header.value("version", -1);
  if (version != kGridFormatVersion) {
    throw Error(ErrorCode::FormatVersionMismatch, "'" + path + "' has format version " + std::to_string(version) +
                                                      ", expected " + std::to_string(kGridFormatVersion));
  }
  GridSpec grid;
  Exterior exterior = Exterior::zero();
  try {
    grid = GridSpec::from_json(header);
    exterior = Exterior::from_json(header.at("exterior"), grid.dim);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid, "'" + path + "' header: " + e.what());
  }

  std::vector<unsigned char> payload((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string expected = header.value("checksum", std::string());
  if (payload.size() != grid.size() * 8 || hex64(fnv1a64(payload.data(), payload.size())) != expected) {
    throw Error(ErrorCode::ChecksumMismatch, "'" + path + "' payload does not match its header checksum");
  }
  std::vector<double> values(grid.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(payload[i * 8 + b]) << (8 * b);
    values[i] = std::bit_cast<double>(bits);
  }
  LoadedGrid out{GridFunction(grid, std::move(values), std::move(exterior)), header.value("meta", nlohmann::json())};
  return out;
}

GridFunction load_grid_function(const std::string& path) { return load_grid_function_with_meta(path).function; }

}  // namespace freebnd

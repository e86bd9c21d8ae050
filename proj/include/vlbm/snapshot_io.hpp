#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "vlbm/grid.hpp"

namespace vlbm {

// .vlbm snapshot format (little-endian), 44-byte header:
//   magic "VLBM" | u32 version=1 | u32 flags (bit 0 = diverged)
//   u32 nx | u32 ny | f64 time | u64 sample_seed | u64 reserved=0
// followed by four contiguous f64 planes (rho, rho*v1, rho*v2, E), each
// row-major with x fastest.
inline constexpr std::uint32_t kSnapshotVersion = 1;
inline constexpr std::size_t kSnapshotHeaderSize = 44;
inline constexpr char kSnapshotMagic[4] = {'V', 'L', 'B', 'M'};

namespace detail {

template <typename T>
void put(std::string& buf, T v) {
  char tmp[sizeof(T)];
  std::memcpy(tmp, &v, sizeof(T));
  buf.append(tmp, sizeof(T));
}

template <typename T>
T get(std::istream& in, const char* what) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) {
    throw std::runtime_error(std::string("snapshot: truncated file while reading ") + what);
  }
  return v;
}

}  // namespace detail

/// Writes a snapshot; write-then-rename keeps partially written files from
/// being mistaken for completed ones on resume.
inline void write_snapshot(const FieldSnapshot& s, const std::filesystem::path& path) {
  if (s.data.size() != s.grid.cells()) {
    throw std::invalid_argument("write_snapshot: data length does not match grid");
  }
  std::string header;
  header.reserve(kSnapshotHeaderSize);
  header.append(kSnapshotMagic, 4);
  detail::put<std::uint32_t>(header, kSnapshotVersion);
  detail::put<std::uint32_t>(header, s.diverged ? 1u : 0u);
  detail::put<std::uint32_t>(header, static_cast<std::uint32_t>(s.grid.nx));
  detail::put<std::uint32_t>(header, static_cast<std::uint32_t>(s.grid.ny));
  detail::put<double>(header, s.time);
  detail::put<std::uint64_t>(header, s.sample_seed);
  detail::put<std::uint64_t>(header, 0);  // reserved

  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("write_snapshot: cannot open " + tmp.string());
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    std::vector<double> plane(s.data.size());
    for (int comp = 0; comp < 4; ++comp) {
      for (std::size_t c = 0; c < s.data.size(); ++c) plane[c] = s.data[c][comp];
      out.write(reinterpret_cast<const char*>(plane.data()),
                static_cast<std::streamsize>(plane.size() * sizeof(double)));
    }
    if (!out) throw std::runtime_error("write_snapshot: write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

struct SnapshotHeader {
  std::uint32_t flags = 0;
  int nx = 0;
  int ny = 0;
  double time = 0.0;
  std::uint64_t sample_seed = 0;
  bool diverged() const { return flags & 1u; }
};

inline SnapshotHeader read_snapshot_header(std::istream& in, const std::string& name) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kSnapshotMagic, 4) != 0) {
    throw std::runtime_error("snapshot: bad magic in " + name);
  }
  const auto version = detail::get<std::uint32_t>(in, "version");
  if (version != kSnapshotVersion) {
    throw std::runtime_error("snapshot: unsupported version " + std::to_string(version) +
                             " in " + name);
  }
  SnapshotHeader h;
  h.flags = detail::get<std::uint32_t>(in, "flags");
  h.nx = static_cast<int>(detail::get<std::uint32_t>(in, "nx"));
  h.ny = static_cast<int>(detail::get<std::uint32_t>(in, "ny"));
  h.time = detail::get<double>(in, "time");
  h.sample_seed = detail::get<std::uint64_t>(in, "sample_seed");
  detail::get<std::uint64_t>(in, "reserved");
  return h;
}

inline FieldSnapshot read_snapshot(const std::filesystem::path& path,
                                   const Grid& domain_hint = Grid{}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_snapshot: cannot open " + path.string());
  const SnapshotHeader h = read_snapshot_header(in, path.string());
  FieldSnapshot s;
  s.grid.nx = h.nx;
  s.grid.ny = h.ny;
  // Domain extents are not stored in the file; take them from the hint when
  // provided (the manifest carries them), otherwise keep jet-case defaults.
  if (domain_hint.nx != 0) {
    s.grid.x_max = domain_hint.x_max;
    s.grid.y_min = domain_hint.y_min;
    s.grid.y_max = domain_hint.y_max;
    if (domain_hint.nx != h.nx || domain_hint.ny != h.ny) {
      throw std::runtime_error("read_snapshot: dimension mismatch in " + path.string());
    }
  }
  s.time = h.time;
  s.sample_seed = h.sample_seed;
  s.diverged = h.diverged();
  const std::size_t n = static_cast<std::size_t>(h.nx) * h.ny;
  s.data.resize(n);
  std::vector<double> plane(n);
  for (int comp = 0; comp < 4; ++comp) {
    if (!in.read(reinterpret_cast<char*>(plane.data()),
                 static_cast<std::streamsize>(n * sizeof(double)))) {
      throw std::runtime_error("read_snapshot: truncated data in " + path.string());
    }
    for (std::size_t c = 0; c < n; ++c) s.data[c][comp] = plane[c];
  }
  return s;
}

/// Sequential per-cell reader: yields scalar values in storage order
/// (plane by plane, x fastest) without loading the full field.
class SnapshotStream {
 public:
  explicit SnapshotStream(const std::filesystem::path& path)
      : in_(path, std::ios::binary), name_(path.string()) {
    if (!in_) throw std::runtime_error("SnapshotStream: cannot open " + name_);
    header_ = read_snapshot_header(in_, name_);
    cells_ = static_cast<std::size_t>(header_.nx) * header_.ny;
  }

  const SnapshotHeader& header() const { return header_; }
  std::size_t cells() const { return cells_; }

  /// Positions the stream at the start of component plane `comp` (0..3).
  void seek_plane(int comp) {
    in_.clear();
    in_.seekg(static_cast<std::streamoff>(kSnapshotHeaderSize) +
              static_cast<std::streamoff>(comp) * static_cast<std::streamoff>(cells_) *
                  static_cast<std::streamoff>(sizeof(double)));
    remaining_ = cells_;
  }

  /// Reads the next value of the current plane. Returns false at plane end.
  bool next(double& v) {
    if (remaining_ == 0) return false;
    if (!in_.read(reinterpret_cast<char*>(&v), sizeof(double))) {
      throw std::runtime_error("SnapshotStream: truncated data in " + name_);
    }
    --remaining_;
    return true;
  }

 private:
  std::ifstream in_;
  std::string name_;
  SnapshotHeader header_;
  std::size_t cells_ = 0;
  std::size_t remaining_ = 0;
};

}  // namespace vlbm

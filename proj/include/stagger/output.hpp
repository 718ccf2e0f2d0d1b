// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "stagger/integrator.hpp"

namespace stagger {

static_assert(std::endian::native == std::endian::little, "snapshot I/O assumes a little-endian host");

inline constexpr char snapshot_magic[4] = {'S', 'T', 'G', 'D'};
inline constexpr std::uint32_t snapshot_version = 1;

class EnergyLog {
public:
  EnergyLog() = default;
  explicit EnergyLog(const std::string& path) : out_(path) {
    if (!out_) throw Error(ErrorKind::io, "cannot open energy log '" + path + "'");
    out_ << "k,t,kinetic,stored,dissipated_step,external_work_step,a_coeff,residual\n";
  }
  bool is_open() const { return out_.is_open(); }

  void write(const EnergyLedger& L) {
    if (!out_.is_open()) return;
    out_ << format_row(L) << '\n';
    if (!out_) throw Error(ErrorKind::io, "write to energy log failed");
  }

  static std::string format_row(const EnergyLedger& L) {
    char buf[512];
    std::snprintf(buf, sizeof buf, "%ld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", L.k, L.t, L.kinetic, L.stored,
                  L.dissipated_step, L.external_work_step, L.stability_coeff, L.residual);
    return buf;
  }

private:
  std::ofstream out_;
};

struct Snapshot {
  std::uint32_t dim = 1;
  std::vector<std::pair<std::string, Field>> fields;
};

inline void write_snapshot(const std::string& path, const Snapshot& snap) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot open snapshot '" + path + "'");
  auto put32 = [&](std::uint32_t x) { out.write(reinterpret_cast<const char*>(&x), 4); };
  auto put64 = [&](std::uint64_t x) { out.write(reinterpret_cast<const char*>(&x), 8); };
  out.write(snapshot_magic, 4);
  put32(snapshot_version);
  put32(static_cast<std::uint32_t>(snap.fields.size()));
  put32(snap.dim);
  for (const auto& [name, f] : snap.fields) {
    put32(static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put64(f.size());
    out.write(reinterpret_cast<const char*>(f.data()), static_cast<std::streamsize>(f.size() * sizeof(double)));
  }
  if (!out) throw Error(ErrorKind::io, "write to snapshot '" + path + "' failed");
}

inline Snapshot read_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open snapshot '" + path + "'");
  auto get = [&](void* p, std::size_t n) {
    in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!in) throw Error(ErrorKind::io, "truncated snapshot '" + path + "'");
  };
  char magic[4];
  get(magic, 4);
  if (std::memcmp(magic, snapshot_magic, 4) != 0) throw Error(ErrorKind::io, "'" + path + "' is not a snapshot");
  std::uint32_t version = 0, count = 0;
  Snapshot s;
  get(&version, 4);
  if (version != snapshot_version) throw Error(ErrorKind::io, "unsupported snapshot version " + std::to_string(version));
  get(&count, 4);
  get(&s.dim, 4);
  for (std::uint32_t i = 0; i < count; ++i) {
    std::uint32_t len = 0;
    get(&len, 4);
    std::string name(len, '\0');
    get(name.data(), len);
    std::uint64_t n = 0;
    get(&n, 8);
    Field f(n);
    get(f.data(), n * sizeof(double));
    s.fields.emplace_back(std::move(name), std::move(f));
  }
  return s;
}

} // namespace stagger

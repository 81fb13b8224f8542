#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

#include "hchain/lattice.hpp"

namespace hchain {

enum class TrajectoryFormat { binary, csv };

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One realization stored as a header (params, window, dt, seed lineage,
/// provenance) followed by rows (t, x, u, v) ordered by t, then x.  The
/// segments of a file share everything but their time grid and must be
/// separated by at least one missing grid time.
///
/// Binary layout, little-endian:
///   "HCHAINTR" | u32 version | 5 x f64 params | i64 R | f64 dt |
///   u64 master_seed | u64 member | u8 provenance | 7 x u8 zero |
///   u64 row count | rows of (f64 t, i64 x, f64 u, f64 v)
void write_trajectory_binary(std::ostream& out, std::span<const Trajectory> segments);
std::vector<Trajectory> read_trajectory_binary(std::istream& in);

/// CSV with '#'-prefixed key=value header lines and a "t,x,u,v" table;
/// numbers are printed with 17 significant digits.
void write_trajectory_csv(std::ostream& out, std::span<const Trajectory> segments);
std::vector<Trajectory> read_trajectory_csv(std::istream& in);

void save_trajectory(const std::filesystem::path& path, std::span<const Trajectory> segments,
                     TrajectoryFormat format);
/// Detects the format from the leading bytes.
std::vector<Trajectory> load_trajectory(const std::filesystem::path& path);

}  // namespace hchain

#pragma once

#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include "spindle/forward.hpp"
#include "spindle/sparse.hpp"
#include "spindle/volume.hpp"

namespace spindle {

/// Binary files are one line of JSON header followed by a little-endian payload.
///   STVOL1: {"magic","n","extent","dtype":"f64","byte_order":"LE"[,"labels"]} + n^3 f64, x fastest
///   STDAT1: {"magic","transform","r","alpha","beta","physics_hash"} + |r||alpha||beta| f64, beta fastest
///   STSM1:  {"magic","rows","cols","nnz","transform","grid","volume"} + nnz x (u64 row, u64 col, f64)
/// Readers throw std::runtime_error on malformed or inconsistent files.
void write_volume(const std::filesystem::path& path, const VoxelVolume& vol);
VoxelVolume read_volume(const std::filesystem::path& path);

struct DataFile {
  ScatterData data;
  TransformKind kind = TransformKind::spindle;
  std::string physics_hash;
};
void write_data(const std::filesystem::path& path, const DataFile& file);
DataFile read_data(const std::filesystem::path& path);

void write_matrix(const std::filesystem::path& path, const SparseOperator& op);
SparseOperator read_matrix(const std::filesystem::path& path);

enum class SliceAxis { x, y, z };
SliceAxis parse_slice_axis(const std::string& name);

/// n x n plane at `index` along `axis`; rows follow the remaining axes in
/// (x, y, z) order, first of them fastest.
std::vector<double> extract_slice(const VoxelVolume& vol, SliceAxis axis, std::size_t index);
/// 8-bit binary PGM (P5) windowed linearly from the slice minimum to maximum;
/// the window is recorded in a comment line.
void write_slice_pgm(const std::filesystem::path& path, const VoxelVolume& vol, SliceAxis axis, std::size_t index);
void write_slice_csv(const std::filesystem::path& path, const VoxelVolume& vol, SliceAxis axis, std::size_t index);

/// Numeric CSV rows of exactly `columns` fields. Blank lines, '#' comments and
/// a leading non-numeric header line are skipped.
std::vector<std::vector<double>> read_numeric_csv(std::istream& in, std::size_t columns, const std::string& source);
std::vector<std::vector<double>> read_numeric_csv(const std::filesystem::path& path, std::size_t columns);

/// 64-bit FNV-1a, as 16 lowercase hex digits.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace spindle

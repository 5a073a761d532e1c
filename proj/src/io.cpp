#include "spindle/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <stdexcept>

namespace spindle {

using nlohmann::json;

namespace {

template <class T>
void put_le(std::ostream& out, T v) {
  static_assert(sizeof(T) == 8);
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  out.write(reinterpret_cast<const char*>(&bits), 8);
}

template <class T>
T get_le(const char* p) {
  std::uint64_t bits;
  std::memcpy(&bits, p, 8);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  T v;
  std::memcpy(&v, &bits, 8);
  return v;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

// Header JSON and the payload bytes that follow it.
std::pair<json, std::string> read_framed(const std::filesystem::path& path, const std::string& magic) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": empty file");
  json h;
  try {
    h = json::parse(line);
  } catch (const json::exception&) {
    throw std::runtime_error(path.string() + ": header is not JSON");
  }
  if (!h.is_object() || h.value("magic", std::string{}) != magic)
    throw std::runtime_error(path.string() + ": not a " + magic + " file");
  std::string payload((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return {std::move(h), std::move(payload)};
}

template <class T>
T field(const json& h, const char* key, const std::filesystem::path& path) {
  if (!h.contains(key)) throw std::runtime_error(path.string() + ": header lacks \"" + key + "\"");
  try {
    return h[key].get<T>();
  } catch (const json::exception&) {
    throw std::runtime_error(path.string() + ": bad header field \"" + key + "\"");
  }
}

std::vector<double> read_f64(const std::string& payload, std::size_t count, const std::filesystem::path& path) {
  if (payload.size() != count * 8)
    throw std::runtime_error(path.string() + ": payload has " + std::to_string(payload.size()) + " bytes, expected " +
                             std::to_string(count * 8));
  std::vector<double> v(count);
  for (std::size_t i = 0; i < count; ++i) v[i] = get_le<double>(payload.data() + 8 * i);
  return v;
}

json grid_json(const ScanGrid& g) { return {{"r", g.r_values}, {"alpha", g.alpha_values}, {"beta", g.beta_values}}; }

ScanGrid grid_from(const json& h, const std::filesystem::path& path) {
  ScanGrid g;
  g.r_values = field<std::vector<double>>(h, "r", path);
  g.alpha_values = field<std::vector<double>>(h, "alpha", path);
  g.beta_values = field<std::vector<double>>(h, "beta", path);
  try {
    g.validate();
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
  return g;
}

TransformKind kind_from(const json& h, const std::filesystem::path& path) {
  try {
    return parse_transform_kind(field<std::string>(h, "transform", path));
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

bool parse_double(const std::string& s, double& out) {
  const std::string t = trim(s);
  if (t.empty()) return false;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), out);
  return res.ec == std::errc() && res.ptr == t.data() + t.size();
}

}  // namespace

void write_volume(const std::filesystem::path& path, const VoxelVolume& vol) {
  if (vol.values.size() != vol.shape.voxels()) throw std::invalid_argument("volume payload does not match its shape");
  json h{{"magic", "STVOL1"}, {"n", vol.shape.n}, {"extent", vol.shape.extent}, {"dtype", "f64"}, {"byte_order", "LE"}};
  if (!vol.labels.empty()) {
    json labels = json::object();
    for (const auto& [id, name] : vol.labels) labels[std::to_string(id)] = name;
    h["labels"] = labels;
  }
  auto out = open_out(path);
  out << h.dump() << '\n';
  for (double v : vol.values) put_le(out, v);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

VoxelVolume read_volume(const std::filesystem::path& path) {
  const auto [h, payload] = read_framed(path, "STVOL1");
  if (h.value("dtype", std::string{}) != "f64" || h.value("byte_order", std::string{}) != "LE")
    throw std::runtime_error(path.string() + ": only little-endian f64 volumes are supported");
  const auto n = field<std::size_t>(h, "n", path);
  const auto extent = field<double>(h, "extent", path);
  if (n == 0 || !(extent > 0.0)) throw std::runtime_error(path.string() + ": invalid volume size");
  VoxelVolume vol(VolumeShape{n, extent});
  vol.values = read_f64(payload, vol.shape.voxels(), path);
  if (h.contains("labels")) {
    for (const auto& [id, name] : h["labels"].items()) {
      int k = 0;
      const auto res = std::from_chars(id.data(), id.data() + id.size(), k);
      if (res.ec != std::errc() || !name.is_string()) throw std::runtime_error(path.string() + ": bad label entry");
      vol.labels[k] = name.get<std::string>();
    }
  }
  return vol;
}

void write_data(const std::filesystem::path& path, const DataFile& file) {
  const auto& d = file.data;
  if (d.values.size() != d.grid.size()) throw std::invalid_argument("data payload does not match its grid");
  json h = grid_json(d.grid);
  h["magic"] = "STDAT1";
  h["transform"] = to_string(file.kind);
  h["physics_hash"] = file.physics_hash;
  auto out = open_out(path);
  out << h.dump() << '\n';
  for (double v : d.values) put_le(out, v);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

DataFile read_data(const std::filesystem::path& path) {
  const auto [h, payload] = read_framed(path, "STDAT1");
  DataFile f;
  f.kind = kind_from(h, path);
  f.physics_hash = h.value("physics_hash", std::string{});
  f.data = ScatterData(grid_from(h, path));
  f.data.values = read_f64(payload, f.data.grid.size(), path);
  return f;
}

void write_matrix(const std::filesystem::path& path, const SparseOperator& op) {
  json h{{"magic", "STSM1"},
         {"rows", op.rows()},
         {"cols", op.cols()},
         {"nnz", op.nnz()},
         {"transform", to_string(op.kind)},
         {"grid", grid_json(op.grid)},
         {"volume", {{"n", op.shape.n}, {"extent", op.shape.extent}}}};
  auto out = open_out(path);
  out << h.dump() << '\n';
  for (std::size_t i = 0; i < op.rows(); ++i) {
    const auto cols = op.row_cols(i);
    const auto vals = op.row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      put_le<std::uint64_t>(out, i);
      put_le<std::uint64_t>(out, cols[k]);
      put_le(out, vals[k]);
    }
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

SparseOperator read_matrix(const std::filesystem::path& path) {
  const auto [h, payload] = read_framed(path, "STSM1");
  const auto rows = field<std::size_t>(h, "rows", path);
  const auto cols = field<std::size_t>(h, "cols", path);
  const auto nnz = field<std::size_t>(h, "nnz", path);
  const ScanGrid grid = grid_from(field<json>(h, "grid", path), path);
  const json vol = field<json>(h, "volume", path);
  const VolumeShape shape{field<std::size_t>(vol, "n", path), field<double>(vol, "extent", path)};
  if (grid.size() != rows || shape.voxels() != cols)
    throw std::runtime_error(path.string() + ": matrix dimensions disagree with its grids");
  if (payload.size() != nnz * 24)
    throw std::runtime_error(path.string() + ": payload has " + std::to_string(payload.size()) + " bytes, expected " +
                             std::to_string(nnz * 24));
  std::vector<Triplet> t(nnz);
  for (std::size_t k = 0; k < nnz; ++k) {
    const char* p = payload.data() + 24 * k;
    t[k] = {get_le<std::uint64_t>(p), get_le<std::uint64_t>(p + 8), get_le<double>(p + 16)};
    if (t[k].row >= rows || t[k].col >= cols) throw std::runtime_error(path.string() + ": entry out of range");
    if (k > 0 && std::tie(t[k - 1].row, t[k - 1].col) >= std::tie(t[k].row, t[k].col))
      throw std::runtime_error(path.string() + ": entries not sorted by (row, col)");
  }
  auto op = SparseOperator::from_triplets(rows, cols, std::move(t));
  op.kind = kind_from(h, path);
  op.grid = grid;
  op.shape = shape;
  return op;
}

SliceAxis parse_slice_axis(const std::string& name) {
  if (name == "x") return SliceAxis::x;
  if (name == "y") return SliceAxis::y;
  if (name == "z") return SliceAxis::z;
  throw std::invalid_argument("unknown slice axis '" + name + "'");
}

std::vector<double> extract_slice(const VoxelVolume& vol, SliceAxis axis, std::size_t index) {
  const std::size_t n = vol.n();
  if (index >= n) throw std::invalid_argument("slice index " + std::to_string(index) + " outside 0.." + std::to_string(n - 1));
  std::vector<double> s(n * n);
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t a = 0; a < n; ++a) {
      switch (axis) {
        case SliceAxis::x: s[b * n + a] = vol.at(index, a, b); break;
        case SliceAxis::y: s[b * n + a] = vol.at(a, index, b); break;
        case SliceAxis::z: s[b * n + a] = vol.at(a, b, index); break;
      }
    }
  return s;
}

void write_slice_pgm(const std::filesystem::path& path, const VoxelVolume& vol, SliceAxis axis, std::size_t index) {
  const auto s = extract_slice(vol, axis, index);
  const std::size_t n = vol.n();
  const auto [lo, hi] = std::minmax_element(s.begin(), s.end());
  const double a = *lo, b = *hi;
  auto out = open_out(path);
  std::ostringstream head;
  head.precision(17);
  head << "P5\n# window " << a << " " << b << " linear to 0..255; top row is the last index of the second in-plane axis\n"
       << n << " " << n << "\n255\n";
  out << head.str();
  for (std::size_t row = n; row-- > 0;)
    for (std::size_t col = 0; col < n; ++col) {
      const double v = s[row * n + col];
      const double t = b > a ? (v - a) / (b - a) : 0.0;
      out.put(static_cast<char>(static_cast<unsigned char>(std::lround(std::clamp(t, 0.0, 1.0) * 255.0))));
    }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

void write_slice_csv(const std::filesystem::path& path, const VoxelVolume& vol, SliceAxis axis, std::size_t index) {
  const auto s = extract_slice(vol, axis, index);
  const std::size_t n = vol.n();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.precision(17);
  for (std::size_t row = 0; row < n; ++row) {
    for (std::size_t col = 0; col < n; ++col) out << (col ? "," : "") << s[row * n + col];
    out << '\n';
  }
}

std::vector<std::vector<double>> read_numeric_csv(std::istream& in, std::size_t columns, const std::string& source) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  bool seen_content = false;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ss(t);
    for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
    std::vector<double> row(fields.size());
    bool numeric = true;
    for (std::size_t k = 0; k < fields.size(); ++k) numeric = numeric && parse_double(fields[k], row[k]);
    if (!numeric) {
      if (!seen_content) {
        seen_content = true;  // header
        continue;
      }
      throw std::runtime_error(source + ":" + std::to_string(lineno) + ": non-numeric field");
    }
    seen_content = true;
    if (row.size() != columns)
      throw std::runtime_error(source + ":" + std::to_string(lineno) + ": expected " + std::to_string(columns) +
                               " fields, found " + std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<std::vector<double>> read_numeric_csv(const std::filesystem::path& path, std::size_t columns) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_numeric_csv(in, columns, path.string());
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace spindle

#include "ecgid/partition_store.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include <zlib.h>

#include "ecgid/error.hpp"
#include "ecgid/gallery_io.hpp"

namespace fs = std::filesystem;

namespace ecgid {
namespace {

constexpr const char *kManifestName = "manifest.txt";
constexpr const char *kIncompleteMarker = "INCOMPLETE";

std::string hex32(std::uint32_t v) {
  char buf[9];
  std::snprintf(buf, sizeof buf, "%08x", v);
  return buf;
}

class ManifestReader {
 public:
  ManifestReader(std::string_view text, fs::path source) : source_(std::move(source)) {
    std::size_t pos = 0;
    while (pos < text.size()) {
      auto eol = text.find('\n', pos);
      if (eol == std::string_view::npos) eol = text.size();
      auto line = text.substr(pos, eol - pos);
      pos = eol + 1;
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (line.empty() || line.front() == '#') continue;
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) fail("line without '=': " + std::string(line));
      values_.emplace(std::string(line.substr(0, eq)), std::string(line.substr(eq + 1)));
    }
  }

  const std::string &text(const std::string &key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) fail("missing key '" + key + "'");
    return it->second;
  }

  template <typename T>
  T number(const std::string &key) const {
    const auto &s = text(key);
    T v{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) fail("bad value for '" + key + "'");
    return v;
  }

  std::uint32_t hex(const std::string &key) const {
    const auto &s = text(key);
    std::uint32_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, 16);
    if (ec != std::errc() || ptr != s.data() + s.size()) fail("bad checksum for '" + key + "'");
    return v;
  }

  [[noreturn]] void fail(const std::string &what) const {
    throw IntegrityError(source_.string() + ": " + what);
  }

 private:
  fs::path source_;
  std::unordered_map<std::string, std::string> values_;
};

}  // namespace

std::size_t PartitionIndex::total_rows() const {
  return std::accumulate(partition_sizes.begin(), partition_sizes.end(), std::size_t{0});
}

fs::path PartitionIndex::directory() const { return partition_directory(root_dir, k()); }

fs::path PartitionIndex::partition_path(int label) const {
  return root_dir / relative_paths.at(static_cast<std::size_t>(label));
}

fs::path partition_directory(const fs::path &root_dir, int k) {
  return root_dir / ("k=" + std::to_string(k));
}

std::uint32_t crc32_of(std::string_view bytes) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks.
  constexpr std::size_t kChunk = 1u << 30;
  while (!bytes.empty()) {
    const auto n = std::min(bytes.size(), kChunk);
    crc = ::crc32(crc, reinterpret_cast<const Bytef *>(bytes.data()), static_cast<uInt>(n));
    bytes.remove_prefix(n);
  }
  return static_cast<std::uint32_t>(crc);
}

void write_manifest(std::ostream &out, const PartitionIndex &index) {
  const auto &m = index.model;
  out << "# partition manifest\n";
  out << "format=1\n";
  out << "k=" << m.k << '\n';
  out << "seed=" << m.seed << '\n';
  out << "tol=" << format_real(m.tol) << '\n';
  out << "iterations=" << m.iterations << '\n';
  out << "ssq=" << format_real(m.ssq) << '\n';
  out << "dim=" << kFeatureDim << '\n';
  for (int c = 0; c < m.k; ++c) {
    out << "centroid." << c << '=';
    for (int j = 0; j < kFeatureDim; ++j) {
      if (j) out << ',';
      out << format_real(m.centroids(c, j));
    }
    out << '\n';
  }
  for (int c = 0; c < m.k; ++c) {
    out << "partition." << c << ".path=" << index.relative_paths[c].generic_string() << '\n';
    out << "partition." << c << ".rows=" << index.partition_sizes[c] << '\n';
    out << "partition." << c << ".crc32=" << hex32(index.checksums[c]) << '\n';
  }
}

PartitionIndex partition(std::span<const SubjectRecord> gallery, const ClusterModel &model,
                         const fs::path &root_dir) {
  if (model.k <= 0 || model.centroids.rows() != model.k) {
    throw InvalidArgument("partition: model has no centroids");
  }
  const auto dir = partition_directory(root_dir, model.k);
  const auto marker = dir / kIncompleteMarker;
  try {
    fs::create_directories(dir);
    write_file(marker, "partition write in progress\n");
    fs::remove(dir / kManifestName);
  } catch (const fs::filesystem_error &e) {
    throw IoError("partition: cannot prepare '" + dir.string() + "': " + e.what());
  }

  const auto labels = assign_all(gallery, model);
  std::vector<std::size_t> order(gallery.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (labels[a] != labels[b]) return labels[a] < labels[b];
    return gallery[a].subject_id < gallery[b].subject_id;
  });

  PartitionIndex index;
  index.root_dir = root_dir;
  index.model = model;
  index.partition_sizes.assign(static_cast<std::size_t>(model.k), 0);
  index.checksums.assign(static_cast<std::size_t>(model.k), 0);

  auto it = order.begin();
  Gallery members;
  for (int c = 0; c < model.k; ++c) {
    members.clear();
    while (it != order.end() && labels[*it] == c) members.push_back(gallery[*it++]);
    const auto bytes = gallery_csv_string(members);
    const fs::path relative =
        fs::path("k=" + std::to_string(model.k)) / ("cluster_" + std::to_string(c) + ".csv");
    write_file(root_dir / relative, bytes);
    index.relative_paths.push_back(relative);
    index.partition_sizes[c] = members.size();
    index.checksums[c] = crc32_of(bytes);
  }

  std::ostringstream manifest;
  write_manifest(manifest, index);
  write_file(dir / kManifestName, manifest.str());
  std::error_code ec;
  fs::remove(marker, ec);
  if (ec) throw IoError("partition: cannot remove marker '" + marker.string() + "'");
  return index;
}

PartitionIndex open_partition_index(const fs::path &root_dir, int k) {
  const auto dir = partition_directory(root_dir, k);
  if (fs::exists(dir / kIncompleteMarker)) {
    throw IntegrityError("'" + dir.string() + "' is incomplete (an earlier write failed)");
  }
  const auto manifest_path = dir / kManifestName;
  if (!fs::exists(manifest_path)) {
    throw IntegrityError("no manifest at '" + manifest_path.string() + "'");
  }
  const ManifestReader reader(read_file(manifest_path), manifest_path);
  if (reader.number<int>("format") != 1) reader.fail("unsupported manifest format");
  if (reader.number<int>("dim") != kFeatureDim) reader.fail("dimension mismatch");
  if (reader.number<int>("k") != k) reader.fail("manifest k differs from directory");

  PartitionIndex index;
  index.root_dir = root_dir;
  auto &m = index.model;
  m.k = k;
  m.seed = reader.number<std::uint64_t>("seed");
  m.tol = reader.number<double>("tol");
  m.iterations = reader.number<int>("iterations");
  m.ssq = reader.number<double>("ssq");
  m.centroids.resize(k, kFeatureDim);
  for (int c = 0; c < k; ++c) {
    const auto key = "centroid." + std::to_string(c);
    const auto &row = reader.text(key);
    std::size_t start = 0;
    for (int j = 0; j < kFeatureDim; ++j) {
      const auto comma = row.find(',', start);
      const auto end = comma == std::string::npos ? row.size() : comma;
      if ((j + 1 < kFeatureDim) == (comma == std::string::npos)) {
        reader.fail("centroid " + std::to_string(c) + " has wrong arity");
      }
      double v = 0;
      const auto [ptr, ec] = std::from_chars(row.data() + start, row.data() + end, v);
      if (ec != std::errc() || ptr != row.data() + end) reader.fail("bad centroid value in " + key);
      m.centroids(c, j) = v;
      start = end + 1;
    }
    const auto prefix = "partition." + std::to_string(c);
    index.relative_paths.emplace_back(reader.text(prefix + ".path"));
    index.partition_sizes.push_back(reader.number<std::size_t>(prefix + ".rows"));
    index.checksums.push_back(reader.hex(prefix + ".crc32"));
    if (!fs::exists(index.partition_path(c))) {
      reader.fail("partition file missing: " + index.partition_path(c).string());
    }
  }
  return index;
}

Gallery load_partition(const PartitionIndex &index, int label) {
  if (label < 0 || label >= index.k()) {
    throw InvalidArgument("load_partition: label " + std::to_string(label) +
                          " out of range [0, " + std::to_string(index.k()) + ")");
  }
  const auto path = index.partition_path(label);
  const auto bytes = read_file(path);
  if (crc32_of(bytes) != index.checksums[label]) {
    throw IntegrityError("checksum mismatch for '" + path.string() + "'");
  }
  auto records = parse_subject_csv(bytes);
  if (records.size() != index.partition_sizes[label]) {
    throw IntegrityError("row count mismatch for '" + path.string() + "'");
  }
  return records;
}

void verify_partitions(const PartitionIndex &index) {
  for (int c = 0; c < index.k(); ++c) load_partition(index, c);
}

Gallery load_serial(const fs::path &gallery_path) { return load_subject_csv(gallery_path); }

}  // namespace ecgid

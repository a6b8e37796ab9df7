#ifndef ECGID_PARTITION_STORE_HPP
#define ECGID_PARTITION_STORE_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ecgid/clustering.hpp"
#include "ecgid/types.hpp"

namespace ecgid {

/// On-disk layout for one K:
///
///   <root>/k=<K>/cluster_<label>.csv   gallery-schema CSV per cluster
///   <root>/k=<K>/manifest.txt          model + per-partition rows and crc32
///   <root>/k=<K>/INCOMPLETE            present only while (or if) a write failed
///
/// Partition paths in the manifest are relative to <root>.
struct PartitionIndex {
  std::filesystem::path root_dir;
  ClusterModel model;
  std::vector<std::size_t> partition_sizes;
  std::vector<std::uint32_t> checksums;
  std::vector<std::filesystem::path> relative_paths;

  int k() const { return model.k; }
  std::size_t total_rows() const;
  std::filesystem::path directory() const;
  std::filesystem::path partition_path(int label) const;
};

std::filesystem::path partition_directory(const std::filesystem::path &root_dir, int k);

/// Assigns every record to its nearest centroid, sorts by (label, subject_id)
/// and writes one file per label plus the manifest. Clusters with no members
/// get a header-only file. Throws IoError when the directory is not writable;
/// a failure part-way leaves the INCOMPLETE marker behind.
PartitionIndex partition(std::span<const SubjectRecord> gallery, const ClusterModel &model,
                         const std::filesystem::path &root_dir);

/// Reads `<root>/k=<K>/manifest.txt`. Throws IntegrityError when the
/// INCOMPLETE marker exists or a listed file is missing.
PartitionIndex open_partition_index(const std::filesystem::path &root_dir, int k);

/// Records of one partition in file order, after checking the crc32 and row
/// count. Throws InvalidArgument for a bad label, IntegrityError on mismatch.
Gallery load_partition(const PartitionIndex &index, int label);

/// Checks every partition's checksum and row count; throws IntegrityError.
void verify_partitions(const PartitionIndex &index);

/// Full gallery in file order (the serial-scan source).
Gallery load_serial(const std::filesystem::path &gallery_path);

std::uint32_t crc32_of(std::string_view bytes);

void write_manifest(std::ostream &out, const PartitionIndex &index);

}  // namespace ecgid

#endif  // ECGID_PARTITION_STORE_HPP

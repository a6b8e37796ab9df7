#ifndef ECGID_GALLERY_IO_HPP
#define ECGID_GALLERY_IO_HPP

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ecgid/types.hpp"

namespace ecgid {

/// Exact header line of every gallery/partition CSV.
inline constexpr std::string_view kGalleryHeader =
    "id,rr,pr,qrs,qt,qtc,p_axis,qrs_axis,t_axis,acci";

/// Formats with 17 significant digits so that parsing returns the same double.
std::string format_real(double value);

/// Parses gallery CSV text. Empty cells become absent slots. Errors are
/// ParseError with the 1-based line number.
std::vector<RawRecord> parse_gallery_csv(std::string_view text);

/// Like parse_gallery_csv, but every cell must be present.
Gallery parse_subject_csv(std::string_view text);

std::vector<RawRecord> load_gallery_csv(const std::filesystem::path &path);
Gallery load_subject_csv(const std::filesystem::path &path);

void write_gallery_csv(std::ostream &out, std::span<const RawRecord> records);
void write_gallery_csv(std::ostream &out, std::span<const SubjectRecord> records);

std::string gallery_csv_string(std::span<const SubjectRecord> records);

void save_gallery_csv(const std::filesystem::path &path, std::span<const RawRecord> records);
void save_gallery_csv(const std::filesystem::path &path, std::span<const SubjectRecord> records);

/// Whole-file read; throws IoError.
std::string read_file(const std::filesystem::path &path);
void write_file(const std::filesystem::path &path, std::string_view contents);

}  // namespace ecgid

#endif  // ECGID_GALLERY_IO_HPP

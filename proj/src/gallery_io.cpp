#include "ecgid/gallery_io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "ecgid/error.hpp"

namespace ecgid {
namespace {

constexpr std::size_t kColumns = kFeatureDim + 1;

std::string_view trim_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

// Splits on ',' into exactly kColumns fields; returns the field count seen.
std::size_t split_fields(std::string_view line,
                         std::array<std::string_view, kColumns> &fields) {
  std::size_t count = 0;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    const auto field = line.substr(start, comma == std::string_view::npos
                                              ? std::string_view::npos
                                              : comma - start);
    if (count < kColumns) fields[count] = field;
    ++count;
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return count;
}

std::optional<double> parse_cell(std::string_view cell, std::size_t row,
                                 std::string_view column) {
  if (cell.empty()) return std::nullopt;
  double value = 0.0;
  const char *first = cell.data();
  const char *last = cell.data() + cell.size();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
    throw ParseError(ParseError::Kind::bad_number, row,
                     "column '" + std::string(column) + "': not a finite number: '" +
                         std::string(cell) + "'");
  }
  return value;
}

template <typename OnRecord>
void for_each_row(std::string_view text, OnRecord &&on_record) {
  std::size_t row = 0;
  bool saw_header = false;
  std::array<std::string_view, kColumns> fields;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    const auto line = trim_cr(text.substr(pos, eol - pos));
    pos = eol + 1;
    ++row;
    if (!saw_header) {
      if (line != kGalleryHeader) {
        throw ParseError(ParseError::Kind::bad_header, row,
                         "expected header '" + std::string(kGalleryHeader) + "'");
      }
      saw_header = true;
      continue;
    }
    if (line.empty()) continue;
    if (line == kGalleryHeader) {
      throw ParseError(ParseError::Kind::duplicate_header, row, "duplicate header line");
    }
    const auto count = split_fields(line, fields);
    if (count != kColumns) {
      throw ParseError(ParseError::Kind::column_count, row,
                       "expected " + std::to_string(kColumns) + " columns, found " +
                           std::to_string(count));
    }
    if (fields[0].empty()) {
      throw ParseError(ParseError::Kind::bad_field, row, "empty subject id");
    }
    RawRecord record;
    record.subject_id = std::string(fields[0]);
    for (int j = 0; j < kFeatureDim; ++j) {
      record.features[j] = parse_cell(fields[j + 1], row, kFeatureNames[j]);
    }
    on_record(std::move(record), row);
  }
  if (!saw_header) {
    throw ParseError(ParseError::Kind::bad_header, 0, "empty file: missing header");
  }
}

template <typename Record, typename CellFn>
void write_rows(std::ostream &out, std::span<const Record> records, CellFn &&cell) {
  out << kGalleryHeader << '\n';
  std::string line;
  for (const auto &r : records) {
    line = r.subject_id;
    for (int j = 0; j < kFeatureDim; ++j) {
      line += ',';
      line += cell(r, j);
    }
    line += '\n';
    out << line;
  }
}

std::string raw_cell(const RawRecord &r, int j) {
  return r.features[j] ? format_real(*r.features[j]) : std::string();
}

std::string subject_cell(const SubjectRecord &r, int j) {
  return format_real(r.vector[j]);
}

template <typename Record>
void save_rows(const std::filesystem::path &path, std::span<const Record> records) {
  std::ostringstream out;
  write_gallery_csv(out, records);
  write_file(path, out.str());
}

}  // namespace

std::string format_real(double value) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value,
                                       std::chars_format::general, 17);
  return std::string(buf.data(), ptr);
}

std::vector<RawRecord> parse_gallery_csv(std::string_view text) {
  std::vector<RawRecord> records;
  for_each_row(text, [&](RawRecord &&r, std::size_t) { records.push_back(std::move(r)); });
  return records;
}

Gallery parse_subject_csv(std::string_view text) {
  Gallery gallery;
  for_each_row(text, [&](RawRecord &&r, std::size_t row) {
    SubjectRecord s;
    s.subject_id = std::move(r.subject_id);
    for (int j = 0; j < kFeatureDim; ++j) {
      if (!r.features[j]) {
        throw ParseError(ParseError::Kind::missing_value, row,
                         "column '" + std::string(kFeatureNames[j]) +
                             "': empty cell in a preprocessed gallery");
      }
      s.vector[j] = *r.features[j];
    }
    gallery.push_back(std::move(s));
  });
  return gallery;
}

std::vector<RawRecord> load_gallery_csv(const std::filesystem::path &path) {
  try {
    return parse_gallery_csv(read_file(path));
  } catch (const ParseError &e) {
    throw ParseError(e.kind(), e.row(), path.string() + ": " + e.what());
  }
}

Gallery load_subject_csv(const std::filesystem::path &path) {
  try {
    return parse_subject_csv(read_file(path));
  } catch (const ParseError &e) {
    throw ParseError(e.kind(), e.row(), path.string() + ": " + e.what());
  }
}

void write_gallery_csv(std::ostream &out, std::span<const RawRecord> records) {
  write_rows(out, records, raw_cell);
}

void write_gallery_csv(std::ostream &out, std::span<const SubjectRecord> records) {
  write_rows(out, records, subject_cell);
}

std::string gallery_csv_string(std::span<const SubjectRecord> records) {
  std::ostringstream out;
  write_gallery_csv(out, records);
  return out.str();
}

void save_gallery_csv(const std::filesystem::path &path, std::span<const RawRecord> records) {
  save_rows(path, records);
}

void save_gallery_csv(const std::filesystem::path &path,
                      std::span<const SubjectRecord> records) {
  save_rows(path, records);
}

std::string read_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("read failed: '" + path.string() + "'");
  return std::move(buf).str();
}

void write_file(const std::filesystem::path &path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  out.flush();
  if (!out) throw IoError("write failed: '" + path.string() + "'");
}

}  // namespace ecgid

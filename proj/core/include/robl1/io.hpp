#pragma once

#include "robl1/datamodel.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace robl1::io {

/// Writes `y,x1,...,xn` followed by one row per sample. Lines beginning with '#' are
/// comments; `comment` (if non-empty) is emitted first as "# <comment>".
void write_dataset_csv(std::ostream& out, const Dataset& data, const std::string& comment = {});
Dataset read_dataset_csv(std::istream& in);

void write_dataset(const std::filesystem::path& path, const Dataset& data,
                   const std::string& comment = {});
/// Reads the CSV and, when present next to it, the truth sidecars theta0.csv and f.csv.
Dataset read_dataset(const std::filesystem::path& path);

/// One value per line.
void write_vector(const std::filesystem::path& path, const Vector& v);
Vector read_vector(const std::filesystem::path& path);

/// Writes theta0.csv and f.csv beside `data_path`.
void write_truth_sidecars(const std::filesystem::path& data_path, const Truth& truth);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace robl1::io

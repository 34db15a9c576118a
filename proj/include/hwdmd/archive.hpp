#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "hwdmd/matrix_io.hpp"
#include "hwdmd/snapshot_store.hpp"
#include "hwdmd/trip_csv.hpp"

namespace hwdmd {

/// A built series with its station dictionary and ingestion drop counts.
///
/// On disk this is a directory holding a `meta` file of key=value lines and
/// `od.bin` / `boarding.bin` (or `.csv` in text mode).
struct SnapshotArchive {
  SnapshotSeries series;
  StationDictionary stations;
  DropCounts dropped;
};

void save_archive(const std::filesystem::path& dir, const SnapshotArchive& archive,
                  matrix_io::Format format);
SnapshotArchive load_archive(const std::filesystem::path& dir);

/// Flat key=value file. Blank lines and lines starting with '#' are skipped.
std::map<std::string, std::string> read_key_values(const std::filesystem::path& path);
std::string format_key_values(const std::map<std::string, std::string>& values);

}  // namespace hwdmd

#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hwdmd/estimator.hpp"

namespace hwdmd {

/// A model plus what the CLI needs to apply and update it.
///
/// File layout: 8-byte magic "HWDMDMDL", uint32 version, uint32 header length,
/// a JSON header (hyperparameters, dimensions, calendar grid, station codes and
/// hash, last absorbed day, update count), then U_X, U_Y, P, Q_X, Q_Y and the
/// ring buffer of the last q_h OD and boarding snapshots, each in the binary
/// matrix format.
struct ModelFile {
  HwDmdModel model;
  std::vector<std::string> station_codes;
  std::uint64_t station_hash = 0;
  int interval_minutes = 30;
  int day_start_minute = 6 * 60;
  /// Last service day the model has absorbed.
  std::optional<std::chrono::sys_days> last_day;
  std::int64_t update_count = 0;
  Matrix recent_od;        // n x q_h, oldest first
  Matrix recent_boarding;  // s x q_h
};

inline constexpr char kModelMagic[8] = {'H', 'W', 'D', 'M', 'D', 'M', 'D', 'L'};
inline constexpr std::uint32_t kModelVersion = 1;

void write_model(std::ostream& out, const ModelFile& file);
ModelFile read_model(std::istream& in);

/// Atomic (temp file + rename).
void save_model(const std::filesystem::path& path, const ModelFile& file);
ModelFile load_model(const std::filesystem::path& path);

}  // namespace hwdmd

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "weakpath/flow.hpp"
#include "weakpath/weakmeas.hpp"

namespace weakpath {

// Shortest decimal string that reads back to the same double.
std::string format_double(double v);
// Strict parse of a whole string; throws ConfigError mentioning `what`.
double parse_double(std::string_view text, std::string_view what);
std::size_t parse_size(std::string_view text, std::string_view what);

// Ordered "key = value" lines.
using KeyValues = std::vector<std::pair<std::string, std::string>>;

std::string render_key_values(const KeyValues& kv);
// Throws ConfigError naming `source` on malformed lines or duplicate keys.
KeyValues parse_key_values(std::string_view text, std::string_view source);
const std::string* find_value(const KeyValues& kv, std::string_view key);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);

// x_m,re,im
std::string render_plane_field_csv(const PlaneField& field);
KeyValues plane_field_metadata(const PlaneField& field, const OpticalConfig& config);

// traj_id,z_m,x_m,weight
std::string render_trajectories_csv(std::span<const Trajectory> trajectories);
std::vector<Trajectory> parse_trajectories_csv(std::string_view text, std::string_view source);

// x_m,I_L,I_R,kx_extracted,valid,clamped
std::string render_record_csv(const WeakMeasurementRecord& record);
KeyValues record_metadata(const WeakMeasurementRecord& record);
// Rebuilds a record from its CSV and sidecar. Throws ConfigError naming
// `source` when either is malformed or they disagree.
WeakMeasurementRecord parse_record(std::string_view csv, const KeyValues& meta,
                                   std::string_view source);

}  // namespace weakpath

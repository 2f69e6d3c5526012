#pragma once

#include "nmepi/agent_sim.h"
#include "nmepi/fclt.h"
#include "nmepi/fluid.h"
#include "nmepi/kernels.h"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace nmepi {

inline constexpr const char* kVersion = "0.1.0";

/// Shortest decimal text that parses back to the same double.
std::string format_double(double x);
/// Grid time rounded to 12 significant digits, then formatted like format_double.
std::string format_time(double t);

/// RFC 4180 field quoting.
std::string csv_field(const std::string& s);

void write_path_csv(std::ostream& os, const CompartmentPath& path);
void write_events_csv(std::ostream& os, const EventLog& log);
void write_fluid_csv(std::ostream& os, const FluidSolution& fluid);
void write_kernel_csv(std::ostream& os, const KernelTable& table);
/// One row per (path, t); driver columns appended when with_drivers is set.
void write_fclt_csv(std::ostream& os, const std::vector<FcltPath>& paths, bool with_drivers);
/// Square matrix with a header row of labels.
void write_matrix_csv(std::ostream& os, const Eigen::MatrixXd& m, const std::vector<std::string>& labels);

nlohmann::json path_metadata(const CompartmentPath& path, const nlohmann::json& spec, double wall_seconds);
nlohmann::json fluid_metadata(const FluidSolution& fluid, const std::vector<std::string>& warnings);

/// Writes text with LF line endings, creating parent directories.
void write_text_file(const std::filesystem::path& file, const std::string& text);
void write_json_file(const std::filesystem::path& file, const nlohmann::json& j);

/// 64-bit FNV-1a, printed as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

} // namespace nmepi

#pragma once

#include "archspace/model.hpp"

#include <filesystem>
#include <memory>
#include <string>

namespace archspace {

inline constexpr int kModelSchemaVersion = 1;

/**
 * Model files are JSON documents:
 *
 *   format          "archspace-model"
 *   schema_version  kModelSchemaVersion
 *   method          aanet | pcha | kernel-pcha | pcha-ae
 *   feature_names   column names of the training data (may be empty)
 *   config          training configuration
 *   normalization   per-feature shift/scale, or null
 *   payload         weights or factors
 *   checksum        FNV-1a 64 of the serialised document without this field
 *
 * Matrices are {"rows", "cols", "values"} with the values as row-major
 * decimal text at 17 significant digits, so loading reproduces every
 * number exactly.
 */
std::string serialize_model(const ArchetypalModel& model);
void save_model(const ArchetypalModel& model, const std::filesystem::path& path);

/// Throws DataError on malformed documents, checksum mismatches and
/// unknown schema versions or methods.
std::unique_ptr<ArchetypalModel> parse_model(const std::string& text);
std::unique_ptr<ArchetypalModel> load_model(const std::filesystem::path& path);

/// Matrix <-> decimal text helpers used by the format.
std::string format_values(const double* data, std::size_t count);
std::vector<double> parse_values(const std::string& text, std::size_t expected);

}  // namespace archspace

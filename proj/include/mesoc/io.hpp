#pragma once

#include "mesoc/lcp.hpp"
#include "mesoc/portfolio.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

namespace mesoc::io {

/// Malformed or inconsistent input files.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// {"p", "q", "A", "B", "C", "D", "y", "v"}, matrices row-major.
LcpInstance parse_instance(const nlohmann::json& j);
nlohmann::json instance_to_json(const LcpInstance& inst);
LcpInstance load_instance(const std::filesystem::path& path);

/// Either {"x": [...], "u": [...]} or a solve report carrying "solution".
ConePoint parse_candidate(const nlohmann::json& j);
ConePoint load_candidate(const std::filesystem::path& path);

nlohmann::json vec_to_json(const Vec& v);
nlohmann::json point_to_json(const ConePoint& z);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

/// FNV-1a 64-bit digest, hex encoded.
std::string digest(const std::string& content);

/// Header row of labels, then one row of decimal returns per period.
/// `mean` overrides the computed column means.
portfolio::ReturnsPanel parse_returns_csv(const std::string& text, const std::optional<Vec>& mean = {});
portfolio::ReturnsPanel load_returns_csv(const std::filesystem::path& path,
                                         const std::optional<Vec>& mean = {});

}  // namespace mesoc::io

#pragma once

#include <Eigen/Core>

#include <filesystem>
#include <string>

#include "json.hpp"

namespace temu {

using Json = nlohmann::ordered_json;

Json read_json_file(const std::filesystem::path& path);
// Pretty-printed with a trailing newline; parent directories are created.
void write_json_file(const std::filesystem::path& path, const Json& doc);
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

// Row-major flat array.
Json matrix_to_flat_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_flat_json(const Json& flat, Eigen::Index rows, Eigen::Index cols);

// {"rows": r, "cols": c, "data": [...]}
Json tensor_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd tensor_from_json(const Json& j);

}  // namespace temu

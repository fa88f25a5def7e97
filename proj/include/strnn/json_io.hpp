#pragma once

#include "strnn/common.hpp"

#include <json.hpp>

#include <string>

namespace strnn {

nlohmann::json json_rows(const Matrix& m);
nlohmann::json json_vec(const Vector& v);
Matrix matrix_from_json(const nlohmann::json& j);
Vector vector_from_json(const nlohmann::json& j);

// Wraps parse failures in FormatError (with the file name) and missing or
// unreadable files in IoError.
nlohmann::json load_json_file(const std::string& file);
void save_json_file(const nlohmann::json& j, const std::string& file);

}  // namespace strnn

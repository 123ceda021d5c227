#include "temudance/common/json_io.hpp"

#include <fstream>
#include <sstream>

#include "temudance/common/error.hpp"

namespace temu {

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json read_json_file(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchema, "'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  out << text;
}

void write_json_file(const std::filesystem::path& path, const Json& doc) {
  write_text_file(path, doc.dump(2) + "\n");
}

Json matrix_to_flat_json(const Eigen::MatrixXd& m) {
  Json arr = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) arr.push_back(m(r, c));
  return arr;
}

Eigen::MatrixXd matrix_from_flat_json(const Json& flat, Eigen::Index rows, Eigen::Index cols) {
  if (!flat.is_array() || flat.size() != static_cast<std::size_t>(rows * cols)) {
    throw Error(ErrorCode::kSchema, "flat array has " + std::to_string(flat.is_array() ? flat.size() : 0) +
                                        " entries, expected " + std::to_string(rows * cols));
  }
  Eigen::MatrixXd m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = flat[k++].get<double>();
  return m;
}

Json tensor_to_json(const Eigen::MatrixXd& m) {
  Json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  j["data"] = matrix_to_flat_json(m);
  return j;
}

Eigen::MatrixXd tensor_from_json(const Json& j) {
  try {
    return matrix_from_flat_json(j.at("data"), j.at("rows").get<Eigen::Index>(), j.at("cols").get<Eigen::Index>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchema, std::string("malformed tensor: ") + e.what());
  }
}

}  // namespace temu

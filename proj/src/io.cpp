#include "mesoc/io.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace mesoc::io {

using nlohmann::json;

namespace {

double finite_number(const json& v, const std::string& where) {
  if (!v.is_number()) throw InputError(where + ": expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw InputError(where + ": non-finite value");
  return d;
}

Vec parse_vector(const json& j, const std::string& name, Eigen::Index expected) {
  if (!j.is_array()) throw InputError("field '" + name + "' must be an array");
  if (static_cast<Eigen::Index>(j.size()) != expected) {
    throw InputError("field '" + name + "' has length " + std::to_string(j.size()) + ", expected " +
                     std::to_string(expected));
  }
  Vec v(expected);
  for (Eigen::Index i = 0; i < expected; ++i) v[i] = finite_number(j[i], name + "[" + std::to_string(i) + "]");
  return v;
}

Mat parse_matrix(const json& j, const std::string& name, Eigen::Index rows, Eigen::Index cols) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) {
    throw InputError("field '" + name + "' must be an array of " + std::to_string(rows) + " rows");
  }
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    m.row(i) = parse_vector(j[i], name + "[" + std::to_string(i) + "]", cols).transpose();
  }
  return m;
}

json matrix_to_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(vec_to_json(m.row(i).transpose()));
  return rows;
}

const json& field(const json& j, const char* name) {
  if (!j.contains(name)) throw InputError(std::string("missing field '") + name + "'");
  return j.at(name);
}

}  // namespace

LcpInstance parse_instance(const json& j) {
  if (!j.is_object()) throw InputError("instance must be a JSON object");
  const auto& jp = field(j, "p");
  const auto& jq = field(j, "q");
  if (!jp.is_number_integer() || !jq.is_number_integer()) throw InputError("p and q must be integers");
  const int p = jp.get<int>();
  const int q = jq.get<int>();
  ConeDims dims;
  try {
    dims = ConeDims(p, q);
  } catch (const DimensionError& e) {
    throw InputError(e.what());
  }
  BlockMatrix T{parse_matrix(field(j, "A"), "A", p, p), parse_matrix(field(j, "B"), "B", p, q),
                parse_matrix(field(j, "C"), "C", q, p), parse_matrix(field(j, "D"), "D", q, q)};
  ConePoint r{parse_vector(field(j, "y"), "y", p), parse_vector(field(j, "v"), "v", q)};
  return LcpInstance(dims, std::move(T), std::move(r));
}

json instance_to_json(const LcpInstance& inst) {
  json j;
  j["p"] = inst.dims().p;
  j["q"] = inst.dims().q;
  j["A"] = matrix_to_json(inst.T().A);
  j["B"] = matrix_to_json(inst.T().B);
  j["C"] = matrix_to_json(inst.T().C);
  j["D"] = matrix_to_json(inst.T().D);
  j["y"] = vec_to_json(inst.y());
  j["v"] = vec_to_json(inst.v());
  return j;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << content;
}

namespace {

json parse_json_file(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

}  // namespace

LcpInstance load_instance(const std::filesystem::path& path) { return parse_instance(parse_json_file(path)); }

ConePoint parse_candidate(const json& j) {
  if (!j.is_object()) throw InputError("candidate must be a JSON object");
  const json& body = j.contains("solution") ? j.at("solution") : j;
  if (!body.is_object()) throw InputError("candidate has no solution");
  const auto& jx = field(body, "x");
  const auto& ju = field(body, "u");
  if (!jx.is_array() || !ju.is_array()) throw InputError("candidate x and u must be arrays");
  return {parse_vector(jx, "x", static_cast<Eigen::Index>(jx.size())),
          parse_vector(ju, "u", static_cast<Eigen::Index>(ju.size()))};
}

ConePoint load_candidate(const std::filesystem::path& path) { return parse_candidate(parse_json_file(path)); }

json vec_to_json(const Vec& v) {
  json a = json::array();
  for (double x : v) a.push_back(x);
  return a;
}

json point_to_json(const ConePoint& z) { return json{{"x", vec_to_json(z.x)}, {"u", vec_to_json(z.u)}}; }

std::string digest(const std::string& content) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : content) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    cells.push_back(b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_decimal(const std::string& s, int row, std::size_t col) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size() || !std::isfinite(v)) {
    throw InputError("returns CSV row " + std::to_string(row) + ", column " + std::to_string(col + 1) +
                     ": not a finite decimal '" + s + "'");
  }
  return v;
}

}  // namespace

portfolio::ReturnsPanel parse_returns_csv(const std::string& text, const std::optional<Vec>& mean) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> labels;
  std::vector<std::vector<double>> rows;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto cells = split_csv_line(line);
    if (labels.empty()) {
      labels = std::move(cells);
      continue;
    }
    if (cells.size() != labels.size()) {
      throw InputError("returns CSV row " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                       " cells, header has " + std::to_string(labels.size()));
    }
    std::vector<double> row;
    for (std::size_t c = 0; c < cells.size(); ++c) row.push_back(parse_decimal(cells[c], line_no, c));
    rows.push_back(std::move(row));
  }
  if (labels.empty() || rows.empty()) throw InputError("returns CSV has no data rows");

  Mat R(rows.size(), labels.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < labels.size(); ++j) R(i, j) = rows[i][j];
  }
  if (mean) {
    if (mean->size() != R.cols()) throw InputError("supplied mean has the wrong number of assets");
    return portfolio::ReturnsPanel::with_mean(std::move(R), *mean, std::move(labels));
  }
  return portfolio::ReturnsPanel::from_returns(std::move(R), std::move(labels));
}

portfolio::ReturnsPanel load_returns_csv(const std::filesystem::path& path, const std::optional<Vec>& mean) {
  return parse_returns_csv(read_file(path), mean);
}

}  // namespace mesoc::io

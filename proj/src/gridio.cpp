#include "mvspec/gridio.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace mvspec {

namespace fs = std::filesystem;

void MultiLattice::validate() const {
  if (values.empty()) throw InputError("lattice has no elements");
  if (labels.size() != values.size()) throw InputError("lattice label count does not match element count");
  if (!(delta > 0.0) || !std::isfinite(delta)) throw InputError("lattice spacing delta must be positive");
  const auto n1 = values.front().rows();
  const auto n2 = values.front().cols();
  if (n1 < 2 || n2 < 2) throw InputError("lattice must be at least 2x2");
  for (std::size_t m = 0; m < values.size(); ++m) {
    if (values[m].rows() != n1 || values[m].cols() != n2) {
      throw InputError("element '" + labels[m] + "' has shape " + std::to_string(values[m].rows()) + "x" +
                       std::to_string(values[m].cols()) + ", expected " + std::to_string(n1) + "x" +
                       std::to_string(n2));
    }
    if (!values[m].allFinite()) throw InputError("element '" + labels[m] + "' contains non-finite values");
  }
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

Eigen::MatrixXd read_csv_matrix(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open matrix file " + path.string());

  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::vector<double> row;
    std::string_view rest(line);
    std::size_t col = 0;
    while (true) {
      ++col;
      const auto comma = rest.find(',');
      const auto cell = trim(rest.substr(0, comma));
      double v = 0.0;
      const auto* end = cell.data() + cell.size();
      auto [ptr, ec] = std::from_chars(cell.data(), end, v);
      if (cell.empty() || ec != std::errc() || ptr != end) {
        throw InputError(path.string() + ": non-numeric cell at row " + std::to_string(lineno) + ", column " +
                         std::to_string(col) + " ('" + std::string(cell) + "')");
      }
      row.push_back(v);
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw InputError(path.string() + ": ragged row " + std::to_string(lineno) + " has " +
                       std::to_string(row.size()) + " columns, expected " + std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InputError(path.string() + ": empty matrix file");

  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
  return m;
}

void write_csv_matrix(const Eigen::MatrixXd& m, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
  if (!out) throw InputError("write failed for " + path.string());
}

MultiLattice load_multilattice(const fs::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw InputError("cannot open manifest " + manifest_path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(manifest_path.string() + ": invalid JSON: " + e.what());
  }

  MultiLattice lat;
  try {
    lat.delta = doc.value("delta", 1.0);
    const auto& elements = doc.at("elements");
    if (!elements.is_array() || elements.empty())
      throw InputError(manifest_path.string() + ": 'elements' must be a non-empty array");
    const auto base = manifest_path.parent_path();
    for (const auto& e : elements) {
      lat.labels.push_back(e.at("label").get<std::string>());
      lat.values.push_back(read_csv_matrix(base / e.at("file").get<std::string>()));
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(manifest_path.string() + ": malformed manifest: " + e.what());
  }
  lat.validate();
  return lat;
}

void write_multilattice(const MultiLattice& data, const fs::path& dir) {
  data.validate();
  fs::create_directories(dir);
  nlohmann::ordered_json doc;
  doc["delta"] = data.delta;
  doc["elements"] = nlohmann::ordered_json::array();
  for (int m = 0; m < data.elements(); ++m) {
    const auto& label = data.labels[m];
    const bool plain = !label.empty() && label.find_first_not_of(
                                             "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_-") ==
                                             std::string::npos;
    const std::string file = plain ? label + ".csv" : "element_" + std::to_string(m + 1) + ".csv";
    write_csv_matrix(data.values[m], dir / file);
    doc["elements"].push_back({{"label", label}, {"file", file}});
  }
  std::ofstream out(dir / "manifest.json", std::ios::binary);
  out << doc.dump(2) << '\n';
  if (!out) throw InputError("cannot write manifest in " + dir.string());
}

MultiLattice preprocess(const MultiLattice& data, bool take_log, bool center) {
  data.validate();
  MultiLattice out = data;
  for (int m = 0; m < out.elements(); ++m) {
    auto& v = out.values[m];
    if (take_log) {
      if ((v.array() <= 0.0).any())
        throw InputError("element '" + out.labels[m] + "' has non-positive values; cannot take log");
      v = v.array().log().matrix();
    }
    if (center) {
      v.array() -= v.mean();
      // one correction pass absorbs the rounding left by the first subtraction
      v.array() -= v.mean();
    }
  }
  return out;
}

TaperSpec make_taper(Eigen::Index n1, Eigen::Index n2, double r) {
  TaperSpec t;
  t.r = r;
  t.weights1 = taper_weights<double>(n1, r);
  t.weights2 = taper_weights<double>(n2, r);
  t.adjustment = t.weights1.squaredNorm() * t.weights2.squaredNorm();
  return t;
}

TaperedLattice apply_taper(const MultiLattice& data, double r) {
  data.validate();
  TaperedLattice out{data, make_taper(data.rows(), data.cols(), r)};
  const Eigen::MatrixXd window = out.taper.weights1 * out.taper.weights2.transpose();
  for (auto& v : out.data.values) v = v.cwiseProduct(window);
  return out;
}

}  // namespace mvspec

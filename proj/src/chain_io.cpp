#include <charconv>
#include <fstream>
#include <sstream>

#include "mvspec/sampler.hpp"

namespace mvspec {

void write_chain_csv(const PosteriorChain& chain, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write chain file " + path.string());
  for (std::size_t k = 0; k < chain.columns.size(); ++k) out << (k ? "," : "") << chain.columns[k];
  out << '\n';
  char buf[64];
  for (Eigen::Index i = 0; i < chain.draws.rows(); ++i) {
    for (Eigen::Index j = 0; j < chain.draws.cols(); ++j) {
      auto res = std::to_chars(buf, buf + sizeof(buf), chain.draws(i, j));
      if (j) out << ',';
      out.write(buf, res.ptr - buf);
    }
    out << '\n';
  }
  if (!out) throw InputError("write failed for " + path.string());
}

PosteriorChain read_chain_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open chain file " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw InputError(path.string() + ": empty chain file");

  PosteriorChain chain;
  {
    std::stringstream ss(line);
    std::string name;
    while (std::getline(ss, name, ',')) {
      if (!name.empty() && name.back() == '\r') name.pop_back();
      chain.columns.push_back(name);
    }
  }
  int m = 0;
  while (m < static_cast<int>(chain.columns.size()) && chain.columns[m] == "alpha_" + std::to_string(m + 1)) ++m;
  if (m == 0 || chain.columns != chain_columns(m)) throw InputError(path.string() + ": unrecognized chain header");
  chain.elements = m;

  std::vector<double> values;
  Eigen::Index rows = 0;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    std::string_view rest(line);
    std::size_t count = 0;
    while (true) {
      const auto comma = rest.find(',');
      auto cell = rest.substr(0, comma);
      if (!cell.empty() && cell.back() == '\r') cell.remove_suffix(1);
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size())
        throw InputError(path.string() + ": malformed value on line " + std::to_string(lineno));
      values.push_back(v);
      ++count;
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (count != chain.columns.size())
      throw InputError(path.string() + ": line " + std::to_string(lineno) + " has the wrong number of fields");
    ++rows;
  }
  if (rows == 0) throw InputError(path.string() + ": chain has no draws");
  chain.draws = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), rows, static_cast<Eigen::Index>(chain.columns.size()));
  return chain;
}

}  // namespace mvspec

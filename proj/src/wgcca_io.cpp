#include <fstream>
#include <iomanip>
#include <sstream>

#include "clonewatch/model.hpp"
#include "clonewatch/wgcca.hpp"

namespace clonewatch::wgcca {

void save_embeddings(const std::filesystem::path& path, const std::vector<std::string>& ids,
                     const Matrix<double>& G, bool centered) {
  if (static_cast<Eigen::Index>(ids.size()) != G.rows())
    throw DimensionError("one id per embedding row required");
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "# centered=" << (centered ? "true" : "false") << '\n' << "account_id";
  for (Eigen::Index c = 0; c < G.cols(); ++c) out << ",g" << c;
  out << '\n' << std::setprecision(17);
  for (Eigen::Index r = 0; r < G.rows(); ++r) {
    out << ids[static_cast<std::size_t>(r)];
    for (Eigen::Index c = 0; c < G.cols(); ++c) out << ',' << G(r, c);
    out << '\n';
  }
}

LoadedEmbeddings load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open embeddings file " + path.string());
  LoadedEmbeddings result;
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  Eigen::Index width = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line.rfind("# centered=", 0) == 0) {
      result.centered = line.substr(11) == "true";
      continue;
    }
    auto f = split_csv_line(line);
    if (width < 0) {
      if (f.empty() || f[0] != "account_id") throw ParseError("missing header row", lineno);
      width = static_cast<Eigen::Index>(f.size()) - 1;
      continue;
    }
    if (static_cast<Eigen::Index>(f.size()) - 1 != width) throw ParseError("row width mismatch", lineno);
    result.ids.push_back(f[0]);
    std::vector<double> v(static_cast<std::size_t>(width));
    for (std::size_t c = 0; c < v.size(); ++c) v[c] = std::stod(f[c + 1]);
    rows.push_back(std::move(v));
  }
  result.G.resize(static_cast<Eigen::Index>(rows.size()), std::max<Eigen::Index>(width, 0));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      result.G(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  return result;
}

}  // namespace clonewatch::wgcca

#include "robl1/io.hpp"

#include "robl1/errors.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

namespace robl1::io {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, sep)) out.push_back(trim(cell));
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& s, std::size_t line_no) {
  double v = 0.0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last)
    throw InvalidArgument("line " + std::to_string(line_no) + ": cannot parse number '" + s + "'");
  return v;
}

bool is_skippable(const std::string& line) {
  const std::string t = trim(line);
  return t.empty() || t.front() == '#';
}

}  // namespace

void write_dataset_csv(std::ostream& out, const Dataset& data, const std::string& comment) {
  data.validate();
  if (!comment.empty()) out << "# " << comment << '\n';
  out << 'y';
  for (Index i = 0; i < data.dim(); ++i) out << ",x" << (i + 1);
  out << '\n' << std::setprecision(17);
  for (Index t = 0; t < data.samples(); ++t) {
    out << data.outputs(t);
    for (Index i = 0; i < data.dim(); ++i) out << ',' << data.regressors(i, t);
    out << '\n';
  }
}

Dataset read_dataset_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_skippable(line)) continue;
    header = split(trim(line), ',');
    break;
  }
  if (header.size() < 2 || header[0] != "y")
    throw InvalidArgument("dataset CSV: expected a header 'y,x1,...,xn'");
  for (std::size_t i = 1; i < header.size(); ++i) {
    if (header[i] != "x" + std::to_string(i))
      throw InvalidArgument("dataset CSV: header column " + std::to_string(i + 1) + " is '" +
                            header[i] + "', expected 'x" + std::to_string(i) + "'");
  }
  const auto n = static_cast<Index>(header.size() - 1);
  std::vector<double> ys;
  std::vector<double> xs;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_skippable(line)) continue;
    const auto cells = split(trim(line), ',');
    if (cells.size() != header.size())
      throw InvalidArgument("dataset CSV line " + std::to_string(line_no) + ": expected " +
                            std::to_string(header.size()) + " fields, got " +
                            std::to_string(cells.size()));
    ys.push_back(parse_double(cells[0], line_no));
    for (std::size_t i = 1; i < cells.size(); ++i) xs.push_back(parse_double(cells[i], line_no));
  }
  if (ys.empty()) throw InvalidArgument("dataset CSV has no samples");
  Dataset d;
  const auto samples = static_cast<Index>(ys.size());
  d.outputs = Eigen::Map<const Vector>(ys.data(), samples);
  d.regressors = Eigen::Map<const Matrix>(xs.data(), n, samples);
  d.validate();
  return d;
}

void write_dataset(const std::filesystem::path& path, const Dataset& data,
                   const std::string& comment) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot open " + path.string() + " for writing");
  write_dataset_csv(out, data, comment);
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open dataset " + path.string());
  Dataset d = read_dataset_csv(in);
  const auto dir = path.parent_path();
  const auto theta_path = dir / "theta0.csv";
  const auto f_path = dir / "f.csv";
  if (std::filesystem::exists(theta_path) && std::filesystem::exists(f_path)) {
    Vector theta0 = read_vector(theta_path);
    Vector f = read_vector(f_path);
    if (theta0.size() == d.dim() && f.size() == d.samples()) {
      Vector e = d.outputs - d.regressors.transpose() * theta0 - f;
      d.truth = Truth{std::move(theta0), std::move(f), std::move(e)};
    }
  }
  return d;
}

void write_vector(const std::filesystem::path& path, const Vector& v) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot open " + path.string() + " for writing");
  out << std::setprecision(17);
  for (Index i = 0; i < v.size(); ++i) out << v(i) << '\n';
}

Vector read_vector(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_skippable(line)) continue;
    values.push_back(parse_double(trim(line), line_no));
  }
  return Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
}

void write_truth_sidecars(const std::filesystem::path& data_path, const Truth& truth) {
  const auto dir = data_path.parent_path();
  write_vector(dir / "theta0.csv", truth.theta0);
  write_vector(dir / "f.csv", truth.gross);
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot open " + path.string() + " for writing");
  out << text;
}

}  // namespace robl1::io

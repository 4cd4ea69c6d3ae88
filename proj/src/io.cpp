#include "fda/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <optional>
#include <fstream>
#include <set>
#include <sstream>

namespace fda::io {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

std::ifstream open(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return in;
}

std::string where(const std::string& source, std::size_t line) {
  return source + ", row " + std::to_string(line);
}

double parse_number(const std::string& field, const std::string& source, std::size_t line) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  // from_chars rejects a leading '+'.
  if (begin != end && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (field.empty() || ec != std::errc() || ptr != end || !std::isfinite(value))
    throw DataError(where(source, line) + ": '" + field + "' is not a finite number");
  return value;
}

/// Reads non-comment, non-blank lines with their 1-based line numbers.
std::vector<std::pair<std::size_t, std::string>> data_lines(std::istream& in) {
  std::vector<std::pair<std::size_t, std::string>> lines;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    lines.emplace_back(number, text);
  }
  return lines;
}

std::vector<std::string> comment_lines(const std::filesystem::path& path) {
  auto in = open(path);
  std::vector<std::string> comments;
  std::string line;
  while (std::getline(in, line)) {
    const auto text = trim(line);
    if (text.empty()) continue;
    if (text.front() != '#') break;
    comments.push_back(trim(std::string_view(text).substr(1)));
  }
  return comments;
}

}  // namespace

std::string format_double(double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, ptr);
}

nlohmann::json Provenance::to_json() const {
  return {{"command", command}, {"parameters", parameters}, {"seed", seed}, {"version", version}};
}

Provenance Provenance::from_json(const nlohmann::json& j) {
  Provenance p;
  p.command = j.at("command").get<std::string>();
  p.parameters = j.at("parameters");
  p.seed = j.at("seed").get<std::uint64_t>();
  p.version = j.at("version").get<std::string>();
  return p;
}

void write_provenance_comments(std::ostream& out, const Provenance& provenance) {
  out << "# toolkit: fda " << provenance.version << '\n';
  out << "# command: " << provenance.command << '\n';
  out << "# parameters: " << provenance.parameters.dump() << '\n';
  out << "# seed: " << provenance.seed << '\n';
}

Provenance read_provenance_comments(const std::filesystem::path& path) {
  Provenance p;
  bool have_command = false, have_seed = false, have_version = false, have_parameters = false;
  for (const auto& comment : comment_lines(path)) {
    const auto colon = comment.find(':');
    if (colon == std::string::npos) continue;
    const auto key = trim(std::string_view(comment).substr(0, colon));
    const auto value = trim(std::string_view(comment).substr(colon + 1));
    if (key == "toolkit") {
      const auto space = value.find(' ');
      p.version = space == std::string::npos ? value : value.substr(space + 1);
      have_version = true;
    } else if (key == "command") {
      p.command = value;
      have_command = true;
    } else if (key == "parameters") {
      p.parameters = nlohmann::json::parse(value);
      have_parameters = true;
    } else if (key == "seed") {
      p.seed = std::stoull(value);
      have_seed = true;
    }
  }
  if (!(have_command && have_seed && have_version && have_parameters))
    throw DataError("'" + path.string() + "' has no complete provenance header");
  return p;
}

std::vector<RawCurve> ingest_curves(const std::filesystem::path& path) {
  auto in = open(path);
  return ingest_curves(in, path.string());
}

std::vector<RawCurve> ingest_curves(std::istream& in, const std::string& source) {
  const auto lines = data_lines(in);
  if (lines.empty()) throw DataError(source + ": empty file");
  const auto header = split(lines.front().second);
  if (header != std::vector<std::string>{"id", "t", "value"})
    throw DataError(where(source, lines.front().first) + ": header must be 'id,t,value'");
  if (lines.size() == 1) throw DataError(source + ": no observations after the header");

  struct Observation {
    double t;
    double value;
    std::size_t line;
  };
  std::map<std::string, std::vector<Observation>> by_id;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto& [number, text] = lines[r];
    const auto fields = split(text);
    if (fields.size() != 3) throw DataError(where(source, number) + ": expected 3 fields, found " + std::to_string(fields.size()));
    if (fields[0].empty()) throw DataError(where(source, number) + ": empty id");
    by_id[fields[0]].push_back({parse_number(fields[1], source, number), parse_number(fields[2], source, number), number});
  }

  std::vector<RawCurve> curves;
  curves.reserve(by_id.size());
  for (auto& [id, observations] : by_id) {
    std::stable_sort(observations.begin(), observations.end(),
                     [](const Observation& a, const Observation& b) { return a.t < b.t; });
    RawCurve curve;
    curve.id = id;
    for (std::size_t k = 0; k < observations.size(); ++k) {
      if (k > 0 && observations[k].t == observations[k - 1].t) {
        const auto row = std::max(observations[k].line, observations[k - 1].line);
        throw DataError(where(source, row) + ": duplicate time " + format_double(observations[k].t) + " for id '" + id + "'");
      }
      curve.times.push_back(observations[k].t);
      curve.values.push_back(observations[k].value);
    }
    curves.push_back(std::move(curve));
  }
  return curves;
}

void write_curves(std::ostream& out, const std::vector<RawCurve>& curves) {
  out << "id,t,value\n";
  for (const auto& curve : curves)
    for (std::size_t l = 0; l < curve.times.size(); ++l)
      out << curve.id << ',' << format_double(curve.times[l]) << ',' << format_double(curve.values[l]) << '\n';
}

nlohmann::json basis_to_json(const BasisSystem& basis) {
  nlohmann::json j = {{"kind", to_string(basis.kind())},
                      {"k", basis.size()},
                      {"domain", {basis.domain().lo, basis.domain().hi}}};
  if (basis.kind() == BasisKind::BSpline) {
    j["order"] = basis.order();
    j["knots"] = basis.interior_knots();
  }
  return j;
}

BasisSystem basis_from_json(const nlohmann::json& j) {
  try {
    const auto kind = basis_kind_from_string(j.at("kind").get<std::string>());
    const Domain domain{j.at("domain").at(0).get<double>(), j.at("domain").at(1).get<double>()};
    if (kind == BasisKind::Fourier) return BasisSystem::fourier(j.at("k").get<int>(), domain);
    auto basis = BasisSystem::bspline(j.at("knots").get<std::vector<double>>(), j.at("order").get<int>(), domain);
    if (basis.size() != j.at("k").get<int>()) throw DataError("basis description: K does not match knots + order");
    return basis;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed basis description: ") + e.what());
  }
}

void write_coefficients(std::ostream& out, const FunctionalDataSet& ds, const Provenance& provenance) {
  write_provenance_comments(out, provenance);
  out << "# basis: " << basis_to_json(ds.basis()).dump() << '\n';
  out << "id";
  for (int k = 1; k <= ds.basis().size(); ++k) out << ",c" << k;
  out << '\n';
  for (Eigen::Index i = 0; i < ds.size(); ++i) {
    out << ds.ids()[static_cast<std::size_t>(i)];
    for (Eigen::Index k = 0; k < ds.coefficients().cols(); ++k) out << ',' << format_double(ds.coefficients()(i, k));
    out << '\n';
  }
}

FunctionalDataSet read_coefficients(const std::filesystem::path& path) {
  std::optional<BasisSystem> basis;
  for (const auto& comment : comment_lines(path)) {
    if (comment.rfind("basis:", 0) == 0) {
      try {
        basis = basis_from_json(nlohmann::json::parse(comment.substr(6)));
      } catch (const nlohmann::json::exception& e) {
        throw DataError("'" + path.string() + "': malformed basis line: " + e.what());
      }
    }
  }
  if (!basis) throw DataError("'" + path.string() + "' has no '# basis:' line");
  const auto table = read_keyed_table(path);
  if (static_cast<int>(table.columns.size()) != basis->size())
    throw DataError("'" + path.string() + "': " + std::to_string(table.columns.size()) + " coefficient columns for a basis of size " +
                    std::to_string(basis->size()));

  // Preserve file order rather than the table's sorted order.
  std::vector<std::string> ids;
  {
    auto in = open(path);
    const auto lines = data_lines(in);
    for (std::size_t r = 1; r < lines.size(); ++r) ids.push_back(split(lines[r].second).front());
  }
  return {*basis, table.matrix_for(ids), ids};
}

MatrixXd KeyedTable::matrix_for(const std::vector<std::string>& ids) const {
  MatrixXd m(static_cast<Eigen::Index>(ids.size()), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto it = rows.find(ids[i]);
    if (it == rows.end()) throw DataError("no row for curve id '" + ids[i] + "'");
    for (std::size_t c = 0; c < columns.size(); ++c)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = it->second[c];
  }
  return m;
}

KeyedTable read_keyed_table(const std::filesystem::path& path) {
  auto in = open(path);
  const auto source = path.string();
  const auto lines = data_lines(in);
  if (lines.empty()) throw DataError(source + ": empty file");
  auto header = split(lines.front().second);
  if (header.size() < 2 || header.front() != "id")
    throw DataError(where(source, lines.front().first) + ": header must start with 'id' and name at least one column");
  KeyedTable table;
  table.columns.assign(header.begin() + 1, header.end());
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto& [number, text] = lines[r];
    const auto fields = split(text);
    if (fields.size() != header.size())
      throw DataError(where(source, number) + ": expected " + std::to_string(header.size()) + " fields, found " +
                      std::to_string(fields.size()));
    std::vector<double> values;
    for (std::size_t c = 1; c < fields.size(); ++c) values.push_back(parse_number(fields[c], source, number));
    if (!table.rows.emplace(fields[0], std::move(values)).second)
      throw DataError(where(source, number) + ": duplicate id '" + fields[0] + "'");
  }
  if (table.rows.empty()) throw DataError(source + ": no rows after the header");
  return table;
}

std::vector<Point2> read_coordinates(const std::filesystem::path& path, const std::vector<std::string>& ids) {
  const auto table = read_keyed_table(path);
  if (table.columns != std::vector<std::string>{"x", "y"})
    throw DataError(path.string() + ": coordinate header must be 'id,x,y'");
  const MatrixXd m = table.matrix_for(ids);
  std::vector<Point2> coords(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i)
    coords[i] = {m(static_cast<Eigen::Index>(i), 0), m(static_cast<Eigen::Index>(i), 1)};
  return coords;
}

}  // namespace fda::io

#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "fda/scan.hpp"
#include "fda/smoothing.hpp"

namespace fda::io {

inline constexpr const char* kToolkitVersion = "0.1.0";

/// Written as leading "# key: value" lines in CSV outputs and as a
/// "provenance" object in JSON outputs.
struct Provenance {
  std::string command;
  nlohmann::json parameters = nlohmann::json::object();
  std::uint64_t seed = 0;
  std::string version = kToolkitVersion;

  nlohmann::json to_json() const;
  static Provenance from_json(const nlohmann::json& j);
};

void write_provenance_comments(std::ostream& out, const Provenance& provenance);
/// Parses the leading comment block of a CSV file written by this toolkit.
Provenance read_provenance_comments(const std::filesystem::path& path);

/// Long-format curves, header `id,t,value`. One RawCurve per distinct id,
/// ordered by id, times ascending. Duplicate (id, t) pairs are an error.
std::vector<RawCurve> ingest_curves(const std::filesystem::path& path);
std::vector<RawCurve> ingest_curves(std::istream& in, const std::string& source = "<stream>");
void write_curves(std::ostream& out, const std::vector<RawCurve>& curves);

nlohmann::json basis_to_json(const BasisSystem& basis);
BasisSystem basis_from_json(const nlohmann::json& j);

/// `id,c1..cK` rows; the basis is stored in a `# basis:` comment line.
/// Values are printed with 17 significant digits so reading them back is exact.
void write_coefficients(std::ostream& out, const FunctionalDataSet& ds, const Provenance& provenance);
FunctionalDataSet read_coefficients(const std::filesystem::path& path);

/// A CSV keyed by its first column `id`; remaining columns numeric.
struct KeyedTable {
  std::vector<std::string> columns;  // excluding id
  std::map<std::string, std::vector<double>> rows;

  /// Rows in the given id order; missing ids are an error.
  MatrixXd matrix_for(const std::vector<std::string>& ids) const;
};
KeyedTable read_keyed_table(const std::filesystem::path& path);

/// `id,x,y` rows, returned in the order of `ids`.
std::vector<Point2> read_coordinates(const std::filesystem::path& path, const std::vector<std::string>& ids);

/// Shortest decimal form that reads back to the same double.
std::string format_double(double value);

}  // namespace fda::io

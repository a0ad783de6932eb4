#pragma once

// JSON and CSV forms of matrices, observation sequences, grids, abstract
// configurations, certificates and verdicts. Rationals travel as "p/q"
// strings in JSON; CSV carries decimals.

#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "fjv/abstraction.hpp"
#include "fjv/observation.hpp"
#include "fjv/verify.hpp"

namespace fjv {

using Json = nlohmann::json;

/// Reads a whole file; IoError when it cannot be opened.
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses JSON text; syntax errors become ParseError naming `source` with
/// line and column.
Json parse_json(std::string_view text, const std::string& source);

/// Rejects members of `object` outside `allowed`; `where` prefixes the message.
void require_keys_subset(const Json& object, std::initializer_list<std::string_view> allowed,
                         const std::string& where);

Json rational_to_json(const Rational& q);
/// "p/q" and decimal strings are exact; JSON numbers go through the
/// shortest round-trip decimal.
Rational rational_from_json(const Json& value, const std::string& where);

Json vector_to_json(const Vector<Rational>& v);
Vector<Rational> vector_from_json(const Json& value, const std::string& where);

/// Dense row-major array of rows.
Json matrix_to_json(const Matrix<Rational>& m);
Json matrix_to_json(const Matrix<double>& m);
Matrix<Rational> matrix_from_json(const Json& value, const std::string& where);

/// One row per line, comma separated, 17 significant digits.
std::string matrix_to_csv(const Matrix<double>& m);
/// Cells are parsed exactly ("0.1" is 1/10). Errors carry the line number.
Matrix<Rational> matrix_from_csv(std::string_view text, const std::string& source);

/// Rows are steps t = 0..T, columns agents, cells 0 or 1. Blank lines and
/// lines starting with '#' are skipped.
std::vector<BinaryOutput> observations_from_csv(std::string_view text, const std::string& source);
std::string observations_to_csv(const std::vector<BinaryOutput>& observed);

/// {"kappa": "1/4", "observed": [[0, 1, ...], ...]}; kappa defaults to 0.
ObservationSpec observations_from_json(const Json& value, const std::string& where);
Json observations_to_json(const ObservationSpec& spec);

/// By extension: .json, otherwise CSV. CSV files carry no kappa, so
/// `kappa` is used for them and for JSON files without one.
ObservationSpec load_observations(const std::string& path, const Rational& kappa);

Json grid_to_json(const AbstractGrid& grid);
AbstractGrid grid_from_json(const Json& value, const std::string& where);

/// Indices and decoded values, all as strings.
Json config_to_json(const AbstractConfig& config, const AbstractGrid& grid);
AbstractConfig config_from_json(const Json& value, const std::string& where);

Json certificate_to_json(const SimulationCertificate& certificate);
Json evidence_to_json(const BoxEvidence& evidence);
Json verdict_to_json(const Verdict& verdict, const AbstractGrid& grid);

/// Shortest decimal that round-trips.
std::string format_double(double value);

}  // namespace fjv

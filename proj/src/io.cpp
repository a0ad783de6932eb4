#include "fjv/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace fjv {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << content;
  if (!out) throw IoError("write failed: " + path);
}

Json parse_json(std::string_view text, const std::string& source) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    throw ParseError(source + ": " + e.what());
  }
}

void require_keys_subset(const Json& object, std::initializer_list<std::string_view> allowed,
                         const std::string& where) {
  if (!object.is_object()) throw ParseError(where + ": expected an object");
  for (const auto& item : object.items()) {
    bool known = false;
    for (std::string_view key : allowed) known = known || key == item.key();
    if (!known) throw ParseError(where + ": unknown key '" + item.key() + "'");
  }
}

std::string format_double(double value) {
  char buffer[64];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc{}) throw ParseError("to_chars failed");
  return std::string(buffer, ptr);
}

Json rational_to_json(const Rational& q) { return to_string(q); }

Rational rational_from_json(const Json& value, const std::string& where) {
  try {
    if (value.is_string()) return parse_rational(value.get<std::string>());
    if (value.is_number_integer()) return Rational(value.get<long long>());
    if (value.is_number()) return rational_from_double(value.get<double>());
  } catch (const ParseError& e) {
    throw ParseError(where + ": " + e.what());
  }
  throw ParseError(where + ": expected a number or a rational string");
}

Json vector_to_json(const Vector<Rational>& v) {
  Json out = Json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(rational_to_json(v(i)));
  return out;
}

Vector<Rational> vector_from_json(const Json& value, const std::string& where) {
  if (!value.is_array()) throw ParseError(where + ": expected an array");
  Vector<Rational> v(static_cast<Index>(value.size()));
  for (std::size_t i = 0; i < value.size(); ++i) {
    v(static_cast<Index>(i)) = rational_from_json(value[i], where + "[" + std::to_string(i) + "]");
  }
  return v;
}

Json matrix_to_json(const Matrix<Rational>& m) {
  Json out = Json::array();
  for (Index i = 0; i < m.rows(); ++i) out.push_back(vector_to_json(m.row(i).transpose()));
  return out;
}

Json matrix_to_json(const Matrix<double>& m) {
  Json out = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(row);
  }
  return out;
}

Matrix<Rational> matrix_from_json(const Json& value, const std::string& where) {
  if (!value.is_array()) throw ParseError(where + ": expected an array of rows");
  const auto rows = static_cast<Index>(value.size());
  Matrix<Rational> m;
  for (Index i = 0; i < rows; ++i) {
    const std::string row_where = where + "[" + std::to_string(i) + "]";
    const Vector<Rational> row = vector_from_json(value[static_cast<std::size_t>(i)], row_where);
    if (i == 0) m.resize(rows, row.size());
    if (row.size() != m.cols()) {
      throw ParseError(row_where + ": expected " + std::to_string(m.cols()) + " entries, found " +
                       std::to_string(row.size()));
    }
    m.row(i) = row.transpose();
  }
  return m;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Non-empty, non-comment lines split into trimmed cells, with 1-based line numbers.
struct CsvRow {
  int line;
  std::vector<std::string_view> cells;
};

std::vector<CsvRow> split_csv(std::string_view text) {
  std::vector<CsvRow> rows;
  int line = 0;
  while (!text.empty()) {
    ++line;
    const std::size_t end = text.find('\n');
    std::string_view current = trim(text.substr(0, end));
    text = end == std::string_view::npos ? std::string_view{} : text.substr(end + 1);
    if (current.empty() || current.front() == '#') continue;
    CsvRow row{line, {}};
    while (true) {
      const std::size_t comma = current.find(',');
      row.cells.push_back(trim(current.substr(0, comma)));
      if (comma == std::string_view::npos) break;
      current = current.substr(comma + 1);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string at_line(const std::string& source, int line) { return source + ":" + std::to_string(line); }

void check_width(const CsvRow& row, std::size_t width, const std::string& source) {
  if (row.cells.size() != width) {
    throw ParseError(at_line(source, row.line) + ": expected " + std::to_string(width) +
                     " cells, found " + std::to_string(row.cells.size()));
  }
}

}  // namespace

std::string matrix_to_csv(const Matrix<double>& m) {
  std::string out;
  char buffer[64];
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out += ',';
      std::snprintf(buffer, sizeof(buffer), "%.17g", m(i, j));
      out += buffer;
    }
    out += '\n';
  }
  return out;
}

Matrix<Rational> matrix_from_csv(std::string_view text, const std::string& source) {
  const auto rows = split_csv(text);
  if (rows.empty()) throw ParseError(source + ": no rows");
  Matrix<Rational> m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().cells.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    check_width(rows[i], rows.front().cells.size(), source);
    for (std::size_t j = 0; j < rows[i].cells.size(); ++j) {
      try {
        m(static_cast<Index>(i), static_cast<Index>(j)) = parse_rational(rows[i].cells[j]);
      } catch (const ParseError& e) {
        throw ParseError(at_line(source, rows[i].line) + ": cell " + std::to_string(j + 1) + ": " +
                         e.what());
      }
    }
  }
  return m;
}

std::vector<BinaryOutput> observations_from_csv(std::string_view text, const std::string& source) {
  const auto rows = split_csv(text);
  if (rows.empty()) throw ParseError(source + ": no observation rows");
  std::vector<BinaryOutput> observed;
  for (const CsvRow& row : rows) {
    check_width(row, rows.front().cells.size(), source);
    BinaryOutput y(static_cast<Index>(row.cells.size()));
    for (std::size_t j = 0; j < row.cells.size(); ++j) {
      if (row.cells[j] != "0" && row.cells[j] != "1") {
        throw ParseError(at_line(source, row.line) + ": cell " + std::to_string(j + 1) + " is '" +
                         std::string(row.cells[j]) + "', expected 0 or 1");
      }
      y(static_cast<Index>(j)) = row.cells[j] == "1" ? 1 : 0;
    }
    observed.push_back(std::move(y));
  }
  return observed;
}

std::string observations_to_csv(const std::vector<BinaryOutput>& observed) {
  std::string out;
  for (const BinaryOutput& y : observed) {
    for (Index i = 0; i < y.size(); ++i) {
      if (i > 0) out += ',';
      out += y(i) ? '1' : '0';
    }
    out += '\n';
  }
  return out;
}

ObservationSpec observations_from_json(const Json& value, const std::string& where) {
  require_keys_subset(value, {"kappa", "observed"}, where);
  if (!value.contains("observed") || !value["observed"].is_array()) {
    throw ParseError(where + ": 'observed' must be an array of rows");
  }
  ObservationSpec spec;
  if (value.contains("kappa")) spec.kappa = rational_from_json(value["kappa"], where + ".kappa");
  const Json& rows = value["observed"];
  for (std::size_t t = 0; t < rows.size(); ++t) {
    const std::string row_where = where + ".observed[" + std::to_string(t) + "]";
    if (!rows[t].is_array()) throw ParseError(row_where + ": expected an array");
    BinaryOutput y(static_cast<Index>(rows[t].size()));
    for (std::size_t i = 0; i < rows[t].size(); ++i) {
      const Json& cell = rows[t][i];
      if (!cell.is_number_integer() || (cell.get<int>() != 0 && cell.get<int>() != 1)) {
        throw ParseError(row_where + "[" + std::to_string(i) + "]: expected 0 or 1");
      }
      y(static_cast<Index>(i)) = static_cast<std::uint8_t>(cell.get<int>());
    }
    spec.observed.push_back(std::move(y));
  }
  try {
    spec.validate();
  } catch (const std::exception& e) {
    throw ParseError(where + ": " + e.what());
  }
  return spec;
}

Json observations_to_json(const ObservationSpec& spec) {
  Json rows = Json::array();
  for (const BinaryOutput& y : spec.observed) {
    Json row = Json::array();
    for (Index i = 0; i < y.size(); ++i) row.push_back(static_cast<int>(y(i)));
    rows.push_back(row);
  }
  return {{"kappa", rational_to_json(spec.kappa)}, {"observed", rows}};
}

ObservationSpec load_observations(const std::string& path, const Rational& kappa) {
  const std::string text = read_file(path);
  const bool json = path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
  if (json) {
    Json value = parse_json(text, path);
    if (value.is_object() && !value.contains("kappa")) value["kappa"] = rational_to_json(kappa);
    return observations_from_json(value, path);
  }
  ObservationSpec spec;
  spec.observed = observations_from_csv(text, path);
  spec.kappa = kappa;
  spec.validate();
  return spec;
}

Json grid_to_json(const AbstractGrid& grid) {
  return {{"d_x", grid.d_x},
          {"d_lambda", grid.d_lambda},
          {"eps_w", grid.eps_w},
          {"w_ab", matrix_to_json(grid.w_ab.matrix())}};
}

AbstractGrid grid_from_json(const Json& value, const std::string& where) {
  require_keys_subset(value, {"d_x", "d_lambda", "eps_w", "w_ab"}, where);
  AbstractGrid grid;
  try {
    grid.d_x = value.at("d_x").get<int>();
    grid.d_lambda = value.at("d_lambda").get<int>();
    grid.eps_w = value.value("eps_w", 0.0);
    grid.w_ab = InfluenceMatrix<Rational>(matrix_from_json(value.at("w_ab"), where + ".w_ab"));
    grid.validate();
  } catch (const Json::exception& e) {
    throw ParseError(where + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw ParseError(where + ": " + e.what());
  }
  return grid;
}

Json config_to_json(const AbstractConfig& config, const AbstractGrid& grid) {
  Json init = Json::array(), levels = Json::array();
  for (int k : config.init_indices) init.push_back(std::to_string(k));
  for (int k : config.lambda_levels) levels.push_back(std::to_string(k));
  return {{"init_indices", init},
          {"lambda_levels", levels},
          {"x_init", vector_to_json(decode_init(config, grid))},
          {"lambda", vector_to_json(decode_lambda(config, grid).values())}};
}

namespace {

std::vector<int> indices_from_json(const Json& value, const std::string& where) {
  if (!value.is_array()) throw ParseError(where + ": expected an array");
  std::vector<int> out;
  for (std::size_t i = 0; i < value.size(); ++i) {
    const Json& cell = value[i];
    const std::string cell_where = where + "[" + std::to_string(i) + "]";
    if (cell.is_number_integer()) {
      out.push_back(cell.get<int>());
    } else if (cell.is_string()) {
      const std::string s = cell.get<std::string>();
      int k = 0;
      auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), k);
      if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw ParseError(cell_where + ": '" + s + "' is not an integer");
      }
      out.push_back(k);
    } else {
      throw ParseError(cell_where + ": expected an integer");
    }
  }
  return out;
}

}  // namespace

AbstractConfig config_from_json(const Json& value, const std::string& where) {
  require_keys_subset(value, {"init_indices", "lambda_levels", "x_init", "lambda"}, where);
  if (!value.contains("init_indices") || !value.contains("lambda_levels")) {
    throw ParseError(where + ": 'init_indices' and 'lambda_levels' are required");
  }
  AbstractConfig c;
  c.init_indices = indices_from_json(value["init_indices"], where + ".init_indices");
  c.lambda_levels = indices_from_json(value["lambda_levels"], where + ".lambda_levels");
  if (c.init_indices.size() != c.lambda_levels.size()) {
    throw ParseError(where + ": init_indices and lambda_levels differ in length");
  }
  return c;
}

namespace {

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace

Json certificate_to_json(const SimulationCertificate& c) {
  return {{"valid", c.valid()},
          {"delta", c.delta},
          {"horizon", c.horizon},
          {"conditions",
           {{"grid_resolution", c.grid_resolution},
            {"contractive", c.contractive},
            {"budget", c.budget},
            {"assumption2", c.assumption2},
            {"weight_budget", c.weight_budget}}},
          {"evidence",
           {{"rho", c.rho},
            {"eps_x", c.eps_x},
            {"w_norm", c.w_norm},
            {"measured_eps_w", c.measured_eps_w},
            {"min_delta", optional_number(c.min_delta)}}}};
}

Json evidence_to_json(const BoxEvidence& e) {
  return {{"holds", e.holds()},
          {"samples", e.samples},
          {"delta", e.delta},
          {"conditions",
           {{"grid_resolution", e.grid_resolution},
            {"all_contractive", e.all_contractive},
            {"budget", e.budget},
            {"weight_budget", e.weight_budget},
            {"all_assumption2", e.all_assumption2}}},
          {"evidence",
           {{"w_norm", e.w_norm},
            {"eps_x", e.eps_x},
            {"rho_min", e.rho_min},
            {"rho_max", e.rho_max},
            {"assumption2_failures", e.assumption2_failures}}}};
}

Json verdict_to_json(const Verdict& v, const AbstractGrid& grid) {
  Json witnesses = Json::array();
  for (const AbstractConfig& c : v.witnesses) witnesses.push_back(config_to_json(c, grid));
  Json out = {{"status", to_string(v.status)},
              {"engine", to_string(v.engine)},
              {"solution_count", v.solution_count},
              {"count_complete", v.count_complete},
              {"witnesses", witnesses},
              {"notes", v.notes}};
  out["evidence"] = v.evidence ? evidence_to_json(*v.evidence) : Json(nullptr);
  return out;
}

}  // namespace fjv

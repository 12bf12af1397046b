#include "anchorprobe/score_table.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "anchorprobe/error.hpp"

namespace anchorprobe {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cell.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else if (c != '\r') {
      cell.push_back(c);
    }
  }
  cells.push_back(std::move(cell));
  return cells;
}

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

double parse_double(const std::string& text, const std::string& where) {
  double v = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) throw FormatError(where + ": not a number: '" + text + "'");
  return v;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  return out + "\"";
}

std::string format_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

std::string row_key(const SampleRecord& r) {
  std::string key = r.image_id;
  key += '|';
  key += to_string(r.condition);
  key += '|';
  key += r.anchor_value ? std::to_string(*r.anchor_value) : "-";
  key += '|';
  key += r.formulation ? std::string(to_string(*r.formulation)) : "-";
  key += '|';
  key += r.degradation_param ? format_number(*r.degradation_param) : "-";
  key += '|';
  key += to_string(r.prompt_mode);
  key += '|';
  key += r.model_id;
  return key;
}

void ScoreTable::validate() const {
  std::vector<std::string> problems;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!(rows[i].score >= 0.0 && rows[i].score <= 10.0)) {
      problems.push_back("row " + std::to_string(i + 1) + ": score " + format_number(rows[i].score) +
                         " outside [0, 10]");
    }
  }
  if (!problems.empty()) {
    std::string msg = "score table rejected:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw ValidationError(msg);
  }
  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].record.validate();
    const auto [it, inserted] = seen.emplace(row_key(rows[i].record), i);
    if (!inserted) {
      throw ValidationError("duplicate score key " + it->first + " (rows " +
                            std::to_string(it->second + 1) + " and " + std::to_string(i + 1) + ")");
    }
  }
}

std::vector<std::string> ScoreTable::models() const {
  std::set<std::string> s;
  for (const auto& r : rows) s.insert(r.record.model_id);
  return {s.begin(), s.end()};
}

std::vector<std::string> ScoreTable::metric_names() const {
  std::set<std::string> s;
  for (const auto& r : rows) {
    for (const auto& [name, _] : r.metrics) s.insert(name);
  }
  return {s.begin(), s.end()};
}

ScoreTable parse_scores(const std::string& csv_text, const std::string& source) {
  std::istringstream in(csv_text);
  std::string line;
  if (!std::getline(in, line)) throw FormatError(source + ": empty file");
  std::vector<std::string> header = split_csv_line(line);
  for (auto& h : header) h = trim(h);

  std::unordered_map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col.emplace(header[i], i);
  for (const char* required : kRequiredScoreColumns) {
    if (!col.contains(required)) {
      throw FormatError(source + ": missing required column '" + required + "'");
    }
  }
  const std::set<std::string> reserved(std::begin(kRequiredScoreColumns),
                                       std::end(kRequiredScoreColumns));
  std::vector<std::size_t> metric_cols;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (!reserved.contains(header[i]) && header[i] != "degradation_param") metric_cols.push_back(i);
  }

  ScoreTable table;
  std::vector<std::string> range_errors;
  std::unordered_map<std::string, std::size_t> seen;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::string where = source + ":" + std::to_string(line_no);
    std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw FormatError(where + ": expected " + std::to_string(header.size()) + " fields, got " +
                        std::to_string(cells.size()));
    }
    for (auto& c : cells) c = trim(c);
    auto cell = [&](const char* name) -> const std::string& { return cells[col.at(name)]; };

    ScoreRow row;
    auto& r = row.record;
    try {
      r.image_id = cell("image_id");
      r.city = cell("city");
      r.condition = parse_condition(cell("condition"));
      if (!cell("anchor").empty()) {
        r.anchor_value = static_cast<int>(parse_double(cell("anchor"), where));
      }
      if (!cell("formulation").empty()) r.formulation = parse_formulation(cell("formulation"));
      if (col.contains("degradation_param") && !cells[col["degradation_param"]].empty()) {
        r.degradation_param = parse_double(cells[col["degradation_param"]], where);
      }
      r.prompt_mode = parse_prompt_mode(cell("prompt_mode"));
      r.model_id = cell("model_id");
      row.score = parse_double(cell("score"), where);
      r.validate();
    } catch (const FormatError&) {
      throw;
    } catch (const Error& e) {
      throw ValidationError(where + ": " + e.what());
    }
    for (std::size_t c : metric_cols) {
      if (!cells[c].empty()) row.metrics[header[c]] = parse_double(cells[c], where);
    }
    if (!(row.score >= 0.0 && row.score <= 10.0)) {
      range_errors.push_back("row " + std::to_string(line_no) + ": score " + cell("score") +
                             " outside [0, 10]");
      continue;
    }
    const auto [it, inserted] = seen.emplace(row_key(r), line_no);
    if (!inserted) {
      throw ValidationError(where + ": duplicate key " + it->first + " (first seen at row " +
                            std::to_string(it->second) + ")");
    }
    table.rows.push_back(std::move(row));
  }
  if (!range_errors.empty()) {
    std::string msg = source + ": rejected rows:";
    for (const auto& e : range_errors) msg += "\n  " + e;
    throw ValidationError(msg);
  }
  return table;
}

ScoreTable load_scores(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scores(buf.str(), path.string());
}

void write_scores(const ScoreTable& table, const std::filesystem::path& path) {
  table.validate();
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::vector<std::string> metrics = table.metric_names();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  for (const char* c : kRequiredScoreColumns) out << c << ',';
  out << "degradation_param";
  for (const auto& m : metrics) out << ',' << csv_escape(m);
  out << '\n';
  for (const auto& row : table.rows) {
    const auto& r = row.record;
    out << csv_escape(r.image_id) << ',' << csv_escape(r.city) << ',' << to_string(r.condition) << ','
        << (r.anchor_value ? std::to_string(*r.anchor_value) : "") << ','
        << (r.formulation ? std::string(to_string(*r.formulation)) : "") << ','
        << to_string(r.prompt_mode) << ',' << csv_escape(r.model_id) << ',' << format_number(row.score)
        << ',' << (r.degradation_param ? format_number(*r.degradation_param) : "");
    for (const auto& m : metrics) {
      out << ',';
      if (auto it = row.metrics.find(m); it != row.metrics.end()) out << format_number(it->second);
    }
    out << '\n';
  }
}

}  // namespace anchorprobe

#include "ergopattern/trial_csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "ergopattern/errors.hpp"

namespace ergo {

namespace {

void put(std::string& line, double v) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
  line.append(buf, static_cast<std::size_t>(n));
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

double parse_double(std::string_view s, std::size_t line, const char* column) {
  // strtod accepts everything %.17g emits, including inf/nan.
  const std::string copy(s);
  char* end = nullptr;
  const double v = std::strtod(copy.c_str(), &end);
  if (copy.empty() || end != copy.c_str() + copy.size()) {
    throw ParseError(std::string("bad number in column ") + column + ": '" + copy + "'", line);
  }
  return v;
}

long parse_int(std::string_view s, std::size_t line, const char* column) {
  long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError(std::string("bad integer in column ") + column + ": '" + std::string(s) + "'", line);
  }
  return v;
}

} // namespace

void write_trial_csv(std::ostream& out, const TrialRecord& record) {
  out << kTrialCsvHeader << '\n';
  std::string line;
  for (const auto& row : record.rows) {
    line.clear();
    put(line, row.time);
    line += ',' + std::to_string(row.agent_id) + ',';
    put(line, row.position.x());
    line += ',';
    put(line, row.position.y());
    line += ',';
    put(line, row.heading);
    line += ',';
    put(line, row.control.x());
    line += ',';
    put(line, row.control.y());
    line += row.collided ? ",1," : ",0,";
    line += std::to_string(row.dimples) + ',';
    put(line, row.ergodic_metric);
    line += ',';
    if (!std::isnan(row.heterogeneity)) put(line, row.heterogeneity);
    line += '\n';
    out << line;
  }
}

void write_trial_csv(const std::filesystem::path& path, const TrialRecord& record) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_trial_csv(out, record);
  if (!out) throw IoError("write failed for " + path.string());
}

TrialRecord parse_trial_csv(std::istream& in) {
  TrialRecord record;
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw ParseError("empty trial log", 1);
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTrialCsvHeader) throw ParseError("unexpected header", lineno);

  int max_agent = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 11) {
      throw ParseError("expected 11 fields, got " + std::to_string(f.size()), lineno);
    }
    LogRow row;
    row.time = parse_double(f[0], lineno, "time");
    row.agent_id = static_cast<int>(parse_int(f[1], lineno, "agent_id"));
    if (row.agent_id < 0) throw ParseError("negative agent_id", lineno);
    row.position = {parse_double(f[2], lineno, "x"), parse_double(f[3], lineno, "y")};
    row.heading = parse_double(f[4], lineno, "heading");
    row.control = {parse_double(f[5], lineno, "u1"), parse_double(f[6], lineno, "u2")};
    const long collided = parse_int(f[7], lineno, "collided");
    if (collided != 0 && collided != 1) throw ParseError("collided must be 0 or 1", lineno);
    row.collided = collided == 1;
    row.dimples = static_cast<int>(parse_int(f[8], lineno, "dimple"));
    if (row.dimples < 0) throw ParseError("negative dimple count", lineno);
    row.ergodic_metric = parse_double(f[9], lineno, "ergodic_metric");
    if (!f[10].empty()) row.heterogeneity = parse_double(f[10], lineno, "heterogeneity");
    max_agent = std::max(max_agent, row.agent_id);

    // Rows are step-major with agents in id order.
    const std::size_t index = record.rows.size();
    if (record.team_size == 0) {
      if (row.agent_id == 0 && index > 0) {
        record.team_size = static_cast<int>(index);
      } else if (row.agent_id != static_cast<int>(index)) {
        throw ParseError("rows out of step/agent order", lineno);
      }
    }
    if (record.team_size > 0 && row.agent_id != static_cast<int>(index % record.team_size)) {
      throw ParseError("rows out of step/agent order", lineno);
    }
    record.rows.push_back(row);
  }
  if (record.team_size == 0) record.team_size = max_agent + 1;
  if (record.rows.empty()) {
    record.team_size = 0;
    return record;
  }
  if (record.rows.size() % static_cast<std::size_t>(record.team_size) != 0) {
    throw ParseError("incomplete final step", lineno);
  }
  record.steps = record.rows.size() / static_cast<std::size_t>(record.team_size);
  record.dt = record.rows.front().time;
  if (!(record.dt > 0.0)) throw ParseError("first time stamp must be positive", 2);
  for (std::size_t i = 0; i < record.rows.size(); ++i) {
    const auto& row = record.rows[i];
    const std::size_t step = i / static_cast<std::size_t>(record.team_size);
    for (int d = 0; d < row.dimples; ++d) {
      record.dimples.push_back({row.position, row.time, row.agent_id, step});
    }
  }
  return record;
}

TrialRecord read_trial_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return parse_trial_csv(in);
}

} // namespace ergo

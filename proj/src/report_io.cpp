#include <json.hpp>

#include <sstream>
#include <string>

#include "bornlab/csv.hpp"
#include "bornlab/errors.hpp"
#include "bornlab/harness.hpp"

namespace bornlab {

namespace {

using Json = nlohmann::ordered_json;

constexpr std::string_view kCsvHeader =
    "seed,N,sup_deviation,rhs_lower_const,rhs_upper_const,rhs_with_sqrtN_lower,"
    "rhs_with_sqrtN_upper,verdict_lower_const,verdict_upper_const,verdict_with_sqrtN_lower,"
    "verdict_with_sqrtN_upper,bin_count,origin,interval_lo,interval_hi";

Json report_to_json(const BoundReport& r) {
  Json j;
  j["N"] = r.N;
  j["sup_deviation"] = r.sup_deviation;
  j["rhs_lower_const"] = r.rhs_lower_const;
  j["rhs_upper_const"] = r.rhs_upper_const;
  j["rhs_with_sqrtN_lower"] = r.rhs_with_sqrtN_lower;
  j["rhs_with_sqrtN_upper"] = r.rhs_with_sqrtN_upper;
  j["verdicts"] = {{"lower_const", r.verdicts.lower_const},
                   {"upper_const", r.verdicts.upper_const},
                   {"with_sqrtN_lower", r.verdicts.with_sqrtN_lower},
                   {"with_sqrtN_upper", r.verdicts.with_sqrtN_upper}};
  j["scheme"] = {{"bin_count", r.scheme.bin_count},
                 {"origin", std::string(to_string(r.scheme.origin))},
                 {"interval", {{"lo", r.scheme.interval.lo}, {"hi", r.scheme.interval.hi}}}};
  return j;
}

BoundReport report_from_json(const Json& j) {
  BoundReport r;
  r.N = j.at("N").get<std::int64_t>();
  r.sup_deviation = j.at("sup_deviation").get<double>();
  r.rhs_lower_const = j.at("rhs_lower_const").get<double>();
  r.rhs_upper_const = j.at("rhs_upper_const").get<double>();
  r.rhs_with_sqrtN_lower = j.at("rhs_with_sqrtN_lower").get<double>();
  r.rhs_with_sqrtN_upper = j.at("rhs_with_sqrtN_upper").get<double>();
  const auto& v = j.at("verdicts");
  r.verdicts.lower_const = v.at("lower_const").get<bool>();
  r.verdicts.upper_const = v.at("upper_const").get<bool>();
  r.verdicts.with_sqrtN_lower = v.at("with_sqrtN_lower").get<bool>();
  r.verdicts.with_sqrtN_upper = v.at("with_sqrtN_upper").get<bool>();
  const auto& s = j.at("scheme");
  r.scheme.bin_count = s.at("bin_count").get<int>();
  r.scheme.origin = bin_origin_from_string(s.at("origin").get<std::string>());
  r.scheme.interval.lo = s.at("interval").at("lo").get<double>();
  r.scheme.interval.hi = s.at("interval").at("hi").get<double>();
  return r;
}

Json summary_to_json(const ReportSummary& s) {
  return {{"rows", s.rows},
          {"lower_const", s.lower_const},
          {"upper_const", s.upper_const},
          {"with_sqrtN_lower", s.with_sqrtN_lower},
          {"with_sqrtN_upper", s.with_sqrtN_upper}};
}

Json convergence_to_json(const ConvergenceReport& report) {
  Json rows = Json::array();
  for (const auto& row : report.rows) {
    rows.push_back({{"seed", row.seed}, {"report", report_to_json(row.report)}});
  }
  return {{"rows", rows}, {"summary", summary_to_json(report.summary)}};
}

bool parse_bool(const std::string& s, std::size_t line) {
  if (s == "true") return true;
  if (s == "false") return false;
  throw ParseError("expected true or false, found '" + s + "'", line);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  return out;
}

}  // namespace

std::string serialize_report(const ConvergenceReport& report, ReportFormat format) {
  if (format == ReportFormat::json) return convergence_to_json(report).dump(2) + "\n";

  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& row : report.rows) {
    const auto& r = row.report;
    auto b = [](bool v) { return v ? "true" : "false"; };
    out += std::to_string(row.seed) + ',' + std::to_string(r.N) + ',' +
           csv::format_double(r.sup_deviation) + ',' + csv::format_double(r.rhs_lower_const) +
           ',' + csv::format_double(r.rhs_upper_const) + ',' +
           csv::format_double(r.rhs_with_sqrtN_lower) + ',' +
           csv::format_double(r.rhs_with_sqrtN_upper) + ',' + b(r.verdicts.lower_const) + ',' +
           b(r.verdicts.upper_const) + ',' + b(r.verdicts.with_sqrtN_lower) + ',' +
           b(r.verdicts.with_sqrtN_upper) + ',' + std::to_string(r.scheme.bin_count) + ',' +
           std::string(to_string(r.scheme.origin)) + ',' +
           csv::format_double(r.scheme.interval.lo) + ',' +
           csv::format_double(r.scheme.interval.hi) + '\n';
  }
  return out;
}

ConvergenceReport parse_report(std::string_view text, ReportFormat format) {
  ConvergenceReport report;
  if (format == ReportFormat::json) {
    Json j;
    try {
      j = Json::parse(text);
      for (const auto& row : j.at("rows")) {
        report.rows.push_back({row.at("seed").get<std::uint64_t>(), report_from_json(row.at("report"))});
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("report JSON: ") + e.what(), 0);
    }
    report.summary = summarize(report.rows);
    return report;
  }

  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw ParseError("report CSV header mismatch", 1);
  }
  ++line_no;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_line(line);
    if (f.size() != 15) throw ParseError("expected 15 columns", line_no);
    ReportRow row;
    row.seed = static_cast<std::uint64_t>(std::stoull(f[0]));
    auto& r = row.report;
    r.N = csv::parse_integer(f[1], line_no);
    r.sup_deviation = csv::parse_double(f[2], line_no);
    r.rhs_lower_const = csv::parse_double(f[3], line_no);
    r.rhs_upper_const = csv::parse_double(f[4], line_no);
    r.rhs_with_sqrtN_lower = csv::parse_double(f[5], line_no);
    r.rhs_with_sqrtN_upper = csv::parse_double(f[6], line_no);
    r.verdicts.lower_const = parse_bool(f[7], line_no);
    r.verdicts.upper_const = parse_bool(f[8], line_no);
    r.verdicts.with_sqrtN_lower = parse_bool(f[9], line_no);
    r.verdicts.with_sqrtN_upper = parse_bool(f[10], line_no);
    r.scheme.bin_count = static_cast<int>(csv::parse_integer(f[11], line_no));
    r.scheme.origin = bin_origin_from_string(f[12]);
    r.scheme.interval.lo = csv::parse_double(f[13], line_no);
    r.scheme.interval.hi = csv::parse_double(f[14], line_no);
    report.rows.push_back(row);
  }
  report.summary = summarize(report.rows);
  return report;
}

void emit_report(const ConvergenceReport& report, ReportFormat format,
                 const std::filesystem::path& path) {
  csv::write_atomically(path, serialize_report(report, format));
}

std::string serialize_sweep(const SweepResult& result) {
  Json points = Json::array();
  for (const auto& p : result.points) {
    points.push_back({{"N", p.N}, {"median_sup_deviation", p.median_sup_deviation}});
  }
  Json j{{"slope", result.slope}, {"points", points}, {"report", convergence_to_json(result.report)}};
  return j.dump(2) + "\n";
}

}  // namespace bornlab

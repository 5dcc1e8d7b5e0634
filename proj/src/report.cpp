#include "tpl/report.hpp"

#include <charconv>
#include <cmath>
#include <limits>

namespace tpl {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "PASS";
    case Verdict::Fail: return "FAIL";
    case Verdict::Inconclusive: return "INCONCLUSIVE";
    case Verdict::Skipped: return "SKIPPED";
  }
  return "UNKNOWN";
}

double Slack::tolerance_for(double rhs) const { return rel * (1.0 + std::abs(rhs)); }

CheckReport CheckReport::exact(std::string citation, double lhs, double rhs, const Slack& slack,
                               nlohmann::json context) {
  CheckReport r;
  r.citation = std::move(citation);
  r.lhs = lhs;
  r.rhs = rhs;
  r.margin = rhs - lhs;
  r.tolerance = slack.tolerance_for(rhs);
  r.pass = r.margin >= -r.tolerance;
  r.verdict = r.pass ? Verdict::Pass : Verdict::Fail;
  r.context = std::move(context);
  return r;
}

CheckReport CheckReport::unbounded(std::string citation, double lhs, nlohmann::json context) {
  CheckReport r;
  r.citation = std::move(citation);
  r.lhs = lhs;
  r.rhs = std::numeric_limits<double>::infinity();
  r.margin = r.rhs;
  r.tolerance = 0.0;
  r.pass = true;
  r.verdict = Verdict::Skipped;
  r.context = std::move(context);
  r.context["rhs_status"] = "UNBOUNDED";
  return r;
}

CheckReport CheckReport::estimated(std::string citation, const mc::Estimate& lhs, const mc::Estimate& rhs,
                                   nlohmann::json context) {
  CheckReport r;
  r.citation = std::move(citation);
  r.lhs = lhs.ci_high;
  r.rhs = rhs.ci_low;
  r.margin = r.rhs - r.lhs;
  r.tolerance = 0.0;
  r.pass = r.margin >= 0.0;
  if (r.pass) {
    r.verdict = Verdict::Pass;
  } else if (lhs.ci_low > rhs.ci_high) {
    r.verdict = Verdict::Fail;
  } else {
    r.verdict = Verdict::Inconclusive;
  }
  r.context = std::move(context);
  r.context["lhs_estimate"] = to_json(lhs);
  r.context["rhs_estimate"] = to_json(rhs);
  return r;
}

mc::Estimate exact_estimate(double value) {
  mc::Estimate e;
  e.value = e.ci_low = e.ci_high = value;
  e.level = 1.0;
  return e;
}

namespace {

nlohmann::json number_or_string(double x) {
  if (std::isfinite(x)) return x;
  return format_double(x);
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

nlohmann::json to_json(const mc::Estimate& e) {
  nlohmann::json j{{"value", number_or_string(e.value)},
                   {"ci_low", number_or_string(e.ci_low)},
                   {"ci_high", number_or_string(e.ci_high)},
                   {"level", e.level},
                   {"n", e.n}};
  if (e.heavy_tail_warning) j["heavy_tail_warning"] = true;
  if (e.log_value) j["log_value"] = number_or_string(*e.log_value);
  return j;
}

nlohmann::json to_json(const CheckReport& r) {
  return {{"citation", r.citation},
          {"lhs", number_or_string(r.lhs)},
          {"rhs", number_or_string(r.rhs)},
          {"margin", number_or_string(r.margin)},
          {"pass", r.pass},
          {"verdict", to_string(r.verdict)},
          {"tolerance", number_or_string(r.tolerance)},
          {"context", r.context}};
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

void write_csv(std::ostream& os, const std::vector<ReportRow>& rows) {
  os << "citation,suite,fixture,lhs,rhs,margin,verdict,tolerance,context\n";
  for (const auto& row : rows) {
    const CheckReport& r = row.report;
    os << csv_quote(r.citation) << ',' << csv_quote(row.suite) << ',' << csv_quote(row.fixture) << ','
       << format_double(r.lhs) << ',' << format_double(r.rhs) << ',' << format_double(r.margin) << ','
       << to_string(r.verdict) << ',' << format_double(r.tolerance) << ',' << csv_quote(r.context.dump()) << '\n';
  }
}

nlohmann::json rows_to_json(const std::vector<ReportRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& row : rows) {
    nlohmann::json j = to_json(row.report);
    j["suite"] = row.suite;
    j["fixture"] = row.fixture;
    out.push_back(std::move(j));
  }
  return out;
}

}  // namespace tpl

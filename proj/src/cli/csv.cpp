#include <cmath>
#include <cstdio>
#include <sstream>

#include "slp/cli.hpp"

namespace slp::cli {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_real(std::string_view text, std::string_view whole) {
  if (text.empty() || text == "+") return 1.0;
  if (text == "-") return -1.0;
  const std::string s(text);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || !std::isfinite(v)) {
    throw ConfigError("complex: cannot parse '" + std::string(whole) + "'");
  }
  return v;
}

}  // namespace

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

std::vector<std::string> csv_header(int users) {
  std::vector<std::string> cols{"axis_db", "method", "phi", "mean_power", "power_ci95"};
  for (int j = 1; j <= users; ++j) cols.push_back("ser_user_" + std::to_string(j));
  for (int j = 1; j <= users; ++j) cols.push_back("rate_eff_user_" + std::to_string(j));
  cols.insert(cols.end(), {"eta", "trials_ok", "trials_skipped"});
  return cols;
}

std::string results_csv(const std::vector<simulation::SweepResult>& results, int users) {
  std::ostringstream out;
  const auto header = csv_header(users);
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  const auto per_user = [&](const std::vector<double>& v) {
    for (int j = 0; j < users; ++j) {
      const auto ju = static_cast<std::size_t>(j);
      out << ',' << format_number(ju < v.size() ? v[ju] : std::nan(""));
    }
  };
  for (const auto& point : results) {
    for (const auto& m : point.methods) {
      const bool relaxed = m.method.kind == simulation::MethodKind::Cipmr;
      out << format_number(point.axis_db) << ',' << m.method.name() << ','
          << format_number(relaxed ? m.method.phi : std::nan("")) << ','
          << format_number(m.mean_power) << ',' << format_number(m.power_ci95);
      per_user(m.ser);
      per_user(m.rate_eff);
      out << ',' << format_number(m.eta) << ',' << m.trials_ok << ',' << m.trials_skipped << '\n';
    }
  }
  return out.str();
}

numerics::Complex parse_complex(std::string_view text) {
  std::string s;
  for (char c : text) {
    if (c != ' ' && c != '\t') s += c;
  }
  if (s.empty()) throw ConfigError("complex: empty value");
  const std::string_view v(s);
  const char last = v.back();
  if (last != 'i' && last != 'j') return {parse_real(v, text), 0.0};

  const auto body = v.substr(0, v.size() - 1);
  // The real/imaginary split is the last sign that is not an exponent sign.
  std::size_t split = std::string_view::npos;
  for (std::size_t p = body.size(); p-- > 1;) {
    if ((body[p] == '+' || body[p] == '-') && body[p - 1] != 'e' && body[p - 1] != 'E') {
      split = p;
      break;
    }
  }
  if (split == std::string_view::npos) return {0.0, parse_real(body, text)};
  return {parse_real(body.substr(0, split), text), parse_real(body.substr(split), text)};
}

numerics::ComplexVector parse_complex_list(std::string_view text) {
  std::vector<numerics::Complex> values;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    values.push_back(parse_complex(trim(text.substr(start, comma - start))));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  numerics::ComplexVector out(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) out(static_cast<Eigen::Index>(i)) = values[i];
  return out;
}

}  // namespace slp::cli

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
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

std::vector<std::string_view> split_list(std::string_view value) {
  std::vector<std::string_view> items;
  if (trim(value).empty()) return items;
  std::size_t start = 0;
  while (true) {
    const auto comma = value.find(',', start);
    items.push_back(trim(value.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return items;
}

double to_double(std::string_view text, std::string_view key) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw ConfigError(std::string(key) + ": '" + std::string(text) + "' is not a finite number");
  }
  return v;
}

template <typename Int>
Int to_integer(std::string_view text, std::string_view key) {
  text = trim(text);
  Int v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ConfigError(std::string(key) + ": '" + std::string(text) + "' is not an integer");
  }
  return v;
}

std::vector<double> to_doubles(std::string_view value, std::string_view key) {
  std::vector<double> out;
  for (auto item : split_list(value)) out.push_back(to_double(item, key));
  return out;
}

std::string exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join(const std::vector<double>& values) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) s += ", ";
    s += exact(values[i]);
  }
  return s;
}

}  // namespace

double parse_phi(std::string_view text) {
  text = trim(text);
  const auto pi_at = text.find("pi");
  if (pi_at == std::string_view::npos) return to_double(text, "phi");

  double numerator = 1.0;
  const auto coeff = trim(text.substr(0, pi_at));
  if (coeff == "-") {
    numerator = -1.0;
  } else if (!coeff.empty()) {
    auto c = coeff;
    if (c.back() == '*') c = trim(c.substr(0, c.size() - 1));
    numerator = to_double(c, "phi");
  }
  double denominator = 1.0;
  const auto rest = trim(text.substr(pi_at + 2));
  if (!rest.empty()) {
    if (rest.front() != '/') throw ConfigError("phi: '" + std::string(text) + "' is malformed");
    denominator = to_double(rest.substr(1), "phi");
    if (denominator == 0.0) throw ConfigError("phi: division by zero");
  }
  return numerator * std::numbers::pi / denominator;
}

RunConfig parse_config(std::string_view text) {
  RunConfig config;
  auto& sc = config.scenario;
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    if (!seen.insert(key).second) throw ConfigError(key + ": repeated key");

    if (key == "antennas") {
      sc.channel.antennas = to_integer<int>(value, key);
    } else if (key == "users") {
      sc.channel.users = to_integer<int>(value, key);
    } else if (key == "modulation_order") {
      sc.modulation_order = to_integer<int>(value, key);
    } else if (key == "zeta_db") {
      sc.zeta_db = to_doubles(value, key);
    } else if (key == "channel_snr_db") {
      sc.channel_snr_db = to_doubles(value, key);
    } else if (key == "phi") {
      sc.phi.clear();
      for (auto item : split_list(value)) sc.phi.push_back(parse_phi(item));
    } else if (key == "methods") {
      sc.methods.clear();
      for (auto item : split_list(value)) sc.methods.emplace_back(item);
    } else if (key == "trials") {
      sc.trials = to_integer<int>(value, key);
    } else if (key == "symbols_per_channel") {
      sc.symbols_per_channel = to_integer<int>(value, key);
    } else if (key == "seed") {
      sc.seed = to_integer<std::uint64_t>(value, key);
    } else if (key == "noise_variance") {
      sc.noise_variance = to_double(value, key);
    } else if (key == "channel_variance") {
      sc.channel.variance = to_double(value, key);
    } else if (key == "grid_points") {
      sc.grid_points = to_integer<int>(value, key);
    } else if (key == "mmse_reference_power") {
      sc.mmse_reference_power = to_double(value, key);
    } else if (key == "output_path") {
      config.output_path = std::string(value);
    } else {
      throw ConfigError(key + ": unknown key");
    }
  }
  try {
    sc.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot read '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const RunConfig& config) {
  const auto& sc = config.scenario;
  std::ostringstream out;
  out << "antennas = " << sc.channel.antennas << '\n'
      << "users = " << sc.channel.users << '\n'
      << "modulation_order = " << sc.modulation_order << '\n'
      << "zeta_db = " << join(sc.zeta_db) << '\n'
      << "channel_snr_db = " << join(sc.channel_snr_db) << '\n'
      << "phi = " << join(sc.phi) << '\n'
      << "methods = ";
  for (std::size_t i = 0; i < sc.methods.size(); ++i) out << (i ? ", " : "") << sc.methods[i];
  out << '\n'
      << "trials = " << sc.trials << '\n'
      << "symbols_per_channel = " << sc.symbols_per_channel << '\n'
      << "seed = " << sc.seed << '\n'
      << "noise_variance = " << exact(sc.noise_variance) << '\n'
      << "channel_variance = " << exact(sc.channel.variance) << '\n'
      << "grid_points = " << sc.grid_points << '\n'
      << "mmse_reference_power = " << exact(sc.mmse_reference_power) << '\n';
  if (!config.output_path.empty()) out << "output_path = " << config.output_path << '\n';
  return out.str();
}

}  // namespace slp::cli

#include "touchreg/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>

#include "touchreg/error.hpp"

namespace touchreg {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& v, std::size_t line_no, const std::string& key) {
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw Error(ErrorKind::Parse, "config line " + std::to_string(line_no) + ": '" + key +
                                      "' has invalid value '" + v + "'");
  return out;
}

}  // namespace

AppConfig parse_config(std::istream& in, AppConfig cfg) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorKind::Parse, "config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    auto& s = cfg.solver;
    if (key == "max_iterations") s.max_iterations = parse_number<int>(val, line_no, key);
    else if (key == "initial_damping") s.initial_damping = parse_number<double>(val, line_no, key);
    else if (key == "damping_up") s.damping_up = parse_number<double>(val, line_no, key);
    else if (key == "damping_down") s.damping_down = parse_number<double>(val, line_no, key);
    else if (key == "convergence_tol") s.convergence_tol = parse_number<double>(val, line_no, key);
    else if (key == "huber_delta") s.huber_delta = parse_number<double>(val, line_no, key);
    else if (key == "multistart_count") s.multistart_count = parse_number<int>(val, line_no, key);
    else if (key == "rng_seed") s.rng_seed = parse_number<std::uint64_t>(val, line_no, key);
    else if (key == "max_skew") cfg.max_skew = parse_number<double>(val, line_no, key);
    else if (key == "sequence_length") cfg.sequence_length = parse_number<std::size_t>(val, line_no, key);
    else if (key == "conditioning_offset") {
      if (val == "local_backward") cfg.conditioning_offset = ConditioningOffset::LocalBackward;
      else if (val == "world_up") cfg.conditioning_offset = ConditioningOffset::WorldUp;
      else
        throw Error(ErrorKind::Parse, "config line " + std::to_string(line_no) +
                                          ": conditioning_offset must be local_backward or world_up");
    } else {
      throw Error(ErrorKind::Parse, "config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  try {
    cfg.solver.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::Parse, std::string("config: ") + e.what());
  }
  if (!(cfg.max_skew >= 0.0) || !std::isfinite(cfg.max_skew))
    throw Error(ErrorKind::Parse, "config: max_skew must be non-negative");
  if (cfg.sequence_length < 1) throw Error(ErrorKind::Parse, "config: sequence_length must be at least 1");
  return cfg;
}

AppConfig load_config(const std::filesystem::path& path, AppConfig base) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open config '" + path.string() + "'");
  try {
    return parse_config(in, base);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

}  // namespace touchreg

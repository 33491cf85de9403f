#include "segdiff/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace segdiff {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t");
  return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size() || !std::isfinite(v)) throw std::invalid_argument("junk");
    return v;
  } catch (const std::exception&) {
    raise(errc::bad_config, "bad numeric value for '" + key + "': " + value);
  }
}

int parse_int(const std::string& key, const std::string& value) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    raise(errc::bad_config, "bad integer value for '" + key + "': " + value);
  }
  return v;
}

// %.17g keeps doubles bit-exact across a dump/parse cycle
std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void PipelineConfig::validate() const {
  auto fail = [](const std::string& what) { raise(errc::bad_config, what); };
  if (!(sigma > 0.0)) fail("sigma must be > 0");
  if (!(seed_frac > 0.0) || seed_frac > 1.0) fail("seed_frac must be in (0,1]");
  if (bg_thresh < 0.0 || bg_thresh >= 1.0) fail("bg_thresh must be in [0,1)");
  if (accept_thresh < 0.0 || accept_thresh >= 1.0) fail("accept_thresh must be in [0,1)");
  if (slic_k < 1) fail("slic_k must be >= 1");
  if (slic_compactness < 0.0) fail("slic_compactness must be >= 0");
  if (slic_iters < 1) fail("slic_iters must be >= 1");
  if (!(solver_tol > 0.0)) fail("solver_tol must be > 0");
  if (jacobi_iters < 1) fail("jacobi_iters must be >= 1");
}

PipelineConfig parse_config_text(const std::string& text) {
  PipelineConfig config;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      raise(errc::bad_config, "line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty() || value.empty()) {
      raise(errc::bad_config, "line " + std::to_string(line_no) + ": expected key = value");
    }

    if (key == "sigma") {
      config.sigma = parse_double(key, value);
    } else if (key == "seed_frac") {
      config.seed_frac = parse_double(key, value);
    } else if (key == "bg_thresh") {
      config.bg_thresh = parse_double(key, value);
    } else if (key == "accept_thresh") {
      config.accept_thresh = parse_double(key, value);
    } else if (key == "slic_k") {
      config.slic_k = parse_int(key, value);
    } else if (key == "slic_compactness") {
      config.slic_compactness = parse_double(key, value);
    } else if (key == "slic_iters") {
      config.slic_iters = parse_int(key, value);
    } else if (key == "solver_tol") {
      config.solver_tol = parse_double(key, value);
    } else if (key == "solver_max_iters") {
      config.solver_max_iters = parse_int(key, value);
    } else if (key == "affinity_norm") {
      if (value == "linear") {
        config.affinity_norm = AffinityNorm::linear;
      } else if (value == "squared") {
        config.affinity_norm = AffinityNorm::squared;
      } else {
        raise(errc::bad_config, "affinity_norm must be 'linear' or 'squared'");
      }
    } else if (key == "diffusion_mode") {
      if (value == "clamped") {
        config.diffusion_mode = DiffusionMode::clamped;
      } else if (value == "jacobi") {
        config.diffusion_mode = DiffusionMode::jacobi;
      } else {
        raise(errc::bad_config, "diffusion_mode must be 'clamped' or 'jacobi'");
      }
    } else if (key == "jacobi_iters") {
      config.jacobi_iters = parse_int(key, value);
    } else {
      raise(errc::bad_config, "unknown config key '" + key + "'");
    }
  }
  config.validate();
  return config;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    raise(errc::io_failure, "cannot open " + path.string());
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

std::string dump_config(const PipelineConfig& c) {
  std::string out;
  out += "sigma = " + format_double(c.sigma) + "\n";
  out += "seed_frac = " + format_double(c.seed_frac) + "\n";
  out += "bg_thresh = " + format_double(c.bg_thresh) + "\n";
  out += "accept_thresh = " + format_double(c.accept_thresh) + "\n";
  out += "slic_k = " + std::to_string(c.slic_k) + "\n";
  out += "slic_compactness = " + format_double(c.slic_compactness) + "\n";
  out += "slic_iters = " + std::to_string(c.slic_iters) + "\n";
  out += "solver_tol = " + format_double(c.solver_tol) + "\n";
  out += "solver_max_iters = " + std::to_string(c.solver_max_iters) + "\n";
  out += std::string("affinity_norm = ") +
         (c.affinity_norm == AffinityNorm::linear ? "linear" : "squared") + "\n";
  out += std::string("diffusion_mode = ") +
         (c.diffusion_mode == DiffusionMode::clamped ? "clamped" : "jacobi") + "\n";
  out += "jacobi_iters = " + std::to_string(c.jacobi_iters) + "\n";
  return out;
}

}  // namespace segdiff

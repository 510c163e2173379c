#include "pdyn/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <thread>

#include "pdyn/map.hpp"

namespace pdyn {

namespace {

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!trim(cur).empty() || !out.empty()) out.push_back(trim(cur));
  return out;
}

double parse_real(const std::string& s, const std::string& what) {
  try {
    size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw config_error("invalid " + what + ": '" + s + "'");
  }
}

long parse_int(const std::string& s, const std::string& what) {
  try {
    size_t used = 0;
    long v = std::stol(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw config_error("invalid " + what + ": '" + s + "'");
  }
}

// "a:b:step" range or comma list
std::vector<double> parse_grid(const std::string& s) {
  std::vector<double> out;
  if (s.find(':') != std::string::npos) {
    auto parts = split(s, ':');
    if (parts.size() != 3) throw config_error("range needs start:stop:step");
    double a = parse_real(parts[0], "range start");
    double b = parse_real(parts[1], "range stop");
    double st = parse_real(parts[2], "range step");
    if (!(st > 0.0) || b < a) throw config_error("bad range: " + s);
    for (double v = a; v <= b + 1e-9; v += st) out.push_back(v);
    return out;
  }
  for (const std::string& p : split(s, ','))
    if (!p.empty()) out.push_back(parse_real(p, "grid value"));
  return out;
}

}  // namespace

cplx parse_complex_literal(const std::string& text) {
  ExprPtr e;
  try {
    e = parse(text);
  } catch (const parse_error& pe) {
    throw config_error("invalid complex literal '" + text + "': " + pe.what());
  }
  if (contains_var(*e))
    throw config_error("complex literal must not reference z: " + text);
  CompiledMap m(std::move(e), PunctureSet({cplx(0.0, 0.0)}));
  EvalResult r = m.eval(SpherePoint::finite(0.0, 0.0));
  if (!r.value.is_finite())
    throw config_error("complex literal does not evaluate finitely: " + text);
  return r.value.value();
}

std::string format_complex(const cplx& v) {
  std::string s = format_double(v.real());
  if (v.imag() != 0.0) {
    if (v.imag() > 0)
      s += "+" + format_double(v.imag()) + "i";
    else
      s += "-" + format_double(-v.imag()) + "i";
  }
  return s;
}

int RunConfig::resolved_threads() const {
  if (threads > 0) return threads;
  unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

const ItineraryPattern* RunConfig::find_itinerary(const std::string& name) const {
  for (const auto& [n, e] : itineraries)
    if (n == name) return &e;
  return nullptr;
}

void apply_override(RunConfig& cfg, const std::string& dotted_key,
                    const std::string& value) {
  size_t dot = dotted_key.find('.');
  if (dot == std::string::npos)
    throw config_error("override key must be section.key: " + dotted_key);
  std::string section = dotted_key.substr(0, dot);
  std::string key = dotted_key.substr(dot + 1);

  if (section == "map") {
    if (key == "expr") { cfg.map_text = value; return; }
    if (key == "punctures") {
      cfg.punctures.clear();
      for (const std::string& p : split(value, ','))
        if (!p.empty()) cfg.punctures.push_back(parse_complex_literal(p));
      return;
    }
  } else if (section == "window") {
    if (key == "center") { cfg.window.center = parse_complex_literal(value); return; }
    if (key == "width") { cfg.window.width = parse_real(value, key); return; }
    if (key == "height") { cfg.window.height = parse_real(value, key); return; }
    if (key == "cols") { cfg.window.cols = static_cast<int>(parse_int(value, key)); return; }
    if (key == "rows") { cfg.window.rows = static_cast<int>(parse_int(value, key)); return; }
  } else if (section == "classify") {
    if (key == "R_start") { cfg.classify.R_start = parse_real(value, key); return; }
    if (key == "max_depth") { cfg.classify.max_depth = static_cast<size_t>(parse_int(value, key)); return; }
    if (key == "bounded_threshold") { cfg.classify.bounded_threshold = parse_real(value, key); return; }
    if (key == "max_offset") { cfg.classify.max_offset = static_cast<size_t>(parse_int(value, key)); return; }
  } else if (section == "itineraries") {
    ItineraryPattern e = parse_itinerary(value);
    for (auto& [n, old] : cfg.itineraries)
      if (n == key) { old = e; return; }
    cfg.itineraries.emplace_back(key, e);
    return;
  } else if (section == "modulus") {
    if (key == "r_grid") { cfg.r_grid = parse_grid(value); return; }
    if (key == "growth_radii") { cfg.growth_radii = parse_grid(value); return; }
  } else if (section == "mmseq") {
    if (key == "e") { cfg.mmseq_e = parse_itinerary(value); return; }
    if (key == "R") { cfg.mmseq_R = parse_real(value, key); return; }
    if (key == "depth") { cfg.mmseq_depth = static_cast<size_t>(parse_int(value, key)); return; }
  } else if (section == "verify") {
    if (key == "checks") { cfg.checks = split(value, ','); return; }
    if (key == "en_R") { cfg.en_R = parse_real(value, key); return; }
    if (key == "en_nmax") { cfg.en_nmax = static_cast<int>(parse_int(value, key)); return; }
    if (key == "boundary_tol_px") { cfg.boundary_tol_px = parse_real(value, key); return; }
    if (key == "boundary_power") { cfg.boundary_power = static_cast<int>(parse_int(value, key)); return; }
    if (key == "invariance_points") { cfg.invariance_points = static_cast<int>(parse_int(value, key)); return; }
  } else if (section == "output") {
    if (key == "directory") { cfg.out_directory = value; return; }
    if (key == "stem") { cfg.out_stem = value; return; }
    if (key == "formats") { cfg.out_formats = split(value, ','); return; }
    if (key == "supersample") { cfg.supersample = static_cast<int>(parse_int(value, key)); return; }
  } else if (section == "run") {
    if (key == "threads") {
      if (value == "auto") { cfg.threads = 0; return; }
      cfg.threads = static_cast<int>(parse_int(value, key));
      return;
    }
    if (key == "seed") { cfg.seed = static_cast<uint64_t>(parse_int(value, key)); return; }
  }
  throw config_error("unknown configuration key: " + dotted_key);
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line, section;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw config_error("line " + std::to_string(lineno) + ": bad section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw config_error("line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (section.empty())
      throw config_error("line " + std::to_string(lineno) + ": key outside a section");
    apply_override(cfg, section + "." + key, value);
  }
  return cfg;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error("cannot open config file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return parse_config(os.str());
}

void RunConfig::validate() const {
  window.validate();
  PunctureSet S(punctures);
  if (!(classify.bounded_threshold >= S.rho_S()))
    throw precondition_error("classify.bounded_threshold below rho_S");
  if (!(classify.R_start > classify.bounded_threshold))
    throw precondition_error("classify.R_start must exceed bounded_threshold");
  if (threads < 0) throw config_error("run.threads must be positive or auto");
  if (supersample != 1 && supersample != 2)
    throw config_error("output.supersample must be 1 or 2");
  // expression must parse against the declared punctures
  compile_map(map_text, S);
}

std::string RunConfig::normalized(bool include_run) const {
  std::ostringstream os;
  os << "[map]\n";
  os << "expr = " << map_text << "\n";
  os << "punctures = ";
  for (size_t i = 0; i < punctures.size(); ++i)
    os << (i ? "," : "") << format_complex(punctures[i]);
  os << "\n\n[window]\n";
  os << "center = " << format_complex(window.center) << "\n";
  os << "width = " << format_double(window.width) << "\n";
  os << "height = " << format_double(window.height) << "\n";
  os << "cols = " << window.cols << "\n";
  os << "rows = " << window.rows << "\n";
  os << "\n[classify]\n";
  os << "R_start = " << format_double(classify.R_start) << "\n";
  os << "max_depth = " << classify.max_depth << "\n";
  os << "bounded_threshold = " << format_double(classify.bounded_threshold) << "\n";
  os << "max_offset = " << classify.max_offset << "\n";
  if (!itineraries.empty()) {
    os << "\n[itineraries]\n";
    for (const auto& [n, e] : itineraries)
      os << n << " = " << format_itinerary(e) << "\n";
  }
  os << "\n[output]\n";
  os << "directory = " << out_directory << "\n";
  os << "stem = " << out_stem << "\n";
  os << "formats = ";
  for (size_t i = 0; i < out_formats.size(); ++i)
    os << (i ? "," : "") << out_formats[i];
  os << "\n";
  os << "supersample = " << supersample << "\n";
  if (include_run) {
    os << "\n[run]\n";
    os << "threads = " << (threads == 0 ? std::string("auto") : std::to_string(threads)) << "\n";
    os << "seed = " << seed << "\n";
  }
  return os.str();
}

}  // namespace pdyn

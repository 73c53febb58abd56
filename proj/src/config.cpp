#include "gnse/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace gnse {

int RunConfig::n_steps() const {
  const double steps = T / dt;
  return static_cast<int>(std::lround(steps));
}

void RunConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("config: " + msg); };
  const bool pow2 = n >= 8 && n <= 128 && (n & (n - 1)) == 0;
  if (!pow2) fail("grid.n must be a power of two between 8 and 128");
  if (weight != "constant" && weight != "sine" && weight != "tabulated")
    fail("grid.weight must be constant, sine or tabulated");
  if (weight == "constant" && !(weight_c > 0.0)) fail("grid.weight_c must be positive");
  if (weight == "sine" && !(std::abs(weight_eps) < 1.0)) fail("grid.weight_eps needs |eps| < 1");
  if (weight == "tabulated" && weight_file.empty()) fail("grid.weight_file required");
  if (!(alpha > 0.0) || alpha > 1.0) fail("frac.alpha must lie in (0,1]");
  if (!(alpha1 > 0.0) || !(alpha1 < alpha)) fail("frac.alpha1 must satisfy 0 < alpha1 < alpha");
  if (!(nu > 0.0)) fail("solver.nu must be positive");
  if (!(dt > 0.0)) fail("solver.dt must be positive");
  if (!(T > 0.0)) fail("solver.T must be positive");
  const int ns = n_steps();
  if (ns < 1 || std::abs(ns * dt - T) > 1e-9 * T)
    fail("solver.T must be an integer multiple of solver.dt");
  if (ns > 4096) fail("solver.T/dt must not exceed 4096 steps");
  if (m < 1 || m > 64) fail("solver.m must lie in [1, 64]");
  if (!(picard_tol > 0.0)) fail("solver.picard_tol must be positive");
  if (picard_max < 1) fail("solver.picard_max must be >= 1");
  if (!(slack >= 1.0)) fail("solver.slack must be >= 1");
  if (threads < 1) fail("solver.threads must be >= 1");
  if (forcing != "zero" && forcing != "mode") fail("forcing.recipe must be zero or mode");
  if (forcing == "mode" && (forcing_k < 1 || forcing_k > m)) fail("forcing.mode_k out of range");
  if (initial != "zero" && initial != "mode" && initial != "stream")
    fail("initial.recipe must be zero, mode or stream");
  if (initial == "mode" && (initial_k < 1 || initial_k > m)) fail("initial.mode_k out of range");
  if (d_c < 1 || d_c > 4) fail("control.d_c must lie in [1, 4]");
  if (static_cast<int>(actuators.size()) != d_c) fail("control.actuators must list d_c modes");
  for (int a : actuators)
    if (a < 1 || a > m) fail("control.actuators entries must lie in [1, m]");
  if (!(kappa > 0.0)) fail("control.kappa must be positive");
  if (!(box_lo <= box_hi)) fail("control.box_lo must not exceed control.box_hi");
  if (max_iters < 0) fail("control.max_iters must be >= 0");
  if (!(ctrl_tol > 0.0)) fail("control.tol must be positive");
  if (!(fd_eps > 0.0)) fail("control.fd_eps must be positive");
  if (!(armijo_c > 0.0 && armijo_c < 1.0)) fail("control.armijo_c must lie in (0,1)");
  if (!(armijo_shrink > 0.0 && armijo_shrink < 1.0)) fail("control.armijo_shrink in (0,1)");
  if (!(sigma0 > 0.0)) fail("control.sigma0 must be positive");
  if (target != "recovery" && target != "unforced" && target != "zero")
    fail("control.target must be recovery, unforced or zero");
  if (out_dir.empty()) fail("output.dir must not be empty");
}

namespace {

struct RawEntry {
  std::string value;
  int line;
};

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// Declarative key table: pulls one raw entry, converts, removes it.
class Extractor {
 public:
  explicit Extractor(std::map<std::string, RawEntry> raw) : raw_(std::move(raw)) {}

  void number(const std::string& key, double& out) {
    take(key, [&](const std::string& v, int line) {
      std::size_t pos = 0;
      double parsed = 0.0;
      try {
        parsed = std::stod(v, &pos);
      } catch (const std::exception&) {
        throw ConfigError("config line " + std::to_string(line) + ": " + key +
                          " expects a number, got '" + v + "'");
      }
      if (pos != v.size())
        throw ConfigError("config line " + std::to_string(line) + ": trailing junk in " + key);
      out = parsed;
    });
  }

  void integer(const std::string& key, int& out) {
    double d = out;
    bool found = false;
    take(key, [&](const std::string& v, int line) {
      try {
        std::size_t pos = 0;
        d = std::stod(v, &pos);
        if (pos != v.size() || d != std::floor(d)) throw std::invalid_argument(v);
      } catch (const std::exception&) {
        throw ConfigError("config line " + std::to_string(line) + ": " + key +
                          " expects an integer, got '" + v + "'");
      }
      found = true;
    });
    if (found) out = static_cast<int>(d);
  }

  void text(const std::string& key, std::string& out) {
    take(key, [&](const std::string& v, int) { out = v; });
  }

  void int_list(const std::string& key, std::vector<int>& out) {
    take(key, [&](const std::string& v, int line) {
      out.clear();
      std::stringstream ss(v);
      std::string item;
      while (std::getline(ss, item, ',')) {
        item = trim(item);
        try {
          out.push_back(std::stoi(item));
        } catch (const std::exception&) {
          throw ConfigError("config line " + std::to_string(line) + ": " + key +
                            " expects a comma-separated integer list");
        }
      }
    });
  }

  bool seen(const std::string& key) const { return seen_.count(key) > 0; }

  void finish() const {
    if (raw_.empty()) return;
    const auto& [key, entry] = *raw_.begin();
    throw ConfigError("config line " + std::to_string(entry.line) + ": unknown key '" + key + "'");
  }

 private:
  void take(const std::string& key, const std::function<void(const std::string&, int)>& fn) {
    const auto it = raw_.find(key);
    if (it == raw_.end()) return;
    fn(it->second.value, it->second.line);
    seen_.insert(key);
    raw_.erase(it);
  }

  std::map<std::string, RawEntry> raw_;
  std::set<std::string> seen_;
};

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  static const std::set<std::string> kSections = {"grid",    "frac",    "solver", "forcing",
                                                  "initial", "control", "output"};
  std::map<std::string, RawEntry> raw;
  std::string section;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string s = trim(line);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    if (s.front() == '[') {
      if (s.back() != ']')
        throw ConfigError("config line " + std::to_string(lineno) + ": malformed section header");
      section = trim(s.substr(1, s.size() - 2));
      if (!kSections.count(section))
        throw ConfigError("config line " + std::to_string(lineno) + ": unknown section '" +
                          section + "'");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    if (section.empty())
      throw ConfigError("config line " + std::to_string(lineno) + ": key outside any section");
    const std::string key = section + "." + trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (raw.count(key))
      throw ConfigError("config line " + std::to_string(lineno) + ": duplicate key '" + key +
                        "' (first at line " + std::to_string(raw[key].line) + ")");
    raw[key] = RawEntry{value, lineno};
  }

  RunConfig cfg;
  Extractor ex(std::move(raw));
  ex.integer("grid.n", cfg.n);
  ex.text("grid.weight", cfg.weight);
  ex.number("grid.weight_c", cfg.weight_c);
  ex.number("grid.weight_eps", cfg.weight_eps);
  ex.text("grid.weight_file", cfg.weight_file);
  ex.number("frac.alpha", cfg.alpha);
  ex.number("frac.alpha1", cfg.alpha1);
  const bool alpha1_given = ex.seen("frac.alpha1");
  ex.number("solver.nu", cfg.nu);
  ex.number("solver.dt", cfg.dt);
  ex.number("solver.T", cfg.T);
  ex.integer("solver.m", cfg.m);
  ex.number("solver.picard_tol", cfg.picard_tol);
  ex.integer("solver.picard_max", cfg.picard_max);
  ex.number("solver.slack", cfg.slack);
  ex.integer("solver.threads", cfg.threads);
  ex.text("forcing.recipe", cfg.forcing);
  ex.integer("forcing.mode_k", cfg.forcing_k);
  ex.number("forcing.amp", cfg.forcing_amp);
  ex.number("forcing.freq", cfg.forcing_freq);
  ex.text("initial.recipe", cfg.initial);
  ex.integer("initial.mode_k", cfg.initial_k);
  ex.number("initial.amp", cfg.initial_amp);
  ex.integer("control.d_c", cfg.d_c);
  ex.int_list("control.actuators", cfg.actuators);
  ex.number("control.kappa", cfg.kappa);
  ex.number("control.box_lo", cfg.box_lo);
  ex.number("control.box_hi", cfg.box_hi);
  ex.integer("control.max_iters", cfg.max_iters);
  ex.number("control.tol", cfg.ctrl_tol);
  ex.number("control.fd_eps", cfg.fd_eps);
  ex.number("control.armijo_c", cfg.armijo_c);
  ex.number("control.armijo_shrink", cfg.armijo_shrink);
  ex.number("control.sigma0", cfg.sigma0);
  ex.text("control.target", cfg.target);
  ex.number("control.wstar_amp", cfg.wstar_amp);
  ex.text("output.dir", cfg.out_dir);
  ex.finish();

  if (!alpha1_given) cfg.alpha1 = cfg.alpha / 2.0;
  cfg.validate();
  return cfg;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::map<std::string, std::string> RunConfig::flat() const {
  auto num = [](double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
  };
  std::map<std::string, std::string> f;
  f["grid.n"] = std::to_string(n);
  f["grid.weight"] = weight;
  f["grid.weight_c"] = num(weight_c);
  f["grid.weight_eps"] = num(weight_eps);
  if (!weight_file.empty()) f["grid.weight_file"] = weight_file;
  f["frac.alpha"] = num(alpha);
  f["frac.alpha1"] = num(alpha1);
  f["solver.nu"] = num(nu);
  f["solver.dt"] = num(dt);
  f["solver.T"] = num(T);
  f["solver.m"] = std::to_string(m);
  f["solver.picard_tol"] = num(picard_tol);
  f["solver.picard_max"] = std::to_string(picard_max);
  f["solver.slack"] = num(slack);
  f["solver.threads"] = std::to_string(threads);
  f["forcing.recipe"] = forcing;
  f["forcing.mode_k"] = std::to_string(forcing_k);
  f["forcing.amp"] = num(forcing_amp);
  f["forcing.freq"] = num(forcing_freq);
  f["initial.recipe"] = initial;
  f["initial.mode_k"] = std::to_string(initial_k);
  f["initial.amp"] = num(initial_amp);
  f["control.d_c"] = std::to_string(d_c);
  std::string acts;
  for (std::size_t i = 0; i < actuators.size(); ++i)
    acts += (i ? "," : "") + std::to_string(actuators[i]);
  f["control.actuators"] = acts;
  f["control.kappa"] = num(kappa);
  f["control.box_lo"] = num(box_lo);
  f["control.box_hi"] = num(box_hi);
  f["control.max_iters"] = std::to_string(max_iters);
  f["control.tol"] = num(ctrl_tol);
  f["control.fd_eps"] = num(fd_eps);
  f["control.armijo_c"] = num(armijo_c);
  f["control.armijo_shrink"] = num(armijo_shrink);
  f["control.sigma0"] = num(sigma0);
  f["control.target"] = target;
  f["control.wstar_amp"] = num(wstar_amp);
  f["output.dir"] = out_dir;
  return f;
}

std::string config_reference() {
  return
      "[grid]    n=32 (power of two, 8..128)   weight=sine|constant|tabulated\n"
      "          weight_c=1.0  weight_eps=0.1  weight_file=<csv of x,y,value>\n"
      "[frac]    alpha=0.5 (0,1]   alpha1=alpha/2 (0,alpha)\n"
      "[solver]  nu=0.05  dt=1/256  T=0.5 (integer multiple of dt, <= 4096 steps)\n"
      "          m=8 (<=64)  picard_tol=1e-10  picard_max=50  slack=1.10  threads=1\n"
      "[forcing] recipe=mode|zero  mode_k=2  amp=0.05  freq=1.0\n"
      "          (eta_k(t) = amp cos(2 pi freq t) on mode_k)\n"
      "[initial] recipe=stream|mode|zero  mode_k=1  amp=0.1\n"
      "          (stream: fixed smooth stream-function field scaled by amp)\n"
      "[control] d_c=1 (<=4)  actuators=1  kappa=1e-6  box_lo=-2  box_hi=2\n"
      "          max_iters=200  tol=1e-8  fd_eps=1e-6  armijo_c=1e-4\n"
      "          armijo_shrink=0.5  sigma0=1.0  target=recovery|unforced|zero\n"
      "          wstar_amp=0.8\n"
      "[output]  dir=out  (env GNSE_OUT overrides)\n";
}

}  // namespace gnse

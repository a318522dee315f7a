#include "memdd/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "memdd/errors.hpp"

namespace memdd {

namespace {

const std::pair<Experiment, const char*> kExperimentNames[] = {
    {Experiment::transient_full, "transient-full"},
    {Experiment::transient_reduced, "transient-reduced"},
    {Experiment::steady, "steady"},
    {Experiment::limit_study, "limit-study"},
    {Experiment::de_sweep, "de-sweep"},
    {Experiment::bias_sweep, "bias-sweep"},
    {Experiment::iv_sweep, "iv-sweep"},
    {Experiment::verify_lemmas, "verify-lemmas"},
};

const std::pair<BiasKind, const char*> kBiasNames[] = {
    {BiasKind::constant, "constant"},
    {BiasKind::ramp, "ramp"},
    {BiasKind::sinusoidal, "sinusoidal"},
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& v, const std::string& key, int line) {
  double out = 0.0;
  const char* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end || v.empty()) {
    throw ConfigError("'" + key + "' expects a number, got '" + v + "'", line);
  }
  if (!std::isfinite(out)) throw ConfigError("'" + key + "' must be finite", line);
  return out;
}

int to_int(const std::string& v, const std::string& key, int line) {
  int out = 0;
  const char* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end || v.empty()) {
    throw ConfigError("'" + key + "' expects an integer, got '" + v + "'", line);
  }
  return out;
}

std::vector<double> to_list(const std::string& v, const std::string& key, int line) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(trim(item), key, line));
  if (out.empty()) throw ConfigError("'" + key + "' expects a comma-separated list", line);
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += fmt(v[i]);
  }
  return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string& key,
                                  const std::string& value, int line)>;

double positive(double v, const std::string& key, int line) {
  if (!(v > 0.0)) throw ConfigError("'" + key + "' must be positive", line);
  return v;
}

double nonnegative(double v, const std::string& key, int line) {
  if (!(v >= 0.0)) throw ConfigError("'" + key + "' must be nonnegative", line);
  return v;
}

const std::map<std::string, std::map<std::string, Setter>>& schema() {
  static const std::map<std::string, std::map<std::string, Setter>> table = [] {
    std::map<std::string, std::map<std::string, Setter>> t;
    auto num = [](double ExperimentConfig::*field, bool require_positive) -> Setter {
      return [field, require_positive](ExperimentConfig& c, const std::string& key,
                                       const std::string& v, int line) {
        double x = to_double(v, key, line);
        if (require_positive) positive(x, key, line);
        c.*field = x;
      };
    };
    auto scale = [](double ScalingBlock::*field) -> Setter {
      return [field](ExperimentConfig& c, const std::string& key, const std::string& v, int line) {
        c.scaling.*field = positive(to_double(v, key, line), key, line);
      };
    };
    auto& dev = t["device"];
    dev["lambda2"] = [](ExperimentConfig& c, const std::string& key, const std::string& v, int line) {
      c.lambda2 = positive(to_double(v, key, line), key, line);
    };
    dev["eps"] = num(&ExperimentConfig::eps, true);
    dev["A"] = num(&ExperimentConfig::A, false);
    dev["D_init"] = [](ExperimentConfig& c, const std::string& key, const std::string& v, int line) {
      c.D_init = positive(to_double(v, key, line), key, line);
    };
    dev["D_e"] = num(&ExperimentConfig::D_e, false);
    dev["eps_s"] = scale(&ScalingBlock::eps_s);
    dev["U_T"] = scale(&ScalingBlock::U_T);
    dev["q"] = scale(&ScalingBlock::q);
    dev["L"] = scale(&ScalingBlock::L);
    dev["n_i"] = scale(&ScalingBlock::n_i);
    dev["J0"] = scale(&ScalingBlock::J0);
    dev["eps_list"] = [](ExperimentConfig& c, const std::string& key, const std::string& v, int line) {
      auto list = to_list(v, key, line);
      for (double e : list) positive(e, key, line);
      c.eps_list = std::move(list);
    };
    dev["de_ratios"] = [](ExperimentConfig& c, const std::string& key, const std::string& v, int line) {
      auto list = to_list(v, key, line);
      for (double e : list) positive(e, key, line);
      c.de_ratios = std::move(list);
    };

    t["grid"]["N"] = [](ExperimentConfig& c, const std::string& key, const std::string& v, int line) {
      c.N = to_int(v, key, line);
      if (c.N < 3) throw ConfigError("'" + key + "' must be at least 3", line);
    };

    auto& time = t["time"];
    time["T_f"] = [](ExperimentConfig& c, const std::string& key, const std::string& v, int line) {
      c.T_f = nonnegative(to_double(v, key, line), key, line);
    };
    time["M"] = [](ExperimentConfig& c, const std::string& key, const std::string& v, int line) {
      c.M = to_int(v, key, line);
      if (*c.M < 1) throw ConfigError("'M' must be at least 1", line);
    };
    time["max_halvings"] = [](ExperimentConfig& c, const std::string& key, const std::string& v, int line) {
      c.max_halvings = to_int(v, key, line);
      if (c.max_halvings < 0) throw ConfigError("'max_halvings' must be nonnegative", line);
    };

    auto& bias = t["bias"];
    bias["kind"] = [](ExperimentConfig& c, const std::string&, const std::string& v, int line) {
      for (const auto& [kind, name] : kBiasNames) {
        if (v == name) {
          c.bias_kind = kind;
          return;
        }
      }
      throw ConfigError("unknown bias kind '" + v + "'", line);
    };
    bias["U0"] = num(&ExperimentConfig::U0, false);
    bias["UL"] = num(&ExperimentConfig::UL, false);
    bias["UL_end"] = num(&ExperimentConfig::UL_end, false);
    bias["amplitude"] = num(&ExperimentConfig::amplitude, false);
    bias["periods"] = num(&ExperimentConfig::periods, true);
    bias["voltages"] = [](ExperimentConfig& c, const std::string& key, const std::string& v, int line) {
      c.voltages = to_list(v, key, line);
    };

    auto& out = t["output"];
    out["dir"] = [](ExperimentConfig& c, const std::string& key, const std::string& v, int line) {
      if (v.empty()) throw ConfigError("'" + key + "' must not be empty", line);
      c.out_dir = v;
    };
    out["stride"] = [](ExperimentConfig& c, const std::string& key, const std::string& v, int line) {
      c.stride = to_int(v, key, line);
      if (c.stride < 1) throw ConfigError("'stride' must be at least 1", line);
    };
    return t;
  }();
  return table;
}

}  // namespace

std::string to_string(Experiment e) {
  for (const auto& [kind, name] : kExperimentNames) {
    if (kind == e) return name;
  }
  return "unknown";
}

Experiment parse_experiment(const std::string& name) {
  for (const auto& [kind, n] : kExperimentNames) {
    if (name == n) return kind;
  }
  throw InvalidConfig("unknown experiment '" + name + "'");
}

double ExperimentConfig::lambda2_value() const {
  return lambda2 ? *lambda2 : scaled_debye_length(scaling);
}

TimeGrid ExperimentConfig::time_grid() const {
  const bool iv = experiment == Experiment::iv_sweep;
  TimeGrid tg;
  tg.T_f = T_f ? *T_f : (iv ? 0.03 : 0.1);
  tg.M = M ? *M : (iv ? 600 : 200);
  tg.max_halvings = max_halvings;
  return tg;
}

BiasProgram ExperimentConfig::bias() const {
  const double tf = time_grid().T_f;
  const BiasKind kind =
      bias_kind ? *bias_kind
                : (experiment == Experiment::iv_sweep ? BiasKind::sinusoidal : BiasKind::constant);
  switch (kind) {
    case BiasKind::constant:
      return BiasProgram::constant(U0, UL);
    case BiasKind::ramp:
      return BiasProgram::ramp(U0, UL, UL_end, tf);
    case BiasKind::sinusoidal:
      return BiasProgram::sinusoidal(U0, amplitude, periods, tf);
  }
  throw InvalidConfig("unknown bias kind");
}

Grid ExperimentConfig::grid() const { return build_uniform_grid(N); }

DeviceConfig ExperimentConfig::device(const Grid& g) const {
  DeviceConfig d = make_constant_device(g, D_init, A, D_e, eps, scaling);
  d.lambda2 = lambda2_value();
  d.validate(g);
  return d;
}

Problem ExperimentConfig::problem() const {
  Grid g = grid();
  DeviceConfig d = device(g);
  const Model model =
      experiment == Experiment::transient_full ? Model::full(eps) : Model::reduced();
  return Problem{std::move(g), std::move(d), bias(), model, NewtonOptions{}};
}

void ExperimentConfig::validate() const {
  if (N < 3) throw InvalidConfig("N must be at least 3");
  if (!(eps > 0.0)) throw InvalidConfig("eps must be positive");
  if (!(D_init > 0.0)) throw InvalidConfig("D_init must be positive");
  if (lambda2 && !(*lambda2 > 0.0)) throw InvalidConfig("lambda2 must be positive");
  scaling.validate();
  if (eps_list.empty()) throw InvalidConfig("eps_list must not be empty");
  for (double e : eps_list) {
    if (!(e > 0.0)) throw InvalidConfig("eps_list entries must be positive");
  }
  if (de_ratios.empty()) throw InvalidConfig("de_ratios must not be empty");
  for (double r : de_ratios) {
    if (!(r > 0.0)) throw InvalidConfig("de_ratios entries must be positive");
  }
  if (voltages.empty()) throw InvalidConfig("voltages must not be empty");
  time_grid().validate();
  if (!(periods > 0.0)) throw InvalidConfig("periods must be positive");
  if (stride < 1) throw InvalidConfig("stride must be at least 1");
  if (out_dir.empty()) throw InvalidConfig("output directory must not be empty");
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line = 0;
  std::map<std::string, int> seen;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find_first_of("#;");
    const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError("malformed section header '" + s + "'", line);
      section = trim(s.substr(1, s.size() - 2));
      if (!schema().count(section)) throw ConfigError("unknown section [" + section + "]", line);
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value', got '" + s + "'", line);
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (key.empty()) throw ConfigError("missing key before '='", line);
    const std::string qualified = section + "." + key;
    if (seen.count(qualified)) {
      throw ConfigError("duplicate key '" + key + "' (first set on line " +
                            std::to_string(seen[qualified]) + ")",
                        line);
    }
    seen[qualified] = line;
    if (section.empty()) {
      if (key != "experiment") throw ConfigError("unknown key '" + key + "' outside a section", line);
      try {
        cfg.experiment = parse_experiment(value);
      } catch (const InvalidConfig& e) {
        throw ConfigError(e.what(), line);
      }
      continue;
    }
    const auto& keys = schema().at(section);
    const auto it = keys.find(key);
    if (it == keys.end()) {
      throw ConfigError("unknown key '" + key + "' in section [" + section + "]", line);
    }
    try {
      it->second(cfg, key, value, line);
    } catch (const InvalidConfig& e) {
      throw ConfigError(e.what(), line);
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream o;
  if (c.experiment) o << "experiment = " << to_string(*c.experiment) << "\n\n";
  o << "[device]\n";
  if (c.lambda2) o << "lambda2 = " << fmt(*c.lambda2) << "\n";
  o << "eps = " << fmt(c.eps) << "\n"
    << "A = " << fmt(c.A) << "\n"
    << "D_init = " << fmt(c.D_init) << "\n"
    << "D_e = " << fmt(c.D_e) << "\n"
    << "eps_s = " << fmt(c.scaling.eps_s) << "\n"
    << "U_T = " << fmt(c.scaling.U_T) << "\n"
    << "q = " << fmt(c.scaling.q) << "\n"
    << "L = " << fmt(c.scaling.L) << "\n"
    << "n_i = " << fmt(c.scaling.n_i) << "\n"
    << "J0 = " << fmt(c.scaling.J0) << "\n"
    << "eps_list = " << fmt_list(c.eps_list) << "\n"
    << "de_ratios = " << fmt_list(c.de_ratios) << "\n\n";
  o << "[grid]\nN = " << c.N << "\n\n";
  o << "[time]\n";
  if (c.T_f) o << "T_f = " << fmt(*c.T_f) << "\n";
  if (c.M) o << "M = " << *c.M << "\n";
  o << "max_halvings = " << c.max_halvings << "\n\n";
  o << "[bias]\n";
  if (c.bias_kind) {
    for (const auto& [kind, name] : kBiasNames) {
      if (kind == *c.bias_kind) o << "kind = " << name << "\n";
    }
  }
  o << "U0 = " << fmt(c.U0) << "\n"
    << "UL = " << fmt(c.UL) << "\n"
    << "UL_end = " << fmt(c.UL_end) << "\n"
    << "amplitude = " << fmt(c.amplitude) << "\n"
    << "periods = " << fmt(c.periods) << "\n"
    << "voltages = " << fmt_list(c.voltages) << "\n\n";
  o << "[output]\ndir = " << c.out_dir << "\nstride = " << c.stride << "\n";
  return o.str();
}

}  // namespace memdd

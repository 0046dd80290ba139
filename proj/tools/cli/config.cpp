#include "config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "bsop/errors.hpp"

namespace bsop::cli {

namespace {

constexpr double kTwoPi = 6.283185307179586;

const Json& section(const Json& doc, const char* name, const std::set<std::string>& keys) {
  static const Json empty = Json::object();
  if (!doc.contains(name)) return empty;
  const Json& s = doc.at(name);
  if (!s.is_object()) throw ConfigError(std::string("section '") + name + "' must be an object");
  for (const auto& item : s.items()) {
    if (!keys.count(item.key())) throw ConfigError(std::string("unknown key '") + name + "." + item.key() + "'");
  }
  return s;
}

template <class T>
void read(const Json& s, const char* sec, const char* key, T& out) {
  if (!s.contains(key)) return;
  try {
    out = s.at(key).get<T>();
  } catch (const Json::exception&) {
    throw ConfigError(std::string("bad value for '") + sec + "." + key + "'");
  }
}

LongitudinalKind longitudinal_kind(const std::string& s) {
  if (s == "rational") return LongitudinalKind::Rational;
  if (s == "gaussian") return LongitudinalKind::Gaussian;
  if (s == "compact_bump") return LongitudinalKind::CompactBump;
  throw ConfigError("potential.longitudinal must be rational, gaussian or compact_bump");
}

const char* longitudinal_name(LongitudinalKind k) {
  switch (k) {
    case LongitudinalKind::Rational: return "rational";
    case LongitudinalKind::Gaussian: return "gaussian";
    case LongitudinalKind::CompactBump: return "compact_bump";
  }
  return "rational";
}

TransverseKind transverse_kind(const std::string& s) {
  if (s == "constant") return TransverseKind::Constant;
  if (s == "bump") return TransverseKind::Bump;
  if (s == "fourier") return TransverseKind::Fourier;
  throw ConfigError("potential.transverse must be constant, bump or fourier");
}

const char* transverse_name(TransverseKind k) {
  switch (k) {
    case TransverseKind::Constant: return "constant";
    case TransverseKind::Bump: return "bump";
    case TransverseKind::Fourier: return "fourier";
  }
  return "bump";
}

TraceMode trace_mode(const std::string& s) {
  if (s == "radial_scan") return TraceMode::RadialScan;
  if (s == "continuation") return TraceMode::Continuation;
  throw ConfigError("trace.mode must be radial_scan or continuation");
}

}  // namespace

RunConfig parse_config(const Json& doc) {
  if (!doc.is_object()) throw ConfigError("configuration must be a JSON object");
  const std::set<std::string> top{"lattice", "potential", "energy", "grid", "trace", "scan", "guided", "verify", "seed"};
  for (const auto& item : doc.items()) {
    if (!top.count(item.key())) throw ConfigError("unknown section '" + item.key() + "'");
  }
  RunConfig cfg;
  cfg.a2 = cfg.a3 = kTwoPi;

  const Json& lat = section(doc, "lattice", {"a2", "a3"});
  read(lat, "lattice", "a2", cfg.a2);
  read(lat, "lattice", "a3", cfg.a3);

  const Json& pot = section(doc, "potential", {"longitudinal", "q", "sigma", "R", "transverse", "rho", "terms"});
  std::string lk = longitudinal_name(cfg.potential.longitudinal);
  std::string tk = transverse_name(cfg.potential.transverse);
  read(pot, "potential", "longitudinal", lk);
  read(pot, "potential", "transverse", tk);
  cfg.potential.longitudinal = longitudinal_kind(lk);
  cfg.potential.transverse = transverse_kind(tk);
  read(pot, "potential", "q", cfg.potential.q);
  read(pot, "potential", "sigma", cfg.potential.sigma);
  read(pot, "potential", "R", cfg.potential.R);
  read(pot, "potential", "rho", cfg.potential.rho);
  if (pot.contains("terms")) {
    if (!pot.at("terms").is_array()) throw ConfigError("potential.terms must be an array of [n2, n3, re, im]");
    for (const auto& t : pot.at("terms")) {
      if (!t.is_array() || t.size() != 4) throw ConfigError("potential.terms entries are [n2, n3, re, im]");
      try {
        cfg.potential.terms.push_back({t[0].get<int>(), t[1].get<int>(), t[2].get<double>(), t[3].get<double>()});
      } catch (const Json::exception&) {
        throw ConfigError("potential.terms entries are [n2, n3, re, im]");
      }
    }
  }

  const Json& en = section(doc, "energy", {"E", "delta", "s", "g", "c_factor", "c_probe_p_max"});
  read(en, "energy", "E", cfg.E);
  read(en, "energy", "delta", cfg.delta);
  read(en, "energy", "s", cfg.s);
  read(en, "energy", "c_factor", cfg.c_factor);
  read(en, "energy", "c_probe_p_max", cfg.c_probe_p_max);
  if (en.contains("g")) {
    const Json& g = en.at("g");
    if (g.is_string() && g.get<std::string>() == "auto") {
      cfg.g.reset();
    } else if (g.is_number()) {
      cfg.g = g.get<double>();
    } else {
      throw ConfigError("energy.g must be a number or \"auto\"");
    }
  }

  const Json& gr = section(doc, "grid", {"L", "N1", "M", "n_ell"});
  read(gr, "grid", "L", cfg.grid.L);
  read(gr, "grid", "N1", cfg.grid.N1);
  read(gr, "grid", "M", cfg.grid.M);
  read(gr, "grid", "n_ell", cfg.grid.n_ell);

  const Json& tr = section(doc, "trace", {"n_theta", "mode", "continuation_check", "g_sweep"});
  read(tr, "trace", "n_theta", cfg.trace.n_theta);
  std::string mode = to_string(cfg.trace.mode);
  read(tr, "trace", "mode", mode);
  cfg.trace.mode = trace_mode(mode);
  read(tr, "trace", "continuation_check", cfg.trace.continuation_check);
  read(tr, "trace", "g_sweep", cfg.trace.g_sweep);

  const Json& sc = section(doc, "scan", {"n_theta", "n_radii", "margin"});
  read(sc, "scan", "n_theta", cfg.scan.n_theta);
  read(sc, "scan", "n_radii", cfg.scan.n_radii);
  read(sc, "scan", "margin", cfg.scan.margin);

  const Json& gd = section(doc, "guided", {"k", "theta", "decay_lengths", "m_max", "boundary", "eps_sequence", "write_state"});
  if (gd.contains("k") && !gd.at("k").is_null()) {
    std::vector<double> k;
    read(gd, "guided", "k", k);
    if (k.size() != 2) throw ConfigError("guided.k must be [k2, k3]");
    cfg.guided.k = QuasiMomentum{k[0], k[1]};
  }
  read(gd, "guided", "theta", cfg.guided.theta);
  read(gd, "guided", "decay_lengths", cfg.guided.decay_lengths);
  read(gd, "guided", "m_max", cfg.guided.m_max);
  read(gd, "guided", "boundary", cfg.guided.boundary);
  read(gd, "guided", "eps_sequence", cfg.guided.eps_sequence);
  read(gd, "guided", "write_state", cfg.guided.write_state);

  const Json& vf = section(doc, "verify", {"n_probes", "n_random", "n_theta", "guided_nodes"});
  read(vf, "verify", "n_probes", cfg.verify.n_probes);
  read(vf, "verify", "n_random", cfg.verify.n_random);
  read(vf, "verify", "n_theta", cfg.verify.n_theta);
  read(vf, "verify", "guided_nodes", cfg.verify.guided_nodes);

  if (doc.contains("seed")) {
    const Json& sd = doc.at("seed");
    if (!sd.is_number_unsigned()) throw ConfigError("seed must be a nonnegative integer");
    cfg.seed = sd.get<std::uint64_t>();
  }
  return cfg;
}

void apply_override(Json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not key=value");
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  Json value = Json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  Json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw ConfigError("override key '" + path + "' has an empty component");
    if (!node->is_object()) throw ConfigError("override key '" + path + "' descends into a value");
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    if (node->is_null()) *node = Json::object();
    start = dot + 1;
  }
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  Json doc = Json::object();
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    try {
      doc = Json::parse(in);
    } catch (const Json::parse_error& e) {
      throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
    }
  }
  for (const auto& o : overrides) apply_override(doc, o);
  RunConfig cfg = parse_config(doc);
  validate(cfg);
  return cfg;
}

void validate(const RunConfig& cfg) {
  if (!(cfg.a2 > 0.0) || !(cfg.a3 > 0.0)) throw ConfigError("lattice periods must be positive");
  const auto lat = make_lattice(cfg.a2, cfg.a3);
  if (!(cfg.delta >= 0.0)) throw ConfigError("energy.delta must be nonnegative");
  const double e_delta = energy_threshold(lat, cfg.delta);
  if (!(cfg.E > 0.0 && cfg.E < e_delta)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "energy.E = " << cfg.E << " must lie in (0, E_delta) with E_delta = " << e_delta;
    throw ConfigError(msg.str());
  }
  if (!(cfg.s > separation_threshold())) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "energy.s = " << cfg.s << " must exceed 3 + sqrt(5) = " << separation_threshold();
    throw ConfigError(msg.str());
  }
  if (cfg.g && !(*cfg.g > 0.0)) throw ConfigError("energy.g must be positive");
  if (!(cfg.c_factor >= 1.0)) throw ConfigError("energy.c_factor must be at least 1");
  if (!(cfg.c_probe_p_max > 0.0)) throw ConfigError("energy.c_probe_p_max must be positive");
  try {
    validate_grid(cfg.grid);
  } catch (const Error& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }
  if (cfg.trace.n_theta < 4) throw ConfigError("trace.n_theta must be at least 4");
  if (cfg.scan.n_theta < 1 || cfg.scan.n_radii < 2) throw ConfigError("scan grid must have n_theta >= 1 and n_radii >= 2");
  if (!(cfg.scan.margin >= 0.0)) throw ConfigError("scan.margin must be nonnegative");
  if (!(cfg.guided.decay_lengths > 0.0)) throw ConfigError("guided.decay_lengths must be positive");
  if (cfg.guided.m_max < 0 || cfg.guided.m_max > 6) throw ConfigError("guided.m_max must lie in [0, 6]");
  if (cfg.guided.eps_sequence.empty()) throw ConfigError("guided.eps_sequence must not be empty");
  for (double e : cfg.guided.eps_sequence) {
    if (!(e > 0.0)) throw ConfigError("guided.eps_sequence entries must be positive");
  }
  if (cfg.verify.n_probes < 1 || cfg.verify.n_random < 1 || cfg.verify.n_theta < 4 || cfg.verify.guided_nodes < 1) {
    throw ConfigError("verify counts must be positive and verify.n_theta at least 4");
  }
}

Json to_json(const RunConfig& cfg) {
  Json j;
  j["lattice"] = {{"a2", cfg.a2}, {"a3", cfg.a3}};
  Json terms = Json::array();
  for (const auto& t : cfg.potential.terms) terms.push_back({t.n2, t.n3, t.re, t.im});
  j["potential"] = {{"longitudinal", longitudinal_name(cfg.potential.longitudinal)},
                    {"q", cfg.potential.q},
                    {"sigma", cfg.potential.sigma},
                    {"R", cfg.potential.R},
                    {"transverse", transverse_name(cfg.potential.transverse)},
                    {"rho", cfg.potential.rho},
                    {"terms", terms}};
  j["energy"] = {{"E", cfg.E},
                 {"delta", cfg.delta},
                 {"s", cfg.s},
                 {"g", cfg.g ? Json(*cfg.g) : Json("auto")},
                 {"c_factor", cfg.c_factor},
                 {"c_probe_p_max", cfg.c_probe_p_max}};
  j["grid"] = {{"L", cfg.grid.L}, {"N1", cfg.grid.N1}, {"M", cfg.grid.M}, {"n_ell", cfg.grid.n_ell}};
  j["trace"] = {{"n_theta", cfg.trace.n_theta},
                {"mode", to_string(cfg.trace.mode)},
                {"continuation_check", cfg.trace.continuation_check},
                {"g_sweep", cfg.trace.g_sweep}};
  j["scan"] = {{"n_theta", cfg.scan.n_theta}, {"n_radii", cfg.scan.n_radii}, {"margin", cfg.scan.margin}};
  j["guided"] = {{"k", cfg.guided.k ? Json::array({cfg.guided.k->k2, cfg.guided.k->k3}) : Json(nullptr)},
                 {"theta", cfg.guided.theta},
                 {"decay_lengths", cfg.guided.decay_lengths},
                 {"m_max", cfg.guided.m_max},
                 {"boundary", cfg.guided.boundary},
                 {"eps_sequence", cfg.guided.eps_sequence},
                 {"write_state", cfg.guided.write_state}};
  j["verify"] = {{"n_probes", cfg.verify.n_probes},
                 {"n_random", cfg.verify.n_random},
                 {"n_theta", cfg.verify.n_theta},
                 {"guided_nodes", cfg.verify.guided_nodes}};
  j["seed"] = cfg.seed;
  return j;
}

std::string config_hash(const RunConfig& cfg) {
  const std::string text = to_json(cfg).dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace bsop::cli

#include "vibron/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "vibron/experiments.hpp"
#include "vibron/hilbert.hpp"
#include "vibron/observables.hpp"
#include "vibron/protocol.hpp"

#ifndef VIBRON_GIT_REVISION
#define VIBRON_GIT_REVISION "unknown"
#endif

namespace vibron {

namespace {

using nlohmann::json;

// Anything wrong with the run configuration itself; maps to exit code 2.
class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ------------------------------ json access ----------------------------

void require_object(const json& node, const std::string& where) {
  if (!node.is_object()) throw config_error(where + " must be a JSON object");
}

void reject_unknown_keys(const json& node, const std::string& where,
                         std::initializer_list<const char*> allowed) {
  require_object(node, where);
  for (const auto& item : node.items()) {
    bool known = false;
    for (const char* key : allowed)
      if (item.key() == key) known = true;
    if (!known) throw config_error("unknown key \"" + item.key() + "\" in " + where);
  }
}

const json& require_key(const json& node, const std::string& where, const char* key) {
  require_object(node, where);
  const auto it = node.find(key);
  if (it == node.end())
    throw config_error(where + " is missing the \"" + std::string(key) + "\" key");
  return *it;
}

double as_number(const json& node, const std::string& where) {
  if (!node.is_number()) throw config_error(where + " must be a number");
  return node.get<double>();
}

Index as_integer(const json& node, const std::string& where) {
  if (!node.is_number_integer() && !node.is_number_unsigned())
    throw config_error(where + " must be an integer");
  return static_cast<Index>(node.get<std::int64_t>());
}

std::uint64_t as_seed(const json& node, const std::string& where) {
  if (node.is_number_unsigned()) return node.get<std::uint64_t>();
  if (node.is_number_integer() && node.get<std::int64_t>() >= 0)
    return static_cast<std::uint64_t>(node.get<std::int64_t>());
  throw config_error(where + " must be a non-negative integer");
}

bool as_bool(const json& node, const std::string& where) {
  if (!node.is_boolean()) throw config_error(where + " must be true or false");
  return node.get<bool>();
}

std::string as_string(const json& node, const std::string& where) {
  if (!node.is_string()) throw config_error(where + " must be a string");
  return node.get<std::string>();
}

// Complex values are written as a plain real number or an [re, im] pair.
Complex as_complex(const json& node, const std::string& where) {
  if (node.is_number()) return Complex(node.get<double>(), 0.0);
  if (node.is_array() && node.size() == 2 && node[0].is_number() && node[1].is_number())
    return Complex(node[0].get<double>(), node[1].get<double>());
  throw config_error(where + " must be a number or an [re, im] pair");
}

std::vector<double> as_number_array(const json& node, const std::string& where) {
  if (!node.is_array() || node.empty())
    throw config_error(where + " must be a non-empty array of numbers");
  std::vector<double> out;
  for (const json& item : node) out.push_back(as_number(item, where));
  return out;
}

std::vector<Index> as_index_array(const json& node, const std::string& where) {
  if (!node.is_array() || node.empty())
    throw config_error(where + " must be a non-empty array of integers");
  std::vector<Index> out;
  for (const json& item : node) out.push_back(as_integer(item, where));
  return out;
}

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file " + path);
  json parsed;
  try {
    in >> parsed;
  } catch (const json::exception& e) {
    throw config_error("config file " + path + " is not valid JSON: " + e.what());
  }
  require_object(parsed, "config");
  return parsed;
}

// ----------------------------- section parsing -------------------------

ModeLayout parse_layout(const json& node) {
  reject_unknown_keys(node, "layout", {"modes", "dims"});
  const json& modes_node = require_key(node, "layout", "modes");
  const json& dims_node = require_key(node, "layout", "dims");
  if (!modes_node.is_array() || !dims_node.is_array() || modes_node.empty() ||
      modes_node.size() != dims_node.size())
    throw config_error(
        "layout.modes and layout.dims must be non-empty arrays of equal length");

  std::vector<Mode> modes;
  std::vector<Index> dims;
  for (std::size_t i = 0; i < modes_node.size(); ++i) {
    modes.push_back(mode_from_string(as_string(modes_node[i], "layout.modes")));
    dims.push_back(as_integer(dims_node[i], "layout.dims"));
  }
  return ModeLayout(std::move(modes), std::move(dims));
}

// Plain-text Hermitian matrix: dimension header, then row-major re/im pairs.
HermitianOperator load_custom_observable(const std::string& path,
                                         const ModeLayout& layout) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open observable matrix file " + path);

  Index dim = 0;
  if (!(in >> dim) || dim <= 0)
    throw config_error("matrix file " + path + " must start with a positive dimension");
  if (dim != layout.vib_dim()) {
    std::ostringstream os;
    os << "matrix file dimension " << dim << " does not match the layout's vibrational"
       << " dimension " << layout.vib_dim();
    throw config_error(os.str());
  }

  Matrix m(dim, dim);
  for (Index r = 0; r < dim; ++r)
    for (Index c = 0; c < dim; ++c) {
      double re = 0.0;
      double im = 0.0;
      if (!(in >> re >> im))
        throw config_error("matrix file " + path + " ended before entry (" +
                           std::to_string(r) + ", " + std::to_string(c) + ")");
      m(r, c) = Complex(re, im);
    }
  std::string extra;
  if (in >> extra)
    throw config_error("matrix file " + path + " has trailing content \"" + extra + "\"");
  return HermitianOperator(layout, Subspace::vibrational, std::move(m));
}

HermitianOperator parse_observable(const json& node, const ModeLayout& layout) {
  reject_unknown_keys(node, "observable", {"name", "mode", "matrix_file"});
  const std::string name = as_string(require_key(node, "observable", "name"),
                                     "observable.name");
  const bool has_mode = node.contains("mode");

  if (name == "custom") {
    if (has_mode) throw config_error("observable \"custom\" does not take a mode");
    return load_custom_observable(
        as_string(require_key(node, "observable", "matrix_file"),
                  "observable.matrix_file"),
        layout);
  }
  if (node.contains("matrix_file"))
    throw config_error("observable.matrix_file is only valid with name \"custom\"");

  if (name == "n" || name == "qx") {
    const Mode m =
        has_mode ? mode_from_string(as_string(node["mode"], "observable.mode")) : Mode::x;
    return name == "n" ? number_operator(m, layout) : position_quadrature(m, layout);
  }
  if (has_mode) throw config_error("observable \"" + name + "\" does not take a mode");
  if (name == "lz") return angular_momentum_z(layout);
  if (name == "cxy") return correlation(Mode::x, Mode::y, layout);
  throw config_error("unknown observable name \"" + name +
                     "\" (expected n, lz, cxy, qx, or custom)");
}

StateSpec parse_state(const json& node) {
  const std::string kind = as_string(require_key(node, "state", "kind"), "state.kind");

  if (kind == "fock") {
    reject_unknown_keys(node, "state", {"kind", "occupations"});
    return StateSpec::fock_levels(
        as_index_array(require_key(node, "state", "occupations"), "state.occupations"));
  }
  if (kind == "coherent") {
    reject_unknown_keys(node, "state", {"kind", "alphas"});
    const json& alphas_node = require_key(node, "state", "alphas");
    if (!alphas_node.is_array() || alphas_node.empty())
      throw config_error("state.alphas must be a non-empty array");
    std::vector<Complex> alphas;
    for (const json& item : alphas_node) alphas.push_back(as_complex(item, "state.alphas"));
    return StateSpec::coherent(std::move(alphas));
  }
  if (kind == "su2_coherent") {
    reject_unknown_keys(node, "state", {"kind", "tau", "n0"});
    return StateSpec::su2(as_complex(require_key(node, "state", "tau"), "state.tau"),
                          as_integer(require_key(node, "state", "n0"), "state.n0"));
  }
  if (kind == "superposition") {
    reject_unknown_keys(node, "state", {"kind", "terms"});
    const json& terms_node = require_key(node, "state", "terms");
    if (!terms_node.is_array() || terms_node.empty())
      throw config_error("state.terms must be a non-empty array");
    std::vector<SuperpositionTerm> terms;
    for (const json& item : terms_node) {
      reject_unknown_keys(item, "state.terms entry", {"weight", "occupations"});
      SuperpositionTerm term;
      term.weight = as_complex(require_key(item, "state.terms entry", "weight"),
                               "state.terms weight");
      term.occupations = as_index_array(
          require_key(item, "state.terms entry", "occupations"),
          "state.terms occupations");
      terms.push_back(std::move(term));
    }
    return StateSpec::superposition(std::move(terms));
  }
  if (kind == "product") {
    reject_unknown_keys(node, "state", {"kind", "factors"});
    const json& factors_node = require_key(node, "state", "factors");
    if (!factors_node.is_array() || factors_node.empty())
      throw config_error("state.factors must be a non-empty array");
    std::vector<ModeFactor> factors;
    for (const json& item : factors_node) {
      ModeFactor factor;
      if (item.is_object() && item.size() == 1 && item.contains("fock")) {
        factor.is_fock = true;
        factor.level = as_integer(item["fock"], "state.factors fock level");
      } else if (item.is_object() && item.size() == 1 && item.contains("alpha")) {
        factor.is_fock = false;
        factor.alpha = as_complex(item["alpha"], "state.factors alpha");
      } else {
        throw config_error(
            "each state.factors entry must be {\"fock\": level} or {\"alpha\": value}");
      }
      factors.push_back(factor);
    }
    return StateSpec::product(std::move(factors));
  }
  throw config_error("unknown state kind \"" + kind +
                     "\" (expected fock, coherent, su2_coherent, superposition, or "
                     "product)");
}

struct ProtocolSection {
  ProtocolConfig cfg;
  bool seed_given = false;
};

ProtocolSection parse_protocol(const json* node) {
  ProtocolSection out;
  if (node == nullptr) return out;
  reject_unknown_keys(*node, "protocol",
                      {"gamma", "t", "shots", "alpha_max", "zone_half_width", "seed",
                       "allow_zone_violation"});
  if (node->contains("gamma")) out.cfg.gamma = as_number((*node)["gamma"], "protocol.gamma");
  if (node->contains("t")) out.cfg.t = as_number((*node)["t"], "protocol.t");
  if (node->contains("shots")) {
    out.cfg.shots = as_integer((*node)["shots"], "protocol.shots");
    if (out.cfg.shots < 0) throw config_error("protocol.shots must be non-negative");
  }
  if (node->contains("alpha_max"))
    out.cfg.window.alpha_max = as_number((*node)["alpha_max"], "protocol.alpha_max");
  if (node->contains("zone_half_width"))
    out.cfg.window.zone_half_width =
        as_number((*node)["zone_half_width"], "protocol.zone_half_width");
  if (node->contains("seed")) {
    out.cfg.rng_seed = as_seed((*node)["seed"], "protocol.seed");
    out.seed_given = true;
  }
  if (node->contains("allow_zone_violation"))
    out.cfg.allow_zone_violation =
        as_bool((*node)["allow_zone_violation"], "protocol.allow_zone_violation");
  return out;
}

struct OutputSpec {
  std::string path;  // empty: stdout
  std::string format = "json";
};

OutputSpec parse_output(const json& node) {
  reject_unknown_keys(node, "output", {"path", "format"});
  OutputSpec out;
  if (node.contains("path")) out.path = as_string(node["path"], "output.path");
  if (node.contains("format")) {
    out.format = as_string(node["format"], "output.format");
    if (out.format != "csv" && out.format != "json")
      throw config_error("output.format must be csv or json");
  }
  return out;
}

struct SweepSection {
  SweepAxis axis = SweepAxis::t;
  std::string axis_name;
  std::vector<double> grid;
};

SweepSection parse_sweep(const json& node) {
  reject_unknown_keys(node, "sweep", {"axis", "grid"});
  SweepSection out;
  out.axis_name = as_string(require_key(node, "sweep", "axis"), "sweep.axis");
  if (out.axis_name == "t")
    out.axis = SweepAxis::t;
  else if (out.axis_name == "gamma")
    out.axis = SweepAxis::gamma;
  else if (out.axis_name == "shots")
    out.axis = SweepAxis::shots;
  else
    throw config_error("sweep.axis must be t, gamma, or shots");
  out.grid = as_number_array(require_key(node, "sweep", "grid"), "sweep.grid");
  return out;
}

struct RabiSection {
  double gamma = 0.0;
  std::vector<double> t_grid;
};

RabiSection parse_rabi(const json& node) {
  reject_unknown_keys(node, "rabi", {"gamma", "t_grid"});
  RabiSection out;
  out.gamma = as_number(require_key(node, "rabi", "gamma"), "rabi.gamma");
  out.t_grid = as_number_array(require_key(node, "rabi", "t_grid"), "rabi.t_grid");
  return out;
}

ParityDemoConfig parse_parity(const json& node) {
  reject_unknown_keys(node, "parity",
                      {"n0", "tau", "gamma_jc", "scan_start", "scan_stop", "scan_steps",
                       "mode_dim"});
  ParityDemoConfig cfg;
  cfg.n0 = as_integer(require_key(node, "parity", "n0"), "parity.n0");
  if (node.contains("tau")) cfg.tau = as_complex(node["tau"], "parity.tau");
  if (node.contains("gamma_jc"))
    cfg.gamma_jc = as_number(node["gamma_jc"], "parity.gamma_jc");
  if (node.contains("scan_start"))
    cfg.scan_start = as_number(node["scan_start"], "parity.scan_start");
  if (node.contains("scan_stop"))
    cfg.scan_stop = as_number(node["scan_stop"], "parity.scan_stop");
  if (node.contains("scan_steps"))
    cfg.scan_steps = as_integer(node["scan_steps"], "parity.scan_steps");
  if (node.contains("mode_dim"))
    cfg.mode_dim = as_integer(node["mode_dim"], "parity.mode_dim");
  return cfg;
}

// ------------------------- overrides and bookkeeping -------------------

struct Overrides {
  std::string output_path;
  std::string format;
  std::optional<Index> shots;
  std::optional<std::uint64_t> seed;
  bool unsafe = false;
};

void apply_overrides(ProtocolSection& proto, const Overrides& ov) {
  if (ov.shots) proto.cfg.shots = *ov.shots;
  if (ov.seed) {
    proto.cfg.rng_seed = *ov.seed;
    proto.seed_given = true;
  }
  if (ov.unsafe) proto.cfg.allow_zone_violation = true;
}

// Reproducibility contract: stochastic runs must pin their seed explicitly.
void require_seed_when_stochastic(const ProtocolSection& proto, bool stochastic) {
  if (stochastic && !proto.seed_given)
    throw config_error(
        "runs with shots > 0 need an explicit rng seed (protocol.seed or --seed)");
}

OutputSpec resolve_output(const json& config, const Overrides& ov) {
  OutputSpec out;
  if (config.contains("output")) out = parse_output(config["output"]);
  if (!ov.output_path.empty()) out.path = ov.output_path;
  if (!ov.format.empty()) out.format = ov.format;
  return out;
}

// The bias bound assumes the state lives inside the spectral window; flag
// configurations where that premise visibly fails.
void warn_spectral_tail(const StateVector& psi, const HermitianOperator& observable,
                        const ProtocolConfig& cfg) {
  if (!cfg.window.alpha_max) return;
  const double tail = verify_finite_spectrum(psi, observable, *cfg.window.alpha_max);
  if (tail > 1e-6)
    std::cerr << "warning: probability weight " << tail
              << " lies outside the [-alpha_max, alpha_max] spectral window; the bias"
              << " bound does not cover it\n";
}

// ------------------------------- rendering -----------------------------

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15g", value);
  return buf;
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t hash = 1469598103934665603ull;
  for (const unsigned char byte : text) {
    hash ^= byte;
    hash *= 1099511628211ull;
  }
  return hash;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

struct ResultTable {
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<std::pair<std::string, json>> summary;
  std::vector<std::string> columns;
  std::vector<std::vector<json>> rows;
};

std::string csv_cell(const json& value) {
  if (value.is_number_float()) return format_double(value.get<double>());
  if (value.is_number_integer()) return std::to_string(value.get<std::int64_t>());
  if (value.is_number_unsigned()) return std::to_string(value.get<std::uint64_t>());
  if (value.is_boolean()) return value.get<bool>() ? "true" : "false";
  if (value.is_string()) return value.get<std::string>();
  throw std::logic_error("csv_cell: unsupported cell type");
}

std::string render_csv(const ResultTable& table) {
  std::ostringstream os;
  for (const auto& [key, value] : table.metadata) os << "# " << key << "=" << value << "\n";
  for (const auto& [key, value] : table.summary)
    os << "# " << key << "=" << csv_cell(value) << "\n";
  for (std::size_t c = 0; c < table.columns.size(); ++c)
    os << (c ? "," : "") << table.columns[c];
  os << "\n";
  for (const std::vector<json>& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << csv_cell(row[c]);
    os << "\n";
  }
  return os.str();
}

std::string render_json(const ResultTable& table) {
  json doc = json::object();
  json metadata = json::object();
  for (const auto& [key, value] : table.metadata) metadata[key] = value;
  doc["metadata"] = metadata;
  if (!table.summary.empty()) {
    json summary = json::object();
    for (const auto& [key, value] : table.summary) summary[key] = value;
    doc["summary"] = summary;
  }
  json rows = json::array();
  for (const std::vector<json>& row : table.rows) {
    json entry = json::object();
    for (std::size_t c = 0; c < table.columns.size(); ++c) entry[table.columns[c]] = row[c];
    rows.push_back(entry);
  }
  doc["rows"] = rows;
  return doc.dump(2) + "\n";
}

void write_result(const ResultTable& table, const OutputSpec& out) {
  const std::string text = out.format == "csv" ? render_csv(table) : render_json(table);
  if (out.path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream file(out.path);
  if (!file) throw config_error("cannot open output file " + out.path);
  file << text;
  file.flush();
  if (!file) throw config_error("failed writing output file " + out.path);
}

std::vector<std::pair<std::string, std::string>> make_metadata(
    const char* command, const json& config, const std::optional<std::uint64_t>& seed) {
  std::vector<std::pair<std::string, std::string>> metadata;
  metadata.emplace_back("command", command);
  metadata.emplace_back("revision", VIBRON_GIT_REVISION);
  metadata.emplace_back("config_hash", hex64(fnv1a(config.dump())));
  if (seed) metadata.emplace_back("seed", std::to_string(*seed));
  return metadata;
}

// -------------------------------- commands -----------------------------

int cmd_estimate(const std::string& config_path, const Overrides& ov) {
  const json config = load_config(config_path);
  reject_unknown_keys(config, "config",
                      {"layout", "observable", "state", "protocol", "output"});
  const ModeLayout layout = parse_layout(require_key(config, "config", "layout"));
  const HermitianOperator observable =
      parse_observable(require_key(config, "config", "observable"), layout);
  const StateVector psi =
      build_state(parse_state(require_key(config, "config", "state")), layout);

  ProtocolSection proto =
      parse_protocol(config.contains("protocol") ? &config["protocol"] : nullptr);
  apply_overrides(proto, ov);
  require_seed_when_stochastic(proto, proto.cfg.shots > 0);
  warn_spectral_tail(psi, observable, proto.cfg);

  const double truth = expectation(psi, observable);
  const EstimateResult r = estimate_mean(psi, observable, proto.cfg);

  ResultTable table;
  table.metadata = make_metadata("estimate", config, proto.cfg.rng_seed);
  table.columns = {"estimate",       "true_mean",  "bias",       "sigma_z_mean",
                   "standard_error", "bias_bound", "pulse_area", "shots",
                   "shots_plus",     "shots_minus", "unsafe"};
  table.rows.push_back({json(r.estimate), json(truth), json(std::abs(r.estimate - truth)),
                        json(r.sigma_z_mean), json(r.standard_error), json(r.bias_bound),
                        json(r.pulse_area),
                        json(static_cast<std::int64_t>(proto.cfg.shots)),
                        json(static_cast<std::int64_t>(r.shots_plus)),
                        json(static_cast<std::int64_t>(r.shots_minus)), json(r.unsafe)});
  write_result(table, resolve_output(config, ov));
  return exit_ok;
}

int cmd_sweep(const std::string& config_path, const Overrides& ov) {
  const json config = load_config(config_path);
  reject_unknown_keys(config, "config",
                      {"layout", "observable", "state", "protocol", "sweep", "output"});
  const ModeLayout layout = parse_layout(require_key(config, "config", "layout"));
  const HermitianOperator observable =
      parse_observable(require_key(config, "config", "observable"), layout);
  const StateVector psi =
      build_state(parse_state(require_key(config, "config", "state")), layout);
  const SweepSection sweep = parse_sweep(require_key(config, "config", "sweep"));

  ProtocolSection proto =
      parse_protocol(config.contains("protocol") ? &config["protocol"] : nullptr);
  apply_overrides(proto, ov);
  bool stochastic = proto.cfg.shots > 0;
  if (sweep.axis == SweepAxis::shots) {
    stochastic = false;
    for (const double value : sweep.grid) stochastic = stochastic || value > 0.0;
  }
  require_seed_when_stochastic(proto, stochastic);

  const std::vector<SweepRow> rows =
      estimator_sweep(psi, observable, sweep.axis, sweep.grid, proto.cfg);

  ResultTable table;
  table.metadata = make_metadata("sweep", config, proto.cfg.rng_seed);
  table.metadata.emplace_back("axis", sweep.axis_name);
  table.columns = {"axis_value", "estimate",   "true_mean",
                   "bias",       "bias_bound", "standard_error"};
  for (const SweepRow& row : rows)
    table.rows.push_back({json(row.axis_value), json(row.estimate), json(row.true_mean),
                          json(row.bias), json(row.bias_bound),
                          json(row.standard_error)});
  write_result(table, resolve_output(config, ov));
  return exit_ok;
}

int cmd_rabi(const std::string& config_path, const Overrides& ov) {
  const json config = load_config(config_path);
  reject_unknown_keys(config, "config", {"layout", "observable", "state", "rabi", "output"});
  const ModeLayout layout = parse_layout(require_key(config, "config", "layout"));
  const HermitianOperator observable =
      parse_observable(require_key(config, "config", "observable"), layout);
  const StateVector psi =
      build_state(parse_state(require_key(config, "config", "state")), layout);
  const RabiSection rabi = parse_rabi(require_key(config, "config", "rabi"));

  const std::vector<RabiPoint> points =
      rabi_scan(psi, observable, rabi.gamma, rabi.t_grid);

  ResultTable table;
  table.metadata = make_metadata("rabi", config, std::nullopt);
  table.columns = {"t", "p_plus"};
  for (const RabiPoint& point : points)
    table.rows.push_back({json(point.t), json(point.p_plus)});
  write_result(table, resolve_output(config, ov));
  return exit_ok;
}

int cmd_parity(const std::string& config_path, const Overrides& ov) {
  const json config = load_config(config_path);
  reject_unknown_keys(config, "config", {"parity", "protocol", "output"});
  ParityDemoConfig cfg = parse_parity(require_key(config, "config", "parity"));

  ProtocolSection proto =
      parse_protocol(config.contains("protocol") ? &config["protocol"] : nullptr);
  apply_overrides(proto, ov);
  require_seed_when_stochastic(proto, proto.cfg.shots > 0);
  cfg.measurement = proto.cfg;

  const ParityReport report = parity_demo(cfg);

  ResultTable table;
  table.metadata = make_metadata("parity", config, proto.cfg.rng_seed);
  table.summary = {{"n0", json(static_cast<std::int64_t>(report.n0))},
                   {"extreme_value", json(report.extreme_value)},
                   {"extreme_time", json(report.extreme_time)},
                   {"parity_sign", json(report.parity_sign)},
                   {"sign_matches_parity", json(report.sign_matches_parity)},
                   {"max_excitation_drift", json(report.max_excitation_drift)}};
  table.columns = {"time",       "direct_cxy",        "cxy_squared",
                   "branch_population", "branch_cxy", "indirect_estimate",
                   "indirect_stderr",   "excitation_drift"};
  for (const ParityScanPoint& point : report.points)
    table.rows.push_back({json(point.time), json(point.direct_cxy),
                          json(point.cxy_squared), json(point.branch_population),
                          json(point.branch_cxy), json(point.indirect_estimate),
                          json(point.indirect_stderr), json(point.excitation_drift)});
  write_result(table, resolve_output(config, ov));
  return exit_ok;
}

int cmd_validate() {
  bool all_passed = true;
  for (const ValidationCheck& check : run_validation_checks()) {
    all_passed = all_passed && check.passed;
    std::cout << (check.passed ? "PASS  " : "FAIL  ") << std::left << std::setw(30)
              << check.name << "  " << check.detail << "\n";
  }
  return all_passed ? exit_ok : exit_numerical_failure;
}

int run_guarded(const std::function<int()>& command) {
  try {
    return command();
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return exit_config_error;
  } catch (const zone_violation& e) {
    std::cerr << "zone violation: " << e.what() << "\n";
    return exit_zone_violation;
  } catch (const truncation_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return exit_config_error;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return exit_config_error;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return exit_numerical_failure;
  }
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"Measurement toolkit for vibrational observables of trapped ions"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output_path;
  std::string format;
  Index shots = 0;
  std::uint64_t seed = 0;
  bool unsafe = false;

  const auto add_io_options = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON run configuration")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--output", output_path,
                    "result file (overrides config; stdout when absent)");
    cmd->add_option("--format", format, "output format (overrides config)")
        ->check(CLI::IsMember({"csv", "json"}));
  };
  const auto add_protocol_options = [&](CLI::App* cmd) {
    cmd->add_option("--shots", shots, "override protocol.shots")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--seed", seed, "override protocol.seed");
    cmd->add_flag("--unsafe", unsafe, "proceed outside the linearizability zone");
  };

  CLI::App* estimate = app.add_subcommand(
      "estimate", "one protocol run, reported against the direct expectation");
  add_io_options(estimate);
  add_protocol_options(estimate);
  CLI::App* sweep =
      app.add_subcommand("sweep", "protocol runs across a t, gamma, or shots grid");
  add_io_options(sweep);
  add_protocol_options(sweep);
  CLI::App* rabi = app.add_subcommand("rabi", "eigenstate flip-probability scan");
  add_io_options(rabi);
  CLI::App* parity = app.add_subcommand("parity", "two-mode parity-effect demonstration");
  add_io_options(parity);
  add_protocol_options(parity);
  CLI::App* validate = app.add_subcommand("validate", "run the build-identity suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_config_error;
  }

  CLI::App* active = app.get_subcommands().front();
  Overrides ov;
  ov.output_path = output_path;
  ov.format = format;
  ov.unsafe = unsafe;
  if (const CLI::Option* opt = active->get_option_no_throw("--shots"); opt && opt->count())
    ov.shots = shots;
  if (const CLI::Option* opt = active->get_option_no_throw("--seed"); opt && opt->count())
    ov.seed = seed;

  if (active == validate) return run_guarded(cmd_validate);
  if (active == estimate) return run_guarded([&] { return cmd_estimate(config_path, ov); });
  if (active == sweep) return run_guarded([&] { return cmd_sweep(config_path, ov); });
  if (active == rabi) return run_guarded([&] { return cmd_rabi(config_path, ov); });
  return run_guarded([&] { return cmd_parity(config_path, ov); });
}

}  // namespace vibron

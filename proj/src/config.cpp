#include "config.hpp"

#include <json.hpp>

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

#include "error.hpp"

namespace sere {

namespace {

using nlohmann::json;

[[noreturn]] void schema_error(const std::string& context, const std::string& what) {
  // The context string already names the config section ("config", "scenario",
  // "sweep", ...), so it needs no further prefix.
  raise(Errc::SchemaViolation, context + ": " + what);
}

void check_keys(const json& j, const std::string& context,
                std::initializer_list<const char*> allowed) {
  if (!j.is_object()) schema_error(context, "expected an object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) schema_error(context, "unknown key \"" + item.key() + "\"");
  }
}

double as_double(const json& j, const std::string& context) {
  if (!j.is_number()) schema_error(context, "expected a number");
  return j.get<double>();
}

int as_int(const json& j, const std::string& context) {
  if (!j.is_number_integer()) schema_error(context, "expected an integer");
  return j.get<int>();
}

uint64_t as_seed(const json& j, const std::string& context) {
  if (!j.is_number_integer() || j.get<int64_t>() < 0) {
    schema_error(context, "expected a non-negative integer");
  }
  return j.get<uint64_t>();
}

bool as_bool(const json& j, const std::string& context) {
  if (!j.is_boolean()) schema_error(context, "expected a boolean");
  return j.get<bool>();
}

std::string as_string(const json& j, const std::string& context) {
  if (!j.is_string()) schema_error(context, "expected a string");
  return j.get<std::string>();
}

Eigen::VectorXd as_vector(const json& j, const std::string& context) {
  if (!j.is_array()) schema_error(context, "expected an array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (size_t i = 0; i < j.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = as_double(j[i], context);
  }
  return v;
}

std::vector<double> as_double_list(const json& j, const std::string& context) {
  if (!j.is_array() || j.empty()) schema_error(context, "expected a non-empty array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& e : j) out.push_back(as_double(e, context));
  return out;
}

// Measurement covariance: a scalar means variance * identity, a flat array a
// diagonal, an array of arrays the full matrix. `out_dim` is the modality's
// output dimension under the scenario's spatial dimension.
Eigen::MatrixXd as_noise(const json& j, int out_dim, const std::string& context) {
  if (j.is_number()) {
    return as_double(j, context) * Eigen::MatrixXd::Identity(out_dim, out_dim);
  }
  if (j.is_array() && !j.empty() && j[0].is_array()) {
    const int rows = static_cast<int>(j.size());
    if (rows != out_dim) schema_error(context, "covariance row count does not match output size");
    Eigen::MatrixXd m(rows, rows);
    for (int r = 0; r < rows; ++r) {
      if (!j[static_cast<size_t>(r)].is_array() ||
          static_cast<int>(j[static_cast<size_t>(r)].size()) != rows) {
        schema_error(context, "covariance must be square");
      }
      for (int c = 0; c < rows; ++c) {
        m(r, c) = as_double(j[static_cast<size_t>(r)][static_cast<size_t>(c)], context);
      }
    }
    return m;
  }
  if (j.is_array()) {
    const Eigen::VectorXd diag = as_vector(j, context);
    if (diag.size() != out_dim) schema_error(context, "diagonal length does not match output size");
    return diag.asDiagonal();
  }
  schema_error(context, "expected a number, an array, or an array of arrays");
}

int modality_output_dim(Modality m, int d) {
  return (m == Modality::Toa || m == Modality::Tdoa) ? 1 : d;
}

Modality as_modality(const json& j, const std::string& context) {
  return parse_modality(as_string(j, context));
}

void apply_lissajous(const json& j, LissajousSpec& spec) {
  check_keys(j, "scenario.lissajous", {"amp_x", "amp_y", "freq_a", "freq_b", "phase"});
  if (j.contains("amp_x")) spec.amp_x = as_double(j["amp_x"], "scenario.lissajous.amp_x");
  if (j.contains("amp_y")) spec.amp_y = as_double(j["amp_y"], "scenario.lissajous.amp_y");
  if (j.contains("freq_a")) spec.freq_a = as_double(j["freq_a"], "scenario.lissajous.freq_a");
  if (j.contains("freq_b")) spec.freq_b = as_double(j["freq_b"], "scenario.lissajous.freq_b");
  if (j.contains("phase")) spec.phase = as_double(j["phase"], "scenario.lissajous.phase");
}

void apply_flight(const json& j, Flight3dSpec& spec) {
  check_keys(j, "scenario.flight", {"amplitudes", "periods", "phase", "z_offset"});
  if (j.contains("amplitudes")) {
    const Eigen::VectorXd v = as_vector(j["amplitudes"], "scenario.flight.amplitudes");
    if (v.size() != 3) schema_error("scenario.flight.amplitudes", "expected 3 values");
    spec.amplitudes = v;
  }
  if (j.contains("periods")) {
    const Eigen::VectorXd v = as_vector(j["periods"], "scenario.flight.periods");
    if (v.size() != 3) schema_error("scenario.flight.periods", "expected 3 values");
    spec.periods = v;
  }
  if (j.contains("phase")) spec.phase = as_double(j["phase"], "scenario.flight.phase");
  if (j.contains("z_offset")) spec.z_offset = as_double(j["z_offset"], "scenario.flight.z_offset");
}

void apply_outliers(const json& j, OutlierSpec& spec) {
  check_keys(j, "scenario.outliers",
             {"probability", "offset", "uniform_magnitude", "offset_lo", "offset_hi",
              "modalities"});
  if (j.contains("probability")) {
    spec.probability = as_double(j["probability"], "scenario.outliers.probability");
  }
  if (j.contains("offset")) spec.offset = as_double(j["offset"], "scenario.outliers.offset");
  if (j.contains("uniform_magnitude")) {
    spec.uniform_magnitude = as_bool(j["uniform_magnitude"], "scenario.outliers.uniform_magnitude");
  }
  if (j.contains("offset_lo")) {
    spec.offset_lo = as_double(j["offset_lo"], "scenario.outliers.offset_lo");
  }
  if (j.contains("offset_hi")) {
    spec.offset_hi = as_double(j["offset_hi"], "scenario.outliers.offset_hi");
  }
  if (j.contains("modalities")) {
    if (!j["modalities"].is_array()) {
      schema_error("scenario.outliers.modalities", "expected an array of modality tokens");
    }
    spec.modalities.clear();
    for (const auto& e : j["modalities"]) {
      spec.modalities.push_back(as_modality(e, "scenario.outliers.modalities"));
    }
  }
}

void apply_scenario(const json& j, ScenarioConfig& sc) {
  check_keys(j, "scenario",
             {"kind", "duration", "truth_rate", "lissajous", "accel_noise_var", "flight",
              "anchors", "sensors", "outliers", "initial_position", "init_perturbation_std"});
  if (j.contains("kind")) {
    const std::string k = as_string(j["kind"], "scenario.kind");
    if (k == "lissajous-cv") {
      sc.kind = ScenarioConfig::Kind::LissajousCv;
    } else if (k == "flight-3d") {
      sc.kind = ScenarioConfig::Kind::Flight3d;
    } else {
      schema_error("scenario.kind", "unknown kind \"" + k + "\"");
    }
  }
  if (j.contains("duration")) sc.duration = as_double(j["duration"], "scenario.duration");
  if (j.contains("truth_rate")) sc.truth_rate = as_double(j["truth_rate"], "scenario.truth_rate");
  if (j.contains("lissajous")) apply_lissajous(j["lissajous"], sc.lissajous);
  if (j.contains("accel_noise_var")) {
    sc.accel_noise_var = as_double(j["accel_noise_var"], "scenario.accel_noise_var");
  }
  if (j.contains("flight")) apply_flight(j["flight"], sc.flight);
  if (j.contains("anchors")) {
    if (!j["anchors"].is_array()) schema_error("scenario.anchors", "expected an array of points");
    sc.anchors.clear();
    for (const auto& e : j["anchors"]) {
      Eigen::VectorXd a = as_vector(e, "scenario.anchors");
      if (a.size() != sc.dim()) schema_error("scenario.anchors", "anchor dimension mismatch");
      sc.anchors.push_back(std::move(a));
    }
  }
  if (j.contains("sensors")) {
    if (!j["sensors"].is_array()) schema_error("scenario.sensors", "expected an array");
    sc.sensors.clear();
    for (const auto& e : j["sensors"]) {
      check_keys(e, "scenario.sensors[]", {"modality", "rate", "start", "stop", "noise"});
      if (!e.contains("modality")) schema_error("scenario.sensors[]", "missing \"modality\"");
      SensorSpec s;
      s.modality = as_modality(e["modality"], "scenario.sensors[].modality");
      if (e.contains("rate")) s.rate = as_double(e["rate"], "scenario.sensors[].rate");
      if (e.contains("start")) s.start = as_double(e["start"], "scenario.sensors[].start");
      if (e.contains("stop")) s.stop = as_double(e["stop"], "scenario.sensors[].stop");
      if (!e.contains("noise")) schema_error("scenario.sensors[]", "missing \"noise\"");
      s.noise = as_noise(e["noise"], modality_output_dim(s.modality, sc.dim()),
                         "scenario.sensors[].noise");
      sc.sensors.push_back(std::move(s));
    }
  }
  if (j.contains("outliers")) apply_outliers(j["outliers"], sc.outliers);
  if (j.contains("initial_position")) {
    Eigen::VectorXd p = as_vector(j["initial_position"], "scenario.initial_position");
    if (p.size() != sc.dim()) {
      schema_error("scenario.initial_position", "dimension does not match scenario kind");
    }
    sc.initial_position = std::move(p);
  }
  if (j.contains("init_perturbation_std")) {
    sc.init_perturbation_std =
        as_double(j["init_perturbation_std"], "scenario.init_perturbation_std");
  }
}

void apply_filter(const json& j, FilterConfig& fc) {
  check_keys(j, "filter", {"tau", "sigma0", "process_noise", "gate"});
  if (j.contains("tau")) fc.tau = as_double(j["tau"], "filter.tau");
  if (j.contains("sigma0")) fc.sigma0 = as_double(j["sigma0"], "filter.sigma0");
  if (j.contains("process_noise")) {
    const json& q = j["process_noise"];
    check_keys(q, "filter.process_noise", {"omega", "nu", "matrix"});
    if (q.contains("omega")) {
      fc.process_noise.omega = as_double(q["omega"], "filter.process_noise.omega");
    }
    if (q.contains("nu")) fc.process_noise.nu = as_double(q["nu"], "filter.process_noise.nu");
    if (q.contains("matrix")) {
      const json& m = q["matrix"];
      if (!m.is_array() || m.empty() || !m[0].is_array()) {
        schema_error("filter.process_noise.matrix", "expected an array of arrays");
      }
      const int n = static_cast<int>(m.size());
      Eigen::MatrixXd full(n, n);
      for (int r = 0; r < n; ++r) {
        if (static_cast<int>(m[static_cast<size_t>(r)].size()) != n) {
          schema_error("filter.process_noise.matrix", "matrix must be square");
        }
        for (int c = 0; c < n; ++c) {
          full(r, c) = as_double(m[static_cast<size_t>(r)][static_cast<size_t>(c)],
                                 "filter.process_noise.matrix");
        }
      }
      fc.process_noise.override_matrix = std::move(full);
    }
  }
  if (j.contains("gate")) {
    if (!j["gate"].is_object()) {
      schema_error("filter.gate", "expected an object mapping modality to threshold");
    }
    fc.gate.clear();
    for (const auto& item : j["gate"].items()) {
      fc.gate[parse_modality(item.key())] = as_double(item.value(), "filter.gate");
    }
  }
}

void apply_eval(const json& j, EvalGrid& grid) {
  check_keys(j, "eval", {"start", "stop", "rate"});
  if (j.contains("start")) grid.start = as_double(j["start"], "eval.start");
  if (j.contains("stop")) grid.stop = as_double(j["stop"], "eval.stop");
  if (j.contains("rate")) grid.rate = as_double(j["rate"], "eval.rate");
}

void apply_sweep(const json& j, RunConfig& cfg) {
  check_keys(j, "sweep", {"ratios", "taus", "runs_per_cell"});
  if (j.contains("ratios")) cfg.sweep_ratios = as_double_list(j["ratios"], "sweep.ratios");
  if (j.contains("taus")) cfg.sweep_taus = as_double_list(j["taus"], "sweep.taus");
  if (j.contains("runs_per_cell")) {
    cfg.sweep_runs_per_cell = as_int(j["runs_per_cell"], "sweep.runs_per_cell");
  }
}

std::vector<Eigen::VectorXd> box_anchors() {
  std::vector<Eigen::VectorXd> anchors;
  for (double x : {-4.0, 4.0}) {
    for (double y : {-4.0, 4.0}) {
      for (double z : {0.3, 2.7}) {
        anchors.push_back(Eigen::Vector3d(x, y, z));
      }
    }
  }
  return anchors;
}

RunConfig case_study_preset() {
  RunConfig cfg;
  cfg.name = "case-study";
  cfg.scenario.kind = ScenarioConfig::Kind::LissajousCv;
  cfg.scenario.duration = 6.0;
  cfg.scenario.truth_rate = 100.0;
  cfg.scenario.lissajous = LissajousSpec{};  // amp 2/2, freq 1/2, phase pi/2
  cfg.scenario.accel_noise_var = 0.25;
  SensorSpec gps;
  gps.modality = Modality::LinearPosition;
  gps.rate = 100.0;
  gps.noise = 0.01 * Eigen::Matrix2d::Identity();
  cfg.scenario.sensors = {gps};

  cfg.filter.dim = 2;
  cfg.filter.tau = 0.01;
  cfg.filter.sigma0 = 1.0;
  cfg.filter.process_noise.omega = 0.5;
  cfg.filter.process_noise.nu = 1.0;

  cfg.eval = {0.0, 6.0, 100.0};
  cfg.mc_runs = 200;
  cfg.seed_base = 1000;
  return cfg;
}

RunConfig toa_inertial_preset() {
  RunConfig cfg;
  cfg.name = "toa-inertial";
  cfg.scenario.kind = ScenarioConfig::Kind::Flight3d;
  cfg.scenario.duration = 30.0;
  cfg.scenario.truth_rate = 200.0;
  cfg.scenario.flight.periods = Eigen::Vector3d(25.0, 17.0, 11.0);
  cfg.scenario.anchors = box_anchors();

  SensorSpec toa;
  toa.modality = Modality::Toa;
  toa.rate = 20.0;
  toa.start = 0.5;
  toa.noise = Eigen::MatrixXd::Constant(1, 1, 0.01);
  SensorSpec acc;
  acc.modality = Modality::Accelerometer;
  acc.rate = 100.0;
  acc.start = 0.5;
  acc.noise = 0.01 * Eigen::Matrix3d::Identity();
  cfg.scenario.sensors = {toa, acc};

  cfg.scenario.initial_position = cfg.scenario.flight.position(0.5);
  cfg.scenario.init_perturbation_std = 0.1;

  cfg.filter.dim = 3;
  cfg.filter.tau = 1.0;
  cfg.filter.sigma0 = 1.0;
  cfg.filter.process_noise.omega = 2e-7;
  cfg.filter.process_noise.nu = 1e-2;

  cfg.eval = {1.0, 29.0, 50.0};
  cfg.mc_runs = 100;
  cfg.seed_base = 5000;
  return cfg;
}

RunConfig tdoa_real_preset() {
  RunConfig cfg;
  cfg.name = "tdoa-real";
  cfg.scenario.kind = ScenarioConfig::Kind::Flight3d;
  cfg.scenario.duration = 30.0;
  cfg.scenario.truth_rate = 200.0;
  cfg.scenario.flight.periods = Eigen::Vector3d(37.0, 25.0, 17.0);
  cfg.scenario.anchors = box_anchors();

  SensorSpec tdoa;
  tdoa.modality = Modality::Tdoa;
  tdoa.rate = 50.0;
  tdoa.start = 0.5;
  tdoa.noise = Eigen::MatrixXd::Constant(1, 1, 0.05);
  cfg.scenario.sensors = {tdoa};

  cfg.scenario.outliers.probability = 0.05;
  cfg.scenario.outliers.offset = 5.0;
  cfg.scenario.outliers.modalities = {Modality::Tdoa};

  cfg.scenario.initial_position = cfg.scenario.flight.position(0.5);
  cfg.scenario.init_perturbation_std = 0.0;

  cfg.filter.dim = 3;
  cfg.filter.tau = 2.0;
  cfg.filter.sigma0 = 0.5;
  cfg.filter.process_noise.omega = 0.01;
  cfg.filter.process_noise.nu = 0.01;
  cfg.filter.gate[Modality::Tdoa] = 15.0;

  cfg.eval = {1.0, 29.0, 50.0};
  cfg.mc_runs = 50;
  cfg.seed_base = 7000;
  return cfg;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    raise(Errc::ConfigParse, std::string("config: ") + e.what());
  }
  if (!j.is_object()) raise(Errc::SchemaViolation, "config: top level must be an object");
  check_keys(j, "config",
             {"preset", "name", "scenario", "filter", "eval", "mc_runs", "seed_base", "sweep"});

  RunConfig cfg;
  if (j.contains("preset")) {
    cfg = preset_config(as_string(j["preset"], "preset"));
  }
  if (j.contains("name")) cfg.name = as_string(j["name"], "name");
  if (j.contains("scenario")) apply_scenario(j["scenario"], cfg.scenario);
  cfg.filter.dim = cfg.scenario.dim();
  if (j.contains("filter")) apply_filter(j["filter"], cfg.filter);
  if (j.contains("eval")) apply_eval(j["eval"], cfg.eval);
  if (j.contains("mc_runs")) cfg.mc_runs = as_int(j["mc_runs"], "mc_runs");
  if (j.contains("seed_base")) cfg.seed_base = as_seed(j["seed_base"], "seed_base");
  if (j.contains("sweep")) apply_sweep(j["sweep"], cfg);

  if (cfg.scenario.duration <= 0) raise(Errc::SchemaViolation, "config: duration must be > 0");
  if (cfg.scenario.truth_rate <= 0) raise(Errc::SchemaViolation, "config: truth_rate must be > 0");
  if (cfg.filter.tau <= 0) raise(Errc::SchemaViolation, "config: filter.tau must be > 0");
  if (cfg.mc_runs < 1) raise(Errc::SchemaViolation, "config: mc_runs must be >= 1");
  for (const auto& s : cfg.scenario.sensors) {
    if (s.rate <= 0) raise(Errc::SchemaViolation, "config: sensor rate must be > 0");
  }
  return cfg;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::IoError, "cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) raise(Errc::IoError, "cannot read config file: " + path);
  return parse_config(buf.str());
}

RunConfig preset_config(const std::string& name) {
  if (name == "case-study") return case_study_preset();
  if (name == "toa-inertial") return toa_inertial_preset();
  if (name == "tdoa-real") return tdoa_real_preset();
  raise(Errc::SchemaViolation, "config: unknown preset \"" + name + "\"");
}

std::vector<std::string> preset_names() { return {"case-study", "tdoa-real", "toa-inertial"}; }

std::string config_to_json(const RunConfig& config) {
  json j;
  j["name"] = config.name;

  json sc;
  sc["kind"] =
      config.scenario.kind == ScenarioConfig::Kind::LissajousCv ? "lissajous-cv" : "flight-3d";
  sc["duration"] = config.scenario.duration;
  sc["truth_rate"] = config.scenario.truth_rate;
  if (config.scenario.kind == ScenarioConfig::Kind::LissajousCv) {
    sc["lissajous"] = {{"amp_x", config.scenario.lissajous.amp_x},
                       {"amp_y", config.scenario.lissajous.amp_y},
                       {"freq_a", config.scenario.lissajous.freq_a},
                       {"freq_b", config.scenario.lissajous.freq_b},
                       {"phase", config.scenario.lissajous.phase}};
    sc["accel_noise_var"] = config.scenario.accel_noise_var;
  } else {
    sc["flight"] = {{"amplitudes", vector_to_json(config.scenario.flight.amplitudes)},
                    {"periods", vector_to_json(config.scenario.flight.periods)},
                    {"phase", config.scenario.flight.phase},
                    {"z_offset", config.scenario.flight.z_offset}};
  }
  if (!config.scenario.anchors.empty()) {
    json anchors = json::array();
    for (const auto& a : config.scenario.anchors) anchors.push_back(vector_to_json(a));
    sc["anchors"] = std::move(anchors);
  }
  json sensors = json::array();
  for (const auto& s : config.scenario.sensors) {
    sensors.push_back({{"modality", modality_token(s.modality)},
                       {"rate", s.rate},
                       {"start", s.start},
                       {"stop", s.stop},
                       {"noise", matrix_to_json(s.noise)}});
  }
  sc["sensors"] = std::move(sensors);
  if (config.scenario.outliers.probability > 0) {
    json mods = json::array();
    for (const auto m : config.scenario.outliers.modalities) mods.push_back(modality_token(m));
    sc["outliers"] = {{"probability", config.scenario.outliers.probability},
                      {"offset", config.scenario.outliers.offset},
                      {"uniform_magnitude", config.scenario.outliers.uniform_magnitude},
                      {"offset_lo", config.scenario.outliers.offset_lo},
                      {"offset_hi", config.scenario.outliers.offset_hi},
                      {"modalities", std::move(mods)}};
  }
  if (config.scenario.initial_position) {
    sc["initial_position"] = vector_to_json(*config.scenario.initial_position);
  }
  sc["init_perturbation_std"] = config.scenario.init_perturbation_std;
  j["scenario"] = std::move(sc);

  json fc;
  fc["tau"] = config.filter.tau;
  fc["sigma0"] = config.filter.sigma0;
  json q;
  q["omega"] = config.filter.process_noise.omega;
  q["nu"] = config.filter.process_noise.nu;
  if (config.filter.process_noise.override_matrix) {
    q["matrix"] = matrix_to_json(*config.filter.process_noise.override_matrix);
  }
  fc["process_noise"] = std::move(q);
  if (!config.filter.gate.empty()) {
    json gate;
    for (const auto& [m, eps] : config.filter.gate) gate[modality_token(m)] = eps;
    fc["gate"] = std::move(gate);
  }
  j["filter"] = std::move(fc);

  j["eval"] = {{"start", config.eval.start}, {"stop", config.eval.stop},
               {"rate", config.eval.rate}};
  j["mc_runs"] = config.mc_runs;
  j["seed_base"] = config.seed_base;
  j["sweep"] = {{"ratios", config.sweep_ratios},
                {"taus", config.sweep_taus},
                {"runs_per_cell", config.sweep_runs_per_cell}};
  return j.dump(2) + "\n";
}

}  // namespace sere

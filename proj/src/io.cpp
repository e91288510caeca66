#include "mpcert/io.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace mpcert::io {

using nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  if (res.ec != std::errc()) throw IoError("format_double: conversion failed");
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s) {
  double v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw IoError("parse_double: bad number '" + std::string(s) + "'");
  return v;
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf, 16);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed: " + path);
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << content;
  out.flush();
  if (!out) throw IoError("write failed: " + path);
}

std::string timestamp_utc() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

namespace {

json flat(const MatXd& m) {
  json a = json::array();
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) a.push_back(m(r, c));
  return a;
}

json flat(const VecXd& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

MatXd mat_from(const json& a, int rows, int cols, const char* what) {
  if (!a.is_array() || static_cast<int>(a.size()) != rows * cols)
    throw IoError(std::string(what) + ": expected " + std::to_string(rows * cols) + " entries");
  MatXd m(rows, cols);
  int k = 0;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = a[k++].get<double>();
  return m;
}

VecXd vec_from(const json& a, const char* what) {
  if (!a.is_array()) throw IoError(std::string(what) + ": expected an array");
  VecXd v(static_cast<int>(a.size()));
  for (int i = 0; i < v.size(); ++i) v(i) = a[static_cast<std::size_t>(i)].get<double>();
  return v;
}

std::vector<int> ints_from(const json& a, const char* what) {
  if (!a.is_array()) throw IoError(std::string(what) + ": expected an array");
  std::vector<int> v;
  v.reserve(a.size());
  for (const auto& e : a) v.push_back(e.get<int>());
  return v;
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const char* where) {
  if (!j.is_object()) throw IoError(std::string(where) + ": expected an object");
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* k : allowed)
      if (item.key() == k) {
        ok = true;
        break;
      }
    if (!ok) throw IoError(std::string(where) + ": unknown key '" + item.key() + "'");
  }
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw IoError(what + ": " + e.what());
  }
}

/// Parsed CSV: '#' comment lines contribute key=value metadata tokens, the
/// first plain line names the columns, every later line is a data row.
struct CsvTable {
  std::map<std::string, std::string> meta;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

CsvTable read_csv(const std::string& path) {
  const std::string text = read_file(path);
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ls(line.substr(1));
      std::string tok;
      while (ls >> tok) {
        const std::size_t eq = tok.find('=');
        if (eq != std::string::npos) t.meta[tok.substr(0, eq)] = tok.substr(eq + 1);
      }
      continue;
    }
    if (!have_header) {
      t.columns = split(line, ',');
      have_header = true;
      continue;
    }
    const auto cells = split(line, ',');
    if (cells.size() != t.columns.size())
      throw IoError(path + ": row has " + std::to_string(cells.size()) + " cells, expected " +
                    std::to_string(t.columns.size()));
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_double(c));
    t.rows.push_back(std::move(row));
  }
  if (!have_header) throw IoError(path + ": no column header row");
  return t;
}

std::string meta_or_throw(const CsvTable& t, const std::string& key, const std::string& path) {
  const auto it = t.meta.find(key);
  if (it == t.meta.end()) throw IoError(path + ": missing '# " + key + "=' metadata");
  return it->second;
}

void csv_preamble(std::string& out, const char* kind, const std::string& config_hash) {
  out += "# mpcert ";
  out += kind;
  out += " v1\n# generated=";
  out += timestamp_utc();
  out += "\n# config_hash=";
  out += config_hash.empty() ? "none" : config_hash;
  out += "\n";
}

void append_cell(std::string& out, double v, bool first) {
  if (!first) out += ',';
  out += format_double(v);
}

}  // namespace

// --- QP problem files -------------------------------------------------------

void save_qp(const std::string& path, const DenseQp<double>& qp) {
  json j;
  j["type"] = "qp";
  j["n"] = qp.n();
  j["m"] = qp.m();
  j["H"] = flat(qp.H);
  j["f"] = flat(qp.f);
  j["A"] = flat(qp.A);
  j["b"] = flat(qp.b);
  write_file(path, j.dump(1) + "\n");
}

DenseQp<double> load_qp(const std::string& path) {
  const json j = parse_json(read_file(path), path);
  check_keys(j, {"type", "n", "m", "H", "f", "A", "b"}, "qp file");
  const int n = j.at("n").get<int>();
  const int m = j.at("m").get<int>();
  if (n <= 0 || m < 0) throw IoError(path + ": bad dimensions");
  DenseQp<double> qp;
  qp.H = mat_from(j.at("H"), n, n, "qp H");
  qp.f = vec_from(j.at("f"), "qp f");
  qp.A = mat_from(j.at("A"), m, n, "qp A");
  qp.b = vec_from(j.at("b"), "qp b");
  if (qp.f.size() != n || qp.b.size() != m) throw IoError(path + ": vector lengths");
  return qp;
}

// --- Polyhedron files -------------------------------------------------------

void save_polyhedron(const std::string& path, const Polyhedrond& poly) {
  json j;
  j["type"] = "polyhedron";
  j["dim"] = poly.dim();
  j["rows"] = poly.rows();
  j["A"] = flat(poly.A);
  j["b"] = flat(poly.b);
  write_file(path, j.dump(1) + "\n");
}

Polyhedrond load_polyhedron(const std::string& path) {
  const json j = parse_json(read_file(path), path);
  check_keys(j, {"type", "dim", "rows", "A", "b"}, "polyhedron file");
  const int d = j.at("dim").get<int>();
  const int r = j.at("rows").get<int>();
  if (d <= 0 || r < 0) throw IoError(path + ": bad dimensions");
  Polyhedrond p;
  p.A = mat_from(j.at("A"), r, d, "polyhedron A");
  p.b = vec_from(j.at("b"), "polyhedron b");
  p.validate();
  return p;
}

// --- PCA box files ----------------------------------------------------------

void save_pca_box(const std::string& path, const PcaBox& box) {
  json j;
  j["type"] = "pca_box";
  j["dim"] = box.dim();
  j["U"] = flat(box.U);
  j["mu"] = flat(box.mu);
  j["z_lo"] = flat(box.z_lo);
  j["z_hi"] = flat(box.z_hi);
  j["delta"] = box.delta;
  j["A_p"] = flat(box.A_p);
  j["b_p"] = flat(box.b_p);
  j["degenerate"] = box.degenerate;
  write_file(path, j.dump(1) + "\n");
}

PcaBox load_pca_box(const std::string& path) {
  const json j = parse_json(read_file(path), path);
  check_keys(j, {"type", "dim", "U", "mu", "z_lo", "z_hi", "delta", "A_p", "b_p", "degenerate"},
             "pca box file");
  const int n = j.at("dim").get<int>();
  if (n <= 0) throw IoError(path + ": bad dimension");
  PcaBox box;
  box.U = mat_from(j.at("U"), n, n, "pca U");
  box.mu = vec_from(j.at("mu"), "pca mu");
  box.z_lo = vec_from(j.at("z_lo"), "pca z_lo");
  box.z_hi = vec_from(j.at("z_hi"), "pca z_hi");
  box.delta = j.at("delta").get<double>();
  box.A_p = mat_from(j.at("A_p"), 2 * n, n, "pca A_p");
  box.b_p = vec_from(j.at("b_p"), "pca b_p");
  box.degenerate = j.at("degenerate").get<bool>();
  if (box.mu.size() != n || box.z_lo.size() != n || box.z_hi.size() != n ||
      box.b_p.size() != 2 * n)
    throw IoError(path + ": vector lengths");
  return box;
}

// --- State logs --------------------------------------------------------------

namespace {

std::vector<std::string> state_log_columns(int dim) {
  if (dim == 12) {
    return {"err_pos_x_m",        "err_pos_y_m",        "err_pos_z_m",
            "err_vel_x_mps",      "err_vel_y_mps",      "err_vel_z_mps",
            "err_rod_x",          "err_rod_y",          "err_rod_z",
            "err_omega_x_radps",  "err_omega_y_radps",  "err_omega_z_radps"};
  }
  std::vector<std::string> cols;
  cols.reserve(static_cast<std::size_t>(dim));
  for (int i = 0; i < dim; ++i) cols.push_back("z_" + std::to_string(i));
  return cols;
}

}  // namespace

void save_state_log(const std::string& path, const StateLog& log, const std::string& config_hash) {
  std::string out;
  csv_preamble(out, "state_log", config_hash);
  out += "# rate_hz=" + format_double(log.sample_rate_hz) + " source=" + log.source + "\n";
  const auto cols = state_log_columns(log.dim());
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) out += ',';
    out += cols[i];
  }
  out += '\n';
  for (int k = 0; k < log.count(); ++k) {
    for (int i = 0; i < log.dim(); ++i) append_cell(out, log.samples(i, k), i == 0);
    out += '\n';
  }
  write_file(path, out);
}

StateLog load_state_log(const std::string& path) {
  const CsvTable t = read_csv(path);
  const int dim = static_cast<int>(t.columns.size());
  const int count = static_cast<int>(t.rows.size());
  StateLog log;
  log.samples.resize(dim, count);
  for (int k = 0; k < count; ++k)
    for (int i = 0; i < dim; ++i) log.samples(i, k) = t.rows[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)];
  log.sample_rate_hz = parse_double(meta_or_throw(t, "rate_hz", path));
  const auto src = t.meta.find("source");
  if (src != t.meta.end()) log.source = src->second;
  return log;
}

// --- Simulation logs ----------------------------------------------------------

namespace {

std::vector<std::string> sim_log_columns() {
  std::vector<std::string> cols = {
      "time_s",
      "pos_x_m",       "pos_y_m",       "pos_z_m",
      "vel_x_mps",     "vel_y_mps",     "vel_z_mps",
      "quat_w",        "quat_x",        "quat_y",        "quat_z",
      "omega_x_radps", "omega_y_radps", "omega_z_radps"};
  const auto err = state_log_columns(12);
  cols.insert(cols.end(), err.begin(), err.end());
  for (int i = 1; i <= 4; ++i) cols.push_back("u_" + std::to_string(i));
  cols.push_back("deadline_violation");
  cols.push_back("flops");
  cols.push_back("iterations");
  return cols;
}

}  // namespace

void save_sim_log(const std::string& path, const SimLog& log, const std::string& config_hash) {
  std::string out;
  csv_preamble(out, "sim_log", config_hash);
  out += "# controller_rate_hz=" + format_double(log.controller_rate_hz) +
         " diverged=" + std::to_string(log.diverged ? 1 : 0) +
         " clamp_events=" + std::to_string(log.clamp_events) +
         " violation_count=" + std::to_string(log.violation_count) + "\n";
  const auto cols = sim_log_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) out += ',';
    out += cols[i];
  }
  out += '\n';
  for (int k = 0; k < log.ticks(); ++k) {
    append_cell(out, log.time[static_cast<std::size_t>(k)], true);
    for (int i = 0; i < 13; ++i) append_cell(out, log.states(i, k), false);
    for (int i = 0; i < 12; ++i) append_cell(out, log.errors(i, k), false);
    for (int i = 0; i < 4; ++i) append_cell(out, log.inputs(i, k), false);
    out += ',' + std::to_string(static_cast<int>(log.deadline_violation[static_cast<std::size_t>(k)]));
    out += ',' + std::to_string(log.flops[static_cast<std::size_t>(k)]);
    out += ',' + std::to_string(log.iterations[static_cast<std::size_t>(k)]);
    out += '\n';
  }
  write_file(path, out);
}

SimLog load_sim_log(const std::string& path) {
  const CsvTable t = read_csv(path);
  const auto expected = sim_log_columns();
  if (t.columns != expected) throw IoError(path + ": unexpected sim log columns");
  const int ticks = static_cast<int>(t.rows.size());
  SimLog log;
  log.states.resize(13, ticks);
  log.errors.resize(12, ticks);
  log.inputs.resize(4, ticks);
  log.time.resize(static_cast<std::size_t>(ticks));
  log.deadline_violation.resize(static_cast<std::size_t>(ticks));
  log.flops.resize(static_cast<std::size_t>(ticks));
  log.iterations.resize(static_cast<std::size_t>(ticks));
  for (int k = 0; k < ticks; ++k) {
    const auto& row = t.rows[static_cast<std::size_t>(k)];
    int c = 0;
    log.time[static_cast<std::size_t>(k)] = row[static_cast<std::size_t>(c++)];
    for (int i = 0; i < 13; ++i) log.states(i, k) = row[static_cast<std::size_t>(c++)];
    for (int i = 0; i < 12; ++i) log.errors(i, k) = row[static_cast<std::size_t>(c++)];
    for (int i = 0; i < 4; ++i) log.inputs(i, k) = row[static_cast<std::size_t>(c++)];
    log.deadline_violation[static_cast<std::size_t>(k)] =
        static_cast<std::uint8_t>(row[static_cast<std::size_t>(c++)]);
    log.flops[static_cast<std::size_t>(k)] = static_cast<std::uint64_t>(row[static_cast<std::size_t>(c++)]);
    log.iterations[static_cast<std::size_t>(k)] = static_cast<int>(row[static_cast<std::size_t>(c++)]);
  }
  log.controller_rate_hz = parse_double(meta_or_throw(t, "controller_rate_hz", path));
  log.diverged = meta_or_throw(t, "diverged", path) == "1";
  log.clamp_events = static_cast<int>(parse_double(meta_or_throw(t, "clamp_events", path)));
  log.violation_count = static_cast<int>(parse_double(meta_or_throw(t, "violation_count", path)));
  return log;
}

// --- Partitions ----------------------------------------------------------------

void save_partition(const std::string& path, const Partitiond& part) {
  std::string out;
  {
    json h;
    h["type"] = "partition";
    h["version"] = 1;
    h["dim"] = part.theta_set.dim();
    h["family_checksum"] = part.family_checksum;
    h["complete"] = part.complete;
    h["capped_regions"] = part.capped_regions;
    h["infeasible_regions"] = part.infeasible_regions;
    h["dropped_slivers"] = part.dropped_slivers;
    h["max_iterations"] = part.max_iterations;
    h["region_count"] = static_cast<int>(part.regions.size());
    h["theta"] = {{"rows", part.theta_set.rows()},
                  {"A", flat(part.theta_set.A)},
                  {"b", flat(part.theta_set.b)}};
    out += h.dump();
    out += '\n';
  }
  for (const auto& r : part.regions) {
    json j;
    j["id"] = r.id;
    j["status"] = to_string(r.status);
    j["iterations"] = r.iterations;
    json seq = json::array();
    for (const auto& ws : r.ws_sequence) seq.push_back(ws.indices());
    j["ws_sequence"] = seq;
    j["witness"] = flat(r.witness);
    j["witness_radius"] = r.witness_radius;
    j["path"] = r.path;
    j["poly"] = {{"rows", r.poly.rows()}, {"A", flat(r.poly.A)}, {"b", flat(r.poly.b)}};
    out += j.dump();
    out += '\n';
  }
  write_file(path, out);
}

namespace {

RegionStatus status_from(const std::string& s, const std::string& path) {
  if (s == "optimal") return RegionStatus::Optimal;
  if (s == "iteration_cap_reached") return RegionStatus::IterationCapReached;
  if (s == "infeasible_detected") return RegionStatus::InfeasibleDetected;
  throw IoError(path + ": unknown region status '" + s + "'");
}

Polyhedrond poly_from(const json& j, int dim, const char* what) {
  check_keys(j, {"rows", "A", "b"}, what);
  const int rows = j.at("rows").get<int>();
  Polyhedrond p;
  p.A = mat_from(j.at("A"), rows, dim, what);
  p.b = vec_from(j.at("b"), what);
  p.validate();
  return p;
}

}  // namespace

Partitiond load_partition(const std::string& path) {
  const std::string text = read_file(path);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw IoError(path + ": empty partition file");
  const json h = parse_json(line, path);
  check_keys(h,
             {"type", "version", "dim", "family_checksum", "complete", "capped_regions",
              "infeasible_regions", "dropped_slivers", "max_iterations", "region_count", "theta"},
             "partition header");
  if (h.at("type").get<std::string>() != "partition") throw IoError(path + ": not a partition file");
  const int dim = h.at("dim").get<int>();
  Partitiond part;
  part.family_checksum = h.at("family_checksum").get<std::uint64_t>();
  part.complete = h.at("complete").get<bool>();
  part.capped_regions = h.at("capped_regions").get<int>();
  part.infeasible_regions = h.at("infeasible_regions").get<int>();
  part.dropped_slivers = h.at("dropped_slivers").get<int>();
  part.max_iterations = h.at("max_iterations").get<int>();
  part.theta_set = poly_from(h.at("theta"), dim, "partition theta");
  const int count = h.at("region_count").get<int>();
  part.regions.reserve(static_cast<std::size_t>(count));
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = parse_json(line, path);
    check_keys(j, {"id", "status", "iterations", "ws_sequence", "witness", "witness_radius",
                   "path", "poly"},
               "partition region");
    Region<double> r;
    r.id = j.at("id").get<int>();
    r.status = status_from(j.at("status").get<std::string>(), path);
    r.iterations = j.at("iterations").get<int>();
    for (const auto& ws : j.at("ws_sequence"))
      r.ws_sequence.emplace_back(ints_from(ws, "ws_sequence"));
    r.witness = vec_from(j.at("witness"), "region witness");
    r.witness_radius = j.at("witness_radius").get<double>();
    r.path = ints_from(j.at("path"), "region path");
    r.poly = poly_from(j.at("poly"), dim, "region poly");
    part.regions.push_back(std::move(r));
  }
  if (static_cast<int>(part.regions.size()) != count)
    throw IoError(path + ": expected " + std::to_string(count) + " regions, found " +
                  std::to_string(part.regions.size()));
  return part;
}

// --- Measurements -----------------------------------------------------------------

void save_measurements(const std::string& path, const MeasurementVectord& mv,
                       const std::string& config_hash) {
  const std::size_t n = mv.region_ids.size();
  if (mv.tau.size() != n || mv.witnesses.size() != n)
    throw IoError("save_measurements: field lengths disagree");
  const int d = n == 0 ? 0 : static_cast<int>(mv.witnesses.front().size());
  std::string out;
  csv_preamble(out, "measurements", config_hash);
  const std::string units = mv.mode == "wallclock" ? "microseconds" : "flops";
  out += "# mode=" + mv.mode + " units=" + units + " dim=" + std::to_string(d) + "\n";
  out += "region_id,tau";
  for (int i = 0; i < d; ++i) out += ",theta_" + std::to_string(i);
  out += '\n';
  for (std::size_t k = 0; k < n; ++k) {
    if (static_cast<int>(mv.witnesses[k].size()) != d)
      throw IoError("save_measurements: witness dimension disagrees");
    out += std::to_string(mv.region_ids[k]);
    out += ',';
    out += format_double(mv.tau[k]);
    for (int i = 0; i < d; ++i) append_cell(out, mv.witnesses[k](i), false);
    out += '\n';
  }
  write_file(path, out);
}

MeasurementVectord load_measurements(const std::string& path) {
  const CsvTable t = read_csv(path);
  if (t.columns.size() < 2 || t.columns[0] != "region_id" || t.columns[1] != "tau")
    throw IoError(path + ": unexpected measurement columns");
  const int d = static_cast<int>(t.columns.size()) - 2;
  MeasurementVectord mv;
  mv.mode = meta_or_throw(t, "mode", path);
  for (const auto& row : t.rows) {
    mv.region_ids.push_back(static_cast<int>(row[0]));
    mv.tau.push_back(row[1]);
    VecXd w(d);
    for (int i = 0; i < d; ++i) w(i) = row[static_cast<std::size_t>(i + 2)];
    mv.witnesses.push_back(std::move(w));
  }
  return mv;
}

// --- Run configuration --------------------------------------------------------------

namespace {

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  const auto it = j.find(key);
  return it == j.end() ? fallback : it->get<T>();
}

void parse_theta(const json& j, ThetaConfig& t) {
  check_keys(j, {"source", "half_width", "lo", "hi", "file", "delta"}, "theta");
  t.source = get_or<std::string>(j, "source", t.source);
  if (t.source != "box_b" && t.source != "box" && t.source != "pca" && t.source != "polyhedron")
    throw IoError("theta.source must be box_b | box | pca | polyhedron");
  t.half_width = get_or<double>(j, "half_width", t.half_width);
  if (j.contains("lo")) t.lo = vec_from(j.at("lo"), "theta.lo");
  if (j.contains("hi")) t.hi = vec_from(j.at("hi"), "theta.hi");
  if (t.lo.size() != t.hi.size()) throw IoError("theta.lo and theta.hi must have equal length");
  t.file = get_or<std::string>(j, "file", t.file);
  t.delta = get_or<double>(j, "delta", t.delta);
  if ((t.source == "pca" || t.source == "polyhedron") && t.file.empty())
    throw IoError("theta.source '" + t.source + "' requires theta.file");
}

void parse_slice(const json& j, SliceConfig& s) {
  check_keys(j, {"dims", "fixed"}, "slice");
  if (j.contains("dims")) s.dims = ints_from(j.at("dims"), "slice.dims");
  if (j.contains("fixed")) s.fixed = vec_from(j.at("fixed"), "slice.fixed");
}

void parse_solver(const json& j, SolverConfig<double>& s) {
  check_keys(j, {"eps_primal", "eps_dual", "max_iter", "initial_ws"}, "solver");
  s.eps_primal = get_or<double>(j, "eps_primal", s.eps_primal);
  s.eps_dual = get_or<double>(j, "eps_dual", s.eps_dual);
  s.max_iter = get_or<int>(j, "max_iter", s.max_iter);
  if (j.contains("initial_ws")) s.initial_ws = WorkingSet(ints_from(j.at("initial_ws"), "initial_ws"));
}

void parse_admm(const json& j, AdmmSection& a) {
  check_keys(j, {"rho", "eps_primal", "eps_dual", "max_iter"}, "admm");
  a.rho = get_or<double>(j, "rho", a.rho);
  a.eps_primal = get_or<double>(j, "eps_primal", a.eps_primal);
  a.eps_dual = get_or<double>(j, "eps_dual", a.eps_dual);
  a.max_iter = get_or<int>(j, "max_iter", a.max_iter);
}

void parse_cert(const json& j, CertSection& c) {
  check_keys(j, {"region_budget", "sliver_radius", "workers"}, "cert");
  c.region_budget = get_or<long long>(j, "region_budget", c.region_budget);
  c.sliver_radius = get_or<double>(j, "sliver_radius", c.sliver_radius);
  c.workers = get_or<int>(j, "workers", c.workers);
}

void parse_sampling(const json& j, SamplingConfig& s) {
  check_keys(j, {"method", "count", "seed"}, "sampling");
  s.method = get_or<std::string>(j, "method", s.method);
  if (s.method != "certified" && s.method != "uniform")
    throw IoError("sampling.method must be certified | uniform");
  s.count = get_or<int>(j, "count", s.count);
  s.seed = get_or<std::uint64_t>(j, "seed", s.seed);
}

void parse_sim(const json& j, SimSection& s) {
  check_keys(j,
             {"trajectory", "duration_s", "deadline_flops_budget", "controller_u0_scale",
              "fig8_amplitude_m", "fig8_period_s", "altitude_m", "log_rate_hz"},
             "sim");
  s.trajectory = get_or<std::string>(j, "trajectory", s.trajectory);
  if (s.trajectory != "step" && s.trajectory != "hover" && s.trajectory != "figure_eight")
    throw IoError("sim.trajectory must be step | hover | figure_eight");
  s.duration_s = get_or<double>(j, "duration_s", s.duration_s);
  s.deadline_flops_budget = get_or<double>(j, "deadline_flops_budget", s.deadline_flops_budget);
  s.controller_u0_scale = get_or<double>(j, "controller_u0_scale", s.controller_u0_scale);
  s.fig8_amplitude_m = get_or<double>(j, "fig8_amplitude_m", s.fig8_amplitude_m);
  s.fig8_period_s = get_or<double>(j, "fig8_period_s", s.fig8_period_s);
  s.altitude_m = get_or<double>(j, "altitude_m", s.altitude_m);
  s.log_rate_hz = get_or<double>(j, "log_rate_hz", s.log_rate_hz);
}

void parse_custom(const json& j, CustomProblem& c) {
  check_keys(j, {"nx", "nu", "nc", "F", "G", "Q", "R", "P", "Az", "Au", "b_s"}, "custom");
  const int nx = j.at("nx").get<int>();
  const int nu = j.at("nu").get<int>();
  const int nc = get_or<int>(j, "nc", 0);
  if (nx <= 0 || nu <= 0 || nc < 0) throw IoError("custom: bad dimensions");
  c.F = mat_from(j.at("F"), nx, nx, "custom F");
  c.G = mat_from(j.at("G"), nx, nu, "custom G");
  c.Q = mat_from(j.at("Q"), nx, nx, "custom Q");
  c.R = mat_from(j.at("R"), nu, nu, "custom R");
  if (j.contains("P")) c.P = mat_from(j.at("P"), nx, nx, "custom P");
  c.Az = mat_from(j.at("Az"), nc, nx, "custom Az");
  c.Au = mat_from(j.at("Au"), nc, nu, "custom Au");
  c.b_s = vec_from(j.at("b_s"), "custom b_s");
  if (c.b_s.size() != nc) throw IoError("custom: b_s length");
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
  RunConfig cfg;
  cfg.raw = text;
  cfg.hash = fnv1a_hex(text);
  const json j = parse_json(text, "run config");
  check_keys(j,
             {"problem", "horizon", "dt", "r_weight", "q_diag", "custom", "theta", "slice",
              "solver", "admm", "cert", "sampling", "sim"},
             "run config");
  cfg.problem = get_or<std::string>(j, "problem", cfg.problem);
  if (cfg.problem != "double_integrator" && cfg.problem != "quadrotor" && cfg.problem != "custom")
    throw IoError("problem must be double_integrator | quadrotor | custom");
  cfg.horizon = get_or<int>(j, "horizon", cfg.horizon);
  cfg.dt = get_or<double>(j, "dt", cfg.dt);
  cfg.r_weight = get_or<double>(j, "r_weight", cfg.r_weight);
  if (j.contains("q_diag")) cfg.q_diag = vec_from(j.at("q_diag"), "q_diag");
  if (cfg.problem == "custom") {
    if (!j.contains("custom")) throw IoError("problem 'custom' requires a custom section");
    parse_custom(j.at("custom"), cfg.custom);
  }
  if (j.contains("theta")) parse_theta(j.at("theta"), cfg.theta);
  if (j.contains("slice")) parse_slice(j.at("slice"), cfg.slice);
  if (j.contains("solver")) parse_solver(j.at("solver"), cfg.solver);
  if (j.contains("admm")) parse_admm(j.at("admm"), cfg.admm);
  if (j.contains("cert")) parse_cert(j.at("cert"), cfg.cert);
  if (j.contains("sampling")) parse_sampling(j.at("sampling"), cfg.sampling);
  if (j.contains("sim")) parse_sim(j.at("sim"), cfg.sim);
  cfg.solver.validate();
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  try {
    return parse_run_config(read_file(path));
  } catch (const IoError& e) {
    throw IoError(path + ": " + e.what());
  }
}

}  // namespace mpcert::io

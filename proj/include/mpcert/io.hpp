#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mpcert/cert.hpp"
#include "mpcert/dual_active_set.hpp"
#include "mpcert/pca.hpp"
#include "mpcert/polyhedron.hpp"
#include "mpcert/qp.hpp"
#include "mpcert/sim.hpp"

/// File formats for every pipeline artifact.
///
///   *.json   one JSON object per file: QP problems, run configs, PCA boxes,
///            polyhedra, report summaries.  Keys are sorted, so identical
///            inputs produce byte-identical files.
///   *.jsonl  partitions: a header object on line one, then one region per
///            line.
///   *.csv    measurement, state-log and sim-log tables.  Comment lines start
///            with '#' and carry key=value metadata (config hash, units,
///            rates); the only line that differs between re-runs is the
///            "# generated=<utc timestamp>" line.  A column-name header row
///            precedes the data.
///
/// All floating-point values are written with shortest-round-trip formatting,
/// so save followed by load reproduces every double bit-exactly.
namespace mpcert::io {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Shortest decimal string that parses back to exactly v.
std::string format_double(double v);

/// Inverse of format_double; the whole string must be consumed.
double parse_double(std::string_view s);

/// FNV-1a over raw bytes, rendered as 16 hex digits.  Used as the
/// config-provenance hash in every CSV header.
std::string fnv1a_hex(std::string_view bytes);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

/// ISO-8601 UTC, second resolution (the non-deterministic CSV header line).
std::string timestamp_utc();

// --- QP problem files -------------------------------------------------------

void save_qp(const std::string& path, const DenseQp<double>& qp);
DenseQp<double> load_qp(const std::string& path);

// --- Polyhedron files -------------------------------------------------------

void save_polyhedron(const std::string& path, const Polyhedrond& poly);
Polyhedrond load_polyhedron(const std::string& path);

// --- PCA box files ----------------------------------------------------------

void save_pca_box(const std::string& path, const PcaBox& box);
PcaBox load_pca_box(const std::string& path);

// --- State logs (PCA input) -------------------------------------------------

void save_state_log(const std::string& path, const StateLog& log,
                    const std::string& config_hash);
/// Dimension-generic: the sample dimension is taken from the column count.
StateLog load_state_log(const std::string& path);

// --- Closed-loop simulation logs --------------------------------------------

void save_sim_log(const std::string& path, const SimLog& log,
                  const std::string& config_hash);
SimLog load_sim_log(const std::string& path);

// --- Certified partitions (JSON-lines) --------------------------------------

void save_partition(const std::string& path, const Partitiond& part);
Partitiond load_partition(const std::string& path);

// --- Per-region measurements ------------------------------------------------

void save_measurements(const std::string& path, const MeasurementVectord& mv,
                       const std::string& config_hash);
MeasurementVectord load_measurements(const std::string& path);

// --- Run configuration ------------------------------------------------------

/// Parameter-set selection.  Exactly one source:
///   box_b       the 12-d flight envelope box (quadrotor problems only)
///   box         +/-half_width around the origin, or explicit lo/hi
///   pca         A_p theta <= b_p loaded from a PCA box file
///   polyhedron  loaded from a polyhedron file
struct ThetaConfig {
  std::string source = "box";
  double half_width = 1.0;
  VecXd lo, hi;
  std::string file;
  double delta = 2.0;
};

/// Optional restriction of the family to a 2-d (or any lower-d) slice:
/// theta = fixed + sum_k dims[k] * t_k with t free.  Makes 12-d problems
/// certifiable at desk scale.
struct SliceConfig {
  std::vector<int> dims;
  VecXd fixed;
  bool active() const { return !dims.empty(); }
};

struct SamplingConfig {
  std::string method = "certified";  // certified | uniform
  int count = 1000;
  std::uint64_t seed = 1;
};

struct SimSection {
  std::string trajectory = "step";  // step | hover | figure_eight
  double duration_s = 18.0;
  double deadline_flops_budget = 0.0;  // 0 disables deadline emulation
  double controller_u0_scale = 1.0;
  double fig8_amplitude_m = 0.5;
  double fig8_period_s = 6.0;
  double altitude_m = 1.0;
  double log_rate_hz = 20.0;
};

struct CertSection {
  long long region_budget = 1000000;
  double sliver_radius = 1e-9;
  int workers = 0;  // 0 = hardware concurrency
};

struct AdmmSection {
  double rho = 1.0;
  double eps_primal = 1e-4;
  double eps_dual = 1e-4;
  int max_iter = 500;
};

/// Matrices for problem = "custom"; row-major in the file.
struct CustomProblem {
  MatXd F, G, Q, R, P, Az, Au;
  VecXd b_s;
};

/// Parsed run configuration.  Schema (JSON, // comments allowed):
///
///   {
///     "problem":  "double_integrator" | "quadrotor" | "custom",
///     "horizon":  15,
///     "dt":       0.002,
///     "r_weight": 900.0,                    // quadrotor input weight
///     "q_diag":   [12 numbers],             // optional Q override
///     "custom":   {"F":[..],"G":[..],"Q":[..],"R":[..],"P":[..],
///                  "Az":[..],"Au":[..],"b_s":[..],
///                  "nx":int,"nu":int,"nc":int},
///     "theta":    {"source":"box_b"|"box"|"pca"|"polyhedron",
///                  "half_width":5.0, "lo":[..], "hi":[..],
///                  "file":"path", "delta":2.0},
///     "slice":    {"dims":[0,2], "fixed":[..]},
///     "solver":   {"eps_primal":1e-4,"eps_dual":1e-4,"max_iter":100,
///                  "initial_ws":[..]},
///     "admm":     {"rho":1.0,"eps_primal":1e-4,"eps_dual":1e-4,"max_iter":500},
///     "cert":     {"region_budget":1000000,"sliver_radius":1e-9,"workers":0},
///     "sampling": {"method":"certified"|"uniform","count":1000,"seed":1},
///     "sim":      {"trajectory":"step"|"hover"|"figure_eight",
///                  "duration_s":18.0,"deadline_flops_budget":0,
///                  "controller_u0_scale":1.0,"fig8_amplitude_m":0.5,
///                  "fig8_period_s":6.0,"altitude_m":1.0,"log_rate_hz":20.0}
///   }
///
/// Every field has the default shown above; unknown keys are rejected.
struct RunConfig {
  std::string problem = "double_integrator";
  int horizon = 0;  // 0 = problem default (15 quadrotor, 2 double integrator)
  double dt = 0.002;
  double r_weight = 900.0;
  VecXd q_diag;
  CustomProblem custom;
  ThetaConfig theta;
  SliceConfig slice;
  SolverConfig<double> solver;
  AdmmSection admm;
  CertSection cert;
  SamplingConfig sampling;
  SimSection sim;

  std::string raw;   // file bytes, for provenance hashing
  std::string hash;  // fnv1a_hex(raw)
};

RunConfig load_run_config(const std::string& path);
RunConfig parse_run_config(const std::string& text);

}  // namespace mpcert::io

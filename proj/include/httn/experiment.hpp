#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "httn/hybrid.hpp"
#include "httn/pauli.hpp"

namespace httn::experiment {

/// Invalid or inconsistent configuration, raised before any compute.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ModelConfig {
  std::string type = "ising1d";  ///< ising1d | ising2d | toric
  std::size_t n = 8;             ///< chain length (ising1d)
  std::size_t lx = 4, ly = 4;    ///< lattice (ising2d, toric)
  bool periodic = true;
  double j = 1.0, h = 1.0;
};

struct AnsatzConfig {
  std::string type = "httn-single-qt";  ///< classical-ttn | httn-single-qt | httn-multi-qt
  std::size_t chi = 4;                  ///< classical bond dimension
  std::size_t interface_chi = 4;        ///< dimension of links touching quantum tensors
  std::size_t pre_sweeps = 30;          ///< classical pre-optimization sweeps (single-qt)
};

struct CircuitConfig {
  std::string topology = "ladder";  ///< ladder | brick-wall
  std::size_t m = 2;
  std::size_t e = 0;
  bool wrap = false;           ///< wrap gates from the start
  std::size_t wrap_after = 0;  ///< add wrap gates after this many sweeps (0 = never)
  std::size_t layers = 3;      ///< brick-wall layers of randomly initialized quantum tensors (multi-qt)
};

struct OptimizerConfig {
  std::string strategy = "ii";
  double lambda = 1000.0;
  std::size_t sweeps = 20;
  std::size_t vqe_max_iters = 1000;
  double tolerance = 0.0;  ///< stop when |dE| between sweeps drops below (0 = run all sweeps)
};

struct NoiseConfig {
  double epsilon = 0.0;
  std::string scope = "none";  ///< none | tomography | vqe | all
};

struct ExperimentConfig {
  std::string name = "experiment";
  ModelConfig model;
  AnsatzConfig ansatz;
  CircuitConfig circuit;
  OptimizerConfig optimizer;
  NoiseConfig noise;
  std::optional<double> reference;  ///< exact energy; computed when absent and feasible
  std::size_t realizations = 1;
  std::uint64_t seed = 1;

  /// Parses the JSON schema documented in the README; unknown keys and
  /// inconsistent values raise ConfigError.
  static ExperimentConfig from_json(const std::string& text);
  std::string to_json() const;
  /// FNV-1a hash of the canonical JSON without seed and realization count.
  std::string hash() const;
  void validate() const;

  std::size_t n_sites() const;
};

pauli::OperatorSum build_operator(const ModelConfig& model);
/// Leaf order of the binary tree: chain order in 1D, domino quadtree in 2D.
std::vector<std::size_t> leaf_order(const ModelConfig& model);

/// Exact ground energy: the configured value, else dense/Lanczos up to 16 sites.
std::optional<double> reference_energy(const ExperimentConfig& config);

struct TraceRow {
  std::size_t sweep = 0;
  double energy = 0.0;
  double abs_error = 0.0;  ///< NaN without a reference
  std::size_t vqe_iters = 0;
  std::size_t tomography_settings = 0;
  double seconds = 0.0;
  std::string phase;  ///< classical | init | httn
  double estimate = 0.0;  ///< energy reported by the local optimizers
};

struct RealizationResult {
  std::uint64_t seed = 0;
  std::vector<TraceRow> rows;
  std::vector<std::vector<double>> vqe_traces;  ///< per VQE run, tagged by sweep below
  std::vector<std::size_t> vqe_trace_sweep;
  std::optional<double> classical_energy;  ///< converged classical TTN energy (single-qt)
  double final_energy = 0.0;
  bool failed = false;
  std::string error;
};

/// Energy used in traces: <psi|H|psi>/<psi|psi>, dense up to 16 sites and
/// from noiseless environments above.
double report_energy(ttn::TreeNetwork& net, const pauli::OperatorSum& op);

/// One realization. `on_row` is called after every trace row. Exceptions
/// are caught and reported through `failed` with the rows produced so far.
RealizationResult run_realization(const ExperimentConfig& config, std::uint64_t seed, std::optional<double> exact,
                                  const std::function<void(const TraceRow&)>& on_row = {});

struct RunOptions {
  std::filesystem::path out_dir = "out";
  std::size_t workers = 1;
  bool timing = true;  ///< false writes seconds = 0 for bit-identical traces
};

struct RunSummary {
  std::vector<RealizationResult> results;
  std::size_t best = 0;  ///< index into results: lowest final energy, ties by lowest seed
  std::optional<double> exact;
};

/// Realization r uses seed config.seed + r. Writes one CSV trace (plus one
/// VQE-loss CSV) per realization and summary.json into the output directory.
RunSummary run(const ExperimentConfig& config, const RunOptions& options);

/// Index of the best realization (lowest final energy, ties by lowest seed;
/// failed realizations only when nothing else exists).
std::size_t best_of(const std::vector<RealizationResult>& results);

std::string trace_csv(const ExperimentConfig& config, const RealizationResult& result, bool timing);

struct ParsedTrace {
  std::string config_hash;
  std::uint64_t seed = 0;
  bool failed = false;
  std::vector<TraceRow> rows;
};
ParsedTrace parse_trace(const std::string& text);

/// Per-sweep |E - E_exact| table for traces sharing one config hash; the
/// reference file is a summary.json or a reference JSON written by the CLI.
/// Throws ConfigError on mismatched hashes.
std::string compare(const std::vector<std::string>& trace_texts, const std::string& reference_json);

/// Reference JSON: {"config_hash", "energy"}.
std::string reference_json(const ExperimentConfig& config, double energy);

}  // namespace httn::experiment

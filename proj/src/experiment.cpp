#include "httn/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace httn::experiment {

using nlohmann::json;

namespace {

bool is_pow2(std::size_t x) { return x >= 1 && (x & (x - 1)) == 0; }

std::size_t log2_exact(std::size_t x) {
  std::size_t q = 0;
  while ((std::size_t{1} << q) < x) ++q;
  return q;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

// Sizes must be non-negative integers; json would silently wrap negatives.
void read_size(const json& j, const char* key, std::size_t& out, const std::string& where) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw ConfigError(where + "." + key + ": expected a non-negative integer");
  out = v.get<std::size_t>();
}

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string header_text(const ExperimentConfig& config, std::uint64_t seed) {
  std::ostringstream os;
  os << "# name=" << config.name << "\n# config_hash=" << config.hash() << "\n# seed=" << seed
     << "\nsweep,energy,abs_error,vqe_iters,tomography_settings,seconds,phase,estimate\n";
  return os.str();
}

std::string row_text(const TraceRow& r, bool timing) {
  std::ostringstream os;
  os << r.sweep << ',' << fmt(r.energy) << ',' << fmt(r.abs_error) << ',' << r.vqe_iters << ','
     << r.tomography_settings << ',' << fmt(timing ? r.seconds : 0.0) << ',' << r.phase << ',' << fmt(r.estimate)
     << '\n';
  return os.str();
}

std::string footer_text(const RealizationResult& r) {
  if (!r.failed) return "# status=ok\n";
  std::string msg = r.error;
  std::replace(msg.begin(), msg.end(), '\n', ' ');
  return "# status=failed: " + msg + "\n";
}

std::string vqe_csv(const RealizationResult& r) {
  std::ostringstream os;
  os << "sweep,run,iteration,loss\n";
  for (std::size_t k = 0; k < r.vqe_traces.size(); ++k)
    for (std::size_t i = 0; i < r.vqe_traces[k].size(); ++i)
      os << r.vqe_trace_sweep[k] << ',' << k << ',' << i << ',' << fmt(r.vqe_traces[k][i]) << '\n';
  return os.str();
}

void write_atomic(const std::filesystem::path& path, const std::string& text) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << text;
  }
  std::filesystem::rename(tmp, path);
}

std::string trace_stem(const ExperimentConfig& config, std::uint64_t seed) {
  return config.name + "_seed" + std::to_string(seed);
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(j, {"name", "model", "ansatz", "circuit", "optimizer", "noise", "reference", "realizations", "seed"},
             "config");
  ExperimentConfig c;
  read(j, "name", c.name, "config");
  read_size(j, "realizations", c.realizations, "config");
  if (j.contains("seed")) {
    std::size_t s = 0;
    read_size(j, "seed", s, "config");
    c.seed = s;
  }
  if (j.contains("reference") && !j.at("reference").is_null()) {
    double r = 0.0;
    read(j, "reference", r, "config");
    c.reference = r;
  }
  if (j.contains("model")) {
    const json& m = j.at("model");
    check_keys(m, {"type", "n", "lx", "ly", "periodic", "j", "h"}, "model");
    read(m, "type", c.model.type, "model");
    read_size(m, "n", c.model.n, "model");
    read_size(m, "lx", c.model.lx, "model");
    read_size(m, "ly", c.model.ly, "model");
    read(m, "periodic", c.model.periodic, "model");
    read(m, "j", c.model.j, "model");
    read(m, "h", c.model.h, "model");
  }
  if (j.contains("ansatz")) {
    const json& a = j.at("ansatz");
    check_keys(a, {"type", "chi", "interface_chi", "pre_sweeps"}, "ansatz");
    read(a, "type", c.ansatz.type, "ansatz");
    read_size(a, "chi", c.ansatz.chi, "ansatz");
    read_size(a, "interface_chi", c.ansatz.interface_chi, "ansatz");
    read_size(a, "pre_sweeps", c.ansatz.pre_sweeps, "ansatz");
  }
  if (j.contains("circuit")) {
    const json& k = j.at("circuit");
    check_keys(k, {"topology", "m", "e", "wrap", "wrap_after", "layers"}, "circuit");
    read(k, "topology", c.circuit.topology, "circuit");
    read_size(k, "m", c.circuit.m, "circuit");
    read_size(k, "e", c.circuit.e, "circuit");
    read(k, "wrap", c.circuit.wrap, "circuit");
    read_size(k, "wrap_after", c.circuit.wrap_after, "circuit");
    read_size(k, "layers", c.circuit.layers, "circuit");
  }
  if (j.contains("optimizer")) {
    const json& o = j.at("optimizer");
    check_keys(o, {"strategy", "lambda", "sweeps", "vqe_max_iters", "tolerance"}, "optimizer");
    read(o, "strategy", c.optimizer.strategy, "optimizer");
    read(o, "lambda", c.optimizer.lambda, "optimizer");
    read_size(o, "sweeps", c.optimizer.sweeps, "optimizer");
    read_size(o, "vqe_max_iters", c.optimizer.vqe_max_iters, "optimizer");
    read(o, "tolerance", c.optimizer.tolerance, "optimizer");
  }
  if (j.contains("noise")) {
    const json& n = j.at("noise");
    check_keys(n, {"epsilon", "scope"}, "noise");
    read(n, "epsilon", c.noise.epsilon, "noise");
    read(n, "scope", c.noise.scope, "noise");
  }
  c.validate();
  return c;
}

std::string ExperimentConfig::to_json() const {
  json j;
  j["name"] = name;
  j["model"] = {{"type", model.type}, {"n", model.n},   {"lx", model.lx}, {"ly", model.ly},
                {"periodic", model.periodic}, {"j", model.j}, {"h", model.h}};
  j["ansatz"] = {{"type", ansatz.type},
                 {"chi", ansatz.chi},
                 {"interface_chi", ansatz.interface_chi},
                 {"pre_sweeps", ansatz.pre_sweeps}};
  j["circuit"] = {{"topology", circuit.topology}, {"m", circuit.m},
                  {"e", circuit.e},               {"wrap", circuit.wrap},
                  {"wrap_after", circuit.wrap_after}, {"layers", circuit.layers}};
  j["optimizer"] = {{"strategy", optimizer.strategy},
                    {"lambda", optimizer.lambda},
                    {"sweeps", optimizer.sweeps},
                    {"vqe_max_iters", optimizer.vqe_max_iters},
                    {"tolerance", optimizer.tolerance}};
  j["noise"] = {{"epsilon", noise.epsilon}, {"scope", noise.scope}};
  j["reference"] = reference ? json(*reference) : json(nullptr);
  j["realizations"] = realizations;
  j["seed"] = seed;
  return j.dump(2);
}

std::string ExperimentConfig::hash() const {
  json j = json::parse(to_json());
  j.erase("seed");
  j.erase("realizations");
  const std::string canonical = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::size_t ExperimentConfig::n_sites() const { return model.type == "ising1d" ? model.n : model.lx * model.ly; }

void ExperimentConfig::validate() const {
  if (name.empty() || name.find_first_of("/\\ \t\n") != std::string::npos)
    throw ConfigError("name: must be non-empty without spaces or path separators");
  if (model.type != "ising1d" && model.type != "ising2d" && model.type != "toric")
    throw ConfigError("model.type: expected ising1d, ising2d or toric");
  if (model.type != "ising1d" && (model.lx < 2 || model.ly < 2))
    throw ConfigError("model: lx and ly must be at least 2");
  if (model.type == "toric" && (model.lx % 2 || model.ly % 2))
    throw ConfigError("model: the plaquette model needs even lx and ly");
  if (model.type == "toric" && !model.periodic) throw ConfigError("model: the plaquette model is always periodic");
  if (!std::isfinite(model.j) || !std::isfinite(model.h)) throw ConfigError("model: couplings must be finite");
  const std::size_t n = n_sites();
  if (n < 4 || !is_pow2(n)) throw ConfigError("model: the binary tree needs a power-of-two site count of at least 4");

  if (ansatz.type != "classical-ttn" && ansatz.type != "httn-single-qt" && ansatz.type != "httn-multi-qt")
    throw ConfigError("ansatz.type: expected classical-ttn, httn-single-qt or httn-multi-qt");
  if (ansatz.chi < 2) throw ConfigError("ansatz.chi: must be at least 2");
  if (ansatz.interface_chi < 2 || !is_pow2(ansatz.interface_chi))
    throw ConfigError("ansatz.interface_chi: must be a power of two (2^qubits per leg)");
  const bool quantum = ansatz.type != "classical-ttn";
  if (ansatz.type == "httn-single-qt") {
    if (ansatz.chi != ansatz.interface_chi)
      throw ConfigError("ansatz: a single quantum tensor hangs on links of dimension chi, so interface_chi must equal chi");
    if (ansatz.pre_sweeps < 1) throw ConfigError("ansatz.pre_sweeps: must be at least 1");
    const auto topo = ttn::TreeTopology::binary(leaf_order(model), std::vector<std::size_t>(n, 2), ansatz.chi);
    const auto upper = hybrid::upper_nodes(topo);
    if (upper.empty()) throw ConfigError("ansatz: a single quantum tensor needs at least 8 sites");
    std::size_t qubits = 0;
    const auto merged = topo.merged(upper);
    for (auto d : merged.leg_dims(merged.n_nodes() - 1)) {
      if (!is_pow2(d)) throw ConfigError("ansatz: quantum tensor legs must have power-of-two dimensions");
      qubits += log2_exact(d);
    }
    if (qubits > qsim::kMaxQubits)
      throw ConfigError("ansatz: the quantum tensor needs " + std::to_string(qubits) + " qubits (limit " +
                        std::to_string(qsim::kMaxQubits) + ")");
  }
  if (ansatz.type == "httn-multi-qt" && 3 * log2_exact(ansatz.interface_chi) > qsim::kMaxQubits)
    throw ConfigError("ansatz.interface_chi: quantum tensors would exceed the qubit limit");

  if (circuit.topology != "ladder" && circuit.topology != "brick-wall")
    throw ConfigError("circuit.topology: expected ladder or brick-wall");
  if (quantum && circuit.m < 1) throw ConfigError("circuit.m: at least one layer");
  if (ansatz.type == "httn-multi-qt" && circuit.layers < 1) throw ConfigError("circuit.layers: at least one layer");
  if (circuit.wrap && circuit.wrap_after > 0) throw ConfigError("circuit: wrap and wrap_after are exclusive");
  if (circuit.wrap_after >= optimizer.sweeps && circuit.wrap_after > 0)
    throw ConfigError("circuit.wrap_after: must be smaller than optimizer.sweeps");

  try {
    hybrid::strategy_from_string(optimizer.strategy);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("optimizer.strategy: ") + e.what());
  }
  if (!(optimizer.lambda > 0.0)) throw ConfigError("optimizer.lambda: must be positive");
  if (optimizer.sweeps < 1) throw ConfigError("optimizer.sweeps: at least one sweep");
  if (optimizer.vqe_max_iters < 1) throw ConfigError("optimizer.vqe_max_iters: at least one iteration");
  if (!(optimizer.tolerance >= 0.0)) throw ConfigError("optimizer.tolerance: must be non-negative");

  if (!(noise.epsilon >= 0.0)) throw ConfigError("noise.epsilon: must be non-negative");
  if (noise.scope != "none" && noise.scope != "tomography" && noise.scope != "vqe" && noise.scope != "all")
    throw ConfigError("noise.scope: expected none, tomography, vqe or all");
  if (noise.epsilon > 0.0 && noise.scope == "none") throw ConfigError("noise: epsilon > 0 needs a scope");
  if (noise.epsilon > 0.0 && !quantum) throw ConfigError("noise: classical networks are noiseless");

  if (realizations < 1) throw ConfigError("realizations: at least one");
  if (reference && !std::isfinite(*reference)) throw ConfigError("reference: must be finite");
}

pauli::OperatorSum build_operator(const ModelConfig& model) {
  if (model.type == "ising1d") return pauli::ising_1d(model.n, model.j, model.h, model.periodic);
  if (model.type == "ising2d") return pauli::ising_2d(model.lx, model.ly, model.j, model.h, model.periodic);
  if (model.type == "toric") return pauli::toric_code(model.lx, model.ly);
  throw ConfigError("model.type: unknown model '" + model.type + "'");
}

std::vector<std::size_t> leaf_order(const ModelConfig& model) {
  if (model.type == "ising1d") {
    std::vector<std::size_t> order(model.n);
    for (std::size_t i = 0; i < model.n; ++i) order[i] = i;
    return order;
  }
  return ttn::domino_quadtree_order(model.lx, model.ly);
}

std::optional<double> reference_energy(const ExperimentConfig& config) {
  if (config.reference) return config.reference;
  if (config.n_sites() > pauli::kMaxDenseSites) return std::nullopt;
  return pauli::ground_energy(build_operator(config.model));
}

// ---------------------------------------------------------------------------
// Realizations
// ---------------------------------------------------------------------------

double report_energy(ttn::TreeNetwork& net, const pauli::OperatorSum& op) {
  if (op.n_sites() <= pauli::kMaxDenseSites) return ttn::dense_energy(net, op);
  ttn::TomographyContext& ctx = net.tomography();
  const ttn::TomographyContext saved = ctx;
  ctx.noise = nullptr;
  ttn::EnvironmentCache cache(op);
  const std::size_t c = net.center();
  const Vector t = net.node_tensor(c).to_vector();
  const double e = cache.effective_hamiltonian(net, c).expectation(t) / t.squaredNorm();
  ctx = saved;
  return e;
}

RealizationResult run_realization(const ExperimentConfig& config, std::uint64_t seed, std::optional<double> exact,
                                  const std::function<void(const TraceRow&)>& on_row) {
  RealizationResult res;
  res.seed = seed;
  const auto start = std::chrono::steady_clock::now();
  const auto emit = [&](TraceRow row) {
    row.abs_error = exact ? std::abs(row.energy - *exact) : std::numeric_limits<double>::quiet_NaN();
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    res.rows.push_back(row);
    res.final_energy = row.energy;
    if (on_row) on_row(res.rows.back());
  };
  const auto converged = [&](std::size_t min_rows) {
    const auto& r = res.rows;
    return config.optimizer.tolerance > 0.0 && r.size() >= min_rows &&
           std::abs(r.back().energy - r[r.size() - 2].energy) < config.optimizer.tolerance;
  };
  try {
    const auto op = build_operator(config.model);
    const auto order = leaf_order(config.model);
    const std::size_t n = config.n_sites();
    const std::string& kind = config.ansatz.type;

    if (kind == "classical-ttn") {
      auto net = ttn::TreeNetwork::binary(n, config.ansatz.chi, ttn::Init::kRandomIsometric, seed, order);
      ttn::EnvironmentCache cache(op);
      const auto schedule = ttn::sweep_schedule(net, net.topology().root());
      for (std::size_t s = 1; s <= config.optimizer.sweeps; ++s) {
        TraceRow row;
        row.sweep = s;
        row.phase = "classical";
        row.estimate = ttn::sweep(net, cache, schedule);
        row.energy = report_energy(net, op);
        emit(row);
        if (converged(2)) break;
      }
      res.classical_energy = res.final_energy;
      return res;
    }

    hybrid::CircuitOptions circ;
    circ.topology = qsim::topology_from_string(config.circuit.topology);
    circ.m = config.circuit.m;
    circ.e = config.circuit.e;
    circ.wrap = config.circuit.wrap;
    circ.seed = splitmix64(seed ^ 0x51ULL);

    std::optional<ttn::TreeNetwork> net;
    if (kind == "httn-single-qt") {
      auto classical = ttn::TreeNetwork::binary(n, config.ansatz.chi, ttn::Init::kRandomIsometric, seed, order);
      ttn::EnvironmentCache cache(op);
      const auto energies = ttn::ground_state_search(classical, cache, {config.ansatz.pre_sweeps, 1e-10});
      TraceRow row;
      row.phase = "classical";
      row.estimate = energies.empty() ? 0.0 : energies.back();
      row.energy = report_energy(classical, op);
      emit(row);
      res.classical_energy = row.energy;
      const auto group = hybrid::upper_nodes(classical.topology());
      net.emplace(hybrid::hybridize(std::move(classical), group, circ));
    } else {
      hybrid::MultiQuantumOptions mq;
      mq.qubits_per_leg = log2_exact(config.ansatz.interface_chi);
      mq.layers = config.circuit.layers;
      mq.seed = seed;
      net.emplace(hybrid::multi_quantum_network(n, order, mq));
    }
    {
      TraceRow row;
      row.phase = "init";
      row.energy = report_energy(*net, op);
      row.estimate = row.energy;
      emit(row);
    }

    const bool tomo_noise = config.noise.scope == "tomography" || config.noise.scope == "all";
    const bool vqe_noise = config.noise.scope == "vqe" || config.noise.scope == "all";
    NoiseSource tomography({config.noise.epsilon, splitmix64(seed ^ 0x7031ULL), false, true});
    NoiseSource vqe({config.noise.epsilon, splitmix64(seed ^ 0x7032ULL), true, false});
    net->tomography().noise = tomo_noise ? &tomography : nullptr;

    hybrid::SweepSettings settings;
    settings.strategy = hybrid::strategy_from_string(config.optimizer.strategy);
    settings.vqe.max_iterations = config.optimizer.vqe_max_iters;
    settings.vqe.lambda = config.optimizer.lambda;
    settings.vqe.noise = vqe_noise ? &vqe : nullptr;
    settings.reinit_chi = config.ansatz.chi;
    settings.reinit_circuit = circ;
    settings.reinit_circuit.wrap = false;

    ttn::EnvironmentCache cache(op);
    for (std::size_t k = 0; k < config.optimizer.sweeps; ++k) {
      if (config.circuit.wrap_after > 0 && k == config.circuit.wrap_after) {
        for (auto node : hybrid::quantum_nodes(*net)) {
          QuantumTensor& qt = net->mutable_quantum(node);
          auto [c, p] = qsim::add_wrap_gates(qt.circuit(), qt.params());
          qt.set_circuit(std::move(c), std::move(p));
        }
        // later re-encodings keep the wrapped layout
        settings.reinit_circuit.wrap = true;
      }
      const hybrid::SweepRecord rec = hybrid::httn_sweep(*net, cache, settings, k);
      TraceRow row;
      row.sweep = k + 1;
      row.phase = "httn";
      row.vqe_iters = rec.vqe_iterations;
      row.tomography_settings = rec.tomography_settings;
      row.estimate = rec.energy_estimate;
      row.energy = report_energy(*net, op);
      for (const auto& t : rec.vqe_traces) {
        res.vqe_traces.push_back(t);
        res.vqe_trace_sweep.push_back(k + 1);
      }
      emit(row);
      if (converged(3)) break;
    }
  } catch (const std::exception& e) {
    res.failed = true;
    res.error = e.what();
  }
  return res;
}

// ---------------------------------------------------------------------------
// Campaigns
// ---------------------------------------------------------------------------

std::size_t best_of(const std::vector<RealizationResult>& results) {
  if (results.empty()) throw std::invalid_argument("no realizations");
  std::size_t best = 0;
  const auto better = [](const RealizationResult& a, const RealizationResult& b) {
    if (a.failed != b.failed) return !a.failed;
    if (a.rows.empty() != b.rows.empty()) return !a.rows.empty();
    if (a.final_energy != b.final_energy) return a.final_energy < b.final_energy;
    return a.seed < b.seed;
  };
  for (std::size_t i = 1; i < results.size(); ++i)
    if (better(results[i], results[best])) best = i;
  return best;
}

std::string trace_csv(const ExperimentConfig& config, const RealizationResult& result, bool timing) {
  std::string out = header_text(config, result.seed);
  for (const auto& r : result.rows) out += row_text(r, timing);
  return out + footer_text(result);
}

RunSummary run(const ExperimentConfig& config, const RunOptions& options) {
  config.validate();
  RunSummary summary;
  summary.exact = reference_energy(config);
  std::filesystem::create_directories(options.out_dir);
  summary.results.resize(config.realizations);

  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t r = next++; r < config.realizations; r = next++) {
      const std::uint64_t seed = config.seed + r;
      const auto stem = options.out_dir / trace_stem(config, seed);
      const auto partial = stem.string() + ".csv.partial";
      std::ofstream stream(partial, std::ios::binary | std::ios::trunc);
      stream << header_text(config, seed) << std::flush;
      auto res = run_realization(config, seed, summary.exact, [&](const TraceRow& row) {
        stream << row_text(row, options.timing) << std::flush;
      });
      stream << footer_text(res);
      stream.close();
      std::filesystem::rename(partial, stem.string() + ".csv");
      write_atomic(stem.string() + "_vqe.csv", vqe_csv(res));
      summary.results[r] = std::move(res);
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(options.workers, 1, config.realizations);
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  summary.best = best_of(summary.results);
  json j;
  j["name"] = config.name;
  j["config_hash"] = config.hash();
  j["config"] = json::parse(config.to_json());
  j["exact"] = summary.exact ? json(*summary.exact) : json(nullptr);
  json list = json::array();
  for (const auto& r : summary.results) {
    json item = {{"seed", r.seed},
                 {"final_energy", r.final_energy},
                 {"sweeps", r.rows.empty() ? 0 : r.rows.back().sweep},
                 {"failed", r.failed},
                 {"trace", trace_stem(config, r.seed) + ".csv"}};
    if (r.classical_energy) item["classical_energy"] = *r.classical_energy;
    if (summary.exact) item["abs_error"] = std::abs(r.final_energy - *summary.exact);
    if (r.failed) item["error"] = r.error;
    list.push_back(item);
  }
  j["realizations"] = list;
  j["best"] = list[summary.best];
  write_atomic(options.out_dir / "summary.json", j.dump(2) + "\n");
  return summary;
}

// ---------------------------------------------------------------------------
// Trace comparison
// ---------------------------------------------------------------------------

ParsedTrace parse_trace(const std::string& text) {
  ParsedTrace t;
  std::istringstream is(text);
  std::string line;
  bool header = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = line.substr(2, eq - 2), value = line.substr(eq + 1);
      if (key == "config_hash") t.config_hash = value;
      if (key == "seed") t.seed = std::stoull(value);
      if (key == "status" && value.rfind("failed", 0) == 0) t.failed = true;
      continue;
    }
    if (!header) {
      if (line.rfind("sweep,", 0) != 0) throw ConfigError("trace: missing column header");
      header = true;
      continue;
    }
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
    if (f.size() != 8) throw ConfigError("trace: expected 8 columns in '" + line + "'");
    TraceRow r;
    r.sweep = std::stoull(f[0]);
    r.energy = std::stod(f[1]);
    r.abs_error = std::stod(f[2]);
    r.vqe_iters = std::stoull(f[3]);
    r.tomography_settings = std::stoull(f[4]);
    r.seconds = std::stod(f[5]);
    r.phase = f[6];
    r.estimate = std::stod(f[7]);
    t.rows.push_back(r);
  }
  if (t.config_hash.empty()) throw ConfigError("trace: no config hash");
  return t;
}

std::string reference_json(const ExperimentConfig& config, double energy) {
  json j = {{"name", config.name}, {"config_hash", config.hash()}, {"energy", energy}};
  return j.dump(2) + "\n";
}

std::string compare(const std::vector<std::string>& trace_texts, const std::string& reference_text) {
  json ref;
  try {
    ref = json::parse(reference_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("reference is not valid JSON: ") + e.what());
  }
  if (!ref.contains("config_hash")) throw ConfigError("reference: no config_hash");
  const std::string hash = ref.at("config_hash").get<std::string>();
  const json& value = ref.contains("energy") ? ref.at("energy") : ref.value("exact", json(nullptr));
  if (!value.is_number()) throw ConfigError("reference: no exact energy");
  const double exact = value.get<double>();
  if (trace_texts.empty()) throw ConfigError("compare: no traces given");

  std::ostringstream os;
  os << "# config_hash=" << hash << "\n# exact=" << fmt(exact) << "\nseed,sweep,phase,energy,abs_error\n";
  for (const auto& text : trace_texts) {
    const ParsedTrace t = parse_trace(text);
    if (t.config_hash != hash)
      throw ConfigError("compare: trace of seed " + std::to_string(t.seed) + " has config hash " + t.config_hash +
                        ", reference has " + hash);
    for (const auto& r : t.rows)
      os << t.seed << ',' << r.sweep << ',' << r.phase << ',' << fmt(r.energy) << ',' << fmt(std::abs(r.energy - exact))
         << '\n';
  }
  return os.str();
}

}  // namespace httn::experiment

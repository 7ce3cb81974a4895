#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "httn/experiment.hpp"

using namespace httn;
using namespace httn::experiment;

namespace {

const char* kSmallClassical = R"({
  "name": "small",
  "model": {"type": "ising1d", "n": 4, "periodic": false, "j": 1.0, "h": 1.0},
  "ansatz": {"type": "classical-ttn", "chi": 4, "interface_chi": 2},
  "optimizer": {"sweeps": 3},
  "seed": 5
})";

const char* kSmallHybrid = R"({
  "name": "small_hybrid",
  "model": {"type": "ising1d", "n": 8, "periodic": false, "j": 1.0, "h": 0.7},
  "ansatz": {"type": "httn-single-qt", "chi": 2, "interface_chi": 2, "pre_sweeps": 5},
  "circuit": {"topology": "ladder", "m": 2},
  "optimizer": {"strategy": "ii", "sweeps": 2, "vqe_max_iters": 30},
  "realizations": 2,
  "seed": 3
})";

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("httn_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

// Open transverse-field chain ground energy by dense diagonalization of explicit Kronecker products.
double chain_oracle(std::size_t n, double j, double h) {
  Eigen::Matrix2d x, z, id;
  x << 0, 1, 1, 0;
  z << 1, 0, 0, -1;
  id.setIdentity();
  const auto embed = [&](std::vector<Eigen::MatrixXd> f) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Identity(1, 1);
    for (const auto& m : f) {
      Eigen::MatrixXd next(out.rows() * 2, out.cols() * 2);
      for (Eigen::Index r = 0; r < out.rows(); ++r)
        for (Eigen::Index c = 0; c < out.cols(); ++c) next.block(2 * r, 2 * c, 2, 2) = out(r, c) * m;
      out = next;
    }
    return out;
  };
  const Eigen::Index dim = Eigen::Index{1} << n;
  Eigen::MatrixXd hm = Eigen::MatrixXd::Zero(dim, dim);
  for (std::size_t s = 0; s < n; ++s) {
    std::vector<Eigen::MatrixXd> f(n, id);
    f[s] = z;
    hm += h * embed(f);
    if (s + 1 < n) {
      std::vector<Eigen::MatrixXd> g(n, id);
      g[s] = x;
      g[s + 1] = x;
      hm -= j * embed(g);
    }
  }
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(hm).eigenvalues()(0);
}

}  // namespace

TEST(Config, ParsesAndRoundTrips) {
  const auto c = ExperimentConfig::from_json(kSmallHybrid);
  EXPECT_EQ(c.name, "small_hybrid");
  EXPECT_EQ(c.model.n, 8u);
  EXPECT_DOUBLE_EQ(c.model.h, 0.7);
  EXPECT_EQ(c.ansatz.type, "httn-single-qt");
  EXPECT_EQ(c.optimizer.vqe_max_iters, 30u);
  EXPECT_EQ(c.realizations, 2u);
  const auto again = ExperimentConfig::from_json(c.to_json());
  EXPECT_EQ(again.to_json(), c.to_json());
  EXPECT_EQ(again.hash(), c.hash());
}

TEST(Config, RejectsUnknownKeys) {
  EXPECT_THROW(ExperimentConfig::from_json(R"({"name": "a", "sweeps": 3})"), ConfigError);
  EXPECT_THROW(ExperimentConfig::from_json(R"({"model": {"type": "ising1d", "size": 8}})"), ConfigError);
  EXPECT_THROW(ExperimentConfig::from_json(R"({"optimizer": {"lr": 0.1}})"), ConfigError);
}

TEST(Config, RejectsMalformedValues) {
  EXPECT_THROW(ExperimentConfig::from_json("{not json"), ConfigError);
  EXPECT_THROW(ExperimentConfig::from_json(R"({"model": {"n": -8}})"), ConfigError);
  EXPECT_THROW(ExperimentConfig::from_json(R"({"model": {"n": "eight"}})"), ConfigError);
  EXPECT_THROW(ExperimentConfig::from_json(R"({"optimizer": {"lambda": "big"}})"), ConfigError);
}

TEST(Config, ValidationCatchesInconsistentSettings) {
  const std::vector<std::string> bad = {
      R"({"model": {"type": "ising1d", "n": 6}})",
      R"({"model": {"type": "heisenberg"}})",
      R"({"model": {"type": "toric", "lx": 3, "ly": 4}})",
      R"({"model": {"type": "toric", "lx": 4, "ly": 4, "periodic": false}})",
      R"({"ansatz": {"type": "httn-single-qt", "chi": 4, "interface_chi": 8}})",
      R"({"ansatz": {"type": "httn-multi-qt", "interface_chi": 3}})",
      R"({"model": {"n": 4}, "ansatz": {"type": "httn-single-qt", "chi": 2, "interface_chi": 2}})",
      R"({"circuit": {"topology": "star"}})",
      R"({"circuit": {"wrap": true, "wrap_after": 2}, "optimizer": {"sweeps": 5}})",
      R"({"circuit": {"wrap_after": 5}, "optimizer": {"sweeps": 5}})",
      R"({"optimizer": {"strategy": "iv"}})",
      R"({"optimizer": {"lambda": 0}})",
      R"({"optimizer": {"sweeps": 0}})",
      R"({"noise": {"epsilon": 0.01}})",
      R"({"noise": {"epsilon": -1, "scope": "all"}})",
      R"({"noise": {"epsilon": 0.01, "scope": "vqe"}, "ansatz": {"type": "classical-ttn"}})",
      R"({"realizations": 0})",
      R"({"name": "a/b"})",
  };
  for (const auto& text : bad) EXPECT_THROW(ExperimentConfig::from_json(text), ConfigError) << text;
  EXPECT_NO_THROW(ExperimentConfig::from_json("{}"));
}

TEST(Config, SingleQuantumTensorQubitLimit) {
  // the merged upper tree of a 64-site chain at chi 16 has 16 legs of 4 qubits
  EXPECT_THROW(ExperimentConfig::from_json(
                   R"({"model": {"n": 64}, "ansatz": {"type": "httn-single-qt", "chi": 16, "interface_chi": 16}})"),
               ConfigError);
}

TEST(Config, HashIgnoresSeedAndRealizationsOnly) {
  auto a = ExperimentConfig::from_json(kSmallHybrid);
  auto b = a;
  b.seed = 99;
  b.realizations = 7;
  EXPECT_EQ(a.hash(), b.hash());
  b.model.h = 0.71;
  EXPECT_NE(a.hash(), b.hash());
  auto c = a;
  c.optimizer.strategy = "iii";
  EXPECT_NE(a.hash(), c.hash());
  EXPECT_EQ(a.hash().size(), 16u);
}

TEST(Reference, MatchesIndependentOracles) {
  for (double h : {0.0, 0.5, 1.0, 2.0}) {
    ExperimentConfig c;
    c.model.n = 8;
    c.model.periodic = false;
    c.model.h = h;
    const auto e = reference_energy(c);
    ASSERT_TRUE(e.has_value());
    EXPECT_NEAR(*e, chain_oracle(8, 1.0, h), 1e-10);
  }
  ExperimentConfig c;
  c.model.n = 4;
  c.model.periodic = false;
  c.model.h = 0.0;
  EXPECT_NEAR(*reference_energy(c), -3.0, 1e-12);
  c.model.j = 0.0;
  c.model.h = 1.0;
  EXPECT_NEAR(*reference_energy(c), -4.0, 1e-12);
}

TEST(Reference, PlaquetteModelAndLargeSystems) {
  ExperimentConfig c;
  c.model.type = "toric";
  c.model.lx = c.model.ly = 4;
  EXPECT_NEAR(*reference_energy(c), -16.0, 1e-8);
  c.model.lx = c.model.ly = 8;
  EXPECT_FALSE(reference_energy(c).has_value());
  c.reference = -64.0;
  EXPECT_DOUBLE_EQ(*reference_energy(c), -64.0);
}

TEST(BestOf, LowestEnergyThenLowestSeed) {
  std::vector<RealizationResult> rs(4);
  const double energies[] = {-1.0, -2.0, -2.0, -3.0};
  const std::uint64_t seeds[] = {4, 9, 2, 7};
  for (std::size_t i = 0; i < 4; ++i) {
    rs[i].seed = seeds[i];
    rs[i].final_energy = energies[i];
    rs[i].rows.resize(1);
  }
  rs[3].failed = true;
  EXPECT_EQ(best_of(rs), 2u);
  rs[3].failed = false;
  EXPECT_EQ(best_of(rs), 3u);
}

TEST(Run, ClassicalReachesExactEnergy) {
  const auto c = ExperimentConfig::from_json(kSmallClassical);
  const auto dir = fresh_dir("classical");
  const RunSummary s = run(c, {dir, 1, false});
  ASSERT_TRUE(s.exact.has_value());
  EXPECT_NEAR(*s.exact, chain_oracle(4, 1.0, 1.0), 1e-10);
  ASSERT_EQ(s.results.size(), 1u);
  EXPECT_FALSE(s.results[0].failed);
  EXPECT_NEAR(s.results[0].final_energy, *s.exact, 1e-9);
  EXPECT_TRUE(std::filesystem::exists(dir / "small_seed5.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "summary.json"));
  EXPECT_FALSE(std::filesystem::exists(dir / "small_seed5.csv.partial"));
  std::filesystem::remove_all(dir);
}

TEST(Run, SameSeedGivesIdenticalTraces) {
  const auto c = ExperimentConfig::from_json(kSmallHybrid);
  const auto d1 = fresh_dir("det1"), d2 = fresh_dir("det2");
  const RunSummary s1 = run(c, {d1, 2, false});
  const RunSummary s2 = run(c, {d2, 1, false});
  for (std::uint64_t seed : {3u, 4u}) {
    const std::string name = "small_hybrid_seed" + std::to_string(seed);
    const std::string a = slurp(d1 / (name + ".csv")), b = slurp(d2 / (name + ".csv"));
    EXPECT_FALSE(a.empty());
    EXPECT_EQ(a, b);
    EXPECT_EQ(slurp(d1 / (name + "_vqe.csv")), slurp(d2 / (name + "_vqe.csv")));
  }
  EXPECT_EQ(slurp(d1 / "summary.json"), slurp(d2 / "summary.json"));
  EXPECT_EQ(s1.best, s2.best);
  std::filesystem::remove_all(d1);
  std::filesystem::remove_all(d2);
}

TEST(Run, HybridTraceIsVariationalAndWellFormed) {
  const auto c = ExperimentConfig::from_json(kSmallHybrid);
  const auto exact = reference_energy(c);
  const auto r = run_realization(c, 3, exact);
  ASSERT_FALSE(r.failed) << r.error;
  ASSERT_EQ(r.rows.size(), 4u);  // classical, init, two sweeps
  EXPECT_EQ(r.rows[0].phase, "classical");
  EXPECT_EQ(r.rows[1].phase, "init");
  for (const auto& row : r.rows) {
    EXPECT_GE(row.energy, *exact - 1e-9);
    EXPECT_NEAR(row.abs_error, row.energy - *exact, 1e-9);
  }
  EXPECT_GT(r.rows[2].vqe_iters, 0u);
  EXPECT_GT(r.rows[2].tomography_settings, 0u);
  ASSERT_TRUE(r.classical_energy.has_value());

  const ParsedTrace t = parse_trace(trace_csv(c, r, false));
  EXPECT_EQ(t.config_hash, c.hash());
  EXPECT_EQ(t.seed, 3u);
  EXPECT_FALSE(t.failed);
  ASSERT_EQ(t.rows.size(), r.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    EXPECT_EQ(t.rows[i].energy, r.rows[i].energy);
    EXPECT_EQ(t.rows[i].phase, r.rows[i].phase);
    EXPECT_EQ(t.rows[i].seconds, 0.0);
  }
}

TEST(Compare, ProducesErrorTableAndRejectsOtherHashes) {
  const auto c = ExperimentConfig::from_json(kSmallClassical);
  RealizationResult r;
  r.seed = 5;
  r.rows = {{0, -4.0, 0.5, 0, 0, 0.0, "classical", -4.0}, {1, -4.25, 0.25, 0, 0, 0.0, "classical", -4.25}};
  const std::string trace = trace_csv(c, r, true);
  const std::string table = compare({trace}, reference_json(c, -4.5));
  EXPECT_NE(table.find("seed,sweep,phase,energy,abs_error"), std::string::npos);
  EXPECT_NE(table.find("5,1,classical,-4.25,0.25"), std::string::npos);

  auto other = c;
  other.model.h = 2.0;
  EXPECT_THROW(compare({trace}, reference_json(other, -4.5)), ConfigError);
  EXPECT_THROW(compare({trace}, R"({"energy": -4.5})"), ConfigError);
  EXPECT_THROW(compare({}, reference_json(c, -4.5)), ConfigError);
}

TEST(ReportEnergy, MatchesDenseExpectation) {
  const auto op = pauli::ising_1d(8, 1.0, 0.8, true);
  auto net = ttn::TreeNetwork::from_topology(
      ttn::TreeTopology::binary({0, 1, 2, 3, 4, 5, 6, 7}, std::vector<std::size_t>(8, 2), 3), ttn::Init::kRandomIsometric,
      11);
  const Vector psi = net.dense_state();
  const Matrix h = pauli::to_dense(op).to_matrix();
  const double expected = (psi.adjoint() * h * psi).real()(0) / psi.squaredNorm();
  EXPECT_NEAR(report_energy(net, op), expected, 1e-10);
}

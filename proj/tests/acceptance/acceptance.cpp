// Acceptance suite: one PASS/FAIL line per primary criterion.
//
//   acceptance [--cli PATH] [--only NAME]...
//
// Exit status is nonzero when any selected criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "../support.hpp"
#include "invtransfer/decomposition.hpp"
#include "invtransfer/experiment.hpp"
#include "invtransfer/gp.hpp"
#include "invtransfer/inverse_gp.hpp"
#include "invtransfer/io.hpp"
#include "invtransfer/metrics.hpp"
#include "invtransfer/nsga2.hpp"
#include "invtransfer/optimizer.hpp"
#include "invtransfer/problems.hpp"

using namespace invtransfer;
namespace fs = std::filesystem;
namespace ts = testing_support;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  std::string name;
  double time_limit_s;
  std::function<Outcome()> check;
};

std::string fmt(double v, int precision = 4)
{
  std::ostringstream s;
  s.precision(precision);
  s << v;
  return s.str();
}

KernelParams random_kernel(std::mt19937_64& rng, int d)
{
  std::uniform_real_distribution<double> sv(0.3, 2.0);
  std::uniform_real_distribution<double> ls(0.2, 1.5);
  KernelParams k;
  k.signal_variance = sv(rng);
  k.lengthscales.resize(d);
  for (int j = 0; j < d; ++j)
    k.lengthscales[j] = ls(rng) * std::sqrt(static_cast<double>(d));
  return k;
}

// -- model correctness --------------------------------------------------------

Outcome gp_correctness()
{
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> size(1, 200);
  std::uniform_int_distribution<int> dim(1, 10);
  std::uniform_real_distribution<double> noise(0.01, 0.2);
  double worst_pred = 0.0;
  double worst_grad = 0.0;
  for (int trial = 0; trial < 40; ++trial) {
    const int n = trial < 2 ? (trial == 0 ? 1 : 200) : size(rng);
    const int d = trial < 2 ? 10 : dim(rng);
    const MatrixXd x = ts::uniform_matrix(rng, n, d);
    const VectorXd y = ts::uniform_vector(rng, n, -1.0, 1.0);
    const KernelParams k = random_kernel(rng, d);
    const double s2 = noise(rng) * k.signal_variance;
    const MatrixXd q = ts::uniform_matrix(rng, 25, d);

    const Prediction p = ForwardGpModel(x, y, k, s2).predict(q);
    const ts::DensePosterior oracle = ts::dense_gp(k.signal_variance, k.lengthscales, s2, x, y, q);
    worst_pred = std::max({worst_pred, ts::max_abs(p.mean - oracle.mean), ts::max_abs(p.variance - oracle.variance)});

    const LikelihoodEval eval = log_marginal_likelihood_with_gradient(x, y, k, s2);
    const VectorXd theta = pack_log(k, s2);
    const double h = 1e-5;
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
      VectorXd tp = theta;
      VectorXd tm = theta;
      tp[i] += h;
      tm[i] -= h;
      const double fp = log_marginal_likelihood(x, y, unpack_kernel(tp, d), std::exp(tp[d + 1]));
      const double fm = log_marginal_likelihood(x, y, unpack_kernel(tm, d), std::exp(tm[d + 1]));
      const double fd = (fp - fm) / (2.0 * h);
      worst_grad = std::max(worst_grad, std::abs(eval.gradient[i] - fd) / std::max(1.0, std::abs(fd)));
    }
  }
  return {worst_pred <= 1e-8 && worst_grad <= 1e-4,
          "40 instances, max |pred - dense| = " + fmt(worst_pred, 3) + ", max grad rel err = " + fmt(worst_grad, 3)};
}

Outcome invtgp_correctness()
{
  std::mt19937_64 rng(202);
  std::uniform_int_distribution<int> size(1, 60);
  std::uniform_int_distribution<int> objectives(2, 5);
  std::uniform_real_distribution<double> lam(-1.0, 1.0);
  std::uniform_real_distribution<double> noise(0.01, 0.2);

  double worst_dense = 0.0;
  double worst_zero = 0.0;
  double worst_pooled = 0.0;
  double min_eig = INFINITY;
  for (int trial = 0; trial < 200; ++trial) {
    const int m = objectives(rng);
    const int ns = size(rng);
    const int nt = size(rng);
    const MatrixXd ws = ts::simplex_points(rng, ns, m);
    const MatrixXd wt = ts::simplex_points(rng, nt, m);
    const VectorXd xs = ts::uniform_vector(rng, ns);
    const VectorXd xt = ts::uniform_vector(rng, nt);
    const KernelParams k = random_kernel(rng, m);
    // every tenth draw sits on the boundary |lambda| = 1
    const double lambda = trial % 10 == 0 ? (trial % 20 == 0 ? 1.0 : -1.0) : lam(rng);

    const MatrixXd gram = build_transfer_gram(k, lambda, ws, wt);
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
    min_eig = std::min(min_eig, eig.eigenvalues().minCoeff());

    if (trial % 4 != 0)
      continue;
    const double s_s = noise(rng) * k.signal_variance;
    const double s_t = noise(rng) * k.signal_variance;
    const double offset = xt.mean();
    const MatrixXd q = ts::simplex_points(rng, 10, m);

    const InvTgpModel model(0, 0, ws, xs, wt, xt, k, lambda, s_s, s_t, offset);
    const Prediction p = model.predict_batch(q);
    const ts::DensePosterior oracle =
        ts::dense_transfer(k.signal_variance, k.lengthscales, lambda, s_s, s_t, ws, xs, wt, xt, offset, q);
    worst_dense = std::max({worst_dense, ts::max_abs(p.mean - oracle.mean), ts::max_abs(p.variance - oracle.variance)});

    const Prediction zero = InvTgpModel(0, 0, ws, xs, wt, xt, k, 0.0, s_s, s_t, offset).predict_batch(q);
    const Prediction alone = InverseGpModel(0, wt, xt, k, s_t, offset).predict_batch(q);
    worst_zero = std::max({worst_zero, ts::max_abs(zero.mean - alone.mean), ts::max_abs(zero.variance - alone.variance)});

    // duplicated data under lambda = 1 equals one GP over the stacked copies
    const Prediction tied = InvTgpModel(0, 0, wt, xt, wt, xt, k, 1.0, s_t, s_t, offset).predict_batch(q);
    MatrixXd w2(2 * nt, m);
    w2 << wt, wt;
    VectorXd x2(2 * nt);
    x2 << xt, xt;
    const Prediction pooled = InverseGpModel(0, w2, x2, k, s_t, offset).predict_batch(q);
    worst_pooled =
        std::max({worst_pooled, ts::max_abs(tied.mean - pooled.mean), ts::max_abs(tied.variance - pooled.variance)});
  }
  const bool pass = worst_dense <= 1e-8 && worst_zero <= 1e-6 && worst_pooled <= 1e-6 && min_eig >= -1e-8;
  return {pass, "dense " + fmt(worst_dense, 3) + ", lambda=0 " + fmt(worst_zero, 3) + ", pooled " +
                    fmt(worst_pooled, 3) + ", min Gram eigenvalue " + fmt(min_eig, 3) + " over 200 draws"};
}

Outcome proposition_suite()
{
  std::mt19937_64 rng(303);
  int failures = 0;
  int members = 0;
  int invalid_sets = 0;
  for (int set_index = 0; set_index < 500; ++set_index) {
    const int m = 2 + set_index % 3;
    const int n = 1 + static_cast<int>(rng() % 20);
    const std::vector<VectorXd> set = ts::nondominated_set(rng, m, n);
    // the generator's promise, checked pairwise
    for (const VectorXd& a : set)
      for (const VectorXd& b : set)
        if ((a.array() <= b.array()).all() && (a.array() < b.array()).any())
          ++invalid_sets;
    for (const VectorXd& f : set) {
      ++members;
      // brute force: w_i proportional to 1 / f_i, eta = 0
      const VectorXd w = f.cwiseInverse() / f.cwiseInverse().sum();
      const double own = w.cwiseProduct(f).maxCoeff();
      bool brute = true;
      for (const VectorXd& other : set)
        brute = brute && own <= w.cwiseProduct(other).maxCoeff() + 1e-12;
      if (!brute || !check_proposition1(f, set))
        ++failures;
    }
  }
  return {failures == 0 && invalid_sets == 0, "500 sets, " + std::to_string(members) + " designated points, " +
                                                  std::to_string(failures) + " failures, " +
                                                  std::to_string(invalid_sets) + " dominated pairs"};
}

// -- optimizer studies --------------------------------------------------------

const MdtlzSpec kTarget{Family::Dtlz2, false, 1.0, 0.0, 8, 3};
const MdtlzSpec kHs{Family::Dtlz2, false, 0.9, 0.05, 6, 3};
const MdtlzSpec kMs{Family::Dtlz2, false, 0.7, 0.25, 6, 3};
const MdtlzSpec kLs{Family::Dtlz2, false, 0.3, 0.4, 6, 3};

InverseDataset source_for(const MdtlzSpec& spec)
{
  return generate_source_dataset(make_mdtlz(spec), 100, 500, 100, 0);
}

OptimizerConfig bulk_config(Variant variant, std::uint64_t seed, int budget = 100)
{
  OptimizerConfig c;
  c.budget = budget;
  c.variant = variant;
  c.seed = seed;
  // the probe only feeds the trace diagnostic, not the search
  c.ucb_probe_size = 0;
  return c;
}

struct Batch {
  std::vector<RunResult> runs;
  MetricReport report;
};

Batch run_batch(const Problem& problem, const ReferenceFront& front, const InverseDataset* source,
                const std::optional<OverlapMap>& overlap, Variant variant, int seeds, const std::string& label)
{
  Batch b;
  for (int s = 0; s < seeds; ++s) {
    b.runs.push_back(run(problem, source, overlap, bulk_config(variant, static_cast<std::uint64_t>(s))));
    if (b.runs.back().failure)
      throw std::runtime_error(label + " seed " + std::to_string(s) + " failed: " + *b.runs.back().failure);
  }
  std::vector<const RunResult*> pointers;
  for (const RunResult& r : b.runs)
    pointers.push_back(&r);
  b.report = aggregate(pointers, front, problem, {}, label);
  return b;
}

Outcome desk_reproduction()
{
  const Problem target = make_mdtlz(kTarget);
  const ReferenceFront front = reference_front(kTarget, 10000);
  const InverseDataset hs = source_for(kHs);
  const InverseDataset ms = source_for(kMs);
  const OverlapMap overlap = OverlapMap::leading(6);

  const Batch with_hs = run_batch(target, front, &hs, overlap, Variant::InverseTransfer, 20, "hs");
  const Batch with_ms = run_batch(target, front, &ms, overlap, Variant::InverseTransfer, 20, "ms");
  const Batch zero = run_batch(target, front, nullptr, std::nullopt, Variant::NoTransfer, 20, "zero");

  const double igd_hs = with_hs.report.igd.at(100).median;
  const double igd_ms = with_ms.report.igd.at(100).median;
  const double igd_zero = zero.report.igd.at(100).median;
  const double rmse_ms = with_ms.report.rmse ? with_ms.report.rmse->median : INFINITY;
  const double rmse_zero = zero.report.rmse ? zero.report.rmse->median : 0.0;
  const bool a = igd_hs < igd_zero;
  const bool b = igd_ms >= 0.08 && igd_ms <= 0.18;
  const bool c = rmse_ms < rmse_zero;
  return {a && b && c, std::string("(a) ") + (a ? "ok" : "no") + " IGD@100 hs " + fmt(igd_hs) + " < zero-transfer " +
                           fmt(igd_zero) + "; (b) " + (b ? "ok" : "no") + " ms " + fmt(igd_ms) +
                           " in [0.08, 0.18]; (c) " + (c ? "ok" : "no") + " RMSE ms " + fmt(rmse_ms) +
                           " < zero-transfer " + fmt(rmse_zero) + "; 20 seeds each"};
}

Outcome overlap_study()
{
  const Problem target = make_mdtlz(kTarget);
  const ReferenceFront front = reference_front(kTarget, 10000);
  // one HS source task per overlap count, each sharing all of its variables
  const InverseDataset hs3 = source_for(MdtlzSpec{Family::Dtlz2, false, 0.9, 0.05, 3, 3});
  const InverseDataset hs8 = source_for(MdtlzSpec{Family::Dtlz2, false, 0.9, 0.05, 8, 3});
  const Batch three = run_batch(target, front, &hs3, OverlapMap::leading(3), Variant::InverseTransfer, 10, "q3");
  const Batch eight = run_batch(target, front, &hs8, OverlapMap::leading(8), Variant::InverseTransfer, 10, "q8");
  const double r3 = three.report.rmse ? three.report.rmse->median : INFINITY;
  const double r8 = eight.report.rmse ? eight.report.rmse->median : INFINITY;
  return {r8 <= r3, "median RMSE with 8 shared variables " + fmt(r8) + " <= with 3 shared " + fmt(r3) +
                        "; IGD@100 " + fmt(eight.report.igd.at(100).median) + " vs " +
                        fmt(three.report.igd.at(100).median) + "; 10 seeds each"};
}

Outcome correlation_order()
{
  const Problem target = make_mdtlz(kTarget);
  const OverlapMap overlap = OverlapMap::leading(6);
  const double hs = pearson_scalarized(make_mdtlz(kHs), target, overlap, 10000, 0);
  const double ms = pearson_scalarized(make_mdtlz(kMs), target, overlap, 10000, 0);
  const double ls = pearson_scalarized(make_mdtlz(kLs), target, overlap, 10000, 0);
  return {hs > ms && ms > ls && hs > 0.9,
          "HS " + fmt(hs) + " > MS " + fmt(ms) + " > LS " + fmt(ls) + ", 10000 samples"};
}

Outcome many_objective_smoke()
{
  const MdtlzSpec spec{Family::Dtlz2, false, 1.0, 0.0, 12, 5};
  const Problem target = make_mdtlz(spec);
  const ReferenceFront front = reference_front(spec, 5000);
  const InverseDataset hs = source_for(MdtlzSpec{Family::Dtlz2, false, 0.9, 0.05, 10, 5});
  int improved = 0;
  int failed = 0;
  std::string per_seed;
  for (int s = 0; s < 5; ++s) {
    const RunResult r = run(target, &hs, OverlapMap::leading(10), bulk_config(Variant::InverseTransfer,
                                                                                static_cast<std::uint64_t>(s), 60));
    if (r.failure || r.archive.size() != 60) {
      ++failed;
      continue;
    }
    std::vector<const RunResult*> one{&r};
    const MetricReport report = aggregate(one, front, target, {r.config.n_init, 60});
    const double before = report.igd.at(r.config.n_init).median;
    const double after = report.igd.at(60).median;
    if (after < before)
      ++improved;
    per_seed += (per_seed.empty() ? "" : ", ") + fmt(before, 3) + "->" + fmt(after, 3);
  }
  return {failed == 0 && improved >= 4, std::to_string(improved) + "/5 seeds improved IGD (" + per_seed + "), " +
                                            std::to_string(failed) + " failed runs"};
}

Outcome determinism(const std::string& cli)
{
  if (cli.empty() || !fs::exists(cli))
    return {false, "command-line tool not found (pass --cli PATH)"};
  const fs::path work = fs::temp_directory_path() / "invtransfer-acceptance-determinism";
  fs::remove_all(work);
  fs::create_directories(work);
  const std::string quiet = " > " + (work / "log.txt").string() + " 2>&1";
  if (std::system(("\"" + cli + "\" gen-source --family DTLZ2 --delta1 0.7 --delta2 0.25 --d 6 --m 3 --pop 60 "
                   "--generations 60 --keep 60 --seed 1 --out \"" + (work / "ms.json").string() + "\"" + quiet)
                      .c_str()) != 0)
    return {false, "gen-source failed"};
  const nlohmann::json config{{"name", "det"},
                              {"target", kTarget},
                              {"source_dataset", "ms.json"},
                              {"overlap_count", 6},
                              {"optimizer", {{"budget", 30}, {"n_offspring", 2000}, {"ucb_probe_size", 500}}},
                              {"n_seeds", 2},
                              {"base_seed", 5},
                              {"reference_points", 2000}};
  write_text_file(work / "exp.json", config.dump(2));
  for (const char* out : {"a", "b"})
    if (std::system(("\"" + cli + "\" run --config \"" + (work / "exp.json").string() + "\" --out \"" +
                     (work / out).string() + "\"" + quiet)
                        .c_str()) != 0)
      return {false, std::string("run into ") + out + " failed"};
  int compared = 0;
  for (const std::string file : {"det-s5/archive.csv", "det-s6/archive.csv", "det-metrics.json", "det-metrics.csv",
                                 "det-s5/trace.jsonl", "det-s5/models.json"}) {
    if (read_text_file(work / "a" / file) != read_text_file(work / "b" / file))
      return {false, file + " differs between repeated runs"};
    ++compared;
  }
  return {true, std::to_string(compared) + " files byte-identical across two invocations of `run` (2 seeds)"};
}

} // namespace

int main(int argc, char** argv)
{
  std::string cli;
  std::vector<std::string> only;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--cli" && i + 1 < argc)
      cli = argv[++i];
    else if (arg == "--only" && i + 1 < argc)
      only.push_back(argv[++i]);
    else {
      std::cerr << "usage: acceptance [--cli PATH] [--only NAME]...\n";
      return 2;
    }
  }

  const std::vector<Criterion> criteria{
      {"gp-correctness", 60, gp_correctness},
      {"invtgp-correctness", 120, invtgp_correctness},
      {"proposition-property", 60, proposition_suite},
      {"desk-reproduction", 1800, desk_reproduction},
      {"overlap-monotonicity", 1800, overlap_study},
      {"correlation-ordering", 600, correlation_order},
      {"many-objective-smoke", 1800, many_objective_smoke},
      {"determinism", 600, [&] { return determinism(cli); }},
  };

  int failed = 0;
  for (const Criterion& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.name) == only.end())
      continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (seconds > c.time_limit_s) {
      o.pass = false;
      o.detail += "; exceeded the " + fmt(c.time_limit_s) + " s limit";
    }
    std::cout << (o.pass ? "PASS " : "FAIL ") << c.name << ": " << o.detail << " [" << fmt(seconds, 3) << " s]"
              << std::endl;
    if (!o.pass)
      ++failed;
  }
  return failed == 0 ? 0 : 1;
}

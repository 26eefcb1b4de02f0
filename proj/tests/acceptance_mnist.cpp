// Quantitative acceptance suite on MNIST: 30 clients, 30 rounds, 5 seeds,
// default hyperparameters. Expects the four IDX archives (plain or .gz) in
// the directory given as argv[1] (default ./data); exits 77 when they are
// missing so the test harness reports a skip instead of a failure.
//
// This suite trains 19 full cells and takes a few hours on a multicore
// machine. FEDRAD_MAX_THREADS bounds the worker count if set.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <string>

#include "acceptance_harness.hpp"
#include "fedsim/idx.hpp"
#include "fedsim/simulator.hpp"

using namespace fedsim;

namespace {

std::string find_idx_file(const std::string& dir, const std::string& stem) {
  for (const char* suffix : {".gz", ""}) {
    const std::string candidate = dir + "/" + stem + suffix;
    if (std::filesystem::exists(candidate)) return candidate;
  }
  return "";
}

struct CellKey {
  std::size_t faulty;
  std::size_t malicious;
  const char* heterogeneity;  // "iid", "0.5", "0.1"
  AggregatorId aggregator;

  bool operator<(const CellKey& other) const {
    return std::tie(faulty, malicious, heterogeneity, aggregator) <
           std::tie(other.faulty, other.malicious, other.heterogeneity,
                    other.aggregator);
  }
};

class CellRunner {
 public:
  CellRunner(ExperimentData data, std::size_t max_threads)
      : data_(std::move(data)), max_threads_(max_threads) {}

  const ExperimentResult& run(const CellKey& key) {
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;

    SimulationConfig config;
    config.attack.faulty_count = key.faulty;
    config.attack.malicious_count = key.malicious;
    if (std::string(key.heterogeneity) != "iid") {
      config.partition.alpha = std::stod(key.heterogeneity);
    }
    config.aggregator.id = key.aggregator;
    config.max_threads = max_threads_;

    std::printf("  running cell: faulty=%zu malicious=%zu %s %s ...\n",
                key.faulty, key.malicious, key.heterogeneity,
                to_string(key.aggregator).c_str());
    std::fflush(stdout);
    auto [inserted, ok] = cache_.emplace(key, run_seeds(config, data_));
    const ExperimentResult& result = inserted->second;
    std::printf("    mean error %.4f +- %.4f\n", result.final_error_mean,
                result.final_error_std);
    std::fflush(stdout);
    return result;
  }

 private:
  ExperimentData data_;
  std::size_t max_threads_;
  std::map<CellKey, ExperimentResult> cache_;
};

// Mean final-round histogram statistics per role, pooled over seeds.
struct RoleCounts {
  double faulty_mean = 0.0;
  double malicious_mean = 0.0;
  double honest_mean = 0.0;
  std::size_t max_faulty = 0;
};

RoleCounts final_round_role_counts(const ExperimentResult& result,
                                   const AttackSpec& attack) {
  RoleCounts out;
  std::size_t faulty_n = 0, malicious_n = 0, honest_n = 0;
  for (const ExperimentTrace& trace : result.traces) {
    const std::vector<ClientRole> roles =
        assign_roles(30, attack, mix_seed(trace.seed, "roles"));
    const RoundRecord& last = trace.rounds.back();
    const MedianCountHistogram& hist = *last.histogram;
    for (std::size_t slot = 0; slot < last.selected_clients.size(); ++slot) {
      const std::size_t k = last.selected_clients[slot];
      const double count = static_cast<double>(hist.counts[slot]);
      switch (roles[k]) {
        case ClientRole::faulty:
          out.faulty_mean += count;
          out.max_faulty = std::max(out.max_faulty, hist.counts[slot]);
          ++faulty_n;
          break;
        case ClientRole::malicious:
          out.malicious_mean += count;
          ++malicious_n;
          break;
        case ClientRole::honest:
          out.honest_mean += count;
          ++honest_n;
          break;
      }
    }
  }
  if (faulty_n > 0) out.faulty_mean /= static_cast<double>(faulty_n);
  if (malicious_n > 0) out.malicious_mean /= static_cast<double>(malicious_n);
  if (honest_n > 0) out.honest_mean /= static_cast<double>(honest_n);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string dir = argc > 1 ? argv[1] : "data";
  const std::string train_images = find_idx_file(dir, "train-images-idx3-ubyte");
  const std::string train_labels = find_idx_file(dir, "train-labels-idx1-ubyte");
  const std::string test_images = find_idx_file(dir, "t10k-images-idx3-ubyte");
  const std::string test_labels = find_idx_file(dir, "t10k-labels-idx1-ubyte");
  if (train_images.empty() || train_labels.empty() || test_images.empty() ||
      test_labels.empty()) {
    std::printf(
        "SKIP: MNIST IDX files not found under %s\n"
        "      (fetch them with: fedradsim fetch-data %s)\n",
        dir.c_str(), dir.c_str());
    return 77;
  }

  ExperimentData data;
  data.train = load_idx(train_images, train_labels);
  data.test = load_idx(test_images, test_labels);
  std::printf("loaded MNIST: train %zu, test %zu\n", data.train.size(),
              data.test.size());
  if (data.train.size() != 60000 || data.test.size() != 10000 ||
      data.train.class_count != 10) {
    std::fprintf(stderr, "unexpected MNIST geometry\n");
    return 1;
  }

  std::size_t max_threads = 0;
  if (const char* env = std::getenv("FEDRAD_MAX_THREADS")) {
    max_threads = static_cast<std::size_t>(std::strtoul(env, nullptr, 10));
  }
  CellRunner cells(std::move(data), max_threads);
  acceptance::Runner runner;

  runner.criterion("1. no attacks, IID: FedAvg and FedRAD <= 8%", [&] {
    const auto& fa = cells.run({0, 0, "iid", AggregatorId::fedavg});
    const auto& rad = cells.run({0, 0, "iid", AggregatorId::fedrad});
    return fa.final_error_mean <= 0.08 && rad.final_error_mean <= 0.08;
  });

  runner.criterion(
      "2. 10 faulty, IID: FedAvg >= 80%, COMED <= 8%, FedRAD <= 8%", [&] {
        const auto& fa = cells.run({10, 0, "iid", AggregatorId::fedavg});
        const auto& med = cells.run({10, 0, "iid", AggregatorId::comed});
        const auto& rad = cells.run({10, 0, "iid", AggregatorId::fedrad});
        return fa.final_error_mean >= 0.80 && med.final_error_mean <= 0.08 &&
               rad.final_error_mean <= 0.08;
      });

  runner.criterion(
      "3. 10 faulty, alpha=0.1: FedRAD <= 25% while COMED >= 40%", [&] {
        const auto& rad = cells.run({10, 0, "0.1", AggregatorId::fedrad});
        const auto& med = cells.run({10, 0, "0.1", AggregatorId::comed});
        return rad.final_error_mean <= 0.25 && med.final_error_mean >= 0.40;
      });

  runner.criterion(
      "4. 10 malicious, IID: FedRAD <= 9%, FedDFmed <= 13%, FedDF worse "
      "than FedDFmed",
      [&] {
        const auto& rad = cells.run({0, 10, "iid", AggregatorId::fedrad});
        const auto& dfmed = cells.run({0, 10, "iid", AggregatorId::feddfmed});
        const auto& df = cells.run({0, 10, "iid", AggregatorId::feddf});
        return rad.final_error_mean <= 0.09 &&
               dfmed.final_error_mean <= 0.13 &&
               df.final_error_mean > dfmed.final_error_mean;
      });

  runner.criterion(
      "5. 5 faulty + 5 malicious, IID: FedRAD <= 8% and best in the cell",
      [&] {
        const auto& rad = cells.run({5, 5, "iid", AggregatorId::fedrad});
        if (rad.final_error_mean > 0.08) return false;
        for (AggregatorId other :
             {AggregatorId::fedavg, AggregatorId::comed, AggregatorId::mkrum,
              AggregatorId::feddf, AggregatorId::feddfmed,
              AggregatorId::fedradnoise}) {
          const auto& rival = cells.run({5, 5, "iid", other});
          if (rival.final_error_mean < rad.final_error_mean) return false;
        }
        return true;
      });

  runner.criterion(
      "6. histograms: faulty counts < 334 each (alpha=0.5); malicious mean "
      "< honest mean",
      [&] {
        AttackSpec faulty_attack;
        faulty_attack.faulty_count = 10;
        const auto& faulty_cell =
            cells.run({10, 0, "0.5", AggregatorId::fedrad});
        const RoleCounts faulty_counts =
            final_round_role_counts(faulty_cell, faulty_attack);
        std::printf("    faulty max count %zu (uniform share %.0f)\n",
                    faulty_counts.max_faulty, 100000.0 / 30.0);

        AttackSpec malicious_attack;
        malicious_attack.malicious_count = 10;
        const auto& malicious_cell =
            cells.run({0, 10, "0.5", AggregatorId::fedrad});
        const RoleCounts malicious_counts =
            final_round_role_counts(malicious_cell, malicious_attack);
        std::printf("    malicious mean %.1f vs honest mean %.1f\n",
                    malicious_counts.malicious_mean,
                    malicious_counts.honest_mean);

        return faulty_counts.max_faulty < 334 &&
               malicious_counts.malicious_mean < malicious_counts.honest_mean;
      });

  return runner.finish();
}

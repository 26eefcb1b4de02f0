#include "fedsim/aggregators.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <numeric>
#include <thread>

#include "fedsim/errors.hpp"
#include "fedsim/partition.hpp"

namespace fedsim {

namespace {

const std::vector<std::pair<std::string, AggregatorId>> kAggregatorTable = {
    {"fedavg", AggregatorId::fedavg},
    {"comed", AggregatorId::comed},
    {"mkrum", AggregatorId::mkrum},
    {"feddf", AggregatorId::feddf},
    {"feddfmed", AggregatorId::feddfmed},
    {"fedrad", AggregatorId::fedrad},
    {"fedradnoise", AggregatorId::fedradnoise},
};

ModelParams weighted_average(const std::vector<ModelParams>& params,
                             const std::vector<double>& weights) {
  ModelParams out;
  out.values.assign(params[0].size(), 0.0);
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double w = weights[k];
    if (w == 0.0) continue;
    const std::vector<double>& src = params[k].values;
    for (std::size_t i = 0; i < src.size(); ++i) {
      out.values[i] += w * src[i];
    }
  }
  return out;
}

std::vector<double> size_proportions(const std::vector<std::size_t>& sizes) {
  double total = 0.0;
  for (std::size_t n : sizes) total += static_cast<double>(n);
  std::vector<double> weights(sizes.size());
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    weights[k] = static_cast<double>(sizes[k]) / total;
  }
  return weights;
}

// Shared body of fedrad and fedradnoise once the distill inputs are chosen.
AggregationOutcome fedrad_with_set(const AggregationInput& input,
                                   const ServerDistillSet& distill_set) {
  LogitEnsemble ensemble = compute_ensemble_logits(
      input.client_params, input.architecture, distill_set.inputs,
      input.max_threads);
  auto [scores, histogram] = median_scores(ensemble, input.median_convention);

  AggregationOutcome outcome;
  outcome.histogram = histogram;
  std::vector<double> weights;
  try {
    ScoreVector adjusted = adjust_scores_by_size(scores, input.client_sizes);
    outcome.scores = adjusted;
    weights = adjusted.scores;
  } catch (const DegenerateScoreError&) {
    std::fprintf(stderr,
                 "warning: round %zu: all size-adjusted median scores are "
                 "zero; falling back to size-proportional weights\n",
                 input.round_index);
    weights = size_proportions(input.client_sizes);
    outcome.scores = ScoreVector{weights};
    outcome.used_fallback_weights = true;
  }

  ModelParams averaged = weighted_average(input.client_params, weights);
  if (input.distill.epochs > 0) {
    PseudolabelSet labels = pseudolabels_median(ensemble);
    MlpModel student = unflatten(averaged, input.architecture);
    student = distill(std::move(student), labels, distill_set, input.distill);
    averaged = flatten(student);
  }
  outcome.global = std::move(averaged);
  return outcome;
}

ModelParams feddf_like(const AggregationInput& input, PseudolabelMode mode) {
  if (input.distill_set == nullptr || input.distill_set->size() == 0) {
    throw ConfigError(std::string("feddf") +
                      (mode == PseudolabelMode::median_logits ? "med" : "") +
                      ": no server distill set configured");
  }
  ModelParams student_params = fedavg(input);
  if (input.distill.epochs == 0) {
    return student_params;
  }
  LogitEnsemble ensemble = compute_ensemble_logits(
      input.client_params, input.architecture, input.distill_set->inputs,
      input.max_threads);
  PseudolabelSet labels = (mode == PseudolabelMode::mean_logits)
                              ? pseudolabels_mean(ensemble)
                              : pseudolabels_median(ensemble);
  MlpModel student = unflatten(student_params, input.architecture);
  student =
      distill(std::move(student), labels, *input.distill_set, input.distill);
  return flatten(student);
}

}  // namespace

void AggregationInput::validate() const {
  if (client_params.empty()) {
    throw ValidationError("aggregate: no client models");
  }
  if (client_sizes.size() != client_params.size()) {
    throw ValidationError("aggregate: " + std::to_string(client_sizes.size()) +
                          " sizes for " + std::to_string(client_params.size()) +
                          " models");
  }
  const std::size_t expected = parameter_count_for(architecture);
  for (std::size_t k = 0; k < client_params.size(); ++k) {
    if (client_params[k].size() != expected) {
      throw ShapeError("aggregate: client " + std::to_string(k) + " has " +
                       std::to_string(client_params[k].size()) +
                       " parameters, architecture needs " +
                       std::to_string(expected));
    }
  }
  for (std::size_t n : client_sizes) {
    if (n == 0) throw ValidationError("aggregate: zero-size client dataset");
  }
}

AggregatorId parse_aggregator(const std::string& name) {
  for (const auto& [key, id] : kAggregatorTable) {
    if (key == name) return id;
  }
  std::string known;
  for (const auto& [key, id] : kAggregatorTable) {
    if (!known.empty()) known += ", ";
    known += key;
  }
  throw ConfigError("unknown aggregator \"" + name + "\" (known: " + known +
                    ")");
}

std::string to_string(AggregatorId id) {
  for (const auto& [key, value] : kAggregatorTable) {
    if (value == id) return key;
  }
  return "unknown";
}

const std::vector<std::string>& aggregator_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [key, id] : kAggregatorTable) out.push_back(key);
    return out;
  }();
  return names;
}

LogitEnsemble compute_ensemble_logits(
    const std::vector<ModelParams>& client_params,
    const std::vector<std::size_t>& architecture, const RealMatrix& inputs,
    std::size_t max_threads) {
  LogitEnsemble ensemble;
  ensemble.logits.resize(client_params.size());
  std::size_t workers = max_threads == 0
                            ? std::max(1u, std::thread::hardware_concurrency())
                            : max_threads;
  workers = std::min(workers, client_params.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t m = next.fetch_add(1);
      if (m >= client_params.size()) return;
      MlpModel model = unflatten(client_params[m], architecture);
      ensemble.logits[m] = forward(model, inputs);
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  return ensemble;
}

ModelParams fedavg(const AggregationInput& input) {
  input.validate();
  return weighted_average(input.client_params,
                          size_proportions(input.client_sizes));
}

ModelParams comed(const AggregationInput& input) {
  input.validate();
  const std::size_t m = input.model_count();
  const std::size_t dim = input.client_params[0].size();
  ModelParams out;
  out.values.resize(dim);
  std::vector<double> coord(m);
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t k = 0; k < m; ++k) {
      coord[k] = input.client_params[k].values[i];
    }
    std::sort(coord.begin(), coord.end());
    out.values[i] = (m % 2 == 1)
                        ? coord[m / 2]
                        : 0.5 * (coord[m / 2 - 1] + coord[m / 2]);
  }
  return out;
}

ModelParams mkrum(const AggregationInput& input, std::size_t f, std::size_t m,
                  bool size_weighted) {
  input.validate();
  const std::size_t total = input.model_count();
  if (total < f + 3) {
    throw ValidationError("mkrum: need at least f+3 = " +
                          std::to_string(f + 3) + " clients, have " +
                          std::to_string(total));
  }
  if (m < 1 || m > total) {
    throw ValidationError("mkrum: m = " + std::to_string(m) +
                          " outside [1, " + std::to_string(total) + "]");
  }
  const std::size_t neighbors = total - f - 2;

  // Pairwise squared distances.
  std::vector<std::vector<double>> dist2(total, std::vector<double>(total));
  for (std::size_t i = 0; i < total; ++i) {
    for (std::size_t j = i + 1; j < total; ++j) {
      const std::vector<double>& a = input.client_params[i].values;
      const std::vector<double>& b = input.client_params[j].values;
      double acc = 0.0;
      for (std::size_t t = 0; t < a.size(); ++t) {
        const double d = a[t] - b[t];
        acc += d * d;
      }
      dist2[i][j] = acc;
      dist2[j][i] = acc;
    }
  }

  std::vector<std::pair<double, std::size_t>> scored(total);
  std::vector<double> others;
  others.reserve(total - 1);
  for (std::size_t i = 0; i < total; ++i) {
    others.clear();
    for (std::size_t j = 0; j < total; ++j) {
      if (j != i) others.push_back(dist2[i][j]);
    }
    std::sort(others.begin(), others.end());
    double score = 0.0;
    for (std::size_t t = 0; t < neighbors && t < others.size(); ++t) {
      score += others[t];
    }
    scored[i] = {score, i};
  }
  std::sort(scored.begin(), scored.end());

  std::vector<double> weights(total, 0.0);
  double norm = 0.0;
  for (std::size_t t = 0; t < m; ++t) {
    const std::size_t k = scored[t].second;
    weights[k] = size_weighted
                     ? static_cast<double>(input.client_sizes[k])
                     : 1.0;
    norm += weights[k];
  }
  for (double& w : weights) w /= norm;
  return weighted_average(input.client_params, weights);
}

ModelParams feddf(const AggregationInput& input) {
  input.validate();
  return feddf_like(input, PseudolabelMode::mean_logits);
}

ModelParams feddfmed(const AggregationInput& input) {
  input.validate();
  return feddf_like(input, PseudolabelMode::median_logits);
}

AggregationOutcome fedrad(const AggregationInput& input) {
  input.validate();
  if (input.distill_set == nullptr || input.distill_set->size() == 0) {
    throw ConfigError("fedrad: no server distill set configured");
  }
  return fedrad_with_set(input, *input.distill_set);
}

AggregationOutcome fedradnoise(const AggregationInput& input) {
  input.validate();
  if (input.architecture.empty()) {
    throw ConfigError("fedradnoise: architecture required");
  }
  ServerDistillSet noise = uniform_noise_set(
      input.noise_set_size, input.architecture.front(),
      mix_seed(input.rng_seed, "fedradnoise_set", input.round_index));
  return fedrad_with_set(input, noise);
}

AggregationOutcome aggregate(const AggregatorKind& kind,
                             const AggregationInput& input) {
  switch (kind.id) {
    case AggregatorId::fedavg:
      return {fedavg(input), std::nullopt, std::nullopt, false};
    case AggregatorId::comed:
      return {comed(input), std::nullopt, std::nullopt, false};
    case AggregatorId::mkrum: {
      const std::size_t f =
          kind.mkrum.f.value_or(input.attacker_count_hint);
      const std::size_t m =
          kind.mkrum.m.value_or(input.model_count() > f
                                    ? input.model_count() - f
                                    : 1);
      return {mkrum(input, f, m, kind.mkrum.size_weighted), std::nullopt,
              std::nullopt, false};
    }
    case AggregatorId::feddf:
      return {feddf(input), std::nullopt, std::nullopt, false};
    case AggregatorId::feddfmed:
      return {feddfmed(input), std::nullopt, std::nullopt, false};
    case AggregatorId::fedrad:
      return fedrad(input);
    case AggregatorId::fedradnoise:
      return fedradnoise(input);
  }
  throw ConfigError("aggregate: unhandled aggregator kind");
}

}  // namespace fedsim

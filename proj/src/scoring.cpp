#include "fedsim/scoring.hpp"

#include <algorithm>
#include <cmath>

#include "fedsim/errors.hpp"

namespace fedsim {

void LogitEnsemble::validate() const {
  if (logits.empty()) {
    throw ShapeError("ensemble: no models");
  }
  for (std::size_t m = 1; m < logits.size(); ++m) {
    if (!logits[m].same_shape(logits[0])) {
      throw ShapeError("ensemble: model " + std::to_string(m) + " is " +
                       std::to_string(logits[m].rows) + "x" +
                       std::to_string(logits[m].cols) + ", model 0 is " +
                       std::to_string(logits[0].rows) + "x" +
                       std::to_string(logits[0].cols));
    }
  }
}

std::pair<ScoreVector, MedianCountHistogram> median_scores(
    const LogitEnsemble& ensemble, MedianConvention convention) {
  ensemble.validate();
  const std::size_t m = ensemble.models();
  const std::size_t n = ensemble.points();
  const std::size_t c = ensemble.classes();
  if (n == 0 || c == 0) {
    throw ShapeError("median_scores: empty prediction task");
  }

  MedianCountHistogram histogram;
  histogram.counts.assign(m, 0);
  histogram.total = n * c;

  // 1-based sorted position of the median owner. Lower: ceil(M/2), which is
  // the unique median when M is odd. Upper: the other middle element.
  const std::size_t position = (convention == MedianConvention::lower)
                                   ? (m + 1) / 2
                                   : m / 2 + 1;

  std::vector<std::pair<double, std::size_t>> cell(m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      for (std::size_t model = 0; model < m; ++model) {
        cell[model] = {ensemble.logits[model](i, j), model};
      }
      std::sort(cell.begin(), cell.end());
      // Of the models tied at the median value, the smallest index owns
      // the cell.
      std::size_t owner_pos = position - 1;
      while (owner_pos > 0 && cell[owner_pos - 1].first == cell[position - 1].first) {
        --owner_pos;
      }
      histogram.counts[cell[owner_pos].second] += 1;
    }
  }

  ScoreVector scores;
  scores.scores.resize(m);
  const double total = static_cast<double>(histogram.total);
  for (std::size_t model = 0; model < m; ++model) {
    scores.scores[model] = static_cast<double>(histogram.counts[model]) / total;
  }
  return {std::move(scores), std::move(histogram)};
}

ScoreVector adjust_scores_by_size(const ScoreVector& scores,
                                  const std::vector<std::size_t>& sizes) {
  if (scores.scores.size() != sizes.size()) {
    throw ShapeError("adjust_scores_by_size: " +
                     std::to_string(scores.scores.size()) + " scores vs " +
                     std::to_string(sizes.size()) + " sizes");
  }
  ScoreVector out;
  out.scores.resize(scores.scores.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    out.scores[k] = scores.scores[k] * static_cast<double>(sizes[k]);
    sum += out.scores[k];
  }
  if (!(sum > 0.0)) {
    throw DegenerateScoreError(
        "adjust_scores_by_size: all size-weighted scores are zero");
  }
  for (double& s : out.scores) s /= sum;
  return out;
}

std::string export_histogram(const MedianCountHistogram& histogram,
                             const std::vector<ClientRole>& client_roles,
                             const std::vector<std::size_t>& client_ids) {
  if (histogram.counts.size() != client_roles.size()) {
    throw ShapeError("export_histogram: " +
                     std::to_string(histogram.counts.size()) +
                     " counts vs " + std::to_string(client_roles.size()) +
                     " roles");
  }
  if (!client_ids.empty() && client_ids.size() != histogram.counts.size()) {
    throw ShapeError("export_histogram: " + std::to_string(client_ids.size()) +
                     " ids vs " + std::to_string(histogram.counts.size()) +
                     " counts");
  }
  std::string out = "client_id,role,median_count\n";
  for (std::size_t k = 0; k < histogram.counts.size(); ++k) {
    out += std::to_string(client_ids.empty() ? k : client_ids[k]);
    out += ',';
    out += to_string(client_roles[k]);
    out += ',';
    out += std::to_string(histogram.counts[k]);
    out += '\n';
  }
  return out;
}

}  // namespace fedsim

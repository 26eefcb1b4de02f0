#pragma once

#include <string>
#include <utility>
#include <vector>

#include "fedsim/attacks.hpp"
#include "fedsim/matrix.hpp"

namespace fedsim {

// Logit outputs of M models over the same N x C prediction task.
struct LogitEnsemble {
  std::vector<RealMatrix> logits;  // each N x C

  std::size_t models() const { return logits.size(); }
  std::size_t points() const { return logits.empty() ? 0 : logits[0].rows; }
  std::size_t classes() const { return logits.empty() ? 0 : logits[0].cols; }

  // Throws ShapeError unless all matrices share N and C and M >= 1.
  void validate() const;
};

// Normalized per-client aggregation weights; entries are >= 0 and sum to 1.
struct ScoreVector {
  std::vector<double> scores;
};

// How often each model owned the median logit; total is N x C.
struct MedianCountHistogram {
  std::vector<std::size_t> counts;
  std::size_t total = 0;
};

// Which order statistic owns the median of an even-sized ensemble. The
// scoring rule needs a concrete owner, so the midpoint convention used for
// value medians does not apply here.
enum class MedianConvention { lower, upper };

// For every (datapoint, class) cell, finds the model holding the median of
// the M logit values and increments its count; scores are counts / (N*C).
// Ties are broken toward the smallest model index.
std::pair<ScoreVector, MedianCountHistogram> median_scores(
    const LogitEnsemble& ensemble,
    MedianConvention convention = MedianConvention::lower);

// p_k <- n_k * p_k / sum(n_k * p_k). Throws DegenerateScoreError when the
// weighted sum vanishes.
ScoreVector adjust_scores_by_size(const ScoreVector& scores,
                                  const std::vector<std::size_t>& sizes);

// CSV with header client_id,role,median_count, one row per client. When
// `client_ids` is given (partial participation) it supplies the id column;
// by default clients are numbered 0..M-1.
std::string export_histogram(const MedianCountHistogram& histogram,
                             const std::vector<ClientRole>& client_roles,
                             const std::vector<std::size_t>& client_ids = {});

}  // namespace fedsim

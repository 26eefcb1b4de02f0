#pragma once

#include <string>
#include <vector>

#include "fedsim/simulator.hpp"

namespace fedsim {

// round,error_rate rows; round 0 is the untrained baseline.
std::string round_trace_csv(const ExperimentTrace& trace);

struct SummaryRow {
  std::string attack;
  std::string heterogeneity;
  std::string aggregator;
  double mean_error = 0.0;
  double std_error = 0.0;
  bool bold = false;
  bool failed = false;
  bool collapsed = false;  // any seed ended at the constant-prediction floor
  std::string message;
};

// attack,heterogeneity,aggregator,mean_error,std_error,bold
std::string summary_csv(const std::vector<SummaryRow>& rows);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace fedsim

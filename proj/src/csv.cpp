#include "fedsim/csv.hpp"

#include <cstdio>
#include <fstream>

#include "fedsim/errors.hpp"

namespace fedsim {

namespace {

std::string fmt_error(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

std::string round_trace_csv(const ExperimentTrace& trace) {
  std::string out = "round,error_rate\n";
  out += "0," + fmt_error(trace.baseline_error) + "\n";
  for (const RoundRecord& r : trace.rounds) {
    out += std::to_string(r.round_index) + "," + fmt_error(r.test_error) +
           "\n";
  }
  return out;
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::string out = "attack,heterogeneity,aggregator,mean_error,std_error,bold\n";
  for (const SummaryRow& row : rows) {
    out += row.attack + "," + row.heterogeneity + "," + row.aggregator + ",";
    if (row.failed) {
      out += "failed,failed,0\n";
    } else {
      out += fmt_error(row.mean_error) + "," + fmt_error(row.std_error) +
             "," + (row.bold ? "1" : "0") + "\n";
    }
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path);
  out << content;
  if (!out) throw FormatError("write failed for " + path);
}

}  // namespace fedsim

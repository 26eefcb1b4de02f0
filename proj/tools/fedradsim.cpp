// fedradsim: driver for the federated-aggregation experiment matrix.
//
// Subcommands:
//   validate <manifest>   parse a manifest and print its normalized form
//   run <manifest>        run every grid cell, write CSV/SVG artifacts
//   fetch-data <dir>      download and verify the MNIST IDX archives
//   summarize <dir>       pretty-print a results directory's summary.csv

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fedsim/csv.hpp"
#include "fedsim/errors.hpp"
#include "fedsim/idx.hpp"
#include "fedsim/manifest.hpp"

#ifdef FEDRADSIM_HAS_TLS
#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <openssl/evp.h>

#include "httplib.h"
#endif

namespace {

struct MnistFile {
  const char* name;
  const char* md5;
};

// Checksums of the gzip archives as distributed by the common mirrors.
constexpr MnistFile kMnistFiles[] = {
    {"train-images-idx3-ubyte.gz", "f68b3c2dcbeaaa9fbdd348bbdeb94873"},
    {"train-labels-idx1-ubyte.gz", "d53e105ee54ea40749a09fcbcd1e9432"},
    {"t10k-images-idx3-ubyte.gz", "9fb629c4189551a2d022fa330f9573f3"},
    {"t10k-labels-idx1-ubyte.gz", "ec29112dd5afa0611ce80d1b7f02629c"},
};

#ifdef FEDRADSIM_HAS_TLS

std::string md5_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_md5(), nullptr);
  EVP_DigestUpdate(ctx, bytes.data(), bytes.size());
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xF];
  }
  return out;
}

int fetch_data(const std::string& dir, const std::string& base_url,
               bool skip_verify) {
  std::filesystem::create_directories(dir);
  httplib::Client client(base_url);
  client.set_follow_location(true);
  client.set_connection_timeout(30);
  client.set_read_timeout(120);

  bool all_ok = true;
  for (const MnistFile& file : kMnistFiles) {
    const std::filesystem::path target =
        std::filesystem::path(dir) / file.name;
    std::string bytes;
    if (std::filesystem::exists(target)) {
      std::ifstream in(target, std::ios::binary);
      bytes.assign(std::istreambuf_iterator<char>(in),
                   std::istreambuf_iterator<char>());
      std::printf("found    %s (%zu bytes)\n", file.name, bytes.size());
    } else {
      const std::string path = "/mnist/" + std::string(file.name);
      std::printf("fetching %s%s\n", base_url.c_str(), path.c_str());
      auto res = client.Get(path);
      if (!res || res->status != 200) {
        std::fprintf(stderr, "error: download of %s failed (%s)\n", file.name,
                     res ? std::to_string(res->status).c_str()
                         : httplib::to_string(res.error()).c_str());
        all_ok = false;
        continue;
      }
      bytes = res->body;
      std::ofstream out(target, std::ios::binary);
      out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    }
    if (!skip_verify) {
      const std::string digest = md5_hex(bytes);
      if (digest != file.md5) {
        std::fprintf(stderr, "error: %s checksum %s != expected %s\n",
                     file.name, digest.c_str(), file.md5);
        all_ok = false;
        continue;
      }
      std::printf("verified %s (md5 %s)\n", file.name, file.md5);
    }
  }
  return all_ok ? 0 : 1;
}

#else

int fetch_data(const std::string&, const std::string&, bool) {
  std::fprintf(stderr,
               "error: this build has no TLS support; download the four "
               "MNIST IDX archives manually:\n");
  for (const MnistFile& file : kMnistFiles) {
    std::fprintf(stderr, "  %s  (md5 %s)\n", file.name, file.md5);
  }
  return 1;
}

#endif

int summarize(const std::string& results_dir) {
  const std::filesystem::path csv_path =
      std::filesystem::path(results_dir) / "summary.csv";
  std::ifstream in(csv_path);
  if (!in) {
    std::fprintf(stderr, "error: cannot open %s\n", csv_path.string().c_str());
    return 1;
  }
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    rows.push_back(std::move(fields));
  }
  if (rows.empty()) {
    std::fprintf(stderr, "error: %s is empty\n", csv_path.string().c_str());
    return 1;
  }
  std::vector<std::size_t> widths;
  for (const auto& row : rows) {
    if (widths.size() < row.size()) widths.resize(row.size(), 0);
    for (std::size_t i = 0; i < row.size(); ++i) {
      widths[i] = std::max(widths[i], row[i].size());
    }
  }
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::string out;
    for (std::size_t i = 0; i < rows[r].size(); ++i) {
      std::string cell = rows[r][i];
      // Mark bolded rows the way a terminal can show them.
      if (r > 0 && i + 1 == rows[r].size() && cell == "1") cell = "best*";
      if (r > 0 && i + 1 == rows[r].size() && cell == "0") cell = "";
      cell.resize(std::max(cell.size(), widths[i]), ' ');
      out += cell + "  ";
    }
    std::printf("%s\n", out.c_str());
    if (r == 0) {
      std::string rule;
      for (std::size_t w : widths) rule += std::string(w, '-') + "  ";
      std::printf("%s\n", rule.c_str());
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "fedradsim: robust federated-learning aggregation experiments "
      "(FedAvg, COMED, Multi-Krum, FedDF, FedDFmed, FedRAD, FedRADnoise)"};
  app.require_subcommand(1);

  std::string manifest_path;
  std::string data_dir;
  std::string results_dir;
  std::string base_url = "https://ossci-datasets.s3.amazonaws.com";
  bool skip_verify = false;

  CLI::App* validate = app.add_subcommand(
      "validate", "Parse a manifest and print its normalized JSON form");
  validate->add_option("manifest", manifest_path, "Manifest JSON file")
      ->required();

  CLI::App* run = app.add_subcommand(
      "run",
      "Run the experiment matrix described by a manifest. Defaults when "
      "omitted: 30 clients, 30 rounds, full participation, 5 local epochs at "
      "lr 0.05 (batch 64), 2 distill epochs at lr 0.01 (batch 128, T=1), "
      "10000 distill samples, seeds 1-5, hidden layers 256/128, attack grid "
      "{none, 10 faulty, 10 malicious, 5+5} x {iid, alpha=0.5, alpha=0.1} x "
      "all aggregators");
  run->add_option("manifest", manifest_path, "Manifest JSON file")->required();

  CLI::App* fetch = app.add_subcommand(
      "fetch-data", "Download and checksum-verify the MNIST IDX archives");
  fetch->add_option("dir", data_dir, "Destination directory")->required();
  fetch->add_option("--base-url", base_url, "Mirror base URL");
  fetch->add_flag("--no-verify", skip_verify, "Skip checksum verification");

  CLI::App* summ = app.add_subcommand(
      "summarize", "Pretty-print summary.csv from a results directory");
  summ->add_option("dir", results_dir, "Results directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) {
      const fedsim::ExperimentManifest manifest =
          fedsim::parse_manifest(manifest_path);
      std::cout << fedsim::normalized_manifest(manifest);
      return 0;
    }
    if (run->parsed()) {
      const fedsim::ExperimentManifest manifest =
          fedsim::parse_manifest(manifest_path);
      const fedsim::ResultsTable table = fedsim::run_matrix(manifest);
      std::printf("wrote %s/summary.csv (%zu cells)\n",
                  manifest.output_dir.c_str(), table.rows.size());
      for (const fedsim::SummaryRow& row : table.rows) {
        if (row.failed) {
          std::printf("FAILED %s/%s/%s: %s\n", row.attack.c_str(),
                      row.heterogeneity.c_str(), row.aggregator.c_str(),
                      row.message.c_str());
        } else if (!row.message.empty()) {
          std::printf("note: %s/%s/%s: %s\n", row.attack.c_str(),
                      row.heterogeneity.c_str(), row.aggregator.c_str(),
                      row.message.c_str());
        }
      }
      return table.any_failed() ? 1 : 0;
    }
    if (fetch->parsed()) {
      return fetch_data(data_dir, base_url, skip_verify);
    }
    if (summ->parsed()) {
      return summarize(results_dir);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}

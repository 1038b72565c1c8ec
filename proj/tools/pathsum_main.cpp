#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "pathsum/cli.hpp"
#include "pathsum/errors.hpp"

namespace {

// --partition takes a JSON list of 1-based index lists, e.g. [[1,2,3],[4,5]].
std::vector<std::vector<int>> parsePartitionArg(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw pathsum::ConfigError(std::string("--partition is not valid JSON: ") + e.what());
  }
  if (!doc.is_array() || doc.empty()) {
    throw pathsum::ConfigError("--partition must be a non-empty list of index lists");
  }
  std::vector<std::vector<int>> blocks;
  for (const auto& blockJson : doc) {
    if (!blockJson.is_array() || blockJson.empty()) {
      throw pathsum::ConfigError("--partition blocks must be non-empty index lists");
    }
    std::vector<int> block;
    for (const auto& index : blockJson) {
      if (!index.is_number_integer()) {
        throw pathsum::ConfigError("--partition indices must be integers");
      }
      block.push_back(index.get<int>());
    }
    blocks.push_back(std::move(block));
  }
  return blocks;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "pathsum: exact Gaussian-model marginals as finite sums over simple paths and cycles"};

  pathsum::QuerySpec spec;
  std::string partitionText;
  std::vector<int> entryArgs;
  std::vector<int> diagArgs;
  bool wantFull = false;
  bool wantMean = false;

  app.add_option("--matrix", spec.matrixPath, "Model file (.mtx coordinate or JSON)")
      ->required();
  app.add_option("--partition", partitionText,
                 "Block partition as JSON index lists, 1-based (default: singletons)");
  app.add_option("--entry", entryArgs, "Covariance block query: source A, target W (repeatable)")
      ->check(CLI::PositiveNumber);
  app.add_option("--diag", diagArgs, "Diagonal covariance block for block A (repeatable)")
      ->check(CLI::PositiveNumber);
  app.add_flag("--full", wantFull, "Full covariance matrix");
  app.add_flag("--mean", wantMean, "Mean vector (requires a potential vector in the model)");
  app.add_option("--method", spec.method, "pathsum | gabp | determinant | direct")
      ->check(CLI::IsMember({"pathsum", "gabp", "determinant", "direct"}));
  app.add_flag("--verify", spec.verify, "Cross-check every result against direct inversion");
  app.add_flag("--diagnose", spec.diagnose,
               "Report walk-summability and definiteness diagnostics");
  app.add_flag("--skip-spd-check", spec.skipSpdCheck,
               "Skip the positive-definiteness pre-check");
  app.add_option("--drop-tolerance", spec.dropTolerance,
                 "Treat block entries with |value| <= X as structural zeros")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--threads", spec.threads, "Worker threads for full-covariance queries")
      ->check(CLI::PositiveNumber);
  app.add_option("--output", spec.output, "json | table")
      ->check(CLI::IsMember({"json", "table"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (!partitionText.empty()) spec.partition = parsePartitionArg(partitionText);
    if (entryArgs.size() % 2 != 0) {
      throw pathsum::ConfigError("--entry takes pairs of block indices (source, target)");
    }
    for (std::size_t i = 0; i + 1 < entryArgs.size(); i += 2) {
      spec.queries.push_back(
          {pathsum::QuerySpec::Query::Kind::Entry, entryArgs[i], entryArgs[i + 1]});
    }
    for (int alpha : diagArgs) {
      spec.queries.push_back({pathsum::QuerySpec::Query::Kind::Diag, alpha, alpha});
    }
    if (wantFull) spec.queries.push_back({pathsum::QuerySpec::Query::Kind::Full, 0, 0});
    if (wantMean) spec.queries.push_back({pathsum::QuerySpec::Query::Kind::Mean, 0, 0});
    if (spec.queries.empty() && !spec.diagnose) {
      throw pathsum::ConfigError(
          "nothing to do: give --entry/--diag/--full/--mean and/or --diagnose");
    }

    const pathsum::RunOutcome outcome = pathsum::runQueries(spec);
    if (spec.output == "table") {
      std::cout << pathsum::renderTable(outcome.document);
    } else {
      std::cout << outcome.document.dump(2) << "\n";
    }
    return outcome.exitCode;
  } catch (const pathsum::Error& e) {
    std::cerr << pathsum::errorToJson(e).dump(2) << "\n";
    return 1;
  } catch (const std::exception& e) {
    nlohmann::json fallback;
    fallback["error"] = {{"type", "internal"}, {"message", e.what()}};
    std::cerr << fallback.dump(2) << "\n";
    return 1;
  }
}

#pragma once

#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "pathsum/engine.hpp"
#include "pathsum/gabp.hpp"
#include "pathsum/log.hpp"
#include "pathsum/mmio.hpp"
#include "pathsum/model.hpp"
#include "pathsum/validation.hpp"

namespace pathsum {

// A parsed invocation: where the model comes from, how it is partitioned,
// which quantities to compute and with which method. Indices are 1-based
// block indices, as on the command line.
struct QuerySpec {
  struct Query {
    enum class Kind { Entry, Diag, Full, Mean };
    Kind kind = Kind::Full;
    int alpha = 0;
    int omega = 0;
  };

  std::string matrixPath;
  std::optional<std::vector<std::vector<int>>> partition;  // 1-based scalar indices
  std::vector<Query> queries;
  std::string method = "pathsum";  // pathsum | gabp | determinant | direct
  bool verify = false;
  bool diagnose = false;
  bool skipSpdCheck = false;
  double dropTolerance = 0.0;
  int threads = 1;
  std::string output = "json";  // json | table
};

struct RunOutcome {
  nlohmann::json document;
  int exitCode = 0;
};

inline constexpr double kVerifyTolerance = 1e-8;

namespace detail {

inline nlohmann::json matrixToJson(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline nlohmann::json vectorToJson(const Vector& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

inline Matrix extractBlock(const Matrix& sigma, const ModelGraph& graph, int rowVertex,
                           int colVertex) {
  const auto& rows = graph.blockIndices(rowVertex);
  const auto& cols = graph.blockIndices(colVertex);
  Matrix out(rows.size(), cols.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = sigma(rows[r], cols[c]);
    }
  }
  return out;
}

inline double relativeDeviation(const Matrix& got, const Matrix& want) {
  const double scale = want.norm();
  const double diff = (got - want).norm();
  return scale > 0.0 ? diff / scale : diff;
}

// Evaluates the full covariance with the spec's method. The pathsum engine
// handles any partition; gabp fills the diagonal from messages and delegates
// off-diagonals to the single-tree-path sums; determinant loops entries.
class QueryEvaluator {
 public:
  QueryEvaluator(const InformationModel& model, const ModelGraph& graph, const QuerySpec& spec)
      : model_(model), graph_(graph), spec_(spec) {}

  Matrix entryBlock(int alpha, int omega, PathSumResult* provenance) {
    if (spec_.method == "pathsum") {
      PathSumResult r = offDiagonalEntry(graph_, alpha, omega, memo_, &stats_);
      if (provenance) *provenance = r;
      return r.value;
    }
    if (spec_.method == "gabp") {
      if (alpha == omega) {
        return Matrix::Constant(1, 1, gabpTable().marginalVariance(alpha));
      }
      return offDiagonalEntry(graph_, alpha, omega, memo_, &stats_).value;
    }
    if (spec_.method == "determinant") {
      return Matrix::Constant(1, 1, determinantFormulaEntry(model_, alpha, omega));
    }
    return extractBlock(fullSigma(), graph_, omega, alpha);  // direct
  }

  const Matrix& fullSigma() {
    if (sigma_) return *sigma_;
    if (spec_.method == "pathsum") {
      sigma_ = fullCovariance(graph_, spec_.threads, &stats_, &memo_);
    } else if (spec_.method == "direct") {
      sigma_ = directInverse(model_);
    } else if (spec_.method == "determinant") {
      const int n = model_.size();
      Matrix sigma(n, n);
      for (int a = 0; a < n; ++a) {
        for (int w = 0; w < n; ++w) sigma(w, a) = determinantFormulaEntry(model_, a, w);
      }
      sigma_ = std::move(sigma);
    } else {  // gabp
      const int n = model_.size();
      Matrix sigma = Matrix::Zero(n, n);
      const MessageTable& table = gabpTable();
      for (int v = 0; v < n; ++v) sigma(v, v) = table.marginalVariance(v);
      for (int a = 0; a < n; ++a) {
        for (int w = a + 1; w < n; ++w) {
          const double value = offDiagonalEntry(graph_, a, w, memo_, &stats_).value(0, 0);
          sigma(w, a) = value;
          sigma(a, w) = value;
        }
      }
      sigma_ = std::move(sigma);
    }
    return *sigma_;
  }

  Vector mean() {
    if (!model_.hasPotential()) {
      throw ConfigError("mean requested but the model has no potential vector");
    }
    return fullSigma() * model_.potential();
  }

  const MessageTable& gabpTable() {
    if (!gabp_) gabp_ = gabpMarginals(model_);
    return *gabp_;
  }

  const EngineStats& stats() const { return stats_; }

 private:
  const InformationModel& model_;
  const ModelGraph& graph_;
  const QuerySpec& spec_;
  MemoTable memo_;
  EngineStats stats_;
  std::optional<Matrix> sigma_;
  std::optional<MessageTable> gabp_;
};

}  // namespace detail

// Executes the spec and assembles the JSON emission. Throws pathsum::Error
// subclasses on any failure; exit code 2 flags a verification deviation above
// kVerifyTolerance.
inline RunOutcome runQueries(const QuerySpec& spec) {
  if (spec.method != "pathsum" && spec.method != "gabp" && spec.method != "determinant" &&
      spec.method != "direct") {
    throw ConfigError("unknown method '" + spec.method + "'");
  }
  if (spec.output != "json" && spec.output != "table") {
    throw ConfigError("unknown output mode '" + spec.output + "'");
  }
  if (spec.threads < 1) throw ConfigError("--threads must be at least 1");
  if (spec.dropTolerance < 0.0) throw ConfigError("--drop-tolerance must be nonnegative");

  const InformationModel model = loadMatrix(spec.matrixPath);
  logMessage(LogLevel::Info,
             "loaded " + spec.matrixPath + " (n=" + std::to_string(model.size()) + ")");

  BlockPartition partition = BlockPartition::singletons(model.size());
  if (spec.partition) {
    std::vector<std::vector<int>> blocks = *spec.partition;
    for (auto& block : blocks) {
      for (int& index : block) --index;  // 1-based externally
    }
    partition = BlockPartition(std::move(blocks));
    partition.validateFor(model.size());
  }

  const bool scalarOnly = spec.method == "gabp" || spec.method == "determinant";
  if (scalarOnly && !partition.isTrivial()) {
    throw UnsupportedPartitionError("method '" + spec.method +
                                    "' supports only the singleton partition");
  }

  const ModelGraph graph = buildGraph(model, partition, spec.dropTolerance);
  const int blockCount = graph.vertexCount();

  // pathsum and gabp are specified for positive definite models; the check
  // distinguishes a singular matrix from a merely indefinite one, and
  // --skip-spd-check bypasses it (no accuracy promise there).
  if (!spec.skipSpdCheck && (spec.method == "pathsum" || spec.method == "gabp")) {
    Eigen::LLT<Matrix> llt(model.matrix());
    if (llt.info() != Eigen::Success) {
      Eigen::PartialPivLU<Matrix> lu(model.matrix());
      if (!(lu.rcond() > kSingularRcond)) {
        throw SingularityError("information matrix is singular (rcond=" +
                               std::to_string(lu.rcond()) + ")");
      }
      throw ConfigError(
          "information matrix is not positive definite; pass --skip-spd-check to evaluate "
          "anyway");
    }
  }
  if (spec.method == "gabp" && !isTree(graph)) {
    throw TopologyError("gabp requires a tree model graph; this graph has a cycle");
  }

  auto checkIndex = [&](int index) {
    if (index < 1 || index > blockCount) {
      throw DomainError("block index " + std::to_string(index) + " out of range 1.." +
                        std::to_string(blockCount));
    }
  };

  detail::QueryEvaluator evaluator(model, graph, spec);

  nlohmann::json document;
  document["matrix"] = spec.matrixPath;
  document["n"] = model.size();
  document["blockCount"] = blockCount;
  document["method"] = spec.method;
  document["threads"] = spec.threads;

  std::optional<Matrix> oracle;
  if (spec.verify) oracle = directInverse(model);
  double maxDeviation = 0.0;
  auto recordDeviation = [&](const Matrix& got, const Matrix& want) {
    maxDeviation = std::max(maxDeviation, detail::relativeDeviation(got, want));
  };

  nlohmann::json results = nlohmann::json::array();
  for (const auto& query : spec.queries) {
    logMessage(LogLevel::Debug,
               "running query kind=" + std::to_string(static_cast<int>(query.kind)) +
                   " alpha=" + std::to_string(query.alpha) +
                   " omega=" + std::to_string(query.omega));
    nlohmann::json item;
    switch (query.kind) {
      case QuerySpec::Query::Kind::Entry:
      case QuerySpec::Query::Kind::Diag: {
        const bool isDiag = query.kind == QuerySpec::Query::Kind::Diag;
        const int alpha = query.alpha;
        const int omega = isDiag ? query.alpha : query.omega;
        checkIndex(alpha);
        checkIndex(omega);
        PathSumResult provenance;
        const Matrix value =
            evaluator.entryBlock(alpha - 1, omega - 1,
                                 spec.method == "pathsum" ? &provenance : nullptr);
        item["query"] = isDiag ? "diag" : "entry";
        item["alpha"] = alpha;
        if (!isDiag) item["omega"] = omega;
        item["value"] = detail::matrixToJson(value);
        if (spec.method == "pathsum") {
          item["pathCount"] = provenance.pathCount;
          item["maxDepth"] = provenance.maxDepth;
          item["leafCount"] = provenance.leafCount;
        }
        if (oracle) recordDeviation(value, detail::extractBlock(*oracle, graph, omega - 1, alpha - 1));
        break;
      }
      case QuerySpec::Query::Kind::Full: {
        const Matrix& sigma = evaluator.fullSigma();
        item["query"] = "full";
        item["value"] = detail::matrixToJson(sigma);
        if (oracle) recordDeviation(sigma, *oracle);
        break;
      }
      case QuerySpec::Query::Kind::Mean: {
        const Vector mu = evaluator.mean();
        item["query"] = "mean";
        item["value"] = detail::vectorToJson(mu);
        if (oracle) recordDeviation(mu, *oracle * model.potential());
        break;
      }
    }
    results.push_back(std::move(item));
  }
  document["results"] = std::move(results);

  if (spec.method == "pathsum") {
    document["stats"] = {{"pathCount", evaluator.stats().pathCount},
                         {"leafCount", evaluator.stats().leafCount},
                         {"maxDepth", evaluator.stats().maxDepth}};
  }

  if (spec.diagnose) {
    const DiagnosticReport report = pathsum::diagnose(model);
    document["diagnostics"] = {{"spectralRadiusAbsR", report.spectralRadiusAbsR},
                               {"isWalkSummable", report.isWalkSummable},
                               {"isPositiveDefinite", report.isPositiveDefinite},
                               {"minEigenvalueEstimate", report.minEigenvalueEstimate},
                               {"powerIterationConverged", report.powerIterationConverged}};
  }

  RunOutcome outcome;
  if (spec.verify) {
    const bool passed = maxDeviation <= kVerifyTolerance;
    document["verification"] = {{"maxRelativeDeviation", maxDeviation},
                                {"tolerance", kVerifyTolerance},
                                {"passed", passed}};
    if (!passed) {
      logMessage(LogLevel::Error, "verification deviation " + std::to_string(maxDeviation) +
                                      " exceeds " + std::to_string(kVerifyTolerance));
      outcome.exitCode = 2;
    }
  }
  outcome.document = std::move(document);
  return outcome;
}

// Structured error object for the error stream.
inline nlohmann::json errorToJson(const Error& error) {
  nlohmann::json out;
  out["error"] = {{"type", error.kind()}, {"message", error.what()}};
  if (const auto* parse = dynamic_cast<const ParseError*>(&error)) {
    out["error"]["path"] = parse->path();
    if (parse->line() > 0) out["error"]["line"] = parse->line();
  }
  if (const auto* singular = dynamic_cast<const SingularityError*>(&error)) {
    if (singular->vertex() >= 0) out["error"]["vertex"] = singular->vertex() + 1;
    if (!singular->deletedVertices().empty()) {
      nlohmann::json deleted = nlohmann::json::array();
      for (int v : singular->deletedVertices()) deleted.push_back(v + 1);
      out["error"]["deleted"] = std::move(deleted);
    }
  }
  return out;
}

// Human-readable rendering of the emission document (6 decimal places).
inline std::string renderTable(const nlohmann::json& document) {
  std::ostringstream out;
  char buffer[64];
  auto fmt = [&](double v) {
    std::snprintf(buffer, sizeof(buffer), "%12.6f", v);
    return std::string(buffer);
  };

  out << "matrix: " << document.at("matrix").get<std::string>()
      << "  n=" << document.at("n").get<int>()
      << "  blocks=" << document.at("blockCount").get<int>()
      << "  method=" << document.at("method").get<std::string>() << "\n";

  for (const auto& item : document.at("results")) {
    const std::string kind = item.at("query").get<std::string>();
    out << kind;
    if (item.contains("alpha")) {
      out << "(" << item.at("alpha").get<int>();
      if (item.contains("omega")) out << "," << item.at("omega").get<int>();
      out << ")";
    }
    out << ":\n";
    const auto& value = item.at("value");
    if (!value.empty() && value.front().is_array()) {
      for (const auto& row : value) {
        out << " ";
        for (const auto& cell : row) out << " " << fmt(cell.get<double>());
        out << "\n";
      }
    } else {
      out << " ";
      for (const auto& cell : value) out << " " << fmt(cell.get<double>());
      out << "\n";
    }
  }

  if (document.contains("diagnostics")) {
    const auto& d = document.at("diagnostics");
    out << "diagnostics: rho(|R|)=" << d.at("spectralRadiusAbsR").get<double>()
        << "  walkSummable=" << (d.at("isWalkSummable").get<bool>() ? "yes" : "no")
        << "  positiveDefinite=" << (d.at("isPositiveDefinite").get<bool>() ? "yes" : "no")
        << "  minEigenvalue=" << d.at("minEigenvalueEstimate").get<double>() << "\n";
  }
  if (document.contains("verification")) {
    const auto& v = document.at("verification");
    out << "verification: maxRelativeDeviation=" << v.at("maxRelativeDeviation").get<double>()
        << " (tolerance " << v.at("tolerance").get<double>() << ") "
        << (v.at("passed").get<bool>() ? "passed" : "FAILED") << "\n";
  }
  return out.str();
}

}  // namespace pathsum

#include <catch2/catch_amalgamated.hpp>

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "oracles.hpp"
#include "pathsum/cli.hpp"
#include "pathsum/mmio.hpp"

using pathsum::InformationModel;
using pathsum::Matrix;
using pathsum::QuerySpec;

namespace {

// Writes `text` to a fresh file under the system temp directory.
class TempFile {
 public:
  explicit TempFile(const std::string& text, const std::string& suffix = ".mtx") {
    static int counter = 0;
    path_ = (std::filesystem::temp_directory_path() /
             ("pathsum_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++) +
              suffix))
                .string();
    std::ofstream out(path_);
    out << text;
  }
  ~TempFile() { std::remove(path_.c_str()); }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

const char* kC5Symmetric =
    "%%MatrixMarket matrix coordinate real symmetric\n"
    "5 5 10\n"
    "1 1 1.0\n2 2 1.0\n3 3 1.0\n4 4 1.0\n5 5 1.0\n"
    "2 1 0.3\n3 2 0.3\n4 3 0.3\n5 4 0.3\n5 1 0.3\n";

}  // namespace

TEST_CASE("matrix market symmetric input mirrors the stored triangle") {
  TempFile file(kC5Symmetric);
  const InformationModel model = pathsum::loadMatrix(file.path());
  CHECK(model.size() == 5);
  CHECK(model.matrix() == oracle::circleFive(0.3));
  CHECK_FALSE(model.hasPotential());
}

TEST_CASE("matrix market general input must be symmetric") {
  TempFile good(
      "%%MatrixMarket matrix coordinate real general\n"
      "2 2 4\n"
      "1 1 2.0\n1 2 0.5\n2 1 0.5\n2 2 2.0\n");
  CHECK(pathsum::loadMatrix(good.path()).matrix()(0, 1) == 0.5);

  TempFile bad(
      "%%MatrixMarket matrix coordinate real general\n"
      "2 2 4\n"
      "1 1 2.0\n1 2 0.5\n2 1 0.7\n2 2 2.0\n");
  CHECK_THROWS_AS(pathsum::loadMatrix(bad.path()), pathsum::ParseError);
}

TEST_CASE("parse failures carry a line number") {
  TempFile noBanner("garbage\n2 2 1\n1 1 1.0\n");
  CHECK_THROWS_AS(pathsum::loadMatrix(noBanner.path()), pathsum::ParseError);

  TempFile badEntry(
      "%%MatrixMarket matrix coordinate real symmetric\n"
      "2 2 2\n"
      "1 1 1.0\n"
      "2 oops 1.0\n");
  try {
    pathsum::loadMatrix(badEntry.path());
    FAIL("expected a parse error");
  } catch (const pathsum::ParseError& e) {
    CHECK(e.line() == 4);
    CHECK(e.path() == badEntry.path());
  }

  TempFile outOfRange(
      "%%MatrixMarket matrix coordinate real symmetric\n"
      "2 2 2\n"
      "1 1 1.0\n"
      "3 1 1.0\n");
  CHECK_THROWS_AS(pathsum::loadMatrix(outOfRange.path()), pathsum::ParseError);
}

TEST_CASE("json model input with potential vector") {
  TempFile file(
      "{\"n\": 3, \"triplets\": [[1,1,2.0],[2,2,2.0],[3,3,2.0],[1,2,-0.5]],"
      " \"h\": [1.0, 0.0, -1.0]}",
      ".json");
  const InformationModel model = pathsum::loadMatrix(file.path());
  CHECK(model.size() == 3);
  CHECK(model.matrix()(0, 1) == -0.5);
  CHECK(model.matrix()(1, 0) == -0.5);
  REQUIRE(model.hasPotential());
  CHECK(model.potential()(2) == -1.0);

  TempFile badJson("{\"n\": 3, \"triplets\": [[1,1,", ".json");
  CHECK_THROWS_AS(pathsum::loadMatrix(badJson.path()), pathsum::ParseError);
}

TEST_CASE("an all-zero diagonal is rejected at load time") {
  TempFile empty("{\"n\": 3, \"triplets\": []}", ".json");
  CHECK_THROWS_AS(pathsum::loadMatrix(empty.path()), pathsum::SingularityError);
}

TEST_CASE("matrix market round-trip reproduces query results bit for bit") {
  std::mt19937 rng(3);
  const Matrix j = oracle::randomSpdMatrix(rng, 6, 0.7);
  TempFile original("");
  pathsum::writeMatrixMarket(InformationModel(j), original.path());

  const InformationModel loaded = pathsum::loadMatrix(original.path());
  TempFile rewritten("");
  pathsum::writeMatrixMarket(loaded, rewritten.path());
  const InformationModel reloaded = pathsum::loadMatrix(rewritten.path());
  CHECK(loaded.matrix() == reloaded.matrix());

  QuerySpec spec;
  spec.matrixPath = original.path();
  spec.queries.push_back({QuerySpec::Query::Kind::Full, 0, 0});
  const auto first = pathsum::runQueries(spec);
  spec.matrixPath = rewritten.path();
  const auto second = pathsum::runQueries(spec);
  CHECK(first.document.at("results") == second.document.at("results"));
}

TEST_CASE("runQueries emits values, diagnostics, and verification") {
  QuerySpec spec;
  TempFile file(kC5Symmetric);
  spec.matrixPath = file.path();
  spec.queries.push_back({QuerySpec::Query::Kind::Entry, 1, 2});
  spec.queries.push_back({QuerySpec::Query::Kind::Diag, 1, 1});
  spec.queries.push_back({QuerySpec::Query::Kind::Full, 0, 0});
  spec.diagnose = true;
  spec.verify = true;

  const auto outcome = pathsum::runQueries(spec);
  CHECK(outcome.exitCode == 0);
  const auto& doc = outcome.document;
  CHECK(doc.at("n") == 5);
  CHECK(doc.at("blockCount") == 5);

  const auto& results = doc.at("results");
  REQUIRE(results.size() == 3);
  CHECK_THAT(results[0].at("value")[0][0].get<double>(),
             Catch::Matchers::WithinAbs(-0.39959, 5e-6));
  CHECK(results[0].at("pathCount") == 2);
  CHECK_THAT(results[1].at("value")[0][0].get<double>(),
             Catch::Matchers::WithinAbs(1.23975, 5e-6));

  CHECK(doc.at("diagnostics").at("isWalkSummable") == true);
  CHECK(doc.at("verification").at("passed") == true);
  CHECK(doc.at("verification").at("maxRelativeDeviation").get<double>() <= 1e-10);

  const std::string table = pathsum::renderTable(doc);
  CHECK(table.find("entry(1,2)") != std::string::npos);
  CHECK(table.find("walkSummable=yes") != std::string::npos);
}

TEST_CASE("runQueries supports block partitions and means") {
  TempFile file(
      "{\"n\": 9, \"triplets\": ["
      "[1,1,6],[2,2,6],[3,3,6],[4,4,6],[5,5,6],[6,6,6],[7,7,6],[8,8,6],[9,9,6],"
      "[1,2,-1],[1,4,-1],[1,5,-1],[1,7,-1],[1,8,-1],"
      "[2,3,-1],[2,4,-1],[2,6,-1],[2,7,-1],[2,9,-1],"
      "[3,5,-1],[3,6,-1],[3,8,-1],[3,9,-1],"
      "[4,5,-1],[4,7,-1],[4,8,-1],"
      "[5,6,-1],[5,7,-1],[5,9,-1],"
      "[6,8,-1],[6,9,-1],[7,8,-1],[8,9,-1]],"
      " \"h\": [1,0,0,0,0,0,0,0,1]}",
      ".json");

  QuerySpec spec;
  spec.matrixPath = file.path();
  spec.partition = {{1, 2, 3}, {4, 5, 6}, {7, 8, 9}};
  spec.queries.push_back({QuerySpec::Query::Kind::Entry, 1, 2});
  spec.queries.push_back({QuerySpec::Query::Kind::Mean, 0, 0});
  spec.verify = true;

  const auto outcome = pathsum::runQueries(spec);
  CHECK(outcome.exitCode == 0);
  CHECK(outcome.document.at("blockCount") == 3);
  const auto& entry = outcome.document.at("results")[0];
  REQUIRE(entry.at("value").size() == 3);  // 3x3 block
  CHECK(outcome.document.at("verification").at("passed") == true);
}

TEST_CASE("runQueries rejects bad specs with typed errors") {
  TempFile file(kC5Symmetric);

  QuerySpec gabpLoopy;
  gabpLoopy.matrixPath = file.path();
  gabpLoopy.method = "gabp";
  gabpLoopy.queries.push_back({QuerySpec::Query::Kind::Diag, 1, 1});
  CHECK_THROWS_AS(pathsum::runQueries(gabpLoopy), pathsum::TopologyError);

  QuerySpec coarseDeterminant;
  coarseDeterminant.matrixPath = file.path();
  coarseDeterminant.method = "determinant";
  coarseDeterminant.partition = {{1, 2}, {3, 4, 5}};
  coarseDeterminant.queries.push_back({QuerySpec::Query::Kind::Full, 0, 0});
  CHECK_THROWS_AS(pathsum::runQueries(coarseDeterminant),
                  pathsum::UnsupportedPartitionError);

  QuerySpec meanWithoutPotential;
  meanWithoutPotential.matrixPath = file.path();
  meanWithoutPotential.queries.push_back({QuerySpec::Query::Kind::Mean, 0, 0});
  CHECK_THROWS_AS(pathsum::runQueries(meanWithoutPotential), pathsum::ConfigError);

  QuerySpec badIndex;
  badIndex.matrixPath = file.path();
  badIndex.queries.push_back({QuerySpec::Query::Kind::Entry, 1, 9});
  CHECK_THROWS_AS(pathsum::runQueries(badIndex), pathsum::DomainError);

  QuerySpec badMethod;
  badMethod.matrixPath = file.path();
  badMethod.method = "unknown";
  CHECK_THROWS_AS(pathsum::runQueries(badMethod), pathsum::ConfigError);
}

TEST_CASE("singular and indefinite inputs are distinguished") {
  TempFile singular(
      "{\"n\": 3, \"triplets\": [[1,1,1],[2,2,1],[3,3,1],[1,2,1]]}", ".json");
  // (1,2) block is [[1,1],[1,1]]: exactly rank-deficient.
  QuerySpec spec;
  spec.matrixPath = singular.path();
  spec.queries.push_back({QuerySpec::Query::Kind::Full, 0, 0});
  CHECK_THROWS_AS(pathsum::runQueries(spec), pathsum::SingularityError);

  spec.skipSpdCheck = true;
  CHECK_THROWS_AS(pathsum::runQueries(spec), pathsum::SingularityError);

  TempFile indefinite(
      "{\"n\": 2, \"triplets\": [[1,1,1],[2,2,1],[1,2,2]]}", ".json");
  QuerySpec indefiniteSpec;
  indefiniteSpec.matrixPath = indefinite.path();
  indefiniteSpec.queries.push_back({QuerySpec::Query::Kind::Full, 0, 0});
  CHECK_THROWS_AS(pathsum::runQueries(indefiniteSpec), pathsum::ConfigError);

  // The engine itself handles the indefinite-but-nonsingular case when asked.
  indefiniteSpec.skipSpdCheck = true;
  indefiniteSpec.verify = true;
  const auto outcome = pathsum::runQueries(indefiniteSpec);
  CHECK(outcome.exitCode == 0);
}

TEST_CASE("verification deviation drives exit code 2") {
  // A drop tolerance above the edge weight makes the engine evaluate a
  // different (diagonal) model; verification against the true matrix must
  // flag the discrepancy instead of passing it through.
  TempFile file(kC5Symmetric);
  QuerySpec spec;
  spec.matrixPath = file.path();
  spec.queries.push_back({QuerySpec::Query::Kind::Full, 0, 0});
  spec.dropTolerance = 0.5;
  spec.verify = true;

  const auto outcome = pathsum::runQueries(spec);
  CHECK(outcome.exitCode == 2);
  CHECK(outcome.document.at("verification").at("passed") == false);
  CHECK(outcome.document.at("verification").at("maxRelativeDeviation").get<double>() > 1e-8);
}

TEST_CASE("threads do not change the emitted document") {
  std::mt19937 rng(12);
  const Matrix j = oracle::randomSpdMatrix(rng, 8, 0.6);
  TempFile file("");
  pathsum::writeMatrixMarket(InformationModel(j), file.path());

  QuerySpec spec;
  spec.matrixPath = file.path();
  spec.queries.push_back({QuerySpec::Query::Kind::Full, 0, 0});
  const auto serial = pathsum::runQueries(spec);
  spec.threads = 3;
  const auto parallel = pathsum::runQueries(spec);
  CHECK(serial.document.at("results") == parallel.document.at("results"));
}

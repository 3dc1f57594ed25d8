#include <doctest.h>

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "../support/temp_dir.hpp"
#include "../support/xml_check.hpp"
#include "cli.hpp"
#include "uqeval/aggregate.hpp"
#include "uqeval/calibration.hpp"
#include "uqeval/text.hpp"
#include "uqeval/ucm.hpp"

using namespace uqeval;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void put(const std::filesystem::path& p, const std::string& s) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << s;
}

// Two samples whose summaries are certain-and-correct.
void write_perfect(const TempDir& d) {
  put(d.path() / "s.csv",
      "sample_id,predicted_class,confidence,entropy,normalized_entropy,p_0,p_1\n"
      "a,0,1,0,0,1,0\n"
      "b,1,1,0,0,0,1\n");
  put(d.path() / "l.csv", "sample_id,label\na,0\nb,1\n");
}

}  // namespace

TEST_CASE("help and usage errors") {
  CHECK(run({"--help"}).code == cli::kExitOk);
  CHECK(run({}).code == cli::kExitUsage);
  CHECK(run({"frobnicate"}).code == cli::kExitUsage);
  CHECK(run({"aggregate", "--in", "x.csv", "--scheme", "bayes"}).code == cli::kExitUsage);
  CHECK(run({"--format", "xml", "demo"}).code == cli::kExitUsage);
}

TEST_CASE("aggregate two-pass example") {
  TempDir d("cli-agg");
  put(d.path() / "p.csv", "sample_id,pass_id,p_0,p_1\ns0,0,0.6,0.4\ns0,1,0.8,0.2\n");
  const auto r = run({"--out", d.path().string(), "aggregate", "--in", d.file("p.csv"), "--scheme", "mcd"});
  REQUIRE(r.code == 0);
  const auto s = load_summaries(d.file("summaries.csv"));
  REQUIRE(s.size() == 1);
  CHECK(s[0].mean[0] == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(s[0].mean[1] == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(std::filesystem::exists(d.path() / "aggregate.manifest.json"));
}

TEST_CASE("aggregate emcd matches the library") {
  TempDir d("cli-emcd");
  std::string csv = "sample_id,pass_id,p_0,p_1,p_2\n";
  const double rows[6][3] = {{0.1, 0.2, 0.7}, {0.3, 0.3, 0.4}, {0.5, 0.25, 0.25},
                             {0.9, 0.05, 0.05}, {0.2, 0.6, 0.2}, {0.4, 0.4, 0.2}};
  for (const char* id : {"a", "b"})
    for (int p = 0; p < 6; ++p)
      csv += std::string(id) + "," + std::to_string(p) + "," + text::format_double(rows[p][0], 9) +
             "," + text::format_double(rows[p][1], 9) + "," + text::format_double(rows[p][2], 9) + "\n";
  put(d.path() / "p.csv", csv);
  const auto r = run({"--out", d.path().string(), "aggregate", "--in", d.file("p.csv"), "--scheme",
                      "emcd", "--partition", "2x3"});
  REQUIRE(r.code == 0);
  const auto lib = aggregate(load_predictions(d.file("p.csv"), PredictionFormat::Csv),
                             AggregationScheme::emcd({3, 3}));
  CHECK(load_summaries(d.file("summaries.csv")) == lib);
  // Partition that does not cover the pass axis is a validation failure.
  CHECK(run({"--out", d.path().string(), "aggregate", "--in", d.file("p.csv"), "--scheme", "emcd",
             "--partition", "2x2"}).code == cli::kExitFailure);
}

TEST_CASE("aggregate reports parse errors with exit 1") {
  TempDir d("cli-bad");
  put(d.path() / "p.csv", "sample_id,pass_id,p_0,p_1\ns0,0,0.6,0.3\n");
  const auto r = run({"--out", d.path().string(), "aggregate", "--in", d.file("p.csv"), "--scheme", "mcd"});
  CHECK(r.code == cli::kExitFailure);
  CHECK(r.err.find("p.csv:2") != std::string::npos);
  CHECK(run({"--out", d.path().string(), "--renormalize", "aggregate", "--in", d.file("p.csv"),
             "--scheme", "mcd"}).code == cli::kExitFailure);
}

TEST_CASE("evaluate perfect predictions") {
  TempDir d("cli-eval");
  write_perfect(d);
  const auto text = run({"--out", d.path().string(), "evaluate", "--summaries", d.file("s.csv"),
                         "--labels", d.file("l.csv")});
  REQUIRE(text.code == 0);
  CHECK(text.out.find("100.0%") != std::string::npos);
  CHECK(text.out.find("USen  n/a") != std::string::npos);
  const auto js = run({"--out", d.path().string(), "--format", "json", "evaluate", "--summaries",
                       d.file("s.csv"), "--labels", d.file("l.csv")});
  const auto j = json::parse(js.out);
  CHECK(j["uacc"] == 1.0);
  CHECK(j["usen"].is_null());
  CHECK(j["manifest"]["file"] == "evaluate.manifest.json");
  const auto manifest = json::parse(slurp(d.path() / "evaluate.manifest.json"));
  CHECK(manifest["digest"] == j["manifest"]["digest"]);
  CHECK(manifest["inputs"].size() == 2);
  CHECK(manifest.contains("timestamp"));
  CHECK(run({"--out", d.path().string(), "evaluate", "--summaries", d.file("s.csv"), "--labels",
             d.file("l.csv"), "--threshold", "1.5"}).code == cli::kExitFailure);
  CHECK(run({"--out", d.path().string(), "evaluate", "--summaries", d.file("missing.csv"),
             "--labels", d.file("l.csv")}).code == cli::kExitFailure);
}

TEST_CASE("sweep grids and svg") {
  TempDir d("cli-sweep");
  write_perfect(d);
  REQUIRE(run({"--out", d.path().string(), "sweep", "--summaries", d.file("s.csv"), "--labels",
               d.file("l.csv")}).code == 0);
  CHECK(xmlcheck::count(slurp(d.path() / "sweep.csv"), "\n") == 10);
  const auto svg = slurp(d.path() / "sweep.svg");
  CHECK(xmlcheck::check(svg).ok);
  const auto manifest = json::parse(slurp(d.path() / "sweep.manifest.json"));
  CHECK(svg.find(manifest["digest"].get<std::string>()) != std::string::npos);
  REQUIRE(run({"--out", d.path().string(), "sweep", "--summaries", d.file("s.csv"), "--labels",
               d.file("l.csv"), "--grid", "0:0.01:1"}).code == 0);
  CHECK(xmlcheck::count(slurp(d.path() / "sweep.csv"), "\n") == 102);
  CHECK(run({"--out", d.path().string(), "sweep", "--summaries", d.file("s.csv"), "--labels",
             d.file("l.csv"), "--grid", "0.5:0.1:2"}).code == cli::kExitFailure);
}

TEST_CASE("ece worked case and library equivalence") {
  TempDir d("cli-ece");
  std::string s = "sample_id,predicted_class,confidence,entropy,normalized_entropy,p_0,p_1\n";
  std::string l = "sample_id,label\n";
  for (int i = 0; i < 10; ++i) {
    s += "s" + std::to_string(i) + ",0,0.8,0.72192809488736231,0.72192809488736231,0.8,0.2\n";
    l += "s" + std::to_string(i) + "," + (i % 2 ? "1" : "0") + "\n";
  }
  put(d.path() / "s.csv", s);
  put(d.path() / "l.csv", l);
  const auto r = run({"--out", d.path().string(), "--format", "json", "ece", "--summaries",
                      d.file("s.csv"), "--labels", d.file("l.csv"), "--bins", "1"});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["ece"].get<double>() == 0.8 - 0.5);
  CHECK(j["M"] == 1);
  REQUIRE(run({"--out", d.path().string(), "--format", "json", "ece", "--summaries",
               d.file("s.csv"), "--labels", d.file("l.csv")}).code == 0);
  const auto lib = calibration_report(load_summaries(d.file("s.csv")), load_labels(d.file("l.csv")), 10);
  const auto file = json::parse(slurp(d.path() / "ece.json"));
  CHECK(file["ece"].get<double>() == lib.ece);
  CHECK(parse_reliability_csv(slurp(d.path() / "reliability.csv")) == reliability_diagram_data(lib));
  // Only the occupied bin is drawn.
  const auto svg = slurp(d.path() / "reliability.svg");
  CHECK(xmlcheck::check(svg).ok);
  CHECK(xmlcheck::count(svg, "class=\"gap\"") == 1);
}

TEST_CASE("separate") {
  TempDir d("cli-sep");
  put(d.path() / "s.csv",
      "sample_id,predicted_class,confidence,entropy,normalized_entropy,p_0,p_1\n"
      "a,0,0.9,0.1,0.1,0.9,0.1\nb,0,0.9,0.3,0.3,0.9,0.1\nc,0,0.9,0.5,0.5,0.9,0.1\nd,0,0.9,0.7,0.7,0.9,0.1\n");
  put(d.path() / "l.csv", "sample_id,label\na,0\nb,0\nc,1\nd,1\n");
  const auto r = run({"--out", d.path().string(), "--format", "json", "separate", "--summaries",
                      d.file("s.csv"), "--labels", d.file("l.csv")});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["mean_difference"].get<double>() == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(xmlcheck::check(slurp(d.path() / "separation.svg")).ok);
}

TEST_CASE("compare run directories") {
  TempDir d("cli-cmp");
  auto make_runs = [&](const std::string& name, int n, double shift) {
    for (int r = 0; r < n; ++r) {
      const auto dir = d.path() / name / ("run_" + std::to_string(r + 1));
      std::string s = "sample_id,predicted_class,confidence,entropy,normalized_entropy,p_0,p_1\n";
      std::string l = "sample_id,label\n";
      for (int i = 0; i < 8; ++i) {
        const double p1 = std::min(0.99, 0.1 * i + shift * r);
        const int cls = p1 > 0.5 ? 1 : 0;
        s += "x" + std::to_string(i) + "," + std::to_string(cls) + ",0.7,0.5,0.5," +
             text::format_double(1 - p1, 17) + "," + text::format_double(p1, 17) + "\n";
        l += "x" + std::to_string(i) + "," + std::to_string(i % 2) + "\n";
      }
      put(dir / "summaries.csv", s);
      put(dir / "labels.csv", l);
    }
  };
  make_runs("a", 4, 0.01);
  make_runs("b", 3, 0.02);
  const auto out = d.path() / "out";
  const auto same = run({"--out", out.string(), "--format", "json", "compare", "--a",
                         (d.path() / "a").string(), "--b", (d.path() / "a").string()});
  REQUIRE(same.code == 0);
  const auto j = json::parse(same.out);
  for (const auto& c : j["comparisons"]) CHECK(c["p"] == 1.0);
  CHECK(xmlcheck::check(slurp(out / "violin.svg")).ok);
  CHECK(std::filesystem::exists(out / "distributions.csv"));
  const auto mismatch = run({"--out", out.string(), "compare", "--a", (d.path() / "a").string(),
                             "--b", (d.path() / "b").string()});
  CHECK(mismatch.code == cli::kExitFailure);
  CHECK(mismatch.err.find("pair") != std::string::npos);
}

TEST_CASE("quick demo writes every declared artifact") {
  TempDir d("cli-demo");
  const auto r = run({"--out", d.path().string(), "demo", "--quick"});
  REQUIRE(r.code == 0);
  for (const auto& name : cli::demo_artifacts())
    CHECK_MESSAGE(std::filesystem::exists(d.path() / name), name);
  const auto manifest = json::parse(slurp(d.path() / "manifest.json"));
  const auto digest = manifest["digest"].get<std::string>();
  for (const char* f : {"ucm.json", "sweep.json", "ece.json", "separation.json", "comparison.json"})
    CHECK(json::parse(slurp(d.path() / f))["manifest"]["digest"] == digest);
  for (const auto& entry : std::filesystem::recursive_directory_iterator(d.path())) {
    if (entry.path().extension() != ".svg") continue;
    const auto svg = slurp(entry.path());
    const auto check = xmlcheck::check(svg);
    CHECK_MESSAGE(check.ok, (entry.path().string() + ": " + check.error));
    CHECK(svg.find(digest) != std::string::npos);
  }
  for (const auto& out : manifest["outputs"])
    CHECK_MESSAGE(std::filesystem::exists(d.path() / out.get<std::string>()), out);
  // The exported run directories feed straight back into compare.
  const auto again = run({"--out", (d.path() / "recheck").string(), "--format", "json", "compare",
                          "--a", (d.path() / "runs" / "a").string(), "--b",
                          (d.path() / "runs" / "b").string()});
  REQUIRE(again.code == 0);
  // Run order may differ (directories are read in seed order), so sums can
  // differ in the last bits.
  const auto want = json::parse(slurp(d.path() / "comparison.json"))["comparisons"];
  const auto got = json::parse(again.out)["comparisons"];
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    CHECK(got[i]["metric"] == want[i]["metric"]);
    for (const char* key : {"mean_a", "mean_b", "t", "p"})
      CHECK(got[i][key].get<double>() ==
            doctest::Approx(want[i][key].get<double>()).epsilon(1e-12));
  }
}

TEST_CASE("train-demo output feeds aggregate") {
  TempDir d("cli-train");
  REQUIRE(run({"--out", d.path().string(), "train-demo", "--scheme", "emcd", "--quick", "--members",
               "3", "--passes", "2"}).code == 0);
  const auto t = load_predictions(d.file("predictions.csv"), PredictionFormat::Csv);
  CHECK(t.n_passes() == 6);
  const auto out = d.path() / "agg";
  REQUIRE(run({"--out", out.string(), "aggregate", "--in", d.file("predictions.csv"), "--scheme",
               "emcd", "--partition", "3x2"}).code == 0);
  REQUIRE(run({"--out", out.string(), "evaluate", "--summaries", (out / "summaries.csv").string(),
               "--labels", d.file("labels.csv")}).code == 0);
  CHECK(std::filesystem::exists(d.path() / "models" / "member_02.json"));
}

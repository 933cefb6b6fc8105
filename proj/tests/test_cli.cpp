// End-to-end exercises of the command-line tool: synth -> stats -> train ->
// eval -> diagnose -> export, plus exit-status contracts.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "test_util.hpp"

namespace fs = std::filesystem;

namespace {

int run(const std::string& cmd) {
  const int status = std::system((cmd + " > /dev/null 2>&1").c_str());
  return WEXITSTATUS(status);
}

const std::string bin = CLEKI_BIN;

struct Workspace {
  fs::path dir;
  std::string data;

  explicit Workspace(const std::string& name) {
    dir = testutil::temp_dir(name);
    data = (dir / "data").string();
    REQUIRE(run(bin + " synth --out " + data +
                " --students 24 --exercises 16 --concepts 6 --logs-per-student 14 --seed 5") == 0);
  }

  std::string data_flags() const {
    return " --logs " + data + "/logs.csv --q " + data + "/q.csv --graph " + data +
           "/graph.csv";
  }
};

std::string fast_config() {
  return " --epochs 2 --top-p 3 --seed 5";
}

}  // namespace

TEST_CASE("synth then stats succeed and write manifests") {
  Workspace ws("cli_stats");
  CHECK(fs::exists(ws.dir / "data/manifest.json"));
  CHECK(fs::exists(ws.dir / "data/logs.csv"));

  const auto out = (ws.dir / "stats_out").string();
  CHECK(run(bin + " stats --logs " + ws.data + "/logs.csv --q " + ws.data +
            "/q.csv --out " + out) == 0);
  CHECK(fs::exists(out + "/stats.txt"));
  CHECK(fs::exists(out + "/manifest.json"));
}

TEST_CASE("usage errors exit with status 1") {
  CHECK(run(bin + " stats --logs missing.csv") == 1);  // --q missing
  CHECK(run(bin + " definitely-not-a-command") == 1);
  CHECK(run(bin + " train --logs a --q b") == 1);  // graph and out missing
  CHECK(run(bin + " --help") == 0);
}

TEST_CASE("data errors exit with status 2") {
  Workspace ws("cli_data_err");
  const auto out = (ws.dir / "out").string();
  CHECK(run(bin + " stats --logs " + ws.data + "/nope.csv --q " + ws.data + "/q.csv") == 2);
  // top_p too large for K = 6
  CHECK(run(bin + " train" + ws.data_flags() + " --out " + out +
            " --epochs 1 --top-p 40") == 2);
}

TEST_CASE("train, eval, diagnose, export and gradcheck round trip") {
  Workspace ws("cli_train");
  const auto run_dir = (ws.dir / "run").string();
  REQUIRE(run(bin + " train" + ws.data_flags() + " --out " + run_dir + fast_config() +
              " --export-latent") == 0);
  CHECK(fs::exists(run_dir + "/checkpoint.ckpt"));
  CHECK(fs::exists(run_dir + "/history.csv"));
  CHECK(fs::exists(run_dir + "/test_logs.csv"));
  CHECK(fs::exists(run_dir + "/metrics.csv"));
  CHECK(fs::exists(run_dir + "/s_tilde.csv"));
  CHECK(fs::exists(run_dir + "/q_tilde.csv"));
  CHECK(fs::exists(run_dir + "/manifest.json"));

  const auto eval_dir = (ws.dir / "eval").string();
  REQUIRE(run(bin + " eval --checkpoint " + run_dir + "/checkpoint.ckpt --logs " + run_dir +
              "/test_logs.csv --q " + ws.data + "/q.csv --graph " + ws.data +
              "/graph.csv --out " + eval_dir) == 0);
  CHECK(fs::exists(eval_dir + "/metrics.csv"));
  CHECK(fs::exists(eval_dir + "/predictions.csv"));

  const auto diag_dir = (ws.dir / "diag").string();
  REQUIRE(run(bin + " diagnose --checkpoint " + run_dir + "/checkpoint.ckpt" +
              ws.data_flags() + " --student 0 --out " + diag_dir) == 0);
  CHECK(fs::exists(diag_dir + "/report.txt"));
  CHECK(fs::exists(diag_dir + "/report.json"));
  // unknown student is a data error
  CHECK(run(bin + " diagnose --checkpoint " + run_dir + "/checkpoint.ckpt" +
            ws.data_flags() + " --student 12345 --out " + diag_dir) == 2);

  const auto emb_dir = (ws.dir / "emb").string();
  REQUIRE(run(bin + " export-embeddings --checkpoint " + run_dir + "/checkpoint.ckpt" +
              " --logs " + ws.data + "/logs.csv --out " + emb_dir) == 0);
  CHECK(fs::exists(emb_dir + "/student_embeddings.csv"));
  CHECK(fs::exists(emb_dir + "/exercise_embeddings.csv"));

  // corrupt checkpoint is a runtime failure
  testutil::write_file(ws.dir / "bad.ckpt", "garbage");
  CHECK(run(bin + " eval --checkpoint " + (ws.dir / "bad.ckpt").string() + " --logs " +
            run_dir + "/test_logs.csv --q " + ws.data + "/q.csv --graph " + ws.data +
            "/graph.csv --out " + eval_dir) == 3);
}

TEST_CASE("re-running train from the same inputs reproduces outputs byte for byte") {
  Workspace ws("cli_repro");
  const auto a = (ws.dir / "a").string();
  const auto b = (ws.dir / "b").string();
  REQUIRE(run(bin + " train" + ws.data_flags() + " --out " + a + fast_config()) == 0);
  REQUIRE(run(bin + " train" + ws.data_flags() + " --out " + b + fast_config()) == 0);
  for (const char* name : {"/checkpoint.ckpt", "/history.csv", "/metrics.csv",
                           "/test_logs.csv"})
    CHECK(testutil::read_file(a + name) == testutil::read_file(b + name));

  // manifests carry identical output hashes (paths differ by out dir)
  auto hashes = [](const std::string& text) {
    std::vector<std::string> out;
    size_t pos = 0;
    while ((pos = text.find("fnv1a64:", pos)) != std::string::npos) {
      const size_t end = text.find('"', pos);
      out.push_back(text.substr(pos, end - pos));
      pos = end;
    }
    std::sort(out.begin(), out.end());
    return out;
  };
  CHECK(hashes(testutil::read_file(a + "/manifest.json")) ==
        hashes(testutil::read_file(b + "/manifest.json")));
}

TEST_CASE("ablate, sweep and coverage emit their tables") {
  Workspace ws("cli_sweeps");
  const auto out = (ws.dir / "out").string();
  REQUIRE(run(bin + " ablate" + ws.data_flags() + " --variant no_cdlk --out " + out +
              fast_config()) == 0);
  CHECK(fs::exists(out + "/ablation.csv"));

  REQUIRE(run(bin + " sweep" + ws.data_flags() + " --knob epsilon --values 0,1 --out " + out +
              fast_config()) == 0);
  CHECK(fs::exists(out + "/sweep_epsilon.csv"));

  REQUIRE(run(bin + " coverage" + ws.data_flags() + " --fractions 1.0,0.5 --model irt --out " +
              out + fast_config()) == 0);
  CHECK(fs::exists(out + "/coverage_irt.csv"));
}

TEST_CASE("gradcheck prints a verdict and exits cleanly") {
  CHECK(run(bin + " gradcheck --seed 7") == 0);
}

TEST_CASE("resume continues from a checkpoint") {
  Workspace ws("cli_resume");
  const auto first = (ws.dir / "first").string();
  REQUIRE(run(bin + " train" + ws.data_flags() + " --out " + first + " --epochs 1 --top-p 3" +
              " --seed 5") == 0);
  const auto second = (ws.dir / "second").string();
  REQUIRE(run(bin + " train" + ws.data_flags() + " --out " + second +
              " --resume " + first + "/checkpoint.ckpt --epochs 2 --top-p 3 --seed 5") == 0);
  CHECK(fs::exists(second + "/checkpoint.ckpt"));
}

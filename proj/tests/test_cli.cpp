#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "vexrec/commands.hpp"
#include "vexrec/recommend.hpp"
#include "vexrec/run_config.hpp"

using namespace vexrec;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

RunConfig parse(const std::string& text) {
  std::istringstream in(text);
  return RunConfig::parse(in, "/base");
}

SynthConfig tiny_synth() {
  SynthConfig sc;
  sc.users = 10;
  sc.items = 16;
  sc.vocab = 8;
  sc.review_length = 4;
  return sc;
}

RunConfig tiny_run(const fs::path& dir) {
  RunConfig c = RunConfig::load(dir / "run.cfg");
  c.set("epochs", "2");
  c.set("embed", "4");
  c.set("hidden", "4");
  c.set("word_dim", "3");
  return c;
}

}  // namespace

TEST_CASE("run config parses keys, comments and relative paths") {
  const RunConfig c = parse(
      "# a comment\n"
      "variant = vecf\n"
      "\n"
      "learning_rate = 0.05\n"
      "epochs=7\n"
      "interactions = data/x.tsv\n"
      "f1_mode = average-of-f1\n");
  CHECK(c.train.variant == Variant::Vecf);
  CHECK(c.train.learning_rate == 0.05);
  CHECK(c.train.epochs == 7);
  CHECK(c.interactions == fs::path("/base/data/x.tsv"));
  CHECK(c.f1_mode == F1Mode::AverageOfF1);
  CHECK(c.checkpoint_path() == fs::path("model.vxcp"));
}

TEST_CASE("run config rejects unknown, repeated and malformed entries") {
  CHECK_THROWS_WITH_AS(parse("epochs = 3\nbogus = 1\n"), doctest::Contains("line 2"), ConfigError);
  CHECK_THROWS_AS(parse("epochs = 3\nepochs = 4\n"), ConfigError);
  CHECK_THROWS_AS(parse("epochs 3\n"), ConfigError);
  CHECK_THROWS_AS(parse("epochs = three\n"), ConfigError);
  CHECK_THROWS_AS(parse("variant = bert\n"), ConfigError);
  CHECK_THROWS_AS(parse("init = gaussian\n"), ConfigError);
}

TEST_CASE("run config writes what it parses") {
  RunConfig c = parse("delta = 0.35\nseed = 9\noutput_dir = out\n");
  std::ostringstream out;
  c.write(out);
  std::istringstream in(out.str());
  const RunConfig back = RunConfig::parse(in);
  CHECK(back.train.delta == 0.35);
  CHECK(back.train.seed == 9);
  CHECK(back.output_dir == c.output_dir);
  CHECK(run_config_keys().size() == 24);
}

TEST_CASE("synth, train, recommend, explain, review and evaluate end to end") {
  TempDir tmp("vexrec_cli_flow");
  std::ostringstream out, err;
  REQUIRE(cmd_synth(tiny_synth(), tmp.path, out, err) == kExitOk);
  for (const char* f : {"interactions.tsv", "reviews.tsv", "features.vxrf", "labels.tsv", "run.cfg"}) {
    CHECK(fs::exists(tmp.path / f));
  }

  const RunConfig cfg = tiny_run(tmp.path);
  REQUIRE(cmd_train(cfg, out, err) == kExitOk);
  CHECK(fs::exists(cfg.checkpoint_path()));
  CHECK(fs::exists(cfg.output_dir / "train_report.csv"));

  std::ostringstream recs;
  CHECK(cmd_recommend(cfg, {"u0", "nobody"}, 3, recs, err) == kExitOk);
  std::istringstream lines(recs.str());
  std::string line;
  int rows = 0;
  while (std::getline(lines, line)) {
    CHECK(line.rfind("u0\t", 0) == 0);
    ++rows;
  }
  CHECK(rows == 3);
  CHECK(err.str().find("nobody") != std::string::npos);
  CHECK(cmd_recommend(cfg, {"nobody"}, 3, recs, err) == kExitConfig);

  const fs::path prefix = tmp.path / "heat";
  CHECK(cmd_explain(cfg, "u0", "i0", prefix, 5, out, err) == kExitOk);
  CHECK(fs::exists(tmp.path / "heat.json"));
  CHECK(fs::exists(tmp.path / "heat.pgm"));
  CHECK(cmd_explain(cfg, "u0", "nothing", prefix, 5, out, err) == kExitConfig);

  std::ostringstream review;
  CHECK(cmd_generate_review(cfg, "u0", "i0", 6, review, err) == kExitOk);

  const fs::path report = tmp.path / "metrics.json";
  CHECK(cmd_evaluate(cfg, report, out, err) == kExitOk);
  std::ifstream in(report);
  const std::string json((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  for (const char* key : {"f1@5", "hr@5", "ndcg@5", "rouge1_f1", "rouge2_f1", "region_f1@5"}) {
    CHECK(json.find(key) != std::string::npos);
  }
}

TEST_CASE("commands map user errors to the configuration exit code") {
  TempDir tmp("vexrec_cli_errors");
  std::ostringstream out, err;
  REQUIRE(cmd_synth(tiny_synth(), tmp.path, out, err) == kExitOk);
  RunConfig cfg = tiny_run(tmp.path);

  RunConfig missing = cfg;
  missing.interactions = tmp.path / "absent.tsv";
  CHECK(cmd_train(missing, out, err) == kExitConfig);

  RunConfig no_reviews = cfg;
  no_reviews.reviews.clear();
  CHECK(cmd_train(no_reviews, out, err) == kExitConfig);

  CHECK(cmd_recommend(cfg, {"u0"}, 3, out, err) == kExitConfig);  // no checkpoint yet

  cfg.set("variant", "vecf");
  REQUIRE(cmd_train(cfg, out, err) == kExitOk);
  CHECK(cmd_generate_review(cfg, "u0", "i0", 5, out, err) == kExitConfig);
  CHECK(err.str().find("variant has no text model") != std::string::npos);

  SynthConfig bigger = tiny_synth();
  bigger.users = 14;
  const fs::path other = tmp.path / "other";
  REQUIRE(cmd_synth(bigger, other, out, err) == kExitOk);
  RunConfig shifted = cfg;
  shifted.interactions = other / "interactions.tsv";
  shifted.reviews = other / "reviews.tsv";
  CHECK(cmd_recommend(shifted, {"u0"}, 3, out, err) == kExitConfig);
  CHECK(err.str().find("checkpoint has 10 users") != std::string::npos);
}

TEST_CASE("gradcheck command reports pass and injected failure") {
  std::ostringstream out, err;
  GradcheckOptions opts;
  opts.seeds = 2;
  CHECK(cmd_gradcheck(opts, out, err) == kExitOk);
  opts.inject_fault = "attention";
  CHECK(cmd_gradcheck(opts, out, err) == kExitNumerical);
  opts.inject_fault = "nope";
  CHECK(cmd_gradcheck(opts, out, err) == kExitConfig);
}

TEST_CASE("parallel scoring kernels match their serial references") {
  const SynthDataset data = generate_synthetic(tiny_synth());
  const ModelDims dims{10, 16, 4, data.features.dim(), data.features.regions(), 3, 4, 2};
  const ModelParams params = init_params(dims, InitScheme::ScaledUniform, 0.5, 3);
  const ScoringModel model{&params, Variant::Vecf, &data.features};
  std::vector<std::size_t> users;
  std::vector<std::vector<std::size_t>> excluded;
  std::vector<UserItem> pairs;
  for (std::size_t u = 0; u < 10; ++u) {
    users.push_back(u);
    excluded.push_back(data.interactions.items_of(u));
    for (std::size_t i = 0; i < 16; ++i) pairs.push_back({u, i});
  }
  const auto a = recommend_serial(model, users, excluded, 4);
  const auto b = recommend_parallel(model, users, excluded, 4);
  REQUIRE(a.size() == b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a[k].items == b[k].items);
    CHECK(a[k].scores == b[k].scores);
  }
  const auto ma = attention_maps_serial(model, pairs);
  const auto mb = attention_maps_parallel(model, pairs);
  for (std::size_t k = 0; k < ma.size(); ++k) CHECK(ma[k].weights == mb[k].weights);

  const std::string pgm = heatmap_pgm(ma[0]);
  CHECK(pgm.rfind("P5\n4 4\n255\n", 0) == 0);
  CHECK(pgm.size() == std::string("P5\n4 4\n255\n").size() + 16);
}

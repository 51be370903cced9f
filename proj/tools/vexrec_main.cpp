#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vexrec/commands.hpp"
#include "vexrec/parallel.hpp"

namespace {

// Loads --config (if any) and applies --set key=value overrides on top.
struct ConfigArgs {
  std::string path;
  std::vector<std::string> overrides;

  void add_to(CLI::App* app) {
    app->add_option("-c,--config", path, "Run configuration file");
    app->add_option("--set", overrides, "Override a config entry, key=value")->take_all();
  }

  vexrec::RunConfig resolve() const {
    vexrec::RunConfig cfg = path.empty() ? vexrec::RunConfig{} : vexrec::RunConfig::load(path);
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw vexrec::ConfigError("--set expects key=value: " + kv);
      cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    return cfg;
  }
};

}  // namespace

int main(int argc, char** argv) {
  vexrec::apply_thread_cap_from_env();

  CLI::App app{"Visually explainable recommendation: training, evaluation and explanations"};
  app.require_subcommand(1);

  ConfigArgs train_cfg, rec_cfg, explain_cfg, review_cfg, eval_cfg;

  auto* train = app.add_subcommand("train", "Train a model and write a checkpoint");
  train_cfg.add_to(train);

  auto* recommend = app.add_subcommand("recommend", "Top-n lists for users");
  rec_cfg.add_to(recommend);
  std::vector<std::string> rec_users;
  std::size_t rec_n = 5;
  recommend->add_option("-u,--user", rec_users, "Raw user id (repeatable)")->required();
  recommend->add_option("-n", rec_n, "List length");

  auto* explain = app.add_subcommand("explain", "Attention heatmap for a user and item");
  explain_cfg.add_to(explain);
  std::string ex_user, ex_item, ex_out;
  std::size_t ex_top = 5;
  explain->add_option("-u,--user", ex_user)->required();
  explain->add_option("-i,--item", ex_item)->required();
  explain->add_option("-o,--out", ex_out, "Output prefix for .json and .pgm");
  explain->add_option("--top-k", ex_top, "Number of top cells to list");

  auto* review = app.add_subcommand("generate-review", "Greedy review decoding");
  review_cfg.add_to(review);
  std::string rv_user, rv_item;
  std::size_t rv_len = 30;
  review->add_option("-u,--user", rv_user)->required();
  review->add_option("-i,--item", rv_item)->required();
  review->add_option("--max-len", rv_len);

  auto* evaluate = app.add_subcommand("evaluate", "Metric report on the held-out split");
  eval_cfg.add_to(evaluate);
  std::string ev_out;
  evaluate->add_option("-o,--out", ev_out, "Write the JSON report here instead of stdout");

  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient checks");
  vexrec::GradcheckOptions gc;
  std::string fault;
  gradcheck->add_option("--seeds", gc.seeds, "Number of random fixtures");
  gradcheck->add_option("--first-seed", gc.first_seed);
  gradcheck->add_option("--tolerance", gc.tolerance);
  gradcheck->add_option("--inject-fault", fault, "Sign-flip one group's analytic gradient");

  auto* synth = app.add_subcommand("synth", "Write a planted-preference synthetic dataset");
  vexrec::SynthConfig sc;
  std::string synth_dir;
  synth->add_option("-o,--out", synth_dir, "Output directory")->required();
  synth->add_option("--users", sc.users);
  synth->add_option("--items", sc.items);
  synth->add_option("--regions", sc.regions);
  synth->add_option("--feature-dim", sc.feature_dim);
  synth->add_option("--vocab", sc.vocab);
  synth->add_option("--archetypes", sc.archetypes);
  synth->add_option("--seed", sc.seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : vexrec::kExitConfig;
  }

  try {
    std::ostream& out = std::cout;
    std::ostream& err = std::cerr;
    if (*train) return vexrec::cmd_train(train_cfg.resolve(), out, err);
    if (*recommend) return vexrec::cmd_recommend(rec_cfg.resolve(), rec_users, rec_n, out, err);
    if (*explain) {
      return vexrec::cmd_explain(explain_cfg.resolve(), ex_user, ex_item, ex_out, ex_top, out,
                                 err);
    }
    if (*review) {
      return vexrec::cmd_generate_review(review_cfg.resolve(), rv_user, rv_item, rv_len, out, err);
    }
    if (*evaluate) return vexrec::cmd_evaluate(eval_cfg.resolve(), ev_out, out, err);
    if (*gradcheck) {
      if (!fault.empty()) gc.inject_fault = fault;
      return vexrec::cmd_gradcheck(gc, out, err);
    }
    if (*synth) return vexrec::cmd_synth(sc, synth_dir, out, err);
  } catch (const vexrec::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return vexrec::kExitConfig;
  }
  return vexrec::kExitConfig;
}

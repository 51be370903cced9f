#include "vexrec/commands.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>

#include "vexrec/evaluation.hpp"
#include "vexrec/gradcheck.hpp"
#include "vexrec/numerics.hpp"
#include "vexrec/recommend.hpp"
#include "vexrec/text_gru.hpp"
#include "vexrec/trainer.hpp"
#include "vexrec/vecf.hpp"

namespace vexrec {

namespace {

int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const TrainingDiverged& e) {
    err << "error: training diverged: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const NonFiniteLoss& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
  } catch (const MetricError& e) {
    err << "error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return kExitConfig;
}

void require_file(const std::filesystem::path& p, const char* key) {
  if (!p.empty() && !std::filesystem::is_regular_file(p)) {
    throw ConfigError(std::string(key) + ": no such file " + p.string());
  }
}

std::size_t user_of(const Workspace& ws, const std::string& id) {
  const auto u = ws.interactions.user_index(id);
  if (!u) throw ConfigError("unknown user '" + id + "'");
  return *u;
}

std::size_t item_of(const Workspace& ws, const std::string& id) {
  const auto i = ws.interactions.item_index(id);
  if (!i) throw ConfigError("unknown item '" + id + "'");
  return *i;
}

struct Loaded {
  Checkpoint ckpt;
  Workspace ws;
};

Loaded load_trained(const RunConfig& config, bool with_labels, std::ostream& err) {
  const auto path = config.checkpoint_path();
  if (!std::filesystem::is_regular_file(path)) {
    throw ConfigError("checkpoint: no such file " + path.string());
  }
  Loaded l;
  l.ckpt = load_checkpoint(path);
  l.ws = load_workspace(config, l.ckpt.variant, with_labels, err);
  check_compatible(l.ckpt, l.ws);
  return l;
}

ScoringModel scoring_model(const Loaded& l) {
  return {&l.ckpt.params, l.ckpt.variant,
          uses_image(l.ckpt.variant) ? &*l.ws.features : nullptr};
}

}  // namespace

ModelInputs Workspace::inputs(Variant variant) const {
  return ModelInputs{variant, uses_image(variant) && features ? &*features : nullptr,
                     reviews.empty() ? nullptr : &reviews,
                     vocabulary ? vocabulary->end_index() : 0};
}

ModelDims Workspace::dims(const RunConfig& config) const {
  const std::size_t h = features ? features->regions() : 1;
  const std::size_t d = features ? features->dim() : config.context_dim;
  const std::size_t vocab = vocabulary ? vocabulary->size() : 2;
  return dims_for(config.train, interactions.num_users(), interactions.num_items(), h, d, vocab);
}

Workspace load_workspace(const RunConfig& config, Variant variant, bool with_labels,
                         std::ostream& err) {
  if (config.interactions.empty()) throw ConfigError("interactions: path is required");
  require_file(config.interactions, "interactions");
  require_file(config.reviews, "reviews");
  require_file(config.features, "features");
  require_file(config.labels, "labels");
  if (uses_image(variant) && config.features.empty()) {
    throw ConfigError("variant " + std::string(variant_name(variant)) +
                      " needs a features file");
  }
  if (uses_text(variant) && config.reviews.empty()) {
    throw ConfigError("variant " + std::string(variant_name(variant)) + " needs a reviews file");
  }
  if (!(config.split_fraction > 0.0 && config.split_fraction < 1.0)) {
    throw ConfigError("split_fraction must lie in (0,1)");
  }

  Workspace ws;
  ws.interactions = load_interactions(config.interactions);
  if (ws.interactions.duplicates_dropped() > 0) {
    err << "warning: dropped " << ws.interactions.duplicates_dropped()
        << " duplicate interactions\n";
  }
  ws.split = split_per_user(ws.interactions, config.split_fraction, config.train.seed);

  if (!config.reviews.empty()) {
    const auto raw = load_raw_reviews(config.reviews);
    std::vector<std::vector<std::string>> streams;
    streams.reserve(raw.size());
    for (const auto& r : raw) streams.push_back(r.tokens);
    ws.vocabulary = build_vocabulary(streams, config.min_count);
    auto encoded = encode_reviews(raw, ws.interactions, *ws.vocabulary);
    if (encoded.skipped_unknown_pair > 0) {
      err << "warning: skipped " << encoded.skipped_unknown_pair
          << " reviews of unknown users or items\n";
    }
    if (encoded.skipped_empty > 0) {
      err << "warning: skipped " << encoded.skipped_empty << " empty reviews\n";
    }
    ws.reviews = ReviewTable(std::move(encoded.reviews), ws.interactions.num_items());
  }

  if (!config.features.empty() && uses_image(variant)) {
    ws.features = read_feature_store(config.features);
    if (ws.features->num_items() != ws.interactions.num_items()) {
      throw ConfigError("feature store holds " + std::to_string(ws.features->num_items()) +
                        " items but the interactions name " +
                        std::to_string(ws.interactions.num_items()));
    }
  }

  if (with_labels && !config.labels.empty()) {
    const auto raw = load_region_labels(config.labels);
    ws.labels = resolve_region_labels(raw, ws.interactions);
    if (ws.labels.size() < raw.size()) {
      err << "warning: skipped " << raw.size() - ws.labels.size()
          << " region labels of unknown users or items\n";
    }
  }
  return ws;
}

void check_compatible(const Checkpoint& ckpt, const Workspace& ws) {
  const ModelDims& d = ckpt.params.dims;
  auto mismatch = [](const std::string& what, std::size_t ck, std::size_t data) {
    throw ConfigError("checkpoint has " + std::to_string(ck) + " " + what + ", data has " +
                      std::to_string(data));
  };
  if (d.users != ws.interactions.num_users()) mismatch("users", d.users, ws.interactions.num_users());
  if (d.items != ws.interactions.num_items()) mismatch("items", d.items, ws.interactions.num_items());
  if (ws.vocabulary && uses_text(ckpt.variant) && d.vocab != ws.vocabulary->size()) {
    mismatch("vocabulary entries", d.vocab, ws.vocabulary->size());
  }
  if (ws.features && uses_image(ckpt.variant)) {
    if (d.regions != ws.features->regions()) mismatch("regions", d.regions, ws.features->regions());
    if (d.feature_dim != ws.features->dim()) {
      mismatch("feature dims", d.feature_dim, ws.features->dim());
    }
  }
}

int cmd_train(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    try {
      config.train.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    const Variant variant = config.train.variant;
    const Workspace ws = load_workspace(config, variant, false, err);

    TrainingSet data;
    data.num_items = ws.interactions.num_items();
    data.positives = ws.split.train;
    data.inputs = ws.inputs(variant);

    const ModelDims dims = ws.dims(config);
    Checkpoint ckpt{variant, init_params(dims, config.train.init, config.train.init_scale,
                                         config.train.seed)};
    Trainer trainer(config.train, data, ckpt.params);

    const auto ckpt_path = config.checkpoint_path();
    const auto report_dir = !config.output_dir.empty() ? config.output_dir
                                                       : ckpt_path.parent_path();
    if (!report_dir.empty()) std::filesystem::create_directories(report_dir);
    if (!ckpt_path.parent_path().empty()) {
      std::filesystem::create_directories(ckpt_path.parent_path());
    }

    TrainReport report;
    for (std::size_t e = 0; e < config.train.epochs; ++e) {
      report.epochs.push_back(trainer.train_epoch());
      const auto& r = report.epochs.back();
      out << "epoch " << r.epoch << " objective " << std::setprecision(10) << r.objective
          << " seconds " << std::setprecision(3) << r.seconds << '\n';
    }

    save_checkpoint(ckpt_path, ckpt);
    const auto csv_path = report_dir / "train_report.csv";
    std::ofstream csv(csv_path);
    write_train_report_csv(csv, report);
    if (!csv) throw std::runtime_error("cannot write " + csv_path.string());
    out << "checkpoint " << ckpt_path.string() << "\nreport " << csv_path.string() << '\n';
    return kExitOk;
  });
}

int cmd_recommend(const RunConfig& config, const std::vector<std::string>& users, std::size_t n,
                  std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (n == 0) throw ConfigError("n must be positive");
    const Loaded l = load_trained(config, false, err);
    const ScoringModel model = scoring_model(l);
    std::size_t served = 0;
    for (const auto& id : users) {
      const auto u = l.ws.interactions.user_index(id);
      if (!u) {
        err << "warning: unknown user '" << id << "'\n";
        continue;
      }
      const auto rec = recommend_top_n(model, *u, l.ws.split.train[*u], n);
      if (rec.items.size() < n) {
        err << "warning: user '" << id << "' has only " << rec.items.size()
            << " candidate items\n";
      }
      for (std::size_t r = 0; r < rec.items.size(); ++r) {
        out << id << '\t' << l.ws.interactions.item_ids()[rec.items[r]] << '\t' << r + 1 << '\t'
            << std::setprecision(17) << sigmoid(rec.scores[r]) << '\n';
      }
      ++served;
    }
    if (served == 0) throw ConfigError("no known users to recommend for");
    return kExitOk;
  });
}

int cmd_explain(const RunConfig& config, const std::string& user, const std::string& item,
                std::filesystem::path out_prefix, std::size_t top_k, std::ostream& out,
                std::ostream& err) {
  return guarded(err, [&] {
    const Loaded l = load_trained(config, false, err);
    if (!uses_image(l.ckpt.variant) || !l.ws.features) {
      throw ConfigError("explain needs an image model with regional features");
    }
    if (!l.ws.features->grid_side()) {
      throw ConfigError("regions per image is not a perfect square; cannot draw a heatmap");
    }
    const std::size_t u = user_of(l.ws, user);
    const std::size_t i = item_of(l.ws, item);
    const AttentionMap map = attention_map(l.ckpt.params.user_embedding.row(u),
                                           l.ws.features->grid(i), l.ckpt.params.attention, u, i);
    if (out_prefix.empty()) {
      out_prefix = (config.output_dir.empty() ? std::filesystem::path(".") : config.output_dir) /
                   ("explain_" + user + "_" + item);
    }
    if (!out_prefix.parent_path().empty()) {
      std::filesystem::create_directories(out_prefix.parent_path());
    }
    auto json_path = out_prefix;
    json_path += ".json";
    auto pgm_path = out_prefix;
    pgm_path += ".pgm";
    std::ofstream(json_path) << heatmap_json(map, user, item, top_k) << '\n';
    std::ofstream(pgm_path, std::ios::binary) << heatmap_pgm(map);
    out << json_path.string() << '\n' << pgm_path.string() << '\n';
    return kExitOk;
  });
}

int cmd_generate_review(const RunConfig& config, const std::string& user, const std::string& item,
                        std::size_t max_len, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto path = config.checkpoint_path();
    if (!std::filesystem::is_regular_file(path)) {
      throw ConfigError("checkpoint: no such file " + path.string());
    }
    if (!uses_text(load_checkpoint(path).variant)) {
      throw ConfigError("variant has no text model");
    }
    const Loaded l = load_trained(config, false, err);
    if (!l.ws.vocabulary) throw ConfigError("generate-review needs the reviews file");
    const std::size_t u = user_of(l.ws, user);
    const std::size_t i = item_of(l.ws, item);
    const auto& params = l.ckpt.params;
    const PairForward fwd = forward_pair(params, l.ckpt.variant, scoring_model(l).features, u, i);
    const TextInputs text{params.user_embedding.row(u), params.item_embedding.row(i),
                          fwd.image.span()};
    const auto tokens = greedy_decode(params, text, l.ws.vocabulary->end_index(), max_len);
    for (std::size_t k = 0; k < tokens.size(); ++k) {
      out << (k ? " " : "") << l.ws.vocabulary->token_at(tokens[k]);
    }
    out << '\n';
    return kExitOk;
  });
}

int cmd_evaluate(const RunConfig& config, const std::filesystem::path& report_path,
                 std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Loaded l = load_trained(config, true, err);
    EvalOptions options;
    options.top_n = config.top_n;
    options.f1_mode = config.f1_mode;
    options.max_review_length = config.max_review_length;
    EvalInputs inputs;
    inputs.split = &l.ws.split;
    inputs.reviews = l.ws.reviews.empty() ? nullptr : &l.ws.reviews;
    inputs.end_token = l.ws.vocabulary ? l.ws.vocabulary->end_index() : 0;
    inputs.labels = &l.ws.labels;
    const EvalResult result = evaluate_model(scoring_model(l), inputs, options);
    if (result.rouge_too_short > 0) {
      err << "warning: " << result.rouge_too_short
          << " generated or reference reviews were shorter than the n-gram size\n";
    }
    err << "random baseline f1@" << options.top_n << " " << result.random_baseline.f1 << '\n';
    const std::string json = metric_report_json(result.report);
    if (report_path.empty()) {
      out << json << '\n';
    } else {
      std::ofstream file(report_path);
      file << json << '\n';
      if (!file) throw std::runtime_error("cannot write " + report_path.string());
      out << report_path.string() << '\n';
    }
    return kExitOk;
  });
}

int cmd_gradcheck(const GradcheckOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    std::optional<ParamGroup> flip;
    if (options.inject_fault) {
      flip = parse_param_group(*options.inject_fault);
      if (!flip) throw ConfigError("unknown parameter group '" + *options.inject_fault + "'");
    }
    if (options.seeds == 0) throw ConfigError("seeds must be positive");
    const auto start = std::chrono::steady_clock::now();
    const FixtureSpec spec;
    std::vector<GroupCheck> worst;
    for (std::size_t s = 0; s < options.seeds; ++s) {
      const GradFixture f = make_grad_fixture(spec, options.first_seed + s);
      const GradCheckReport r = check_joint_gradients(f, options.tolerance, 1e-5, flip);
      if (worst.empty()) worst = r.groups;
      for (std::size_t g = 0; g < r.groups.size(); ++g) {
        worst[g].max_relative_error =
            std::max(worst[g].max_relative_error, r.groups[g].max_relative_error);
        worst[g].passed = worst[g].passed && r.groups[g].passed;
      }
    }
    bool all = true;
    out << "group\tcoordinates\tmax_rel_error\tresult\n";
    for (const auto& g : worst) {
      out << group_name(g.group) << '\t' << g.coordinates << '\t' << std::setprecision(3)
          << g.max_relative_error << '\t' << (g.passed ? "pass" : "FAIL") << '\n';
      all = all && g.passed;
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out << options.seeds << " fixtures, " << std::setprecision(3) << seconds << " s, "
        << (all ? "all groups pass" : "FAILED") << '\n';
    return all ? kExitOk : kExitNumerical;
  });
}

int cmd_synth(const SynthConfig& config, const std::filesystem::path& dir, std::ostream& out,
              std::ostream& err) {
  return guarded(err, [&] {
    SynthDataset data;
    try {
      data = generate_synthetic(config);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    write_synthetic(dir, data);
    const SynthPaths paths = synth_paths(dir);
    RunConfig run;
    run.interactions = paths.interactions.filename();
    run.reviews = paths.reviews.filename();
    run.features = paths.features.filename();
    run.labels = paths.labels.filename();
    run.output_dir = "out";
    run.train.epochs = 200;
    std::ofstream cfg(dir / "run.cfg");
    run.write(cfg);
    if (!cfg) throw std::runtime_error("cannot write " + (dir / "run.cfg").string());
    out << "users " << data.interactions.num_users() << " items "
        << data.interactions.num_items() << " interactions " << data.interactions.size()
        << " labelled pairs " << data.ground_truth.size() << '\n'
        << "config " << (dir / "run.cfg").string() << '\n';
    return kExitOk;
  });
}

}  // namespace vexrec

// cleki: cognitive-diagnosis toolkit command line.
//
// Subcommands: stats, train, eval, ablate, sweep, coverage, diagnose, synth,
// gradcheck, export-embeddings. Every run that produces files also writes a
// manifest.json (command, arguments, input/output hashes) beside them.
//
// Exit status: 0 success, 1 usage error, 2 data/validation error, 3 runtime
// failure (divergence, corrupt checkpoint, failed gradient check).

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "cleki/concept_graph.hpp"
#include "cleki/data.hpp"
#include "cleki/diagnosis.hpp"
#include "cleki/errors.hpp"
#include "cleki/evaluation.hpp"
#include "cleki/irt.hpp"
#include "cleki/latent.hpp"
#include "cleki/manifest.hpp"
#include "cleki/synthetic.hpp"
#include "cleki/training.hpp"

namespace fs = std::filesystem;
using namespace cleki;

namespace {

struct CommonArgs {
  std::string logs_path;
  std::string q_path;
  std::string graph_path;
  std::string config_path;
  std::string out_dir;
  std::string checkpoint_path;
  std::optional<uint64_t> seed;
  std::optional<double> epsilon;
  std::optional<int> top_p;
  std::optional<int> epochs;
  std::optional<double> learning_rate;
  std::optional<double> train_fraction;
  int min_logs = 0;
  int max_students = 0;  // 0 = keep all
};

void add_data_options(CLI::App* cmd, CommonArgs& args, bool need_graph) {
  cmd->add_option("--logs", args.logs_path, "response-log file")->required();
  cmd->add_option("--q", args.q_path, "Q-matrix file")->required();
  auto* g = cmd->add_option("--graph", args.graph_path, "concept-edge file");
  if (need_graph) g->required();
  cmd->add_option("--min-logs", args.min_logs, "drop students with fewer logs");
  cmd->add_option("--max-students", args.max_students,
                  "seeded random subset of students (0 = all)");
}

void add_config_options(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "key = value config file");
  cmd->add_option("--seed", args.seed, "seed override");
  cmd->add_option("--epsilon", args.epsilon, "explicit/latent combination weight");
  cmd->add_option("--top-p", args.top_p, "latent concepts kept per row");
  cmd->add_option("--epochs", args.epochs, "epoch budget override");
  cmd->add_option("--lr", args.learning_rate, "learning-rate override");
  cmd->add_option("--train-fraction", args.train_fraction, "train split fraction");
}

ModelConfig resolve_config(const CommonArgs& args) {
  ModelConfig config;
  if (!args.config_path.empty()) config = load_model_config(args.config_path);
  if (args.seed) config.seed = *args.seed;
  if (args.epsilon) config.epsilon = *args.epsilon;
  if (args.top_p) config.top_p = *args.top_p;
  if (args.epochs) config.epochs = *args.epochs;
  if (args.learning_rate) config.learning_rate = *args.learning_rate;
  if (args.train_fraction) config.train_fraction = *args.train_fraction;
  return config;
}

Bundle load_inputs(const CommonArgs& args) {
  Bundle bundle = load_bundle(args.logs_path, args.q_path, args.graph_path);
  if (args.min_logs > 0) bundle.data = filter_students(bundle.data, args.min_logs);
  if (args.max_students > 0)
    bundle.data = subset_students(bundle.data, args.max_students, args.seed.value_or(1));
  return bundle;
}

std::vector<std::pair<std::string, std::string>> manifest_args(const CommonArgs& args,
                                                               const ModelConfig& config) {
  std::vector<std::pair<std::string, std::string>> out;
  auto put = [&](const std::string& k, const std::string& v) {
    if (!v.empty()) out.emplace_back(k, v);
  };
  put("logs", args.logs_path);
  put("q", args.q_path);
  put("graph", args.graph_path);
  put("checkpoint", args.checkpoint_path);
  out.emplace_back("min_logs", std::to_string(args.min_logs));
  if (args.max_students > 0)
    out.emplace_back("max_students", std::to_string(args.max_students));
  std::istringstream cfg(format_model_config(config));
  std::string line;
  while (std::getline(cfg, line)) {
    const auto eq = line.find(" = ");
    if (eq != std::string::npos) out.emplace_back(line.substr(0, eq), line.substr(eq + 3));
  }
  return out;
}

void print_metrics(const std::string& label, const Metrics& m) {
  std::cout << label << ": acc=" << m.acc << " auc=" << m.auc << " rmse=" << m.rmse;
  if (m.auc_degenerate) std::cout << " (single-class AUC pinned to 50)";
  std::cout << "\n";
}

void write_metrics_csv(const std::string& path, const std::string& label, const Metrics& m,
                       long long excluded, uint64_t seed) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path);
  out.precision(10);
  out << "split,acc,auc,rmse,excluded,seed\n";
  out << label << ',' << m.acc << ',' << m.auc << ',' << m.rmse << ',' << excluded << ','
      << seed << '\n';
}

// Remaps entities of freshly-loaded files into a checkpoint's id space.
std::pair<std::vector<ResponseLog>, long long> remap_logs_to_state(const TrainState& state,
                                                                   const LoadedLogs& loaded) {
  std::vector<ResponseLog> logs;
  long long excluded = 0;
  for (const auto& log : loaded.logs) {
    const int s = state.student_ids.lookup(loaded.student_ids.to_raw[log.student]);
    const int e = state.exercise_ids.lookup(loaded.exercise_ids.to_raw[log.exercise]);
    if (s < 0 || e < 0) {
      ++excluded;
      continue;
    }
    logs.push_back({s, e, log.score});
  }
  return {std::move(logs), excluded};
}

QMatrix remap_q_to_state(const TrainState& state, const std::string& q_path) {
  IdMap ex, con;
  QMatrix fresh = load_q_matrix(q_path, ex, con);
  QMatrix q;
  q.n_exercises = state.params.n_exercises;
  q.n_concepts = state.params.n_concepts;
  q.concepts_of.resize(q.n_exercises);
  for (int fe = 0; fe < fresh.n_exercises; ++fe) {
    const int se = state.exercise_ids.lookup(ex.to_raw[fe]);
    if (se < 0) continue;  // exercise unknown to the model; its logs are excluded anyway
    for (int fc : fresh.concepts_of[fe]) {
      const int sc = state.concept_ids.lookup(con.to_raw[fc]);
      if (sc < 0)
        throw DataError("Q-matrix references concept " + std::to_string(con.to_raw[fc]) +
                        " unknown to the checkpoint");
      q.concepts_of[se].push_back(sc);
    }
    std::sort(q.concepts_of[se].begin(), q.concepts_of[se].end());
  }
  return q;
}

ConceptGraph remap_graph_to_state(const TrainState& state, const std::string& graph_path) {
  IdMap con;
  ConceptGraph fresh = load_concept_edges(graph_path, con);
  ConceptGraph graph;
  graph.n_concepts = state.params.n_concepts;
  for (const auto& e : fresh.edges) {
    const int src = state.concept_ids.lookup(con.to_raw[e.src]);
    const int dst = state.concept_ids.lookup(con.to_raw[e.dst]);
    if (src < 0 || dst < 0)
      throw DataError("concept graph references a concept unknown to the checkpoint");
    graph.edges.push_back({src, dst, e.kind});
  }
  return graph;
}

LatentState state_latent(const TrainState& state, const ConceptGraph& graph) {
  const GraphContext ctx = GraphContext::build(
      graph, state.config.prereq_flow_reverse ? PrereqFlow::prereq_from_dependent
                                              : PrereqFlow::dependent_from_prereq);
  LatentOptions opts;
  opts.top_p = state.config.top_p;
  opts.leaky_slope = state.config.leaky_slope;
  opts.uniform_attention = state.config.uniform_attention;
  opts.zero_explicit = state.config.zero_explicit_latent;
  return compute_latent(state.inference_params(), ctx.nbrs, ctx.mask, opts);
}

// ---------------------------------------------------------------- commands

int cmd_stats(const CommonArgs& args) {
  Dataset data;
  if (args.graph_path.empty()) {
    data = load_dataset(args.logs_path, args.q_path);
    if (args.min_logs > 0) data = filter_students(data, args.min_logs);
    if (args.max_students > 0)
      data = subset_students(data, args.max_students, args.seed.value_or(1));
  } else {
    data = load_inputs(args).data;
  }
  const auto stats = dataset_stats(data);
  std::cout << format_stats(stats);

  if (!args.out_dir.empty()) {
    fs::create_directories(args.out_dir);
    const std::string path = args.out_dir + "/stats.txt";
    std::ofstream out(path);
    out << format_stats(stats);
    out.close();
    Manifest m;
    m.command = "stats";
    m.arguments = manifest_args(args, ModelConfig{});
    m.inputs = {args.logs_path, args.q_path};
    if (!args.graph_path.empty()) m.inputs.push_back(args.graph_path);
    m.outputs = {path};
    write_manifest(m, args.out_dir);
  }
  return 0;
}

int cmd_train(const CommonArgs& args, bool export_latent, const std::string& resume_path) {
  Bundle bundle = load_inputs(args);
  fs::create_directories(args.out_dir);

  TrainResult result;
  ModelConfig config;
  SplitResult split;
  if (resume_path.empty()) {
    config = resolve_config(args);
    config.validate(bundle.data.n_concepts);
    split = split_logs(bundle.data, config.train_fraction, config.seed);
    result = train(bundle.data, bundle.graph, config, split.train);
  } else {
    TrainState state = load_checkpoint(resume_path);
    if (args.epochs) state.config.epochs = *args.epochs;
    config = state.config;
    check_dimensions(state, bundle.data, bundle.graph);
    split = split_logs(bundle.data, config.train_fraction, config.seed);
    result = train_continue(std::move(state), bundle.data, bundle.graph, split.train);
  }

  for (const auto& rec : result.history)
    std::cout << "epoch " << rec.epoch << " loss " << rec.train_loss << " val_auc "
              << rec.val.auc << "\n";

  const std::string ckpt = args.out_dir + "/checkpoint.ckpt";
  save_checkpoint(result.state, ckpt);
  write_history(args.out_dir + "/history.csv", result.history);
  write_response_logs(args.out_dir + "/train_logs.csv", split.train,
                      bundle.data.student_ids, bundle.data.exercise_ids);
  write_response_logs(args.out_dir + "/test_logs.csv", split.test,
                      bundle.data.student_ids, bundle.data.exercise_ids);

  const auto outcome = evaluate(result.state, bundle.graph, bundle.data.q, split.test);
  print_metrics("test", outcome.metrics);
  write_metrics_csv(args.out_dir + "/metrics.csv", "test", outcome.metrics, outcome.excluded,
                    config.seed);

  Manifest m;
  m.command = "train";
  m.arguments = manifest_args(args, config);
  m.inputs = {args.logs_path, args.q_path, args.graph_path};
  m.outputs = {ckpt, args.out_dir + "/history.csv", args.out_dir + "/train_logs.csv",
               args.out_dir + "/test_logs.csv", args.out_dir + "/metrics.csv"};

  if (export_latent) {
    const auto latent = state_latent(result.state, bundle.graph);
    write_matrix_csv(args.out_dir + "/s_tilde.csv", latent.sim_renorm);
    write_matrix_csv(args.out_dir + "/q_tilde.csv",
                     latent_q(bundle.data.q, latent.sim_renorm,
                              result.state.config.zero_explicit_latent));
    m.outputs.push_back(args.out_dir + "/s_tilde.csv");
    m.outputs.push_back(args.out_dir + "/q_tilde.csv");
  }
  write_manifest(m, args.out_dir);

  if (result.diverged) {
    std::cerr << "training diverged; checkpoint holds the last finite state\n";
    return 3;
  }
  return 0;
}

int cmd_eval(const CommonArgs& args, bool export_latent) {
  TrainState state = load_checkpoint(args.checkpoint_path);
  const QMatrix q = remap_q_to_state(state, args.q_path);
  ConceptGraph graph = remap_graph_to_state(state, args.graph_path);
  graph.n_concepts = state.params.n_concepts;

  const LoadedLogs loaded = load_response_logs(args.logs_path);
  auto [logs, excluded] = remap_logs_to_state(state, loaded);
  if (logs.empty()) throw DataError("eval: no scorable logs after id remapping");

  const auto outcome = evaluate(state, graph, q, logs);
  const long long total_excluded = excluded + outcome.excluded;
  if (total_excluded > 0)
    std::cout << "excluded " << total_excluded << " logs with unseen ids\n";
  print_metrics("eval", outcome.metrics);

  fs::create_directories(args.out_dir);
  write_metrics_csv(args.out_dir + "/metrics.csv", "eval", outcome.metrics, total_excluded,
                    state.config.seed);

  const auto latent = state_latent(state, graph);
  std::vector<std::pair<int, int>> pairs;
  std::vector<double> labels;
  for (const auto& log : logs) {
    pairs.emplace_back(log.student, log.exercise);
    labels.push_back(static_cast<double>(log.score));
  }
  const auto preds = predict_batch(state.inference_params(), q, latent.sim_renorm, pairs,
                                   ScoreOptions::from_config(state.config));
  write_predictions(args.out_dir + "/predictions.csv", pairs, preds, labels,
                    state.student_ids, state.exercise_ids);

  Manifest m;
  m.command = "eval";
  m.arguments = manifest_args(args, state.config);
  m.inputs = {args.checkpoint_path, args.logs_path, args.q_path, args.graph_path};
  m.outputs = {args.out_dir + "/metrics.csv", args.out_dir + "/predictions.csv"};
  if (export_latent) {
    write_matrix_csv(args.out_dir + "/s_tilde.csv", latent.sim_renorm);
    write_matrix_csv(args.out_dir + "/q_tilde.csv",
                     latent_q(q, latent.sim_renorm, state.config.zero_explicit_latent));
    m.outputs.push_back(args.out_dir + "/s_tilde.csv");
    m.outputs.push_back(args.out_dir + "/q_tilde.csv");
  }
  write_manifest(m, args.out_dir);
  return 0;
}

int cmd_ablate(const CommonArgs& args, const std::string& variant_arg) {
  Bundle bundle = load_inputs(args);
  ModelConfig config = resolve_config(args);
  config.validate(bundle.data.n_concepts);
  fs::create_directories(args.out_dir);

  std::vector<AblationVariant> variants;
  if (variant_arg == "all") {
    variants = {AblationVariant::full, AblationVariant::no_mrp, AblationVariant::no_agm,
                AblationVariant::no_cdlk, AblationVariant::no_cdek};
  } else {
    variants = {parse_variant(variant_arg)};
  }

  const std::string path = args.out_dir + "/ablation.csv";
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path);
  out.precision(10);
  out << "variant,acc,auc,rmse,seed\n";
  for (auto v : variants) {
    const Metrics m = run_ablation(bundle.data, bundle.graph, config, v);
    print_metrics(variant_name(v), m);
    out << variant_name(v) << ',' << m.acc << ',' << m.auc << ',' << m.rmse << ','
        << config.seed << '\n';
  }
  out.close();

  Manifest m;
  m.command = "ablate";
  m.arguments = manifest_args(args, config);
  m.arguments.emplace_back("variant", variant_arg);
  m.inputs = {args.logs_path, args.q_path, args.graph_path};
  m.outputs = {path};
  write_manifest(m, args.out_dir);
  return 0;
}

int cmd_sweep(const CommonArgs& args, const std::string& knob,
              std::vector<double>& values) {
  Bundle bundle = load_inputs(args);
  ModelConfig config = resolve_config(args);
  config.validate(bundle.data.n_concepts);
  fs::create_directories(args.out_dir);

  SweepKnob k;
  if (knob == "top-p" || knob == "top_p") k = SweepKnob::top_p;
  else if (knob == "epsilon") k = SweepKnob::epsilon;
  else throw DataError("unknown sweep knob: " + knob);

  const auto rows = hyper_sweep(bundle.data, bundle.graph, config, k, values);
  for (const auto& row : rows)
    std::cout << knob << "=" << row.value << " acc=" << row.metrics.acc
              << " auc=" << row.metrics.auc << " rmse=" << row.metrics.rmse << "\n";

  const std::string path = args.out_dir + "/sweep_" + (k == SweepKnob::top_p ? "top_p" : "epsilon") + ".csv";
  write_sweep_table(path, k == SweepKnob::top_p ? "top_p" : "epsilon", rows, config.seed);

  Manifest m;
  m.command = "sweep";
  m.arguments = manifest_args(args, config);
  m.arguments.emplace_back("knob", knob);
  m.inputs = {args.logs_path, args.q_path, args.graph_path};
  m.outputs = {path};
  write_manifest(m, args.out_dir);
  return 0;
}

int cmd_coverage(const CommonArgs& args, std::vector<double>& fractions,
                 const std::string& model_kind) {
  Bundle bundle = load_inputs(args);
  ModelConfig config = resolve_config(args);
  config.validate(bundle.data.n_concepts);
  fs::create_directories(args.out_dir);

  ModelKind kind;
  if (model_kind == "cleki") kind = ModelKind::cleki;
  else if (model_kind == "irt") kind = ModelKind::irt;
  else throw DataError("unknown model kind: " + model_kind);

  const auto curve = coverage_sweep(bundle.data, bundle.graph, config, fractions, kind);
  for (const auto& p : curve) {
    std::cout << "fraction=" << p.fraction << " acc=" << p.metrics.acc
              << " auc=" << p.metrics.auc;
    if (p.dropped_students > 0) std::cout << " dropped_students=" << p.dropped_students;
    std::cout << "\n";
  }

  const std::string path = args.out_dir + "/coverage_" + model_kind + ".csv";
  write_coverage_curve(path, curve, config.seed);

  Manifest m;
  m.command = "coverage";
  m.arguments = manifest_args(args, config);
  m.arguments.emplace_back("model", model_kind);
  m.inputs = {args.logs_path, args.q_path, args.graph_path};
  m.outputs = {path};
  write_manifest(m, args.out_dir);
  return 0;
}

int cmd_diagnose(const CommonArgs& args, long long student_raw) {
  TrainState state = load_checkpoint(args.checkpoint_path);
  const QMatrix q = remap_q_to_state(state, args.q_path);
  ConceptGraph graph = remap_graph_to_state(state, args.graph_path);
  graph.n_concepts = state.params.n_concepts;

  const int student = state.student_ids.lookup(student_raw);
  if (student < 0) throw DataError("student " + std::to_string(student_raw) + " not found");

  const LoadedLogs loaded = load_response_logs(args.logs_path);
  auto [logs, excluded] = remap_logs_to_state(state, loaded);
  const auto split = split_logs(logs, state.params.n_students, state.config.train_fraction,
                                state.config.seed);

  const auto latent = state_latent(state, graph);
  const auto report =
      diagnosis_report(state, latent.sim_renorm, student, q, split.train, split.test);

  // a plain Dataset shell so the writers can resolve raw ids
  Dataset shell;
  shell.student_ids = state.student_ids;
  shell.exercise_ids = state.exercise_ids;
  shell.concept_ids = state.concept_ids;

  const std::string text = format_report(report, shell);
  std::cout << text;

  fs::create_directories(args.out_dir);
  const std::string txt_path = args.out_dir + "/report.txt";
  std::ofstream(txt_path) << text;
  const std::string json_path = args.out_dir + "/report.json";
  write_report_json(json_path, report, shell);

  Manifest m;
  m.command = "diagnose";
  m.arguments = manifest_args(args, state.config);
  m.arguments.emplace_back("student", std::to_string(student_raw));
  m.inputs = {args.checkpoint_path, args.logs_path, args.q_path, args.graph_path};
  m.outputs = {txt_path, json_path};
  write_manifest(m, args.out_dir);
  return 0;
}

int cmd_synth(const CommonArgs& args, int n_students, int n_exercises, int n_concepts,
              int logs_per_student, double slip, double guess) {
  const uint64_t seed = args.seed.value_or(1);
  const auto truth = gen_world(n_students, n_exercises, n_concepts, seed, slip, guess);
  const auto logs = gen_responses(truth, logs_per_student, seed);
  const auto data = make_dataset(truth, logs);

  fs::create_directories(args.out_dir);
  write_world(truth, args.out_dir);
  write_response_logs(args.out_dir + "/logs.csv", logs, data.student_ids, data.exercise_ids);
  std::cout << "world: " << n_students << " students, " << n_exercises << " exercises, "
            << n_concepts << " concepts, " << logs.size() << " logs\n";

  Manifest m;
  m.command = "synth";
  m.arguments = {{"students", std::to_string(n_students)},
                 {"exercises", std::to_string(n_exercises)},
                 {"concepts", std::to_string(n_concepts)},
                 {"logs_per_student", std::to_string(logs_per_student)},
                 {"slip", std::to_string(slip)},
                 {"guess", std::to_string(guess)},
                 {"seed", std::to_string(seed)}};
  m.outputs = {args.out_dir + "/logs.csv", args.out_dir + "/q.csv",
               args.out_dir + "/graph.csv", args.out_dir + "/mastery.csv",
               args.out_dir + "/difficulty.csv"};
  write_manifest(m, args.out_dir);
  return 0;
}

int cmd_gradcheck(uint64_t seed, double tol) {
  const auto report = reference_gradient_check(seed, tol);
  std::cout << "max relative error " << report.max_rel_error << " (worst: "
            << report.worst_tensor << ", seed " << report.seed;
  if (report.retries > 0) std::cout << ", retried " << report.retries << "x past ties";
  std::cout << ")\n" << (report.pass ? "PASS" : "FAIL") << " at tolerance " << tol << "\n";
  return report.pass ? 0 : 3;
}

int cmd_export_embeddings(const CommonArgs& args, bool dense_filter, int min_student,
                          int min_exercise) {
  TrainState state = load_checkpoint(args.checkpoint_path);
  const LoadedLogs loaded = load_response_logs(args.logs_path);
  auto [logs, excluded] = remap_logs_to_state(state, loaded);
  if (dense_filter) {
    min_student = 100;
    min_exercise = 20;
  }

  Dataset shell;
  shell.n_students = state.params.n_students;
  shell.n_exercises = state.params.n_exercises;
  shell.n_concepts = state.params.n_concepts;
  shell.student_ids = state.student_ids;
  shell.exercise_ids = state.exercise_ids;
  shell.concept_ids = state.concept_ids;

  fs::create_directories(args.out_dir);
  export_embeddings(state, shell, logs, args.out_dir, min_student, min_exercise);

  Manifest m;
  m.command = "export-embeddings";
  m.arguments = manifest_args(args, state.config);
  m.arguments.emplace_back("min_student_logs", std::to_string(min_student));
  m.arguments.emplace_back("min_exercise_logs", std::to_string(min_exercise));
  m.inputs = {args.checkpoint_path, args.logs_path};
  m.outputs = {args.out_dir + "/student_embeddings.csv",
               args.out_dir + "/exercise_embeddings.csv"};
  write_manifest(m, args.out_dir);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CLEKI-CD cognitive diagnosis toolkit"};
  app.require_subcommand(1);

  CommonArgs args;

  auto* stats = app.add_subcommand("stats", "dataset statistics table");
  stats->add_option("--logs", args.logs_path)->required();
  stats->add_option("--q", args.q_path)->required();
  stats->add_option("--graph", args.graph_path);
  stats->add_option("--min-logs", args.min_logs);
  stats->add_option("--max-students", args.max_students);
  stats->add_option("--seed", args.seed);
  stats->add_option("--out", args.out_dir);

  auto* train_cmd = app.add_subcommand("train", "train the model and save a checkpoint");
  add_data_options(train_cmd, args, true);
  add_config_options(train_cmd, args);
  train_cmd->add_option("--out", args.out_dir)->required();
  bool train_export_latent = false;
  train_cmd->add_flag("--export-latent", train_export_latent,
                      "also write s_tilde.csv and q_tilde.csv");
  std::string resume_path;
  train_cmd->add_option("--resume", resume_path, "continue from a checkpoint");

  auto* eval_cmd = app.add_subcommand("eval", "score held-out logs with a checkpoint");
  eval_cmd->add_option("--checkpoint", args.checkpoint_path)->required();
  eval_cmd->add_option("--logs", args.logs_path)->required();
  eval_cmd->add_option("--q", args.q_path)->required();
  eval_cmd->add_option("--graph", args.graph_path)->required();
  eval_cmd->add_option("--out", args.out_dir)->required();
  bool eval_export_latent = false;
  eval_cmd->add_flag("--export-latent", eval_export_latent);

  auto* ablate_cmd = app.add_subcommand("ablate", "train an ablation variant");
  add_data_options(ablate_cmd, args, true);
  add_config_options(ablate_cmd, args);
  ablate_cmd->add_option("--out", args.out_dir)->required();
  std::string variant = "all";
  ablate_cmd->add_option("--variant", variant, "full|no_mrp|no_agm|no_cdlk|no_cdek|all");

  auto* sweep_cmd = app.add_subcommand("sweep", "hyperparameter sweep");
  add_data_options(sweep_cmd, args, true);
  add_config_options(sweep_cmd, args);
  sweep_cmd->add_option("--out", args.out_dir)->required();
  std::string knob;
  sweep_cmd->add_option("--knob", knob, "top-p or epsilon")->required();
  std::vector<double> sweep_values;
  sweep_cmd->add_option("--values", sweep_values, "values to sweep")
      ->required()
      ->delimiter(',');

  auto* coverage_cmd = app.add_subcommand("coverage", "log-coverage robustness sweep");
  add_data_options(coverage_cmd, args, true);
  add_config_options(coverage_cmd, args);
  coverage_cmd->add_option("--out", args.out_dir)->required();
  std::vector<double> fractions{1.0, 0.8, 0.6, 0.4};
  coverage_cmd->add_option("--fractions", fractions)->delimiter(',');
  std::string coverage_model = "cleki";
  coverage_cmd->add_option("--model", coverage_model, "cleki or irt");

  auto* diagnose_cmd = app.add_subcommand("diagnose", "per-student diagnosis report");
  diagnose_cmd->add_option("--checkpoint", args.checkpoint_path)->required();
  diagnose_cmd->add_option("--logs", args.logs_path)->required();
  diagnose_cmd->add_option("--q", args.q_path)->required();
  diagnose_cmd->add_option("--graph", args.graph_path)->required();
  diagnose_cmd->add_option("--out", args.out_dir)->required();
  long long student_raw = -1;
  diagnose_cmd->add_option("--student", student_raw, "raw student id")->required();

  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic world");
  synth_cmd->add_option("--out", args.out_dir)->required();
  synth_cmd->add_option("--seed", args.seed);
  int sy_students = 300, sy_exercises = 100, sy_concepts = 20, sy_logs = 40;
  double sy_slip = 0.1, sy_guess = 0.1;
  synth_cmd->add_option("--students", sy_students);
  synth_cmd->add_option("--exercises", sy_exercises);
  synth_cmd->add_option("--concepts", sy_concepts);
  synth_cmd->add_option("--logs-per-student", sy_logs);
  synth_cmd->add_option("--slip", sy_slip);
  synth_cmd->add_option("--guess", sy_guess);

  auto* gradcheck_cmd = app.add_subcommand("gradcheck", "finite-difference gradient check");
  uint64_t gc_seed = 7;
  double gc_tol = 1e-4;
  gradcheck_cmd->add_option("--seed", gc_seed);
  gradcheck_cmd->add_option("--tol", gc_tol);

  auto* export_cmd = app.add_subcommand("export-embeddings", "dump concept-scalar vectors");
  export_cmd->add_option("--checkpoint", args.checkpoint_path)->required();
  export_cmd->add_option("--logs", args.logs_path)->required();
  export_cmd->add_option("--out", args.out_dir)->required();
  bool dense_filter = false;
  export_cmd->add_flag("--filter", dense_filter,
                       "keep students with >100 and exercises with >20 responses");
  int min_student = 0, min_exercise = 0;
  export_cmd->add_option("--min-student-logs", min_student);
  export_cmd->add_option("--min-exercise-logs", min_exercise);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 1;
  }

  try {
    if (*stats) return cmd_stats(args);
    if (*train_cmd) return cmd_train(args, train_export_latent, resume_path);
    if (*eval_cmd) return cmd_eval(args, eval_export_latent);
    if (*ablate_cmd) return cmd_ablate(args, variant);
    if (*sweep_cmd) return cmd_sweep(args, knob, sweep_values);
    if (*coverage_cmd) return cmd_coverage(args, fractions, coverage_model);
    if (*diagnose_cmd) return cmd_diagnose(args, student_raw);
    if (*synth_cmd)
      return cmd_synth(args, sy_students, sy_exercises, sy_concepts, sy_logs, sy_slip,
                       sy_guess);
    if (*gradcheck_cmd) return cmd_gradcheck(gc_seed, gc_tol);
    if (*export_cmd)
      return cmd_export_embeddings(args, dense_filter, min_student, min_exercise);
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const RunError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 1;
}

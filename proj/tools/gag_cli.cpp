// Command-line front end: dataset ingestion, synthetic stream generation,
// offline training, the full streaming protocol, and report pretty-printing.
//
// Exit codes: 0 success, 1 usage/config error, 2 data error, 3 numeric
// failure.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gag/gag.hpp"

namespace {

constexpr const char* kLibraryVersion = "gag 0.1.0";

std::string trim(const std::string& text) {
  const auto begin = text.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = text.find_last_not_of(" \t\r");
  return text.substr(begin, end - begin + 1);
}

// Applies a flat key=value config file by rewriting the argument list:
// each `key=value` line becomes `--key=value` unless the flag was already
// given on the command line, so explicit flags always win.
std::vector<std::string> expand_config_args(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string config_path;
  std::vector<std::string> out;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) {
        throw gag::ConfigError("--config requires a file path");
      }
      config_path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
    } else {
      out.push_back(args[i]);
    }
  }
  if (config_path.empty()) return out;

  std::set<std::string> given;
  for (const auto& token : out) {
    if (token.rfind("--", 0) == 0) {
      given.insert(token.substr(0, token.find('=')));
    }
  }
  std::ifstream in(config_path);
  if (!in) throw gag::DataError("cannot open config file " + config_path);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string content = trim(line);
    if (content.empty() || content[0] == '#') continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) {
      throw gag::ConfigError(config_path + ":" + std::to_string(line_no) +
                             ": expected key=value");
    }
    std::string key = trim(content.substr(0, eq));
    const std::string value = trim(content.substr(eq + 1));
    while (!key.empty() && key.front() == '-') key.erase(key.begin());
    if (key.empty()) {
      throw gag::ConfigError(config_path + ":" + std::to_string(line_no) +
                             ": empty key");
    }
    const std::string flag = "--" + key;
    if (!given.contains(flag)) out.push_back(flag + "=" + value);
  }
  return out;
}

struct RunConfig {
  std::string corpus_path;
  std::string checkpoint_path;  // empty = train from scratch
  std::string output_path = "report.jsonl";
  std::string manifest_path;  // empty = derived from output_path
  std::string save_checkpoint_path;
  std::string save_reservoir_path;
  std::string model_kind = "gag";  // gag | pop | spop
  std::string variant = "full";
  std::string distance = "wasserstein";
  std::size_t embed_dim = 200;
  std::size_t num_layers = 1;
  double learning_rate = 0.003;
  std::size_t batch_size = 100;
  std::size_t offline_epochs = 10;
  std::size_t online_epochs = 1;
  std::size_t reservoir_divisor = 100;
  std::size_t window_divisor = 2;
  std::vector<int> k_values = {5, 10, 20};
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  bool edge_out_uses_receiver = false;
  bool pop_online = false;
  bool timings = false;
  double train_frac = 0.6;
  std::size_t num_chunks = 5;
};

nlohmann::json run_config_json(const RunConfig& cfg) {
  nlohmann::json j;
  j["corpus"] = cfg.corpus_path;
  j["checkpoint"] = cfg.checkpoint_path;
  j["output"] = cfg.output_path;
  j["save_checkpoint"] = cfg.save_checkpoint_path;
  j["save_reservoir"] = cfg.save_reservoir_path;
  j["model"] = cfg.model_kind;
  j["variant"] = cfg.variant;
  j["distance"] = cfg.distance;
  j["embed_dim"] = cfg.embed_dim;
  j["num_layers"] = cfg.num_layers;
  j["learning_rate"] = cfg.learning_rate;
  j["batch_size"] = cfg.batch_size;
  j["offline_epochs"] = cfg.offline_epochs;
  j["online_epochs"] = cfg.online_epochs;
  j["reservoir_divisor"] = cfg.reservoir_divisor;
  j["window_divisor"] = cfg.window_divisor;
  j["k_values"] = cfg.k_values;
  j["seed"] = cfg.seed;
  j["workers"] = cfg.workers;
  j["edge_out_uses_receiver"] = cfg.edge_out_uses_receiver;
  j["pop_online"] = cfg.pop_online;
  j["timings"] = cfg.timings;
  j["train_frac"] = cfg.train_frac;
  j["num_chunks"] = cfg.num_chunks;
  return j;
}

RunConfig run_config_from_json(const nlohmann::json& j) {
  RunConfig cfg;
  cfg.corpus_path = j.at("corpus").get<std::string>();
  cfg.checkpoint_path = j.at("checkpoint").get<std::string>();
  cfg.output_path = j.at("output").get<std::string>();
  cfg.save_checkpoint_path = j.value("save_checkpoint", std::string{});
  cfg.save_reservoir_path = j.value("save_reservoir", std::string{});
  cfg.model_kind = j.at("model").get<std::string>();
  cfg.variant = j.at("variant").get<std::string>();
  cfg.distance = j.at("distance").get<std::string>();
  cfg.embed_dim = j.at("embed_dim").get<std::size_t>();
  cfg.num_layers = j.at("num_layers").get<std::size_t>();
  cfg.learning_rate = j.at("learning_rate").get<double>();
  cfg.batch_size = j.at("batch_size").get<std::size_t>();
  cfg.offline_epochs = j.at("offline_epochs").get<std::size_t>();
  cfg.online_epochs = j.at("online_epochs").get<std::size_t>();
  cfg.reservoir_divisor = j.at("reservoir_divisor").get<std::size_t>();
  cfg.window_divisor = j.at("window_divisor").get<std::size_t>();
  cfg.k_values = j.at("k_values").get<std::vector<int>>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.workers = j.at("workers").get<std::size_t>();
  cfg.edge_out_uses_receiver = j.at("edge_out_uses_receiver").get<bool>();
  cfg.pop_online = j.at("pop_online").get<bool>();
  cfg.timings = j.at("timings").get<bool>();
  cfg.train_frac = j.at("train_frac").get<double>();
  cfg.num_chunks = j.at("num_chunks").get<std::size_t>();
  return cfg;
}

gag::ModelConfig model_config_from(const RunConfig& cfg) {
  gag::ModelConfig model;
  model.embed_dim = cfg.embed_dim;
  model.num_layers = cfg.num_layers;
  model.learning_rate = cfg.learning_rate;
  model.batch_size = cfg.batch_size;
  model.rng_seed = cfg.seed;
  model.edge_out_uses_receiver = cfg.edge_out_uses_receiver;
  return model;
}

gag::StreamOptions stream_options_from(const RunConfig& cfg) {
  gag::StreamOptions opt;
  opt.model = model_config_from(cfg);
  opt.offline_epochs = cfg.offline_epochs;
  opt.online_epochs = cfg.online_epochs;
  opt.reservoir_divisor = cfg.reservoir_divisor;
  opt.window_divisor = cfg.window_divisor;
  opt.distance = gag::distance_kind_from_string(cfg.distance);
  opt.variant = gag::variant_from_string(cfg.variant);
  opt.k_values = cfg.k_values;
  opt.train_frac = cfg.train_frac;
  opt.num_chunks = cfg.num_chunks;
  opt.workers = cfg.workers;
  return opt;
}

void add_model_flags(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--embed-dim", cfg.embed_dim, "embedding size")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--num-layers", cfg.num_layers, "stacked layer count")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--lr", cfg.learning_rate, "Adam learning rate")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--batch-size", cfg.batch_size, "training batch size")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--seed", cfg.seed, "RNG seed")->capture_default_str();
  cmd->add_flag("--edge-out-uses-receiver", cfg.edge_out_uses_receiver,
                "feed receiver features to the out-edge map");
}

int do_ingest(const std::string& input, const std::string& output,
              double gap_hours, std::size_t top_items) {
  const auto gap_seconds = static_cast<std::int64_t>(gap_hours * 3600.0);
  const gag::Corpus corpus = gag::ingest_events(input, gap_seconds, top_items);
  gag::save_corpus(corpus, output);
  std::cout << corpus.sessions.size() << " sessions, " << corpus.num_items()
            << " items, " << corpus.num_users() << " users -> " << output
            << "\n";
  return 0;
}

int do_synth(const gag::SynthOptions& opt, const std::string& output) {
  const auto records = gag::generate_synth_log(opt);
  gag::write_event_log(records, output);
  std::cout << records.size() << " events across " << opt.num_sessions
            << " sessions -> " << output << "\n";
  return 0;
}

int do_train(const RunConfig& cfg) {
  if (cfg.checkpoint_path.empty()) {
    throw gag::ConfigError("train: --checkpoint output path required");
  }
  const gag::Corpus corpus = gag::load_corpus(cfg.corpus_path);
  const gag::ChronologicalSplit split =
      gag::chronological_split(corpus, cfg.train_frac, cfg.num_chunks);

  std::size_t items = 0, users = 0;
  for (const auto& s : split.train) {
    users = std::max(users, static_cast<std::size_t>(s.user_id) + 1);
    for (gag::ItemId item : s.items) {
      items = std::max(items, static_cast<std::size_t>(item) + 1);
    }
  }
  gag::ModelParams model = gag::init_model(model_config_from(cfg), items, users);
  gag::Rng rng(gag::mix_seed(cfg.seed, 0x74726169ULL));
  const gag::TrainStats stats =
      gag::train_minibatch(model, split.train, cfg.offline_epochs, rng, 1e-3);
  gag::save_checkpoint(model, cfg.checkpoint_path);

  std::cout << "trained " << stats.epochs_run << " epochs ("
            << stats.adam_steps << " steps) on " << split.train.size()
            << " sessions";
  if (!stats.epoch_mean_losses.empty()) {
    std::cout << ", final mean loss " << stats.epoch_mean_losses.back();
  }
  std::cout << " -> " << cfg.checkpoint_path << "\n";
  return 0;
}

void print_reports(const std::vector<gag::ChunkReport>& reports) {
  for (const auto& r : reports) {
    std::printf("chunk %d: %zu sessions, %zu events", r.chunk_index,
                r.session_count, r.event_count);
    for (std::size_t ki = 0; ki < r.k_values.size(); ++ki) {
      std::printf("  R@%d=%.4f MRR@%d=%.4f", r.k_values[ki], r.recall[ki],
                  r.k_values[ki], r.mrr[ki]);
    }
    std::printf("\n");
  }
}

int do_run(const RunConfig& cfg) {
  const gag::Corpus corpus = gag::load_corpus(cfg.corpus_path);
  const gag::StreamOptions opt = stream_options_from(cfg);

  gag::StreamResult result;
  if (cfg.model_kind == "gag") {
    std::optional<gag::ModelParams> initial;
    if (!cfg.checkpoint_path.empty()) {
      initial = gag::load_checkpoint(cfg.checkpoint_path);
    }
    result = gag::run_stream(corpus, opt, std::move(initial));
    if (!cfg.save_checkpoint_path.empty()) {
      gag::save_checkpoint(result.model, cfg.save_checkpoint_path);
    }
    if (!cfg.save_reservoir_path.empty()) {
      gag::save_reservoir(result.reservoir, cfg.save_reservoir_path);
    }
  } else {
    result = gag::run_baseline_stream(
        corpus, opt, gag::baseline_from_string(cfg.model_kind),
        cfg.pop_online);
  }

  gag::write_report_jsonl(result.reports, cfg.output_path, cfg.timings);

  const std::string manifest_path = cfg.manifest_path.empty()
                                        ? cfg.output_path + ".manifest.json"
                                        : cfg.manifest_path;
  nlohmann::json manifest;
  manifest["command"] = "run";
  manifest["library"] = kLibraryVersion;
  manifest["config"] = run_config_json(cfg);
  manifest["corpus_sha1"] = gag::file_blob_sha1(cfg.corpus_path);
  manifest["final_num_items"] = result.final_num_items;
  manifest["final_num_users"] = result.final_num_users;
  std::ofstream mout(manifest_path, std::ios::trunc | std::ios::binary);
  if (!mout) throw gag::DataError("cannot write manifest " + manifest_path);
  mout << manifest.dump(2) << "\n";

  print_reports(result.reports);
  std::cout << "report -> " << cfg.output_path << "\nmanifest -> "
            << manifest_path << "\n";
  return 0;
}

int do_report(const std::string& input) {
  const auto reports = gag::read_report_jsonl(input);
  if (reports.empty()) throw gag::DataError("no report lines in " + input);
  std::printf("%-6s %-9s %-8s", "chunk", "sessions", "events");
  for (int k : reports.front().k_values) {
    std::printf(" %-10s %-10s", ("R@" + std::to_string(k)).c_str(),
                ("MRR@" + std::to_string(k)).c_str());
  }
  std::printf("\n");
  for (const auto& r : reports) {
    std::printf("%-6d %-9zu %-8zu", r.chunk_index, r.session_count,
                r.event_count);
    for (std::size_t ki = 0; ki < r.k_values.size(); ++ki) {
      std::printf(" %-10.4f %-10.4f", r.recall[ki], r.mrr[ki]);
    }
    std::printf("\n");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"streaming session-based recommender (global-attributed "
               "session graphs + distance-weighted reservoir)",
               "gag"};
  app.require_subcommand(1);

  // ingest
  std::string ingest_input, ingest_output = "corpus.jsonl";
  double ingest_gap_hours = 8.0;
  std::size_t ingest_top_items = 10000;
  CLI::App* ingest = app.add_subcommand(
      "ingest", "preprocess a (user, item, timestamp) event log");
  std::string config_doc;
  ingest->add_option("--config", config_doc,
                     "flat key=value config file; flags override it");
  ingest->add_option("--input", ingest_input, "event log path (.gz accepted)")
      ->required();
  ingest->add_option("--output", ingest_output, "corpus file to write")
      ->capture_default_str();
  ingest->add_option("--gap-hours", ingest_gap_hours, "session gap in hours")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  ingest
      ->add_option("--top-items", ingest_top_items,
                   "keep only the N most frequent items")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  // synth
  gag::SynthOptions synth_opt;
  std::string synth_output = "synth_log.tsv";
  double synth_gap_hours = 8.0;
  CLI::App* synth = app.add_subcommand(
      "synth", "generate a synthetic drifting event stream");
  synth->add_option("--config", config_doc,
                    "flat key=value config file; flags override it");
  synth->add_option("--output", synth_output, "event log to write")
      ->capture_default_str();
  synth->add_option("--users", synth_opt.num_users, "user count")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  synth->add_option("--items", synth_opt.num_items, "base catalog size")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  synth->add_option("--sessions", synth_opt.num_sessions, "session count")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  synth
      ->add_option("--drift-at", synth_opt.drift_at,
                   "stream fraction where preferences drift")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  synth
      ->add_option("--drift-share", synth_opt.drift_share,
                   "share of users that drift")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  synth
      ->add_option("--novel-rate", synth_opt.novel_rate,
                   "share of post-split sessions with a brand-new item")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  synth->add_option("--taste-size", synth_opt.taste_size, "items per user cycle")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  synth->add_option("--noise", synth_opt.noise, "random-jump probability")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  synth->add_option("--min-len", synth_opt.min_session_len, "min session length")
      ->capture_default_str();
  synth->add_option("--max-len", synth_opt.max_session_len, "max session length")
      ->capture_default_str();
  synth->add_option("--gap-hours", synth_gap_hours, "session gap in hours")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  synth->add_option("--seed", synth_opt.seed, "RNG seed")->capture_default_str();

  // train
  RunConfig train_cfg;
  CLI::App* train = app.add_subcommand(
      "train", "offline training only; writes a checkpoint");
  train->add_option("--config", config_doc,
                    "flat key=value config file; flags override it");
  train->add_option("--corpus", train_cfg.corpus_path, "corpus file")
      ->required();
  train
      ->add_option("--checkpoint", train_cfg.checkpoint_path,
                   "checkpoint file to write")
      ->required();
  train
      ->add_option("--offline-epochs", train_cfg.offline_epochs,
                   "training epochs")
      ->capture_default_str();
  train
      ->add_option("--train-frac", train_cfg.train_frac,
                   "chronological training fraction")
      ->capture_default_str();
  add_model_flags(train, train_cfg);

  // run
  RunConfig run_cfg;
  std::string replay_manifest;
  CLI::App* run =
      app.add_subcommand("run", "full streaming protocol with online updates");
  run->add_option("--config", config_doc,
                  "flat key=value config file; flags override it");
  auto* corpus_opt =
      run->add_option("--corpus", run_cfg.corpus_path, "corpus file");
  run->add_option("--checkpoint", run_cfg.checkpoint_path,
                  "start from this checkpoint instead of offline training");
  auto* output_opt = run->add_option("--output", run_cfg.output_path,
                                     "JSON-lines report path");
  output_opt->capture_default_str();
  run->add_option("--manifest", run_cfg.manifest_path,
                  "manifest path (default: <output>.manifest.json)");
  run->add_option("--save-checkpoint", run_cfg.save_checkpoint_path,
                  "write the post-stream model here");
  run->add_option("--save-reservoir", run_cfg.save_reservoir_path,
                  "write the post-stream reservoir snapshot here");
  run->add_option("--model", run_cfg.model_kind, "gag | pop | spop")
      ->check(CLI::IsMember({"gag", "pop", "spop"}))
      ->capture_default_str();
  run->add_option("--variant", run_cfg.variant,
                  "full | static | ran-uni | fix-new | wass-uni")
      ->check(CLI::IsMember({"full", "static", "ran-uni", "fix-new",
                             "wass-uni"}))
      ->capture_default_str();
  run->add_option("--distance", run_cfg.distance, "wasserstein | kl | tv")
      ->check(CLI::IsMember({"wasserstein", "kl", "tv"}))
      ->capture_default_str();
  run->add_option("--offline-epochs", run_cfg.offline_epochs,
                  "offline epochs when no checkpoint is given")
      ->capture_default_str();
  run->add_option("--online-epochs", run_cfg.online_epochs,
                  "passes per online update")
      ->capture_default_str();
  run->add_option("--reservoir-divisor", run_cfg.reservoir_divisor,
                  "reservoir capacity = train size / divisor")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  run->add_option("--window-divisor", run_cfg.window_divisor,
                  "window = chunk size / divisor")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  run->add_option("--k", run_cfg.k_values, "cutoffs for Recall@K/MRR@K")
      ->delimiter(',')
      ->capture_default_str();
  run->add_option("--train-frac", run_cfg.train_frac,
                  "chronological training fraction")
      ->capture_default_str();
  run->add_option("--num-chunks", run_cfg.num_chunks, "test chunk count")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  run->add_option("--workers", run_cfg.workers, "evaluation worker threads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  run->add_flag("--pop-online", run_cfg.pop_online,
                "update POP counts during the stream");
  run->add_flag("--timings", run_cfg.timings,
                "include wall times in the report file");
  run->add_option("--replay-manifest", replay_manifest,
                  "re-run with the config echoed in a manifest");
  add_model_flags(run, run_cfg);

  // report
  std::string report_input;
  CLI::App* report =
      app.add_subcommand("report", "pretty-print a JSON-lines report");
  report->add_option("--input", report_input, "report file")->required();

  try {
    std::vector<std::string> args = expand_config_args(argc, argv);
    std::reverse(args.begin(), args.end());  // CLI11 consumes back to front
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const gag::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const gag::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*ingest) {
      return do_ingest(ingest_input, ingest_output, ingest_gap_hours,
                       ingest_top_items);
    }
    if (*synth) {
      synth_opt.gap_seconds =
          static_cast<std::int64_t>(synth_gap_hours * 3600.0);
      return do_synth(synth_opt, synth_output);
    }
    if (*train) return do_train(train_cfg);
    if (*run) {
      if (!replay_manifest.empty()) {
        std::ifstream in(replay_manifest);
        if (!in) {
          throw gag::DataError("cannot open manifest " + replay_manifest);
        }
        nlohmann::json manifest;
        in >> manifest;
        RunConfig replayed = run_config_from_json(manifest.at("config"));
        if (output_opt->count() > 0) replayed.output_path = run_cfg.output_path;
        replayed.manifest_path = run_cfg.manifest_path;
        return do_run(replayed);
      }
      if (corpus_opt->count() == 0) {
        throw gag::ConfigError("run: --corpus is required");
      }
      return do_run(run_cfg);
    }
    if (*report) return do_report(report_input);
  } catch (const gag::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const gag::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const gag::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

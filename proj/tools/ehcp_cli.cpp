// ehcp: command-line front end (synthetic data, ingest, train, validate,
// play reports, player tables, partial dependence, HTTP service).
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ehcp/bundle.hpp"
#include "ehcp/csv.hpp"
#include "ehcp/ehcp.hpp"
#include "ehcp/evaluation.hpp"
#include "ehcp/model_file.hpp"
#include "ehcp/service.hpp"
#include "ehcp/synthetic.hpp"

namespace fs = std::filesystem;
using namespace ehcp;

namespace {

struct SamplerFlags {
  std::uint64_t seed = 1;
  int chains = 0;  // 0: per-kind default
  int trees = 200;
  int draws = 1000;
  int burnin = 1000;
};

void add_sampler_flags(CLI::App* cmd, SamplerFlags& f) {
  cmd->add_option("--seed", f.seed, "RNG seed")->capture_default_str();
  cmd->add_option("--chains", f.chains, "MCMC chains (default 4 logistic, 1 BART)");
  cmd->add_option("--trees", f.trees, "BART trees")->capture_default_str();
  cmd->add_option("--draws", f.draws, "kept draws per chain")->capture_default_str();
  cmd->add_option("--burnin", f.burnin, "warmup iterations per chain")->capture_default_str();
}

TrainOptions train_options(const SamplerFlags& f, ModelKind kind) {
  TrainOptions o;
  o.kind = kind;
  o.logistic.chains = f.chains > 0 ? f.chains : 4;
  o.logistic.samples = f.draws;
  o.logistic.warmup = f.burnin;
  o.logistic.seed = f.seed;
  o.bart.chains = f.chains > 0 ? f.chains : 1;
  o.bart.num_trees = f.trees;
  o.bart.draws = f.draws;
  o.bart.burn_in = f.burnin;
  o.bart.seed = f.seed;
  return o;
}

struct ImputationFlags {
  std::size_t imputations = 100;
  std::string mode = "joint";
  std::uint64_t seed = 1;
};

void add_imputation_flags(CLI::App* cmd, ImputationFlags& f) {
  cmd->add_option("--imputations", f.imputations, "imputations M per estimate")->capture_default_str();
  cmd->add_option("--mode", f.mode, "imputation mode")->check(CLI::IsMember({"joint", "per-group"}))->capture_default_str();
  cmd->add_option("--seed", f.seed, "imputation seed")->capture_default_str();
}

ImputationRequest imputation_request(const ImputationFlags& f) {
  ImputationRequest r;
  r.m = f.imputations;
  r.mode = parse_imputation_mode(f.mode);
  return r;
}

void write_text(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
  } else {
    write_file_atomic(path, content);
  }
}

std::string pct(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", 100.0 * p);
  return buf;
}

ModelFile load_model_checked(const std::string& path, const DataBundle* data) {
  ModelFile m = load_model_file(path);
  if (data && dataset_fingerprint(m.schema, data->features) != m.fingerprint) {
    std::cerr << "note: model was trained on a different dataset than " << "the one supplied\n";
  }
  return m;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Expected hypothetical completion probability from player tracking data"};
  app.require_subcommand(1);

  // synth
  std::string synth_out;
  int synth_games = 4, synth_plays = 30, synth_routes = 3;
  std::uint64_t synth_seed = 1;
  auto* synth = app.add_subcommand("synth", "write a synthetic tracking + plays dataset");
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--games", synth_games)->capture_default_str();
  synth->add_option("--plays", synth_plays, "plays per game")->capture_default_str();
  synth->add_option("--routes", synth_routes, "route runners per play")->capture_default_str();
  synth->add_option("--seed", synth_seed)->capture_default_str();

  // ingest
  std::string tracking_path, plays_path, mapping_path, ingest_out;
  auto* ingest = app.add_subcommand("ingest", "parse, validate and assemble raw CSV into a data bundle");
  ingest->add_option("--tracking", tracking_path)->required()->check(CLI::ExistingFile);
  ingest->add_option("--plays", plays_path)->required()->check(CLI::ExistingFile);
  ingest->add_option("--mapping", mapping_path, "column mapping file (default: Big Data Bowl layout)")
      ->check(CLI::ExistingFile);
  ingest->add_option("--out", ingest_out, "bundle directory")->required();

  // train
  std::string data_dir, model_kind = "bart", model_out;
  SamplerFlags train_flags;
  auto* train = app.add_subcommand("train", "fit a model and write the model file");
  train->add_option("--data", data_dir, "bundle directory")->required();
  train->add_option("--model", model_kind)->check(CLI::IsMember({"logistic", "bart"}))->capture_default_str();
  train->add_option("--out", model_out, "model file")->required();
  add_sampler_flags(train, train_flags);

  // validate
  SamplerFlags val_flags;
  int splits = 10;
  double train_frac = 0.75;
  std::string val_csv;
  auto* validate = app.add_subcommand("validate", "repeated train/test comparison of both models");
  validate->add_option("--data", data_dir)->required();
  validate->add_option("--splits", splits)->capture_default_str();
  validate->add_option("--train-frac", train_frac)->capture_default_str();
  validate->add_option("--csv", val_csv, "also write per-split metrics");
  add_sampler_flags(validate, val_flags);

  // play
  std::string model_path, json_out, plot_out;
  std::int64_t game_id = 0, play_id = 0;
  double grid_step = 0.5;
  ImputationFlags play_flags;
  auto* play = app.add_subcommand("play", "EHCP trajectories for every receiver on one play");
  play->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
  play->add_option("--data", data_dir)->required();
  play->add_option("--game", game_id)->required();
  play->add_option("--play", play_id)->required();
  play->add_option("--grid-step", grid_step, "seconds between trajectory points")->capture_default_str();
  play->add_option("--json", json_out, "write the structured report here");
  play->add_option("--plot-csv", plot_out, "write trajectory points as CSV");
  add_imputation_flags(play, play_flags);

  // report
  std::size_t min_passes = 100, min_targets = 40;
  std::string report_csv;
  ImputationFlags report_flags;
  auto* report = app.add_subcommand("report", "player tables from EHCP at the actual throw time");
  report->require_subcommand(1);
  auto* qb = report->add_subcommand("qb", "how often each passer targets the highest / lowest EHCP receiver");
  auto* receiver = report->add_subcommand("receiver", "fitted minus EHCP per receiver");
  for (auto* sub : {qb, receiver}) {
    sub->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
    sub->add_option("--data", data_dir)->required();
    sub->add_option("--csv", report_csv, "also write the table as CSV");
    add_imputation_flags(sub, report_flags);
  }
  qb->add_option("--min-passes", min_passes)->capture_default_str();
  receiver->add_option("--min-targets", min_targets)->capture_default_str();

  // pdp
  std::string variable, pdp_csv;
  int points = 20;
  auto* pdp = app.add_subcommand("pdp", "partial dependence on one covariate");
  pdp->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
  pdp->add_option("--data", data_dir)->required();
  pdp->add_option("--variable", variable)->required();
  pdp->add_option("--game", game_id, "base pass (default: first pass in the bundle)");
  pdp->add_option("--play", play_id);
  pdp->add_option("--points", points)->capture_default_str();
  pdp->add_option("--csv", pdp_csv);

  // importance
  auto* imp = app.add_subcommand("importance", "posterior mean splitting probabilities (BART)");
  imp->add_option("--model", model_path)->required()->check(CLI::ExistingFile);

  // serve
  std::string host = "127.0.0.1";
  int port = 8080;
  ImputationFlags serve_flags;
  auto* srv = app.add_subcommand("serve", "read-only HTTP query service");
  srv->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
  srv->add_option("--data", data_dir)->required();
  srv->add_option("--host", host)->capture_default_str();
  srv->add_option("--port", port)->capture_default_str();
  srv->add_option("--grid-step", grid_step)->capture_default_str();
  add_imputation_flags(srv, serve_flags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) {
      const auto ds = generate_synthetic_dataset(synth_seed, synth_games, synth_plays, synth_routes);
      fs::create_directories(synth_out);
      std::ostringstream t, p;
      write_tracking_csv(t, ds.frames);
      write_plays_csv(p, ds.metas);
      write_file_atomic((fs::path(synth_out) / "tracking.csv").string(), t.str());
      write_file_atomic((fs::path(synth_out) / "plays.csv").string(), p.str());
      std::cout << "wrote " << ds.metas.size() << " plays to " << synth_out << "\n";
    } else if (*ingest) {
      const ColumnMapping mapping = mapping_path.empty() ? ColumnMapping::big_data_bowl() : ColumnMapping::load(mapping_path);
      const DataBundle b = ingest_files(tracking_path, plays_path, mapping);
      write_bundle(b, ingest_out);
      std::cout << "plays assembled: " << b.plays.size() << "\n"
                << "plays excluded:  " << b.excluded.size() << "\n"
                << "rows rejected:   " << b.rejections.size() << "\n"
                << "passes:          " << b.features.size() << "\n";
    } else if (*train) {
      const DataBundle b = load_bundle(data_dir);
      const TrainOptions opt = train_options(train_flags, parse_model_kind(model_kind));
      ModelFile f;
      f.schema = CovariateSchema::standard();
      f.options = opt;
      f.model = train_model(f.schema, b.features, opt);
      f.fingerprint = dataset_fingerprint(f.schema, b.features);
      save_model_file(model_out, f);
      std::cout << "trained " << model_kind << " on " << b.features.size() << " passes, "
                << f.model.draw_count() << " draws -> " << model_out << "\n";
      if (const auto* l = std::get_if<LogisticPosterior>(&f.model.posterior)) {
        for (const auto& w : l->warnings) std::cerr << "warning: " << w << "\n";
      } else {
        const auto& bp = std::get<BartPosterior>(f.model.posterior);
        std::cout << "acceptance grow/prune/change: " << bp.grow_acceptance << " / " << bp.prune_acceptance
                  << " / " << bp.change_acceptance << "\n";
      }
    } else if (*validate) {
      const DataBundle b = load_bundle(data_dir);
      ValidationConfig cfg;
      cfg.n_splits = splits;
      cfg.train_frac = train_frac;
      cfg.seed = val_flags.seed;
      cfg.options = train_options(val_flags, ModelKind::bart);
      const ValidationResult r = validation_experiment(CovariateSchema::standard(), b.features, cfg);
      std::cout << format_validation_table(r);
      if (!val_csv.empty()) {
        std::ostringstream out;
        write_validation_csv(out, r);
        write_file_atomic(val_csv, out.str());
      }
    } else if (*play) {
      const DataBundle b = load_bundle(data_dir);
      const ModelFile m = load_model_checked(model_path, &b);
      const PlaySequence* ps = b.find({game_id, play_id});
      if (!ps) throw InputError("play " + std::to_string(game_id) + "/" + std::to_string(play_id) + " not in the bundle");
      PlayReportConfig cfg;
      cfg.step = grid_step;
      cfg.imputation = imputation_request(play_flags);
      cfg.seed = play_flags.seed;
      const nlohmann::json rep = play_report(m.model, *ps, b.pool, cfg);
      std::ostringstream text, plot;
      text << "play " << game_id << "/" << play_id << "  model " << rep["model"].get<std::string>() << "  M="
           << cfg.imputation.m << " mode=" << to_string(cfg.imputation.mode) << " seed=" << cfg.seed << "\n";
      csv::write_row(plot, {"receiver", "name", "t", "mean", "lower", "upper"});
      for (const auto& r : rep["receivers"]) {
        text << "\nreceiver " << r["id"].get<std::int64_t>() << " " << r["name"].get<std::string>()
             << (r["targeted"].get<bool>() ? " (targeted)" : "") << "\n";
        text << "     t    mean    2.5%   97.5%\n";
        for (const auto& pt : r["trajectory"]) {
          char line[96];
          std::snprintf(line, sizeof line, "%6.1f %7s %7s %7s\n", pt["t"].get<double>(), pct(pt["mean"].get<double>()).c_str(),
                        pct(pt["lower"].get<double>()).c_str(), pct(pt["upper"].get<double>()).c_str());
          text << line;
          csv::write_row(plot, {std::to_string(r["id"].get<std::int64_t>()), r["name"].get<std::string>(),
                                csv::format_double(pt["t"].get<double>()), csv::format_double(pt["mean"].get<double>()),
                                csv::format_double(pt["lower"].get<double>()), csv::format_double(pt["upper"].get<double>())});
        }
        for (const auto& n : r["notices"]) text << "  " << n.get<std::string>() << "\n";
      }
      if (rep.contains("actual_pass")) {
        const auto& a = rep["actual_pass"];
        text << "\nactual pass to " << a["receiver"].get<std::int64_t>() << " at t=" << a["throw_time"].get<double>()
             << (a["caught"].get<int>() ? " (caught)" : " (not caught)") << ": fitted "
             << pct(a["fitted"]["mean"].get<double>()) << "% [" << pct(a["fitted"]["lower"].get<double>()) << ", "
             << pct(a["fitted"]["upper"].get<double>()) << "], EHCP at throw "
             << pct(a["ehcp_at_throw"]["mean"].get<double>()) << "%\n";
      }
      std::cout << text.str();
      if (!json_out.empty()) write_file_atomic(json_out, rep.dump(2) + "\n");
      if (!plot_out.empty()) write_file_atomic(plot_out, plot.str());
    } else if (*report) {
      const DataBundle b = load_bundle(data_dir);
      const ModelFile m = load_model_checked(model_path, &b);
      const auto passes = analyze_passes(m.model, b.plays, b.pool, imputation_request(report_flags), report_flags.seed);
      std::ostringstream table;
      if (*qb) {
        const auto rows = qb_target_analysis(passes, min_passes);
        std::cout << format_qb_table(rows);
        write_qb_csv(table, rows);
      } else {
        const auto rows = receiver_differential(passes, min_targets);
        std::cout << format_receiver_table(rows);
        write_receiver_csv(table, rows);
      }
      if (!report_csv.empty()) write_file_atomic(report_csv, table.str());
    } else if (*pdp) {
      const DataBundle b = load_bundle(data_dir);
      const ModelFile m = load_model_checked(model_path, &b);
      if (!m.schema.index_of(variable)) throw InputError("unknown covariate '" + variable + "'");
      const PassFeatureVector* base = &b.features.front();
      if (pdp->count("--game") || pdp->count("--play")) {
        base = nullptr;
        for (const auto& f : b.features) {
          if (f.play == PlayKey{game_id, play_id}) base = &f;
        }
        if (!base) throw InputError("no pass with features for play " + std::to_string(game_id) + "/" + std::to_string(play_id));
      }
      const auto grid = default_pdp_grid(m.schema, b.features, variable, points);
      const auto curve = partial_dependence(m.model, base->values, variable, grid);
      std::ostringstream out;
      csv::write_row(out, {"value", "mean", "lower", "upper"});
      for (const auto& p : curve) {
        csv::write_row(out, {csv::format_double(p.value), csv::format_double(p.mean), csv::format_double(p.lower),
                             csv::format_double(p.upper)});
      }
      write_text(pdp_csv, out.str());
    } else if (*imp) {
      const ModelFile m = load_model_checked(model_path, nullptr);
      const auto* bp = std::get_if<BartPosterior>(&m.model.posterior);
      if (!bp) throw InputError("splitting importance needs a BART model");
      for (const auto& v : splitting_importance(*bp)) {
        char line[96];
        std::snprintf(line, sizeof line, "%-28s %6.2f%%\n", v.name.c_str(), 100.0 * v.split_probability);
        std::cout << line;
      }
    } else if (*srv) {
      DataBundle b = load_bundle(data_dir);
      ModelFile m = load_model_checked(model_path, &b);
      ServiceDefaults d;
      d.imputations = serve_flags.imputations;
      d.mode = parse_imputation_mode(serve_flags.mode);
      d.grid_step = grid_step;
      d.seed = serve_flags.seed;
      const EhcpService service(std::move(m), std::move(b), d);
      HttpServer server(service);
      const int bound = server.start(host, port);
      std::cerr << "serving on http://" << host << ":" << bound << "\n";
      server.wait();
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

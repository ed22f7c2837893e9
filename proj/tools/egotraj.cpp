// Batch front-end: synth -> extract -> curate -> stats/export/eval.
// Exit codes: 0 success, 1 partial (some episodes failed), 2 invalid invocation.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "egotraj/errors.hpp"
#include "egotraj/logging.hpp"
#include "egotraj/pipeline.hpp"

namespace {

using egotraj::RunConfig;

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw egotraj::IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

struct CliOptions {
  RunConfig config;
  std::string delta_rotation_mode = "elementwise";
  std::string input;
  std::string output;
  std::string gt_manifest;
  std::string recovered_manifest;
  std::string report = "eval_report.json";
  int count = 1;
  bool json_output = false;
};

void add_common_flags(CLI::App* cmd, CliOptions& opt) {
  cmd->add_option("--jobs", opt.config.jobs, "Worker threads for episode-parallel stages")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", opt.config.seed, "Seed for deterministic shuffling/generation");
}

int dispatch(CLI::App& app, CliOptions& opt, const CLI::App* extract, const CLI::App* curate,
             const CLI::App* stats, const CLI::App* do_export, const CLI::App* synth,
             const CLI::App* eval) {
  const auto mode = egotraj::delta_rotation_mode_from_string(opt.delta_rotation_mode);
  if (!mode) {
    std::cerr << "error: --delta-rotation-mode must be 'elementwise' or 'relative'\n";
    return 2;
  }
  opt.config.delta_rotation_mode = *mode;

  if (app.got_subcommand(extract)) {
    const egotraj::ExtractOutcome out =
        egotraj::run_extract(opt.input, opt.output, opt.config);
    std::cout << "extracted " << out.n_ok << " episode(s), " << out.n_failed
              << " failure(s); manifest: " << out.manifest_path.string() << "\n";
    return out.n_failed > 0 ? 1 : 0;
  }
  if (app.got_subcommand(curate)) {
    const egotraj::CurateOutcome out = egotraj::run_curate(opt.input, opt.config);
    std::cout << "kept " << out.kept << ", rejected " << out.rejected
              << "; report: " << out.csv_path.string() << "\n";
    return 0;
  }
  if (app.got_subcommand(stats)) {
    std::cout << egotraj::run_stats(opt.input, opt.json_output);
    return 0;
  }
  if (app.got_subcommand(do_export)) {
    const egotraj::ExportOutcome out =
        egotraj::run_export(opt.input, opt.output, opt.config);
    std::cout << "exported " << out.total_chunks << " chunk(s) into " << out.shards
              << " shard(s); index: " << out.index_path.string() << "\n";
    return 0;
  }
  if (app.got_subcommand(synth)) {
    const egotraj::SceneSpec spec = egotraj::SceneSpec::from_json(read_text(opt.input));
    const egotraj::SynthOutcome out =
        egotraj::run_synth(spec, opt.count, opt.config.seed, opt.output, opt.config);
    std::cout << "generated " << out.generated
              << " episode(s); bundles: " << out.bundles_manifest.string()
              << "; ground truth: " << out.gt_manifest.string() << "\n";
    return 0;
  }
  if (app.got_subcommand(eval)) {
    const egotraj::EvalOutcome out =
        egotraj::run_eval(opt.gt_manifest, opt.recovered_manifest, opt.report);
    std::cout << "evaluated " << out.episodes
              << " episode(s); mean ATE-RMSE " << out.mean_ate_rmse_m
              << " m, max rotation geodesic " << out.max_rot_geodesic_deg
              << " deg; report: " << out.report_path.string() << "\n";
    return 0;
  }
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  std::setvbuf(stdout, nullptr, _IOLBF, 0);

  CLI::App app{"egocentric object-manipulation trajectory pipeline"};
  app.require_subcommand(1);
  CliOptions opt;

  CLI::App* extract = app.add_subcommand(
      "extract", "Register track bundles into the start frame and extract 6DoF trajectories");
  extract->add_option("input", opt.input, "Directory of .egtr track bundles")->required();
  extract->add_option("output", opt.output, "Output dataset directory")->required();
  extract->add_option("--max-correspondence-dist", opt.config.registration.max_correspondence_dist,
                      "ICP correspondence rejection distance (m)");
  extract->add_option("--color-weight", opt.config.registration.color_weight,
                      "Blend of RGB distance into correspondence weights [0,1]");
  extract->add_option("--max-iterations", opt.config.registration.max_iterations,
                      "ICP iteration cap");
  add_common_flags(extract, opt);

  CLI::App* curate = app.add_subcommand("curate", "Apply travel-distance and BGTS filters");
  curate->add_option("manifest", opt.input, "Dataset manifest to curate")->required();
  curate->add_option("--delta-td", opt.config.curation.delta_td_m,
                     "Travel distance threshold (m)");
  curate->add_option("--delta-bgts", opt.config.curation.delta_bgts,
                     "Background track similarity threshold");
  curate->add_option("--delta-rotation-mode", opt.delta_rotation_mode,
                     "Action rotation displacement: elementwise|relative");
  add_common_flags(curate, opt);

  CLI::App* stats = app.add_subcommand("stats", "Dataset statistics (episodes/verbs/objects)");
  stats->add_option("manifest", opt.input, "Dataset manifest")->required();
  stats->add_flag("--json", opt.json_output, "Emit JSON instead of text");

  CLI::App* do_export = app.add_subcommand("export", "Export kept episodes as training shards");
  do_export->add_option("manifest", opt.input, "Curated dataset manifest")->required();
  do_export->add_option("output", opt.output, "Shard output directory")->required();
  do_export->add_option("--horizon", opt.config.horizon, "Action chunk horizon H")
      ->check(CLI::PositiveNumber);
  do_export->add_option("--shard-size", opt.config.shard_size, "Chunks per shard")
      ->check(CLI::PositiveNumber);
  do_export->add_option("--delta-rotation-mode", opt.delta_rotation_mode,
                        "Must match the mode recorded at curation time");
  add_common_flags(do_export, opt);

  CLI::App* synth = app.add_subcommand("synth", "Generate synthetic track bundles + ground truth");
  synth->add_option("spec", opt.input, "SceneSpec JSON file")->required();
  synth->add_option("output", opt.output, "Output directory")->required();
  synth->add_option("--count", opt.count, "Number of episodes (seeds seed..seed+count-1)")
      ->check(CLI::PositiveNumber);
  add_common_flags(synth, opt);

  CLI::App* eval = app.add_subcommand("eval", "Compare recovered trajectories to ground truth");
  eval->add_option("gt_manifest", opt.gt_manifest, "Ground-truth manifest")->required();
  eval->add_option("recovered_manifest", opt.recovered_manifest, "Recovered manifest")->required();
  eval->add_option("-o,--output", opt.report, "Metrics JSON path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    return dispatch(app, opt, extract, curate, stats, do_export, synth, eval);
  } catch (const egotraj::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 2;
  }
}

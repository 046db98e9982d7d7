#include "plume/cli/cli.hpp"

#include "plume/core/cube_io.hpp"
#include "plume/core/error.hpp"
#include "plume/core/morphology.hpp"
#include "plume/detect/ace.hpp"
#include "plume/eval/report.hpp"
#include "plume/identify/identify.hpp"
#include "plume/kernels/kernels.hpp"
#include "plume/segment/watershed.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>

namespace plume::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::string out_dir = ".";
  std::optional<double> far;
  std::optional<int> min_roi_size;
  std::optional<double> h_minima;
  std::optional<std::string> sign_mode;
  std::vector<std::string> methods;
  bool quiet = false;
};

/// Config file (or defaults) with flag overrides applied and validated.
eval::ExperimentConfig resolve(const Common& c) {
  eval::ExperimentConfig cfg = c.config.empty() ? eval::ExperimentConfig::defaults() : eval::load_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (c.far) cfg.far = *c.far;
  if (c.min_roi_size) cfg.min_roi_size = *c.min_roi_size;
  if (c.h_minima) cfg.h_minima = *c.h_minima;
  if (c.sign_mode) {
    try {
      cfg.identifier.sign_mode = bg::parse_sign_mode(*c.sign_mode);
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
    cfg.grids.sign_mode = cfg.identifier.sign_mode;
  }
  if (!c.methods.empty()) {
    cfg.methods.clear();
    for (const auto& m : c.methods) cfg.methods.push_back(bg::parse_method(m));
  }
  cfg.validate();
  return cfg;
}

void apply_workers(const Common& c) {
  int n = 0;
  if (c.workers) {
    n = *c.workers;
  } else if (const char* env = std::getenv("PLUME_BENCH_WORKERS")) {
    try {
      n = std::stoi(env);
    } catch (const std::exception&) {
      throw ConfigError(std::string("PLUME_BENCH_WORKERS is not an integer: '") + env + "'");
    }
  }
  if (n < 0) throw ConfigError("worker count must be >= 0");
  kernels::set_worker_count(n);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  os << text;
  if (!os) throw IoError("write failed for '" + path.string() + "'");
}

/// Creates the output directory and records the resolved config there, so the
/// run can be repeated with `--config <dir>/resolved_config.json`.
fs::path prepare_out(const Common& c, const eval::ExperimentConfig& cfg, const json& command) {
  const fs::path dir(c.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
  write_text(dir / "resolved_config.json", cfg.to_json().dump(2) + "\n");
  write_text(dir / "command.json", command.dump(2) + "\n");
  return dir;
}

identify::SpectralLibrary default_library(const eval::ExperimentConfig& cfg) {
  return identify::SpectralLibrary::from_gases(sim::builtin_gases(SpectralGrid::lwir(cfg.scene.bands)));
}

double find_strength(const eval::ExperimentConfig& cfg, const sim::GasSpec& gas, double target) {
  sim::CalibrationConfig cc = cfg.calibration;
  cc.target_tpr = target;
  cc.far = cfg.far;
  cc.seed = eval::calibration_seed(cfg);
  return sim::calibrate_strength(sim::random_plume_factory(cfg.scene, cfg.plume), gas, cc).n_c_max;
}

LabelImage rois_to_labels(const std::vector<PixelMask>& rois, int height, int width) {
  LabelImage img{height, width, std::vector<int>(static_cast<std::size_t>(height) * width, 0)};
  for (std::size_t r = 0; r < rois.size(); ++r) {
    for (int p = 0; p < height * width; ++p) {
      if (rois[r].test(p)) img.labels[static_cast<std::size_t>(p)] = static_cast<int>(r) + 1;
    }
  }
  return img;
}

void check_shape(const PixelMask& m, const RadianceCube& cube, const char* what) {
  if (m.height() != cube.height() || m.width() != cube.width()) {
    throw ConfigError(std::string(what) + " does not match the cube dimensions");
  }
}

bg::Hyperparams estimator_params(bg::Method m, int k, const std::string& linkage, bool bts,
                                 const eval::ExperimentConfig& cfg) {
  if (m == bg::Method::KNS) {
    bg::KnsParams p;
    p.min_pixels = k > 0 ? k : p.min_pixels;
    try {
      p.linkage = bg::parse_linkage(linkage);
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
    p.use_bts = bts;
    p.sign_mode = cfg.grids.sign_mode;
    return bg::Hyperparams::of(p);
  }
  if (m != bg::Method::Global && k <= 0) throw ConfigError("--k is required for " + bg::to_string(m));
  return bg::Hyperparams::of(m, k, cfg.grids.kmeans_seed);
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void print_error(std::ostream& err, const char* kind, const std::string& message) {
  err << json{{"error", kind}, {"message", message}}.dump() << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Gas-plume background estimation benchmark"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  Common c;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", c.config, "JSON experiment config")->check(CLI::ExistingFile);
    sub->add_option("--seed", c.seed, "Master seed");
    sub->add_option("--workers", c.workers, "Worker threads (0 = all cores; env PLUME_BENCH_WORKERS)");
    sub->add_option("--out-dir", c.out_dir, "Output directory");
    sub->add_option("--far", c.far, "Detection false-alarm rate");
    sub->add_option("--min-roi-size", c.min_roi_size, "Smallest ROI kept, in pixels");
    sub->add_option("--h-minima", c.h_minima, "Watershed h-minima depth");
    sub->add_option("--sign-mode", c.sign_mode, "absorption | emission | free");
    sub->add_flag("--quiet", c.quiet, "No progress output");
  };

  std::string gas = "SF6";
  std::optional<double> n_c_max, strength;
  int index = 0;
  std::string cube_path, roi_path, exclude_path, background_path, library_path;
  int k = 0;
  std::string linkage = "average";
  bool bts = false;

  auto* scene = app.add_subcommand("scene", "Simulate one background scene");
  add_common(scene);
  scene->add_option("--index", index, "Scenario index");

  auto* plume = app.add_subcommand("plume", "Embed a gas plume in a simulated scene");
  add_common(plume);
  plume->add_option("--gas", gas, "Built-in gas name");
  plume->add_option("--index", index, "Scenario index");
  auto* plume_n = plume->add_option("--n-c-max", n_c_max, "Peak concentration pathlength");
  plume->add_option("--strength", strength, "Calibrate n_c_max to this target TPR")->excludes(plume_n);

  auto* calibrate = app.add_subcommand("calibrate", "Calibrate plume strength to a target TPR");
  add_common(calibrate);
  calibrate->add_option("--gas", gas, "Built-in gas name");
  calibrate->add_option("--strength", strength, "Target TPR")->required();

  auto* detect = app.add_subcommand("detect", "ACE detection and ROI extraction");
  add_common(detect);
  detect->add_option("--cube", cube_path, "Radiance cube")->required()->check(CLI::ExistingFile);
  detect->add_option("--gas", gas, "Target gas");
  detect->add_option("--exclude", exclude_path, "Mask of pixels left out of whitening and the threshold")
      ->check(CLI::ExistingFile);

  auto* segment = app.add_subcommand("segment", "Watershed segmentation of a cube");
  add_common(segment);
  segment->add_option("--cube", cube_path, "Radiance cube")->required()->check(CLI::ExistingFile);

  auto* estimate = app.add_subcommand("estimate", "Background estimate under a ROI");
  add_common(estimate);
  estimate->add_option("--cube", cube_path, "Radiance cube")->required()->check(CLI::ExistingFile);
  estimate->add_option("--roi", roi_path, "ROI mask")->required()->check(CLI::ExistingFile);
  estimate->add_option("--method", c.methods, "Estimator")->required()->expected(1);
  estimate->add_option("--k", k, "Clusters, components, neighbors, dilations or KNS minimum pixels");
  estimate->add_option("--linkage", linkage, "KNS linkage: single | complete | average");
  estimate->add_flag("--bts", bts, "KNS with background-target separation");

  auto* ident = app.add_subcommand("identify", "Identify the gas in a ROI");
  add_common(ident);
  ident->add_option("--cube", cube_path, "Radiance cube")->required()->check(CLI::ExistingFile);
  ident->add_option("--roi", roi_path, "ROI mask")->required()->check(CLI::ExistingFile);
  ident->add_option("--background", background_path, "Estimate CSV (default: Global)")->check(CLI::ExistingFile);
  ident->add_option("--library", library_path, "Library CSV (default: built-in gases)")->check(CLI::ExistingFile);

  auto* sweep = app.add_subcommand("sweep", "Hyperparameter sweeps on one simulated plume");
  add_common(sweep);
  sweep->add_option("--gas", gas, "Built-in gas name");
  sweep->add_option("--index", index, "Scenario index");
  auto* sweep_n = sweep->add_option("--n-c-max", n_c_max, "Peak concentration pathlength");
  sweep->add_option("--strength", strength, "Calibrate n_c_max to this target TPR")->excludes(sweep_n);
  sweep->add_option("--method", c.methods, "Restrict to these estimators");

  auto* report = app.add_subcommand("report", "Full desk-scale benchmark");
  add_common(report);
  report->add_option("--method", c.methods, "Restrict to these estimators");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    print_error(err, "config", e.what());
    return kConfigError;
  }

  try {
    apply_workers(c);
    const eval::ExperimentConfig cfg = resolve(c);
    auto progress = [&](const std::string& s) {
      if (!c.quiet) err << s << '\n';
    };
    json command{{"command", app.get_subcommands().front()->get_name()}, {"args", args}};

    if (scene->parsed()) {
      const fs::path dir = prepare_out(c, cfg, command);
      const auto sc = eval::scenario_for(cfg, index);
      write_cube(sc.scene->cube, dir / "scene.hsi");
      write_cube(sc.scene->l_off, dir / "l_off.hsi");
      write_labels({sc.scene->surface.height, sc.scene->surface.width, sc.scene->surface.material_label},
                   dir / "materials.lbl");
      ScalarMap temp(sc.scene->surface.height, sc.scene->surface.width);
      temp.values = sc.scene->surface.temperature_k;
      write_scalar_map(temp, dir / "temperature.map");
      out << (dir / "scene.hsi").string() << '\n';
    } else if (plume->parsed()) {
      const fs::path dir = prepare_out(c, cfg, command);
      const sim::GasSpec g = eval::config_gas(cfg, gas);
      const double n = n_c_max ? *n_c_max : find_strength(cfg, g, strength.value_or(0.5));
      const auto sc = eval::scenario_for(cfg, index);
      const auto emb = sim::embed_plume(sc.scene->cube, sc.scene->surface, sc.scene->atmosphere, g, sc.density, n,
                                        cfg.calibration.t_min_k);
      write_cube(emb.cube, dir / "cube.hsi");
      write_cube(emb.truth.l_off_true, dir / "l_off_true.hsi");
      write_mask(emb.truth.roi_truth, dir / "roi_truth.mask");
      write_scalar_map(emb.truth.density, dir / "density.map");
      write_scalar_map(emb.truth.concentration_pathlength, dir / "pathlength.map");
      write_scalar_map(emb.truth.plume_temperature_k, dir / "plume_temperature.map");
      const json info{{"gas", g.name}, {"n_c_max", n}, {"plume_pixels", emb.truth.roi_truth.count()},
                      {"index", index}};
      write_text(dir / "plume.json", info.dump(2) + "\n");
      out << info.dump() << '\n';
    } else if (calibrate->parsed()) {
      const fs::path dir = prepare_out(c, cfg, command);
      const sim::GasSpec g = eval::config_gas(cfg, gas);
      sim::CalibrationConfig cc = cfg.calibration;
      cc.target_tpr = *strength;
      cc.far = cfg.far;
      cc.seed = eval::calibration_seed(cfg);
      if (!(cc.target_tpr > 0.0 && cc.target_tpr < 1.0)) throw ConfigError("--strength must lie in (0, 1)");
      const auto r = sim::calibrate_strength(sim::random_plume_factory(cfg.scene, cfg.plume), g, cc);
      json j{{"gas", g.name},          {"target_tpr", cc.target_tpr}, {"n_c_max", r.n_c_max},
             {"achieved_tpr", r.achieved_tpr}, {"steps", r.steps},        {"trace", json::array()}};
      for (const auto& p : r.trace) j["trace"].push_back({{"n_c_max", p.n_c_max}, {"tpr", p.tpr}});
      write_text(dir / "calibration.json", j.dump(2) + "\n");
      out << num(r.n_c_max) << '\n';
    } else if (detect->parsed()) {
      const fs::path dir = prepare_out(c, cfg, command);
      const RadianceCube cube = read_cube(cube_path);
      const sim::GasSpec g = eval::config_gas(cfg, gas);
      if (g.absorption.size() != cube.bands()) throw ConfigError("gas signature and cube band counts differ");
      std::optional<PixelMask> exclude;
      if (!exclude_path.empty()) {
        exclude = read_mask(exclude_path);
        check_shape(*exclude, cube, "--exclude mask");
      }
      const auto model = detect::WhiteningModel::fit(cube, exclude ? &*exclude : nullptr);
      const ScalarMap scores = detect::ace_map(model, cube, g.absorption);
      std::optional<PixelMask> background;
      if (exclude) background = ~*exclude;
      const double thr = detect::far_threshold(scores, cfg.far, background ? &*background : nullptr);
      const auto rois = detect::rois_above(scores, thr, cfg.min_roi_size);
      write_scalar_map(scores, dir / "ace.map");
      write_labels(rois_to_labels(rois, cube.height(), cube.width()), dir / "rois.lbl");
      json j{{"threshold", thr}, {"far", cfg.far}, {"rois", json::array()}};
      std::size_t largest = 0;
      for (std::size_t i = 0; i < rois.size(); ++i) {
        j["rois"].push_back({{"label", i + 1}, {"pixels", rois[i].count()}});
        if (rois[i].count() > rois[largest].count()) largest = i;
      }
      if (!rois.empty()) write_mask(rois[largest], dir / "roi.mask");
      write_text(dir / "detection.json", j.dump(2) + "\n");
      out << rois.size() << " ROI(s)\n";
    } else if (segment->parsed()) {
      const fs::path dir = prepare_out(c, cfg, command);
      const RadianceCube cube = read_cube(cube_path);
      const ScalarMap grad = segment::spectral_gradient(cube);
      const double h = cfg.h_minima.value_or(segment::default_h(grad));
      const auto segs = segment::watershed(grad, h, &cube);
      write_labels({segs.height, segs.width, segs.labels}, dir / "segments.lbl");
      write_text(dir / "segments.json", json{{"segment_count", segs.segment_count}, {"h", h}}.dump(2) + "\n");
      out << segs.segment_count << " segment(s)\n";
    } else if (estimate->parsed()) {
      const fs::path dir = prepare_out(c, cfg, command);
      const RadianceCube cube = read_cube(cube_path);
      const PixelMask roi = read_mask(roi_path);
      check_shape(roi, cube, "--roi mask");
      const auto problem = bg::BackgroundProblem::with_guardrail(cube, roi);
      const bg::Hyperparams hp = estimator_params(cfg.methods.front(), k, linkage, bts, cfg);
      std::optional<segment::SegmentMap> segs;
      if (hp.method == bg::Method::KNS) segs = segment::segment_cube(cube, cfg.h_minima);
      const auto e = bg::estimate(problem, hp, segs ? &*segs : nullptr);
      bg::write_estimate(e, dir / "background.csv");
      out << (dir / "background.csv").string() << '\n';
    } else if (ident->parsed()) {
      const fs::path dir = prepare_out(c, cfg, command);
      const RadianceCube cube = read_cube(cube_path);
      const PixelMask roi = read_mask(roi_path);
      check_shape(roi, cube, "--roi mask");
      const auto problem = bg::BackgroundProblem::with_guardrail(cube, roi);
      const bg::BackgroundEstimate e =
          background_path.empty() ? bg::estimate_global(problem) : bg::read_estimate(background_path, cube.width());
      if (e.roi_pixels != problem.roi_pixels()) throw ConfigError("background estimate does not cover the ROI");
      const auto lib = library_path.empty() ? default_library(cfg) : identify::read_library(library_path);
      if (lib.bands() != cube.bands()) throw ConfigError("library and cube band counts differ");
      const PixelMask fit_exclude = problem.roi() | problem.guard();
      const auto model = detect::WhiteningModel::fit(cube, &fit_exclude);
      auto r = identify::identify(identify::whitened_superpixel(model, cube, e), lib, model, cfg.identifier.beta,
                                  cfg.identifier.sign_mode);
      r.method = bg::to_string(e.method());
      r.hyperparams = e.hyperparams.label();
      write_text(dir / "identification.json", identify::to_json(r) + "\n");
      out << r.top << ' ' << num(r.confidence_of(r.top)) << '\n';
    } else if (sweep->parsed()) {
      const fs::path dir = prepare_out(c, cfg, command);
      const sim::GasSpec g = eval::config_gas(cfg, gas);
      const double target = strength.value_or(0.5);
      const double n = n_c_max ? *n_c_max : find_strength(cfg, g, target);
      auto built = eval::build_case(cfg, eval::scenario_for(cfg, index), g, target, n, index);
      if (!built.plume_case) throw NumericalError("plume was not detected; no ROI to sweep");
      const auto lib = default_library(cfg);
      eval::CaseEvaluator ev(*built.plume_case, lib, cfg.identifier, cfg.h_minima);
      std::ofstream summary(dir / "sweep_summary.csv");
      if (!summary) throw IoError("cannot write sweep_summary.csv");
      summary << "method,objective,grid_size,missing,best_setting,best_response,sensitivity_std\n";
      for (bg::Method m : cfg.methods) {
        const auto sw = ev.sweep(m, cfg.grids.grid(m));
        std::ofstream os(dir / ("sweep_" + bg::to_string(m) + ".csv"));
        if (!os) throw IoError("cannot write sweep file");
        os << "setting,bg_mse,id_confidence,error\n";
        for (std::size_t i = 0; i < sw.bg_mse.grid.size(); ++i) {
          const auto& a = sw.bg_mse.grid[i];
          const auto& b = sw.id_confidence.grid[i];
          os << '"' << a.hp.label() << "\"," << (a.response ? num(*a.response) : "") << ','
             << (b.response ? num(*b.response) : "") << ",\"" << a.error << "\"\n";
        }
        for (const auto* rep : {&sw.bg_mse, &sw.id_confidence}) {
          summary << bg::to_string(m) << ',' << eval::to_string(rep->objective) << ',' << rep->grid.size() << ','
                  << rep->missing << ",\"" << (rep->has_best() ? rep->best_point().hp.label() : "") << "\","
                  << (rep->has_best() ? num(rep->best_response()) : "") << ',' << num(rep->sensitivity) << '\n';
        }
        progress("swept " + bg::to_string(m));
      }
      const json info{{"case_id", built.plume_case->id}, {"n_c_max", n},
                      {"roi_pixels", built.plume_case->roi.count()}, {"oracle_confidence", ev.oracle_confidence()}};
      write_text(dir / "case.json", info.dump(2) + "\n");
      out << info.dump() << '\n';
    } else if (report->parsed()) {
      const fs::path dir = prepare_out(c, cfg, command);
      const auto result = eval::run_report(cfg, progress);
      eval::write_report(result, cfg, dir);
      out << result.cases.size() << " case(s), " << result.undetected.size() << " undetected; wrote "
          << dir.string() << '\n';
    }
  } catch (const ConfigError& e) {
    print_error(err, "config", e.what());
    return kConfigError;
  } catch (const NumericalError& e) {
    print_error(err, "numerical", e.what());
    return kNumericalError;
  } catch (const ParseError& e) {
    print_error(err, "parse", e.what());
    return kIoError;
  } catch (const IoError& e) {
    print_error(err, "io", e.what());
    return kIoError;
  } catch (const DomainError& e) {
    print_error(err, "domain", e.what());
    return kDomainError;
  } catch (const std::exception& e) {
    print_error(err, "internal", e.what());
    return kFailure;
  }
  return kOk;
}

}  // namespace plume::cli

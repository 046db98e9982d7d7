#include "plume/eval/report.hpp"

#include "plume/core/error.hpp"
#include "plume/core/random.hpp"
#include "plume/core/stats.hpp"
#include "plume/detect/ace.hpp"
#include "plume/eval/svg.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>

namespace plume::eval {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string opt(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

std::string strength_tag(double s) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02d", static_cast<int>(std::lround(s * 100)));
  return buf;
}

int overlap(const PixelMask& a, const PixelMask& b) { return (a & b).count(); }

std::ofstream open_csv(const std::filesystem::path& p) {
  std::ofstream os(p);
  if (!os) throw IoError("cannot open '" + p.string() + "' for writing");
  return os;
}

template <typename T>
T mode_of(const std::vector<T>& v) {
  std::map<T, int> counts;
  for (const auto& x : v) ++counts[x];
  T best = v.front();
  int n = 0;
  for (const auto& [x, c] : counts) {
    if (c > n) {
      best = x;
      n = c;
    }
  }
  return best;
}

}  // namespace

Detection detect_plume(const RadianceCube& cube, const sim::PlumeTruth& truth, const sim::GasSpec& gas, double far,
                       int min_size) {
  Detection d;
  const auto model = detect::WhiteningModel::fit(cube, &truth.roi_truth);
  const ScalarMap scores = detect::ace_map(model, cube, gas.absorption);
  const PixelMask background = ~truth.roi_truth;
  const double threshold = detect::far_threshold(scores, far, &background);
  d.tpr = detect::exceedance_rate(scores, threshold, truth.roi_truth);
  for (double s : scores.values) d.detected_pixels += s > threshold;

  auto pick = [&](const std::vector<PixelMask>& rois) -> std::optional<PixelMask> {
    int best = 0;
    std::optional<PixelMask> out;
    for (const auto& r : rois) {
      const int o = overlap(r, truth.roi_truth);
      if (o > best) {
        best = o;
        out = r;
      }
    }
    return out;
  };
  d.roi = pick(detect::rois_above(scores, threshold, min_size));
  if (!d.roi && min_size > 1) d.roi = pick(detect::rois_above(scores, threshold, 1));
  return d;
}

std::string case_id(const std::string& gas, double strength, int seed_index) {
  return gas + "-t" + strength_tag(strength) + "-s" + std::to_string(seed_index);
}

BuiltCase build_case(const ExperimentConfig& config, const sim::PlumeScenario& scenario, const sim::GasSpec& gas,
                     double strength, double n_c_max, int seed_index) {
  auto emb = sim::embed_plume(scenario.scene->cube, scenario.scene->surface, scenario.scene->atmosphere, gas,
                              scenario.density, n_c_max, config.calibration.t_min_k);
  BuiltCase out;
  out.detection = detect_plume(emb.cube, emb.truth, gas, config.far, config.min_roi_size);
  if (out.detection.roi) {
    out.plume_case = PlumeCase{case_id(gas.name, strength, seed_index), gas.name, strength,
                               static_cast<std::uint64_t>(seed_index), n_c_max, std::move(emb.cube),
                               std::move(emb.truth), *out.detection.roi};
  }
  return out;
}

sim::PlumeScenario scenario_for(const ExperimentConfig& config, int index) {
  if (index < 0) throw ConfigError("scenario index must be >= 0");
  const auto factory = sim::random_plume_factory(config.scene, config.plume);
  return factory(derive_seed(config.seed, 200 + static_cast<std::uint64_t>(index)));
}

std::uint64_t calibration_seed(const ExperimentConfig& config) { return derive_seed(config.seed, 100); }

sim::GasSpec config_gas(const ExperimentConfig& config, const std::string& name) {
  try {
    return sim::builtin_gas(SpectralGrid::lwir(config.scene.bands), name);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
}

ReportResult run_report(const ExperimentConfig& config, const Progress& progress) {
  config.validate();
  auto say = [&](const std::string& s) {
    if (progress) progress(s);
  };
  const SpectralGrid grid = SpectralGrid::lwir(config.scene.bands);
  std::vector<sim::GasSpec> gases;
  for (const auto& name : config.gases) gases.push_back(config_gas(config, name));
  const auto library = identify::SpectralLibrary::from_gases(sim::builtin_gases(grid));
  const sim::ScenarioFactory factory = sim::random_plume_factory(config.scene, config.plume);

  ReportResult result;
  std::map<std::pair<std::size_t, std::size_t>, double> strength_of;
  for (std::size_t g = 0; g < gases.size(); ++g) {
    for (std::size_t s = 0; s < config.strengths.size(); ++s) {
      sim::CalibrationConfig cc = config.calibration;
      cc.target_tpr = config.strengths[s];
      cc.far = config.far;
      cc.seed = calibration_seed(config);
      CalibrationRow row{gases[g].name, config.strengths[s], sim::calibrate_strength(factory, gases[g], cc)};
      strength_of[{g, s}] = row.result.n_c_max;
      say("calibrated " + row.gas + " @ " + num(row.strength) + ": n_c_max=" + num(row.result.n_c_max) +
          " tpr=" + num(row.result.achieved_tpr));
      result.calibrations.push_back(std::move(row));
    }
  }

  std::vector<sim::PlumeScenario> scenarios;
  for (int k = 0; k < config.scene_seeds; ++k) scenarios.push_back(scenario_for(config, k));

  struct Job {
    std::size_t gas, strength;
    int seed;
  };
  std::vector<Job> jobs;
  for (std::size_t g = 0; g < gases.size(); ++g) {
    for (std::size_t s = 0; s < config.strengths.size(); ++s) {
      for (int k = 0; k < config.scene_seeds; ++k) jobs.push_back({g, s, k});
    }
  }
  std::vector<std::optional<CaseRecord>> records(jobs.size());
  std::vector<std::string> ids(jobs.size());
  std::vector<std::string> errors(jobs.size());

#pragma omp parallel for schedule(dynamic)
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    const Job job = jobs[j];
    const auto& gas = gases[job.gas];
    const double strength = config.strengths[job.strength];
    ids[j] = case_id(gas.name, strength, job.seed);
    try {
      const double n_c_max = strength_of.at({job.gas, job.strength});
      BuiltCase built = build_case(config, scenarios[static_cast<std::size_t>(job.seed)], gas, strength, n_c_max,
                                   job.seed);
      if (!built.plume_case) continue;
      const PlumeCase& pc = *built.plume_case;
      const Detection& det = built.detection;
      CaseRecord rec;
      rec.id = pc.id;
      rec.gas = pc.gas;
      rec.strength = strength;
      rec.seed_index = job.seed;
      rec.n_c_max = n_c_max;
      rec.plume_pixels = pc.truth.roi_truth.count();
      rec.roi_pixels = pc.roi.count();
      rec.roi_overlap = overlap(pc.roi, pc.truth.roi_truth);
      rec.detection_tpr = det.tpr;

      CaseEvaluator ev(pc, library, config.identifier, config.h_minima);
      rec.oracle_confidence = ev.oracle_confidence();
      for (bg::Method m : config.methods) {
        const auto sweeps = ev.sweep(m, config.grids.grid(m));
        MethodOutcome o;
        o.grid_size = static_cast<int>(sweeps.bg_mse.grid.size());
        o.mse_missing = sweeps.bg_mse.missing;
        o.mse_sensitivity = sweeps.bg_mse.sensitivity;
        if (sweeps.bg_mse.has_best()) {
          o.mse = sweeps.bg_mse.best_response();
          o.mse_hp = sweeps.bg_mse.best_point().hp.label();
          o.mse_k = sweeps.bg_mse.best_point().hp.k;
        }
        o.confidence_missing = sweeps.id_confidence.missing;
        o.confidence_sensitivity = sweeps.id_confidence.sensitivity;
        if (sweeps.id_confidence.has_best()) {
          o.confidence = sweeps.id_confidence.best_response();
          o.confidence_hp = sweeps.id_confidence.best_point().hp.label();
          o.confidence_k = sweeps.id_confidence.best_point().hp.k;
        }
        rec.methods[m] = std::move(o);
      }
      records[j] = std::move(rec);
    } catch (const std::exception& e) {
      errors[j] = e.what();
    }
#pragma omp critical(report_progress)
    say("case " + ids[j] + (records[j] ? " done" : " skipped"));
  }

  for (std::size_t j = 0; j < jobs.size(); ++j) {
    if (!errors[j].empty()) throw NumericalError("case " + ids[j] + " failed: " + errors[j]);
    if (records[j]) {
      result.cases.push_back(std::move(*records[j]));
    } else {
      result.undetected.push_back(ids[j]);
    }
  }
  std::sort(result.cases.begin(), result.cases.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  std::sort(result.undetected.begin(), result.undetected.end());
  return result;
}

std::vector<MethodSummary> aggregate(const std::vector<CaseRecord>& cases, const std::vector<bg::Method>& methods) {
  std::vector<MethodSummary> out;
  for (bg::Method m : methods) {
    MethodSummary s{m};
    std::vector<double> mse, conf, mse_imp, conf_imp, g_mse, g_conf;
    for (const auto& c : cases) {
      const auto it = c.methods.find(m);
      if (it == c.methods.end()) continue;
      const auto g = c.methods.find(bg::Method::Global);
      const MethodOutcome& o = it->second;
      if (o.mse) {
        mse.push_back(*o.mse);
        if (g != c.methods.end() && g->second.mse && *o.mse > 0.0) {
          mse_imp.push_back(*g->second.mse / *o.mse);
          g_mse.push_back(*g->second.mse);
        }
      }
      if (o.confidence) {
        conf.push_back(*o.confidence);
        if (g != c.methods.end() && g->second.confidence && *g->second.confidence > 0.0) {
          conf_imp.push_back(*o.confidence / *g->second.confidence);
          g_conf.push_back(*g->second.confidence);
        }
      }
    }
    s.cases = static_cast<int>(std::max(mse.size(), conf.size()));
    if (!mse.empty()) {
      s.median_mse = median(mse);
      s.mean_mse = mean(mse);
    }
    if (!conf.empty()) {
      s.median_confidence = median(conf);
      s.mean_confidence = mean(conf);
    }
    if (!mse_imp.empty()) {
      s.median_mse_improvement = median(mse_imp);
      s.ratio_of_median_mse = median(g_mse) / s.median_mse;
    }
    if (!conf_imp.empty()) {
      s.median_confidence_improvement = median(conf_imp);
      s.ratio_of_median_confidence = s.median_confidence / median(g_conf);
    }
    out.push_back(s);
  }
  return out;
}

Paired paired_confidence(const std::vector<CaseRecord>& cases, bg::Method a, bg::Method b) {
  Paired p;
  for (const auto& c : cases) {
    const auto ia = c.methods.find(a);
    const auto ib = c.methods.find(b);
    if (ia == c.methods.end() || ib == c.methods.end() || !ia->second.confidence || !ib->second.confidence) continue;
    p.a.push_back(*ia->second.confidence);
    p.b.push_back(*ib->second.confidence);
  }
  return p;
}

Paired paired_oracle_confidence(const std::vector<CaseRecord>& cases, bg::Method b) {
  Paired p;
  for (const auto& c : cases) {
    const auto ib = c.methods.find(b);
    if (ib == c.methods.end() || !ib->second.confidence) continue;
    p.a.push_back(c.oracle_confidence);
    p.b.push_back(*ib->second.confidence);
  }
  return p;
}

void write_report(const ReportResult& result, const ExperimentConfig& config, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto& methods = config.methods;
  const bool has_global = std::find(methods.begin(), methods.end(), bg::Method::Global) != methods.end();

  auto median_sens = [&](bg::Method m, bool mse) {
    std::vector<double> v;
    for (const auto& c : result.cases) {
      const auto it = c.methods.find(m);
      if (it != c.methods.end()) v.push_back(mse ? it->second.mse_sensitivity : it->second.confidence_sensitivity);
    }
    return v.empty() ? 0.0 : median(v);
  };
  std::vector<double> oracle;
  for (const auto& c : result.cases) oracle.push_back(c.oracle_confidence);

  {
    auto os = open_csv(dir / "summary.csv");
    os << "method,cases,median_mse,mean_mse,median_mse_improvement,ratio_of_median_mse,median_mse_sensitivity,"
          "median_confidence,mean_confidence,median_confidence_improvement,ratio_of_median_confidence,"
          "median_confidence_sensitivity\n";
    for (const auto& s : aggregate(result.cases, methods)) {
      os << bg::to_string(s.method) << ',' << s.cases << ',' << num(s.median_mse) << ',' << num(s.mean_mse) << ','
         << (has_global ? num(s.median_mse_improvement) : "") << ',' << (has_global ? num(s.ratio_of_median_mse) : "")
         << ',' << num(median_sens(s.method, true)) << ',' << num(s.median_confidence) << ','
         << num(s.mean_confidence) << ',' << (has_global ? num(s.median_confidence_improvement) : "") << ','
         << (has_global ? num(s.ratio_of_median_confidence) : "") << ',' << num(median_sens(s.method, false)) << '\n';
    }
    if (!oracle.empty()) {
      std::vector<double> imp;
      std::vector<double> g;
      for (const auto& c : result.cases) {
        const auto it = c.methods.find(bg::Method::Global);
        if (it != c.methods.end() && it->second.confidence && *it->second.confidence > 0.0) {
          imp.push_back(c.oracle_confidence / *it->second.confidence);
          g.push_back(*it->second.confidence);
        }
      }
      os << "Oracle," << oracle.size() << ",0,0,,,0," << num(median(oracle)) << ',' << num(mean(oracle)) << ','
         << (imp.empty() ? "" : num(median(imp))) << ',' << (g.empty() ? "" : num(median(oracle) / median(g)))
         << ",0\n";
    }
  }

  auto write_slices = [&](const std::filesystem::path& path, const std::string& key_name, auto key_of) {
    std::map<std::string, std::vector<CaseRecord>> slices;
    for (const auto& c : result.cases) slices[key_of(c)].push_back(c);
    auto os = open_csv(path);
    os << key_name << ",method,cases,median_mse,median_mse_improvement,median_confidence,median_confidence_improvement\n";
    for (const auto& [key, cs] : slices) {
      for (const auto& s : aggregate(cs, methods)) {
        os << key << ',' << bg::to_string(s.method) << ',' << s.cases << ',' << num(s.median_mse) << ','
           << (has_global ? num(s.median_mse_improvement) : "") << ',' << num(s.median_confidence) << ','
           << (has_global ? num(s.median_confidence_improvement) : "") << '\n';
      }
      std::vector<double> o;
      for (const auto& c : cs) o.push_back(c.oracle_confidence);
      os << key << ",Oracle," << cs.size() << ",0,," << num(median(o)) << ",\n";
    }
  };
  write_slices(dir / "per_gas.csv", "gas", [](const CaseRecord& c) { return c.gas; });
  write_slices(dir / "per_strength.csv", "strength", [](const CaseRecord& c) { return num(c.strength); });

  {
    auto os = open_csv(dir / "hyperparams.csv");
    os << "method,objective,cases,mode_k,median_k,mode_setting\n";
    for (bg::Method m : methods) {
      if (m == bg::Method::Global) continue;
      for (bool mse : {true, false}) {
        std::vector<double> ks;
        std::vector<int> ki;
        std::vector<std::string> labels;
        for (const auto& c : result.cases) {
          const auto it = c.methods.find(m);
          if (it == c.methods.end()) continue;
          const MethodOutcome& o = it->second;
          if (mse ? !o.mse : !o.confidence) continue;
          const int k = mse ? o.mse_k : o.confidence_k;
          ks.push_back(k);
          ki.push_back(k);
          labels.push_back(mse ? o.mse_hp : o.confidence_hp);
        }
        if (ks.empty()) continue;
        os << bg::to_string(m) << ',' << (mse ? "bg_mse" : "id_confidence") << ',' << ks.size() << ','
           << mode_of(ki) << ',' << num(median(ks)) << ",\"" << mode_of(labels) << "\"\n";
      }
    }
  }

  {
    auto os = open_csv(dir / "sensitivity.csv");
    os << "case_id,method,objective,grid_size,missing,sensitivity_std\n";
    for (const auto& c : result.cases) {
      for (const auto& [m, o] : c.methods) {
        os << c.id << ',' << bg::to_string(m) << ",bg_mse," << o.grid_size << ',' << o.mse_missing << ','
           << num(o.mse_sensitivity) << '\n';
        os << c.id << ',' << bg::to_string(m) << ",id_confidence," << o.grid_size << ',' << o.confidence_missing << ','
           << num(o.confidence_sensitivity) << '\n';
      }
    }
  }

  {
    auto os = open_csv(dir / "cases.csv");
    os << "case_id,gas,strength,seed_index,n_c_max,plume_pixels,roi_pixels,roi_overlap,detection_tpr,method,"
          "best_mse,best_mse_setting,best_confidence,best_confidence_setting,mse_improvement,confidence_improvement\n";
    for (const auto& c : result.cases) {
      const auto g = c.methods.find(bg::Method::Global);
      const std::string prefix = c.id + ',' + c.gas + ',' + num(c.strength) + ',' + std::to_string(c.seed_index) + ',' +
                                 num(c.n_c_max) + ',' + std::to_string(c.plume_pixels) + ',' +
                                 std::to_string(c.roi_pixels) + ',' + std::to_string(c.roi_overlap) + ',' +
                                 num(c.detection_tpr) + ',';
      for (const auto& [m, o] : c.methods) {
        std::string mi, ci;
        if (g != c.methods.end() && g->second.mse && o.mse && *o.mse > 0.0) mi = num(*g->second.mse / *o.mse);
        if (g != c.methods.end() && g->second.confidence && o.confidence && *g->second.confidence > 0.0) {
          ci = num(*o.confidence / *g->second.confidence);
        }
        os << prefix << bg::to_string(m) << ',' << opt(o.mse) << ",\"" << o.mse_hp << "\"," << opt(o.confidence)
           << ",\"" << o.confidence_hp << "\"," << mi << ',' << ci << '\n';
      }
      std::string ci;
      if (g != c.methods.end() && g->second.confidence && *g->second.confidence > 0.0) {
        ci = num(c.oracle_confidence / *g->second.confidence);
      }
      os << prefix << "Oracle,0,\"truth\"," << num(c.oracle_confidence) << ",\"truth\",," << ci << '\n';
    }
  }

  {
    auto os = open_csv(dir / "calibration.csv");
    os << "gas,strength,n_c_max,achieved_tpr,probes\n";
    for (const auto& r : result.calibrations) {
      os << r.gas << ',' << num(r.strength) << ',' << num(r.result.n_c_max) << ',' << num(r.result.achieved_tpr) << ','
         << r.result.steps << '\n';
    }
  }

  {
    auto os = open_csv(dir / "undetected.csv");
    os << "case_id\n";
    for (const auto& id : result.undetected) os << id << '\n';
  }

  std::vector<ViolinSeries> mse_series, imp_series, conf_series;
  for (bg::Method m : methods) {
    ViolinSeries a{bg::to_string(m), {}}, b{bg::to_string(m), {}}, c{bg::to_string(m), {}};
    for (const auto& cs : result.cases) {
      const auto it = cs.methods.find(m);
      const auto g = cs.methods.find(bg::Method::Global);
      if (it == cs.methods.end()) continue;
      if (it->second.mse) a.values.push_back(*it->second.mse);
      if (it->second.confidence) c.values.push_back(*it->second.confidence);
      if (g != cs.methods.end() && g->second.mse && it->second.mse && *it->second.mse > 0.0) {
        b.values.push_back(*g->second.mse / *it->second.mse);
      }
    }
    mse_series.push_back(std::move(a));
    imp_series.push_back(std::move(b));
    conf_series.push_back(std::move(c));
  }
  conf_series.push_back({"Oracle", oracle});
  write_violin_svg(dir / "mse_distribution.svg", "Background MSE per plume", "MSE", mse_series, true);
  if (has_global) {
    write_violin_svg(dir / "mse_improvement.svg", "MSE improvement over Global", "Global MSE / method MSE", imp_series,
                     true);
  }
  write_violin_svg(dir / "confidence_distribution.svg", "True-gas identification confidence", "confidence",
                   conf_series, false);
}

}  // namespace plume::eval

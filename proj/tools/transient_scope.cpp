// transient-scope: simulate discrete-time maps, measure transient times,
// certify transient centers, run escape-profile searches, draw augmented
// phase portraits and sweep parameters.
//
// Exit codes: 0 ok, 2 config error, 3 numeric blow-up, 4 precondition failed.

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tscope/config.hpp"
#include "tscope/criteria.hpp"
#include "tscope/io.hpp"
#include "tscope/log.hpp"
#include "tscope/portrait.hpp"
#include "tscope/search.hpp"
#include "tscope/svg.hpp"
#include "tscope/zoo.hpp"

namespace fs = std::filesystem;
using tscope::Json;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string preset;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string out_dir = ".";
  std::size_t jobs = std::thread::hardware_concurrency() ? std::thread::hardware_concurrency() : 1;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config_path, "JSON run configuration file");
  cmd->add_option("--preset", o.preset, "built-in preset (fig2, fig3, fig4, fig6, fig4b, fig7a)");
  cmd->add_option("--seed", o.seed, "seed override")->each([&o](const std::string&) {
    o.seed_given = true;
  });
  cmd->add_option("--out", o.out_dir, "output directory (created if missing)");
  cmd->add_option("--jobs", o.jobs, "worker count for sweep/search sampling");
}

tscope::RunConfig load_config(const CommonOpts& o) {
  if (!o.config_path.empty() && !o.preset.empty())
    throw tscope::ConfigError("give either --config or --preset, not both");
  std::string text;
  if (!o.config_path.empty()) {
    std::ifstream is(o.config_path);
    if (!is) throw tscope::ConfigError("cannot read config file: " + o.config_path);
    std::ostringstream ss;
    ss << is.rdbuf();
    text = ss.str();
  } else if (!o.preset.empty()) {
    text = tscope::preset_text(o.preset);
  } else {
    throw tscope::ConfigError("a --config file or --preset is required");
  }
  tscope::RunConfig rc = tscope::parse_config_text(text);
  if (o.seed_given) rc.seed = o.seed;
  return rc;
}

std::string out_path(const CommonOpts& o, const std::string& name) {
  fs::create_directories(o.out_dir);
  return (fs::path(o.out_dir) / name).string();
}

tscope::Observable resolve_observable(const tscope::RunConfig& rc, const tscope::ZooModel& zm) {
  if (rc.observable_coeffs) {
    if (rc.observable_coeffs->size() != zm.map.dim)
      throw tscope::ConfigError("observable coefficient count does not match the model dimension");
    return tscope::linear_observable("custom", *rc.observable_coeffs);
  }
  const std::string name = rc.observable.empty() ? zm.entry.observables.front().name : rc.observable;
  try {
    return zm.entry.observable(name);
  } catch (const std::invalid_argument& e) {
    throw tscope::ConfigError(e.what());
  }
}

Json verdict_json(const tscope::CenterVerdict& v) {
  Json j;
  j["decision"] = tscope::to_string(v.decision);
  j["criterion"] = tscope::to_string(v.criterion);
  j["empirical"] = v.empirical;
  j["applicable"] = v.applicable;
  Json cert = Json::object();
  Json margins = Json::object();
  for (const auto& [k, val] : v.certificate) {
    cert[k] = val;
    if (k.find("margin") != std::string::npos) margins[k] = val;
  }
  j["certificate"] = cert;
  j["margins"] = margins;
  if (!v.note.empty()) j["note"] = v.note;
  return j;
}

Json fixed_point_json(const tscope::FixedPoint& fp) {
  Json j;
  j["location"] = fp.location;
  j["residual"] = fp.residual;
  j["stability"] = tscope::to_string(fp.stability);
  j["spectral_radius"] = fp.spectral.spectral_radius;
  j["spectral_norm"] = fp.spectral.spectral_norm;
  Json eigs = Json::array();
  for (const auto& ev : fp.spectral.eigenvalues)
    eigs.push_back(Json{{"re", ev.real()}, {"im", ev.imag()}});
  j["eigenvalues"] = eigs;
  return j;
}

int cmd_simulate(const CommonOpts& o) {
  const tscope::RunConfig rc = load_config(o);
  if (!rc.simulate) throw tscope::ConfigError("config lacks a 'simulate' block");
  const tscope::ZooModel zm = tscope::build(rc.model, rc.params);
  const tscope::Observable v = resolve_observable(rc, zm);
  const tscope::SimulateSpec& spec = *rc.simulate;

  bool blowup = false;
  std::vector<tscope::Trajectory> trajectories;
  for (std::size_t k = 0; k < spec.initials.size(); ++k) {
    if (spec.initials[k].size() != zm.map.dim)
      throw tscope::ConfigError("simulate initial state has wrong dimension");
    if (!zm.map.domain.contains(spec.initials[k]))
      throw tscope::ConfigError("simulate initial state lies outside the model's domain box");
    trajectories.push_back(tscope::iterate(zm.map, spec.initials[k], spec.steps, v));
    const std::string name = spec.initials.size() == 1 ? "traj.csv" : "traj_" + std::to_string(k) + ".csv";
    tscope::write_trajectory_csv(out_path(o, name), trajectories.back());
    if (trajectories.back().status != tscope::IterStatus::Ok) blowup = true;
  }

  if (spec.svg) {
    std::vector<std::pair<std::string, std::vector<double>>> state_series;
    std::vector<std::pair<std::string, std::vector<double>>> delta_series;
    for (std::size_t k = 0; k < trajectories.size(); ++k) {
      const tscope::Trajectory& tr = trajectories[k];
      const std::string tag = trajectories.size() == 1 ? "" : "[" + std::to_string(k) + "]";
      for (std::size_t i = 0; i < zm.map.dim; ++i) {
        std::vector<double> xs;
        for (const auto& st : tr.states) xs.push_back(st[i]);
        state_series.push_back({"x" + std::to_string(i + 1) + tag, std::move(xs)});
      }
      state_series.push_back({"v" + tag, tr.observable_values});
      std::vector<double> absd;
      for (double d : tr.deltas) absd.push_back(std::fabs(d));
      delta_series.push_back({"|dv|" + tag, std::move(absd)});
    }
    double marker = std::nan("");
    double thr = std::nan("");
    if (spec.threshold) {
      thr = *spec.threshold;
      const tscope::TransientTimeResult tt =
          tscope::transient_time(zm.map, v, spec.initials.front(), thr, spec.steps);
      if (tt.status == tscope::TransientStatus::Finite) marker = static_cast<double>(tt.time);
    }
    tscope::write_series_svg(out_path(o, "states.svg"), state_series, "t", "state / v");
    tscope::write_series_svg(out_path(o, "delta.svg"), delta_series, "t", "|dv|", thr, marker);
  }
  std::cout << "simulate: wrote " << trajectories.size() << " trajectorie(s) to " << o.out_dir
            << (blowup ? " (stopped early: non-finite state or domain escape)" : "") << "\n";
  return blowup ? 3 : 0;
}

int cmd_transient_time(const CommonOpts& o) {
  const tscope::RunConfig rc = load_config(o);
  if (!rc.transient_time) throw tscope::ConfigError("config lacks a 'transient-time' block");
  const tscope::ZooModel zm = tscope::build(rc.model, rc.params);
  const tscope::Observable v = resolve_observable(rc, zm);
  const tscope::TransientTimeSpec& spec = *rc.transient_time;
  if (spec.x0.size() != zm.map.dim)
    throw tscope::ConfigError("transient-time.x0 has wrong dimension");

  const tscope::TransientTimeResult res =
      tscope::transient_time(zm.map, v, spec.x0, spec.s, spec.horizon);
  Json j;
  j["status"] = tscope::to_string(res.status);
  j["threshold"] = res.threshold;
  j["horizon"] = res.horizon;
  if (res.status == tscope::TransientStatus::Finite) {
    j["time"] = res.time;
    j["trigger_delta"] = res.trigger_delta;
  }
  if (res.status == tscope::TransientStatus::NonFiniteState) j["fail_step"] = res.fail_step;
  if (spec.transient_T) {
    const auto cls = tscope::classify_transient_point(zm.map, v, spec.x0, spec.s,
                                                      *spec.transient_T, spec.horizon);
    j["T"] = *spec.transient_T;
    j["transient_point"] = tscope::to_string(cls);
  }
  {
    auto os = tscope::open_out(out_path(o, "transient_time.json"));
    os << j.dump(2) << "\n";
  }
  std::cout << j.dump() << "\n";
  return res.status == tscope::TransientStatus::NonFiniteState ? 3 : 0;
}

int cmd_classify(const CommonOpts& o) {
  const tscope::RunConfig rc = load_config(o);
  const tscope::ZooModel zm = tscope::build(rc.model, rc.params);
  const tscope::Observable v = resolve_observable(rc, zm);
  const tscope::ClassifySpec spec = rc.classify.value_or(tscope::ClassifySpec{});

  const tscope::Box region = spec.region.value_or(zm.entry.classify_region);
  const std::vector<std::size_t> grid = spec.grid.value_or(zm.entry.classify_grid);
  const tscope::FixedPointSearch found =
      tscope::find_fixed_points(zm.map, region, grid, spec.tol);
  tscope::log::info("classify: " + std::to_string(found.points.size()) + " fixed point(s) from " +
                    std::to_string(found.seeds_tried) + " seeds");

  tscope::ClassifyOptions copt;
  copt.use_empirical = spec.empirical;
  copt.empirical_radii = spec.radii;
  copt.search.horizon = spec.horizon;
  copt.search.samples = spec.samples;
  copt.search.seed = rc.seed;
  copt.search.jobs = o.jobs;

  Json out = Json::array();
  for (const tscope::FixedPoint& fp : found.points) {
    const tscope::CenterVerdict verdict = tscope::classify(zm.map, fp, v, copt);
    Json rec;
    rec["fixed_point"] = fixed_point_json(fp);
    rec["observable"] = v.name;
    rec.update(verdict_json(verdict));
    out.push_back(rec);
  }
  Json doc;
  doc["model"] = zm.entry.model_id;
  doc["seeds_tried"] = found.seeds_tried;
  doc["seeds_converged"] = found.seeds_converged;
  doc["verdicts"] = out;
  {
    auto os = tscope::open_out(out_path(o, "verdicts.json"));
    os << doc.dump(2) << "\n";
  }
  for (const auto& rec : out) {
    std::cout << rec["fixed_point"]["location"].dump() << " " << v.name << ": "
              << rec["decision"].get<std::string>() << " ("
              << rec["criterion"].get<std::string>() << ")\n";
  }
  return 0;
}

int cmd_search(const CommonOpts& o) {
  const tscope::RunConfig rc = load_config(o);
  if (!rc.search) throw tscope::ConfigError("config lacks a 'search' block");
  const tscope::ZooModel zm = tscope::build(rc.model, rc.params);
  const tscope::Observable v = resolve_observable(rc, zm);
  const tscope::SearchSpec& spec = *rc.search;

  tscope::SearchOptions sopt;
  sopt.horizon = spec.horizon;
  sopt.samples = spec.samples;
  sopt.seed = rc.seed;
  sopt.jobs = o.jobs;

  if (spec.mode == "escape") {
    const tscope::EscapeProfile prof =
        tscope::escape_profile(zm.map, v, spec.candidate, spec.radii, sopt);
    auto os = tscope::open_out(out_path(o, "escape.csv"));
    tscope::write_escape_csv(os, prof);
    const tscope::CenterVerdict verdict =
        tscope::empirical_center_verdict(zm.map, v, spec.candidate, spec.radii, sopt);
    auto vs = tscope::open_out(out_path(o, "escape_verdict.json"));
    vs << verdict_json(verdict).dump(2) << "\n";
    std::cout << "escape profile written; empirical decision: "
              << tscope::to_string(verdict.decision) << "\n";
  } else if (spec.mode == "transient-points") {
    const auto hits = tscope::transient_point_search(zm.map, v, *spec.region, spec.s,
                                                     spec.transient_T, spec.horizon, spec.budget,
                                                     rc.seed);
    auto os = tscope::open_out(out_path(o, "transient_points.csv"));
    for (std::size_t i = 1; i <= zm.map.dim; ++i) os << "x" << i << ',';
    os << "time\n";
    for (const auto& h : hits) {
      for (double c : h.point) os << tscope::fmt_g17(c) << ',';
      os << h.time << '\n';
    }
    std::cout << "transient-point search: " << hits.size() << " hit(s)\n";
  } else {
    const auto rows = tscope::honeymoon_scaling(zm.map, v, spec.candidate, spec.direction,
                                                spec.epsilons, spec.s, spec.horizon);
    auto os = tscope::open_out(out_path(o, "honeymoon.csv"));
    tscope::write_honeymoon_csv(os, rows);
    std::cout << "honeymoon table with " << rows.size() << " row(s) written\n";
  }
  return 0;
}

int cmd_portrait(const CommonOpts& o) {
  const tscope::RunConfig rc = load_config(o);
  if (!rc.portrait) throw tscope::ConfigError("config lacks a 'portrait' block");
  const tscope::ZooModel zm = tscope::build(rc.model, rc.params);
  const tscope::PortraitSpec& spec = *rc.portrait;
  tscope::PortraitData data;
  try {
    data = tscope::compute_portrait(zm.map, spec.region, spec.grid, spec.coarse);
  } catch (const std::invalid_argument& e) {
    throw tscope::ConfigError(e.what());
  }
  fs::create_directories(o.out_dir);
  tscope::export_portrait(data, (fs::path(o.out_dir) / spec.basename).string());
  std::cout << "portrait '" << spec.basename << "': " << data.nullclines.size()
            << " nullcline curve(s), " << data.root_curves.size() << " root curve(s)\n";
  return 0;
}

int cmd_sweep(const CommonOpts& o) {
  const tscope::RunConfig rc = load_config(o);
  if (!rc.sweep) throw tscope::ConfigError("config lacks a 'sweep' block");
  const tscope::SweepSpec& spec = *rc.sweep;
  {
    // Validate the parameter name and observable against the base model now.
    const tscope::ZooModel zm = tscope::build(rc.model, rc.params);
    if (zm.entry.params.find(spec.param) == zm.entry.params.end())
      throw tscope::ConfigError("sweep.param: model has no parameter '" + spec.param + "'");
    (void)resolve_observable(rc, zm);
  }

  // Row layouts (note last): classify has dim + 4 payload columns before the
  // note, transient-time has 3. Failed cells pad the payload and put the
  // message in the note column so every row parses against the header.
  const std::size_t dim = tscope::build(rc.model, rc.params).map.dim;
  const std::size_t payload = spec.task == "classify" ? dim + 4 : 3;

  std::vector<std::string> rows(spec.values.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= spec.values.size()) return;
      std::map<std::string, double> params = rc.params;
      params[spec.param] = spec.values[i];
      std::ostringstream row;
      row << tscope::fmt_g17(spec.values[i]) << ',';
      try {
        const tscope::ZooModel zm = tscope::build(rc.model, params);
        const tscope::Observable v = resolve_observable(rc, zm);
        if (spec.task == "classify") {
          const tscope::KnownFixedPointSpec* fps = zm.entry.fixed_point(spec.fixed_point);
          if (!fps)
            throw std::runtime_error("fixed point '" + spec.fixed_point +
                                     "' does not exist at these parameters");
          const tscope::FixedPoint fp = tscope::analyze_fixed_point(zm.map, fps->location);
          tscope::ClassifyOptions copt;
          copt.use_empirical = spec.empirical;
          copt.search.seed = tscope::derive_seed(rc.seed, i);
          const tscope::CenterVerdict verdict = tscope::classify(zm.map, fp, v, copt);
          for (double c : fp.location) row << tscope::fmt_g17(c) << ',';
          row << tscope::to_string(fp.stability) << ',' << tscope::to_string(verdict.decision)
              << ',' << tscope::to_string(verdict.criterion) << ','
              << tscope::fmt_g17(fp.spectral.spectral_radius) << ',';
        } else {
          const tscope::TransientTimeResult res =
              tscope::transient_time(zm.map, v, spec.x0, spec.s, spec.horizon);
          row << tscope::to_string(res.status) << ',';
          if (res.status == tscope::TransientStatus::Finite)
            row << res.time << ',' << tscope::fmt_g17(res.trigger_delta) << ',';
          else
            row << ",,";
        }
      } catch (const std::exception& e) {
        row.str("");
        row << tscope::fmt_g17(spec.values[i]) << ',';
        for (std::size_t k = 0; k < payload; ++k) row << ',';
        row << "error: " << e.what();
      }
      rows[i] = row.str();
    }
  };
  const std::size_t jobs = std::max<std::size_t>(1, std::min(o.jobs, std::max<std::size_t>(1, spec.values.size())));
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < jobs; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  auto os = tscope::open_out(out_path(o, "sweep.csv"));
  if (spec.task == "classify") {
    const tscope::ZooModel zm = tscope::build(rc.model, rc.params);
    os << spec.param;
    for (std::size_t i = 1; i <= zm.map.dim; ++i) os << ",fp_x" << i;
    os << ",stability,decision,criterion,rho,note\n";
  } else {
    os << spec.param << ",status,time,trigger_delta,note\n";
  }
  for (const std::string& r : rows) os << r << '\n';
  std::cout << "sweep: " << rows.size() << " row(s) written\n";
  return 0;
}

int cmd_zoo(const std::string& action, const std::string& id) {
  if (action == "list") {
    Json j = tscope::zoo_ids();
    std::cout << j.dump(2) << "\n";
    return 0;
  }
  const tscope::ZooModel zm = tscope::build(id, {});
  Json j;
  j["model_id"] = zm.entry.model_id;
  j["params"] = zm.entry.params;
  j["dimension"] = zm.map.dim;
  j["linear"] = zm.map.linear;
  Json obs = Json::array();
  for (const auto& v : zm.entry.observables) obs.push_back(v.name);
  j["observables"] = obs;
  Json fps = Json::object();
  for (const auto& fp : zm.entry.known_fixed_points) fps[fp.name] = fp.location;
  j["known_fixed_points"] = fps;
  Json gts = Json::array();
  for (const auto& gt : zm.entry.ground_truths) {
    gts.push_back(Json{{"point", gt.point},
                       {"point_name", gt.point_name},
                       {"observable", gt.observable},
                       {"expected", tscope::to_string(gt.expected)},
                       {"route", tscope::to_string(gt.route)},
                       {"source", gt.source}});
  }
  j["ground_truths"] = gts;
  j["domain_lo"] = zm.map.domain.lo;
  j["domain_hi"] = zm.map.domain.hi;
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"transient-scope: long-transient analysis of discrete-time systems"};
  app.require_subcommand(1);

  CommonOpts sim_o, tt_o, cls_o, srch_o, por_o, swp_o;
  CLI::App* sim = app.add_subcommand("simulate", "iterate a model and export trajectory CSV/SVG");
  add_common(sim, sim_o);
  CLI::App* tt = app.add_subcommand("transient-time", "compute a (v,s)-transient time");
  add_common(tt, tt_o);
  CLI::App* cls = app.add_subcommand("classify", "find fixed points and certify center status");
  add_common(cls, cls_o);
  CLI::App* srch = app.add_subcommand("search", "escape profiles, transient points, honeymoon tables");
  add_common(srch, srch_o);
  CLI::App* por = app.add_subcommand("portrait", "augmented phase portrait (planar models)");
  add_common(por, por_o);
  CLI::App* swp = app.add_subcommand("sweep", "parameter sweep over classify or transient-time");
  add_common(swp, swp_o);

  CLI::App* zoo = app.add_subcommand("zoo", "catalog of built-in models");
  std::string zoo_action = "list", zoo_id;
  zoo->add_option("action", zoo_action, "list | show")->check(CLI::IsMember({"list", "show"}));
  zoo->add_option("id", zoo_id, "model id for 'show'");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sim->parsed()) return cmd_simulate(sim_o);
    if (tt->parsed()) return cmd_transient_time(tt_o);
    if (cls->parsed()) return cmd_classify(cls_o);
    if (srch->parsed()) return cmd_search(srch_o);
    if (por->parsed()) return cmd_portrait(por_o);
    if (swp->parsed()) return cmd_sweep(swp_o);
    if (zoo->parsed()) {
      if (zoo_action == "show" && zoo_id.empty())
        throw tscope::ConfigError("zoo show requires a model id");
      return cmd_zoo(zoo_action, zoo_id);
    }
  } catch (const tscope::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const tscope::InvalidParams& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const tscope::CandidateNotInXv& e) {
    std::cerr << "precondition failed: " << e.what() << "\n";
    return 4;
  } catch (const tscope::NonFiniteError& e) {
    std::cerr << "numeric blow-up: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

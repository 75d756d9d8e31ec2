#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tryon/displacement.hpp"
#include "tryon/error.hpp"
#include "tryon/fitting.hpp"
#include "tryon/head_model.hpp"
#include "tryon/mesh_io.hpp"
#include "tryon/metrics.hpp"
#include "tryon/pipeline.hpp"
#include "tryon/service.hpp"
#include "tryon/toy_model.hpp"

namespace tryon::cli {

namespace fs = std::filesystem;

inline std::string read_text(const fs::path& p) { return detail::as_text(detail::read_file_bytes(p)); }

inline void write_text(const fs::path& p, std::string_view text) {
  detail::write_file_bytes(p, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

/// Whitespace-separated "x y z" per line; blank lines and # comments skipped.
inline std::vector<Vec3> parse_xyz(std::string_view text) {
  std::vector<Vec3> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto h = line.find('#'); h != std::string::npos) line.resize(h);
    const auto tok = detail::split_ws(line);
    if (tok.empty()) continue;
    if (tok.size() < 3) throw Error(Errc::parse_error, "line " + std::to_string(line_no) + ": expected x y z");
    out.emplace_back(detail::parse_double(tok[0], line_no), detail::parse_double(tok[1], line_no),
                     detail::parse_double(tok[2], line_no));
  }
  if (out.empty()) throw Error(Errc::parse_error, "no points in xyz file");
  return out;
}

/// Mesh from .obj or .glb (all GLB nodes baked and concatenated).
inline Mesh load_mesh_file(const fs::path& p) {
  const auto bytes = detail::read_file_bytes(p);
  if (p.extension() == ".obj") return parse_obj(detail::as_text(bytes));
  const Scene scene = read_glb(bytes);
  Mesh out;
  for (const auto& n : scene.nodes) {
    const Mesh baked = baked_mesh(n);
    const auto base = static_cast<std::uint32_t>(out.vertices.size());
    out.vertices.insert(out.vertices.end(), baked.vertices.begin(), baked.vertices.end());
    for (const auto& t : baked.triangles) out.triangles.push_back({base + t[0], base + t[1], base + t[2]});
  }
  return out;
}

struct EvalResult {
  Similarity3 alignment;
  std::vector<double> distances;
  ErrorSummary summary;
  ErrorCurve curve;
};

/// Aligns the prediction onto ground truth with its landmarks, then measures
/// every ground-truth point against the aligned predicted surface.
inline EvalResult evaluate(const Mesh& pred, std::span<const Vec3> gt_points, std::span<const Vec3> pred_landmarks,
                           std::span<const Vec3> gt_landmarks, bool with_scale, double curve_max_mm, int curve_steps) {
  EvalResult r;
  r.alignment = align_rigid_landmarks(pred_landmarks, gt_landmarks, with_scale);
  r.distances = scan_to_mesh_distances(gt_points, transformed(pred, r.alignment));
  r.summary = summarize(r.distances);
  r.curve = cumulative_curve(r.distances, curve_max_mm, curve_steps);
  return r;
}

/// Landmarks of the default toy subject seen by a fixed weak-perspective camera.
inline nlohmann::json sample_landmarks(const HeadModelAsset& asset) {
  ParamVector p = ParamVector::zeros(asset);
  for (Eigen::Index i = 0; i < p.beta.size(); ++i) p.beta[i] = 0.5 * std::sin(1.0 + static_cast<double>(i));
  if (p.psi.size() > 1) p.psi[1] = 0.3;
  p.jaw_pose = Vec3(0.08, 0.0, 0.0);
  const WeakPerspectiveCamera cam{3.0, Vec2(320.0, 400.0)};
  const auto lm = project(embed_landmarks(asset, decode(asset, p)), cam);
  const std::vector<double> conf(kNumLandmarks, 1.0);
  return landmarks_to_json(std::span<const Vec2>(lm), conf);
}

inline void write_catalog(const fs::path& dir) {
  fs::create_directories(dir);
  for (const auto& style : toy::default_eyewear_styles()) {
    auto [mesh, anchors] = toy::make_eyewear(style);
    Scene s;
    s.materials.push_back({style.id, {0.08, 0.08, 0.10, 1.0}, {}});
    s.nodes.push_back({"frame", mesh, NodeTransform{}, 0});
    const auto glb = write_glb(s);
    detail::write_file_bytes(dir / (style.id + ".glb"), glb);
    write_text(dir / (style.id + ".anchors.json"), anchors_to_json(style.id, style.display_name, anchors).dump(2));
  }
}

// Maps library errors to exit code 1 with a one-line diagnostic.
template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Eyewear try-on engine: head fitting, eyewear placement and GLB export"};
  app.name("tryon");
  app.require_subcommand(1);

  // fit
  auto* fit = app.add_subcommand("fit", "Fit head-model parameters to a landmarks file");
  std::string fit_model, fit_landmarks, fit_output;
  FitConfig fit_cfg;
  fit->add_option("--model", fit_model, "Head asset manifest (.fma.json)")->required();
  fit->add_option("--landmarks", fit_landmarks, "68-point landmarks JSON (2D or 3D)")->required();
  fit->add_option("-o,--output", fit_output, "Output params JSON (default: stdout)");
  fit->add_option("--lambda-beta", fit_cfg.lambda_beta, "Shape regularization weight")->capture_default_str();
  fit->add_option("--lambda-psi", fit_cfg.lambda_psi, "Expression regularization weight")->capture_default_str();
  fit->add_option("--w-eye", fit_cfg.w_eye, "Eye-closure term weight")->capture_default_str();
  fit->add_option("--max-iters", fit_cfg.max_iters, "Solver iteration cap")->capture_default_str();

  // tryon
  auto* tryon = app.add_subcommand("tryon", "Place an eyewear frame on a fitted head and write a GLB");
  std::string t_model, t_params, t_frame, t_anchors, t_output, t_disp;
  FitParams t_fp;
  double t_scale = 0.0, t_disp_range = 1.0, t_disp_gain = 1.0;
  tryon->add_option("--model", t_model, "Head asset manifest (.fma.json)")->required();
  tryon->add_option("--params", t_params, "Params JSON written by fit")->required();
  tryon->add_option("--frame", t_frame, "Eyewear GLB")->required();
  tryon->add_option("--anchors", t_anchors, "Eyewear anchors JSON (default: <frame>.anchors.json)");
  tryon->add_option("-o,--output", t_output, "Output GLB")->required();
  tryon->add_option("--forward-offset", t_fp.forward_offset_mm, "Bridge offset along forward, mm")->capture_default_str();
  tryon->add_option("--vertical-offset", t_fp.vertical_offset_mm, "Bridge offset along up, mm")->capture_default_str();
  tryon->add_option("--scale", t_scale, "Eyewear scale override (default: IPD / lens-center span)");
  tryon->add_option("--displacement", t_disp, "Grayscale PNG displacement map over head UVs");
  tryon->add_option("--displacement-range", t_disp_range, "PNG extremes map to -range..+range mm")->capture_default_str();
  tryon->add_option("--displacement-gain", t_disp_gain, "Multiplier on sampled displacement")->capture_default_str();

  // eval
  auto* eval = app.add_subcommand("eval", "Scan-to-mesh error of a predicted head against ground-truth points");
  std::string e_pred, e_gt, e_pred_lm, e_gt_lm, e_curve, e_method = "prediction";
  bool e_json = false, e_scale = false;
  double e_max = 10.0;
  int e_steps = 101;
  eval->add_option("--pred", e_pred, "Predicted mesh (.glb or .obj)")->required();
  eval->add_option("--gt", e_gt, "Ground-truth points (.xyz)")->required();
  eval->add_option("--pred-landmarks", e_pred_lm, "Landmarks on the prediction (3D JSON)")->required();
  eval->add_option("--gt-landmarks", e_gt_lm, "Landmarks on the ground truth (3D JSON)")->required();
  eval->add_flag("--with-scale", e_scale, "Allow scale in the landmark alignment");
  eval->add_flag("--json", e_json, "Machine-readable output");
  eval->add_option("--curve", e_curve, "Write the cumulative error curve CSV here");
  eval->add_option("--curve-max", e_max, "Largest curve threshold, mm")->capture_default_str();
  eval->add_option("--curve-steps", e_steps, "Number of curve thresholds")->capture_default_str();
  eval->add_option("--method", e_method, "Method name for the report row")->capture_default_str();

  // validate
  auto* validate = app.add_subcommand("validate", "Check a GLB file or an eyewear catalog directory");
  std::string v_path;
  validate->add_option("path", v_path, "GLB file or catalog directory")->required();

  // gen-toy-model
  auto* gen = app.add_subcommand("gen-toy-model", "Write the synthetic head asset (and optionally a toy catalog)");
  std::string g_out, g_catalog, g_landmarks;
  int g_shape = 10, g_expr = 5;
  std::uint64_t g_seed = 20240601;
  gen->add_option("-o,--output", g_out, "Output manifest path (<name>.fma.json)")->required();
  gen->add_option("--n-shape", g_shape, "Shape basis size")->capture_default_str();
  gen->add_option("--n-expression", g_expr, "Expression basis size (at least 5)")->capture_default_str();
  gen->add_option("--seed", g_seed, "Seed for the shape basis")->capture_default_str();
  gen->add_option("--catalog", g_catalog, "Also write toy eyewear GLB + anchors pairs into this directory");
  gen->add_option("--sample-landmarks", g_landmarks, "Also write a sample 2D landmarks file");

  // serve
  auto* srv = app.add_subcommand("serve", "Run the HTTP service");
  std::string s_config, s_data, s_asset, s_bind, s_detector, s_port_file;
  srv->add_option("--config", s_config, "Config JSON (data_dir, head_asset, detector_url, bind)");
  srv->add_option("--data-dir", s_data, "Data directory (subjects/, outputs/, catalog/)");
  srv->add_option("--head-asset", s_asset, "Head asset manifest");
  srv->add_option("--bind", s_bind, "host:port; port 0 picks a free port");
  srv->add_option("--detector-url", s_detector, "Landmark detector endpoint");
  srv->add_option("--port-file", s_port_file, "Write the bound port here once listening");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    const CLI::App* sub = nullptr;
    for (const auto* s : app.get_subcommands()) sub = s;
    err << (sub ? sub->help() : app.help());
    return 2;
  }

  if (fit->parsed()) {
    return guarded(err, [&] {
      const auto asset = load_asset(fit_model);
      const auto lm = parse_landmarks_json(read_text(fit_landmarks));
      const FitResult r = lm.is_3d ? fit_landmarks3d(asset, lm.as_3d(), fit_cfg) : fit_landmarks2d(asset, lm.as_2d(), fit_cfg);
      const std::string text = fit_result_to_json(r).dump(2) + "\n";
      if (fit_output.empty()) out << text;
      else write_text(fit_output, text);
      if (!r.converged) err << "warning: solver stopped after " << r.iterations << " iterations without converging\n";
      return 0;
    });
  }

  if (tryon->parsed()) {
    return guarded(err, [&] {
      const auto asset = load_asset(t_model);
      const ParamVector params = params_from_json(nlohmann::json::parse(read_text(t_params)));
      if (t_anchors.empty()) t_anchors = (fs::path(t_frame).parent_path() / fs::path(t_frame).stem()).string() + ".anchors.json";
      const auto eyewear = load_eyewear(detail::read_file_bytes(t_frame), read_text(t_anchors), fs::path(t_frame).stem().string());
      if (tryon->count("--scale")) t_fp.scale_override = t_scale;
      std::optional<DisplacementInput> disp;
      if (!t_disp.empty()) disp = DisplacementInput{displacement_from_png(detail::read_file_bytes(t_disp), t_disp_range), t_disp_gain};
      const TryonRender r = render_tryon(asset, params, eyewear, t_fp, {}, disp);
      detail::write_file_bytes(t_output, r.glb);
      return 0;
    });
  }

  if (eval->parsed()) {
    return guarded(err, [&] {
      const Mesh pred = load_mesh_file(e_pred);
      const auto gt = parse_xyz(read_text(e_gt));
      const auto plm = parse_landmarks_json(read_text(e_pred_lm));
      const auto glm = parse_landmarks_json(read_text(e_gt_lm));
      if (!plm.is_3d || !glm.is_3d) throw Error(Errc::invalid_argument, "eval landmarks must be 3D");
      const EvalResult r = evaluate(pred, gt, plm.points, glm.points, e_scale, e_max, e_steps);
      if (!e_curve.empty()) write_text(e_curve, curve_to_csv(r.curve));
      if (e_json) {
        nlohmann::json j = {{"median_mm", r.summary.median_mm},
                            {"mean_mm", r.summary.mean_mm},
                            {"std_mm", r.summary.std_mm},
                            {"count", r.summary.count},
                            {"curve", {{"threshold_mm", r.curve.thresholds_mm}, {"fraction", r.curve.fraction_below}}}};
        out << j.dump(2) << "\n";
      } else {
        out << render_report({{e_method, r.summary, std::nullopt}});
      }
      return 0;
    });
  }

  if (validate->parsed()) {
    return guarded(err, [&] {
      if (fs::is_directory(v_path)) {
        const Catalog cat = ingest_catalog(v_path);
        for (const auto& e : cat.entries) out << "ok       " << e.id << "  " << e.display_name << "\n";
        for (const auto& r : cat.rejected) out << "rejected " << r.file << ": " << r.reason << "\n";
        return cat.rejected.empty() ? 0 : 1;
      }
      const auto report = validate_glb(detail::read_file_bytes(v_path));
      if (report.ok()) {
        out << "ok " << v_path << "\n";
        return 0;
      }
      for (const auto& issue : report.issues) out << "issue: " << issue << "\n";
      return 1;
    });
  }

  if (gen->parsed()) {
    return guarded(err, [&] {
      if (g_shape < 1 || g_expr < 5) throw Error(Errc::invalid_argument, "need --n-shape >= 1 and --n-expression >= 5");
      const auto asset = toy::make_head(g_shape, g_expr, g_seed);
      save_asset(asset, g_out);
      if (!g_catalog.empty()) write_catalog(g_catalog);
      if (!g_landmarks.empty()) write_text(g_landmarks, sample_landmarks(load_asset(g_out)).dump(1) + "\n");
      return 0;
    });
  }

  if (srv->parsed()) {
    return guarded(err, [&] {
      ServiceConfig cfg = s_config.empty() ? ServiceConfig{} : load_config(s_config);
      apply_env_overrides(cfg);
      if (!s_data.empty()) cfg.data_dir = s_data;
      if (!s_asset.empty()) cfg.head_asset = s_asset;
      if (!s_bind.empty()) cfg.set_bind(s_bind);
      if (srv->count("--detector-url")) cfg.detector_url = s_detector;
      TryonService svc(cfg);
      for (const auto& r : svc.catalog().rejected) err << "catalog: rejected " << r.file << ": " << r.reason << "\n";
      err << "serving " << svc.catalog().entries.size() << " frames on " << cfg.host << "\n";
      serve(svc, s_port_file);
      return 0;
    });
  }
  return 2;
}

}  // namespace tryon::cli

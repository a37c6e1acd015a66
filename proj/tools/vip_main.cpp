// Command-line front end: scene synthesis, mask propagation, inpainting,
// evaluation, ablation tables and Y-T slice rendering.

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vip/config.hpp"
#include "vip/error.hpp"
#include "vip/maskops.hpp"
#include "vip/metrics.hpp"
#include "vip/pipeline.hpp"
#include "vip/synth.hpp"
#include "vip/video_io.hpp"

namespace fs = std::filesystem;
using namespace vip;

namespace {

SceneSpec scene_spec_from_config(const Config& c) {
  SceneSpec s;
  s.seed = static_cast<uint64_t>(c.get_int("seed", 0));
  s.frames = c.get_int("frames", 24);
  s.height = c.get_int("height", 64);
  s.width = c.get_int("width", 64);
  const std::string bg = c.get_string("background", "checker");
  if (bg == "checker") {
    s.background = SceneSpec::Background::Checker;
  } else if (bg == "noise") {
    s.background = SceneSpec::Background::Noise;
  } else if (bg == "gradient") {
    s.background = SceneSpec::Background::Gradient;
  } else {
    fail(ErrorCode::InvalidArgument, "background must be checker, noise or gradient");
  }
  s.pan_x = c.get_int("pan_x", 0);
  s.pan_y = c.get_int("pan_y", 0);
  s.fps = c.get_double("fps", 24.0);

  const int n = c.get_int("sprites", 0);
  for (int i = 0; i < n; ++i) {
    const std::string p = "sprite." + std::to_string(i) + ".";
    SpriteSpec sp;
    const std::string shape = c.get_string(p + "shape", "rect");
    if (shape == "rect") {
      sp.shape = SpriteSpec::Shape::Rect;
    } else if (shape == "ellipse") {
      sp.shape = SpriteSpec::Shape::Ellipse;
    } else {
      fail(ErrorCode::InvalidArgument, "sprite shape must be rect or ellipse");
    }
    sp.size_x = c.get_int(p + "size_x", 8);
    sp.size_y = c.get_int(p + "size_y", 8);
    sp.x0 = c.get_int(p + "x0", 0);
    sp.y0 = c.get_int(p + "y0", 0);
    sp.vx = c.get_int(p + "vx", 0);
    sp.vy = c.get_int(p + "vy", 0);
    sp.color[0] = c.get_double(p + "color_r", -1.0);
    sp.color[1] = c.get_double(p + "color_g", -1.0);
    sp.color[2] = c.get_double(p + "color_b", -1.0);
    if (c.get_bool(p + "shadow", false)) {
      ShadowSpec sh;
      sh.dx = c.get_int(p + "shadow.dx", 2);
      sh.dy = c.get_int(p + "shadow.dy", 2);
      sh.scale = c.get_double(p + "shadow.scale", 1.0);
      sh.darkening = c.get_double(p + "shadow.darkening", 0.4);
      sp.shadow = sh;
    }
    s.sprites.push_back(sp);
  }
  return s;
}

int cmd_synth(const std::string& spec_file, const std::string& out_dir, int seed_override) {
  Config c = Config::parse_file(spec_file);
  SceneSpec spec = scene_spec_from_config(c);
  if (seed_override >= 0) spec.seed = static_cast<uint64_t>(seed_override);
  const Scene scene = generate_scene(spec);
  save_clip_dir(scene.clip, fs::path(out_dir) / "frames");
  save_clip_dir(scene.plate, fs::path(out_dir) / "plate");
  save_mask_dir(scene.sprite_masks, fs::path(out_dir) / "masks");
  save_mask_dir(scene.shadow_masks, fs::path(out_dir) / "shadow_masks");
  std::printf("wrote %d frames to %s\n", scene.clip.frame_count(), out_dir.c_str());
  return 0;
}

int cmd_masks(const std::string& in_dir, const std::string& out_dir,
              const std::vector<int>& anchor_list, bool pair, int dilate_radius) {
  const VideoClip clip = load_clip_dir(fs::path(in_dir) / "frames");
  const MaskSeq sprite_masks = load_mask_dir(fs::path(in_dir) / "masks");
  check_same_shape(clip, sprite_masks);

  MaskSeq shadow_masks;
  if (pair) {
    shadow_masks = load_mask_dir(fs::path(in_dir) / "shadow_masks");
    check_same_shape(clip, shadow_masks);
  }

  std::vector<int> anchors = anchor_list;
  if (anchors.empty()) anchors = anchor_frames(sprite_masks, 1);

  const PairingParams params;
  std::vector<std::pair<int, Mask>> anchor_masks;
  for (int a : anchors) {
    if (a < 0 || a >= clip.frame_count())
      fail(ErrorCode::InvalidArgument, "anchor index out of range");
    Mask merged = sprite_masks.masks[a];
    if (pair) {
      std::vector<InstanceMask> humans, shadows;
      for (Mask& m : connected_components(sprite_masks.masks[a]))
        humans.push_back({a, InstanceMask::Kind::Human, std::move(m)});
      for (Mask& m : connected_components(shadow_masks.masks[a]))
        shadows.push_back({a, InstanceMask::Kind::Shadow, std::move(m)});
      const PairingResult paired = pair_shadows(humans, shadows, params);
      for (const std::string& w : paired.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
      for (const auto& [h, s] : paired.pairs) {
        const InstanceMask uni = merge_instance(humans[h], &shadows[s], {});
        for (size_t i = 0; i < merged.data.size(); ++i) merged.data[i] |= uni.pixels.data[i];
      }
    }
    anchor_masks.push_back({a, std::move(merged)});
  }

  const FlowPairs flows = estimate_clip_flows(clip, nullptr, FlowParams{});
  const MaskSeq propagated = propagate_masks(clip, anchor_masks, flows, dilate_radius);
  save_mask_dir(propagated, out_dir);
  std::printf("wrote %d masks to %s\n", propagated.frame_count(), out_dir.c_str());
  return 0;
}

int cmd_inpaint(const std::string& config_file, int seed_override,
                const std::string& debug_dir, int threads) {
  Config c = Config::parse_file(config_file);
  PipelineConfig cfg = PipelineConfig::from_config(c);
  if (seed_override >= 0) cfg.seed = static_cast<uint64_t>(seed_override);
  if (!debug_dir.empty()) cfg.debug_dir = debug_dir;
  if (threads > 0) cfg.threads = threads;
  const RunResult res = run_inpaint_dirs(cfg);
  std::printf("%s", res.report.to_json().c_str());
  return 0;
}

int cmd_eval(const std::string& test_dir, const std::string& ref_dir, const std::string& out_file) {
  const VideoClip test = load_clip_dir(test_dir);
  const VideoClip ref = load_clip_dir(ref_dir);
  Report report;
  report.psnr = psnr(test, ref);
  report.ssim = ssim(test, ref);
  if (test.frame_count() >= 2) {
    const FlowPairs flows = estimate_clip_flows(test, nullptr, FlowParams{});
    report.e_warp_x1e3 = warping_error(test, flows).value * 1e3;
    report.tf = temporal_flicker(test, nullptr);
  }
  std::vector<double> pf;
  for (int f = 0; f < test.frame_count(); ++f)
    pf.push_back(psnr_frame(test.frames[f], ref.frames[f]));
  report.per_frame_psnr = pf;
  emit_report_json(report, out_file);
  std::printf("%s", report.to_json().c_str());
  return 0;
}

int cmd_ablate(const std::string& config_file, const std::string& out_file, int seed_override,
               int threads) {
  Config c = Config::parse_file(config_file);
  PipelineConfig cfg = PipelineConfig::from_config(c);
  if (seed_override >= 0) cfg.seed = static_cast<uint64_t>(seed_override);
  if (threads > 0) cfg.threads = threads;
  PipelineInputs in;
  in.clip = load_clip_dir(cfg.frames_dir);
  in.holes = load_mask_dir(cfg.masks_dir);
  if (!cfg.plate_dir.empty()) in.plate = load_clip_dir(cfg.plate_dir);
  const std::vector<AblationRow> rows = run_ablation(cfg, in);
  emit_table_csv(rows, out_file);
  for (const AblationRow& r : rows)
    std::printf("%-6s psnr=%.3f ssim=%.4f e_warp=%.4f tf=%.2f seam=%.5f\n", r.id.c_str(),
                r.report.psnr, r.report.ssim, r.report.e_warp_x1e3, r.report.tf, r.report.seam);
  return 0;
}

int cmd_slice(const std::string& in_dir, int column, const std::string& out_file) {
  const VideoClip clip = load_clip_dir(in_dir);
  save_frame_png(yt_slice(clip, column), out_file);
  std::printf("wrote %s\n", out_file.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"video inpainting pipeline"};
  app.require_subcommand(1);

  std::string spec_file, out_path, in_path, config_file, ref_dir, debug_dir;
  std::string anchors_csv;
  int seed = -1, threads = 0, dilate_radius = 2, column = 0;
  bool pair = false;

  auto* synth = app.add_subcommand("synth", "generate a synthetic scene");
  synth->add_option("--spec", spec_file, "scene spec file")->required();
  synth->add_option("--out", out_path, "output root directory")->required();
  synth->add_option("--seed", seed, "seed override");

  auto* masks = app.add_subcommand("masks", "propagate anchor masks");
  masks->add_option("--in", in_path, "scene root (frames/, masks/, shadow_masks/)")->required();
  masks->add_option("--out", out_path, "output mask directory")->required();
  masks->add_option("--anchors", anchors_csv, "comma-separated anchor frame indices");
  masks->add_flag("--pair-shadows", pair, "pair shadows into the anchor instances");
  masks->add_option("--dilate", dilate_radius, "propagation dilation radius");

  auto* inpaint = app.add_subcommand("inpaint", "run the inpainting pipeline");
  inpaint->add_option("--config", config_file, "pipeline config file")->required();
  inpaint->add_option("--seed", seed, "seed override");
  inpaint->add_option("--debug-dir", debug_dir, "dump stage intermediates here");
  inpaint->add_option("--threads", threads, "window worker threads");

  auto* eval = app.add_subcommand("eval", "compare two frame directories");
  eval->add_option("--test", in_path, "directory under test")->required();
  eval->add_option("--ref", ref_dir, "reference directory")->required();
  eval->add_option("--out", out_path, "report JSON path")->required();

  auto* ablate = app.add_subcommand("ablate", "stage-toggle ablation table");
  ablate->add_option("--config", config_file, "pipeline config file")->required();
  ablate->add_option("--out", out_path, "CSV output path")->required();
  ablate->add_option("--seed", seed, "seed override");
  ablate->add_option("--threads", threads, "window worker threads");

  auto* slice = app.add_subcommand("slice", "render a Y-T slice");
  slice->add_option("--in", in_path, "frame directory")->required();
  slice->add_option("--column", column, "pixel column")->required();
  slice->add_option("--out", out_path, "PNG output path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) return cmd_synth(spec_file, out_path, seed);
    if (masks->parsed()) {
      std::vector<int> anchor_list;
      if (!anchors_csv.empty()) {
        Config tmp;
        tmp.set("anchors", anchors_csv);
        anchor_list = tmp.get_int_list("anchors", {});
      }
      return cmd_masks(in_path, out_path, anchor_list, pair, dilate_radius);
    }
    if (inpaint->parsed()) return cmd_inpaint(config_file, seed, debug_dir, threads);
    if (eval->parsed()) return cmd_eval(in_path, ref_dir, out_path);
    if (ablate->parsed()) return cmd_ablate(config_file, out_path, seed, threads);
    if (slice->parsed()) return cmd_slice(in_path, column, out_path);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}

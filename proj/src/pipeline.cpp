#include "vip/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "vip/error.hpp"
#include "vip/latent.hpp"
#include "vip/maskops.hpp"
#include "vip/video_io.hpp"

namespace vip {
namespace {

namespace fs = std::filesystem;

// Soft composite weight: 1 on hole pixels, box-blurred falloff outside so the
// transition never bleeds masked content back into the hole.
std::vector<double> feather_mask(const Mask& hole, int radius) {
  const int H = hole.height, W = hole.width;
  std::vector<double> soft(static_cast<size_t>(H) * W, 0.0);
  const double norm = 1.0 / ((2.0 * radius + 1) * (2.0 * radius + 1));
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      const size_t i = static_cast<size_t>(y) * W + x;
      if (hole.at(y, x)) {
        soft[i] = 1.0;
        continue;
      }
      if (radius == 0) continue;
      int inside = 0;
      for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx) {
          const int ny = y + dy, nx = x + dx;
          if (ny >= 0 && nx >= 0 && ny < H && nx < W && hole.at(ny, nx)) ++inside;
        }
      soft[i] = inside * norm;
    }
  return soft;
}

template <typename Fn>
auto stage(const char* name, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.code(), std::string("stage ") + name + ": " + e.what());
  }
}

void dump_clip(const PipelineConfig& cfg, const std::string& sub, const VideoClip& clip) {
  if (cfg.debug_dir.empty()) return;
  save_clip_dir(clip, fs::path(cfg.debug_dir) / sub);
}

void dump_masks(const PipelineConfig& cfg, const std::string& sub, const MaskSeq& masks) {
  if (cfg.debug_dir.empty()) return;
  save_mask_dir(masks, fs::path(cfg.debug_dir) / sub);
}

}  // namespace

PipelineConfig PipelineConfig::from_config(const Config& c) {
  PipelineConfig p;
  p.frames_dir = c.get_string("io.frames", "");
  p.masks_dir = c.get_string("io.masks", "");
  p.plate_dir = c.get_string("io.plate", "");
  p.out_dir = c.get_string("io.out", "");
  p.debug_dir = c.get_string("io.debug", "");
  p.seed = static_cast<uint64_t>(c.get_int("seed", 0));
  p.threads = c.get_int("threads", 1);

  p.op_completion = c.get_bool("stages.op_completion", true);
  p.ref_enabled = c.get_bool("ref.enabled", true);
  const std::string policy = c.get_string("ref.policy", "min_hole_area");
  if (policy == "min_hole_area") {
    p.ref.policy = RefSpec::Policy::MinHoleArea;
  } else if (policy == "explicit") {
    p.ref.policy = RefSpec::Policy::Explicit;
  } else {
    fail(ErrorCode::InvalidArgument, "ref.policy must be min_hole_area or explicit");
  }
  p.ref.index = c.get_int("ref.index", 0);
  const std::string pos = c.get_string("ref.position", "prepend");
  if (pos == "prepend") {
    p.ref.position = RefSpec::Position::Prepend;
  } else if (pos == "adjacent") {
    p.ref.position = RefSpec::Position::Adjacent;
  } else {
    fail(ErrorCode::InvalidArgument, "ref.position must be prepend or adjacent");
  }

  p.anchors = c.get_int_list("masks.anchors", {});
  p.propagate_dilate = c.get_int("masks.dilate", 2);

  p.flow.block = c.get_int("flow.block", 8);
  p.flow.radius = c.get_int("flow.radius", 7);
  p.max_chain = c.get_int("flow.max_chain", 0);

  p.train_steps = c.get_int("sampler.train_steps", 1000);
  p.inference_steps = c.get_int("sampler.inference_steps", 8);
  p.known_reinjection = c.get_bool("sampler.known_reinjection", true);

  const std::string den = c.get_string("denoiser.kind", "prior");
  if (den == "oracle") {
    p.denoiser = DenoiserKind::Oracle;
  } else if (den == "prior") {
    p.denoiser = DenoiserKind::Prior;
  } else if (den == "seam_probe") {
    p.denoiser = DenoiserKind::SeamProbe;
  } else {
    fail(ErrorCode::InvalidArgument, "denoiser.kind must be oracle, prior or seam_probe");
  }
  p.probe_amplitude = c.get_double("denoiser.amplitude", 0.1);

  p.fusion.window_len = c.get_int("fusion.window_len", 24);
  p.fusion.stride = c.get_int("fusion.stride", 12);
  p.fusion.offset = c.get_int("fusion.offset", p.fusion.stride / 2);
  const std::vector<int> steps = c.get_int_list("fusion.steps", {1, 7});
  p.fusion.fusion_steps = std::set<int>(steps.begin(), steps.end());
  p.fusion.noise_corr = c.get_double("fusion.noise_corr", 0.9);
  const std::string mode = c.get_string("fusion.mode", "contiguous");
  if (mode == "contiguous") {
    p.fusion.mode = FusionConfig::Mode::Contiguous;
  } else if (mode.rfind("strided:", 0) == 0) {
    p.fusion.mode = FusionConfig::Mode::Strided;
    p.fusion.strided_n = std::stoi(mode.substr(8));
  } else {
    fail(ErrorCode::InvalidArgument, "fusion.mode must be contiguous or strided:<n>");
  }

  p.composite_feather = c.get_int("composite.feather", 2);
  return p;
}

RunResult run_inpaint(const PipelineConfig& cfg, const PipelineInputs& inputs) {
  const auto t_start = std::chrono::steady_clock::now();
  RunResult res;
  inputs.clip.validate();

  // 0. mask propagation from anchors, when requested
  MaskSeq holes = stage("mask_propagation", [&]() {
    if (cfg.anchors.empty()) {
      check_same_shape(inputs.clip, inputs.holes);
      return inputs.holes;
    }
    std::vector<std::pair<int, Mask>> anchors;
    for (int a : cfg.anchors) {
      if (a < 0 || a >= inputs.holes.frame_count())
        fail(ErrorCode::InvalidArgument, "anchor index out of range");
      anchors.push_back({a, inputs.holes.masks[a]});
    }
    const FlowPairs flows = estimate_clip_flows(inputs.clip, nullptr, cfg.flow);
    return propagate_masks(inputs.clip, anchors, flows, cfg.propagate_dilate);
  });
  dump_masks(cfg, "masks_used", holes);

  // 1. optical-flow completion (OP)
  VideoClip completed = inputs.clip;
  MaskSeq residual = holes;
  if (cfg.op_completion) {
    stage("op_completion", [&]() {
      const FlowPairs flows = estimate_clip_flows(inputs.clip, &holes, cfg.flow);
      res.counters.op_flow_pairs += static_cast<int>(flows.forward.size() + flows.backward.size());
      if (!cfg.debug_dir.empty()) {
        const fs::path fdir = fs::path(cfg.debug_dir) / "flow";
        fs::create_directories(fdir);
        for (size_t i = 0; i < flows.forward.size(); ++i) {
          write_flow(flows.forward[i], fdir / ("fwd_" + std::to_string(i) + ".flo"));
          write_flow(flows.backward[i], fdir / ("bwd_" + std::to_string(i) + ".flo"));
        }
      }
      PropagateResult prop = propagate_pixels(inputs.clip, holes, flows, cfg.max_chain);
      ++res.counters.op_propagate_calls;
      completed = std::move(prop.clip);
      residual = std::move(prop.residual);
      return 0;
    });
  }
  dump_clip(cfg, "completed", completed);
  dump_masks(cfg, "residual", residual);

  // harmonic pre-fill: prior target for the imperfect denoisers and the
  // reference inpainter
  const bool needs_prior =
      cfg.denoiser != PipelineConfig::DenoiserKind::Oracle || cfg.ref_enabled;
  VideoClip prior_clip = completed;
  if (needs_prior) {
    stage("pre_fill", [&]() {
      for (int f = 0; f < prior_clip.frame_count(); ++f) {
        prior_clip.frames[f] = fill_holes(completed.frames[f], residual.masks[f]).frame;
        ++res.counters.fill_calls;
      }
      return 0;
    });
    dump_clip(cfg, "prior", prior_clip);
  }

  // 2. reference image integration (R)
  VideoClip work = completed;
  MaskSeq work_holes = residual;
  VideoClip prior_work = prior_clip;
  std::optional<VideoClip> plate_work = inputs.plate;
  res.ref_slot = -1;
  if (cfg.ref_enabled) {
    stage("ref_frame", [&]() {
      const int ref_idx = select_reference(residual, cfg.ref);
      const Frame ref = inpaint_reference(inputs.clip.frames[ref_idx], holes.masks[ref_idx],
                                          completed.frames[ref_idx], residual.masks[ref_idx]);
      RefSpec ins_spec = cfg.ref;
      ins_spec.index = ref_idx;  // "adjacent" means next to the selected source frame
      InsertResult ins = insert_reference(completed, residual, ref, ins_spec);
      work = std::move(ins.clip);
      work_holes = std::move(ins.holes);
      res.ref_slot = ins.ref_slot;
      RefSpec at_slot;
      at_slot.policy = RefSpec::Policy::Explicit;
      at_slot.position = RefSpec::Position::Adjacent;
      at_slot.index = res.ref_slot;
      prior_work = insert_reference(prior_clip, residual, ref, at_slot).clip;
      if (plate_work) plate_work = insert_reference(*plate_work, residual, ref, at_slot).clip;
      ++res.counters.ref_ops;
      return 0;
    });
  }

  // 3. encode + conditioning
  LatentClip z_masked, z0;
  KnownMap known;
  SegmentPlan plan;
  stage("diffusion", [&]() {
    z_masked = encode(apply_mask(work, work_holes));
    known = downscale_mask(work_holes, kLatentScale);

    std::unique_ptr<Denoiser> den;
    switch (cfg.denoiser) {
      case PipelineConfig::DenoiserKind::Oracle: {
        if (!plate_work)
          fail(ErrorCode::InvalidArgument, "oracle denoiser requires a plate clip");
        den = make_oracle_denoiser(encode(*plate_work));
        break;
      }
      case PipelineConfig::DenoiserKind::Prior:
        den = make_prior_denoiser(encode(prior_work));
        break;
      case PipelineConfig::DenoiserKind::SeamProbe:
        den = make_seam_probe_denoiser(encode(prior_work), cfg.probe_amplitude);
        break;
    }

    const Schedule sched = make_schedule(cfg.train_steps, cfg.inference_steps);
    const LatentClip z_T = init_correlated_noise(work.frame_count(), kLatentChannels,
                                                 z_masked.height, z_masked.width,
                                                 cfg.fusion.noise_corr, cfg.seed);
    plan = plan_segments(work.frame_count(), cfg.fusion);
    SampleOptions opt;
    opt.known_reinjection = cfg.known_reinjection;
    z0 = run_dual_fusion(z_T, known, z_masked, *den, sched, cfg.fusion, opt, cfg.threads);
    z0.pixel_height = z_masked.pixel_height;
    z0.pixel_width = z_masked.pixel_width;
    z0.pixel_channels = z_masked.pixel_channels;
    z0.fps = z_masked.fps;
    return 0;
  });
  res.plan = plan;
  res.report.seam = seam_score(z0, plan);
  res.report.fusion_ops = count_fusion_ops(cfg.fusion, cfg.inference_steps, false);

  // 4. decode (reference removed first) + feathered pixel composite
  stage("composite", [&]() {
    LatentClip z_final = res.ref_slot >= 0 ? remove_reference(z0, res.ref_slot) : z0;
    const VideoClip generated = decode(z_final);
    dump_clip(cfg, "generated", generated);

    res.output = completed;
    for (int f = 0; f < res.output.frame_count(); ++f) {
      const std::vector<double> soft = feather_mask(residual.masks[f], cfg.composite_feather);
      Frame& out = res.output.frames[f];
      const Frame& gen = generated.frames[f];
      for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x) {
          const double w = soft[static_cast<size_t>(y) * out.width + x];
          if (w <= 0.0) continue;
          for (int c = 0; c < out.channels; ++c)
            out.at(y, x, c) = (1.0 - w) * out.at(y, x, c) + w * gen.at(y, x, c);
        }
    }
    return 0;
  });

  // 5. metrics
  stage("metrics", [&]() {
    if (inputs.plate) {
      res.report.psnr = psnr(res.output, *inputs.plate);
      res.report.ssim = ssim(res.output, *inputs.plate);
      std::vector<double> pf;
      for (int f = 0; f < res.output.frame_count(); ++f)
        pf.push_back(psnr_frame(res.output.frames[f], inputs.plate->frames[f]));
      res.report.per_frame_psnr = pf;
    }
    if (res.output.frame_count() >= 2) {
      const FlowPairs mflows = estimate_clip_flows(res.output, nullptr, cfg.flow);
      res.counters.metric_flow_pairs +=
          static_cast<int>(mflows.forward.size() + mflows.backward.size());
      res.report.e_warp_x1e3 = warping_error(res.output, mflows).value * 1e3;
      res.report.tf = temporal_flicker(res.output, nullptr);
    }
    return 0;
  });

  res.report.runtime_ms = std::chrono::duration<double, std::milli>(
                              std::chrono::steady_clock::now() - t_start)
                              .count();
  return res;
}

RunResult run_inpaint_dirs(const PipelineConfig& cfg) {
  PipelineInputs in;
  in.clip = load_clip_dir(cfg.frames_dir);
  in.holes = load_mask_dir(cfg.masks_dir);
  if (!cfg.plate_dir.empty()) in.plate = load_clip_dir(cfg.plate_dir);
  RunResult res = run_inpaint(cfg, in);
  if (!cfg.out_dir.empty()) {
    save_clip_dir(res.output, cfg.out_dir);
    emit_report_json(res.report, (fs::path(cfg.out_dir) / "report.json").string());
  }
  return res;
}

std::vector<AblationRow> run_ablation(const PipelineConfig& base, const PipelineInputs& inputs,
                                      const std::vector<std::pair<bool, bool>>& toggles) {
  if (toggles.empty()) fail(ErrorCode::InvalidArgument, "need at least one toggle combination");
  std::vector<AblationRow> rows;
  for (const auto& [op, ref] : toggles) {
    PipelineConfig cfg = base;
    cfg.op_completion = op;
    cfg.ref_enabled = ref;
    cfg.debug_dir.clear();
    AblationRow row;
    row.op_completion = op;
    row.ref_enabled = ref;
    row.id = op ? (ref ? "op_r" : "op") : (ref ? "r" : "none");
    row.report = run_inpaint(cfg, inputs).report;
    rows.push_back(std::move(row));
  }
  return rows;
}

void emit_report_json(const Report& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path);
  out << report.to_json();
}

void emit_table_csv(const std::vector<AblationRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path);
  out << "config_id,psnr,ssim,e_warp_x1e3,tf,seam,fusion_ops,runtime_ms\n";
  char buf[256];
  for (const AblationRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%s,%.6f,%.6f,%.6f,%.6f,%.6f,%d,%.3f\n", r.id.c_str(),
                  r.report.psnr, r.report.ssim, r.report.e_warp_x1e3, r.report.tf, r.report.seam,
                  r.report.fusion_ops, r.report.runtime_ms);
    out << buf;
  }
}

}  // namespace vip

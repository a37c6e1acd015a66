#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vip/config.hpp"
#include "vip/diffusion.hpp"
#include "vip/flow.hpp"
#include "vip/fusion.hpp"
#include "vip/metrics.hpp"
#include "vip/refframe.hpp"
#include "vip/video.hpp"

namespace vip {

struct PipelineConfig {
  // io (directory layout: <root>/{frames,masks,out}/frame_%05d.png)
  std::string frames_dir;
  std::string masks_dir;
  std::string plate_dir;   // optional; required by the oracle denoiser and metrics
  std::string out_dir;
  std::string debug_dir;   // optional intermediate dumps

  uint64_t seed = 0;
  int threads = 1;

  // stage toggles
  bool op_completion = true;   // optical-flow completion (OP)
  bool ref_enabled = true;     // reference image integration (R)
  RefSpec ref;

  // optional anchor-mask propagation before everything else
  std::vector<int> anchors;    // empty = use the mask directory as-is
  int propagate_dilate = 2;

  FlowParams flow;
  int max_chain = 0;           // 0 = whole clip

  int train_steps = 1000;
  int inference_steps = 8;
  bool known_reinjection = true;

  enum class DenoiserKind { Oracle, Prior, SeamProbe } denoiser = DenoiserKind::Prior;
  double probe_amplitude = 0.1;

  FusionConfig fusion;
  int composite_feather = 2;

  static PipelineConfig from_config(const Config& cfg);
};

struct PipelineInputs {
  VideoClip clip;
  MaskSeq holes;
  std::optional<VideoClip> plate;
};

struct StageCounters {
  int op_flow_pairs = 0;       // completion-stage flow estimations
  int op_propagate_calls = 0;  // propagate_pixels invocations
  int fill_calls = 0;
  int ref_ops = 0;             // select/inpaint/insert/remove taken together
  int metric_flow_pairs = 0;
};

struct RunResult {
  VideoClip output;
  Report report;
  StageCounters counters;
  SegmentPlan plan;
  int ref_slot = -1;  // -1 when the reference stage is disabled
};

// Full inference pass over in-memory inputs.
RunResult run_inpaint(const PipelineConfig& cfg, const PipelineInputs& inputs);

// Loads inputs from the io paths, runs, writes out_dir frames + report.json.
RunResult run_inpaint_dirs(const PipelineConfig& cfg);

struct AblationRow {
  std::string id;
  bool op_completion = false;
  bool ref_enabled = false;
  Report report;
};

// Runs one inference per toggle combination with a shared seed. The default
// combinations are (-,-), (OP,-), (-,R), (OP,R).
std::vector<AblationRow> run_ablation(const PipelineConfig& base, const PipelineInputs& inputs,
                                      const std::vector<std::pair<bool, bool>>& toggles = {
                                          {false, false}, {true, false}, {false, true}, {true, true}});

void emit_report_json(const Report& report, const std::string& path);
void emit_table_csv(const std::vector<AblationRow>& rows, const std::string& path);

}  // namespace vip

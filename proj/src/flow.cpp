#include "vip/flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>

#include "vip/error.hpp"

namespace vip {
namespace {

double block_sad(const Frame& a, const Frame& b, int ay, int ax, int by, int bx, int bh, int bw) {
  double sad = 0.0;
  for (int y = 0; y < bh; ++y)
    for (int x = 0; x < bw; ++x)
      for (int c = 0; c < a.channels; ++c)
        sad += std::fabs(a.at(ay + y, ax + x, c) - b.at(by + y, bx + x, c));
  return sad;
}

double lower_median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const size_t mid = (v.size() - 1) / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  return v[mid];
}

}  // namespace

FlowField estimate_flow(const Frame& a, const Frame& b, const Mask* exclude,
                        const FlowParams& params) {
  if (!a.same_shape(b)) fail(ErrorCode::DimensionMismatch, "frame shapes disagree");
  if (exclude && (exclude->height != a.height || exclude->width != a.width))
    fail(ErrorCode::DimensionMismatch, "exclude mask shape disagrees");
  if (params.block < 1 || params.radius < 0)
    fail(ErrorCode::InvalidArgument, "need block >= 1 and radius >= 0");

  const int H = a.height, W = a.width, B = params.block, R = params.radius;
  const int grid_h = (H + B - 1) / B;
  const int grid_w = (W + B - 1) / B;

  FlowField flow = FlowField::zeros(H, W);
  std::vector<double> bu(static_cast<size_t>(grid_h) * grid_w, 0.0);
  std::vector<double> bv(bu.size(), 0.0);
  std::vector<uint8_t> bvalid(bu.size(), 0);
  std::vector<double> med_u, med_v;

  for (int gy = 0; gy < grid_h; ++gy) {
    for (int gx = 0; gx < grid_w; ++gx) {
      const int y0 = gy * B, x0 = gx * B;
      const int bh = std::min(B, H - y0), bw = std::min(B, W - x0);
      const size_t gi = static_cast<size_t>(gy) * grid_w + gx;

      bool excluded = false;
      if (exclude) {
        for (int y = y0; y < y0 + bh && !excluded; ++y)
          for (int x = x0; x < x0 + bw; ++x)
            if (exclude->at(y, x)) {
              excluded = true;
              break;
            }
      }
      if (excluded) continue;  // valid stays 0, motion filled from median below

      double best_sad = std::numeric_limits<double>::infinity();
      int best_cost = std::numeric_limits<int>::max();
      int best_u = 0, best_v = 0;
      for (int dv = -R; dv <= R; ++dv) {
        const int ty = y0 + dv;
        if (ty < 0 || ty + bh > H) continue;
        for (int du = -R; du <= R; ++du) {
          const int tx = x0 + du;
          if (tx < 0 || tx + bw > W) continue;
          const double sad = block_sad(a, b, y0, x0, ty, tx, bh, bw);
          const int cost = std::abs(du) + std::abs(dv);
          const bool better =
              sad < best_sad ||
              (sad == best_sad &&
               (cost < best_cost ||
                (cost == best_cost && (du < best_u || (du == best_u && dv < best_v)))));
          if (better) {
            best_sad = sad;
            best_cost = cost;
            best_u = du;
            best_v = dv;
          }
        }
      }
      bu[gi] = best_u;
      bv[gi] = best_v;
      bvalid[gi] = 1;
      med_u.push_back(best_u);
      med_v.push_back(best_v);
    }
  }

  const double fb_u = lower_median(med_u);
  const double fb_v = lower_median(med_v);
  for (int gy = 0; gy < grid_h; ++gy)
    for (int gx = 0; gx < grid_w; ++gx) {
      const size_t gi = static_cast<size_t>(gy) * grid_w + gx;
      if (!bvalid[gi]) {
        bu[gi] = fb_u;
        bv[gi] = fb_v;
      }
    }

  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      const size_t gi = static_cast<size_t>(y / B) * grid_w + (x / B);
      const size_t pi = flow.idx(y, x);
      flow.u[pi] = bu[gi];
      flow.v[pi] = bv[gi];
      flow.valid[pi] = bvalid[gi];
    }
  return flow;
}

std::pair<Frame, Mask> warp(const Frame& frame, const FlowField& flow) {
  if (frame.height != flow.height || frame.width != flow.width)
    fail(ErrorCode::DimensionMismatch, "frame and flow shapes disagree");
  const int H = frame.height, W = frame.width, C = frame.channels;
  Frame out = Frame::zeros(H, W, C);
  Mask coverage = Mask::zeros(H, W);
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      const size_t pi = flow.idx(y, x);
      if (!flow.valid[pi]) continue;
      const double sx = x + flow.u[pi];
      const double sy = y + flow.v[pi];
      const int x0 = static_cast<int>(std::floor(sx));
      const int y0 = static_cast<int>(std::floor(sy));
      const double fx = sx - x0;
      const double fy = sy - y0;
      const int x1 = fx > 0.0 ? x0 + 1 : x0;  // footprint only where weight > 0
      const int y1 = fy > 0.0 ? y0 + 1 : y0;
      if (x0 < 0 || y0 < 0 || x1 >= W || y1 >= H) continue;
      for (int c = 0; c < C; ++c) {
        const double top = frame.at(y0, x0, c) * (1 - fx) + frame.at(y0, x1, c) * fx;
        const double bot = frame.at(y1, x0, c) * (1 - fx) + frame.at(y1, x1, c) * fx;
        out.at(y, x, c) = top * (1 - fy) + bot * fy;
      }
      coverage.set(y, x, 1);
    }
  return {std::move(out), std::move(coverage)};
}

FlowPairs estimate_clip_flows(const VideoClip& clip, const MaskSeq* holes,
                              const FlowParams& params) {
  clip.validate();
  if (holes) check_same_shape(clip, *holes);
  FlowPairs pairs;
  const int F = clip.frame_count();
  for (int t = 0; t + 1 < F; ++t) {
    Mask ex;
    const Mask* exp = nullptr;
    if (holes) {
      // untrusted where either endpoint has holes
      ex = holes->masks[t];
      const Mask& other = holes->masks[t + 1];
      for (size_t i = 0; i < ex.data.size(); ++i) ex.data[i] |= other.data[i];
      exp = &ex;
    }
    FlowField fwd = estimate_flow(clip.frames[t], clip.frames[t + 1], exp, params);
    fwd.from_index = t;
    fwd.to_index = t + 1;
    FlowField bwd = estimate_flow(clip.frames[t + 1], clip.frames[t], exp, params);
    bwd.from_index = t + 1;
    bwd.to_index = t;
    pairs.forward.push_back(std::move(fwd));
    pairs.backward.push_back(std::move(bwd));
  }
  return pairs;
}

FlowPairs translation_flows(int frames, int height, int width, int dx, int dy) {
  FlowPairs pairs;
  for (int t = 0; t + 1 < frames; ++t) {
    FlowField fwd = FlowField::zeros(height, width);
    std::fill(fwd.u.begin(), fwd.u.end(), static_cast<double>(dx));
    std::fill(fwd.v.begin(), fwd.v.end(), static_cast<double>(dy));
    fwd.from_index = t;
    fwd.to_index = t + 1;
    FlowField bwd = FlowField::zeros(height, width);
    std::fill(bwd.u.begin(), bwd.u.end(), static_cast<double>(-dx));
    std::fill(bwd.v.begin(), bwd.v.end(), static_cast<double>(-dy));
    bwd.from_index = t + 1;
    bwd.to_index = t;
    pairs.forward.push_back(std::move(fwd));
    pairs.backward.push_back(std::move(bwd));
  }
  return pairs;
}

PropagateResult propagate_pixels(const VideoClip& clip, const MaskSeq& holes,
                                 const FlowPairs& flows, int max_chain) {
  check_same_shape(clip, holes);
  const int F = clip.frame_count(), H = clip.height(), W = clip.width(), C = clip.channels();
  if (static_cast<int>(flows.forward.size()) != F - 1 ||
      static_cast<int>(flows.backward.size()) != F - 1)
    fail(ErrorCode::DimensionMismatch, "flows must cover all adjacent pairs");
  if (max_chain <= 0) max_chain = F;

  PropagateResult res{clip, holes};

  struct Walker {
    int x, y;
    bool alive;
  };

  for (int t = 0; t < F; ++t) {
    const Mask& hole = holes.masks[t];
    for (int py = 0; py < H; ++py)
      for (int px = 0; px < W; ++px) {
        if (!hole.at(py, px)) continue;
        Walker back{px, py, t > 0};
        Walker fwd{px, py, t < F - 1};
        bool done = false;
        for (int k = 1; k <= max_chain && !done && (back.alive || fwd.alive); ++k) {
          // backward chain first: ties prefer the earlier frame
          if (back.alive) {
            const int s = t - k;  // landing frame
            if (s < 0) {
              back.alive = false;
            } else {
              const FlowField& step = flows.backward[s];  // s+1 -> s
              const size_t pi = step.idx(back.y, back.x);
              const int nx = back.x + static_cast<int>(std::lround(step.u[pi]));
              const int ny = back.y + static_cast<int>(std::lround(step.v[pi]));
              if (nx < 0 || ny < 0 || nx >= W || ny >= H) {
                back.alive = false;
              } else {
                back.x = nx;
                back.y = ny;
                if (!holes.masks[s].at(ny, nx)) {
                  for (int c = 0; c < C; ++c)
                    res.clip.frames[t].at(py, px, c) = clip.frames[s].at(ny, nx, c);
                  res.residual.masks[t].set(py, px, 0);
                  done = true;
                }
              }
            }
          }
          if (done || !fwd.alive) continue;
          const int s = t + k;
          if (s >= F) {
            fwd.alive = false;
          } else {
            const FlowField& step = flows.forward[s - 1];  // s-1 -> s
            const size_t pi = step.idx(fwd.y, fwd.x);
            const int nx = fwd.x + static_cast<int>(std::lround(step.u[pi]));
            const int ny = fwd.y + static_cast<int>(std::lround(step.v[pi]));
            if (nx < 0 || ny < 0 || nx >= W || ny >= H) {
              fwd.alive = false;
            } else {
              fwd.x = nx;
              fwd.y = ny;
              if (!holes.masks[s].at(ny, nx) &&
                  flows.backward[s - 1].valid[flows.backward[s - 1].idx(ny, nx)]) {
                for (int c = 0; c < C; ++c)
                  res.clip.frames[t].at(py, px, c) = clip.frames[s].at(ny, nx, c);
                res.residual.masks[t].set(py, px, 0);
                done = true;
              }
            }
          }
        }
      }
  }
  return res;
}

FillResult fill_holes(const Frame& frame, const Mask& hole) {
  if (hole.height != frame.height || hole.width != frame.width)
    fail(ErrorCode::DimensionMismatch, "frame and hole shapes disagree");
  const int H = frame.height, W = frame.width, C = frame.channels;
  FillResult res{frame, false};

  size_t hole_count = hole.count();
  if (hole_count == 0) return res;
  if (hole_count == frame.data.size() / C) {
    res.frame = Frame::constant(H, W, C, 0.5);
    res.all_hole_fallback = true;
    return res;
  }

  // seed: mean of known 4-neighbors where available, else frame known-mean
  double known_mean = 0.0;
  size_t known_n = 0;
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x)
      if (!hole.at(y, x)) {
        for (int c = 0; c < C; ++c) known_mean += frame.at(y, x, c);
        known_n += C;
      }
  known_mean /= static_cast<double>(known_n);

  constexpr int kOff[4][2] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
  std::vector<std::pair<int, int>> hole_px;
  hole_px.reserve(hole_count);
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x)
      if (hole.at(y, x)) {
        hole_px.push_back({y, x});
        double sum = 0.0;
        int n = 0;
        for (const auto& o : kOff) {
          const int ny = y + o[0], nx = x + o[1];
          if (ny < 0 || nx < 0 || ny >= H || nx >= W || hole.at(ny, nx)) continue;
          for (int c = 0; c < C; ++c) sum += frame.at(ny, nx, c);
          n += C;
        }
        const double seed = n > 0 ? sum / n : known_mean;
        for (int c = 0; c < C; ++c) res.frame.at(y, x, c) = seed;
      }

  const int max_iter = 10 * std::max(H, W);
  Frame next = res.frame;
  for (int it = 0; it < max_iter; ++it) {
    double max_delta = 0.0;
    for (const auto& [y, x] : hole_px) {
      for (int c = 0; c < C; ++c) {
        double sum = 0.0;
        int n = 0;
        for (const auto& o : kOff) {
          const int ny = y + o[0], nx = x + o[1];
          if (ny < 0 || nx < 0 || ny >= H || nx >= W) continue;
          sum += res.frame.at(ny, nx, c);
          ++n;
        }
        const double v = sum / n;
        max_delta = std::max(max_delta, std::fabs(v - res.frame.at(y, x, c)));
        next.at(y, x, c) = v;
      }
    }
    for (const auto& [y, x] : hole_px)
      for (int c = 0; c < C; ++c) res.frame.at(y, x, c) = next.at(y, x, c);
    if (max_delta < 1e-4) break;
  }
  return res;
}

void write_flow(const FlowField& flow, const std::filesystem::path& file) {
  std::FILE* fp = std::fopen(file.c_str(), "wb");
  if (!fp) fail(ErrorCode::IoError, "cannot write " + file.string());
  const int32_t header[4] = {flow.from_index, flow.to_index, flow.height, flow.width};
  std::fwrite(header, sizeof(int32_t), 4, fp);
  const size_t n = static_cast<size_t>(flow.height) * flow.width;
  for (size_t i = 0; i < n; ++i) {
    const float uv[2] = {static_cast<float>(flow.u[i]), static_cast<float>(flow.v[i])};
    std::fwrite(uv, sizeof(float), 2, fp);
  }
  std::fwrite(flow.valid.data(), 1, n, fp);
  std::fclose(fp);
}

FlowField read_flow(const std::filesystem::path& file) {
  std::FILE* fp = std::fopen(file.c_str(), "rb");
  if (!fp) fail(ErrorCode::IoError, "cannot open " + file.string());
  int32_t header[4];
  if (std::fread(header, sizeof(int32_t), 4, fp) != 4) {
    std::fclose(fp);
    fail(ErrorCode::DecodeError, "truncated flow file: " + file.string());
  }
  FlowField flow = FlowField::zeros(header[2], header[3]);
  flow.from_index = header[0];
  flow.to_index = header[1];
  const size_t n = static_cast<size_t>(flow.height) * flow.width;
  for (size_t i = 0; i < n; ++i) {
    float uv[2];
    if (std::fread(uv, sizeof(float), 2, fp) != 2) {
      std::fclose(fp);
      fail(ErrorCode::DecodeError, "truncated flow file: " + file.string());
    }
    flow.u[i] = uv[0];
    flow.v[i] = uv[1];
  }
  if (std::fread(flow.valid.data(), 1, n, fp) != n) {
    std::fclose(fp);
    fail(ErrorCode::DecodeError, "truncated flow file: " + file.string());
  }
  std::fclose(fp);
  return flow;
}

}  // namespace vip

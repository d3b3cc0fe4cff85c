// SPDX-License-Identifier: Apache-2.0
#include "thinkgrasp/perception.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "thinkgrasp/errors.hpp"
#include "thinkgrasp/png_io.hpp"

namespace thinkgrasp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::array<std::uint8_t, 3> color_rgb(const std::string& name) {
  static const std::map<std::string, std::array<std::uint8_t, 3>> table = {
      {"red", {220, 50, 47}},    {"green", {60, 160, 60}},  {"blue", {38, 89, 198}},
      {"yellow", {226, 192, 0}}, {"orange", {235, 130, 0}}, {"purple", {120, 60, 160}},
      {"pink", {231, 130, 170}}, {"brown", {130, 90, 44}},  {"black", {30, 30, 30}},
      {"white", {240, 240, 240}},{"gray", {128, 128, 128}}, {"cyan", {42, 190, 200}},
  };
  auto it = table.find(name);
  if (it == table.end()) return {200, 200, 200};
  return it->second;
}

constexpr std::array<std::uint8_t, 3> kTableColor = {156, 148, 136};

}  // namespace

CameraModel default_camera(const Aabb& workspace) {
  CameraModel cam;
  const Vec3 target = 0.5 * (workspace.min + workspace.max).cwiseProduct(Vec3(1, 1, 0));
  const double span = std::max(workspace.max.x() - workspace.min.x(),
                               workspace.max.y() - workspace.min.y());
  // 45 degree elevation, looking at the table center from the -y side
  const double dist = 1.55 * span;
  cam.position = target + dist * Vec3(0, -std::sqrt(0.5), std::sqrt(0.5));
  const Vec3 forward = (target - cam.position).normalized();
  const Vec3 right = forward.cross(Vec3(0, 0, 1)).normalized();
  const Vec3 down = forward.cross(right).normalized();
  cam.rotation.col(0) = right;
  cam.rotation.col(1) = down;
  cam.rotation.col(2) = forward;
  return cam;
}

Vec3 backproject(const CameraModel& cam, double u, double v, double depth) {
  if (!(depth > 0)) throw LookupError("backproject: depth must be positive");
  return cam.rotation * cam.backproject_cam(u, v, depth) + cam.position;
}

std::optional<Vec3> project(const CameraModel& cam, const Vec3& world) {
  const Vec3 q = cam.rotation.transpose() * (world - cam.position);
  if (q.z() <= 0) return std::nullopt;
  return Vec3(cam.cx + cam.fx * q.x() / q.z(), cam.cy + cam.fy * q.y() / q.z(), q.z());
}

PixelBox PixelBox::union_with(const PixelBox& o) const {
  if (!valid()) return o;
  if (!o.valid()) return *this;
  return {std::min(x1, o.x1), std::min(y1, o.y1), std::max(x2, o.x2), std::max(y2, o.y2)};
}

PixelBox PixelBox::intersect(const PixelBox& o) const {
  return {std::max(x1, o.x1), std::max(y1, o.y1), std::min(x2, o.x2), std::min(y2, o.y2)};
}

std::size_t SegmentMask::pixel_count() const {
  return std::size_t(std::count(pixels.begin(), pixels.end(), std::uint8_t(1)));
}

// ---------------------------------------------------------------------------
// Rendering

namespace {

struct RenderTarget {
  std::vector<double> depth;        // +inf while rendering
  std::vector<std::int32_t> owner;  // -1 background
  int width, height;
};

Ray pixel_ray(const CameraModel& cam, int u, int v) {
  // dir has camera z-component 1, so the ray parameter equals camera depth
  const Vec3 dir_cam((u - cam.cx) / cam.fx, (v - cam.cy) / cam.fy, 1.0);
  return Ray{cam.position, cam.rotation * dir_cam};
}

/// Conservative screen rectangle covering the object's bounding sphere.
std::optional<PixelBox> screen_rect(const CameraModel& cam, const Vec3& center,
                                    double radius) {
  const auto proj = project(cam, center);
  if (!proj) return std::nullopt;
  const double z = proj->z();
  if (z <= radius + 1e-6) return PixelBox{0, 0, cam.width, cam.height};
  const double r_px = std::max(cam.fx, cam.fy) * radius / (z - radius) + 2.0;
  PixelBox box{int(std::floor(proj->x() - r_px)), int(std::floor(proj->y() - r_px)),
               int(std::ceil(proj->x() + r_px)) + 1, int(std::ceil(proj->y() + r_px)) + 1};
  box = box.intersect({0, 0, cam.width, cam.height});
  if (!box.valid()) return std::nullopt;
  return box;
}

void raster_object(const CameraModel& cam, const ObjectInstance& obj, RenderTarget& rt) {
  const auto rect = screen_rect(cam, obj.pose.pos, obj.shape.bounding_radius());
  if (!rect) return;
  for (int v = rect->y1; v < rect->y2; ++v)
    for (int u = rect->x1; u < rect->x2; ++u) {
      const Ray ray = pixel_ray(cam, u, v);
      const auto t = intersect_primitive(ray, obj.shape, obj.pose);
      if (!t) continue;
      const std::size_t i = std::size_t(v) * rt.width + u;
      if (*t < rt.depth[i]) {
        rt.depth[i] = *t;
        rt.owner[i] = obj.id;
      }
    }
}

void raster_table(const CameraModel& cam, const Aabb& ws, RenderTarget& rt) {
  for (int v = 0; v < rt.height; ++v)
    for (int u = 0; u < rt.width; ++u) {
      const Ray ray = pixel_ray(cam, u, v);
      if (std::abs(ray.dir.z()) < 1e-12) continue;
      const double t = -ray.origin.z() / ray.dir.z();
      if (t <= 0) continue;
      const Vec3 p = ray.origin + t * ray.dir;
      if (p.x() < ws.min.x() || p.x() > ws.max.x() || p.y() < ws.min.y() ||
          p.y() > ws.max.y())
        continue;
      const std::size_t i = std::size_t(v) * rt.width + u;
      if (t < rt.depth[i]) rt.depth[i] = t;
    }
}

}  // namespace

Observation render(const Scene& scene, const CameraModel& camera) {
  RenderTarget rt;
  rt.width = camera.width;
  rt.height = camera.height;
  rt.depth.assign(std::size_t(rt.width) * rt.height, kInf);
  rt.owner.assign(std::size_t(rt.width) * rt.height, -1);

  raster_table(camera, scene.workspace, rt);
  for (const auto& obj : scene.objects) raster_object(camera, obj, rt);

  Observation obs;
  obs.camera = camera;
  obs.depth.assign(rt.depth.size(), 0.0);
  obs.pixel_owner = std::move(rt.owner);
  obs.rgb.assign(rt.depth.size(), {16, 16, 20});
  obs.cloud.view_origin = camera.position;

  std::map<int, std::array<std::uint8_t, 3>> colors;
  for (const auto& o : scene.objects) colors[o.id] = color_rgb(o.color);

  for (int v = 0; v < rt.height; ++v)
    for (int u = 0; u < rt.width; ++u) {
      const std::size_t i = std::size_t(v) * rt.width + u;
      if (rt.depth[i] == kInf) continue;
      obs.depth[i] = rt.depth[i];
      const int owner = obs.pixel_owner[i];
      if (owner < 0) {
        obs.rgb[i] = kTableColor;
        continue;
      }
      obs.rgb[i] = colors[owner];
      obs.cloud.points.push_back(backproject(camera, u, v, rt.depth[i]));
      obs.cloud.colors.push_back(obs.rgb[i]);
      obs.cloud.source_pixels.push_back({u, v});
    }
  return obs;
}

std::size_t solo_pixel_count(const Scene& scene, const CameraModel& camera, int id) {
  const ObjectInstance* obj = scene.find(id);
  if (!obj) throw LookupError("solo_pixel_count: unknown id " + std::to_string(id));
  RenderTarget rt;
  rt.width = camera.width;
  rt.height = camera.height;
  rt.depth.assign(std::size_t(rt.width) * rt.height, kInf);
  rt.owner.assign(std::size_t(rt.width) * rt.height, -1);
  raster_object(camera, *obj, rt);
  return std::size_t(std::count(rt.owner.begin(), rt.owner.end(), id));
}

double visible_fraction(const Scene& scene, const CameraModel& camera, int id) {
  const std::size_t solo = solo_pixel_count(scene, camera, id);
  if (solo == 0)
    throw LookupError("visible_fraction: object " + std::to_string(id) +
                      " projects to zero pixels even alone");
  const Observation obs = render(scene, camera);
  const std::size_t seen =
      std::size_t(std::count(obs.pixel_owner.begin(), obs.pixel_owner.end(), id));
  return double(seen) / double(solo);
}

// ---------------------------------------------------------------------------
// Segmentation oracle

namespace {

struct Query {
  std::optional<std::string> color;
  std::string category;
  std::optional<std::string> part;
};

std::vector<std::string> tokenize_lower(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    if (std::isalnum(static_cast<unsigned char>(ch))) {
      cur.push_back(char(std::tolower(static_cast<unsigned char>(ch))));
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::optional<Query> parse_query(const std::string& text) {
  auto tokens = tokenize_lower(text);
  if (tokens.empty()) return std::nullopt;
  Query q;
  std::size_t i = 0;
  if (is_palette_color(tokens[0])) {
    q.color = tokens[0];
    i = 1;
  }
  if (i >= tokens.size()) return std::nullopt;
  if (!find_category(tokens[i])) return std::nullopt;
  q.category = tokens[i];
  ++i;
  if (i < tokens.size()) q.part = tokens[i];
  return q;
}

PixelBox tight_bbox(const std::vector<std::uint8_t>& pixels, int width, int height) {
  PixelBox box{width, height, 0, 0};
  for (int v = 0; v < height; ++v)
    for (int u = 0; u < width; ++u)
      if (pixels[std::size_t(v) * width + u]) {
        box.x1 = std::min(box.x1, u);
        box.y1 = std::min(box.y1, v);
        box.x2 = std::max(box.x2, u + 1);
        box.y2 = std::max(box.y2, v + 1);
      }
  return box;
}

std::vector<std::uint8_t> morph(const std::vector<std::uint8_t>& pixels, int width,
                                int height, int radius, bool dilate) {
  std::vector<std::uint8_t> out(pixels.size(), 0);
  for (int v = 0; v < height; ++v)
    for (int u = 0; u < width; ++u) {
      bool any = false, all = true;
      for (int dv = -radius; dv <= radius && (dilate ? !any : all); ++dv)
        for (int du = -radius; du <= radius && (dilate ? !any : all); ++du) {
          const int uu = u + du, vv = v + dv;
          const bool on = uu >= 0 && uu < width && vv >= 0 && vv < height &&
                          pixels[std::size_t(vv) * width + uu];
          any = any || on;
          all = all && on;
        }
      out[std::size_t(v) * width + u] = dilate ? any : all;
    }
  return out;
}

}  // namespace

std::vector<SegmentMask> segment_by_text(const Observation& obs, const Scene& scene,
                                         const std::string& query,
                                         const SegmentNoise& noise) {
  if (query.empty()) throw LookupError("segment_by_text: empty query");
  const auto parsed = parse_query(query);
  std::vector<SegmentMask> out;
  if (!parsed) return out;

  const int W = obs.width(), H = obs.height();
  std::mt19937_64 rng(noise.seed);

  // iterate objects in id order so jitter draws are reproducible
  std::vector<const ObjectInstance*> objects;
  for (const auto& o : scene.objects) objects.push_back(&o);
  std::sort(objects.begin(), objects.end(),
            [](const ObjectInstance* a, const ObjectInstance* b) { return a->id < b->id; });

  for (const ObjectInstance* obj : objects) {
    if (obj->category != parsed->category) continue;
    if (parsed->color && obj->color != *parsed->color) continue;
    const ObjectPart* part = nullptr;
    if (parsed->part) {
      for (const auto& p : obj->parts)
        if (p.name == *parsed->part) part = &p;
      if (!part) continue;
    }

    std::vector<std::uint8_t> pixels(std::size_t(W) * H, 0);
    std::size_t visible = 0;
    for (int v = 0; v < H; ++v)
      for (int u = 0; u < W; ++u) {
        const std::size_t i = obs.idx(u, v);
        if (obs.pixel_owner[i] != obj->id) continue;
        if (part) {
          const Vec3 world = backproject(obs.camera, u, v, obs.depth[i]);
          if (!part->box.contains(obj->pose.to_local(world), 1e-9)) continue;
        }
        pixels[i] = 1;
        ++visible;
      }
    if (visible == 0) continue;

    // confidence = visible fraction of the object (or of the part)
    double denom;
    if (part) {
      // part pixels when the object is rendered alone
      Scene solo;
      solo.workspace = scene.workspace;
      solo.objects = {*obj};
      const Observation solo_obs = render(solo, obs.camera);
      std::size_t part_solo = 0;
      for (int v = 0; v < H; ++v)
        for (int u = 0; u < W; ++u) {
          const std::size_t i = solo_obs.idx(u, v);
          if (solo_obs.pixel_owner[i] != obj->id) continue;
          const Vec3 world = backproject(obs.camera, u, v, solo_obs.depth[i]);
          if (part->box.contains(obj->pose.to_local(world), 1e-9)) ++part_solo;
        }
      if (part_solo == 0) continue;
      denom = double(part_solo);
    } else {
      denom = double(solo_pixel_count(scene, obs.camera, obj->id));
      if (denom == 0) continue;
    }
    double confidence = double(visible) / denom;
    if (noise.confidence_jitter > 0) {
      confidence *= 1.0 + std::uniform_real_distribution<double>(
                              -noise.confidence_jitter, noise.confidence_jitter)(rng);
      confidence = std::clamp(confidence, 0.0, 1.0);
    }

    if (noise.dilation_px != 0)
      pixels = morph(pixels, W, H, std::abs(noise.dilation_px), noise.dilation_px > 0);
    const PixelBox bbox = tight_bbox(pixels, W, H);
    if (!bbox.valid()) continue;  // erosion may empty the mask

    SegmentMask mask;
    mask.pixels = std::move(pixels);
    mask.bbox = bbox;
    mask.confidence = confidence;
    mask.matched_text = query;
    mask.width = W;
    mask.height = H;
    out.push_back(std::move(mask));
  }

  std::stable_sort(out.begin(), out.end(), [](const SegmentMask& a, const SegmentMask& b) {
    return a.confidence > b.confidence;
  });
  return out;
}

PointCloud crop_cloud(const Observation& obs, const PixelBox& region) {
  const PixelBox r = region.intersect({0, 0, obs.width(), obs.height()});
  if (!r.valid()) throw EmptyCropError("crop region does not intersect the image");
  PointCloud out;
  out.view_origin = obs.cloud.view_origin;
  for (std::size_t i = 0; i < obs.cloud.size(); ++i) {
    const auto px = obs.cloud.source_pixels[i];
    if (!r.contains(px.u, px.v)) continue;
    out.points.push_back(obs.cloud.points[i]);
    out.colors.push_back(obs.cloud.colors[i]);
    out.source_pixels.push_back(px);
  }
  if (out.empty()) throw EmptyCropError("crop region covers no cloud points");
  return out;
}

PointCloud crop_cloud(const Observation& obs, const SegmentMask& mask) {
  PointCloud out;
  out.view_origin = obs.cloud.view_origin;
  for (std::size_t i = 0; i < obs.cloud.size(); ++i) {
    const auto px = obs.cloud.source_pixels[i];
    if (!mask.test(px.u, px.v)) continue;
    out.points.push_back(obs.cloud.points[i]);
    out.colors.push_back(obs.cloud.colors[i]);
    out.source_pixels.push_back(px);
  }
  if (out.empty()) throw EmptyCropError("mask covers no cloud points");
  return out;
}

void export_observation_png(const Observation& obs, const std::string& rgb_path,
                            const std::string& depth_path) {
  write_file_bytes(rgb_path, encode_png_rgb8(obs.rgb, obs.width(), obs.height()));
  std::vector<std::uint16_t> mm(obs.depth.size(), 0);
  for (std::size_t i = 0; i < obs.depth.size(); ++i) {
    const double v = std::clamp(obs.depth[i] * 1000.0, 0.0, 65535.0);
    mm[i] = std::uint16_t(std::lround(v));
  }
  write_file_bytes(depth_path, encode_png_gray16(mm, obs.width(), obs.height()));
}

}  // namespace thinkgrasp

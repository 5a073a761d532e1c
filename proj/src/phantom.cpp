#include "spindle/phantom.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace spindle {

namespace {

using nlohmann::json;

bool inside(const Box& b, const Vec3& p) {
  for (int a = 0; a < 3; ++a)
    if (p[a] < b.min[a] || p[a] > b.max[a]) return false;
  return true;
}

struct Membership {
  const VolumeShape& shape;

  bool operator()(const HollowBall& s, const Vec3& p) const {
    double d2 = 0.0;
    for (int a = 0; a < 3; ++a) d2 += (p[a] - s.center[a]) * (p[a] - s.center[a]);
    return d2 <= s.outer_radius * s.outer_radius && d2 > s.inner_radius * s.inner_radius;
  }
  bool operator()(const Box& s, const Vec3& p) const { return inside(s, p); }
  bool operator()(const Stairs& s, const Vec3& p) const {
    for (int i = 0; i < s.count; ++i) {
      const Box b{{s.origin[0] + i * s.run, s.origin[1], s.origin[2]},
                  {s.origin[0] + (i + 1) * s.run, s.origin[1] + s.width, s.origin[2] + (i + 1) * s.rise}};
      if (inside(b, p)) return true;
    }
    return false;
  }
  bool operator()(const Sheet& s, const Vec3& p) const {
    const double h = shape.spacing();
    const double cell = std::floor((s.position + shape.extent) / h);
    const double mine = std::floor((p[s.axis] + shape.extent) / h);
    if (cell != mine) return false;
    for (int a = 0; a < 3; ++a)
      if (a != s.axis && (p[a] < s.min[a] || p[a] > s.max[a])) return false;
    return true;
  }
};

Vec3 vec(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

}  // namespace

PhantomSpec PhantomSpec::preset(const std::string& name, std::size_t n) {
  if (name != "paper") throw std::invalid_argument("unknown phantom preset '" + name + "'");
  PhantomSpec s;
  s.n = n;
  s.objects.push_back({HollowBall{{-0.35, 0.3, 0.45}, 0.35, 0.27}, 2.0, "ball"});
  s.objects.push_back({Stairs{{0.05, -0.55, 0.1}, 0.2, 0.1, 0.4, 3}, 1.5, "stairs"});
  s.objects.push_back({Box{{0.15, 0.25, 0.225}, {0.45, 0.45, 0.375}}, 1.0, "block"});
  s.objects.push_back({Sheet{0, 0.3, {0.0, 0.2, 0.15}, {0.0, 0.5, 0.45}}, 6.0, "sheet"});
  return s;
}

PhantomSpec PhantomSpec::from_json(const std::string& text) {
  const auto j = json::parse(text);
  PhantomSpec s;
  s.n = j.value("n", std::size_t{50});
  for (const auto& o : j.value("objects", json::array())) {
    PhantomObject obj;
    obj.density = o.value("density", 1.0);
    obj.label = o.value("label", std::string{});
    if (obj.density < 0.0) throw std::invalid_argument("phantom densities must be >= 0");
    const auto type = o.at("type").get<std::string>();
    if (type == "hollow_ball" || type == "ball") {
      obj.shape = HollowBall{vec(o.at("center")), o.at("outer_radius").get<double>(), o.value("inner_radius", 0.0)};
    } else if (type == "box") {
      obj.shape = Box{vec(o.at("min")), vec(o.at("max"))};
    } else if (type == "stairs") {
      obj.shape = Stairs{vec(o.at("origin")), o.at("run").get<double>(), o.at("rise").get<double>(),
                         o.at("width").get<double>(), o.at("count").get<int>()};
    } else if (type == "sheet") {
      const auto axis = o.at("axis").get<std::string>();
      if (axis != "x" && axis != "y" && axis != "z") throw std::invalid_argument("sheet axis must be x, y or z");
      obj.shape = Sheet{axis[0] - 'x', o.at("position").get<double>(), vec(o.at("min")), vec(o.at("max"))};
    } else {
      throw std::invalid_argument("unknown phantom object type '" + type + "'");
    }
    s.objects.push_back(std::move(obj));
  }
  return s;
}

std::string PhantomSpec::to_json() const {
  json objs = json::array();
  for (const auto& o : objects) {
    json j;
    std::visit(
        [&](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, HollowBall>) {
            j = {{"type", "hollow_ball"}, {"center", s.center}, {"outer_radius", s.outer_radius},
                 {"inner_radius", s.inner_radius}};
          } else if constexpr (std::is_same_v<T, Box>) {
            j = {{"type", "box"}, {"min", s.min}, {"max", s.max}};
          } else if constexpr (std::is_same_v<T, Stairs>) {
            j = {{"type", "stairs"}, {"origin", s.origin}, {"run", s.run},
                 {"rise", s.rise},   {"width", s.width},   {"count", s.count}};
          } else {
            j = {{"type", "sheet"}, {"axis", std::string(1, static_cast<char>('x' + s.axis))},
                 {"position", s.position}, {"min", s.min}, {"max", s.max}};
          }
        },
        o.shape);
    j["density"] = o.density;
    if (!o.label.empty()) j["label"] = o.label;
    objs.push_back(j);
  }
  return json{{"n", n}, {"objects", objs}}.dump(2);
}

Phantom build_phantom(const PhantomSpec& spec) {
  if (spec.n == 0) throw std::invalid_argument("phantom needs n >= 1");
  const VolumeShape shape{spec.n, 1.0};
  Phantom ph{VoxelVolume(shape), VoxelVolume(shape), 0};
  std::map<std::string, int> ids;
  for (const auto& o : spec.objects)
    if (!o.label.empty() && !ids.count(o.label)) {
      const int id = static_cast<int>(ids.size()) + 1;
      ids[o.label] = id;
      ph.labels.labels[id] = o.label;
    }
  const Membership member{shape};
  for (std::size_t v = 0; v < shape.voxels(); ++v) {
    const Vec3 p = shape.center_of(v);
    for (const auto& o : spec.objects) {
      if (!std::visit([&](const auto& s) { return member(s, p); }, o.shape)) continue;
      if (p[2] <= 0.0) {
        ++ph.clipped;
        continue;
      }
      ph.density.values[v] = o.density;
      if (!o.label.empty()) ph.labels.values[v] = ids[o.label];
    }
  }
  return ph;
}

}  // namespace spindle

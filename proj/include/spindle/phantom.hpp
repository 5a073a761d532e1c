#pragma once

#include <array>
#include <string>
#include <variant>
#include <vector>

#include "spindle/volume.hpp"

namespace spindle {

struct HollowBall {
  Vec3 center{};
  double outer_radius = 0.0;
  double inner_radius = 0.0;  // 0 gives a solid ball
};

/// Axis-aligned box [min, max].
struct Box {
  Vec3 min{};
  Vec3 max{};
};

/// Staircase of `count` boxes: step i spans x in [x0 + i run, x0 + (i+1) run],
/// y in [y0, y0 + width] and z in [z0, z0 + (i+1) rise].
struct Stairs {
  Vec3 origin{};
  double run = 0.0;
  double rise = 0.0;
  double width = 0.0;
  int count = 0;
};

/// One voxel thick slab perpendicular to `axis` through the voxel containing
/// `position`, limited to [min, max] on the two other axes.
struct Sheet {
  int axis = 0;
  double position = 0.0;
  Vec3 min{};
  Vec3 max{};
};

struct PhantomObject {
  std::variant<HollowBall, Box, Stairs, Sheet> shape;
  double density = 1.0;
  std::string label;  // material name; empty leaves the label volume untouched
};

/// Objects are painted in order, later ones overwriting earlier ones.
struct PhantomSpec {
  std::size_t n = 50;
  std::vector<PhantomObject> objects;

  /// Hollow ball, three stairs, a low-density block and a dense sheet.
  static PhantomSpec preset(const std::string& name, std::size_t n);
  static PhantomSpec from_json(const std::string& text);
  std::string to_json() const;
};

struct Phantom {
  VoxelVolume density;
  /// Integer label ids per voxel (0 = background) with names in labels.
  VoxelVolume labels;
  /// Number of voxels dropped because their centre lies in x3 <= 0.
  std::size_t clipped = 0;
};

/// Voxelizes by centre membership on the cube [-1, 1]^3. Voxel centres with
/// x3 <= 0 are never filled; they are counted in Phantom::clipped.
Phantom build_phantom(const PhantomSpec& spec);

}  // namespace spindle

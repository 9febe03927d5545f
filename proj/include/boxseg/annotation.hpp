/* Copyright 2026 The boxseg Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

/**
 * @file annotation.hpp
 * @brief Per-image annotation records (six clicks per object) as JSON.
 *
 *   {"image": "<id>", "width": W, "height": H,
 *    "objects": [{"id": n,
 *                 "orientation_clicks": [[x,y],[x,y]],
 *                 "extreme_points": {"top":[x,y], "bottom":[x,y],
 *                                    "left":[x,y], "right":[x,y]},
 *                 "box": {"center":[x,y], "angle":r, "half_u":a, "half_v":b}}]}
 *
 * The box is always re-derived from the clicks; a stored box that differs
 * by more than 1e-6 is rejected.
 */

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "boxseg/error.hpp"
#include "boxseg/geometry.hpp"

namespace boxseg {

inline constexpr double kStoredBoxTolerance = 1e-6;

struct AnnotatedObject {
  int id = 0;
  ClickSequence clicks;
  TiltedBox box;  // derived from clicks
};

struct AnnotationFile {
  std::string image;
  int width = 0;
  int height = 0;
  std::vector<AnnotatedObject> objects;

  ImageBounds bounds() const { return {width, height}; }
  std::vector<TiltedBox> boxes() const {
    std::vector<TiltedBox> out;
    for (const AnnotatedObject& o : objects) out.push_back(o.box);
    return out;
  }
};

namespace detail {

inline Point2 ParsePoint(const nlohmann::json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw Error(ErrorCode::kValidation, where + ": expected [x, y]");
  Point2 p{j[0].get<double>(), j[1].get<double>()};
  if (!IsFinite(p)) throw Error(ErrorCode::kValidation, where + ": non-finite coordinate");
  return p;
}

inline nlohmann::json PointJson(Point2 p) { return nlohmann::json::array({p.x, p.y}); }

inline const nlohmann::json& Field(const nlohmann::json& obj, const char* key,
                                   const std::string& where) {
  if (!obj.is_object() || !obj.contains(key))
    throw Error(ErrorCode::kValidation, where + ": missing \"" + key + "\"");
  return obj.at(key);
}

}  // namespace detail

inline nlohmann::json BoxJson(const TiltedBox& box) {
  return {{"center", detail::PointJson(box.center)},
          {"angle", box.angle},
          {"half_u", box.half_u},
          {"half_v", box.half_v}};
}

inline ClickSequence ParseClicks(const nlohmann::json& obj, const std::string& where) {
  using detail::Field;
  using detail::ParsePoint;
  ClickSequence clicks;
  const auto& oc = Field(obj, "orientation_clicks", where);
  if (!oc.is_array() || oc.size() != 2)
    throw Error(ErrorCode::kValidation, where + ": orientation_clicks needs two points");
  clicks.orientation_clicks = {ParsePoint(oc[0], where + ".orientation_clicks[0]"),
                               ParsePoint(oc[1], where + ".orientation_clicks[1]")};
  const auto& ex = Field(obj, "extreme_points", where);
  clicks.extreme_clicks.top = ParsePoint(Field(ex, "top", where), where + ".top");
  clicks.extreme_clicks.bottom = ParsePoint(Field(ex, "bottom", where), where + ".bottom");
  clicks.extreme_clicks.left = ParsePoint(Field(ex, "left", where), where + ".left");
  clicks.extreme_clicks.right = ParsePoint(Field(ex, "right", where), where + ".right");
  return clicks;
}

// Derives the box and, when a stored one is given, checks that it agrees.
inline TiltedBox DeriveAndCheckBox(const ClickSequence& clicks, const nlohmann::json* stored,
                                   const std::string& where) {
  TiltedBox box;
  try {
    box = BoxFromClicks(clicks);
  } catch (const Error& e) {
    throw Error(ErrorCode::kValidation, where + ": " + e.what());
  }
  if (stored) {
    using detail::Field;
    const Point2 c = detail::ParsePoint(Field(*stored, "center", where + ".box"), where + ".box.center");
    const auto& a = Field(*stored, "angle", where + ".box");
    const auto& hu = Field(*stored, "half_u", where + ".box");
    const auto& hv = Field(*stored, "half_v", where + ".box");
    if (!a.is_number() || !hu.is_number() || !hv.is_number())
      throw Error(ErrorCode::kValidation, where + ".box: numeric fields expected");
    const double err = std::max({Distance(c, box.center),
                                 LineAngleDifference(a.get<double>(), box.angle),
                                 std::abs(hu.get<double>() - box.half_u),
                                 std::abs(hv.get<double>() - box.half_v)});
    if (!(err <= kStoredBoxTolerance))
      throw Error(ErrorCode::kValidation,
                  where + ": stored box disagrees with the box derived from its clicks");
  }
  return box;
}

inline AnnotationFile ParseAnnotationJson(const nlohmann::json& root, const std::string& source) {
  using detail::Field;
  AnnotationFile file;
  const auto& image = Field(root, "image", source);
  if (!image.is_string()) throw Error(ErrorCode::kValidation, source + ": \"image\" must be a string");
  file.image = image.get<std::string>();
  const auto& w = Field(root, "width", source);
  const auto& h = Field(root, "height", source);
  if (!w.is_number_integer() || !h.is_number_integer() || w.get<long>() <= 0 || h.get<long>() <= 0)
    throw Error(ErrorCode::kValidation, source + ": width/height must be positive integers");
  file.width = w.get<int>();
  file.height = h.get<int>();
  const auto& objects = Field(root, "objects", source);
  if (!objects.is_array()) throw Error(ErrorCode::kValidation, source + ": \"objects\" must be an array");
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const std::string where = source + ": objects[" + std::to_string(i) + "]";
    const auto& o = objects[i];
    AnnotatedObject obj;
    const auto& id = Field(o, "id", where);
    if (!id.is_number_integer()) throw Error(ErrorCode::kValidation, where + ": id must be an integer");
    obj.id = id.get<int>();
    for (const AnnotatedObject& prior : file.objects)
      if (prior.id == obj.id) throw Error(ErrorCode::kValidation, where + ": duplicate id");
    obj.clicks = ParseClicks(o, where);
    obj.box = DeriveAndCheckBox(obj.clicks, o.contains("box") ? &o.at("box") : nullptr, where);
    file.objects.push_back(obj);
  }
  return file;
}

inline AnnotationFile ParseAnnotation(const std::string& text, const std::string& source) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kParseError,
                source + ": parse error at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  return ParseAnnotationJson(root, source);
}

inline nlohmann::json AnnotationToJson(const AnnotationFile& file) {
  nlohmann::json objects = nlohmann::json::array();
  for (const AnnotatedObject& o : file.objects) {
    const ExtremePoints& ex = o.clicks.extreme_clicks;
    objects.push_back(
        {{"id", o.id},
         {"orientation_clicks", nlohmann::json::array({detail::PointJson(o.clicks.orientation_clicks[0]),
                                                       detail::PointJson(o.clicks.orientation_clicks[1])})},
         {"extreme_points", {{"top", detail::PointJson(ex.top)},
                             {"bottom", detail::PointJson(ex.bottom)},
                             {"left", detail::PointJson(ex.left)},
                             {"right", detail::PointJson(ex.right)}}},
         {"box", BoxJson(o.box)}});
  }
  return {{"image", file.image}, {"width", file.width}, {"height", file.height}, {"objects", objects}};
}

inline std::string SerializeAnnotation(const AnnotationFile& file) {
  return AnnotationToJson(file).dump(2) + "\n";
}

}  // namespace boxseg

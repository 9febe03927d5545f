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
 * @file service.hpp
 * @brief HTTP API backing the annotation UI.
 *
 *   GET  /api/images              -> [{"id", "width", "height"}]
 *   GET  /api/images/{id}         -> PNG bytes
 *   GET  /api/annotations/{id}    -> stored annotation JSON or 404
 *   POST /api/annotations/{id}    -> 204; body is an annotation file
 *   POST /api/derive-box          -> derived box for six clicks
 *
 * Images are read-only. Annotation writes go through a temporary file and a
 * rename, serialized per annotation file.
 */

#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <regex>
#include <string>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "boxseg/annotation.hpp"
#include "boxseg/geometry.hpp"
#include "boxseg/io.hpp"

namespace boxseg {

struct ImageEntry {
  std::string id;
  fs::path path;
};

// .png and .pgm files, sorted by id.
inline std::vector<ImageEntry> ListImages(const fs::path& dir) {
  std::vector<ImageEntry> out;
  if (!fs::is_directory(dir)) throw Error(ErrorCode::kUnreadableFile, dir.string() + " is not a directory");
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png" || ext == ".pgm") out.push_back({entry.path().stem().string(), entry.path()});
  }
  std::sort(out.begin(), out.end(), [](const ImageEntry& a, const ImageEntry& b) { return a.id < b.id; });
  return out;
}

inline bool IsSafeId(const std::string& id) {
  static const std::regex kId("[A-Za-z0-9_][A-Za-z0-9_.-]*");
  return std::regex_match(id, kId) && id.find("..") == std::string::npos;
}

// Six clicks -> derived box, shared by the UI and the pipeline.
inline nlohmann::json DeriveBoxResponse(const nlohmann::json& body) {
  try {
    const ClickSequence clicks = ParseClicks(body, "request");
    const TiltedBox box = BoxFromClicks(clicks);
    nlohmann::json j = {{"valid", true}, {"box", BoxJson(box)}};
    j["object_center"] = {box.object_center.x, box.object_center.y};
    nlohmann::json corners = nlohmann::json::array();
    for (Point2 c : box.Corners()) corners.push_back({c.x, c.y});
    j["corners"] = corners;
    return j;
  } catch (const Error& e) {
    return {{"valid", false}, {"error", e.what()}};
  }
}

class AnnotationService {
 public:
  AnnotationService(fs::path images, fs::path annotations)
      : images_(std::move(images)), annotations_(std::move(annotations)) {
    fs::create_directories(annotations_);
    // The library default enables SO_REUSEPORT, which would let a second
    // server share a busy port instead of failing.
    server_.set_socket_options([](socket_t sock) {
      int yes = 1;
      setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
    });
    Routes();
  }

  bool Bind(const std::string& host, int port) { return server_.bind_to_port(host, port); }
  int BindAnyPort(const std::string& host) { return server_.bind_to_any_port(host); }
  bool ListenAfterBind() { return server_.listen_after_bind(); }
  void Stop() { server_.stop(); }
  void WaitUntilReady() { server_.wait_until_ready(); }

 private:
  static void JsonError(httplib::Response& res, int status, const std::string& message) {
    res.status = status;
    res.set_content(nlohmann::json{{"error", message}}.dump(), "application/json");
  }

  std::optional<ImageEntry> FindImage(const std::string& id) const {
    for (const ImageEntry& e : ListImages(images_))
      if (e.id == id) return e;
    return std::nullopt;
  }

  std::mutex& LockFor(const std::string& id) {
    std::lock_guard<std::mutex> guard(locks_mutex_);
    auto& slot = locks_[id];
    if (!slot) slot = std::make_unique<std::mutex>();
    return *slot;
  }

  void Routes() {
    server_.Get("/api/images", [this](const httplib::Request&, httplib::Response& res) {
      try {
        nlohmann::json list = nlohmann::json::array();
        for (const ImageEntry& e : ListImages(images_)) {
          const StoredImage img = ReadStoredImage(e.path);
          list.push_back({{"id", e.id}, {"width", img.values.width()}, {"height", img.values.height()}});
        }
        res.set_content(list.dump(), "application/json");
      } catch (const std::exception& e) {
        JsonError(res, 500, e.what());
      }
    });

    server_.Get(R"(/api/images/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      const std::string id = req.matches[1];
      if (!IsSafeId(id)) return JsonError(res, 400, "invalid image id");
      try {
        const auto entry = FindImage(id);
        if (!entry) return JsonError(res, 404, "no image " + id);
        std::vector<std::uint8_t> bytes = ReadFileBytes(entry->path);
        if (entry->path.extension() != ".png") bytes = EncodePng(DecodeImage(bytes, entry->path.string()));
        res.set_content(std::string(bytes.begin(), bytes.end()), "image/png");
      } catch (const std::exception& e) {
        JsonError(res, 500, e.what());
      }
    });

    server_.Get(R"(/api/annotations/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      const std::string id = req.matches[1];
      if (!IsSafeId(id)) return JsonError(res, 400, "invalid image id");
      const fs::path path = annotations_ / (id + ".json");
      std::lock_guard<std::mutex> guard(LockFor(id));
      if (!fs::exists(path)) return JsonError(res, 404, "no annotation for " + id);
      try {
        res.set_content(ReadFileText(path), "application/json");
      } catch (const std::exception& e) {
        JsonError(res, 500, e.what());
      }
    });

    server_.Post(R"(/api/annotations/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      const std::string id = req.matches[1];
      if (!IsSafeId(id)) return JsonError(res, 400, "invalid image id");
      AnnotationFile parsed;
      try {
        parsed = ParseAnnotation(req.body, "body");
      } catch (const Error& e) {
        return JsonError(res, 400, e.what());
      }
      if (parsed.image != id) return JsonError(res, 400, "body.image does not match the URL id");
      try {
        if (const auto entry = FindImage(id)) {
          const StoredImage img = ReadStoredImage(entry->path);
          if (img.values.bounds() != parsed.bounds())
            return JsonError(res, 400, "annotation dimensions do not match the image");
        }
        std::lock_guard<std::mutex> guard(LockFor(id));
        WriteFileAtomic(annotations_ / (id + ".json"), req.body);
      } catch (const std::exception& e) {
        return JsonError(res, 500, e.what());
      }
      res.status = 204;
    });

    server_.Post("/api/derive-box", [](const httplib::Request& req, httplib::Response& res) {
      nlohmann::json body;
      try {
        body = nlohmann::json::parse(req.body);
      } catch (const nlohmann::json::parse_error& e) {
        return JsonError(res, 400, std::string("malformed JSON: ") + e.what());
      }
      res.set_content(DeriveBoxResponse(body).dump(), "application/json");
    });
  }

  fs::path images_;
  fs::path annotations_;
  httplib::Server server_;
  std::mutex locks_mutex_;
  std::map<std::string, std::unique_ptr<std::mutex>> locks_;
};

}  // namespace boxseg

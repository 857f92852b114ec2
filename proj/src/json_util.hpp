#pragma once

// Strict accessors shared by the document loaders. Every failure surfaces as
// ParseError naming the offending path.

#include <cmath>
#include <initializer_list>
#include <string>
#include <string_view>

#include "json.hpp"
#include "twinbench/errors.hpp"
#include "twinbench/geometry.hpp"

namespace twinbench::detail {

using nlohmann::json;

inline json parse_json(std::string_view text, std::string_view what) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string(what) + ": " + e.what());
  }
}

inline const json& require(const json& obj, std::string_view key, std::string_view ctx) {
  if (!obj.is_object()) throw ParseError(std::string(ctx) + ": expected object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(std::string(ctx) + ": missing key '" + std::string(key) + "'");
  return *it;
}

inline void reject_unknown_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                                std::string_view ctx) {
  if (!obj.is_object()) throw ParseError(std::string(ctx) + ": expected object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (auto a : allowed) ok = ok || it.key() == a;
    if (!ok) throw ParseError(std::string(ctx) + ": unknown key '" + it.key() + "'");
  }
}

inline double as_number(const json& v, std::string_view ctx) {
  if (!v.is_number()) throw ParseError(std::string(ctx) + ": expected number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ParseError(std::string(ctx) + ": non-finite number");
  return d;
}

inline long long as_integer(const json& v, std::string_view ctx) {
  if (v.is_number_integer()) return v.get<long long>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::isfinite(d) && d == std::floor(d)) return static_cast<long long>(d);
  }
  throw ParseError(std::string(ctx) + ": expected integer");
}

inline std::string as_string(const json& v, std::string_view ctx) {
  if (!v.is_string()) throw ParseError(std::string(ctx) + ": expected string");
  return v.get<std::string>();
}

inline const json& as_array(const json& v, std::string_view ctx) {
  if (!v.is_array()) throw ParseError(std::string(ctx) + ": expected array");
  return v;
}

inline Vec2 as_point(const json& v, std::string_view ctx) {
  if (!v.is_array() || v.size() != 2) throw ParseError(std::string(ctx) + ": expected [x, y]");
  return {as_number(v[0], ctx), as_number(v[1], ctx)};
}

inline Polyline as_points(const json& v, std::string_view ctx) {
  Polyline out;
  for (const auto& p : as_array(v, ctx)) out.push_back(as_point(p, ctx));
  return out;
}

inline json point_json(Vec2 p) { return json::array({p.x, p.y}); }

inline json points_json(const Polyline& pts) {
  json arr = json::array();
  for (const auto& p : pts) arr.push_back(point_json(p));
  return arr;
}

}  // namespace twinbench::detail

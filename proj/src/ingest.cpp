#include "afp/ingest.hpp"

#include "afp/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace afp {

using nlohmann::json;

namespace {

std::vector<double> read_vector(const json& frame,
                                const char* key,
                                const std::string& frame_id)
{
  const json& arr = frame.at(key);
  if (!arr.is_array())
    throw ParseError("frame '" + frame_id + "': field '" + key +
                     "' must be an array of numbers");
  std::vector<double> out;
  out.reserve(arr.size());
  for (const json& v : arr) {
    if (!v.is_number())
      throw ParseError("frame '" + frame_id + "': field '" + key +
                       "' must contain only numbers");
    const double x = v.get<double>();
    if (!std::isfinite(x))
      throw ValidationError("frame '" + frame_id + "': non-finite value in '" +
                            key + "'");
    out.push_back(x);
  }
  return out;
}

void check_dim(const std::vector<double>& v,
               std::size_t expected,
               const char* key,
               const std::string& frame_id)
{
  if (v.size() != expected)
    throw ValidationError("frame '" + frame_id + "': '" + key + "' has " +
                          std::to_string(v.size()) + " components, expected " +
                          std::to_string(expected));
}

std::size_t read_dim(const json& dims, const char* key)
{
  if (!dims.contains(key) || !dims.at(key).is_number_integer() ||
      dims.at(key).get<long long>() <= 0)
    throw ParseError(std::string("dims.") + key + " must be a positive integer");
  return dims.at(key).get<std::size_t>();
}

FrameRecord parse_frame(const json& f,
                        const std::optional<BranchDims>& dims,
                        std::vector<std::string>& warnings)
{
  if (!f.is_object())
    throw ParseError("every entry of 'frames' must be an object");
  if (!f.contains("frame_id") || !f.at("frame_id").is_string())
    throw ParseError("frame without a string 'frame_id'");

  FrameRecord rec;
  rec.frame_id = f.at("frame_id").get<std::string>();
  if (rec.frame_id.empty())
    throw ValidationError("frame_id must be non-empty");

  if (!f.contains("timestamp_s") || !f.at("timestamp_s").is_number())
    throw ParseError("frame '" + rec.frame_id +
                     "': 'timestamp_s' missing or not a number");
  rec.timestamp_s = f.at("timestamp_s").get<double>();
  if (!std::isfinite(rec.timestamp_s))
    throw ValidationError("frame '" + rec.frame_id +
                          "': non-finite timestamp_s");
  if (rec.timestamp_s < 0.0)
    throw ValidationError("frame '" + rec.frame_id +
                          "': negative timestamp_s");

  if (f.contains("score") && !f.at("score").is_null()) {
    if (!f.at("score").is_number())
      throw ParseError("frame '" + rec.frame_id + "': 'score' is not a number");
    rec.score = f.at("score").get<double>();
    if (!std::isfinite(rec.score))
      throw ValidationError("frame '" + rec.frame_id + "': non-finite score");
  } else {
    warnings.push_back("frame '" + rec.frame_id +
                       "': missing score, defaulting to 0.0");
  }

  const bool has_fused = f.contains("fused");
  const bool has_resnet = f.contains("resnet");
  const bool has_clip = f.contains("clip");

  if (dims) {
    if (has_fused || !has_resnet || !has_clip)
      throw ValidationError("frame '" + rec.frame_id +
                            "': manifest declares branch dims, frame must "
                            "carry 'resnet' and 'clip' and no 'fused'");
    RawPair raw{ read_vector(f, "resnet", rec.frame_id),
                 read_vector(f, "clip", rec.frame_id) };
    check_dim(raw.resnet, dims->resnet, "resnet", rec.frame_id);
    check_dim(raw.clip, dims->clip, "clip", rec.frame_id);
    rec.features = std::move(raw);
  } else {
    if (!has_fused || has_resnet || has_clip)
      throw ValidationError("frame '" + rec.frame_id +
                            "': prefused manifest, frame must carry only "
                            "'fused'");
    PreFused pre{ read_vector(f, "fused", rec.frame_id) };
    check_dim(pre.vec, kFusedDim, "fused", rec.frame_id);
    rec.features = std::move(pre);
  }
  return rec;
}

} // namespace

Manifest parse_manifest(std::string_view text)
{
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::out_of_range& e) {
    throw ValidationError(std::string("manifest has a non-finite number: ") +
                          e.what());
  } catch (const json::exception& e) {
    throw ParseError(std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!doc.is_object())
    throw ParseError("manifest root must be an object");

  Manifest m;
  if (!doc.contains("video_id") || !doc.at("video_id").is_string())
    throw ParseError("manifest without a string 'video_id'");
  m.video_id = doc.at("video_id").get<std::string>();

  if (!doc.contains("dims"))
    throw ParseError("manifest without 'dims'");
  const json& dims = doc.at("dims");
  if (dims.is_string()) {
    if (dims.get<std::string>() != "prefused")
      throw ParseError("'dims' string must be \"prefused\"");
  } else if (dims.is_object()) {
    m.dims = BranchDims{ read_dim(dims, "resnet"), read_dim(dims, "clip") };
  } else {
    throw ParseError("'dims' must be an object or \"prefused\"");
  }

  if (!doc.contains("frames") || !doc.at("frames").is_array())
    throw ParseError("manifest without a 'frames' array");
  const json& frames = doc.at("frames");
  if (frames.empty())
    throw ValidationError("manifest has no frames");

  std::set<std::string> seen;
  m.frames.reserve(frames.size());
  for (const json& f : frames) {
    FrameRecord rec = parse_frame(f, m.dims, m.warnings);
    if (!seen.insert(rec.frame_id).second)
      throw ValidationError("duplicate frame_id '" + rec.frame_id + "'");
    m.frames.push_back(std::move(rec));
  }

  std::sort(m.frames.begin(), m.frames.end(), [](const auto& a, const auto& b) {
    if (a.timestamp_s != b.timestamp_s)
      return a.timestamp_s < b.timestamp_s;
    return a.frame_id < b.frame_id;
  });
  return m;
}

Manifest load_manifest(const std::filesystem::path& path)
{
  return parse_manifest(read_text_file(path));
}

std::string serialize_manifest(const Manifest& manifest)
{
  json doc;
  doc["video_id"] = manifest.video_id;
  if (manifest.dims)
    doc["dims"] = { { "resnet", manifest.dims->resnet },
                    { "clip", manifest.dims->clip } };
  else
    doc["dims"] = "prefused";

  json frames = json::array();
  for (const FrameRecord& f : manifest.frames) {
    json jf;
    jf["frame_id"] = f.frame_id;
    jf["timestamp_s"] = f.timestamp_s;
    jf["score"] = f.score;
    if (const auto* raw = std::get_if<RawPair>(&f.features)) {
      jf["resnet"] = raw->resnet;
      jf["clip"] = raw->clip;
    } else {
      jf["fused"] = std::get<PreFused>(f.features).vec;
    }
    frames.push_back(std::move(jf));
  }
  doc["frames"] = std::move(frames);
  return doc.dump();
}

void save_manifest(const Manifest& manifest, const std::filesystem::path& path)
{
  write_text_file(path, serialize_manifest(manifest));
}

std::string read_text_file(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ParseError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text)
{
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw Error("cannot write '" + path.string() + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out)
    throw Error("failed writing '" + path.string() + "'");
}

} // namespace afp

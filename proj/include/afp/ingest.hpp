#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace afp {

inline constexpr std::size_t kFusedDim = 512;

struct RawPair
{
  std::vector<double> resnet;
  std::vector<double> clip;

  bool operator==(const RawPair&) const = default;
};

struct PreFused
{
  std::vector<double> vec;

  bool operator==(const PreFused&) const = default;
};

using FeaturePayload = std::variant<RawPair, PreFused>;

//! One candidate keyframe handed over by the upstream selector.
struct FrameRecord
{
  std::string frame_id;
  double timestamp_s = 0.0;
  double score = 0.0;
  FeaturePayload features;

  bool operator==(const FrameRecord&) const = default;
};

//! Branch dimensions declared in a manifest header. An empty optional means
//! the manifest carries pre-fused 512-d vectors.
struct BranchDims
{
  std::size_t resnet = 0;
  std::size_t clip = 0;

  bool operator==(const BranchDims&) const = default;
};

struct Manifest
{
  std::string video_id;
  std::optional<BranchDims> dims;
  std::vector<FrameRecord> frames;

  //! Non-fatal findings from loading (e.g. a defaulted score). Not part of
  //! structural equality.
  std::vector<std::string> warnings;

  bool prefused() const noexcept { return !dims.has_value(); }

  bool operator==(const Manifest& other) const
  {
    return video_id == other.video_id && dims == other.dims &&
           frames == other.frames;
  }
};

//! Parses and validates a manifest document. Frames come back sorted by
//! (timestamp_s, frame_id).
//!
//! Throws ParseError on malformed JSON or a schema violation, and
//! ValidationError on dimension mismatch, non-finite values, duplicate ids or
//! negative timestamps.
Manifest parse_manifest(std::string_view text);

Manifest load_manifest(const std::filesystem::path& path);

std::string serialize_manifest(const Manifest& manifest);

void save_manifest(const Manifest& manifest, const std::filesystem::path& path);

//! Reads a whole file; throws ParseError when it cannot be opened.
std::string read_text_file(const std::filesystem::path& path);

void write_text_file(const std::filesystem::path& path, std::string_view text);

} // namespace afp

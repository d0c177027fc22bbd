#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace afp {

//! Declared approximation of prompt cost; real tokenizers are model specific.
struct TokenCostModel
{
  std::int64_t tokens_per_frame = 255;
  double tokens_per_text_char = 0.25;

  void validate() const;
};

struct FrameRef
{
  std::string frame_id;
  double timestamp_s = 0.0;

  bool operator==(const FrameRef&) const = default;
};

struct CostReport
{
  std::int64_t frames_in = 0;
  std::int64_t frames_out = 0;
  double frame_reduction_pct = 0.0;
  std::int64_t tokens_in_est = 0;
  std::int64_t tokens_out_est = 0;
  double token_reduction_pct = 0.0;
  //! Absent when clustering was skipped (single frame).
  std::optional<double> tau;
  std::string strategy;

  bool operator==(const CostReport&) const = default;
};

inline constexpr std::string_view kAnswerInstruction =
  "Answer with the option letter only.";

//! 100 * (1 - out / in), or 0 when in == 0.
double reduction_pct(double in, double out) noexcept;

//! Unicode code points in a UTF-8 string.
std::size_t text_chars(std::string_view utf8) noexcept;

std::int64_t estimate_tokens(std::int64_t frames,
                             std::string_view text,
                             const TokenCostModel& cost);

//! Shortest round-trip decimal form of a timestamp, e.g. "12.5".
std::string format_seconds(double t);

//! Direct QA prompt:
//!
//!     [Frame <id> @ <t>s]      one per frame, in the given order
//!     <graph text>             only when non-empty
//!     Question: <question>
//!     A) <option>              one per option
//!     Answer with the option letter only.
//!
//! Throws EmptySelectionError without frames, ValidationError on an empty
//! question or more than 26 options.
std::string assemble_prompt(std::span<const FrameRef> frames,
                            std::string_view graph_text,
                            std::string_view question,
                            std::span<const std::string> options);

//! Frame and token reduction of a pruned prompt against its baseline. tau and
//! strategy are left for the caller to fill.
CostReport compute_report(std::int64_t frames_in,
                          std::int64_t frames_out,
                          std::string_view prompt_text,
                          std::string_view baseline_prompt_text,
                          const TokenCostModel& cost);

} // namespace afp

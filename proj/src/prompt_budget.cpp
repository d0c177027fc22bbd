#include "afp/prompt_budget.hpp"

#include "afp/errors.hpp"

#include <charconv>
#include <cmath>

namespace afp {

void TokenCostModel::validate() const
{
  if (tokens_per_frame <= 0)
    throw RangeError("tokens_per_frame must be positive");
  if (!(tokens_per_text_char > 0.0) || !std::isfinite(tokens_per_text_char))
    throw RangeError("tokens_per_text_char must be a finite positive value");
}

double reduction_pct(double in, double out) noexcept
{
  if (in == 0.0)
    return 0.0;
  return 100.0 * (1.0 - out / in);
}

std::size_t text_chars(std::string_view utf8) noexcept
{
  std::size_t n = 0;
  for (unsigned char c : utf8)
    if ((c & 0xC0) != 0x80)
      ++n;
  return n;
}

std::int64_t estimate_tokens(std::int64_t frames,
                             std::string_view text,
                             const TokenCostModel& cost)
{
  const double text_tokens =
    std::ceil(static_cast<double>(text_chars(text)) * cost.tokens_per_text_char);
  return frames * cost.tokens_per_frame + static_cast<std::int64_t>(text_tokens);
}

std::string format_seconds(double t)
{
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, t);
  return { buf, res.ptr };
}

std::string assemble_prompt(std::span<const FrameRef> frames,
                            std::string_view graph_text,
                            std::string_view question,
                            std::span<const std::string> options)
{
  if (frames.empty())
    throw EmptySelectionError("prompt needs at least one frame");
  if (question.empty())
    throw ValidationError("prompt needs a non-empty question");
  if (options.size() > 26)
    throw ValidationError("at most 26 answer options are supported");

  std::string out;
  for (const FrameRef& f : frames)
    out += "[Frame " + f.frame_id + " @ " + format_seconds(f.timestamp_s) + "s]\n";
  if (!graph_text.empty()) {
    out += graph_text;
    out += '\n';
  }
  out += "Question: ";
  out += question;
  out += '\n';
  for (std::size_t i = 0; i < options.size(); ++i) {
    out += static_cast<char>('A' + static_cast<int>(i));
    out += ") " + options[i] + '\n';
  }
  out += kAnswerInstruction;
  return out;
}

CostReport compute_report(std::int64_t frames_in,
                          std::int64_t frames_out,
                          std::string_view prompt_text,
                          std::string_view baseline_prompt_text,
                          const TokenCostModel& cost)
{
  cost.validate();
  if (frames_out < 0 || frames_in < frames_out)
    throw RangeError("report needs frames_in >= frames_out >= 0");
  CostReport r;
  r.frames_in = frames_in;
  r.frames_out = frames_out;
  r.frame_reduction_pct = reduction_pct(static_cast<double>(frames_in),
                                        static_cast<double>(frames_out));
  r.tokens_in_est = estimate_tokens(frames_in, baseline_prompt_text, cost);
  r.tokens_out_est = estimate_tokens(frames_out, prompt_text, cost);
  r.token_reduction_pct = reduction_pct(static_cast<double>(r.tokens_in_est),
                                        static_cast<double>(r.tokens_out_est));
  return r;
}

} // namespace afp

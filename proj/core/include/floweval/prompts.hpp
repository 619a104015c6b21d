#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace floweval::prompts {

#include "floweval/prompt_text.inc"

/// The OCR extraction prompt, sent verbatim.
inline std::string_view ocr_prompt() { return kOcrPromptText; }

/// The raw VE template with its {elements_text} and {len(elements_list)}
/// placeholders still in place.
inline std::string_view ve_template() { return kVePromptTemplateText; }

/// Numbered hypothesis list: "1. <first>\n2. <second>...", 1-based,
/// no trailing newline.
std::string number_elements(const std::vector<std::string>& rendered);

/// Substitutes both placeholders of the VE template.
std::string render_ve_prompt(const std::vector<std::string>& rendered);

/// The sentinel an OCR backend returns for an image without readable text.
inline constexpr std::string_view kNoTextSentinel = "No text found";

}  // namespace floweval::prompts

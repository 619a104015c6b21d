#include "floweval/prompts.hpp"

namespace floweval::prompts {

std::string number_elements(const std::vector<std::string>& rendered) {
  std::string out;
  for (std::size_t i = 0; i < rendered.size(); ++i) {
    if (i > 0) out.push_back('\n');
    out += std::to_string(i + 1);
    out += ". ";
    out += rendered[i];
  }
  return out;
}

std::string render_ve_prompt(const std::vector<std::string>& rendered) {
  std::string prompt(ve_template());
  auto substitute = [&prompt](std::string_view placeholder, const std::string& value) {
    std::size_t pos = prompt.find(placeholder);
    while (pos != std::string::npos) {
      prompt.replace(pos, placeholder.size(), value);
      pos = prompt.find(placeholder, pos + value.size());
    }
  };
  // Count first, so a pathological label containing the count placeholder
  // passes through untouched.
  substitute("{len(elements_list)}", std::to_string(rendered.size()));
  substitute("{elements_text}", number_elements(rendered));
  return prompt;
}

}  // namespace floweval::prompts

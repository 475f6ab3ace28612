#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace pairjudge {

/// Replaces every `{{name}}` with vars.at(name). Unknown placeholders throw
/// InvalidArgument so a typo never reaches a model silently.
std::string render_template(std::string_view tmpl, const std::map<std::string, std::string>& vars);

/// Prompt templates keyed by (id, language). Ids in use: "ordinary", "creative",
/// "enhance", "gate", "instruction", "judge". Languages: "en", "zh"; lookups for
/// any other language fall back to "en".
class TemplateSet {
 public:
  /// Built-in defaults.
  TemplateSet();

  /// Overrides defaults with every `<id>.<lang>.txt` file found in dir.
  void load_dir(const std::filesystem::path& dir);

  const std::string& get(std::string_view id, std::string_view language) const;
  void set(std::string id, std::string language, std::string text);

  /// Digest over all templates, recorded in run manifests.
  std::string version() const;

 private:
  std::map<std::pair<std::string, std::string>, std::string> templates_;
};

/// Language key for template lookup: "zh" for zh*, otherwise "en".
std::string template_language(std::string_view language_tag);

}  // namespace pairjudge

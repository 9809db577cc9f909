#pragma once

// XML form of situation templates (`.stpl.xml`):
//
//   <situations version="1">
//     <situation name="Working">
//       <and rare="true">
//         <condition sensor="work_motion" comparator="EQ" value="1" kind="exact"/>
//         <or> ... </or>
//       </and>
//     </situation>
//   </situations>
//
// `kind` may be omitted on input: EQ/NE with an integral 0/1 value reads as
// exact, everything else as threshold. When an environment is supplied it
// decides the kind from the sensor instead and the explicit attribute must
// agree with it.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sitrec/core.hpp"

namespace sitrec {

struct TemplateDocument {
  std::string version = "1";
  std::vector<SituationTemplate> templates;

  const SituationTemplate* find(std::string_view situation) const;
  bool operator==(const TemplateDocument&) const = default;
};

TemplateDocument parse_templates(std::string_view text, const EnvironmentSpec* env = nullptr);

/// Canonical text: fixed attribute order, two-space indent, kind always
/// written, rare only when set. Deterministic byte-for-byte.
std::string serialize_templates(const TemplateDocument& doc);

/// Repository file guarded by a content hash. load() remembers the hash
/// of what it read; store() refuses to overwrite a file whose content
/// changed since then, writes to a temporary sibling and renames it into
/// place.
class RepositoryFile {
 public:
  explicit RepositoryFile(std::filesystem::path path, const EnvironmentSpec* env = nullptr)
      : path_(std::move(path)), env_(env) {}

  const std::filesystem::path& path() const { return path_; }

  TemplateDocument load();
  void store(const TemplateDocument& doc);

 private:
  std::filesystem::path path_;
  const EnvironmentSpec* env_;
  std::optional<std::uint64_t> hash_;
};

std::string read_file(const std::filesystem::path& path);
/// Writes via a temporary file in the same directory and renames.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::uint64_t content_hash(std::string_view bytes);

}  // namespace sitrec

#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "topos_forge/io/dsl.hpp"
#include "topos_forge/io/workspace.hpp"

namespace topos::io {

struct Loaded {
  Workspace workspace;
  Report diagnostics;
};

namespace detail {

inline std::pair<std::size_t, std::size_t> line_col(const std::string& text, std::size_t offset) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else if ((static_cast<unsigned char>(text[i]) & 0xC0) != 0x80) {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace detail

/// Parses one definition file: `.json` files as documents, anything else as DSL.
inline std::optional<json> parse_document(const std::string& label, const std::string& text, bool is_json,
                                          Report& report) {
  try {
    if (is_json) return json::parse(text);
    return compile_dsl(text);
  } catch (const json::parse_error& e) {
    auto [line, col] = detail::line_col(text, e.byte == 0 ? 0 : e.byte - 1);
    report.add(label + ":" + std::to_string(line) + ":" + std::to_string(col) + ": invalid JSON");
  } catch (const ParseError& e) {
    report.add(label + ":" + e.what());
  }
  return std::nullopt;
}

inline Loaded load_texts(const std::vector<std::pair<std::string, std::string>>& files) {
  Loaded out;
  std::vector<std::pair<std::string, json>> docs;
  for (const auto& [label, text] : files) {
    bool is_json = std::filesystem::path(label).extension() == ".json";
    auto doc = parse_document(label, text, is_json, out.diagnostics);
    if (!doc) continue;
    if (doc->is_object() && doc->contains("formulas") && (*doc)["formulas"].is_object()) {
      for (auto& [name, body] : (*doc)["formulas"].items()) {
        if (body.is_object()) body["file"] = label;
      }
    }
    docs.emplace_back(label, std::move(*doc));
  }
  if (!out.diagnostics.ok()) return out;
  json merged = merge_documents(docs, out.diagnostics);
  if (!out.diagnostics.ok()) return out;
  out.workspace = workspace_from_json(merged, out.diagnostics);
  return out;
}

/// Reads and resolves definition files; a directory contributes its
/// `.json` and `.tf` files in name order.
inline Loaded load_workspace(const std::vector<std::string>& paths) {
  std::vector<std::pair<std::string, std::string>> files;
  Loaded failed;
  auto read = [&](const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) {
      failed.diagnostics.add(p.string() + ": cannot be read");
      return;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    files.emplace_back(p.string(), ss.str());
  };
  for (const auto& path : paths) {
    std::filesystem::path p(path);
    if (std::filesystem::is_directory(p)) {
      std::vector<std::filesystem::path> entries;
      for (const auto& e : std::filesystem::directory_iterator(p)) {
        auto ext = e.path().extension();
        if (e.is_regular_file() && (ext == ".json" || ext == ".tf")) entries.push_back(e.path());
      }
      std::sort(entries.begin(), entries.end());
      for (const auto& e : entries) read(e);
    } else {
      read(p);
    }
  }
  if (!failed.diagnostics.ok()) return failed;
  return load_texts(files);
}

}  // namespace topos::io

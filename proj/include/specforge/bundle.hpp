#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

#include "specforge/ir.hpp"

namespace specforge::ir {

/// Reads a project bundle directory (project.json, tables/, apis/, docs/)
/// and returns a validated Project. Throws ParseError for malformed files
/// and ValidationError for semantic problems.
Project parse_project(const std::filesystem::path& bundlePath);

/// Parses an ApiDef from JSON or YAML text without validating it.
/// `sourceName` labels ParseError positions.
ApiDef parse_api_text(const std::string& text, const std::string& sourceName);

/// Parses a statement array (JSON or YAML text) without validating it.
Block parse_block_text(const std::string& text, const std::string& sourceName);

/// Parses one table description, JSON or Fig-style YAML.
TableSchema parse_table_text(const std::string& text, const std::string& sourceName);

// Canonical JSON encodings, the same shape the bundle reader accepts.
nlohmann::json to_json(const Expr& expr);
nlohmann::json to_json(const Block& block);
nlohmann::json to_json(const TableSchema& table);
nlohmann::json to_json(const ApiDef& api);
nlohmann::json to_json(const Project& project);

}  // namespace specforge::ir

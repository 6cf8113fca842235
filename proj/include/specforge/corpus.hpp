#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "specforge/ir.hpp"

namespace specforge {

struct Variant {
  std::string project;
  int variantId = 0;
  std::string description;
  std::vector<std::pair<std::string, ir::Block>> patch;  // (api, replacement body)
};

/// Root of the shipped fixtures: $SPECFORGE_FIXTURES_DIR when set, else the
/// source tree's fixtures/ directory.
std::filesystem::path fixtures_dir();

/// UserAuth or BankAccount. Throws UnknownFixture otherwise.
ir::Project load_fixture(const std::string& name);

std::filesystem::path fixture_bundle(const std::string& name);

Variant load_variant_file(const std::filesystem::path& file);

/// Every variant shipped for `project`, ordered by id.
std::vector<Variant> load_variants(const std::string& project);

/// Applies a shipped variant. Throws UnknownVariant when none has that id.
ir::Project apply_variant(const ir::Project& project, int variantId);

/// Replaces the listed API bodies. The patched project must validate and
/// every API must keep its table-state signature.
ir::Project apply_variant(const ir::Project& project, const Variant& variant);

}  // namespace specforge

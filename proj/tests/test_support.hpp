#pragma once

#include <string>

#include "ast.hpp"

namespace lacuna::testing {

// Reads a file from the source-tree asset directory baked in at compile time.
std::string asset_path(const std::string& name);
std::string read_asset(const std::string& name);
std::string read_file(const std::string& path);

}  // namespace lacuna::testing

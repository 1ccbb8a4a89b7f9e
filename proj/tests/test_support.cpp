#include "test_support.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace lacuna::testing {

std::string asset_path(const std::string& name) {
  return std::string(LACUNA_ASSET_DIR) + "/" + name;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::string read_asset(const std::string& name) {
  return read_file(asset_path(name));
}

}  // namespace lacuna::testing

#pragma once

#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#ifndef ZSR_TEST_SCRATCH
#define ZSR_TEST_SCRATCH "test_scratch"
#endif

namespace zsr::test {

/// Empty per-test directory under the build tree.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::path(ZSR_TEST_SCRATCH) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::vector<char> read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace zsr::test

#ifndef ZSR_FIXTURE_DIR
#define ZSR_FIXTURE_DIR "tests/fixtures"
#endif

#include <map>
#include <stdexcept>

namespace zsr::test {

inline std::filesystem::path fixture(const std::string& name) { return std::filesystem::path(ZSR_FIXTURE_DIR) / name; }

/// Values recorded by tools/fixture_oracle.py.
inline double oracle_value(const std::string& key) {
  std::ifstream in(fixture("oracle.txt"));
  std::string k;
  double v = 0;
  while (in >> k >> v) {
    if (k == key) return v;
  }
  throw std::runtime_error("oracle.txt has no entry " + key);
}

}  // namespace zsr::test

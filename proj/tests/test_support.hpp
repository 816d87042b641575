#pragma once

// Shared fixtures and test-only oracles. Nothing here calls into the order
// or distance code under test.

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "resil/behavior.hpp"

namespace resil::testing {

inline const std::array<std::string, 4> kFigureNames{"f1", "f2", "f3", "f4"};

inline FigureSpec figures_from_mask(unsigned mask) {
  std::vector<std::string> ids;
  for (unsigned i = 0; i < kFigureNames.size(); ++i)
    if (mask & (1u << i)) ids.push_back(kFigureNames[i]);
  return FigureSpec::named(ids);
}

struct UniverseItem {
  BehaviorDescriptor descriptor;
  unsigned mask;
};

/// 5 classes x 16 subsets of four named figures x 2 social flags.
inline std::vector<UniverseItem> descriptor_universe() {
  std::vector<UniverseItem> out;
  for (auto cls : kAllBehaviorClasses)
    for (unsigned mask = 0; mask < 16; ++mask)
      for (bool social : {false, true})
        out.push_back({{cls, figures_from_mask(mask), social}, mask});
  return out;
}

/// Strict-subset test on bitmasks.
constexpr bool mask_strict_subset(unsigned a, unsigned b) { return (a & ~b) == 0 && a != b; }

/// The three clauses of the order definition, evaluated on bitmasks.
inline bool oracle_precedes(const UniverseItem& a, const UniverseItem& b) {
  const int pa = static_cast<int>(a.descriptor.cls);
  const int pb = static_cast<int>(b.descriptor.cls);
  const bool inclusion = pa <= pb && mask_strict_subset(a.mask, b.mask);
  const bool social = pa == pb && !a.descriptor.social && b.descriptor.social;
  return inclusion || social;
}

/// Word layout computed with multiplication instead of shifts.
constexpr std::uint64_t oracle_word(int class_id, std::uint64_t cardinality) {
  return static_cast<std::uint64_t>(class_id) * 536870912ULL + cardinality;
}

inline BehaviorDescriptor named(BehaviorClass cls, std::initializer_list<const char*> ids,
                                bool social = false) {
  return {cls, FigureSpec::named(ids), social};
}

inline BehaviorDescriptor order(BehaviorClass cls, std::uint64_t n, bool social = false) {
  return {cls, FigureSpec::cardinality_only(n), social};
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << content;
}

/// Fresh scratch directory, removed on destruction.
class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag) {
    static std::mt19937_64 names(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() /
            ("resil-" + tag + "-" + std::to_string(names()));
    std::filesystem::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace resil::testing

// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Run everything, a subset with --only 1,4,7, or list with --list.
#include <cstdio>
#include <cstring>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "acceptance_criteria.hpp"

int main(int argc, char** argv) {
  std::set<int> only;
  bool list = false;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--list") == 0) {
      list = true;
    } else if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
      const char* p = argv[++i];
      while (*p) {
        only.insert(std::atoi(p));
        while (*p && *p != ',') ++p;
        if (*p == ',') ++p;
      }
    } else {
      std::fprintf(stderr, "usage: %s [--list] [--only N[,M...]]\n", argv[0]);
      return 2;
    }
  }

  const auto& criteria = acceptance::all_criteria();
  if (list) {
    for (const auto& c : criteria) std::printf("%2d  %s\n", c.id, c.name);
    return 0;
  }

  int failures = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    std::string detail;
    bool ok = false;
    try {
      ok = c.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    std::printf("[%2d] %s  %s%s%s\n", c.id, ok ? "PASS" : "FAIL", c.name,
                detail.empty() ? "" : "  -- ", detail.c_str());
    std::fflush(stdout);
    failures += !ok;
  }
  if (failures) std::printf("%d criterion(s) failed\n", failures);
  return failures ? 1 : 0;
}

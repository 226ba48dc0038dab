#ifndef OED_TESTS_ACCEPTANCE_CRITERIA_HPP
#define OED_TESTS_ACCEPTANCE_CRITERIA_HPP

#include <functional>
#include <string>
#include <vector>

namespace acceptance {

struct Criterion {
  int id;
  const char* name;
  std::function<bool(std::string& detail)> run;
};

const std::vector<Criterion>& all_criteria();

}  // namespace acceptance

#endif  // OED_TESTS_ACCEPTANCE_CRITERIA_HPP

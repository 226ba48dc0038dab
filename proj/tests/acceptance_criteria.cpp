#include "acceptance_criteria.hpp"

namespace acceptance {

const std::vector<Criterion>& all_criteria() {
  static const std::vector<Criterion> criteria = {};
  return criteria;
}

}  // namespace acceptance

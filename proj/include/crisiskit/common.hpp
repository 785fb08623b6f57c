#pragma once

#include <stdexcept>

namespace crisiskit::num {

inline void check(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace crisiskit::num

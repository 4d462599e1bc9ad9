#pragma once

#include <chrono>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

namespace acceptance {

struct Outcome {
  bool passed = false;
  std::string detail;
};

struct Criterion {
  std::string name;
  std::string group;  // criteria sharing trained policies run together
  std::function<Outcome()> run;
};

std::vector<Criterion>& registry();

struct Register {
  Register(std::string name, std::string group, std::function<Outcome()> fn) {
    registry().push_back({std::move(name), std::move(group), std::move(fn)});
  }
};

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <class... Ts>
std::string cat(const Ts&... xs) {
  std::ostringstream os;
  os.precision(4);
  (os << ... << xs);
  return os.str();
}

}  // namespace acceptance

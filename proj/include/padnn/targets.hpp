#pragma once

// Builtin target functions on [0,1] for experiments: smooth (sin2pi), kinked
// (absaw), discontinuous (step), and polynomials (poly:c0,c1,...).

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace padnn {

inline std::function<double(double)> make_target(const std::string& name) {
  if (name == "sin2pi")
    return [](double x) { return std::sin(6.283185307179586476925286766559 * x); };
  if (name == "absaw" || name == "abs-saw")
    return [](double x) { return std::fabs(2.0 * x - 1.0); };
  if (name == "step")
    return [](double x) { return x >= 0.5 ? 1.0 : 0.0; };
  if (name.rfind("poly:", 0) == 0) {
    std::vector<double> cs;
    std::string rest = name.substr(5);
    size_t pos = 0;
    while (pos <= rest.size()) {
      const size_t comma = rest.find(',', pos);
      const std::string tok = rest.substr(pos, comma == std::string::npos ? comma : comma - pos);
      if (tok.empty()) throw std::invalid_argument("make_target: empty poly coefficient");
      size_t used = 0;
      cs.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument("make_target: bad poly coefficient");
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (cs.empty()) throw std::invalid_argument("make_target: poly needs coefficients");
    return [cs](double x) {
      double acc = 0.0;
      for (size_t i = cs.size(); i-- > 0;) acc = acc * x + cs[i];
      return acc;
    };
  }
  throw std::invalid_argument("make_target: unknown target \"" + name +
                              "\" (expected sin2pi, absaw, step, or poly:<c0,c1,...>)");
}

}  // namespace padnn

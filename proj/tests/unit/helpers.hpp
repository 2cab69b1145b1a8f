#pragma once

#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "topswap/config_space.hpp"
#include "topswap/rng.hpp"

#include <doctest.h>

namespace doctest {
template <>
struct StringMaker<topswap::TwoDeckLine> {
  static String convert(const topswap::TwoDeckLine& l) { return l.to_string().c_str(); }
};
template <>
struct StringMaker<topswap::Configuration> {
  static String convert(const topswap::Configuration& c) { return c.to_string().c_str(); }
};
}  // namespace doctest

namespace topswap::testing {

// "3 4 * 5 2 1 6"
inline TwoDeckLine line(const std::string& text) {
  std::istringstream in(text);
  std::vector<Card> symbols;
  std::string tok;
  while (in >> tok) symbols.push_back(tok == "*" ? kStar : static_cast<Card>(std::stoi(tok)));
  return TwoDeckLine(symbols);
}

// "3 4 | 5 2 1 6"
inline Configuration decks(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::vector<Card>> out(1);
  std::string tok;
  while (in >> tok) {
    if (tok == "|")
      out.emplace_back();
    else
      out.back().push_back(static_cast<Card>(std::stoi(tok)));
  }
  return Configuration(out);
}

inline std::vector<double> random_function(std::size_t size, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> f(size);
  for (auto& v : f) v = rng.uniform01() - 0.5;
  return f;
}

inline Eigen::VectorXd as_vector(const std::vector<double>& f) {
  return Eigen::Map<const Eigen::VectorXd>(f.data(), static_cast<Eigen::Index>(f.size()));
}

}  // namespace topswap::testing

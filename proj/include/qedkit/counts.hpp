#pragma once

// Shot tallies keyed by classical bit-string. Convention: classical bit 0 is
// the leftmost character; bit_order[i] names the classical bit at string
// position i (positions shrink when post-selection removes flag bits).

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace qedkit {

using Distribution = std::map<std::string, double>;

struct CountsError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Counts {
  std::map<std::string, std::uint64_t> counts;
  std::uint64_t n_shots = 0;
  std::vector<int> bit_order;
  std::vector<std::string> bit_roles;

  int n_positions() const { return static_cast<int>(bit_order.size()); }

  void add(const std::string& record) {
    ++counts[record];
    ++n_shots;
  }

  // String positions holding bits with the given role.
  std::vector<int> positions_with_role(const std::string& role) const {
    std::vector<int> out;
    for (size_t i = 0; i < bit_roles.size(); ++i)
      if (bit_roles[i] == role) out.push_back(static_cast<int>(i));
    return out;
  }

  // String positions of the given classical bits.
  std::vector<int> positions_of_bits(const std::vector<int>& bits) const {
    std::vector<int> out;
    for (int b : bits) {
      int pos = -1;
      for (size_t i = 0; i < bit_order.size(); ++i)
        if (bit_order[i] == b) pos = static_cast<int>(i);
      if (pos < 0) throw CountsError("bit not present in counts");
      out.push_back(pos);
    }
    return out;
  }

  Distribution distribution() const {
    if (n_shots == 0) throw CountsError("empty counts");
    Distribution d;
    for (const auto& [s, c] : counts) d[s] = static_cast<double>(c) / static_cast<double>(n_shots);
    return d;
  }

  // Marginal counts over the given string positions, in the given order.
  Counts marginal(const std::vector<int>& positions) const {
    Counts out;
    out.n_shots = n_shots;
    for (int p : positions) {
      out.bit_order.push_back(bit_order.at(static_cast<size_t>(p)));
      out.bit_roles.push_back(bit_roles.at(static_cast<size_t>(p)));
    }
    for (const auto& [s, c] : counts) {
      std::string key;
      key.reserve(positions.size());
      for (int p : positions) key.push_back(s.at(static_cast<size_t>(p)));
      out.counts[key] += c;
    }
    return out;
  }
};

inline nlohmann::json to_json(const Counts& c) {
  nlohmann::json j;
  j["n_shots"] = c.n_shots;
  j["bit_order"] = c.bit_order;
  j["roles"] = c.bit_roles;
  j["counts"] = nlohmann::json::object();
  for (const auto& [s, n] : c.counts) j["counts"][s] = n;
  return j;
}

inline Counts counts_from_json(const nlohmann::json& j) {
  Counts c;
  c.n_shots = j.at("n_shots").get<std::uint64_t>();
  c.bit_order = j.at("bit_order").get<std::vector<int>>();
  c.bit_roles = j.at("roles").get<std::vector<std::string>>();
  for (const auto& [k, v] : j.at("counts").items()) c.counts[k] = v.get<std::uint64_t>();
  return c;
}

inline Distribution marginal_distribution(const Distribution& d, const std::vector<int>& positions) {
  Distribution out;
  for (const auto& [s, p] : d) {
    std::string key;
    key.reserve(positions.size());
    for (int pos : positions) key.push_back(s.at(static_cast<size_t>(pos)));
    out[key] += p;
  }
  return out;
}

}  // namespace qedkit

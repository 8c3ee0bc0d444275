#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "esr/ravi.hpp"

namespace esr {

inline constexpr std::uint32_t kTableFormatVersion = 1;

class TableFormatError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/**
 * Binary container: "ESRT", version, alpha, T, d, gamma, n_states,
 * n_actions, then for t = 0..T the value layer (count + doubles) and the
 * policy layer (count + uint16). Host byte order; dropped layers have count 0.
 */
void write_tables(std::ostream& out, const ValueTable& values, const PolicyTable& policy);
PlanResult read_tables(std::istream& in);

void save_tables(const std::string& path, const PlanResult& result);
PlanResult load_tables(const std::string& path);

/// Human-readable dump; intended for small models.
nlohmann::json tables_to_json(const ValueTable& values, const PolicyTable& policy);

}  // namespace esr

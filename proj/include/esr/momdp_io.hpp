#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "esr/momdp.hpp"

namespace esr {

/**
 * MOMDP interchange format.
 *
 *   { "d", "extended_range", "gamma", "horizon", "n_actions", "n_states",
 *     "rewards": [{"a", "s", "vector"}], "start_state",
 *     "transitions": [{"a", "p", "s", "s_next"}] }
 *
 * Omitted transition entries are zero; omitted reward entries are the zero
 * vector. Serialization is canonical: keys sorted, entries ordered by
 * (s, a, s_next), zero entries dropped.
 */
nlohmann::json momdp_to_json(const Momdp& model);

/// Throws ModelError on schema errors (not on invariant violations).
Momdp momdp_from_json(const nlohmann::json& doc);

Momdp read_momdp(const std::filesystem::path& path);
void write_momdp(const Momdp& model, const std::filesystem::path& path);

}  // namespace esr

#pragma once

// Internal registry of embedded fixture snapshots (not installed).

#include <string>
#include <string_view>
#include <vector>

namespace sustain::detail {

struct FixtureEntry {
    const char* name;
    const char* body;
    const char* schema;
    const char* sha256;
};

const FixtureEntry* find_fixture_entry(std::string_view name);
std::vector<std::string> fixture_entry_names();

}  // namespace sustain::detail

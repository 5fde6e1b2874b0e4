#pragma once

#include <string>

#include "catch2/catch_amalgamated.hpp"

inline std::string repo_path(const std::string& rel) {
    return std::string(PINNSE_REPO_DIR) + "/" + rel;
}

inline std::string fixture_path(const std::string& name) {
    return repo_path("tests/unit/fixtures/" + name);
}

#pragma once

#include <filesystem>

#include "ssorl/idm/idm.hpp"

namespace ssorl::idm {

/// Writes `<path>` (parameter checkpoint) and `<path>.json` (config,
/// normalization statistics, validation curve).
void save_idm(const std::filesystem::path& path, const IdmModel& model);
IdmModel load_idm(const std::filesystem::path& path);

}  // namespace ssorl::idm

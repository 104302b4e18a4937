#pragma once

#include <filesystem>

#include <json.hpp>

#include "lbai/instance.hpp"

namespace lbai {

/// Loader tolerance: values within this distance of [0, 1] are clamped.
inline constexpr double kRewardTolerance = 1e-12;

/// {k, t, label, kind} plus either "rewards" (row-major) or "generator".
nlohmann::json instance_to_json(const BanditInstance& instance);
BanditInstance instance_from_json(const nlohmann::json& doc);

void save_instance(const BanditInstance& instance, const std::filesystem::path& path);
BanditInstance load_instance(const std::filesystem::path& path);

}  // namespace lbai

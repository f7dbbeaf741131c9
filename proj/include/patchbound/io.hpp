#pragma once

#include "patchbound/bounds.hpp"

#include "json.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace patchbound {

/// {"re": [[...]], "im": [[...]]}, row by row.
nlohmann::json matrix_to_json(const CMatrix& m);
CMatrix matrix_from_json(const nlohmann::json& j);

std::uint64_t fnv1a64(std::string_view bytes);

/// FNV-1a over kind, N, d, the parameters and the per-site fields.
std::uint64_t model_hash(const SpinChainModel& model);

nlohmann::json model_to_json(const SpinChainModel& model);
/// Rebuilds the model from name, N and params; throws std::invalid_argument
/// when the stored fields disagree with the rebuilt ones.
SpinChainModel model_from_json(const nlohmann::json& j);

nlohmann::json observable_to_json(const ObservableSpec& observable);
ObservableSpec observable_from_json(const nlohmann::json& j);

/// {method, l, q, k_min, k_max, half_width, oracle, seeds, model, generators, notes}
nlohmann::json bound_result_to_json(const BoundResult& result, const nlohmann::json& model);

/// Binary MPS file, little-endian:
///   char[8] "PBMPS001", u32 N, u32 d, i32 center, u64 model hash,
///   u32 bond dims [N + 1],
///   for each site, for each physical index s, the (left x right) slice in
///   row-major order as (re, im) double pairs.
void write_mps(const std::string& path, const MpsState& mps);
/// Throws std::runtime_error on a missing, truncated or malformed file.
MpsState read_mps(const std::string& path);

/// `<stem>.json` holds window, interior, q and the kept Schmidt weights;
/// `<stem>.bin` holds W (window_dim x q) in the MPS slice byte format.
void write_subspace(const std::string& stem, const PatchSubspace& sub);
CMatrix read_subspace_basis(const std::string& stem);

std::string two_column_csv(const std::string& x_name, const std::string& y_name, const std::vector<double>& x,
                           const std::vector<double>& y);

}  // namespace patchbound

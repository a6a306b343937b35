#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "qpb/config.hpp"
#include "qpb/decay.hpp"
#include "qpb/picard.hpp"

namespace qpb {

using nlohmann::ordered_json;

/// Columns k, t, n_1..n_nu, re, im, modulus, class_bound, margin; one row per
/// (node, mode), nodes outer, modes in ball order; 17 significant digits, LF.
void write_coefficients_csv(const std::filesystem::path& path, const Snapshot& snap, int k,
                            const TimeGrid& grid, const ConstantsReport& consts);

/// Reads initial data from CSV with header n_1..n_nu,c_re,c_im,d_re,d_im.
/// Missing ball points are zero. Throws ConfigError on malformed rows, points
/// outside the ball, or repeated points.
InitialData read_data_csv(const std::filesystem::path& path, const BallPtr& ball, bool hermitian);

ordered_json to_json(const ConstantsReport& c);
ordered_json to_json(const BoundCheckReport& r, const TimeGrid& grid);
ordered_json to_json(const SmallDivisorReport& s);
ordered_json config_json(const RunConfig& cfg);

/// Per iterate, the smallest factor F with |c_k(t_j, n)| <= F w(n) at every node,
/// w = exp(-rho|n|/2) or (1+|n|)^{-r}, next to the class factor B or 2A.
ordered_json decay_fit_json(const PicardRun& run, const InitialData& data,
                            const ConstantsReport& consts);

ordered_json versions_json();

/// Pretty-printed with a trailing newline.
void write_json(const std::filesystem::path& path, const ordered_json& j);

}  // namespace qpb

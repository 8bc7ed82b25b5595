#pragma once

#include "stcl/chains.hpp"
#include "stcl/graph.hpp"
#include "stcl/train.hpp"
#include "stcl/types.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace stcl {

using Json = nlohmann::ordered_json;

// 17 significant digits, enough to round-trip any double.
std::string format_double(double value);

void write_text_file(const std::filesystem::path& path,
                     const std::string& content);

// One header line, then one row per matrix row, full precision.
std::string csv_from_matrix(const std::vector<std::string>& header,
                            const Mat& matrix);
void write_csv(const std::filesystem::path& path,
               const std::vector<std::string>& header, const Mat& matrix);

Json to_json(const TransitionKernel& kernel);
TransitionKernel kernel_from_json(const Json& j);

Json to_json(const TrajectoryEnsemble& ensemble);
TrajectoryEnsemble ensemble_from_json(const Json& j);

Json to_json(const Encoder& encoder);
Encoder encoder_from_json(const Json& j);

// Dense row-major dump of the state graph for CLI inspection.
Json to_json(const StateGraph& graph);

}  // namespace stcl

#pragma once

#include "cmx/channel.hpp"
#include "cmx/codes.hpp"
#include "cmx/sim.hpp"
#include "cmx/xi.hpp"

#include <json.hpp>

#include <string>

namespace cmx {

using Json = nlohmann::ordered_json;

inline constexpr const char* kArtifactVersion = "0.1.0";

Json to_json(const Dmc& w);
Dmc dmc_from_json(const Json& j);

Json to_json(const Pmf& p);
Pmf pmf_from_json(const Json& j);

Json to_json(const ChannelFamily& family);
Json to_json(const XiResult& r, const ChannelFamily& family);
// Report serialization deliberately omits wall-clock time so that repeated
// runs of the same command produce identical files.
Json to_json(const SimReport& r);
Json to_json(const RatioTable& t);
Json to_json(const Codebook& cb);
Json to_json(const LinearCodeSpec& spec);
Json to_json(const ConvCodeSpec& spec);

std::string ratio_table_csv(const RatioTable& t);
std::string xi_result_csv(const XiResult& r, const ChannelFamily& family);
std::string sim_report_csv(const SimReport& r);

// Wraps a payload with schema/version/config provenance and writes it.
void write_result_file(const std::string& path, const std::string& schema, const Json& config,
                       const Json& payload);

} // namespace cmx

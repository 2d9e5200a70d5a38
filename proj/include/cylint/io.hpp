#pragma once

#include <json.hpp>
#include <string>

#include "cylint/integrator.hpp"

namespace cylint {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

// {shape:[d_V,d_U], entries: row-major array}; round-trip is bit-exact for
// finite doubles
json operator_to_json(const Matrix& phi);
Matrix operator_from_json(const json& j);

json vector_to_json(const Vector& v);
Vector vector_from_json(const json& j);

// binary containers: magic + version + dims + seed + little-endian float64
void save_noise_panel(const NoisePanel& panel, const std::string& path);
NoisePanel load_noise_panel(const std::string& path);

void save_integral_sample(const IntegralSample& sample,
                          const std::string& path);
IntegralSample load_integral_sample(const std::string& path);

// small CSV writer: header row + numeric rows
void write_csv(const std::string& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

}  // namespace cylint

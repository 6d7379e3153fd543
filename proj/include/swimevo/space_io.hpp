#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "swimevo/genome.hpp"

namespace swimevo {

// Text form, one dimension per line:
//
//   # name              unit  [period=P] : values...
//   laser_power         W                : 0.4 0.8 1.2
//   polarization_angle  deg   period=180 : 0 15 30
//   tail_direction      -                : 0 1
//
// "-" marks a unitless dimension. Blank lines and '#' comments are ignored.

std::string write_space_text(const ParameterSpace& space);

/// Parses either the text form or the JSON form (detected by a leading '{').
/// Throws std::invalid_argument with a line-qualified message on bad input.
ParameterSpace parse_space(std::string_view document);

ParameterSpace load_space_file(const std::string& path);

nlohmann::json space_to_json(const ParameterSpace& space);
ParameterSpace space_from_json(const nlohmann::json& doc);

nlohmann::json genotype_to_json(const Genotype& g);
Genotype genotype_from_json(const nlohmann::json& doc);

}  // namespace swimevo

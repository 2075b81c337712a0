#pragma once

#include <string>
#include <vector>

#include "fgc/spectrum.hpp"
#include "json.hpp"

namespace fgc::cli {

// 17 significant digits, scientific: the fixed format of every result file.
std::string format_double(double v);

// Serialises with format_double for every floating value so outputs are
// byte-stable; structure and escaping follow nlohmann::json.
std::string dump_fixed(const nlohmann::json& j, int indent = 2);

nlohmann::json spectrum_to_json(const SpectrumResult& spec, const std::vector<std::string>& notes);
std::string spectrum_csv(const SpectrumResult& spec, const std::vector<std::string>& comments);
std::string spectrum_svg(const SpectrumResult& spec, const std::string& title);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace fgc::cli

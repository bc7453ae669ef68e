#pragma once

#include "t3star/anova.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace t3star {

enum class Format { text, json };

Format parse_format(std::string_view text);

/// %.10g, the precision used for every number in rendered output.
std::string format_number(double v);

std::string render(const AnovaTable& table, Format format);

/// `cell_labels[l]` names cell l, e.g. "A=a1,B=b2".
std::string render(const std::vector<EffectContrasts>& contrasts, const FactorSpace& space,
                   const std::vector<std::string>& cell_labels, Format format);

std::string render(const EstimabilityReport& report, const FactorSpace& space,
                   const std::vector<std::string>& cell_labels, Format format);

}  // namespace t3star

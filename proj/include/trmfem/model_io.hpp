#pragma once

#include <string>

#include "trmfem/model.hpp"

namespace trmfem {

// Model JSON format: nodes, elements, interfaces, materials, constraints and
// node sets; round-trips exactly (doubles serialized losslessly).
std::string model_to_json(const Model& model);
Model model_from_json(const std::string& text);

}  // namespace trmfem

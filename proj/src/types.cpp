#include "orblin/types.hpp"

namespace orblin {

std::string to_string(UnitSystem u) {
    switch (u) {
        case UnitSystem::PhysicalKmS: return "physical-km-s";
        case UnitSystem::Canonical2bp: return "canonical-2bp";
        case UnitSystem::NondimCr3bp: return "nondim-cr3bp";
    }
    throw std::logic_error("unknown unit system");
}

UnitSystem unit_system_from_string(const std::string& s) {
    if (s == "physical-km-s") return UnitSystem::PhysicalKmS;
    if (s == "canonical-2bp") return UnitSystem::Canonical2bp;
    if (s == "nondim-cr3bp") return UnitSystem::NondimCr3bp;
    throw std::invalid_argument("unknown unit system tag: " + s);
}

}  // namespace orblin

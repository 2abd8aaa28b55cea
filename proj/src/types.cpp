#include "c3bf/types.hpp"

namespace c3bf {

ModelKind model_kind(const VehicleState& s)
{
    switch (s.index()) {
    case 0: return ModelKind::Unicycle;
    case 1: return ModelKind::Bicycle;
    default: return ModelKind::PointMass;
    }
}

const char* to_string(ModelKind m)
{
    switch (m) {
    case ModelKind::Unicycle: return "unicycle";
    case ModelKind::Bicycle: return "bicycle";
    case ModelKind::PointMass: return "pointmass";
    }
    return "?";
}

const char* to_string(CbfKind k)
{
    switch (k) {
    case CbfKind::C3bf: return "c3bf";
    case CbfKind::Ellipse: return "ellipse";
    case CbfKind::Hocbf: return "hocbf";
    case CbfKind::None: return "none";
    }
    return "?";
}

ModelKind parse_model_kind(const std::string& s)
{
    if (s == "unicycle") return ModelKind::Unicycle;
    if (s == "bicycle") return ModelKind::Bicycle;
    if (s == "pointmass") return ModelKind::PointMass;
    throw ValidationError("unknown model '" + s + "' (expected unicycle | bicycle | pointmass)");
}

CbfKind parse_cbf_kind(const std::string& s)
{
    if (s == "c3bf") return CbfKind::C3bf;
    if (s == "ellipse") return CbfKind::Ellipse;
    if (s == "hocbf") return CbfKind::Hocbf;
    if (s == "none") return CbfKind::None;
    throw ValidationError("unknown cbf '" + s + "' (expected c3bf | ellipse | hocbf | none)");
}

}  // namespace c3bf

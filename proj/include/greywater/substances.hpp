#pragma once

// Household liquids used by the bench experiments. Turbidity and pH are the
// values the sensing unit read; where only a range was read the midpoint is
// used, and where pH was never read (turbid liquids) a typical literature
// value is assumed.

#include "greywater/scenario.hpp"

namespace greywater::substances {

inline Substance drinking_water() { return { "drinking water", { 0.0 }, { 7.17 } }; }
inline Substance tap_water() { return { "tap water", { 2.0 }, { 7.4 } }; }
inline Substance red_wine() { return { "red wine", { 3000.0 }, { 3.5 } }; }
inline Substance water_little_red_wine() { return { "water with little red wine", { 0.0 }, { 5.51 } }; }
inline Substance water_bicarbonate() { return { "water and bicarbonate", { 1050.0 }, { 8.3 } }; }
inline Substance water_vinegar() { return { "water and white wine vinegar", { 20.0 }, { 3.10 } }; }
inline Substance water_degreaser() { return { "water and degreaser", { 750.0 }, { 9.0 } }; }
inline Substance soapy_water() { return { "soapy hand-wash water", { 120.0 }, { 7.8 } }; }

}  // namespace greywater::substances

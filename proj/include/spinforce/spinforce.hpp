#ifndef SPINFORCE_SPINFORCE_HPP
#define SPINFORCE_SPINFORCE_HPP

#include "analysis.hpp"
#include "config.hpp"
#include "core.hpp"
#include "force_model.hpp"
#include "io.hpp"
#include "magnetostatics.hpp"
#include "mechanics.hpp"
#include "nv_spin.hpp"
#include "scenarios.hpp"

#endif // SPINFORCE_SPINFORCE_HPP

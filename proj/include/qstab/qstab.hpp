#pragma once

#include "qstab/error.hpp"
#include "qstab/algebra.hpp"
#include "qstab/quasi_norm.hpp"
#include "qstab/mapping.hpp"
#include "qstab/equations.hpp"
#include "qstab/finite_field.hpp"
#include "qstab/characterization.hpp"
#include "qstab/control.hpp"
#include "qstab/bounds.hpp"
#include "qstab/stability.hpp"

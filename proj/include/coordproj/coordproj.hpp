#pragma once

#include "coordproj/error.hpp"
#include "coordproj/core.hpp"
#include "coordproj/orlicz.hpp"
#include "coordproj/lp.hpp"
#include "coordproj/selector.hpp"
#include "coordproj/rotation.hpp"
#include "coordproj/shatter.hpp"
#include "coordproj/entropy.hpp"
#include "coordproj/complexity.hpp"
#include "coordproj/audit.hpp"

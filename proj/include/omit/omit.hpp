#pragma once

#include "omit/errors.hpp"
#include "omit/model.hpp"
#include "omit/presets.hpp"
#include "omit/response.hpp"
#include "omit/steady.hpp"
#include "omit/timedomain.hpp"
#include "omit/windows.hpp"

#pragma once

#include "gtbr/codec.hpp"
#include "gtbr/compositions.hpp"
#include "gtbr/entropy_dp.hpp"
#include "gtbr/errors.hpp"
#include "gtbr/io.hpp"
#include "gtbr/optimizer.hpp"
#include "gtbr/oracle.hpp"
#include "gtbr/regulator.hpp"
#include "gtbr/weights.hpp"

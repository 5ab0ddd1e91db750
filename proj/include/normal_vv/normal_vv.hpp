#ifndef NORMAL_VV_HPP
#define NORMAL_VV_HPP

#include "bachelier.hpp"
#include "density.hpp"
#include "errors.hpp"
#include "implied_vol.hpp"
#include "normal_distribution.hpp"
#include "sabr.hpp"
#include "vanna_volga.hpp"

#endif

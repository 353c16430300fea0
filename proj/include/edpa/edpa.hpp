#pragma once

#include "common.hpp"
#include "drift.hpp"
#include "identities.hpp"
#include "linalg.hpp"
#include "martingale.hpp"
#include "process.hpp"
#include "qgamma.hpp"
#include "quadrature.hpp"
#include "simulate.hpp"
#include "theta.hpp"
#include "weierstrass.hpp"

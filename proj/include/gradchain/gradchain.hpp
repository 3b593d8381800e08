#pragma once

#include "gradchain/chain.hpp"
#include "gradchain/continuum.hpp"
#include "gradchain/density.hpp"
#include "gradchain/errors.hpp"
#include "gradchain/greens.hpp"
#include "gradchain/oracle.hpp"
#include "gradchain/quadrature.hpp"
#include "gradchain/timedomain.hpp"

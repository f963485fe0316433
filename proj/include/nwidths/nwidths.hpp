#pragma once

#include "nwidths/allocator.hpp"
#include "nwidths/error.hpp"
#include "nwidths/exponents.hpp"
#include "nwidths/finwidths.hpp"
#include "nwidths/params.hpp"
#include "nwidths/rational.hpp"
#include "nwidths/seqmodel.hpp"
#include "nwidths/verify.hpp"

#pragma once

#include "detbank/error.hpp"
#include "detbank/text.hpp"
#include "detbank/random.hpp"
#include "detbank/parallel.hpp"
#include "detbank/core.hpp"
#include "detbank/suppress.hpp"
#include "detbank/pyramid.hpp"
#include "detbank/bank.hpp"
#include "detbank/classify.hpp"
#include "detbank/synth.hpp"

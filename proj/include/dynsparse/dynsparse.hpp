#pragma once

#include "dynsparse/bank.hpp"
#include "dynsparse/config.hpp"
#include "dynsparse/coordinate.hpp"
#include "dynsparse/degree_sketch.hpp"
#include "dynsparse/field.hpp"
#include "dynsparse/forest.hpp"
#include "dynsparse/l0_sampler.hpp"
#include "dynsparse/levels.hpp"
#include "dynsparse/oracle.hpp"
#include "dynsparse/randomness.hpp"
#include "dynsparse/sparse_recovery.hpp"
#include "dynsparse/sparsifier.hpp"
#include "dynsparse/stream_io.hpp"

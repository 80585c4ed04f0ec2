#ifndef SATLAB_SATLAB_HPP
#define SATLAB_SATLAB_HPP

#include "satlab/bench.hpp"
#include "satlab/cnf.hpp"
#include "satlab/concepts.hpp"
#include "satlab/embed.hpp"
#include "satlab/exact.hpp"
#include "satlab/gen.hpp"
#include "satlab/rng.hpp"
#include "satlab/search.hpp"
#include "satlab/support.hpp"

#endif // SATLAB_SATLAB_HPP

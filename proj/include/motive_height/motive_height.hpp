#ifndef MOTIVE_HEIGHT_MOTIVE_HEIGHT_HPP
#define MOTIVE_HEIGHT_MOTIVE_HEIGHT_HPP

#include "cli.hpp"
#include "document.hpp"
#include "elliptic.hpp"
#include "experiments.hpp"
#include "fl.hpp"
#include "hodge.hpp"
#include "lines.hpp"
#include "motive.hpp"
#include "parallel.hpp"

#endif

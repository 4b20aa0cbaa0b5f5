#pragma once

// Quad precision for the finite-difference oracles. Needs GNU extensions
// and libquadmath, both private to bsfb_core.
#include <boost/multiprecision/float128.hpp>

namespace bsfb::detail {
using quad = boost::multiprecision::float128;
}

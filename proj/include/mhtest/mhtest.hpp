#ifndef MHTEST_MHTEST_HPP
#define MHTEST_MHTEST_HPP

#include "mhtest/costs.hpp"
#include "mhtest/diagnostics.hpp"
#include "mhtest/embedding.hpp"
#include "mhtest/error.hpp"
#include "mhtest/path_model.hpp"
#include "mhtest/sequential_test.hpp"
#include "mhtest/strategies.hpp"

#endif  // MHTEST_MHTEST_HPP

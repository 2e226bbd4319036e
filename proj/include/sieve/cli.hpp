#pragma once

#include <iostream>

namespace sieve::cli {

int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace sieve::cli

#include "cli_impl.hpp"

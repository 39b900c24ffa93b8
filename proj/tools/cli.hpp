#pragma once

#include <iosfwd>

namespace kronmeet::cli {

int run(int argc, char** argv, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace kronmeet::cli

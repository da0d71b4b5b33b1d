#include "cli.hpp"

namespace bnls::cli {

int run_main(int, char**) { return 0; }

}  // namespace bnls::cli

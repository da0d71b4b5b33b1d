#ifndef BNLS_TOOLS_CLI_HPP
#define BNLS_TOOLS_CLI_HPP

namespace bnls::cli {

int run_main(int argc, char** argv);

}  // namespace bnls::cli

#endif

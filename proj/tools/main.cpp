#include "ksalsa/cli.hpp"

int main(int argc, char** argv) { return ksalsa::cli::dispatch(argc, argv); }

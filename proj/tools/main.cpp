#include "kvstring/cli.hpp"

int main(int argc, char** argv) { return kvstring::cli_main(argc, argv); }

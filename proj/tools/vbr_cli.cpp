#include "vbr/app/commands.hpp"

#include <iostream>

int main(int argc, char** argv) { return vbr::app::cli_main(argc, argv, std::cout, std::cerr); }
